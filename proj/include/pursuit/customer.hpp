#ifndef PURSUIT_CUSTOMER_HPP
#define PURSUIT_CUSTOMER_HPP

#include <cstdint>

namespace pursuit {

constexpr int kRegionCount = 8;
constexpr int kOccupationCount = 6;

/// The customer attributes visible to insurers. Hidden attributes
/// (price sensitivity) are deliberately NOT part of this struct; they live in
/// market::SampledCustomer and never reach an interaction record.
struct CustomerFeatures {
    double age = 0.0;            // years, 18..90
    int region = 0;              // 0..7
    int occupation = 0;          // 0..5
    double vehicle_value = 0.0;  // currency units, > 0
    double years_licensed = 0.0; // <= age - 17
    double income = 0.0;         // > 0, derived from region/age/occupation
    double risk_score = 0.0;     // [0, 1]
    std::int64_t customer_id = 0;
};

} // namespace pursuit

#endif
