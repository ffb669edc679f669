#ifndef PURSUIT_RECORD_HPP
#define PURSUIT_RECORD_HPP

#include <iosfwd>
#include <vector>

#include "pursuit/customer.hpp"

namespace pursuit {

namespace market {

struct Offer {
    int insurer_id = 0;
    double price = 0.0;
};

/// Normalised averages of the 1, 3, and 5 most competitive rival offers.
struct MarketVariables {
    double m1 = 0.0;
    double m3 = 0.0;
    double m5 = 0.0;
};

} // namespace market

/// One row of the historic dataset: everything the insurer can ever learn
/// about an interaction. Market variables are the realised ones, available
/// after the fact, not the market-model estimates.
struct InteractionRecord {
    CustomerFeatures customer;
    double cost = 0.0;
    double action = 0.0; // realised price / cost, post-modulation
    double price = 0.0;
    std::vector<market::Offer> competitor_offers;
    market::MarketVariables market_vars;
    bool accepted = false;
    int epoch = 0;
    int t = 0;
};

/// CSV with the fixed column set:
/// epoch,t,customer_id,age,region,occupation,vehicle_value,years_licensed,
/// income,risk_score,cost,our_action,our_price,m1,m3,m5,accepted
void write_records_csv(std::ostream& out, const std::vector<InteractionRecord>& records);

} // namespace pursuit

#endif
