#ifndef PURSUIT_SERIALIZE_HPP
#define PURSUIT_SERIALIZE_HPP

#include <iosfwd>

#include "pursuit/pipeline.hpp"
#include "pursuit/rl.hpp"

namespace pursuit::serialize {

/// Versioned self-describing text blobs, magic header "PZOO1 <kind>".
/// Doubles are written with enough digits to round-trip exactly, so a
/// reloaded model predicts bit-identically.
void save_pipeline(std::ostream& out, const pipeline::PipelineModels& models);
pipeline::PipelineModels load_pipeline(std::istream& in);

void save_value_fn(std::ostream& out, const rl::ValueFn& v);
rl::ValueFn load_value_fn(std::istream& in);

} // namespace pursuit::serialize

#endif
