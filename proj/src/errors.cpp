#include "idlab/errors.hpp"

namespace idlab {

const char* to_string(Errc code) {
  switch (code) {
    case Errc::invalid_dimension: return "invalid-dimension";
    case Errc::invalid_parameter: return "invalid-parameter";
    case Errc::invalid_input: return "invalid-input";
    case Errc::sampling_stalled: return "sampling-stalled";
    case Errc::infeasible_system: return "infeasible-system";
    case Errc::degenerate_system: return "degenerate-system";
    case Errc::conditioning: return "conditioning";
    case Errc::width_mismatch: return "width-mismatch";
    case Errc::label_out_of_range: return "label-out-of-range";
    case Errc::divergence: return "divergence";
    case Errc::unsupported_oracle: return "unsupported-oracle";
    case Errc::invalid_config: return "invalid-config";
    case Errc::io: return "io";
  }
  return "unknown";
}

}  // namespace idlab
