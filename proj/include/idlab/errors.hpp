#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace idlab {

enum class Errc {
  invalid_dimension,
  invalid_parameter,
  invalid_input,
  sampling_stalled,
  infeasible_system,
  degenerate_system,
  conditioning,
  width_mismatch,
  label_out_of_range,
  divergence,
  unsupported_oracle,
  invalid_config,
  io,
};

const char* to_string(Errc code);

/// Base class for every error raised by the library. The code identifies the
/// failure class; the message carries the specifics.
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

/// A rejection sampler exhausted its proposal budget.
class SamplingStalled : public Error {
 public:
  SamplingStalled(std::uint64_t proposals, std::uint64_t accepted, const std::string& what)
      : Error(Errc::sampling_stalled, what), proposals_(proposals), accepted_(accepted) {}

  std::uint64_t proposals() const noexcept { return proposals_; }
  double acceptance_rate() const noexcept {
    return proposals_ == 0 ? 0.0 : static_cast<double>(accepted_) / static_cast<double>(proposals_);
  }

 private:
  std::uint64_t proposals_;
  std::uint64_t accepted_;
};

/// Training produced a non-finite loss.
class DivergenceError : public Error {
 public:
  DivergenceError(int epoch, const std::string& what)
      : Error(Errc::divergence, what), epoch_(epoch) {}

  int epoch() const noexcept { return epoch_; }

 private:
  int epoch_;
};

}  // namespace idlab
