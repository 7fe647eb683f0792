#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace ncfountain {

/// Invalid or incomplete experiment / simulation configuration.
struct ConfigError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

/// Argument outside the mathematical domain of a function (e.g. d > K).
struct DomainError : std::domain_error {
  using std::domain_error::domain_error;
};

/// A truncated distribution could not reach the requested tail tolerance
/// within the allowed support.
struct TruncationError : std::runtime_error {
  TruncationError(const std::string& what, double tail, std::size_t support)
      : std::runtime_error(what + " (achieved tail mass " + std::to_string(tail) +
                           " at M_max=" + std::to_string(support) + ")"),
        achieved_tail(tail),
        support_end(support) {}

  double achieved_tail;
  std::size_t support_end;
};

/// A simulated block needed more slots than the hard cap allows. Usually a
/// configuration with an erasure probability at or near one.
struct RunawayError : std::runtime_error {
  RunawayError(const std::string& what, std::size_t slot_cap)
      : std::runtime_error(what), cap(slot_cap) {}

  std::size_t cap;
};

}  // namespace ncfountain
