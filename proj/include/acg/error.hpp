#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace acg {

enum class ErrorCode {
  invalid_distribution,
  zero_mean_degree,
  invalid_argument,
  infeasible_sequence,
  clip_overflow,
  dead_end,
  retries_exhausted,
  margin_mismatch,
  cap_exceeded,
  inconsistent_wiring,
  zero_partition,
  no_convergence,
  unsupported_margin,
  singular_hessian,
  not_a_tree,
  degenerate_variance,
  io,
};

std::string_view to_string(ErrorCode code);

// All library failures surface as this exception; code() names the violated
// contract so callers (the CLI in particular) can map it to an exit status.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

inline std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::invalid_distribution: return "InvalidDistribution";
    case ErrorCode::zero_mean_degree: return "ZeroMeanDegree";
    case ErrorCode::invalid_argument: return "InvalidArgument";
    case ErrorCode::infeasible_sequence: return "InfeasibleSequence";
    case ErrorCode::clip_overflow: return "ClipOverflow";
    case ErrorCode::dead_end: return "DeadEnd";
    case ErrorCode::retries_exhausted: return "RetriesExhausted";
    case ErrorCode::margin_mismatch: return "MarginMismatch";
    case ErrorCode::cap_exceeded: return "CapExceeded";
    case ErrorCode::inconsistent_wiring: return "InconsistentWiring";
    case ErrorCode::zero_partition: return "ZeroPartition";
    case ErrorCode::no_convergence: return "NoConvergence";
    case ErrorCode::unsupported_margin: return "UnsupportedMargin";
    case ErrorCode::singular_hessian: return "SingularHessian";
    case ErrorCode::not_a_tree: return "NotATree";
    case ErrorCode::degenerate_variance: return "DegenerateVariance";
    case ErrorCode::io: return "IoError";
  }
  return "Unknown";
}

}  // namespace acg
