#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace dioph {

enum class Errc {
  precision_insufficient,
  dimension_mismatch,
  perfect_square_radicand,
  malformed_entry,
  zero_vector_j,
  monotonicity_violation,
  zero_denominator,
  phi_out_of_range,
  insufficient_data,
  not_bad,
  insufficient_records,
  delta_out_of_range,
  budget_exceeded,
  non_monotone_psi,
  nu_too_small,
  s_out_of_range,
  invalid_argument,
};

constexpr std::string_view errc_name(Errc c) {
  switch (c) {
    case Errc::precision_insufficient: return "PrecisionInsufficient";
    case Errc::dimension_mismatch: return "DimensionMismatch";
    case Errc::perfect_square_radicand: return "PerfectSquareRadicand";
    case Errc::malformed_entry: return "MalformedEntry";
    case Errc::zero_vector_j: return "ZeroVectorJ";
    case Errc::monotonicity_violation: return "MonotonicityViolation";
    case Errc::zero_denominator: return "ZeroDenominator";
    case Errc::phi_out_of_range: return "PhiOutOfRange";
    case Errc::insufficient_data: return "InsufficientData";
    case Errc::not_bad: return "NotBad";
    case Errc::insufficient_records: return "InsufficientRecords";
    case Errc::delta_out_of_range: return "DeltaOutOfRange";
    case Errc::budget_exceeded: return "BudgetExceeded";
    case Errc::non_monotone_psi: return "NonMonotonePsi";
    case Errc::nu_too_small: return "NuTooSmall";
    case Errc::s_out_of_range: return "SOutOfRange";
    case Errc::invalid_argument: return "InvalidArgument";
  }
  return "Unknown";
}

/// Base of every error raised by the library. The code identifies the
/// failure class; the message carries the detail.
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what)
      : std::runtime_error(std::string(errc_name(code)) + ": " + what), code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

/// A comparison or floor could not be decided at the working precision.
/// Callers re-evaluate at a higher precision (see with_precision_retry).
class PrecisionInsufficient : public Error {
 public:
  explicit PrecisionInsufficient(const std::string& what)
      : Error(Errc::precision_insufficient, what) {}
};

[[noreturn]] inline void fail(Errc code, const std::string& what) {
  if (code == Errc::precision_insufficient) throw PrecisionInsufficient(what);
  throw Error(code, what);
}

}  // namespace dioph
