#pragma once

#include <cstdlib>
#include <string>

#include "dioph/error.hpp"

namespace dioph {

/// Working-precision ladder: start at initial_bits and double on
/// PrecisionInsufficient until cap_bits, then give up.
struct PrecisionPolicy {
  long initial_bits = 128;
  long cap_bits = 4096;

  /// Default policy with DIOPH_PRECISION_CAP applied when set.
  static PrecisionPolicy from_environment() {
    PrecisionPolicy p;
    if (const char* env = std::getenv("DIOPH_PRECISION_CAP")) {
      char* end = nullptr;
      long v = std::strtol(env, &end, 10);
      if (end == env || *end != '\0' || v < 64) {
        fail(Errc::invalid_argument, std::string("DIOPH_PRECISION_CAP must be an integer >= 64, got '") + env + "'");
      }
      p.cap_bits = v;
    }
    return p;
  }
};

template <class F>
auto with_precision_retry(const PrecisionPolicy& policy, F&& f) -> decltype(f(long{})) {
  for (long bits = policy.initial_bits;; bits *= 2) {
    if (bits > policy.cap_bits) bits = policy.cap_bits;
    try {
      return f(bits);
    } catch (const PrecisionInsufficient&) {
      if (bits >= policy.cap_bits) throw;
    }
  }
}

}  // namespace dioph
