#pragma once

// Double-double arithmetic (hi + lo, about 106 significant bits) built from
// error-free transformations. Used by the fast scan paths, where a single
// rounding per term would dominate the error budget of sums with 10^8 terms.

#include <cmath>
#include <cstdint>

#include "dioph/numerics/fixed_frac.hpp"

namespace dioph {

struct DWord {
  double hi = 0;
  double lo = 0;
};

namespace detail {

inline DWord two_sum(double a, double b) {
  double s = a + b;
  double bb = s - a;
  return {s, (a - (s - bb)) + (b - bb)};
}

inline DWord fast_two_sum(double a, double b) {  // |a| >= |b|
  double s = a + b;
  return {s, b - (s - a)};
}

inline DWord split(double a) {
  constexpr double kSplitter = 134217729.0;  // 2^27 + 1
  double c = kSplitter * a;
  double hi = c - (c - a);
  return {hi, a - hi};
}

inline DWord two_prod(double a, double b) {
  double p = a * b;
  DWord as = split(a), bs = split(b);
  double e = ((as.hi * bs.hi - p) + as.hi * bs.lo + as.lo * bs.hi) + as.lo * bs.lo;
  return {p, e};
}

inline double exact_double(u128 chunk) {  // chunk < 2^53
  return static_cast<double>(static_cast<std::int64_t>(chunk));
}

}  // namespace detail

/// v 2^-128 with relative error below 2^-104.
inline DWord dword_from_fixed(u128 v) {
  // three chunks of at most 53 bits, each converted exactly
  constexpr u128 kMask53 = (static_cast<u128>(1) << 53) - 1;
  const double c2 = detail::exact_double(v >> 75) * 0x1p-53;
  const double c1 = detail::exact_double((v >> 22) & kMask53) * 0x1p-106;
  const double c0 = detail::exact_double(v & ((static_cast<u128>(1) << 22) - 1)) * 0x1p-128;
  DWord s = detail::two_sum(c2, c1);
  return detail::fast_two_sum(s.hi, s.lo + c0);
}

inline DWord dw_mul(const DWord& a, const DWord& b) {
  DWord p = detail::two_prod(a.hi, b.hi);
  p.lo += a.hi * b.lo + a.lo * b.hi;
  return detail::fast_two_sum(p.hi, p.lo);
}

/// 1 / a by one Newton step on the double reciprocal.
inline DWord dw_recip(const DWord& a) {
  double r = 1.0 / a.hi;
  DWord s = detail::two_prod(r, a.hi);
  double e = ((1.0 - s.hi) - s.lo) - r * a.lo;
  return detail::fast_two_sum(r, r * e);
}

/// Bound on the relative error of a chain of n conversions, dw_mul and
/// dw_recip steps: each loses at most 2^-101 (generous).
inline double dword_chain_rel(std::size_t n) { return std::ldexp(static_cast<double>(4 * (n + 1)), -101); }

}  // namespace dioph
