#pragma once

#include <gmpxx.h>

#include <cmath>
#include <cstdint>
#include <limits>

#include "dioph/numerics/certified_real.hpp"

namespace dioph {

using u128 = unsigned __int128;

/// Fractional part of a real in 2^-128 units, with an absolute error bound
/// in the same units: the true fraction times 2^128 lies within
/// value +/- err modulo 2^128. Integer combinations wrap exactly, so the
/// fractional part of j . x costs a few machine multiplies.
struct FixedFrac {
  u128 value = 0;
  u128 err = 0;
};

namespace detail {

inline u128 low_128(const mpz_class& z) {
  mpz_class r;
  mpz_fdiv_r_2exp(r.get_mpz_t(), z.get_mpz_t(), 128);
  mpz_class hi = r >> 64;
  mpz_class lo = r - (hi << 64);
  return (static_cast<u128>(hi.get_ui()) << 64) | static_cast<u128>(lo.get_ui());
}

inline constexpr u128 kErrSaturated = static_cast<u128>(1) << 120;

inline u128 sat_add(u128 a, u128 b) {
  u128 s = a + b;
  return (s < a || s > kErrSaturated) ? kErrSaturated : s;
}

inline u128 sat_mul(u128 a, std::uint64_t k) {
  if (k == 0 || a == 0) return 0;
  if (a > kErrSaturated / k) return kErrSaturated;
  return a * k;
}

}  // namespace detail

inline FixedFrac to_fixed_frac(const CertifiedReal& x) {
  FixedFrac f;
  if (x.is_surd()) {
    // floor(x 2^128) is exact and the true value lies in [N, N+1).
    f.value = detail::low_128(x.surd().floor_scaled(128));
    f.err = x.surd().is_rational() && x.surd().r() == 1 ? 0 : 1;
    return f;
  }
  const Ball& b = x.ball();
  BigFloat lo = b.lower();
  BigFloat hi = b.upper();
  mpfr_mul_2ui(lo.get(), lo.get(), 128, MPFR_RNDD);
  mpfr_mul_2ui(hi.get(), hi.get(), 128, MPFR_RNDU);
  mpz_class zl, zh;
  mpfr_get_z(zl.get_mpz_t(), lo.get(), MPFR_RNDD);
  mpfr_get_z(zh.get_mpz_t(), hi.get(), MPFR_RNDU);
  mpz_class width = zh - zl;
  f.value = detail::low_128(zl);
  f.err = width >= (mpz_class(1) << 120) ? detail::kErrSaturated : detail::low_128(width);
  return f;
}

/// Distance to the nearest integer in 2^-128 units (the midpoint value).
inline u128 fixed_dist(u128 v) {
  u128 neg = -v;
  return v < neg ? v : neg;
}

/// v * 2^-128 as a long double, correctly rounded to the long double format.
inline long double fixed_to_ld(u128 v) {
  return std::ldexp(static_cast<long double>(v), -128);
}

/// Unit roundoff of long double arithmetic.
inline constexpr long double kLdEps = std::numeric_limits<long double>::epsilon();

}  // namespace dioph
