#pragma once

#include <gmpxx.h>
#include <mpfr.h>

#include <algorithm>
#include <cmath>
#include <string>
#include <variant>

#include "dioph/error.hpp"
#include "dioph/numerics/ball.hpp"
#include "dioph/numerics/precision.hpp"
#include "dioph/numerics/surd.hpp"

namespace dioph {

enum class Ordering { Less, Equal, Greater };

inline constexpr long kDefaultBits = 128;

/// A real number whose comparisons are decided with a certificate: either an
/// exact quadratic surd, or a ball (BigFloat mode) with a propagated error
/// radius. Immutable value type.
class CertifiedReal {
 public:
  CertifiedReal() : v_(Surd{}) {}
  CertifiedReal(Surd s) : v_(std::move(s)) {}  // NOLINT(google-explicit-constructor)
  CertifiedReal(Ball b) : v_(std::move(b)) {}  // NOLINT(google-explicit-constructor)

  static CertifiedReal integer(long z) { return Surd::integer(mpz_class(z)); }
  static CertifiedReal integer(const mpz_class& z) { return Surd::integer(z); }
  static CertifiedReal rational(const mpq_class& x) { return Surd::rational(x); }

  bool is_surd() const { return std::holds_alternative<Surd>(v_); }
  bool is_ball() const { return std::holds_alternative<Ball>(v_); }
  bool is_rational() const { return is_surd() && surd().is_rational(); }
  const Surd& surd() const { return std::get<Surd>(v_); }
  const Ball& ball() const { return std::get<Ball>(v_); }

  /// Precision of the ball representation, or 0 for exact values.
  long precision() const { return is_ball() ? static_cast<long>(ball().precision()) : 0; }

  /// Enclosure at the requested absolute precision (surds) or the stored
  /// precision (balls, which cannot be refined).
  Ball to_ball(long bits = kDefaultBits) const {
    if (is_ball()) return ball();
    const Surd& s = surd();
    if (s.is_rational()) return Ball::from_rational(s.to_rational(), bits);
    // floor(x 2^bits) is exact; x lies in [N, N+1) 2^-bits.
    mpz_class n = s.floor_scaled(static_cast<unsigned>(bits));
    mpz_class twice = 2 * n + 1;
    mpfr_prec_t prec = std::max<mpfr_prec_t>(bits, static_cast<mpfr_prec_t>(mpz_sizeinbase(twice.get_mpz_t(), 2))) + 2;
    BigFloat mid(prec);
    mpfr_set_z(mid.get(), twice.get_mpz_t(), MPFR_RNDN);
    mpfr_div_2ui(mid.get(), mid.get(), static_cast<unsigned long>(bits + 1), MPFR_RNDN);
    BigFloat rad(Ball::kRadiusBits);
    mpfr_set_ui_2exp(rad.get(), 1, -(bits + 1), MPFR_RNDU);
    return Ball(std::move(mid), std::move(rad));
  }

  long double approx() const {
    if (is_ball()) return ball().mid().to_long_double();
    return to_ball(80).mid().to_long_double();
  }

  std::string to_string(int digits = 17) const {
    if (is_surd() && surd().is_rational()) {
      mpq_class x = surd().to_rational();
      if (x.get_den() == 1) return x.get_num().get_str();
    }
    long bits = static_cast<long>(std::ceil(digits * 3.33)) + 16;
    return to_ball(bits).mid().to_string(digits);
  }

  CertifiedReal operator-() const {
    if (is_surd()) return -surd();
    return -ball();
  }

  friend CertifiedReal add(const CertifiedReal& a, const CertifiedReal& b, long bits = 0) {
    if (a.is_surd() && b.is_surd() && compatible(a.surd(), b.surd())) return a.surd() + b.surd();
    long w = working_bits(a, b, bits);
    return a.to_ball(w) + b.to_ball(w);
  }
  friend CertifiedReal sub(const CertifiedReal& a, const CertifiedReal& b, long bits = 0) {
    return add(a, -b, bits);
  }
  friend CertifiedReal mul(const CertifiedReal& a, const CertifiedReal& b, long bits = 0) {
    if (a.is_surd() && b.is_surd() && compatible(a.surd(), b.surd())) return a.surd() * b.surd();
    long w = working_bits(a, b, bits);
    return a.to_ball(w) * b.to_ball(w);
  }
  friend CertifiedReal operator+(const CertifiedReal& a, const CertifiedReal& b) { return add(a, b); }
  friend CertifiedReal operator-(const CertifiedReal& a, const CertifiedReal& b) { return sub(a, b); }
  friend CertifiedReal operator*(const CertifiedReal& a, const CertifiedReal& b) { return mul(a, b); }
  friend CertifiedReal operator*(const CertifiedReal& a, const mpz_class& k) {
    if (a.is_surd()) return a.surd() * k;
    return a.ball() * k;
  }

  CertifiedReal reciprocal(long bits = kDefaultBits) const {
    if (is_surd()) return surd().reciprocal();
    (void)bits;
    return ball().reciprocal();
  }

  mpz_class floor() const {
    if (is_surd()) return surd().floor();
    return ball().floor();
  }

  /// Exact sign for surds, certified sign (or PrecisionInsufficient) for balls.
  int sign() const { return is_surd() ? surd().sign() : ball().sign(); }

 private:
  static long working_bits(const CertifiedReal& a, const CertifiedReal& b, long bits) {
    if (bits > 0) return bits;
    return std::max({kDefaultBits, a.precision(), b.precision()});
  }

  std::variant<Surd, Ball> v_;
};

/// {x} = x - floor(x).
inline CertifiedReal frac(const CertifiedReal& x) {
  mpz_class f = x.floor();
  if (x.is_surd()) return x.surd() - Surd::integer(f);
  return x.ball() - Ball::exact(f, x.ball().precision());
}

/// ||x||, the distance to the nearest integer.
inline CertifiedReal dist_nearest(const CertifiedReal& x) {
  CertifiedReal f = frac(x);
  if (f.is_surd()) {
    Surd g = Surd::integer(1) - f.surd();
    return compare(f.surd(), g) <= 0 ? f.surd() : g;
  }
  // ||x|| = 1/2 - |{x} - 1/2| needs no decision at the midpoint.
  Ball half = Ball::from_rational(mpq_class(1, 2), f.ball().precision());
  Ball centered = f.ball() - half;
  if (centered.mid().sign() < 0) centered = -centered;
  return half - centered;
}

/// Order of the true values. Surd pairs are decided exactly; surds from
/// different fields are separated by an escalating enclosure (they are never
/// equal); anything involving a ball needs a positive margin.
inline Ordering cmp_margin(const CertifiedReal& x, const CertifiedReal& t,
                           const PrecisionPolicy& policy = {}) {
  auto from_sign = [](int s) { return s < 0 ? Ordering::Less : (s > 0 ? Ordering::Greater : Ordering::Equal); };
  if (x.is_surd() && t.is_surd()) {
    if (compatible(x.surd(), t.surd())) return from_sign(compare(x.surd(), t.surd()));
    return with_precision_retry(policy, [&](long bits) {
      return from_sign((x.to_ball(bits) - t.to_ball(bits)).sign());
    });
  }
  long bits = std::max({policy.initial_bits, x.precision(), t.precision()});
  Ball diff = x.to_ball(bits) - t.to_ball(bits);
  int s = diff.sign();
  if (s == 0 && !(x.to_ball(bits).is_exact() && t.to_ball(bits).is_exact())) {
    throw PrecisionInsufficient("cmp_margin: zero margin");
  }
  return from_sign(s);
}

}  // namespace dioph
