#pragma once

#include <gmpxx.h>

#include <optional>
#include <stdexcept>
#include <string>
#include <utility>

#include "dioph/error.hpp"

namespace dioph {

namespace detail {

/// d = s^2 * core with core squarefree as far as trial division up to 10^6
/// (plus a final perfect-square test on the cofactor) can establish.
inline std::pair<mpz_class, mpz_class> split_square_factor(const mpz_class& d) {
  mpz_class s = 1;
  mpz_class core = d;
  if (core <= 1) return {s, core};
  auto strip = [&](unsigned long k) {
    mpz_class kk = mpz_class(k) * k;
    while (mpz_divisible_p(core.get_mpz_t(), kk.get_mpz_t())) {
      core /= kk;
      s *= k;
    }
  };
  strip(2);
  for (unsigned long k = 3; k <= 1'000'000; k += 2) {
    if (mpz_class(k) * k > core) break;
    strip(k);
  }
  if (mpz_perfect_square_p(core.get_mpz_t())) {
    mpz_class root;
    mpz_sqrt(root.get_mpz_t(), core.get_mpz_t());
    s *= root;
    core = 1;
  }
  return {s, core};
}

inline mpz_class isqrt(const mpz_class& n) {
  mpz_class r;
  mpz_sqrt(r.get_mpz_t(), n.get_mpz_t());
  return r;
}

inline mpz_class floor_div(const mpz_class& a, const mpz_class& b) {
  mpz_class r;
  mpz_fdiv_q(r.get_mpz_t(), a.get_mpz_t(), b.get_mpz_t());
  return r;
}

}  // namespace detail

/// Exact element (p + q*sqrt(d)) / r of a real quadratic field (or of Q when
/// q == 0). Canonical form: r > 0, gcd(p, q, r) = 1, d squarefree (d = 0 for
/// rationals). All comparisons are decided with integer arithmetic.
class Surd {
 public:
  Surd() : p_(0), q_(0), d_(0), r_(1) {}

  static Surd make(const mpz_class& p, const mpz_class& q, const mpz_class& d,
                   const mpz_class& r) {
    if (r == 0) fail(Errc::malformed_entry, "surd denominator is zero");
    if (d < 0) fail(Errc::malformed_entry, "surd radicand is negative");
    Surd s;
    s.p_ = p;
    s.r_ = r;
    if (q != 0 && d != 0) {
      auto [sq, core] = detail::split_square_factor(d);
      if (core == 1) {
        s.p_ += q * sq;
        s.q_ = 0;
        s.d_ = 0;
      } else {
        s.q_ = q * sq;
        s.d_ = core;
      }
    }
    s.normalize();
    return s;
  }

  static Surd integer(const mpz_class& z) { return make(z, 0, 0, 1); }
  static Surd rational(const mpq_class& x) { return make(x.get_num(), 0, 0, x.get_den()); }
  static Surd sqrt_of(const mpz_class& d) { return make(0, 1, d, 1); }

  const mpz_class& p() const { return p_; }
  const mpz_class& q() const { return q_; }
  const mpz_class& d() const { return d_; }
  const mpz_class& r() const { return r_; }

  bool is_rational() const { return q_ == 0; }
  bool is_zero() const { return p_ == 0 && q_ == 0; }
  mpq_class to_rational() const {
    if (!is_rational()) throw std::logic_error("Surd::to_rational on irrational value");
    mpq_class x(p_, r_);
    x.canonicalize();
    return x;
  }

  /// Two surds can be combined exactly when they live in the same field.
  friend bool compatible(const Surd& a, const Surd& b) {
    return a.is_rational() || b.is_rational() || a.d_ == b.d_;
  }

  /// Sign of p + q*sqrt(d), decided by squaring.
  int sign() const {
    int sp = sgn(p_);
    int sq = sgn(q_);
    if (sq == 0) return sp;
    if (sp == 0 || sp == sq) return sq;
    mpz_class lhs = p_ * p_;
    mpz_class rhs = q_ * q_ * d_;
    return lhs > rhs ? sp : sq;
  }

  /// floor(x) using the integer square root of d*q^2.
  mpz_class floor() const {
    if (is_rational()) return detail::floor_div(p_, r_);
    // q*sqrt(d) lies strictly between f and f + 1, so the numerator lies in
    // (p + f, p + f + 1) and no multiple of r can fall inside that interval.
    mpz_class root = detail::isqrt(q_ * q_ * d_);
    mpz_class f = q_ > 0 ? root : mpz_class(-root - 1);
    return detail::floor_div(p_ + f, r_);
  }

  /// floor(x * 2^bits), exact.
  mpz_class floor_scaled(unsigned bits) const {
    mpz_class scale = 1;
    mpz_mul_2exp(scale.get_mpz_t(), scale.get_mpz_t(), bits);
    Surd scaled = *this;
    scaled.p_ *= scale;
    scaled.q_ *= scale;
    return scaled.floor();
  }

  Surd operator-() const {
    Surd s = *this;
    s.p_ = -s.p_;
    s.q_ = -s.q_;
    return s;
  }

  friend Surd operator+(const Surd& a, const Surd& b) {
    require_compatible(a, b);
    Surd s;
    s.p_ = a.p_ * b.r_ + b.p_ * a.r_;
    s.q_ = a.q_ * b.r_ + b.q_ * a.r_;
    s.d_ = a.is_rational() ? b.d_ : a.d_;
    s.r_ = a.r_ * b.r_;
    s.normalize();
    return s;
  }
  friend Surd operator-(const Surd& a, const Surd& b) { return a + (-b); }

  friend Surd operator*(const Surd& a, const Surd& b) {
    require_compatible(a, b);
    const mpz_class& d = a.is_rational() ? b.d_ : a.d_;
    Surd s;
    s.p_ = a.p_ * b.p_ + a.q_ * b.q_ * d;
    s.q_ = a.p_ * b.q_ + a.q_ * b.p_;
    s.d_ = d;
    s.r_ = a.r_ * b.r_;
    s.normalize();
    return s;
  }

  friend Surd operator*(const Surd& a, const mpz_class& k) {
    Surd s = a;
    s.p_ *= k;
    s.q_ *= k;
    s.normalize();
    return s;
  }

  Surd reciprocal() const {
    if (is_zero()) fail(Errc::zero_denominator, "reciprocal of zero surd");
    // 1 / ((p + q sqrt d)/r) = r (p - q sqrt d) / (p^2 - q^2 d)
    Surd s;
    mpz_class norm = p_ * p_ - q_ * q_ * d_;
    s.p_ = r_ * p_;
    s.q_ = -r_ * q_;
    s.d_ = d_;
    s.r_ = norm;
    s.normalize();
    return s;
  }

  /// x - floor(x), in [0, 1).
  Surd frac() const { return *this - integer(floor()); }

  friend int compare(const Surd& a, const Surd& b) { return (a - b).sign(); }
  friend bool operator==(const Surd& a, const Surd& b) {
    return a.p_ == b.p_ && a.q_ == b.q_ && a.d_ == b.d_ && a.r_ == b.r_;
  }

  std::string to_string() const {
    if (is_rational()) return to_rational().get_str();
    return "(" + p_.get_str() + "+" + q_.get_str() + "*sqrt(" + d_.get_str() + "))/" + r_.get_str();
  }

 private:
  static void require_compatible(const Surd& a, const Surd& b) {
    if (!compatible(a, b)) throw std::logic_error("surds with different radicands");
  }

  void normalize() {
    if (r_ < 0) {
      p_ = -p_;
      q_ = -q_;
      r_ = -r_;
    }
    if (q_ == 0) d_ = 0;
    if (d_ == 0) q_ = 0;
    mpz_class g;
    mpz_gcd(g.get_mpz_t(), p_.get_mpz_t(), q_.get_mpz_t());
    mpz_gcd(g.get_mpz_t(), g.get_mpz_t(), r_.get_mpz_t());
    if (g > 1) {
      p_ /= g;
      q_ /= g;
      r_ /= g;
    }
  }

  mpz_class p_, q_, d_, r_;
};

}  // namespace dioph
