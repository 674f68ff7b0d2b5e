#pragma once

#include <gmpxx.h>
#include <mpfr.h>

#include <algorithm>
#include <string>

#include "dioph/error.hpp"
#include "dioph/numerics/bigfloat.hpp"

namespace dioph {

/// Midpoint-radius real: the true value lies in [mid - rad, mid + rad].
/// The radius is kept at 64 bits and only ever rounded upward; every
/// inexact midpoint operation adds its rounding error to it.
class Ball {
 public:
  static constexpr mpfr_prec_t kRadiusBits = 64;

  explicit Ball(mpfr_prec_t bits = 128) : mid_(bits), rad_(kRadiusBits) {}

  Ball(BigFloat mid, BigFloat rad) : mid_(std::move(mid)), rad_(kRadiusBits) {
    mpfr_set(rad_.get(), rad.get(), MPFR_RNDU);
  }

  static Ball exact(const mpz_class& z, mpfr_prec_t bits) {
    Ball b(std::max<mpfr_prec_t>(bits, static_cast<mpfr_prec_t>(mpz_sizeinbase(z.get_mpz_t(), 2))));
    mpfr_set_z(b.mid_.get(), z.get_mpz_t(), MPFR_RNDN);
    return b;
  }

  static Ball from_rational(const mpq_class& x, mpfr_prec_t bits) {
    Ball b(bits);
    int t = mpfr_set_q(b.mid_.get(), x.get_mpq_t(), MPFR_RNDN);
    if (t != 0) b.add_rounding_error();
    return b;
  }

  /// Parse a decimal string at the given binary precision; the radius is the
  /// conversion error (zero when the decimal is exactly representable).
  static Ball from_decimal(const std::string& text, mpfr_prec_t bits) {
    Ball b(bits);
    mpq_class exact_value = decimal_to_rational(text);
    mpfr_set_q(b.mid_.get(), exact_value.get_mpq_t(), MPFR_RNDN);
    if (b.mid_.to_mpq() != exact_value) b.add_rounding_error();
    return b;
  }

  static mpq_class decimal_to_rational(const std::string& text) {
    std::string s = text;
    bool neg = false;
    if (!s.empty() && (s[0] == '-' || s[0] == '+')) {
      neg = s[0] == '-';
      s = s.substr(1);
    }
    long exp10 = 0;
    auto epos = s.find_first_of("eE");
    if (epos != std::string::npos) {
      try {
        exp10 = std::stol(s.substr(epos + 1));
      } catch (const std::exception&) {
        fail(Errc::malformed_entry, "bad exponent in '" + text + "'");
      }
      s = s.substr(0, epos);
    }
    std::string digits;
    long frac_digits = 0;
    bool seen_point = false;
    for (char c : s) {
      if (c == '.') {
        if (seen_point) fail(Errc::malformed_entry, "bad decimal '" + text + "'");
        seen_point = true;
      } else if (c >= '0' && c <= '9') {
        digits.push_back(c);
        if (seen_point) ++frac_digits;
      } else {
        fail(Errc::malformed_entry, "bad decimal '" + text + "'");
      }
    }
    if (digits.empty()) fail(Errc::malformed_entry, "bad decimal '" + text + "'");
    mpz_class num(digits, 10);
    if (neg) num = -num;
    long e = exp10 - frac_digits;
    mpz_class pow10;
    mpz_ui_pow_ui(pow10.get_mpz_t(), 10, static_cast<unsigned long>(e < 0 ? -e : e));
    mpq_class r = e < 0 ? mpq_class(num, pow10) : mpq_class(num * pow10);
    r.canonicalize();
    return r;
  }

  const BigFloat& mid() const { return mid_; }
  const BigFloat& rad() const { return rad_; }
  mpfr_prec_t precision() const { return mid_.precision(); }
  bool is_exact() const { return rad_.is_zero(); }

  /// Directed endpoints.
  BigFloat lower() const {
    BigFloat lo(mid_.precision() + 8);
    mpfr_sub(lo.get(), mid_.get(), rad_.get(), MPFR_RNDD);
    return lo;
  }
  BigFloat upper() const {
    BigFloat hi(mid_.precision() + 8);
    mpfr_add(hi.get(), mid_.get(), rad_.get(), MPFR_RNDU);
    return hi;
  }

  Ball operator-() const {
    Ball b = *this;
    mpfr_neg(b.mid_.get(), b.mid_.get(), MPFR_RNDN);
    return b;
  }

  friend Ball operator+(const Ball& a, const Ball& b) {
    Ball out(std::max(a.precision(), b.precision()));
    int t = mpfr_add(out.mid_.get(), a.mid_.get(), b.mid_.get(), MPFR_RNDN);
    mpfr_add(out.rad_.get(), a.rad_.get(), b.rad_.get(), MPFR_RNDU);
    if (t != 0) out.add_rounding_error();
    return out;
  }
  friend Ball operator-(const Ball& a, const Ball& b) { return a + (-b); }

  friend Ball operator*(const Ball& a, const Ball& b) {
    Ball out(std::max(a.precision(), b.precision()));
    int t = mpfr_mul(out.mid_.get(), a.mid_.get(), b.mid_.get(), MPFR_RNDN);
    // |a| rb + |b| ra + ra rb
    BigFloat abs_a(kRadiusBits), abs_b(kRadiusBits), tmp(kRadiusBits);
    mpfr_abs(abs_a.get(), a.mid_.get(), MPFR_RNDU);
    mpfr_abs(abs_b.get(), b.mid_.get(), MPFR_RNDU);
    mpfr_mul(out.rad_.get(), abs_a.get(), b.rad_.get(), MPFR_RNDU);
    mpfr_mul(tmp.get(), abs_b.get(), a.rad_.get(), MPFR_RNDU);
    mpfr_add(out.rad_.get(), out.rad_.get(), tmp.get(), MPFR_RNDU);
    mpfr_mul(tmp.get(), a.rad_.get(), b.rad_.get(), MPFR_RNDU);
    mpfr_add(out.rad_.get(), out.rad_.get(), tmp.get(), MPFR_RNDU);
    if (t != 0) out.add_rounding_error();
    return out;
  }

  friend Ball operator*(const Ball& a, const mpz_class& k) {
    Ball out(a.precision());
    int t = mpfr_mul_z(out.mid_.get(), a.mid_.get(), k.get_mpz_t(), MPFR_RNDN);
    mpz_class ak = abs(k);
    mpfr_mul_z(out.rad_.get(), a.rad_.get(), ak.get_mpz_t(), MPFR_RNDU);
    if (t != 0) out.add_rounding_error();
    return out;
  }

  Ball reciprocal() const {
    BigFloat abs_mid(kRadiusBits);
    mpfr_abs(abs_mid.get(), mid_.get(), MPFR_RNDD);
    if (mpfr_cmp(abs_mid.get(), rad_.get()) <= 0) {
      throw PrecisionInsufficient("reciprocal of a ball containing zero");
    }
    Ball out(precision());
    int t = mpfr_ui_div(out.mid_.get(), 1, mid_.get(), MPFR_RNDN);
    if (!is_exact()) {
      // |1/x - 1/m| <= r / (|m| (|m| - r))
      BigFloat gap(kRadiusBits), den(kRadiusBits);
      mpfr_sub(gap.get(), abs_mid.get(), rad_.get(), MPFR_RNDD);
      mpfr_mul(den.get(), gap.get(), abs_mid.get(), MPFR_RNDD);
      mpfr_div(out.rad_.get(), rad_.get(), den.get(), MPFR_RNDU);
    }
    if (t != 0) out.add_rounding_error();
    return out;
  }

  /// floor of the true value; throws when an integer lies inside the ball.
  mpz_class floor() const {
    BigFloat lo = lower();
    BigFloat hi = upper();
    mpz_class f, g;
    mpfr_get_z(f.get_mpz_t(), lo.get(), MPFR_RNDD);
    mpfr_get_z(g.get_mpz_t(), hi.get(), MPFR_RNDD);
    if (f != g) throw PrecisionInsufficient("floor undecidable: ball straddles an integer");
    return f;
  }

  /// Certified sign; zero only for an exact zero.
  int sign() const {
    if (is_exact()) return mid_.sign();
    BigFloat abs_mid(mid_.precision());
    mpfr_abs(abs_mid.get(), mid_.get(), MPFR_RNDN);
    if (mpfr_cmp(abs_mid.get(), rad_.get()) > 0) return mid_.sign();
    throw PrecisionInsufficient("sign undecidable: ball contains zero");
  }

  std::string to_string(int digits = 17) const {
    return mid_.to_string(digits) + " +/- " + rad_.to_string(3);
  }

 private:
  // Round-to-nearest loses at most half an ulp: |mid| * 2^-prec suffices.
  void add_rounding_error() {
    BigFloat e(kRadiusBits);
    mpfr_abs(e.get(), mid_.get(), MPFR_RNDU);
    mpfr_div_2ui(e.get(), e.get(), static_cast<unsigned long>(mid_.precision()), MPFR_RNDU);
    mpfr_add(rad_.get(), rad_.get(), e.get(), MPFR_RNDU);
  }

  BigFloat mid_;
  BigFloat rad_;
};

}  // namespace dioph
