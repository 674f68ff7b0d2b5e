#pragma once

// Selberg's majorant and minorant of the indicator of the arc (-delta, delta)
// on R/Z, as even trigonometric polynomials of degree J, and the counting
// bounds they give:
//   sum_at prod_v S^-(y_v)  <=  #{at : ||at . Atilde|| < delta}  <=  sum_at prod_v S^+(y_v).
//
// Construction (Vaaler's approximation of the sawtooth plus a Fejer kernel
// at each endpoint) gives, with u = n/(J+1) and
// Jv(u) = pi u (1-u) cot(pi u) + u,
//   b_0   = 2 delta +- 1/(J+1)
//   b_n   = Jv(u) sin(2 pi n delta)/(pi n) +- (1-u) cos(2 pi n delta)/(J+1).

#include <gmpxx.h>
#include <mpfr.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <vector>

#include "dioph/counting.hpp"
#include "dioph/fracsum.hpp"

namespace dioph {

enum class Side { Plus, Minus };

/// Even polynomial b_0 + 2 sum_{n=1}^J b_n cos(2 pi n y).
class TrigPolynomial {
 public:
  TrigPolynomial() = default;
  TrigPolynomial(Side side, mpq_class delta, std::vector<double> b, bool vacuous = false)
      : side_(side), delta_(std::move(delta)), b_(std::move(b)), vacuous_(vacuous) {}

  Side side() const { return side_; }
  const mpq_class& delta() const { return delta_; }
  long degree() const { return static_cast<long>(b_.size()) - 1; }
  /// b_j for |j| <= J (b_{-j} = b_j), 0 beyond.
  double coeff(long j) const {
    if (j < 0) j = -j;
    return j <= degree() ? b_[static_cast<std::size_t>(j)] : 0.0;
  }
  const std::vector<double>& coeffs() const { return b_; }
  /// Minorant with b_0 <= 0: it only gives the trivial bound.
  bool vacuous() const { return vacuous_; }

 private:
  Side side_ = Side::Plus;
  mpq_class delta_;
  std::vector<double> b_;
  bool vacuous_ = false;
};

struct SelbergPair {
  TrigPolynomial plus;
  TrigPolynomial minus;
};

namespace detail {

constexpr double kPi = std::numbers::pi;
constexpr double kUnit = 0x1p-53;
/// Bound on |b_n(double) - b_n(exact)|: a handful of correctly rounded
/// operations on well-conditioned arguments, with generous slack.
constexpr double kCoeffErr = 0x1p-46;

inline void check_selberg_delta(const mpq_class& delta) {
  if (delta <= 0 || delta > mpq_class(1, 2)) {
    fail(Errc::delta_out_of_range, "delta = " + delta.get_str() + " is not in (0, 1/2]");
  }
}

/// {x} for rational x, as a double in [0, 1).
inline double frac_double(const mpq_class& x) {
  mpz_class f;
  mpz_fdiv_q(f.get_mpz_t(), x.get_num_mpz_t(), x.get_den_mpz_t());
  mpq_class r = x - mpq_class(f);
  return r.get_d();
}

}  // namespace detail

inline SelbergPair selberg_pair(const mpq_class& delta, long J) {
  detail::check_selberg_delta(delta);
  if (J < 1) fail(Errc::invalid_argument, "J must be >= 1");
  const double K = static_cast<double>(J + 1);
  std::vector<double> plus(static_cast<std::size_t>(J + 1)), minus(plus.size());
  mpq_class b0p = 2 * delta + mpq_class(1, J + 1);
  mpq_class b0m = 2 * delta - mpq_class(1, J + 1);
  plus[0] = b0p.get_d();
  minus[0] = b0m.get_d();
  for (long n = 1; n <= J; ++n) {
    const double u = static_cast<double>(n) / K;
    const double w = static_cast<double>(J + 1 - n) / K;  // 1 - u, exactly representable ratio
    // sin(pi u) = sin(pi (1 - u)); take the smaller argument
    const double s = std::sin(detail::kPi * std::min(u, w));
    const double jv = detail::kPi * u * w * std::cos(detail::kPi * u) / s + u;
    const double t = detail::frac_double(mpq_class(n) * delta);
    const double sn = std::sin(2 * detail::kPi * t), cs = std::cos(2 * detail::kPi * t);
    const double main = jv * sn / (detail::kPi * static_cast<double>(n));
    const double edge = w * cs / K;
    plus[static_cast<std::size_t>(n)] = main + edge;
    minus[static_cast<std::size_t>(n)] = main - edge;
  }
  return {TrigPolynomial(Side::Plus, delta, std::move(plus)),
          TrigPolynomial(Side::Minus, delta, std::move(minus), b0m <= 0)};
}

inline double eval_poly(const TrigPolynomial& p, double y) {
  y -= std::floor(y);
  double s = p.coeff(0);
  for (long n = 1; n <= p.degree(); ++n) {
    double t = static_cast<double>(n) * y;
    t -= std::floor(t);
    s += 2 * p.coeff(n) * std::cos(2 * detail::kPi * t);
  }
  return s;
}

namespace detail {

/// Evaluation at a fixed-point argument (y, err in units of 2^-128) with an
/// absolute error bound that also covers the coefficient rounding.
class FixedEvaluator {
 public:
  explicit FixedEvaluator(const TrigPolynomial& p) : p_(p) {
    double mass = std::abs(p.coeff(0)), weighted = 0;
    for (long n = 1; n <= p.degree(); ++n) {
      mass += 2 * std::abs(p.coeff(n));
      weighted += 2 * std::abs(p.coeff(n)) * static_cast<double>(n);
    }
    weighted_ = weighted;
    // phase to double (2^-53 + 2^-64), times 2 pi, cos: under 8 units each
    base_err_ = (2 * static_cast<double>(p.degree()) + 1) * kCoeffErr + mass * 8 * kUnit * 2 * kPi +
                (static_cast<double>(p.degree()) + 2) * 2 * kUnit * mass;
  }

  double operator()(u128 y, u128 err, double& bound) const {
    double s = p_.coeff(0);
    for (long n = 1; n <= p_.degree(); ++n) {
      const u128 phase = y * static_cast<u128>(n);
      const double t = std::ldexp(static_cast<double>(static_cast<std::uint64_t>(phase >> 64)), -64);
      s += 2 * p_.coeff(n) * std::cos(2 * kPi * t);
    }
    // argument error: |b_n| n err 2 pi per term
    const double arg = std::ldexp(static_cast<double>(err), -128) * 2 * kPi * weighted_;
    bound = (base_err_ + arg) * (1 + 0x1p-40);
    return s;
  }

 private:
  const TrigPolynomial& p_;
  double weighted_ = 0;
  double base_err_ = 0;
};

}  // namespace detail

struct SandwichCheck {
  bool pass = true;
  double worst_violation = 0;
};

/// Checks S^- <= chi <= S^+ at grid_n equispaced points and at the four
/// points +-delta +- 1e-9. Violations below 1e-9 are tolerated.
inline SandwichCheck verify_sandwich(const SelbergPair& pair, long grid_n) {
  if (grid_n < 10) fail(Errc::invalid_argument, "grid_n must be >= 10");
  const mpq_class& delta = pair.plus.delta();
  SandwichCheck out;
  auto check = [&](double y, bool inside) {
    const double chi = inside ? 1.0 : 0.0;
    const double hi = eval_poly(pair.plus, y), lo = eval_poly(pair.minus, y);
    out.worst_violation = std::max({out.worst_violation, chi - hi, lo - chi});
  };
  const mpz_class N(grid_n);
  for (long i = 0; i < grid_n; ++i) {
    // ||i/N|| < delta  <=>  min(i, N-i) den < num N
    const long k = std::min(i, grid_n - i);
    const bool inside = mpz_class(k) * delta.get_den() < delta.get_num() * N;
    check(static_cast<double>(i) / static_cast<double>(grid_n), inside);
  }
  const double d = delta.get_d();
  for (double y : {d - 1e-9, d + 1e-9, -d + 1e-9, -d - 1e-9}) {
    double r = y - std::floor(y);
    check(y, std::min(r, 1 - r) < d);
  }
  out.pass = out.worst_violation <= 1e-9;
  return out;
}

struct SandwichResult {
  double lower = 0;
  double upper = 0;
  /// b_0^+^(n-d) (size^e + sum_{0<|j|<=J} prod_u ||j . row_u||^-1); +inf when
  /// some j . row_u is an integer.
  double analytic_upper = 0;
  bool vacuous = false;
};

namespace detail {

struct SandwichAcc {
  double lower = 0;
  double upper = 0;
};

inline double round_up(double x, double rel) { return std::nextafter(x * (1 + rel), std::numeric_limits<double>::infinity()); }
inline double round_down(double x, double rel) { return std::max(0.0, std::nextafter(x * (1 - rel), 0.0)); }

inline double analytic_upper(const SubspaceMatrix& s, CountMode mode, long size, const mpq_class& b0, long J,
                             const CountOptions& opts) {
  const Matrix<CertifiedReal>& m = mode == CountMode::A ? s.A() : s.Atilde();
  ScanOptions so;
  so.threads = opts.threads;
  so.precision = opts.precision;
  so.tolerance = std::numeric_limits<double>::infinity();
  Ball tail;
  try {
    tail = recip_product_sum(m, J, so).to_ball();
  } catch (const Error& e) {
    if (e.code() == Errc::zero_denominator) return std::numeric_limits<double>::infinity();
    throw;
  }
  const int e = mode == CountMode::A ? s.d() : s.d() + 1;
  mpz_class pw;
  mpz_ui_pow_ui(pw.get_mpz_t(), static_cast<unsigned long>(size), static_cast<unsigned long>(e));
  BigFloat acc = tail.upper();
  mpfr_add_z(acc.get(), acc.get(), pw.get_mpz_t(), MPFR_RNDU);
  for (int k = 0; k < s.codim(); ++k) mpfr_mul_q(acc.get(), acc.get(), b0.get_mpq_t(), MPFR_RNDU);
  return mpfr_get_d(acc.get(), MPFR_RNDU);
}

}  // namespace detail

/// Lower and upper bounds on count_A(q, delta) (mode A) or count_N(Q, delta)
/// (mode N) from the Selberg pair of degree J, evaluated point by point over
/// the enumeration box. Each factor is rounded outward by its a priori error
/// bound; the minorant factors are clipped at 0, which keeps the product a
/// lower bound of prod_v chi(y_v) in every codimension.
inline SandwichResult sandwich_count(const SubspaceMatrix& s, long size, const mpq_class& delta, long J, CountMode mode,
                                     const CountOptions& opts = {}) {
  detail::check_selberg_delta(delta);
  if (size < 1) fail(Errc::invalid_argument, "size parameter must be >= 1");
  if (J < 1) fail(Errc::invalid_argument, "J must be >= 1");
  detail::check_budget(s, mode, size, opts);
  const SelbergPair pair = selberg_pair(delta, J);
  const detail::FixedEvaluator ev_plus(pair.plus), ev_minus(pair.minus);
  detail::ColumnData cd(s);
  const std::size_t k = static_cast<std::size_t>(s.codim());

  auto parts = scan_box<detail::SandwichAcc>(
      cd.fixed, detail::box_lo(s, mode, size), size, opts.threads, [&](detail::SandwichAcc& acc, const ScanPoint& pt) {
        double up = 1, lo = 1;
        for (std::size_t v = 0; v < k; ++v) {
          u128 y = pt.y[v], err = pt.err[v];
          if (err >= (static_cast<u128>(1) << 80)) {
            FixedFrac f = with_precision_retry(opts.precision, [&](long bits) {
              FixedFrac g = to_fixed_frac(linear_form(cd.cols.row(v), pt.j, bits));
              if (g.err >= (static_cast<u128>(1) << 80)) throw PrecisionInsufficient("argument of the Selberg polynomial");
              return g;
            });
            y = f.value;
            err = f.err;
          }
          double ep, em;
          const double sp = ev_plus(y, err, ep), sm = ev_minus(y, err, em);
          up *= std::max(sp + ep, 0.0);
          lo *= std::max(sm - em, 0.0);
        }
        acc.upper += up;
        acc.lower += lo;
      });
  detail::SandwichAcc total;
  for (const auto& p : parts) {
    total.upper += p.upper;
    total.lower += p.lower;
  }
  // products of k factors and a sum of N nonnegative terms
  const double points = detail::box_points(s, mode, size);
  const double rel = (points + static_cast<double>(k) + 4) * 2 * detail::kUnit;
  SandwichResult r;
  r.upper = detail::round_up(total.upper, rel);
  r.lower = detail::round_down(total.lower, rel);
  r.vacuous = pair.minus.vacuous();
  r.analytic_upper = detail::analytic_upper(s, mode, size, 2 * delta + mpq_class(1, J + 1), J, opts);
  return r;
}

struct ExpSumCheck {
  double lower = 0;  // enclosure of |sum_{a=1}^q e(a x)|
  double upper = 0;
  double bound = 0;  // certified lower bound of 1/||x||
  bool holds = false;
};

/// |sum_{a=1}^q e(a x)| = |sin(pi q x) / sin(pi x)|, enclosed with MPFR, and
/// the inequality |sum| <= 1/||x|| decided on the enclosure.
inline ExpSumCheck exp_sum_check(const CertifiedReal& x, long q, const PrecisionPolicy& policy = {}) {
  if (q < 1) fail(Errc::invalid_argument, "q must be >= 1");
  return with_precision_retry(policy, [&](long bits) {
    CertifiedReal dist = dist_nearest(x);
    if (dist.sign() == 0) fail(Errc::zero_denominator, "x is an integer");
    const Ball xb = frac(x).to_ball(bits);  // in [0, 1)
    const mpfr_prec_t prec = static_cast<mpfr_prec_t>(bits + 32);
    BigFloat pi(prec), a(prec), s1(prec), s2(prec);
    mpfr_const_pi(pi.get(), MPFR_RNDN);
    mpfr_mul(a.get(), pi.get(), xb.mid().get(), MPFR_RNDN);
    mpfr_sin(s2.get(), a.get(), MPFR_RNDN);
    mpfr_mul_si(a.get(), a.get(), q, MPFR_RNDN);
    mpfr_sin(s1.get(), a.get(), MPFR_RNDN);
    // sin is 1-Lipschitz; each argument carries pi q rad plus a few roundings
    const double rad = mpfr_get_d(xb.rad().get(), MPFR_RNDU);
    const double mid = std::abs(mpfr_get_d(xb.mid().get(), MPFR_RNDN)) + 1;
    const double qd = static_cast<double>(q);
    const double round = std::ldexp(8 * detail::kPi * qd * mid + 4, -static_cast<int>(prec));
    const double e1 = 2 * (detail::kPi * qd * rad + round);
    const double e2 = 2 * (detail::kPi * rad + round);
    const double a1 = std::abs(mpfr_get_d(s1.get(), MPFR_RNDN)), a2 = std::abs(mpfr_get_d(s2.get(), MPFR_RNDN));
    if (a2 <= 2 * e2) throw PrecisionInsufficient("sin(pi x) not separated from 0");
    ExpSumCheck c;
    c.upper = detail::round_up((a1 + e1) / (a2 - e2), 8 * detail::kUnit);
    c.lower = detail::round_down(std::max(0.0, a1 - e1) / (a2 + e2), 8 * detail::kUnit);
    c.upper = std::min(c.upper, qd);
    const double dist_hi = mpfr_get_d(dist.to_ball(bits).upper().get(), MPFR_RNDU);
    c.bound = detail::round_down(1 / dist_hi, 4 * detail::kUnit);
    c.holds = c.upper <= c.bound;
    return c;
  });
}

}  // namespace dioph
