#pragma once

// Covers of the psi-approximable points on an affine subspace. sigma(a, q) is
// the set of x in (0, 1]^d whose graph point lies within psi(q)/q of a
// rational point with denominator q and first coordinates a/q; it sits in a
// cube of side 2 psi(q)/q around a/q. Hausdorff s-cost of the covers:
//   per q:    sum_q A(q, C psi(q)) (2 psi(q)/q)^s
//   dyadic:   sum_k N(2^(k+1), C psi(2^k)) (2 psi(2^k)/2^k)^s
// A nonempty sigma(a, q) forces ||(q, a) . Atilde|| < C psi(q).

#include <gmpxx.h>

#include <cmath>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "dioph/counting.hpp"
#include "dioph/matrices.hpp"

namespace dioph {

namespace detail {

/// ceil(|x| * scale) for a certified real x.
inline mpz_class ceil_abs_scaled(const CertifiedReal& x, long scale) {
  if (x.is_surd()) {
    Surd y = x.surd() * mpz_class(scale);
    if (y.sign() < 0) y = y * mpz_class(-1);
    if (y.is_rational()) {
      mpq_class v = y.to_rational();
      mpz_class c;
      mpz_cdiv_q(c.get_mpz_t(), v.get_num_mpz_t(), v.get_den_mpz_t());
      return c;
    }
    return y.floor() + 1;
  }
  const Ball& b = x.ball();
  mpq_class hi = b.upper().to_mpq(), lo = b.lower().to_mpq();
  mpq_class m = std::max(abs(hi), abs(lo)) * scale;
  mpz_class c;
  mpz_cdiv_q(c.get_mpz_t(), m.get_num_mpz_t(), m.get_den_mpz_t());
  return c;
}

}  // namespace detail

/// C = 1 + d max_{u,v} |A_uv|, rounded up to 4 decimals; 1.0001 for A = 0.
inline mpq_class subspace_constant_C(const SubspaceMatrix& s) {
  constexpr long kScale = 10000;
  mpz_class best = 0;
  const Matrix<CertifiedReal>& A = s.A();
  for (std::size_t u = 0; u < A.rows(); ++u)
    for (std::size_t v = 0; v < A.cols(); ++v) {
      mpz_class c = detail::ceil_abs_scaled(A(u, v) * mpz_class(s.d()), kScale);
      if (c > best) best = c;
    }
  if (best == 0) best = 1;
  mpq_class C = 1 + mpq_class(best, kScale);
  C.canonicalize();
  return C;
}

struct CoverBox {
  long q = 0;
  std::vector<long> a;
  CertifiedReal side;              // 2 psi(q) / q
  std::vector<mpq_class> center;   // a / q
};

struct SigmaBoxes {
  std::vector<CoverBox> boxes;
  CertifiedReal threshold;  // C psi(q)
  /// C psi(q) >= 1/2: every a is kept without a test.
  bool saturated = false;
};

namespace detail {

inline CertifiedReal scaled_psi(const mpq_class& C, const ApproxFunction& psi, long q, long bits) {
  return mul(CertifiedReal::rational(C), psi(q, bits), bits);
}

inline bool is_saturated(const CertifiedReal& t, const PrecisionPolicy& policy) {
  return cmp_margin(t, CertifiedReal::rational(mpq_class(1, 2)), policy) != Ordering::Less;
}

inline bool is_zero(const CertifiedReal& t) { return t.is_rational() && t.sign() == 0; }

inline void for_each_a(long q, int d, const std::function<void(const std::vector<long>&)>& f) {
  std::vector<long> a(static_cast<std::size_t>(d), 1);
  while (true) {
    f(a);
    std::size_t i = a.size();
    while (i > 0 && a[i - 1] == q) a[--i] = 1;
    if (i == 0) return;
    ++a[i - 1];
  }
}

}  // namespace detail

/// Every a in {1..q}^d with ||(q, a) . Atilde|| < C psi(q), as boxes.
inline SigmaBoxes nonempty_sigma_boxes(const SubspaceMatrix& s, const ApproxFunction& psi, long q,
                                       const CountOptions& opts = {}) {
  if (q < 1) fail(Errc::invalid_argument, "q must be >= 1");
  const mpq_class C = subspace_constant_C(s);
  SigmaBoxes out;
  out.threshold = detail::scaled_psi(C, psi, q, opts.precision.initial_bits);
  if (detail::is_zero(out.threshold)) return out;
  detail::check_budget(s, CountMode::A, q, opts);
  const CertifiedReal side = mul(CertifiedReal::rational(mpq_class(2, q)), psi(q, opts.precision.initial_bits));
  auto make_box = [&](const std::vector<long>& a) {
    CoverBox b;
    b.q = q;
    b.a = a;
    b.side = side;
    for (long v : a) {
      mpq_class c(v, q);
      c.canonicalize();
      b.center.push_back(c);
    }
    return b;
  };

  out.saturated = detail::is_saturated(out.threshold, opts.precision);
  if (out.saturated) {
    detail::for_each_a(q, s.d(), [&](const std::vector<long>& a) { out.boxes.push_back(make_box(a)); });
    return out;
  }
  Threshold t(out.threshold, opts.precision);
  detail::ColumnData cd(s);
  auto parts = scan_box<std::vector<std::vector<long>>>(
      cd.fixed, detail::box_lo(s, CountMode::A, q), q, opts.threads,
      [&](std::vector<std::vector<long>>& acc, const ScanPoint& pt) {
        if (detail::is_member(cd, t, pt, opts.precision)) acc.emplace_back(pt.j.begin() + 1, pt.j.end());
      });
  for (const auto& part : parts)
    for (const auto& a : part) out.boxes.push_back(make_box(a));
  return out;
}

enum class CoverStrategy { PerQ, Dyadic };

inline const char* strategy_name(CoverStrategy s) { return s == CoverStrategy::PerQ ? "perq" : "dyadic"; }

struct CoverTerm {
  long index = 0;          // q, or k for the dyadic route
  double delta_used = 0;   // C psi(q), resp. C psi(2^k)
  long boxes = 0;
  double side = 0;         // 2 psi / q, resp. 2 psi(2^k) / 2^k
  double term = 0;         // boxes * side^s
  double cumulative = 0;
  bool saturated = false;
};

struct CoverCost {
  double partial_sum = 0;
  std::vector<CoverTerm> terms;
  mpq_class C;
  /// First index from which C psi < 1/2 holds to the end of the range.
  std::optional<long> q0;
};

/// Partial s-cost sum over indices lo..hi (q for PerQ, k for Dyadic).
inline CoverCost cover_cost(const SubspaceMatrix& s, const ApproxFunction& psi, double exponent, long lo, long hi,
                            CoverStrategy strategy, const CountOptions& opts = {}) {
  if (!(exponent > 0) || exponent > s.d()) {
    fail(Errc::s_out_of_range, "s = " + std::to_string(exponent) + " must lie in (0, d] with d = " + std::to_string(s.d()) +
                                   "; for s > d the cost sum says nothing");
  }
  if (lo > hi) fail(Errc::invalid_argument, "empty range");
  if (strategy == CoverStrategy::PerQ && lo < 1) fail(Errc::invalid_argument, "q range must start at 1 or later");
  if (strategy == CoverStrategy::Dyadic) {
    if (!psi.monotone_nonincreasing()) {
      fail(Errc::non_monotone_psi, "the dyadic route needs psi flagged monotone nonincreasing");
    }
    if (lo < 0 || hi > 40) fail(Errc::invalid_argument, "k range must lie in [0, 40]");
  }
  CoverCost out;
  out.C = subspace_constant_C(s);
  const long bits = opts.precision.initial_bits;
  for (long idx = lo; idx <= hi; ++idx) {
    CoverTerm t;
    t.index = idx;
    const long base = strategy == CoverStrategy::PerQ ? idx : (1L << idx);
    const CountMode mode = strategy == CoverStrategy::PerQ ? CountMode::A : CountMode::N;
    const long size = strategy == CoverStrategy::PerQ ? idx : (1L << (idx + 1));
    const CertifiedReal p = psi(base, bits);
    const CertifiedReal threshold = detail::scaled_psi(out.C, psi, base, bits);
    t.delta_used = static_cast<double>(threshold.approx());
    if (!detail::is_zero(threshold)) {
      t.saturated = detail::is_saturated(threshold, opts.precision);
      detail::check_budget(s, mode, size, opts);
      t.boxes = t.saturated ? static_cast<long>(detail::box_points(s, mode, size))
                            : count_threshold(s, mode, size, threshold, opts);
      t.side = static_cast<double>(mul(CertifiedReal::rational(mpq_class(2, base)), p, bits).approx());
      t.term = static_cast<double>(t.boxes) * std::pow(t.side, exponent);
    }
    if (t.saturated) {
      out.q0.reset();
    } else if (!out.q0) {
      out.q0 = idx;
    }
    out.partial_sum += t.term;
    t.cumulative = out.partial_sum;
    out.terms.push_back(t);
  }
  return out;
}

/// d - (nu n - 1)/(nu + 1): the dimension bound for q^-nu approximable
/// points on a d-dimensional subspace of R^n.
inline mpq_class dimension_bound(const mpq_class& nu, int n, int d) {
  if (n < 2 || d < 1 || d >= n) fail(Errc::dimension_mismatch, "need 1 <= d < n");
  if (nu < mpq_class(1, n)) fail(Errc::nu_too_small, "nu = " + nu.get_str() + " is below 1/n = 1/" + std::to_string(n));
  mpq_class r = d - (nu * n - 1) / (nu + 1);
  r.canonicalize();
  return r;
}

}  // namespace dioph
