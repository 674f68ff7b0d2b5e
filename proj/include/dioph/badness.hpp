#pragma once

// Record minima of prod_u ||j . row_u(M)||, a heuristic estimate of the
// diophantine exponent omega(M), and exact badly-approximable constants for
// quadratic surds.

#include <gmpxx.h>

#include <cmath>
#include <vector>

#include "dioph/fracsum.hpp"
#include "dioph/parallel.hpp"

namespace dioph {

struct BadnessRecord {
  std::vector<long> j;
  CertifiedReal value;
  long norm_j = 0;

  /// log(1/value) / log(norm_j); NaN for norm_j == 1.
  double log_ratio() const {
    if (norm_j <= 1) return std::nan("");
    return -std::log(static_cast<double>(value.approx())) / std::log(static_cast<double>(norm_j));
  }
};

/// Every new strict minimum of product_dist over 0 < |j|_inf <= J, in
/// increasing |j|_inf order (within a shell, the first minimiser in
/// lexicographic order of the canonical half-space). Throws NotBad if some
/// product is exactly 0.
inline std::vector<BadnessRecord> phi_min_profile(const Matrix<CertifiedReal>& m, long J, const ScanOptions& opts = {}) {
  if (J < 1) fail(Errc::invalid_argument, "J must be >= 1");
  ScanMatrix sm(m);
  std::vector<Range> blocks = split_range(1, J, kScanBlocks);
  // per-shell minima, block by block
  auto shells = run_blocks(blocks.size(), opts.threads, [&](std::size_t b) {
    std::vector<detail::MinAcc> out;
    for (long s = blocks[b].lo; s <= blocks[b].hi; ++s) {
      detail::MinAcc acc;
      scan_shell(sm, s, [&](const ScanPoint& pt) { detail::offer_min(acc, m, opts.precision, pt); });
      out.push_back(std::move(acc));
      if (out.back().zero) break;
    }
    return out;
  });

  std::vector<BadnessRecord> records;
  detail::MinAcc best;
  for (const auto& block : shells) {
    for (const auto& shell : block) {
      if (shell.zero) {
        fail(Errc::not_bad, "product of distances is exactly 0 at j = " + detail::j_to_string(shell.zero_j));
      }
      if (!shell.has) continue;
      if (best.has && !detail::smaller(m, opts.precision, shell.enc, shell.j, best.enc, best.j)) continue;
      best = shell;
      BadnessRecord r;
      r.j = shell.j;
      r.value = product_dist(m, shell.j, opts.precision);
      for (long v : shell.j) r.norm_j = std::max(r.norm_j, v < 0 ? -v : v);
      records.push_back(std::move(r));
    }
  }
  return records;
}

struct OmegaEstimate {
  double omega_hat = 0;
  double intercept = 0;
  long records_used = 0;
  double max_abs_residual = 0;
};

/// Least-squares slope of log(1/value) against log(norm_j) over the record
/// minima up to J_max. A heuristic (finite data cannot certify omega).
inline OmegaEstimate estimate_omega(const Matrix<CertifiedReal>& m, long J_max, const ScanOptions& opts = {}) {
  if (J_max < 10) fail(Errc::invalid_argument, "estimate_omega needs J_max >= 10");
  std::vector<BadnessRecord> records = phi_min_profile(m, J_max, opts);
  std::vector<double> xs, ys;
  for (const auto& r : records) {
    xs.push_back(std::log(static_cast<double>(r.norm_j)));
    ys.push_back(-std::log(static_cast<double>(r.value.approx())));
  }
  if (records.size() < 2) fail(Errc::insufficient_records, "need at least 2 record minima");
  OmegaEstimate est;
  est.records_used = static_cast<long>(records.size());
  try {
    GrowthFit f = fit_line(xs, ys);
    est.omega_hat = f.slope;
    est.intercept = f.intercept;
    est.max_abs_residual = f.max_abs_residual;
  } catch (const Error&) {
    fail(Errc::insufficient_records, "records share a single norm");
  }
  return est;
}

namespace detail {

/// Largest n with n * x <= N for a positive surd x (n >= 0).
inline mpz_class floor_ratio(const mpz_class& N, const Surd& x) {
  // N / x = N x' / (x x') is handled by the exact floor of a surd.
  Surd q = Surd::integer(N) * x.reciprocal();
  return q.floor();
}

}  // namespace detail

/// A rational c > 0 with ||j alpha|| >= c / j for every j >= 1, where
/// alpha = (p + q sqrt d)/r is a quadratic irrational. Writing N for the
/// integer nearest to j r alpha - j p, |j q sqrt d - N| >= 1/(|jq| sqrt d + |N|)
/// since j^2 q^2 d - N^2 is a nonzero integer, and |N| <= |jq| sqrt d + r/2.
/// So c = 1/(r (2 |q| sqrt d + r/2)), rounded down to 6 decimals.
inline mpq_class surd_bad_constant(const Surd& alpha) {
  if (alpha.is_rational()) fail(Errc::perfect_square_radicand, "alpha is rational");
  const mpz_class q = abs(alpha.q());
  const mpz_class& r = alpha.r();
  // X = r (2 |q| sqrt d + r / 2) = (r^2 + 4 r |q| sqrt d) / 2
  Surd X = Surd::make(r * r, 4 * r * q, alpha.d(), mpz_class(2));
  const mpz_class scale = 1000000;
  mpq_class c(detail::floor_ratio(scale, X), scale);
  c.canonicalize();
  return c;
}

inline mpq_class surd_bad_constant(long d) {
  if (d < 2) fail(Errc::invalid_argument, "d must be >= 2");
  mpz_class root;
  mpz_sqrt(root.get_mpz_t(), mpz_class(d).get_mpz_t());
  if (root * root == d) fail(Errc::perfect_square_radicand, std::to_string(d) + " is a perfect square");
  return surd_bad_constant(Surd::sqrt_of(mpz_class(d)));
}

}  // namespace dioph
