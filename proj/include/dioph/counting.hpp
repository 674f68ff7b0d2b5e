#pragma once

// Exact counts of rational points near an affine subspace:
//   A(q, delta) = #{a in {1..q}^d : ||(q, a) . Atilde|| < delta}
//   N(Q, delta) = #{at in {1..Q}^(d+1) : ||at . Atilde|| < delta}
// where ||.|| of a vector is the max over its coordinates. Every membership
// is decided with a certificate; exact ties ||.|| == delta are not counted.

#include <gmpxx.h>

#include <algorithm>
#include <cstdint>
#include <iomanip>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "dioph/lattice.hpp"
#include "dioph/matrices.hpp"
#include "dioph/numerics.hpp"
#include "dioph/parallel.hpp"

namespace dioph {

enum class CountMode { A, N };

inline const char* mode_name(CountMode m) { return m == CountMode::A ? "A" : "N"; }

struct CountOptions {
  unsigned threads = 1;
  PrecisionPolicy precision{};
  /// Maximum number of membership tests before BudgetExceeded.
  double budget = 1e9;
  /// Use the three-gap stepping enumerator where it applies.
  bool three_gap = true;
};

/// Certified test of ||y|| < T for fixed-point y, with exact fallback.
class Threshold {
 public:
  Threshold(CertifiedReal t, const PrecisionPolicy& policy) : t_(std::move(t)) {
    if (cmp_margin(t_, CertifiedReal::integer(0L), policy) != Ordering::Greater) {
      fail(Errc::delta_out_of_range, "threshold must be positive");
    }
    all_ = cmp_margin(t_, CertifiedReal::rational(mpq_class(1, 2)), policy) == Ordering::Greater;
    if (!all_) {
      FixedFrac f = to_fixed_frac(t_);
      lo_ = f.value > f.err ? f.value - f.err : 0;
      hi_ = f.value + f.err;
    }
  }

  const CertifiedReal& value() const { return t_; }
  /// T > 1/2: every point qualifies.
  bool all() const { return all_; }

  /// true / false when the fixed-point data decides ||y|| < T.
  std::optional<bool> fast(u128 y, u128 err) const {
    if (all_) return true;
    if (err >= detail::kErrSaturated) return std::nullopt;
    const u128 nd = fixed_dist(y);
    if (nd + err < lo_) return true;
    if (nd > hi_ + err) return false;
    return std::nullopt;
  }

  /// Exact comparison of ||x|| with T: Less means a member.
  Ordering exact(std::span<const CertifiedReal> col, std::span<const long> coeffs, const PrecisionPolicy& policy) const {
    return with_precision_retry(policy, [&](long bits) {
      CertifiedReal dist = dist_nearest(linear_form(col, coeffs, bits));
      return cmp_margin(dist, t_, policy);
    });
  }

 private:
  CertifiedReal t_;
  bool all_ = false;
  u128 lo_ = 0, hi_ = 0;
};

namespace detail {

/// Columns of Atilde as rows, so that y_v = at . row_v.
struct ColumnData {
  Matrix<CertifiedReal> cols;
  ScanMatrix fixed;
  explicit ColumnData(const SubspaceMatrix& s) : cols(s.Atilde().transposed()), fixed(cols) {}
};

inline bool is_member(const ColumnData& cd, const Threshold& t, const ScanPoint& pt, const PrecisionPolicy& policy) {
  for (std::size_t v = 0; v < pt.y.size(); ++v) {
    std::optional<bool> in = t.fast(pt.y[v], pt.err[v]);
    if (!in) in = t.exact(cd.cols.row(v), pt.j, policy) == Ordering::Less;
    if (!*in) return false;
  }
  return true;
}

inline std::vector<long> box_lo(const SubspaceMatrix& s, CountMode mode, long size) {
  std::vector<long> lo(static_cast<std::size_t>(s.d() + 1), 1);
  if (mode == CountMode::A) lo[0] = size;
  return lo;
}

inline double box_points(const SubspaceMatrix& s, CountMode mode, long size) {
  return std::pow(static_cast<double>(size), mode == CountMode::A ? s.d() : s.d() + 1);
}

}  // namespace detail

/// Enumerates every at in the box prod_i [lo_i, hi] (one lexicographic
/// sweep per value of the outermost free coordinate), calling
/// visit(acc, point) with y_v = at . row_v of `sm`. Blocks are fixed
/// contiguous ranges of the outer coordinate; results come back in order.
template <class Acc, class Visit>
std::vector<Acc> scan_box(const ScanMatrix& sm, const std::vector<long>& lo, long hi, unsigned threads, Visit&& visit) {
  const std::size_t l = sm.rows();
  const std::size_t m = sm.cols();
  std::size_t outer = 0;
  while (outer < m && lo[outer] == hi) ++outer;
  if (outer == m) outer = 0;
  std::vector<Range> blocks = split_range(lo[outer], hi, kScanBlocks);

  return run_blocks(blocks.size(), threads, [&](std::size_t b) {
    Acc acc{};
    std::vector<long> j(lo);
    std::vector<u128> y(l), err(l), base_err(l);
    // inner coordinates other than `outer`, the last of which is swept
    std::vector<std::size_t> inner;
    for (std::size_t i = 0; i < m; ++i)
      if (i != outer) inner.push_back(i);
    auto fill = [&](std::size_t skip) {
      for (std::size_t u = 0; u < l; ++u) {
        u128 v = 0, e = 0;
        for (std::size_t i = 0; i < m; ++i) {
          if (i == skip || j[i] == 0) continue;
          v += sm.at(u, i).value * static_cast<u128>(static_cast<__int128>(j[i]));
          e = detail::sat_add(e, detail::sat_mul(sm.at(u, i).err, static_cast<std::uint64_t>(j[i] < 0 ? -j[i] : j[i])));
        }
        y[u] = v;
        base_err[u] = e;
      }
    };
    for (long o = blocks[b].lo; o <= blocks[b].hi; ++o) {
      j[outer] = o;
      if (inner.empty()) {
        fill(m);
        visit(acc, ScanPoint{j, y, base_err});
        continue;
      }
      const std::size_t last = inner.back();
      for (std::size_t i : inner) j[i] = lo[i];
      while (true) {
        j[last] = 0;
        fill(last);
        for (std::size_t u = 0; u < l; ++u) y[u] += sm.at(u, last).value * static_cast<u128>(lo[last]);
        for (long t = lo[last]; t <= hi; ++t) {
          j[last] = t;
          for (std::size_t u = 0; u < l; ++u) {
            err[u] = detail::sat_add(base_err[u], detail::sat_mul(sm.at(u, last).err, static_cast<std::uint64_t>(t < 0 ? -t : t)));
          }
          visit(acc, ScanPoint{j, y, err});
          for (std::size_t u = 0; u < l; ++u) y[u] += sm.at(u, last).value;
        }
        // odometer over the middle coordinates
        std::size_t k = inner.size() - 1;
        bool done = true;
        while (k > 0) {
          --k;
          const std::size_t i = inner[k];
          if (j[i] < hi && lo[i] != hi) {
            ++j[i];
            for (std::size_t r = k + 1; r + 1 < inner.size(); ++r) j[inner[r]] = lo[inner[r]];
            done = false;
            break;
          }
        }
        if (done) break;
      }
    }
    return acc;
  });
}

namespace detail {

/// Three-gap enumerator for one row (q0 fixed, a in [1, B]) when d = 1 and
/// n - d = 1: the returns of a -> q0 alpha0 + a alpha1 (mod 1) to the
/// half-open arc [-T, T) are separated by g1, g2 or g1 + g2, where
/// g1 = min{k : {k alpha1} < 2T} and g2 = min{k : {k alpha1} > 1 - 2T}.
/// Requires alpha1 irrational and T rational in (0, 1/2).
class ThreeGapRow {
 public:
  ThreeGapRow(const ColumnData& cd, const Threshold& t, const PrecisionPolicy& policy)
      : cd_(cd), t_(t), policy_(policy), alpha0_(cd.fixed.at(0, 0)), alpha1_(cd.fixed.at(0, 1)) {}

  /// Return times; nullopt if one exceeds `limit`.
  std::optional<std::pair<long, long>> gaps(long limit) const {
    const CertifiedReal two_t = t_.value() * mpz_class(2);
    const CertifiedReal one_minus = CertifiedReal::integer(1L) - two_t;
    long g1 = 0, g2 = 0;
    const CertifiedReal& a1 = cd_.cols(0, 1);
    for (long k = 1; k <= limit && (g1 == 0 || g2 == 0); ++k) {
      CertifiedReal f = frac(a1 * mpz_class(k));
      if (g1 == 0 && cmp_margin(f, two_t, policy_) == Ordering::Less) g1 = k;
      if (g2 == 0 && cmp_margin(f, one_minus, policy_) == Ordering::Greater) g2 = k;
    }
    if (g1 == 0 || g2 == 0) return std::nullopt;
    return std::make_pair(g1, g2);
  }

  /// Membership of (q0, a) in the half-open arc; `open` is false for the
  /// single excluded boundary point y == -T.
  bool half_open(long q0, long a, bool& open) const {
    const u128 y = alpha0_.value * static_cast<u128>(q0) + alpha1_.value * static_cast<u128>(a);
    const u128 err = detail::sat_add(detail::sat_mul(alpha0_.err, static_cast<std::uint64_t>(q0)),
                                     detail::sat_mul(alpha1_.err, static_cast<std::uint64_t>(a)));
    open = true;
    if (std::optional<bool> in = t_.fast(y, err)) return *in;
    const long coeffs[2] = {q0, a};
    Ordering o = t_.exact(cd_.cols.row(0), coeffs, policy_);
    if (o != Ordering::Equal) return o == Ordering::Less;
    // y == +T or y == -T exactly; only -T lies in [-T, T)
    CertifiedReal f = frac(linear_form(cd_.cols.row(0), coeffs, kDefaultBits));
    const bool minus = cmp_margin(f, CertifiedReal::rational(mpq_class(1, 2)), policy_) == Ordering::Greater;
    open = false;
    return minus;
  }

  /// Count of a in [lo, hi] with ||y|| < T.
  long count(long q0, long lo, long hi, long g1, long g2) const {
    long n = 0;
    bool open = true;
    long a = lo;
    while (a <= hi && !half_open(q0, a, open)) ++a;
    const long small = std::min(g1, g2), large = std::max(g1, g2);
    while (a <= hi) {
      if (open) ++n;
      // the next return is the first of these that hits
      long next = hi + 1;
      bool exhausted = true;
      for (long g : {small, large, g1 + g2}) {
        if (a + g > hi) {
          exhausted = false;
          break;
        }
        if (half_open(q0, a + g, open)) {
          next = a + g;
          exhausted = false;
          break;
        }
      }
      if (exhausted) {
        // the gap structure did not apply; finish plainly
        for (long b = a + 1; b <= hi; ++b)
          if (half_open(q0, b, open) && open) ++n;
        return n;
      }
      a = next;
    }
    return n;
  }

 private:
  const ColumnData& cd_;
  const Threshold& t_;
  const PrecisionPolicy& policy_;
  FixedFrac alpha0_, alpha1_;
};

inline bool three_gap_applies(const SubspaceMatrix& s, const Threshold& t) {
  if (s.d() != 1 || s.codim() != 1 || t.all()) return false;
  const CertifiedReal& a1 = s.A()(0, 0);
  if (!a1.is_surd() || a1.surd().is_rational()) return false;
  if (!t.value().is_rational()) return false;
  return t.value().surd().to_rational() < mpq_class(1, 2);
}

inline void check_budget(const SubspaceMatrix& s, CountMode mode, long size, const CountOptions& opts) {
  const double points = detail::box_points(s, mode, size);
  if (points > opts.budget) {
    std::ostringstream n;
    n << std::setprecision(3) << points;
    fail(Errc::budget_exceeded, "enumeration of " + n.str() + " points exceeds the budget of " + std::to_string(static_cast<long>(opts.budget)));
  }
}

}  // namespace detail

/// Count with a certified real threshold T > 0 (memberships ||.|| < T).
inline long count_threshold(const SubspaceMatrix& s, CountMode mode, long size, const CertifiedReal& T,
                            const CountOptions& opts = {}) {
  if (size < 1) fail(Errc::invalid_argument, "size parameter must be >= 1");
  detail::check_budget(s, mode, size, opts);
  Threshold t(T, opts.precision);
  if (t.all()) {
    const double points = detail::box_points(s, mode, size);
    return static_cast<long>(points);
  }
  detail::ColumnData cd(s);

  if (opts.three_gap && detail::three_gap_applies(s, t)) {
    detail::ThreeGapRow row(cd, t, opts.precision);
    if (auto g = row.gaps(size)) {
      const auto [g1, g2] = *g;
      if (mode == CountMode::A) {
        std::vector<Range> blocks = split_range(1, size, kScanBlocks);
        auto parts = run_blocks(blocks.size(), opts.threads, [&](std::size_t b) {
          return row.count(size, blocks[b].lo, blocks[b].hi, g1, g2);
        });
        long n = 0;
        for (long p : parts) n += p;
        return n;
      }
      std::vector<Range> blocks = split_range(1, size, kScanBlocks);
      auto parts = run_blocks(blocks.size(), opts.threads, [&](std::size_t b) {
        long n = 0;
        for (long q0 = blocks[b].lo; q0 <= blocks[b].hi; ++q0) n += row.count(q0, 1, size, g1, g2);
        return n;
      });
      long n = 0;
      for (long p : parts) n += p;
      return n;
    }
  }

  auto parts = scan_box<long>(cd.fixed, detail::box_lo(s, mode, size), size, opts.threads,
                              [&](long& acc, const ScanPoint& pt) {
                                if (detail::is_member(cd, t, pt, opts.precision)) ++acc;
                              });
  long n = 0;
  for (long p : parts) n += p;
  return n;
}

inline void check_delta(const mpq_class& delta) {
  if (delta <= 0 || delta > 1) fail(Errc::delta_out_of_range, "delta = " + delta.get_str() + " is not in (0, 1]");
}

inline long count_A(const SubspaceMatrix& s, long q, const mpq_class& delta, const CountOptions& opts = {}) {
  check_delta(delta);
  return count_threshold(s, CountMode::A, q, CertifiedReal::rational(delta), opts);
}

inline long count_N(const SubspaceMatrix& s, long Q, const mpq_class& delta, const CountOptions& opts = {}) {
  check_delta(delta);
  return count_threshold(s, CountMode::N, Q, CertifiedReal::rational(delta), opts);
}

struct CountReport {
  CountMode mode = CountMode::A;
  long size = 0;
  mpq_class delta;
  long exact = 0;
  mpq_class main_term;    // (2 delta)^(n-d) size^d, or size^(d+1) for N
  mpq_class discrepancy;  // |exact - main_term|
  mpq_class normalized;   // discrepancy / (delta^(n-d) size^d) (resp. ^(d+1))
};

struct DiscrepancySummary {
  std::vector<CountReport> reports;
  mpq_class max_normalized;
};

inline CountReport count_report(const SubspaceMatrix& s, CountMode mode, long size, const mpq_class& delta,
                                const CountOptions& opts = {}) {
  CountReport r;
  r.mode = mode;
  r.size = size;
  r.delta = delta;
  r.exact = mode == CountMode::A ? count_A(s, size, delta, opts) : count_N(s, size, delta, opts);
  const int k = s.codim();
  const int e = mode == CountMode::A ? s.d() : s.d() + 1;
  mpz_class size_pow;
  mpz_ui_pow_ui(size_pow.get_mpz_t(), static_cast<unsigned long>(size), static_cast<unsigned long>(e));
  mpq_class delta_pow(1);
  for (int i = 0; i < k; ++i) delta_pow *= delta;
  mpq_class scale = delta_pow * mpq_class(size_pow);  // delta^k size^e
  r.main_term = scale * mpq_class(mpz_class(1) << static_cast<unsigned long>(k));
  r.discrepancy = abs(mpq_class(r.exact) - r.main_term);
  r.normalized = r.discrepancy / scale;
  r.main_term.canonicalize();
  r.discrepancy.canonicalize();
  r.normalized.canonicalize();
  return r;
}

inline DiscrepancySummary discrepancy_report(const SubspaceMatrix& s, const std::vector<long>& sizes,
                                             const mpq_class& delta, CountMode mode, const CountOptions& opts = {}) {
  if (sizes.empty()) fail(Errc::invalid_argument, "empty range of size parameters");
  DiscrepancySummary out;
  for (long size : sizes) {
    out.reports.push_back(count_report(s, mode, size, delta, opts));
    out.max_normalized = std::max(out.max_normalized, out.reports.back().normalized);
  }
  return out;
}

}  // namespace dioph
