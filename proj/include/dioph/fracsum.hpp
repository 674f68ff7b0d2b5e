#pragma once

// Sums of reciprocal products of distances to the nearest integer,
//   sum_{0 < |j| <= J} prod_u ||j . row_u(M)||^-1,
// the explicit gap-principle bound for phi-badly approximable matrices, and
// the dyadic-box diagnostics behind it.

#include <gmpxx.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "dioph/lattice.hpp"
#include "dioph/matrices.hpp"
#include "dioph/numerics.hpp"

namespace dioph {

struct ScanOptions {
  unsigned threads = 1;
  PrecisionPolicy precision{};
  /// Required bound on the certified error radius of a sum.
  double tolerance = 1e-9;
};

namespace detail {

inline std::string j_to_string(std::span<const long> j) {
  std::string s = "(";
  for (std::size_t i = 0; i < j.size(); ++i) s += (i ? "," : "") + std::to_string(j[i]);
  return s + ")";
}

/// Exact 64.64 fixed-point accumulator. Integer addition makes the total
/// independent of how the terms are grouped; the floating error of each
/// fast term is accumulated separately as an absolute bound.
struct FixedSum {
  u128 sum = 0;           // units of 2^-64
  u128 n_terms = 0;       // each fast term is off by < 4 units after truncation
  u128 abs_err = 0;       // exact-path enclosure widths, units of 2^-64
  double err = 0;         // sum of rel * term over fast terms
  bool overflow = false;

  void add_fast(const DWord& term, double rel) {
    if (!(term.hi < 0x1p62)) {
      overflow = true;
      return;
    }
    // hi and lo split into integer and fractional parts, all exact
    const double a = std::floor(term.hi);
    const double la = std::trunc(term.lo);
    const auto whole = static_cast<__int128>(static_cast<std::int64_t>(a) + static_cast<std::int64_t>(la));
    const auto f1 = static_cast<std::int64_t>((term.hi - a) * 0x1p63);
    const auto f2 = static_cast<std::int64_t>((term.lo - la) * 0x1p63);
    const __int128 units = whole * (static_cast<__int128>(1) << 64) + 2 * (static_cast<__int128>(f1) + f2);
    const u128 before = sum;
    sum += static_cast<u128>(units);
    if (sum < before && units > 0) overflow = true;
    ++n_terms;
    err += rel * term.hi;
  }

  void add_ball(const Ball& b) {
    BigFloat lo = b.lower();
    BigFloat hi = b.upper();
    mpfr_mul_2ui(lo.get(), lo.get(), 64, MPFR_RNDD);
    mpfr_mul_2ui(hi.get(), hi.get(), 64, MPFR_RNDU);
    mpz_class zl, zh;
    mpfr_get_z(zl.get_mpz_t(), lo.get(), MPFR_RNDD);
    mpfr_get_z(zh.get_mpz_t(), hi.get(), MPFR_RNDU);
    if (zl < 0) zl = 0;
    if (zh >= (mpz_class(1) << 126)) {
      overflow = true;
      return;
    }
    u128 v = low_128(zl);
    sum += v;
    if (sum < v) overflow = true;
    abs_err += low_128(zh - zl);
  }

  void merge(const FixedSum& o) {
    u128 s = sum + o.sum;
    overflow = overflow || o.overflow || s < sum;
    sum = s;
    n_terms += o.n_terms;
    abs_err += o.abs_err;
    err += o.err;
  }

  /// factor * (accumulated sum) as a ball with a certified radius.
  Ball to_ball(unsigned factor) const {
    auto to_mpz = [](u128 x) -> mpz_class {
      mpz_class z = mpz_class(static_cast<unsigned long>(x >> 64)) << 64;
      return z + static_cast<unsigned long>(static_cast<std::uint64_t>(x));
    };
    BigFloat mid(200);
    mpz_class s = to_mpz(sum) * factor;
    mpfr_set_z(mid.get(), s.get_mpz_t(), MPFR_RNDN);
    mpfr_div_2ui(mid.get(), mid.get(), 64, MPFR_RNDN);
    // The double sum of the fast-term bounds carries at most n_terms
    // roundings of relative size 2^-53 each.
    BigFloat rad(64), tmp(64);
    mpfr_set_d(rad.get(), err, MPFR_RNDU);
    mpz_class n = to_mpz(n_terms);
    mpfr_set_z(tmp.get(), n.get_mpz_t(), MPFR_RNDU);
    mpfr_div_2ui(tmp.get(), tmp.get(), 52, MPFR_RNDU);
    mpfr_add_ui(tmp.get(), tmp.get(), 1, MPFR_RNDU);
    mpfr_mul(rad.get(), rad.get(), tmp.get(), MPFR_RNDU);
    mpz_class units = 4 * n + to_mpz(abs_err);
    mpfr_set_z(tmp.get(), units.get_mpz_t(), MPFR_RNDU);
    mpfr_div_2ui(tmp.get(), tmp.get(), 64, MPFR_RNDU);
    mpfr_add(rad.get(), rad.get(), tmp.get(), MPFR_RNDU);
    mpfr_mul_ui(rad.get(), rad.get(), factor, MPFR_RNDU);
    return Ball(std::move(mid), std::move(rad));
  }
};

/// Fixed-point factors far enough from zero that a fast term's relative
/// error is tiny: x_u >= 2^20 err_u.
inline bool well_separated(u128 x, u128 err) { return err < (static_cast<u128>(1) << 100) && x >= (err << 20); }

/// prod_u 1/x_u in double-double precision, with its relative error bound.
/// Input error: 1/(x - e) = (1/x)(1 + delta), delta <= 2 e/x for e <= x/2^20.
inline DWord reciprocal_product(std::span<const u128> xs, std::span<const u128> errs, double& rel) {
  DWord p = dword_from_fixed(xs[0]);
  double min_x = p.hi;
  u128 err_total = errs[0];
  for (std::size_t u = 1; u < xs.size(); ++u) {
    DWord x = dword_from_fixed(xs[u]);
    p = dw_mul(p, x);
    min_x = std::min(min_x, x.hi);
    err_total += errs[u];
  }
  // sum_u e_u/x_u <= (sum_u e_u) / min_u x_u; the factor 4 covers the
  // second-order terms of a product of l factors (all deltas < 2^-19) and
  // the roundings of this estimate.
  double e = err_total < (static_cast<u128>(1) << 64)
                 ? static_cast<double>(static_cast<std::uint64_t>(err_total))
                 : std::ldexp(static_cast<double>(static_cast<std::uint64_t>(err_total >> 64)) + 1, 64);
  rel = 4 * (e * 0x1p-128) / min_x + dword_chain_rel(2 * xs.size());
  return dw_recip(p);
}

/// Exact-path reciprocal product prod_u 1/g_u(j . row_u) where g is
/// dist_nearest or frac; throws ZeroDenominator on an exact integer.
template <class G>
Ball slow_reciprocal_product(const Matrix<CertifiedReal>& m, std::span<const long> j, const PrecisionPolicy& policy,
                             G&& g) {
  return with_precision_retry(policy, [&](long bits) {
    CertifiedReal prod = CertifiedReal::integer(1L);
    for (std::size_t u = 0; u < m.rows(); ++u) {
      CertifiedReal v = g(linear_form(m.row(u), j, bits));
      if (v.is_surd() && v.surd().is_zero()) {
        fail(Errc::zero_denominator, "j . row_" + std::to_string(u + 1) + " is an integer at j = " + j_to_string(j));
      }
      prod = mul(prod, v.reciprocal(bits), bits);
    }
    return prod.to_ball(bits + 64);
  });
}

inline void check_tolerance(const Ball& b, double tolerance) {
  if (mpfr_cmp_d(b.rad().get(), tolerance) > 0) {
    throw PrecisionInsufficient("certified radius " + b.rad().to_string(3) + " exceeds tolerance");
  }
}

}  // namespace detail

/// sum over 0 < |j|_inf <= J of prod_u ||j . row_u(M)||^-1, certified.
inline CertifiedReal recip_product_sum(const Matrix<CertifiedReal>& m, long J, const ScanOptions& opts = {}) {
  if (J < 1) fail(Errc::invalid_argument, "J must be >= 1");
  ScanMatrix sm(m);
  const std::size_t l = m.rows();
  auto blocks = scan_half_space<detail::FixedSum>(sm, J, opts.threads, [&](detail::FixedSum& acc, const ScanPoint& pt) {
    u128 nd[16];
    bool fast = l <= 16;
    for (std::size_t u = 0; fast && u < l; ++u) {
      nd[u] = fixed_dist(pt.y[u]);
      fast = detail::well_separated(nd[u], pt.err[u]);
    }
    if (fast) {
      double rel;
      DWord term = detail::reciprocal_product({nd, l}, pt.err, rel);
      acc.add_fast(term, rel);
      return;
    }
    acc.add_ball(detail::slow_reciprocal_product(m, pt.j, opts.precision,
                                                 [](const CertifiedReal& x) { return dist_nearest(x); }));
  });
  detail::FixedSum total;
  for (const auto& b : blocks) total.merge(b);
  if (total.overflow) fail(Errc::invalid_argument, "reciprocal sum exceeds the 2^62 accumulator range");
  // j and -j contribute identically.
  Ball result = total.to_ball(2);
  detail::check_tolerance(result, opts.tolerance);
  return result;
}

/// phi(j) = c, c / j or c / j^2.
struct PhiSpec {
  enum class Shape { Constant, Inverse, InverseSquare };
  mpq_class c;
  Shape shape = Shape::Inverse;

  mpq_class operator()(long j) const {
    mpq_class v = c;
    if (shape == Shape::Inverse) v /= j;
    if (shape == Shape::InverseSquare) v /= mpq_class(j) * j;
    v.canonicalize();
    return v;
  }
};

/// Largest k with 2^k <= x, for rational x >= 1.
inline long floor_log2(const mpq_class& x) {
  const mpz_class& num = x.get_num();
  const mpz_class& den = x.get_den();
  long k = static_cast<long>(mpz_sizeinbase(num.get_mpz_t(), 2)) - static_cast<long>(mpz_sizeinbase(den.get_mpz_t(), 2));
  auto fits = [&](long e) {  // 2^e <= num/den
    return e >= 0 ? (den << static_cast<unsigned long>(e)) <= num : den <= (num << static_cast<unsigned long>(-e));
  };
  while (!fits(k)) --k;
  while (fits(k + 1)) ++k;
  return k;
}

inline mpz_class binomial(long n, long k) {
  mpz_class r;
  mpz_bin_uiui(r.get_mpz_t(), static_cast<unsigned long>(n), static_cast<unsigned long>(k));
  return r;
}

/// (4^l / phi(2J)) * binom(l + floor(log2(1 / phi(J))), l), exact.
inline mpq_class theorem6_bound(const PhiSpec& phi, long l, long J) {
  if (J < 1 || l < 1) fail(Errc::invalid_argument, "need l >= 1 and J >= 1");
  mpq_class pj = phi(J);
  mpq_class p2j = phi(2 * J);
  if (pj <= 0 || pj >= 1 || p2j <= 0) fail(Errc::phi_out_of_range, "phi(J) = " + pj.get_str() + " is not in (0, 1)");
  long k = floor_log2(1 / pj);
  mpz_class four_l = mpz_class(1) << static_cast<unsigned long>(2 * l);
  mpq_class bound = mpq_class(four_l) / p2j * mpq_class(binomial(l + k, l));
  bound.canonicalize();
  return bound;
}

/// floor(log2(1/phi)) for a certified phi in (0, 1).
inline long floor_log2_reciprocal(const CertifiedReal& phi, const PrecisionPolicy& policy = {}) {
  if (cmp_margin(phi, CertifiedReal::integer(0L), policy) != Ordering::Greater ||
      cmp_margin(phi, CertifiedReal::integer(1L), policy) == Ordering::Greater) {
    fail(Errc::phi_out_of_range, "phi must lie in (0, 1]");
  }
  long double approx = phi.approx();
  long k = static_cast<long>(std::floor(-std::log2(approx)));
  auto pow2 = [](long e) {  // 2^-e
    mpq_class v(1);
    if (e >= 0) mpq_div_2exp(v.get_mpq_t(), v.get_mpq_t(), static_cast<mp_bitcnt_t>(e));
    else mpq_mul_2exp(v.get_mpq_t(), v.get_mpq_t(), static_cast<mp_bitcnt_t>(-e));
    return CertifiedReal::rational(v);
  };
  // want phi <= 2^-k and phi > 2^-(k+1)
  for (int guard = 0; guard < 8; ++guard) {
    if (cmp_margin(phi, pow2(k), policy) == Ordering::Greater) {
      --k;
    } else if (cmp_margin(phi, pow2(k + 1), policy) != Ordering::Greater) {
      ++k;
    } else {
      return k;
    }
  }
  throw PrecisionInsufficient("floor(log2(1/phi)) did not settle");
}

/// The same bound with certified phi(J), phi(2J) (e.g. empirical minima).
inline CertifiedReal theorem6_bound(const CertifiedReal& phi_J, const CertifiedReal& phi_2J, long l,
                                    const PrecisionPolicy& policy = {}) {
  long k = floor_log2_reciprocal(phi_J, policy);
  mpz_class four_l = mpz_class(1) << static_cast<unsigned long>(2 * l);
  CertifiedReal factor = CertifiedReal::integer(four_l * binomial(l + k, l));
  return mul(factor, phi_2J.reciprocal(), std::max(kDefaultBits, phi_2J.precision()));
}

/// Minimum of prod_u ||j . row_u(M)|| over 0 < |j|_inf <= J.
struct MinimumWitness {
  std::vector<long> j;
  CertifiedReal value;
  bool zero = false;  // some j gives an exact integer (rational degeneracy)
};

namespace detail {

struct MinAcc {
  bool has = false;
  bool zero = false;
  std::vector<long> j;
  std::vector<long> zero_j;
  ProductEnclosure enc;
};

/// Is the candidate strictly smaller than the incumbent? Overlapping
/// enclosures are resolved exactly; true ties keep the incumbent.
inline bool smaller(const Matrix<CertifiedReal>& m, const PrecisionPolicy& policy, const ProductEnclosure& cand,
                    std::span<const long> cand_j, const ProductEnclosure& inc, std::span<const long> inc_j) {
  if (cand.hi < inc.lo) return true;
  if (cand.lo > inc.hi) return false;
  try {
    return cmp_margin(product_dist(m, cand_j, policy), product_dist(m, inc_j, policy), policy) == Ordering::Less;
  } catch (const PrecisionInsufficient&) {
    return false;
  }
}

inline void offer_min(MinAcc& acc, const Matrix<CertifiedReal>& m, const PrecisionPolicy& policy, const ScanPoint& pt) {
  if (acc.zero) return;
  ProductEnclosure e = fast_product(pt);
  if (!e.ok) {
    CertifiedReal v = product_dist(m, pt.j, policy);
    if (v.is_surd() && v.surd().is_zero()) {
      acc.zero = true;
      acc.zero_j.assign(pt.j.begin(), pt.j.end());
      return;
    }
    e = ball_enclosure(v.to_ball(kDefaultBits));
  }
  if (!acc.has || smaller(m, policy, e, pt.j, acc.enc, acc.j)) {
    acc.has = true;
    acc.enc = e;
    acc.j.assign(pt.j.begin(), pt.j.end());
  }
}

inline MinimumWitness finish_min(const std::vector<MinAcc>& blocks, const Matrix<CertifiedReal>& m,
                                 const PrecisionPolicy& policy) {
  MinAcc best;
  for (const auto& b : blocks) {
    if (b.zero && !best.zero) {
      best.zero = true;
      best.zero_j = b.zero_j;
    }
    if (b.has && (!best.has || smaller(m, policy, b.enc, b.j, best.enc, best.j))) {
      best.has = true;
      best.enc = b.enc;
      best.j = b.j;
    }
  }
  MinimumWitness w;
  if (best.zero) {
    w.zero = true;
    w.j = best.zero_j;
    w.value = CertifiedReal::integer(0L);
    return w;
  }
  w.j = best.j;
  w.value = product_dist(m, best.j, policy);
  return w;
}

}  // namespace detail

inline MinimumWitness phi_min(const Matrix<CertifiedReal>& m, long J, const ScanOptions& opts = {}) {
  if (J < 1) fail(Errc::invalid_argument, "J must be >= 1");
  ScanMatrix sm(m);
  auto blocks = scan_half_space<detail::MinAcc>(sm, J, opts.threads, [&](detail::MinAcc& acc, const ScanPoint& pt) {
    detail::offer_min(acc, m, opts.precision, pt);
  });
  return detail::finish_min(blocks, m, opts.precision);
}

/// Points P_j = ({j . row_1}, ..., {j . row_l}) bucketed into dyadic boxes
/// R(k) = prod_u [2^-k_u, 2^-k_u + 1).
struct DyadicBox {
  long count = 0;
  CertifiedReal partial_sum;  // sum of prod_u 1/P_j,u over members
  std::vector<std::vector<long>> members;
};

struct DyadicProfile {
  long J = 0;
  std::size_t l = 0;
  std::map<std::vector<long>, DyadicBox> boxes;
  MinimumWitness phi_min_J;
  MinimumWitness phi_min_2J;
  long excluded = 0;  // j with some coordinate of P_j equal to 0
  std::vector<std::vector<long>> excluded_j;

  long total_count() const {
    long n = 0;
    for (const auto& [k, b] : boxes) n += b.count;
    return n;
  }
};

namespace detail {

struct BoxAcc {
  long count = 0;
  FixedSum sum;
  std::vector<std::vector<long>> members;
};

struct ProfileAcc {
  std::map<std::vector<long>, BoxAcc> boxes;
  long excluded = 0;
  std::vector<std::vector<long>> excluded_j;
};

/// k with v 2^-128 in [2^-k, 2^-k+1), if the error interval stays inside.
inline std::optional<long> fixed_box_index(u128 v, u128 err) {
  if (err >= kErrSaturated || v <= err || v + err < v) return std::nullopt;
  auto bitlen = [](u128 x) {
    long n = 0;
    while (x) {
      x >>= 1;
      ++n;
    }
    return n;
  };
  long a = bitlen(v - err);
  long b = bitlen(v + err);
  if (a != b) return std::nullopt;
  return 129 - a;
}

/// Exact box index for a value in (0, 1).
inline long exact_box_index(const CertifiedReal& y, const PrecisionPolicy& policy) {
  long k = static_cast<long>(std::floor(-std::log2(y.approx()))) + 1;
  auto pow2 = [](long e) {
    mpq_class v(1);
    mpq_div_2exp(v.get_mpq_t(), v.get_mpq_t(), static_cast<mp_bitcnt_t>(e));
    return CertifiedReal::rational(v);
  };
  for (int guard = 0; guard < 8; ++guard) {
    if (k < 1) k = 1;
    if (cmp_margin(y, pow2(k), policy) == Ordering::Less) {
      ++k;
    } else if (k > 1 && cmp_margin(y, pow2(k - 1), policy) != Ordering::Less) {
      --k;
    } else {
      return k;
    }
  }
  throw PrecisionInsufficient("dyadic box index did not settle");
}

}  // namespace detail

/// Complete bucketing of P_j for 0 < |j| <= J (both signs of j), with the
/// empirical minima of the product of distances over |j| <= J and <= 2J.
/// Rational degeneracies (a coordinate of P_j equal to 0) are excluded and
/// reported rather than raised.
inline DyadicProfile dyadic_profile(const Matrix<CertifiedReal>& m, long J, const ScanOptions& opts = {},
                                    bool keep_members = false) {
  if (J < 1) fail(Errc::invalid_argument, "J must be >= 1");
  const std::size_t l = m.rows();
  ScanMatrix sm(m);
  auto blocks = scan_half_space<detail::ProfileAcc>(sm, J, opts.threads, [&](detail::ProfileAcc& acc, const ScanPoint& pt) {
    for (int sign : {1, -1}) {
      std::vector<long> j(pt.j.begin(), pt.j.end());
      if (sign < 0)
        for (auto& v : j) v = -v;
      std::vector<long> k(l);
      std::vector<u128> ys(l);
      bool fast = true;
      for (std::size_t u = 0; u < l && fast; ++u) {
        ys[u] = sign > 0 ? pt.y[u] : static_cast<u128>(-pt.y[u]);
        auto idx = detail::fixed_box_index(ys[u], pt.err[u]);
        fast = idx.has_value() && detail::well_separated(ys[u], pt.err[u]);
        if (fast) k[u] = *idx;
      }
      detail::BoxAcc* box = nullptr;
      if (fast) {
        box = &acc.boxes[k];
        double rel;
        DWord term = detail::reciprocal_product(ys, pt.err, rel);
        box->sum.add_fast(term, rel);
      } else {
        bool zero = false;
        for (std::size_t u = 0; u < l && !zero; ++u) {
          k[u] = with_precision_retry(opts.precision, [&](long bits) -> long {
            CertifiedReal y = frac(linear_form(m.row(u), j, bits));
            if (y.sign() == 0) {
              zero = true;
              return 0;
            }
            return detail::exact_box_index(y, opts.precision);
          });
        }
        if (zero) {
          ++acc.excluded;
          acc.excluded_j.push_back(j);
          continue;
        }
        box = &acc.boxes[k];
        box->sum.add_ball(detail::slow_reciprocal_product(m, j, opts.precision,
                                                          [](const CertifiedReal& x) { return frac(x); }));
      }
      ++box->count;
      if (keep_members) box->members.push_back(j);
    }
  });

  DyadicProfile prof;
  prof.J = J;
  prof.l = l;
  std::map<std::vector<long>, detail::BoxAcc> merged;
  for (auto& b : blocks) {
    prof.excluded += b.excluded;
    prof.excluded_j.insert(prof.excluded_j.end(), b.excluded_j.begin(), b.excluded_j.end());
    for (auto& [k, box] : b.boxes) {
      auto& dst = merged[k];
      dst.count += box.count;
      dst.sum.merge(box.sum);
      dst.members.insert(dst.members.end(), box.members.begin(), box.members.end());
    }
  }
  for (auto& [k, box] : merged) {
    if (box.sum.overflow) fail(Errc::invalid_argument, "box partial sum exceeds the accumulator range");
    DyadicBox out;
    out.count = box.count;
    out.partial_sum = box.sum.to_ball(1);
    out.members = std::move(box.members);
    prof.boxes.emplace(k, std::move(out));
  }
  prof.phi_min_J = phi_min(m, J, opts);
  prof.phi_min_2J = phi_min(m, 2 * J, opts);
  return prof;
}

/// Least-squares line through (log J, log recip_product_sum(M, J)).
struct GrowthFit {
  double slope = 0;
  double intercept = 0;
  std::vector<long> J;
  std::vector<CertifiedReal> sums;
  std::vector<double> residuals;
  double max_abs_residual = 0;
};

inline GrowthFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
    sxx += x[i] * x[i];
    sxy += x[i] * y[i];
  }
  GrowthFit f;
  const double den = n * sxx - sx * sx;
  if (den == 0) fail(Errc::insufficient_data, "degenerate abscissae");
  f.slope = (n * sxy - sx * sy) / den;
  f.intercept = (sy - f.slope * sx) / n;
  for (std::size_t i = 0; i < x.size(); ++i) {
    double r = y[i] - (f.intercept + f.slope * x[i]);
    f.residuals.push_back(r);
    f.max_abs_residual = std::max(f.max_abs_residual, std::abs(r));
  }
  return f;
}

inline GrowthFit growth_fit(const Matrix<CertifiedReal>& m, const std::vector<long>& J_list, const ScanOptions& opts = {}) {
  if (J_list.size() < 3) fail(Errc::insufficient_data, "growth_fit needs at least 3 values of J");
  for (std::size_t i = 1; i < J_list.size(); ++i)
    if (J_list[i] <= J_list[i - 1]) fail(Errc::invalid_argument, "J_list must be increasing");
  std::vector<double> xs, ys;
  std::vector<CertifiedReal> sums;
  for (long J : J_list) {
    if (J < 2) fail(Errc::invalid_argument, "growth_fit needs J >= 2");
    CertifiedReal s = recip_product_sum(m, J, opts);
    xs.push_back(std::log(static_cast<double>(J)));
    ys.push_back(std::log(static_cast<double>(s.approx())));
    sums.push_back(std::move(s));
  }
  GrowthFit f = fit_line(xs, ys);
  f.J = J_list;
  f.sums = std::move(sums);
  return f;
}

}  // namespace dioph
