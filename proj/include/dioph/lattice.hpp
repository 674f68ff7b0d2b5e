#pragma once

// Enumeration of integer vectors j in [-J, J]^m \ {0} against the rows of a
// matrix, in 128-bit fixed point. Shared by fracsum and badness.

#include <gmpxx.h>

#include <algorithm>
#include <cstdint>
#include <span>
#include <vector>

#include "dioph/matrices.hpp"
#include "dioph/numerics.hpp"
#include "dioph/parallel.hpp"

namespace dioph {

/// Matrix entries as fixed-point fractional parts (row-major l x m).
class ScanMatrix {
 public:
  explicit ScanMatrix(const Matrix<CertifiedReal>& m) : l_(m.rows()), m_(m.cols()) {
    entries_.reserve(l_ * m_);
    for (std::size_t u = 0; u < l_; ++u)
      for (std::size_t i = 0; i < m_; ++i) entries_.push_back(to_fixed_frac(m(u, i)));
  }

  std::size_t rows() const { return l_; }
  std::size_t cols() const { return m_; }
  const FixedFrac& at(std::size_t u, std::size_t i) const { return entries_[u * m_ + i]; }

 private:
  std::size_t l_, m_;
  std::vector<FixedFrac> entries_;
};

/// One point of a scan: the vector j and, per row u, the fixed-point
/// fractional part of j . row_u with its error bound.
struct ScanPoint {
  std::span<const long> j;
  std::span<const u128> y;
  std::span<const u128> err;
};

/// A work item of the canonical half-space (first nonzero coordinate
/// positive): `slab` leading zeros, then coordinate `slab` fixed to `lead`,
/// the remaining coordinates free in [-J, J].
struct HalfSpaceItem {
  int slab = 0;
  long lead = 0;
};

inline std::vector<HalfSpaceItem> half_space_items(std::size_t m, long J) {
  std::vector<HalfSpaceItem> items;
  for (std::size_t s = 0; s < m; ++s)
    for (long v = 1; v <= J; ++v) items.push_back({static_cast<int>(s), v});
  return items;
}

inline constexpr std::size_t kScanBlocks = 64;

/// Visits every j in the canonical half of [-J, J]^m \ {0} (lexicographic
/// order inside each work item) and calls visit(acc, point). Work items are
/// grouped into a fixed number of contiguous blocks; the per-block
/// accumulators come back in block order.
template <class Acc, class Visit>
std::vector<Acc> scan_half_space(const ScanMatrix& sm, long J, unsigned threads, Visit&& visit) {
  const std::size_t l = sm.rows();
  const std::size_t m = sm.cols();
  std::vector<HalfSpaceItem> items = half_space_items(m, J);
  std::vector<Range> blocks = split_range(0, static_cast<long>(items.size()) - 1, kScanBlocks);

  return run_blocks(blocks.size(), threads, [&](std::size_t b) {
    Acc acc{};
    std::vector<long> j(m, 0);
    std::vector<u128> y(l), err(l), base(l), base_err(l);
    for (long it = blocks[b].lo; it <= blocks[b].hi; ++it) {
      const HalfSpaceItem& item = items[static_cast<std::size_t>(it)];
      const auto s = static_cast<std::size_t>(item.slab);
      std::fill(j.begin(), j.end(), 0L);
      j[s] = item.lead;
      const std::size_t free_begin = s + 1;
      if (free_begin == m) {
        for (std::size_t u = 0; u < l; ++u) {
          y[u] = sm.at(u, s).value * static_cast<u128>(item.lead);
          err[u] = detail::sat_mul(sm.at(u, s).err, static_cast<std::uint64_t>(item.lead));
        }
        visit(acc, ScanPoint{j, y, err});
        continue;
      }
      // Odometer over the free coordinates except the last; the last one is
      // swept incrementally.
      for (std::size_t i = free_begin; i < m; ++i) j[i] = -J;
      const std::size_t last = m - 1;
      while (true) {
        for (std::size_t u = 0; u < l; ++u) {
          u128 acc_v = 0;
          u128 acc_e = 0;
          for (std::size_t i = 0; i < last; ++i) {
            if (j[i] == 0) continue;
            acc_v += sm.at(u, i).value * static_cast<u128>(static_cast<__int128>(j[i]));
            acc_e = detail::sat_add(acc_e, detail::sat_mul(sm.at(u, i).err, static_cast<std::uint64_t>(j[i] < 0 ? -j[i] : j[i])));
          }
          base[u] = acc_v;
          base_err[u] = acc_e;
          y[u] = acc_v - sm.at(u, last).value * static_cast<u128>(J);
        }
        for (long t = -J; t <= J; ++t) {
          j[last] = t;
          const auto at = static_cast<std::uint64_t>(t < 0 ? -t : t);
          for (std::size_t u = 0; u < l; ++u) err[u] = detail::sat_add(base_err[u], detail::sat_mul(sm.at(u, last).err, at));
          visit(acc, ScanPoint{j, y, err});
          for (std::size_t u = 0; u < l; ++u) y[u] += sm.at(u, last).value;
        }
        // advance the odometer over free_begin .. last-1
        std::size_t i = last;
        bool done = true;
        while (i > free_begin) {
          --i;
          if (j[i] < J) {
            ++j[i];
            for (std::size_t k = i + 1; k < last; ++k) j[k] = -J;
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

/// Visits every j in the canonical half-space with |j|_inf == s, in
/// lexicographic order.
template <class Visit>
void scan_shell(const ScanMatrix& sm, long s, Visit&& visit) {
  const std::size_t l = sm.rows();
  const std::size_t m = sm.cols();
  std::vector<long> j(m, 0);
  std::vector<u128> y(l), err(l);
  auto emit = [&] {
    for (std::size_t u = 0; u < l; ++u) {
      u128 v = 0, e = 0;
      for (std::size_t i = 0; i < m; ++i) {
        if (j[i] == 0) continue;
        v += sm.at(u, i).value * static_cast<u128>(static_cast<__int128>(j[i]));
        e = detail::sat_add(e, detail::sat_mul(sm.at(u, i).err, static_cast<std::uint64_t>(j[i] < 0 ? -j[i] : j[i])));
      }
      y[u] = v;
      err[u] = e;
    }
    visit(ScanPoint{j, y, err});
  };
  // fill coordinates from `i` on; `hit` records whether |j_k| == s already
  auto fill = [&](auto&& self, std::size_t i, bool hit) -> void {
    if (i == m) {
      if (hit) emit();
      return;
    }
    if (i == m - 1 && !hit) {
      j[i] = -s;
      emit();
      j[i] = s;
      emit();
      return;
    }
    for (long v = -s; v <= s; ++v) {
      j[i] = v;
      self(self, i + 1, hit || v == s || v == -s);
    }
  };
  for (std::size_t lead = 0; lead < m; ++lead) {
    std::fill(j.begin(), j.end(), 0L);
    // with no coordinates after the lead, only v == s reaches the shell
    for (long v = lead + 1 == m ? s : 1; v <= s; ++v) {
      j[lead] = v;
      fill(fill, lead + 1, v == s);
    }
  }
}

/// Certified enclosure [lo, hi] of prod_u ||j . row_u|| from a fast scan
/// point; ok == false when some factor is too close to an integer for the
/// fixed-point data to decide (callers fall back to exact evaluation).
struct ProductEnclosure {
  long double lo = 0;
  long double hi = 0;
  bool ok = false;
};

inline ProductEnclosure fast_product(const ScanPoint& pt) {
  ProductEnclosure e;
  long double lo = 1, hi = 1;
  for (std::size_t u = 0; u < pt.y.size(); ++u) {
    u128 nd = fixed_dist(pt.y[u]);
    if (pt.err[u] >= detail::kErrSaturated || nd <= 4 * pt.err[u]) return e;
    lo *= fixed_to_ld(nd - pt.err[u]);
    hi *= fixed_to_ld(nd + pt.err[u]);
  }
  const long double slack = 4 * static_cast<long double>(pt.y.size() + 1) * kLdEps;
  e.lo = lo * (1 - slack);
  e.hi = hi * (1 + slack);
  e.ok = true;
  return e;
}

/// Directed long double bounds of a ball.
inline ProductEnclosure ball_enclosure(const Ball& b) {
  return {b.lower().to_long_double(MPFR_RNDD), b.upper().to_long_double(MPFR_RNDU), true};
}

}  // namespace dioph
