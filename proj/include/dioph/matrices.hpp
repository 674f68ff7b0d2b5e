#pragma once

// Subspace data (alpha0, A, Atilde), approximation functions psi, and the
// JSON config formats that carry them.

#include <gmpxx.h>

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <json.hpp>

#include "dioph/error.hpp"
#include "dioph/matrix.hpp"
#include "dioph/numerics.hpp"

namespace dioph {

using Json = nlohmann::json;

/// Source form of a matrix entry, kept so configs serialize back exactly.
struct SurdEntry {
  mpz_class p, q, d, r;
};
struct DecEntry {
  std::string text;
  long bits = 128;
};
using EntrySpec = std::variant<SurdEntry, DecEntry>;

namespace detail {

inline mpz_class json_integer(const Json& v, std::string_view what) {
  if (v.is_number_integer()) return mpz_class(std::to_string(v.get<long long>()), 10);
  if (v.is_number_unsigned()) return mpz_class(std::to_string(v.get<unsigned long long>()), 10);
  if (v.is_string()) {
    mpz_class z;
    if (z.set_str(v.get<std::string>(), 10) != 0) {
      fail(Errc::malformed_entry, std::string(what) + ": not an integer: " + v.dump());
    }
    return z;
  }
  fail(Errc::malformed_entry, std::string(what) + ": expected an integer, got " + v.dump());
}

inline Json integer_json(const mpz_class& z) {
  if (z.fits_slong_p()) return Json(z.get_si());
  return Json(z.get_str());
}

/// Exact rational from a JSON number (via its shortest decimal form) or a
/// string holding a decimal or "p/q".
inline mpq_class json_rational(const Json& v, std::string_view what) {
  std::string text;
  if (v.is_number()) {
    text = v.dump();
  } else if (v.is_string()) {
    text = v.get<std::string>();
  } else {
    fail(Errc::malformed_entry, std::string(what) + ": expected a number, got " + v.dump());
  }
  auto slash = text.find('/');
  if (slash != std::string::npos) {
    mpz_class num, den;
    if (num.set_str(text.substr(0, slash), 10) != 0 || den.set_str(text.substr(slash + 1), 10) != 0 || den == 0) {
      fail(Errc::malformed_entry, std::string(what) + ": bad fraction '" + text + "'");
    }
    mpq_class x(num, den);
    x.canonicalize();
    return x;
  }
  return Ball::decimal_to_rational(text);
}

}  // namespace detail

inline EntrySpec canonical_entry(const EntrySpec& e) {
  if (const auto* s = std::get_if<SurdEntry>(&e)) {
    Surd c = Surd::make(s->p, s->q, s->d, s->r);
    return SurdEntry{c.p(), c.q(), c.d(), c.r()};
  }
  return e;
}

inline CertifiedReal make_entry(const EntrySpec& e) {
  if (const auto* s = std::get_if<SurdEntry>(&e)) return Surd::make(s->p, s->q, s->d, s->r);
  const auto& dec = std::get<DecEntry>(e);
  return Ball::from_decimal(dec.text, dec.bits);
}

inline EntrySpec parse_entry(const Json& v) {
  if (!v.is_object()) fail(Errc::malformed_entry, "entry must be an object: " + v.dump());
  if (v.contains("surd")) {
    const Json& a = v.at("surd");
    if (!a.is_array() || a.size() != 4) fail(Errc::malformed_entry, "surd entry needs [p,q,d,r]: " + v.dump());
    SurdEntry s{detail::json_integer(a[0], "p"), detail::json_integer(a[1], "q"),
                detail::json_integer(a[2], "d"), detail::json_integer(a[3], "r")};
    if (s.r == 0) fail(Errc::malformed_entry, "surd entry has r = 0: " + v.dump());
    if (s.d < 0) fail(Errc::malformed_entry, "surd entry has negative radicand: " + v.dump());
    if (s.q != 0 && mpz_perfect_square_p(s.d.get_mpz_t())) {
      fail(Errc::perfect_square_radicand, "radicand " + s.d.get_str() + " is a perfect square; write the rational directly");
    }
    return canonical_entry(s);
  }
  if (v.contains("dec")) {
    if (!v.at("dec").is_string()) fail(Errc::malformed_entry, "dec entry must be a string: " + v.dump());
    DecEntry d{v.at("dec").get<std::string>(), 128};
    if (v.contains("bits")) {
      if (!v.at("bits").is_number_integer() || v.at("bits").get<long>() < 2) {
        fail(Errc::malformed_entry, "bits must be an integer >= 2: " + v.dump());
      }
      d.bits = v.at("bits").get<long>();
    }
    Ball::decimal_to_rational(d.text);  // validates
    return d;
  }
  fail(Errc::malformed_entry, "entry needs a \"surd\" or \"dec\" key: " + v.dump());
}

inline Json entry_json(const EntrySpec& e) {
  if (const auto* s = std::get_if<SurdEntry>(&e)) {
    return Json{{"surd", Json::array({detail::integer_json(s->p), detail::integer_json(s->q),
                                      detail::integer_json(s->d), detail::integer_json(s->r)})}};
  }
  const auto& d = std::get<DecEntry>(e);
  return Json{{"dec", d.text}, {"bits", d.bits}};
}

/// The affine subspace {(x, (1, x) . Atilde)}: n ambient dimensions, d free
/// coordinates, Atilde = (alpha0 ; A) of shape (d + 1) x (n - d).
class SubspaceMatrix {
 public:
  static SubspaceMatrix make(int n, int d, std::vector<EntrySpec> alpha0,
                             const std::vector<std::vector<EntrySpec>>& a_rows) {
    if (d < 1 || d > n - 1) {
      fail(Errc::dimension_mismatch, "need 1 <= d <= n - 1, got n=" + std::to_string(n) + " d=" + std::to_string(d));
    }
    const auto m = static_cast<std::size_t>(n - d);
    if (alpha0.size() != m) {
      fail(Errc::dimension_mismatch, "alpha0 has " + std::to_string(alpha0.size()) + " entries, expected " + std::to_string(m));
    }
    if (a_rows.size() != static_cast<std::size_t>(d)) {
      fail(Errc::dimension_mismatch, "A has " + std::to_string(a_rows.size()) + " rows, expected " + std::to_string(d));
    }
    for (const auto& r : a_rows) {
      if (r.size() != m) fail(Errc::dimension_mismatch, "A row has " + std::to_string(r.size()) + " entries, expected " + std::to_string(m));
    }
    SubspaceMatrix s;
    s.n_ = n;
    s.d_ = d;
    for (auto& e : alpha0) e = canonical_entry(e);
    s.alpha0_spec_ = std::move(alpha0);
    std::vector<std::vector<EntrySpec>> rows = a_rows;
    for (auto& r : rows)
      for (auto& e : r) e = canonical_entry(e);
    s.a_spec_ = Matrix<EntrySpec>::from_rows(rows);
    s.a_ = s.a_spec_.map([](const EntrySpec& e) { return make_entry(e); });
    for (const auto& e : s.alpha0_spec_) s.alpha0_.push_back(make_entry(e));
    s.atilde_ = s.a_.stacked_under(s.alpha0_);
    return s;
  }

  int n() const { return n_; }
  int d() const { return d_; }
  int codim() const { return n_ - d_; }
  const Matrix<CertifiedReal>& A() const { return a_; }
  const std::vector<CertifiedReal>& alpha0() const { return alpha0_; }
  const Matrix<CertifiedReal>& Atilde() const { return atilde_; }
  const Matrix<EntrySpec>& A_spec() const { return a_spec_; }
  const std::vector<EntrySpec>& alpha0_spec() const { return alpha0_spec_; }

 private:
  int n_ = 0;
  int d_ = 0;
  Matrix<EntrySpec> a_spec_;
  std::vector<EntrySpec> alpha0_spec_;
  Matrix<CertifiedReal> a_;
  std::vector<CertifiedReal> alpha0_;
  Matrix<CertifiedReal> atilde_;
};

inline Json parse_json_text(std::string_view text) {
  try {
    return Json::parse(text);
  } catch (const Json::exception& e) {
    fail(Errc::malformed_entry, std::string("invalid JSON: ") + e.what());
  }
}

inline SubspaceMatrix subspace_from_json(const Json& j) {
  if (!j.is_object()) fail(Errc::malformed_entry, "subspace config must be an object");
  for (const char* key : {"n", "d", "alpha0", "A"}) {
    if (!j.contains(key)) fail(Errc::malformed_entry, std::string("subspace config lacks \"") + key + "\"");
  }
  if (!j.at("n").is_number_integer() || !j.at("d").is_number_integer()) {
    fail(Errc::malformed_entry, "n and d must be integers");
  }
  int n = j.at("n").get<int>();
  int d = j.at("d").get<int>();
  if (d < 1 || d > n - 1) {
    fail(Errc::dimension_mismatch, "need 1 <= d <= n - 1, got n=" + std::to_string(n) + " d=" + std::to_string(d));
  }
  if (!j.at("alpha0").is_array() || !j.at("A").is_array()) fail(Errc::malformed_entry, "alpha0 and A must be arrays");
  std::vector<EntrySpec> alpha0;
  for (const auto& e : j.at("alpha0")) alpha0.push_back(parse_entry(e));
  std::vector<std::vector<EntrySpec>> rows;
  for (const auto& r : j.at("A")) {
    if (!r.is_array()) fail(Errc::malformed_entry, "A must be an array of arrays");
    std::vector<EntrySpec> row;
    for (const auto& e : r) row.push_back(parse_entry(e));
    rows.push_back(std::move(row));
  }
  return SubspaceMatrix::make(n, d, std::move(alpha0), rows);
}

/// Parses the subspace config: {"n", "d", "alpha0": [entry...], "A": [[entry...]...]}.
inline SubspaceMatrix parse_subspace(std::string_view config_text) {
  return subspace_from_json(parse_json_text(config_text));
}

inline std::string serialize_subspace(const SubspaceMatrix& s) {
  Json j;
  j["n"] = s.n();
  j["d"] = s.d();
  Json alpha0 = Json::array();
  for (const auto& e : s.alpha0_spec()) alpha0.push_back(entry_json(e));
  j["alpha0"] = alpha0;
  Json a = Json::array();
  for (std::size_t r = 0; r < s.A_spec().rows(); ++r) {
    Json row = Json::array();
    for (const auto& e : s.A_spec().row(r)) row.push_back(entry_json(e));
    a.push_back(row);
  }
  j["A"] = a;
  return j.dump(2);
}

/// A plain l x m matrix config: {"M": [[entry...]...]}.
inline Matrix<CertifiedReal> matrix_from_json(const Json& j) {
  if (!j.is_object() || !j.contains("M") || !j.at("M").is_array() || j.at("M").empty()) {
    fail(Errc::malformed_entry, "matrix config needs a non-empty \"M\" array of rows");
  }
  std::vector<std::vector<CertifiedReal>> rows;
  for (const auto& r : j.at("M")) {
    if (!r.is_array() || r.empty()) fail(Errc::malformed_entry, "matrix rows must be non-empty arrays");
    std::vector<CertifiedReal> row;
    for (const auto& e : r) row.push_back(make_entry(parse_entry(e)));
    if (!rows.empty() && row.size() != rows.front().size()) fail(Errc::dimension_mismatch, "ragged matrix rows");
    rows.push_back(std::move(row));
  }
  return Matrix<CertifiedReal>::from_rows(rows);
}

inline Matrix<CertifiedReal> negate_rows(const Matrix<CertifiedReal>& m, std::span<const int> signs) {
  Matrix<CertifiedReal> out = m;
  for (std::size_t r = 0; r < m.rows(); ++r)
    if (signs[r] < 0)
      for (std::size_t c = 0; c < m.cols(); ++c) out(r, c) = -m(r, c);
  return out;
}

/// sum_i coeffs[i] * xs[i]; exact while all terms share a quadratic field,
/// otherwise an enclosure at `bits`.
inline CertifiedReal linear_form(std::span<const CertifiedReal> xs, std::span<const long> coeffs, long bits) {
  CertifiedReal acc = CertifiedReal::integer(0L);
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (coeffs[i] == 0) continue;
    acc = add(acc, xs[i] * mpz_class(coeffs[i]), bits);
  }
  return acc;
}

/// prod_u || j . row_u(M) ||.
inline CertifiedReal product_dist(const Matrix<CertifiedReal>& m, std::span<const long> j,
                                  const PrecisionPolicy& policy = {}) {
  if (j.size() != m.cols()) fail(Errc::dimension_mismatch, "j has the wrong length");
  bool nonzero = false;
  for (long v : j) nonzero = nonzero || v != 0;
  if (!nonzero) fail(Errc::zero_vector_j, "j = 0");
  return with_precision_retry(policy, [&](long bits) {
    CertifiedReal prod = CertifiedReal::integer(1L);
    for (std::size_t u = 0; u < m.rows(); ++u) {
      CertifiedReal dist = dist_nearest(linear_form(m.row(u), j, bits));
      if (dist.is_surd() && dist.surd().is_zero()) return CertifiedReal::integer(0L);
      prod = mul(prod, dist, bits);
    }
    return prod;
  });
}

/// psi : N -> R_{>=0}.
class ApproxFunction {
 public:
  struct PowerLaw {
    mpq_class nu;
    mpq_class c;
  };
  struct Table {
    std::vector<mpq_class> values;
  };
  struct TruncatedMax {
    std::shared_ptr<const ApproxFunction> inner;
    mpq_class eta;
  };

  /// psi(q) = c q^-nu.
  static ApproxFunction power_law(const mpq_class& nu, const mpq_class& c = 1) {
    if (nu <= 0 || c <= 0) fail(Errc::invalid_argument, "power law needs nu > 0 and c > 0");
    ApproxFunction f;
    f.kind_ = PowerLaw{nu, c};
    f.monotone_ = true;
    return f;
  }

  /// Explicit values psi(1), psi(2), ...; zero beyond the table.
  static ApproxFunction table(std::vector<mpq_class> values, bool monotone_nonincreasing = false) {
    for (const auto& v : values)
      if (v < 0) fail(Errc::invalid_argument, "psi values must be nonnegative");
    ApproxFunction f;
    f.kind_ = Table{std::move(values)};
    f.monotone_ = monotone_nonincreasing;
    return f;
  }

  /// max(psi(q), q^-eta).
  static ApproxFunction truncated_max(const ApproxFunction& inner, const mpq_class& eta) {
    if (eta <= 0) fail(Errc::invalid_argument, "eta must be positive");
    ApproxFunction f;
    f.kind_ = TruncatedMax{std::make_shared<const ApproxFunction>(inner), eta};
    f.monotone_ = inner.monotone_;
    return f;
  }

  bool monotone_nonincreasing() const { return monotone_; }
  const auto& kind() const { return kind_; }

  /// psi(q), exact whenever the kind permits (rational nu with denominator 1
  /// or 2 and rational c, or table entries), otherwise an enclosure at bits.
  CertifiedReal operator()(long q, long bits = kDefaultBits) const {
    if (q < 1) fail(Errc::invalid_argument, "psi is defined for q >= 1");
    if (const auto* p = std::get_if<PowerLaw>(&kind_)) return power_value(p->nu, p->c, q, bits);
    if (const auto* t = std::get_if<Table>(&kind_)) {
      auto at = [&](long k) -> mpq_class {
        return static_cast<std::size_t>(k) <= t->values.size() ? t->values[static_cast<std::size_t>(k - 1)] : mpq_class(0);
      };
      mpq_class v = at(q);
      if (monotone_ && q >= 2 && at(q - 1) < v) {
        fail(Errc::monotonicity_violation, "psi(" + std::to_string(q) + ") > psi(" + std::to_string(q - 1) + ")");
      }
      return CertifiedReal::rational(v);
    }
    const auto& m = std::get<TruncatedMax>(kind_);
    CertifiedReal a = (*m.inner)(q, bits);
    CertifiedReal b = power_value(m.eta, 1, q, bits);
    return cmp_margin(a, b, {bits, std::max(bits, 4096L)}) == Ordering::Less ? b : a;
  }

 private:
  static CertifiedReal power_value(const mpq_class& nu, const mpq_class& c, long q, long bits) {
    mpz_class qz(q);
    if (q == 1) return CertifiedReal::rational(c);
    if (nu.get_den() == 1 && nu.get_num().fits_ulong_p()) {
      mpz_class pw;
      mpz_pow_ui(pw.get_mpz_t(), qz.get_mpz_t(), nu.get_num().get_ui());
      mpq_class v = c / mpq_class(pw);
      v.canonicalize();
      return CertifiedReal::rational(v);
    }
    if (nu.get_den() == 2 && nu.get_num().fits_ulong_p()) {
      // q^-(k + 1/2) = sqrt(q) / q^(k+1)
      unsigned long k = (nu.get_num().get_ui() - 1) / 2;
      mpz_class pw;
      mpz_pow_ui(pw.get_mpz_t(), qz.get_mpz_t(), k + 1);
      return Surd::make(0, c.get_num(), qz, c.get_den() * pw);
    }
    // q^-nu is decreasing in nu: bracket the exponent, then round outward.
    const auto prec = static_cast<mpfr_prec_t>(bits + 16);
    BigFloat nu_lo(prec), nu_hi(prec), lo(prec), hi(prec), base(prec);
    mpfr_set_q(nu_lo.get(), nu.get_mpq_t(), MPFR_RNDD);
    mpfr_set_q(nu_hi.get(), nu.get_mpq_t(), MPFR_RNDU);
    mpfr_neg(nu_lo.get(), nu_lo.get(), MPFR_RNDN);
    mpfr_neg(nu_hi.get(), nu_hi.get(), MPFR_RNDN);
    mpfr_set_si(base.get(), q, MPFR_RNDN);
    mpfr_pow(lo.get(), base.get(), nu_hi.get(), MPFR_RNDD);
    mpfr_pow(hi.get(), base.get(), nu_lo.get(), MPFR_RNDU);
    BigFloat mid(prec), rad(Ball::kRadiusBits);
    mpfr_add(mid.get(), lo.get(), hi.get(), MPFR_RNDN);
    mpfr_div_2ui(mid.get(), mid.get(), 1, MPFR_RNDN);
    BigFloat w(prec);
    mpfr_sub(w.get(), hi.get(), lo.get(), MPFR_RNDU);
    mpfr_set(rad.get(), w.get(), MPFR_RNDU);  // covers the midpoint rounding too
    Ball pw(std::move(mid), std::move(rad));
    return mul(CertifiedReal(pw), CertifiedReal::rational(c), bits);
  }

  std::variant<PowerLaw, Table, TruncatedMax> kind_;
  bool monotone_ = false;
};

inline CertifiedReal psi_eval(const ApproxFunction& psi, long q, long bits = kDefaultBits) {
  return psi(q, bits);
}

/// psi config: {"kind":"power","nu":..,"c":..} | {"kind":"table","values":[..],
/// "monotone":bool} | {"kind":"truncated","inner":{..},"eta":..}.
inline ApproxFunction psi_from_json(const Json& j) {
  if (!j.is_object() || !j.contains("kind") || !j.at("kind").is_string()) {
    fail(Errc::malformed_entry, "psi config needs a \"kind\"");
  }
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "power") {
    if (!j.contains("nu")) fail(Errc::malformed_entry, "power psi needs \"nu\"");
    mpq_class c = j.contains("c") ? detail::json_rational(j.at("c"), "c") : mpq_class(1);
    return ApproxFunction::power_law(detail::json_rational(j.at("nu"), "nu"), c);
  }
  if (kind == "table") {
    if (!j.contains("values") || !j.at("values").is_array()) fail(Errc::malformed_entry, "table psi needs \"values\"");
    std::vector<mpq_class> values;
    for (const auto& v : j.at("values")) values.push_back(detail::json_rational(v, "value"));
    bool mono = j.contains("monotone") && j.at("monotone").is_boolean() && j.at("monotone").get<bool>();
    return ApproxFunction::table(std::move(values), mono);
  }
  if (kind == "truncated") {
    if (!j.contains("inner") || !j.contains("eta")) fail(Errc::malformed_entry, "truncated psi needs \"inner\" and \"eta\"");
    return ApproxFunction::truncated_max(psi_from_json(j.at("inner")), detail::json_rational(j.at("eta"), "eta"));
  }
  fail(Errc::malformed_entry, "unknown psi kind '" + kind + "'");
}

inline ApproxFunction parse_psi(std::string_view text) { return psi_from_json(parse_json_text(text)); }

}  // namespace dioph
