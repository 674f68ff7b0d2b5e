// dioph: batch front end. One subcommand per computation; results on stdout
// as CSV (default) or JSON, diagnostics on stderr.
//
// Exit codes: 0 success, 1 input error, 2 precision failure, 3 budget exceeded.

#include <CLI11.hpp>
#include <fmt/format.h>

#include <cmath>
#include <fstream>
#include <functional>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "dioph/dioph.hpp"

namespace {

using namespace dioph;
using Cell = nlohmann::ordered_json;

constexpr const char* kVersion = "0.1.0";

struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<Cell>> rows;
  nlohmann::ordered_json meta = nlohmann::ordered_json::object();
};

std::string fmt_double(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  return fmt::format("{}", x);
}

std::string cell_text(const Cell& c) {
  if (c.is_string()) return c.get<std::string>();
  if (c.is_number_float()) return fmt_double(c.get<double>());
  if (c.is_null()) return "";
  return c.dump();
}

Cell num(double x) {
  if (!std::isfinite(x)) return fmt_double(x);
  return x;
}

/// Exact rationals print as integers when they are integers, else as the
/// nearest double.
Cell rational_cell(const mpq_class& x) {
  if (x.get_den() == 1 && x.get_num().fits_slong_p()) return x.get_num().get_si();
  mpfr_t r;
  mpfr_init2(r, 53);
  mpfr_set_q(r, x.get_mpq_t(), MPFR_RNDN);
  const double v = mpfr_get_d(r, MPFR_RNDN);
  mpfr_clear(r);
  return num(v);
}

Cell real_cell(const CertifiedReal& x) {
  if (x.is_rational()) return rational_cell(x.surd().to_rational());
  return num(static_cast<double>(x.approx()));
}

double radius_of(const CertifiedReal& x) {
  if (x.is_surd()) return 0;
  return mpfr_get_d(x.ball().rad().get(), MPFR_RNDU);
}

void write_table(const Table& t, const std::string& format) {
  if (format == "json") {
    nlohmann::ordered_json out;
    out["meta"] = t.meta;
    out["rows"] = nlohmann::ordered_json::array();
    for (const auto& r : t.rows) {
      nlohmann::ordered_json obj = nlohmann::ordered_json::object();
      for (std::size_t i = 0; i < r.size(); ++i) obj[t.columns[i]] = r[i];
      out["rows"].push_back(obj);
    }
    std::cout << out.dump(2) << "\n";
    return;
  }
  std::string line;
  for (std::size_t i = 0; i < t.columns.size(); ++i) line += (i ? "," : "") + t.columns[i];
  std::cout << line << "\n";
  for (const auto& r : t.rows) {
    line.clear();
    for (std::size_t i = 0; i < r.size(); ++i) line += (i ? "," : "") + cell_text(r[i]);
    std::cout << line << "\n";
  }
}

// ---- argument helpers ----

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(Errc::invalid_argument, "cannot read '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

mpq_class parse_rational(const std::string& text, const std::string& what) {
  try {
    return detail::json_rational(Json(text), what);
  } catch (const Error&) {
    fail(Errc::invalid_argument, what + ": '" + text + "' is not a decimal or p/q");
  }
}

std::vector<long> parse_list(const std::string& text, const std::string& what) {
  std::vector<long> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      long v = std::stol(item, &used);
      if (used != item.size()) throw std::invalid_argument(item);
      out.push_back(v);
    } catch (const std::exception&) {
      fail(Errc::invalid_argument, what + ": '" + item + "' is not an integer");
    }
  }
  if (out.empty()) fail(Errc::invalid_argument, what + " is empty");
  return out;
}

/// "lo:hi" or a single integer.
std::pair<long, long> parse_range(const std::string& text) {
  auto colon = text.find(':');
  if (colon == std::string::npos) {
    long v = parse_list(text, "--range").front();
    return {v, v};
  }
  long lo = parse_list(text.substr(0, colon), "--range").front();
  long hi = parse_list(text.substr(colon + 1), "--range").front();
  if (lo > hi) fail(Errc::invalid_argument, "--range is empty");
  return {lo, hi};
}

void need(bool given, const std::string& flag) {
  if (!given) fail(Errc::invalid_argument, flag + " is required");
}

/// A subspace config ({"n","d","alpha0","A"}) or a plain matrix ({"M"}).
/// For subspaces, `which` picks A or Atilde.
Matrix<CertifiedReal> load_matrix(const std::string& path, const std::string& which) {
  Json j = parse_json_text(read_file(path));
  if (j.is_object() && j.contains("M")) {
    if (!which.empty() && which != "M") fail(Errc::invalid_argument, "--which applies to subspace configs only");
    return matrix_from_json(j);
  }
  SubspaceMatrix s = subspace_from_json(j);
  if (which.empty() || which == "A") return s.A();
  if (which == "Atilde") return s.Atilde();
  fail(Errc::invalid_argument, "--which must be A or Atilde");
}

SubspaceMatrix load_subspace(const std::string& path) { return subspace_from_json(parse_json_text(read_file(path))); }

// ---- self tests ----

struct SelfTest {
  std::string name;
  int passed = 0;
  std::vector<std::string> failures;

  void check(bool ok, const std::string& what) {
    if (ok) {
      ++passed;
    } else {
      failures.push_back(what);
    }
  }
  void expect_error(Errc code, const std::function<void()>& f, const std::string& what) {
    try {
      f();
      failures.push_back(what + " (no error)");
    } catch (const Error& e) {
      check(e.code() == code, what);
    }
  }
  int finish() const {
    for (const auto& f : failures) std::cerr << "selftest " << name << ": FAILED " << f << "\n";
    std::cout << "selftest " << name << ": " << passed << " passed, " << failures.size() << " failed\n";
    return failures.empty() ? 0 : 1;
  }
};

SubspaceMatrix sqrt2_line() {
  return SubspaceMatrix::make(2, 1, {SurdEntry{0, 0, 1, 1}}, {{SurdEntry{0, 1, 2, 1}}});
}
Matrix<CertifiedReal> single(const CertifiedReal& x) { return Matrix<CertifiedReal>::from_rows({{x}}); }
bool near(double a, double b, double tol) { return std::abs(a - b) <= tol; }

int selftest(const std::string& cmd) {
  SelfTest t;
  t.name = cmd;
  if (cmd == "fracsum") {
    t.check(near(static_cast<double>(recip_product_sum(single(Surd::sqrt_of(2)), 1).approx()), 4.8284271, 1e-6), "[sqrt2], J=1");
    t.check(near(static_cast<double>(recip_product_sum(single(Surd::sqrt_of(2)), 3).approx()), 24.7279221, 1e-6), "[sqrt2], J=3");
    t.expect_error(Errc::zero_denominator, [] { recip_product_sum(single(CertifiedReal::rational(mpq_class(1, 2))), 3); },
                   "rational row");
    t.check(binomial(5, 2) == 10, "binomial");
  } else if (cmd == "profile") {
    auto recs = phi_min_profile(single(Surd::sqrt_of(2)), 3);
    t.check(recs.size() == 2 && recs[0].norm_j == 1 && recs[1].norm_j == 2, "[sqrt2] records at 1, 2");
    t.expect_error(Errc::not_bad, [] { phi_min_profile(single(CertifiedReal::rational(mpq_class(2, 5))), 5); },
                   "rational is not bad");
    t.expect_error(Errc::invalid_argument, [] { phi_min_profile(single(Surd::sqrt_of(2)), 0); }, "J = 0");
  } else if (cmd == "omega") {
    t.expect_error(Errc::not_bad, [] { estimate_omega(single(CertifiedReal::rational(mpq_class(3, 7))), 10); },
                   "rational is not bad");
    t.expect_error(Errc::invalid_argument, [] { estimate_omega(single(Surd::sqrt_of(2)), 5); }, "J_max < 10");
    t.check(near(surd_bad_constant(2L).get_d(), 0.3004, 1e-4), "surd_bad_constant(2)");
    t.expect_error(Errc::perfect_square_radicand, [] { surd_bad_constant(4L); }, "surd_bad_constant(4)");
  } else if (cmd == "selberg-check") {
    TrigPolynomial c(Side::Plus, mpq_class(1, 4), {0.7});
    t.check(eval_poly(c, 0.3) == 0.7, "constant polynomial");
    SelbergPair p = selberg_pair(mpq_class(1, 10), 9);
    t.check(near(eval_poly(p.plus, 0.2), eval_poly(p.plus, 1.2), 1e-12), "periodicity");
    t.check(near(p.plus.coeff(0), 0.3, 1e-15) && near(p.minus.coeff(0), 0.1, 1e-15), "b0 for delta 0.1, J 9");
    t.expect_error(Errc::delta_out_of_range, [] { selberg_pair(mpq_class(3, 5), 9); }, "delta 0.6");
  } else if (cmd == "count") {
    SubspaceMatrix s = sqrt2_line();
    t.check(count_A(s, 7, mpq_class(1, 2)) == 7, "count_A(7, 0.5)");
    t.check(count_N(s, 3, mpq_class(1, 2)) == 9, "count_N(3, 0.5)");
    t.check(count_A(s, 10, mpq_class(1, 5)) == 4, "count_A(10, 0.2)");
    t.expect_error(Errc::delta_out_of_range, [&] { count_A(s, 5, mpq_class(0)); }, "delta 0");
  } else if (cmd == "sandwich") {
    SandwichResult r = sandwich_count(sqrt2_line(), 10, mpq_class(1, 5), 50, CountMode::A);
    t.check(r.upper - r.lower >= 0, "upper >= lower");
    t.check(r.lower <= 4 && 4 <= r.upper, "brackets 4");
    t.expect_error(Errc::delta_out_of_range, [] { sandwich_count(sqrt2_line(), 10, mpq_class(3, 5), 10, CountMode::A); },
                   "delta 0.6");
  } else if (cmd == "cover") {
    SubspaceMatrix zero = SubspaceMatrix::make(2, 1, {SurdEntry{0, 0, 1, 1}}, {{SurdEntry{0, 0, 1, 1}}});
    t.check(subspace_constant_C(zero) == mpq_class(10001, 10000), "C for A = 0");
    t.check(cover_cost(sqrt2_line(), ApproxFunction::table({}), 0.5, 1, 10, CoverStrategy::PerQ).partial_sum == 0,
            "psi = 0");
    t.check(nonempty_sigma_boxes(sqrt2_line(), ApproxFunction::table({0}), 1).boxes.empty(), "psi(q) = 0");
    t.check(nonempty_sigma_boxes(sqrt2_line(), ApproxFunction::table({1}), 1).saturated, "q = 1 saturated");
  } else if (cmd == "dimbound") {
    t.check(dimension_bound(mpq_class(1, 2), 2, 1) == 1, "nu = 1/n");
    t.check(dimension_bound(mpq_class(1), 2, 1) == mpq_class(1, 2), "n=2 d=1 nu=1");
    t.check(dimension_bound(mpq_class(2), 3, 2) == mpq_class(1, 3), "n=3 d=2 nu=2");
    t.expect_error(Errc::nu_too_small, [] { dimension_bound(mpq_class(1, 3), 2, 1); }, "nu < 1/n");
  }
  return t.finish();
}

// ---- subcommands ----

struct Common {
  unsigned threads = 1;
  std::string format = "csv";
  long precision_cap = 0;

  PrecisionPolicy policy() const {
    PrecisionPolicy p = PrecisionPolicy::from_environment();
    if (precision_cap > 0) {
      if (precision_cap < 64) fail(Errc::invalid_argument, "--precision-cap must be >= 64");
      p.cap_bits = precision_cap;
    }
    if (p.initial_bits > p.cap_bits) p.initial_bits = p.cap_bits;
    return p;
  }
  ScanOptions scan() const {
    ScanOptions o;
    o.threads = threads;
    o.precision = policy();
    return o;
  }
  CountOptions count() const {
    CountOptions o;
    o.threads = threads;
    o.precision = policy();
    return o;
  }
  void stamp(Table& t) const {
    t.meta["version"] = kVersion;
    t.meta["precision_bits"] = policy().initial_bits;
    t.meta["precision_cap"] = policy().cap_bits;
  }
};

struct Args {
  std::string matrix, which, psi_file, mode = "A", sizes, range, strategy = "perq", growth;
  std::string delta, nu, c = "1", eta, s, deltas, degrees;
  long J = 0, J_max = 0, q = 0, Q = 0, grid = 10000, n = 0, d = 0;
  double kappa = 4, tolerance = 1e-9;
  bool boxes = false;
  bool selftest = false;
};

CountMode parse_mode(const std::string& m) {
  if (m == "A") return CountMode::A;
  if (m == "N") return CountMode::N;
  fail(Errc::invalid_argument, "--mode must be A or N");
}

std::vector<long> size_list(const Args& a, CountMode mode) {
  if (!a.sizes.empty()) return parse_list(a.sizes, "--sizes");
  if (mode == CountMode::A) {
    need(a.q > 0, "--q");
    return {a.q};
  }
  need(a.Q > 0, "--Q");
  return {a.Q};
}

mpq_class arc_delta(const Args& a) {
  need(!a.delta.empty(), "--delta");
  mpq_class d = parse_rational(a.delta, "--delta");
  if (d <= 0 || d > mpq_class(1, 2)) fail(Errc::delta_out_of_range, "delta = " + a.delta + " is not in (0, 1/2]");
  return d;
}

Table run_fracsum(const Args& a, const Common& c) {
  need(!a.matrix.empty(), "--matrix");
  Matrix<CertifiedReal> m = load_matrix(a.matrix, a.which);
  ScanOptions opts = c.scan();
  opts.tolerance = a.tolerance;
  Table t;
  c.stamp(t);
  if (!a.growth.empty()) {
    GrowthFit f = growth_fit(m, parse_list(a.growth, "--growth"), opts);
    t.columns = {"J", "sum", "log_J", "log_sum"};
    for (std::size_t i = 0; i < f.J.size(); ++i) {
      const double s = static_cast<double>(f.sums[i].approx());
      t.rows.push_back({f.J[i], num(s), num(std::log(static_cast<double>(f.J[i]))), num(std::log(s))});
    }
    t.meta["slope"] = num(f.slope);
    t.meta["intercept"] = num(f.intercept);
    t.meta["max_abs_residual"] = num(f.max_abs_residual);
    std::cerr << "slope " << fmt_double(f.slope) << "\n";
    return t;
  }
  need(a.J > 0, "--J");
  if (a.boxes) {
    DyadicProfile p = dyadic_profile(m, a.J, opts);
    for (std::size_t u = 0; u < p.l; ++u) t.columns.push_back("k_" + std::to_string(u + 1));
    t.columns.push_back("count");
    t.columns.push_back("partial_sum");
    for (const auto& [k, b] : p.boxes) {
      std::vector<Cell> row;
      for (long v : k) row.push_back(v);
      row.push_back(b.count);
      row.push_back(real_cell(b.partial_sum));
      t.rows.push_back(std::move(row));
    }
    t.meta["J"] = a.J;
    t.meta["phi_min_J"] = real_cell(p.phi_min_J.value);
    t.meta["phi_min_2J"] = real_cell(p.phi_min_2J.value);
    t.meta["excluded"] = p.excluded;
    return t;
  }
  CertifiedReal sum = recip_product_sum(m, a.J, opts);
  t.columns = {"J", "sum", "radius"};
  t.rows.push_back({a.J, real_cell(sum), num(radius_of(sum))});
  return t;
}

Table run_profile(const Args& a, const Common& c) {
  need(!a.matrix.empty(), "--matrix");
  need(a.J > 0, "--J");
  Matrix<CertifiedReal> m = load_matrix(a.matrix, a.which);
  auto recs = phi_min_profile(m, a.J, c.scan());
  Table t;
  c.stamp(t);
  t.columns.push_back("norm_j");
  for (std::size_t i = 0; i < m.cols(); ++i) t.columns.push_back("j_" + std::to_string(i + 1));
  t.columns.push_back("value");
  t.columns.push_back("log_ratio");
  for (const auto& r : recs) {
    std::vector<Cell> row{r.norm_j};
    for (long v : r.j) row.push_back(v);
    row.push_back(real_cell(r.value));
    const double lr = r.log_ratio();
    row.push_back(std::isnan(lr) ? Cell("") : num(lr));
    t.rows.push_back(std::move(row));
  }
  return t;
}

Table run_omega(const Args& a, const Common& c) {
  need(!a.matrix.empty(), "--matrix");
  need(a.J_max > 0, "--J-max");
  OmegaEstimate e = estimate_omega(load_matrix(a.matrix, a.which), a.J_max, c.scan());
  Table t;
  c.stamp(t);
  t.columns = {"J_max", "omega_hat", "intercept", "records_used", "max_abs_residual"};
  t.rows.push_back({a.J_max, num(e.omega_hat), num(e.intercept), e.records_used, num(e.max_abs_residual)});
  return t;
}

Table run_selberg_check(const Args& a, const Common& c) {
  std::vector<mpq_class> deltas;
  if (!a.deltas.empty()) {
    std::stringstream ss(a.deltas);
    std::string item;
    while (std::getline(ss, item, ',')) deltas.push_back(parse_rational(item, "--deltas"));
  } else {
    deltas.push_back(arc_delta(a));
  }
  if (a.grid < 10) fail(Errc::invalid_argument, "--grid must be >= 10");
  Table t;
  c.stamp(t);
  t.meta["kappa"] = num(a.kappa);
  t.columns = {"delta", "J", "b0_plus", "b0_minus", "max_coeff_excess", "sandwich_pass", "worst_violation", "vacuous"};
  for (const mpq_class& delta : deltas) {
    std::vector<long> degrees;
    if (!a.degrees.empty()) {
      degrees = parse_list(a.degrees, "--J-list");
    } else if (a.J > 0) {
      degrees = {a.J};
    } else {
      degrees = {static_cast<long>(std::ceil(a.kappa / delta.get_d()))};
    }
    for (long J : degrees) {
      SelbergPair p = selberg_pair(delta, J);
      // largest |b_n| - (1/(J+1) + min(2 delta, 1/(pi n))), and the b0 errors
      double excess = std::max(std::abs(p.plus.coeff(0) - (2 * delta.get_d() + 1.0 / (J + 1))),
                               std::abs(p.minus.coeff(0) - (2 * delta.get_d() - 1.0 / (J + 1))));
      for (long n = 1; n <= J; ++n) {
        const double bound = 1.0 / (J + 1) + std::min(2 * delta.get_d(), 1 / (std::numbers::pi * n));
        excess = std::max({excess, std::abs(p.plus.coeff(n)) - bound, std::abs(p.minus.coeff(n)) - bound});
      }
      SandwichCheck chk = verify_sandwich(p, a.grid);
      t.rows.push_back({rational_cell(delta), J, num(p.plus.coeff(0)), num(p.minus.coeff(0)), num(std::max(excess, 0.0)),
                        chk.pass, num(chk.worst_violation), p.minus.vacuous()});
    }
  }
  return t;
}

Table run_count(const Args& a, const Common& c) {
  need(!a.matrix.empty(), "--matrix");
  const CountMode mode = parse_mode(a.mode);
  const std::vector<long> sizes = size_list(a, mode);
  const mpq_class delta = arc_delta(a);
  SubspaceMatrix s = load_subspace(a.matrix);
  DiscrepancySummary sum = discrepancy_report(s, sizes, delta, mode, c.count());
  Table t;
  c.stamp(t);
  t.columns = {"mode", "size", "delta", "exact", "main", "discrepancy", "normalized"};
  for (const auto& r : sum.reports) {
    t.rows.push_back({mode_name(r.mode), r.size, rational_cell(r.delta), r.exact, rational_cell(r.main_term),
                      rational_cell(r.discrepancy), rational_cell(r.normalized)});
  }
  t.meta["max_normalized"] = rational_cell(sum.max_normalized);
  return t;
}

Table run_sandwich(const Args& a, const Common& c) {
  need(!a.matrix.empty(), "--matrix");
  const CountMode mode = parse_mode(a.mode);
  const std::vector<long> sizes = size_list(a, mode);
  const mpq_class delta = arc_delta(a);
  if (!(a.kappa > 0)) fail(Errc::invalid_argument, "--kappa must be positive");
  const long J = a.J > 0 ? a.J : static_cast<long>(std::ceil(a.kappa / delta.get_d()));
  SubspaceMatrix s = load_subspace(a.matrix);
  const CountOptions opts = c.count();
  Table t;
  c.stamp(t);
  t.meta["kappa"] = num(a.kappa);
  t.meta["mode"] = mode_name(mode);
  t.columns = {"q_or_Q", "delta", "J", "lower", "exact", "upper", "analytic_upper"};
  bool vacuous = false;
  for (long size : sizes) {
    SandwichResult r = sandwich_count(s, size, delta, J, mode, opts);
    const long exact = mode == CountMode::A ? count_A(s, size, delta, opts) : count_N(s, size, delta, opts);
    vacuous = vacuous || r.vacuous;
    t.rows.push_back({size, rational_cell(delta), J, num(r.lower), exact, num(r.upper), num(r.analytic_upper)});
  }
  t.meta["vacuous_minorant"] = vacuous;
  if (vacuous) std::cerr << "warning: 2 delta <= 1/(J+1), the minorant is vacuous\n";
  return t;
}

ApproxFunction psi_from_args(const Args& a) {
  if (!a.psi_file.empty()) return parse_psi(read_file(a.psi_file));
  need(!a.nu.empty(), "--psi or --nu");
  ApproxFunction f = ApproxFunction::power_law(parse_rational(a.nu, "--nu"), parse_rational(a.c, "--c"));
  if (!a.eta.empty()) f = ApproxFunction::truncated_max(f, parse_rational(a.eta, "--eta"));
  return f;
}

Table run_cover(const Args& a, const Common& c) {
  need(!a.matrix.empty(), "--matrix");
  need(!a.s.empty(), "--s");
  need(!a.range.empty(), "--range");
  CoverStrategy strat;
  if (a.strategy == "perq") {
    strat = CoverStrategy::PerQ;
  } else if (a.strategy == "dyadic") {
    strat = CoverStrategy::Dyadic;
  } else {
    fail(Errc::invalid_argument, "--strategy must be perq or dyadic");
  }
  const auto [lo, hi] = parse_range(a.range);
  const double s_exp = parse_rational(a.s, "--s").get_d();
  ApproxFunction psi = psi_from_args(a);
  SubspaceMatrix sub = load_subspace(a.matrix);
  CoverCost cc = cover_cost(sub, psi, s_exp, lo, hi, strat, c.count());
  Table t;
  c.stamp(t);
  t.meta["C"] = rational_cell(cc.C);
  t.meta["strategy"] = strategy_name(strat);
  t.meta["partial_sum"] = num(cc.partial_sum);
  t.meta["q0"] = cc.q0 ? Cell(*cc.q0) : Cell(nullptr);
  t.columns = {"q_or_k", "delta_used", "boxes", "side", "term", "cumulative"};
  for (const auto& term : cc.terms) {
    t.rows.push_back({term.index, num(term.delta_used), term.boxes, num(term.side), num(term.term), num(term.cumulative)});
  }
  return t;
}

Table run_dimbound(const Args& a, const Common& c) {
  need(!a.nu.empty(), "--nu");
  need(a.n > 0 && a.d > 0, "--n and --d");
  const mpq_class nu = parse_rational(a.nu, "--nu");
  const mpq_class b = dimension_bound(nu, static_cast<int>(a.n), static_cast<int>(a.d));
  Table t;
  c.stamp(t);
  t.columns = {"nu", "n", "d", "bound"};
  t.rows.push_back({rational_cell(nu), a.n, a.d, rational_cell(b)});
  t.meta["bound_exact"] = b.get_str();
  return t;
}

int exit_code(const Error& e) {
  if (e.code() == Errc::precision_insufficient) return 2;
  if (e.code() == Errc::budget_exceeded) return 3;
  return 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Diophantine approximation on affine subspaces: sums, profiles, counts, covers"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);
  app.fallthrough();  // global options may follow the subcommand
  Common common;
  Args args;
  app.add_option("--threads", common.threads, "worker threads (results do not depend on it)")->check(CLI::Range(1, 1024));
  app.add_option("--format", common.format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
  app.add_option("--precision-cap", common.precision_cap, "maximum working precision in bits (overrides DIOPH_PRECISION_CAP)");

  auto matrix_opts = [&](CLI::App* sub) {
    sub->add_option("--matrix", args.matrix, "subspace or matrix config (JSON)");
    sub->add_option("--which", args.which, "for subspace configs: A or Atilde");
  };
  auto selftest_flag = [&](CLI::App* sub) { sub->add_flag("--selftest", args.selftest, "run the built-in examples"); };

  CLI::App* fracsum = app.add_subcommand("fracsum", "sum of prod_u ||j . row_u||^-1 over 0 < |j| <= J");
  matrix_opts(fracsum);
  fracsum->add_option("--J", args.J, "bound on |j|_inf");
  fracsum->add_option("--tolerance", args.tolerance, "required certified radius");
  fracsum->add_flag("--boxes", args.boxes, "emit the dyadic box profile instead");
  fracsum->add_option("--growth", args.growth, "comma-separated J values: fit log sum against log J");

  CLI::App* profile = app.add_subcommand("profile", "record minima of prod_u ||j . row_u||");
  matrix_opts(profile);
  profile->add_option("--J", args.J, "bound on |j|_inf");

  CLI::App* omega = app.add_subcommand("omega", "heuristic estimate of the multiplicative exponent");
  matrix_opts(omega);
  omega->add_option("--J-max", args.J_max, "scan bound (>= 10)");

  CLI::App* selberg = app.add_subcommand("selberg-check", "coefficient invariants and sandwich check of the Selberg pair");
  selberg->add_option("--delta", args.delta, "arc half-length in (0, 1/2]");
  selberg->add_option("--deltas", args.deltas, "comma-separated list of deltas");
  selberg->add_option("--J", args.J, "degree");
  selberg->add_option("--J-list", args.degrees, "comma-separated degrees");
  selberg->add_option("--kappa", args.kappa, "J = ceil(kappa/delta) when no degree is given");
  selberg->add_option("--grid", args.grid, "grid points for the sandwich check");

  CLI::App* count = app.add_subcommand("count", "exact counts A(q, delta) or N(Q, delta) with discrepancy");
  CLI::App* sandwich = app.add_subcommand("sandwich", "Selberg lower/upper bounds around the exact count");
  for (CLI::App* sub : {count, sandwich}) {
    sub->add_option("--matrix", args.matrix, "subspace config (JSON)");
    sub->add_option("--mode", args.mode, "A (fixed q) or N (all |at| <= Q)");
    sub->add_option("--q", args.q, "q for mode A");
    sub->add_option("--Q", args.Q, "Q for mode N");
    sub->add_option("--sizes", args.sizes, "comma-separated q (or Q) values");
    sub->add_option("--delta", args.delta, "threshold in (0, 1/2]");
  }
  sandwich->add_option("--J", args.J, "degree of the Selberg pair");
  sandwich->add_option("--kappa", args.kappa, "J = ceil(kappa/delta) when --J is absent (default 4)");

  CLI::App* cover = app.add_subcommand("cover", "Hausdorff s-cost partial sums of the sigma-box covers");
  cover->add_option("--matrix", args.matrix, "subspace config (JSON)");
  cover->add_option("--psi", args.psi_file, "psi config (JSON)");
  cover->add_option("--nu", args.nu, "psi(q) = c q^-nu");
  cover->add_option("--c", args.c, "scale of the power law");
  cover->add_option("--eta", args.eta, "use max(psi(q), q^-eta)");
  cover->add_option("--s", args.s, "exponent s in (0, d]");
  cover->add_option("--range", args.range, "q range lo:hi (perq) or k range (dyadic)");
  cover->add_option("--strategy", args.strategy, "perq or dyadic");

  CLI::App* dimbound = app.add_subcommand("dimbound", "dimension bound for q^-nu approximable points");
  dimbound->add_option("--nu", args.nu, "exponent nu >= 1/n");
  dimbound->add_option("--n", args.n, "ambient dimension");
  dimbound->add_option("--d", args.d, "subspace dimension");

  for (CLI::App* sub : {fracsum, profile, omega, selberg, count, sandwich, cover, dimbound}) selftest_flag(sub);

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  CLI::App* chosen = app.get_subcommands().front();
  const std::string name = chosen->get_name();
  try {
    if (args.selftest) return selftest(name);
    Table t;
    if (name == "fracsum") t = run_fracsum(args, common);
    else if (name == "profile") t = run_profile(args, common);
    else if (name == "omega") t = run_omega(args, common);
    else if (name == "selberg-check") t = run_selberg_check(args, common);
    else if (name == "count") t = run_count(args, common);
    else if (name == "sandwich") t = run_sandwich(args, common);
    else if (name == "cover") t = run_cover(args, common);
    else t = run_dimbound(args, common);
    write_table(t, common.format);
    return 0;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_code(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
