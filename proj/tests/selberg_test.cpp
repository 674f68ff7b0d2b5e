#include <gtest/gtest.h>

#include <cmath>
#include <complex>
#include <numbers>
#include <random>

#include "dioph/selberg.hpp"
#include "oracles.hpp"

namespace dioph {
namespace {

using namespace oracle;

SubspaceMatrix line_sqrt2() { return SubspaceMatrix::make(2, 1, {integer(0)}, {{surd(0, 1, 2)}}); }

const mpq_class kDeltas[] = {mpq_class(1, 100), mpq_class(1, 10), mpq_class(1, 4), mpq_class(1, 2)};
const long kDegrees[] = {1, 9, 99};

TEST(SelbergPair, Examples) {
  SelbergPair p = selberg_pair(mpq_class(1, 10), 9);
  EXPECT_NEAR(p.plus.coeff(0), 0.3, 1e-15);
  EXPECT_NEAR(p.minus.coeff(0), 0.1, 1e-15);
  EXPECT_FALSE(p.minus.vacuous());
  SelbergPair q = selberg_pair(mpq_class(1, 4), 3);
  EXPECT_NEAR(q.plus.coeff(0), 0.75, 1e-15);
  EXPECT_LE(std::abs(q.plus.coeff(1)), 0.25 + 1 / std::numbers::pi);
  for (mpq_class bad : {mpq_class(3, 5), mpq_class(0), mpq_class(-1, 10)}) {
    try {
      selberg_pair(bad, 9);
      FAIL();
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), Errc::delta_out_of_range);
    }
  }
  EXPECT_THROW(selberg_pair(mpq_class(1, 10), 0), Error);
  // 2 delta <= 1/(J+1): the minorant is flagged
  EXPECT_TRUE(selberg_pair(mpq_class(1, 100), 9).minus.vacuous());
}

TEST(SelbergPair, CoefficientInvariants) {
  for (const mpq_class& delta : kDeltas) {
    for (long J : kDegrees) {
      SelbergPair p = selberg_pair(delta, J);
      const double d = delta.get_d(), K = static_cast<double>(J + 1);
      EXPECT_EQ(p.plus.degree(), J);
      EXPECT_NEAR(p.plus.coeff(0), 2 * d + 1 / K, 1e-12);
      EXPECT_NEAR(p.minus.coeff(0), 2 * d - 1 / K, 1e-12);
      for (long n = 1; n <= J; ++n) {
        const double bound = 1 / K + std::min(2 * d, 1 / (std::numbers::pi * static_cast<double>(n)));
        for (const TrigPolynomial* t : {&p.plus, &p.minus}) {
          EXPECT_LE(std::abs(t->coeff(n)), bound + 1e-12) << delta << " " << J << " " << n;
          EXPECT_EQ(t->coeff(n), t->coeff(-n));
        }
      }
      EXPECT_EQ(p.plus.coeff(J + 1), 0.0);
    }
  }
}

TEST(SelbergPair, SandwichOnGrid) {
  for (const mpq_class& delta : kDeltas) {
    for (long J : kDegrees) {
      SandwichCheck c = verify_sandwich(selberg_pair(delta, J), 10000);
      EXPECT_TRUE(c.pass) << delta << " " << J << " worst " << c.worst_violation;
    }
  }
  EXPECT_TRUE(verify_sandwich(selberg_pair(mpq_class(1, 10), 9), 10000).pass);
  EXPECT_TRUE(verify_sandwich(selberg_pair(mpq_class(1, 2), 9), 1000).pass);
  EXPECT_THROW(verify_sandwich(selberg_pair(mpq_class(1, 2), 9), 5), Error);
}

// A deliberately broken pair must be caught.
TEST(SelbergPair, VerifierDetectsBadConstruction) {
  SelbergPair p = selberg_pair(mpq_class(1, 5), 9);
  std::vector<double> shrunk = p.plus.coeffs();
  for (double& b : shrunk) b *= 0.8;
  SelbergPair bad{TrigPolynomial(Side::Plus, p.plus.delta(), shrunk), p.minus};
  SandwichCheck c = verify_sandwich(bad, 1000);
  EXPECT_FALSE(c.pass);
  EXPECT_GT(c.worst_violation, 0.01);
}

TEST(EvalPoly, Basics) {
  TrigPolynomial constant(Side::Plus, mpq_class(1, 4), {0.7});
  for (double y : {0.0, 0.1, 0.5, 3.25}) EXPECT_EQ(eval_poly(constant, y), 0.7);
  SelbergPair p = selberg_pair(mpq_class(1, 10), 9);
  for (double y : {0.0, 0.05, 0.3, 0.77}) EXPECT_NEAR(eval_poly(p.plus, y), eval_poly(p.plus, y + 1), 1e-12);
  EXPECT_GE(eval_poly(p.plus, 0.0), 1.0);
  // the mean over an equispaced grid finer than the degree is b_0
  for (const TrigPolynomial* t : {&p.plus, &p.minus}) {
    double mean = 0;
    for (int i = 0; i < 1000; ++i) mean += eval_poly(*t, i / 1000.0);
    EXPECT_NEAR(mean / 1000, t->coeff(0), 1e-6);
  }
}

// Oracle: sum_n b_n e(n y) over -J..J in complex arithmetic.
TEST(EvalPoly, MatchesComplexExpansion) {
  SelbergPair p = selberg_pair(mpq_class(3, 20), 17);
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> uni(-2, 2);
  for (int i = 0; i < 100; ++i) {
    const double y = uni(rng);
    std::complex<double> s = 0;
    for (long n = -17; n <= 17; ++n) s += p.minus.coeff(n) * std::polar(1.0, 2 * std::numbers::pi * n * y);
    EXPECT_NEAR(s.real(), eval_poly(p.minus, y), 1e-12);
    EXPECT_NEAR(s.imag(), 0.0, 1e-12);
  }
}

TEST(SandwichCount, Examples) {
  SubspaceMatrix s = line_sqrt2();
  SandwichResult r = sandwich_count(s, 10, mpq_class(1, 5), 50, CountMode::A);
  EXPECT_LE(r.lower, 4);
  EXPECT_GE(r.upper, 4);
  EXPECT_GE(r.upper - r.lower, 0);
  EXPECT_GE(r.analytic_upper, r.upper);
  EXPECT_FALSE(r.vacuous);
  SandwichResult one = sandwich_count(s, 1, mpq_class(9, 20), 100, CountMode::A);
  EXPECT_LE(one.lower, 1);
  EXPECT_GE(one.upper, 1);
  try {
    sandwich_count(s, 10, mpq_class(3, 5), 10, CountMode::A);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::delta_out_of_range);
  }
}

TEST(SandwichCount, BracketsExactCount) {
  std::mt19937_64 rng(17);
  int checked = 0;
  for (int trial = 0; trial < 100; ++trial) {
    SubspaceMatrix s = SubspaceMatrix::make(2, 1, {random_entry(rng)}, {{random_entry(rng)}});
    mpq_class delta(std::uniform_int_distribution<long>(5, 45)(rng), 100);
    delta.canonicalize();
    const long J = static_cast<long>(std::ceil(4 / delta.get_d()));
    const long q = std::uniform_int_distribution<long>(1, 200)(rng);
    const long exact = naive_count(s, CountMode::A, q, delta);
    EXPECT_EQ(exact, count_A(s, q, delta));
    SandwichResult r = sandwich_count(s, q, delta, J, CountMode::A);
    EXPECT_LE(r.lower, exact) << "trial " << trial;
    EXPECT_GE(r.upper, exact) << "trial " << trial;
    ++checked;
  }
  EXPECT_EQ(checked, 100);
}

TEST(SandwichCount, HigherCodimensionAndModeN) {
  std::mt19937_64 rng(23);
  for (int trial = 0; trial < 10; ++trial) {
    SubspaceMatrix s = SubspaceMatrix::make(3, 1, {random_entry(rng), random_entry(rng)},
                                            {{random_entry(rng), random_entry(rng)}});
    mpq_class delta(std::uniform_int_distribution<long>(10, 45)(rng), 100);
    const long q = std::uniform_int_distribution<long>(1, 150)(rng);
    const long exact = naive_count(s, CountMode::A, q, delta);
    SandwichResult r = sandwich_count(s, q, delta, 40, CountMode::A);
    EXPECT_LE(r.lower, exact) << trial;
    EXPECT_GE(r.upper, exact) << trial;
    const long Q = std::uniform_int_distribution<long>(1, 15)(rng);
    const long exactN = naive_count(s, CountMode::N, Q, delta);
    SandwichResult rN = sandwich_count(s, Q, delta, 40, CountMode::N);
    EXPECT_LE(rN.lower, exactN) << trial;
    EXPECT_GE(rN.upper, exactN) << trial;
  }
}

TEST(SandwichCount, VacuousMinorant) {
  SubspaceMatrix s = line_sqrt2();
  SandwichResult r = sandwich_count(s, 100, mpq_class(1, 100), 9, CountMode::A);
  EXPECT_TRUE(r.vacuous);
  EXPECT_GE(r.lower, 0);
  EXPECT_LE(r.lower, count_A(s, 100, mpq_class(1, 100)));
}

TEST(SandwichCount, RefinesWithDegree) {
  SubspaceMatrix s = SubspaceMatrix::make(2, 1, {surd(0, 1, 3)}, {{surd(0, 1, 2)}});
  double prev = std::numeric_limits<double>::infinity();
  for (long J : {10L, 20L, 40L, 80L}) {
    SandwichResult r = sandwich_count(s, 200, mpq_class(1, 10), J, CountMode::A);
    EXPECT_LE(r.upper - r.lower, prev) << J;
    prev = r.upper - r.lower;
  }
}

TEST(SandwichCount, AnalyticUpper) {
  // q + b0 * recip_product_sum is the expansion bound; a rational row makes
  // some ||j . row|| vanish
  SubspaceMatrix s = line_sqrt2();
  SandwichResult r = sandwich_count(s, 50, mpq_class(1, 10), 40, CountMode::A);
  Matrix<CertifiedReal> a = s.A();
  const double tail = static_cast<double>(recip_product_sum(a, 40).approx());
  EXPECT_NEAR(r.analytic_upper, (0.2 + 1.0 / 41) * (50 + tail), 1e-9 * r.analytic_upper);
  SubspaceMatrix rational = SubspaceMatrix::make(2, 1, {integer(0)}, {{SurdEntry{1, 0, 1, 3}}});
  EXPECT_TRUE(std::isinf(sandwich_count(rational, 10, mpq_class(1, 10), 10, CountMode::A).analytic_upper));
}

TEST(SandwichCount, ThreadsAgree) {
  SubspaceMatrix s = SubspaceMatrix::make(3, 2, {surd(0, 1, 3)}, {{surd(0, 1, 2)}, {surd(1, 1, 5, 2)}});
  CountOptions many;
  many.threads = 7;
  SandwichResult a = sandwich_count(s, 40, mpq_class(1, 8), 32, CountMode::A);
  SandwichResult b = sandwich_count(s, 40, mpq_class(1, 8), 32, CountMode::A, many);
  EXPECT_EQ(a.lower, b.lower);
  EXPECT_EQ(a.upper, b.upper);
  EXPECT_EQ(a.analytic_upper, b.analytic_upper);
}

// |sum_{a<=q} e(a x)| <= 1/||x||, oracle = direct summation in long double.
TEST(ExpSum, InequalityOnRandomSurds) {
  std::mt19937_64 rng(29);
  int violations = 0;
  for (int i = 0; i < 1000; ++i) {
    SurdEntry e = random_entry(rng);
    CertifiedReal x = make_entry(e);
    const long q = std::uniform_int_distribution<long>(1, 1000)(rng);
    ExpSumCheck c = exp_sum_check(x, q);
    const long double xf = frac(x).approx();
    std::complex<long double> s = 0;
    for (long a = 1; a <= q; ++a) s += std::polar(1.0L, 2 * std::numbers::pi_v<long double> * std::fmod(a * xf, 1.0L));
    const double direct = static_cast<double>(std::abs(s));
    EXPECT_LE(c.lower, direct + 1e-9) << i;
    EXPECT_GE(c.upper, direct - 1e-9) << i;
    if (!c.holds) ++violations;
  }
  EXPECT_EQ(violations, 0);
  EXPECT_THROW(exp_sum_check(CertifiedReal::integer(3L), 5), Error);
}

}  // namespace
}  // namespace dioph
