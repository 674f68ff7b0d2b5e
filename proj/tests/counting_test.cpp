#include <gtest/gtest.h>

#include <random>

#include "dioph/counting.hpp"
#include "oracles.hpp"

namespace dioph {
namespace {

using namespace oracle;

// (0; sqrt2): n = 2, d = 1
SubspaceMatrix line_sqrt2() { return SubspaceMatrix::make(2, 1, {integer(0)}, {{surd(0, 1, 2)}}); }

TEST(CountA, Examples) {
  SubspaceMatrix s = line_sqrt2();
  EXPECT_EQ(count_A(s, 10, mpq_class(1, 5)), 4);
  EXPECT_EQ(count_A(s, 10, mpq_class(1, 10)), 1);
  EXPECT_EQ(count_A(s, 7, mpq_class(1, 2)), 7);
}

TEST(CountN, Examples) {
  SubspaceMatrix s = line_sqrt2();
  EXPECT_EQ(count_N(s, 5, mpq_class(3, 10)), 15);
  EXPECT_EQ(count_N(s, 3, mpq_class(1, 2)), 9);
  EXPECT_EQ(count_N(s, 1, mpq_class(9, 20)), 1);
}

TEST(Count, Errors) {
  SubspaceMatrix s = line_sqrt2();
  for (mpq_class bad : {mpq_class(0), mpq_class(-1, 3), mpq_class(3, 2)}) {
    try {
      count_A(s, 5, bad);
      FAIL();
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), Errc::delta_out_of_range);
    }
  }
  EXPECT_EQ(count_A(s, 5, mpq_class(1)), 5);
  SubspaceMatrix plane = SubspaceMatrix::make(3, 2, {integer(0)}, {{surd(0, 1, 2)}, {surd(0, 1, 3)}});
  try {
    count_A(plane, 100000, mpq_class(1, 10));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::budget_exceeded);
  }
}

TEST(Count, ExactTiesAreNotCounted) {
  // alpha = 1/4: ||a/4|| = 1/4 for odd a
  SubspaceMatrix quarter = SubspaceMatrix::make(2, 1, {integer(0)}, {{SurdEntry{1, 0, 1, 4}}});
  EXPECT_EQ(count_A(quarter, 8, mpq_class(1, 4)), 2);  // a = 4, 8
  EXPECT_EQ(count_N(quarter, 4, mpq_class(1, 4)), 4);
  // alpha0 = 1/5 - sqrt2, alpha1 = sqrt2: at (q, a) = (1, 1) the value is exactly 1/5
  SubspaceMatrix tie = SubspaceMatrix::make(2, 1, {surd(1, -5, 2, 5)}, {{surd(0, 1, 2)}});
  EXPECT_EQ(count_A(tie, 1, mpq_class(1, 5)), 0);
  EXPECT_EQ(count_A(tie, 1, mpq_class(201, 1000)), 1);
  for (long q = 1; q <= 30; ++q) {
    EXPECT_EQ(count_A(tie, q, mpq_class(1, 5)), naive_count(tie, CountMode::A, q, mpq_class(1, 5))) << q;
    CountOptions plain;
    plain.three_gap = false;
    EXPECT_EQ(count_A(tie, q, mpq_class(1, 5), plain), naive_count(tie, CountMode::A, q, mpq_class(1, 5))) << q;
  }
}

TEST(Count, MatchesNaiveOracle) {
  std::mt19937_64 rng(7);
  std::uniform_int_distribution<long> delta_num(1, 45);
  for (int trial = 0; trial < 30; ++trial) {
    SubspaceMatrix s = SubspaceMatrix::make(2, 1, {random_entry(rng)}, {{random_entry(rng)}});
    mpq_class delta(delta_num(rng), 100);
    std::uniform_int_distribution<long> size(1, 500);
    long q = size(rng);
    EXPECT_EQ(count_A(s, q, delta), naive_count(s, CountMode::A, q, delta)) << "trial " << trial;
    long Q = std::uniform_int_distribution<long>(1, 40)(rng);
    EXPECT_EQ(count_N(s, Q, delta), naive_count(s, CountMode::N, Q, delta)) << "trial " << trial;
  }
  // higher dimension and codimension
  for (int trial = 0; trial < 8; ++trial) {
    SubspaceMatrix s = SubspaceMatrix::make(4, 2, {random_entry(rng), random_entry(rng)},
                                            {{random_entry(rng), random_entry(rng)}, {random_entry(rng), random_entry(rng)}});
    mpq_class delta(delta_num(rng) + 5, 100);
    long q = std::uniform_int_distribution<long>(1, 25)(rng);
    EXPECT_EQ(count_A(s, q, delta), naive_count(s, CountMode::A, q, delta)) << "trial " << trial;
    long Q = std::uniform_int_distribution<long>(1, 8)(rng);
    EXPECT_EQ(count_N(s, Q, delta), naive_count(s, CountMode::N, Q, delta)) << "trial " << trial;
  }
}

TEST(Count, ThreeGapAgreesWithPlainEnumeration) {
  std::mt19937_64 rng(11);
  CountOptions plain;
  plain.three_gap = false;
  for (int trial = 0; trial < 200; ++trial) {
    SubspaceMatrix s = SubspaceMatrix::make(2, 1, {random_entry(rng)}, {{random_entry(rng)}});
    mpq_class delta(std::uniform_int_distribution<long>(1, 499)(rng), 1000);
    long q = std::uniform_int_distribution<long>(1, 3000)(rng);
    ASSERT_EQ(count_A(s, q, delta), count_A(s, q, delta, plain)) << "trial " << trial;
    long Q = std::uniform_int_distribution<long>(1, 60)(rng);
    ASSERT_EQ(count_N(s, Q, delta), count_N(s, Q, delta, plain)) << "trial " << trial;
  }
}

TEST(Count, BallModeMatchesSurdMode) {
  SubspaceMatrix dec = SubspaceMatrix::make(
      2, 1, {DecEntry{"0", 128}}, {{DecEntry{"1.4142135623730950488016887242096980785696718753769", 160}}});
  SubspaceMatrix exact = line_sqrt2();
  for (long q : {10L, 99L, 1000L}) EXPECT_EQ(count_A(dec, q, mpq_class(1, 7)), count_A(exact, q, mpq_class(1, 7)));
}

TEST(Count, Monotonicity) {
  SubspaceMatrix s = SubspaceMatrix::make(3, 1, {surd(0, 1, 3), integer(0)}, {{surd(0, 1, 2), surd(1, 1, 5, 2)}});
  for (long q : {5L, 20L, 80L}) {
    long prev = 0;
    for (long num = 1; num <= 10; ++num) {
      long c = count_A(s, q, mpq_class(num, 20));
      EXPECT_GE(c, prev);
      prev = c;
    }
  }
  long prevQ = 0;
  for (long Q = 1; Q <= 20; ++Q) {
    long c = count_N(s, Q, mpq_class(1, 5));
    EXPECT_GE(c, prevQ);
    prevQ = c;
  }
}

TEST(Count, ThreadsAgree) {
  SubspaceMatrix s = SubspaceMatrix::make(3, 2, {surd(0, 1, 3)}, {{surd(0, 1, 2)}, {surd(1, 1, 5, 2)}});
  CountOptions many;
  many.threads = 6;
  EXPECT_EQ(count_A(s, 300, mpq_class(1, 10)), count_A(s, 300, mpq_class(1, 10), many));
  EXPECT_EQ(count_N(s, 40, mpq_class(1, 10)), count_N(s, 40, mpq_class(1, 10), many));
}

TEST(Count, ConvergesToMainTerm) {
  // (sqrt3; sqrt2) at q = 10^5, delta = 0.05
  SubspaceMatrix s = SubspaceMatrix::make(2, 1, {surd(0, 1, 3)}, {{surd(0, 1, 2)}});
  long c = count_A(s, 100000, mpq_class(1, 20));
  EXPECT_LE(std::abs(c / 10000.0 - 1), 0.2);
  CountOptions plain;
  plain.three_gap = false;
  EXPECT_EQ(c, count_A(s, 100000, mpq_class(1, 20), plain));
}

TEST(DiscrepancyReport, Examples) {
  SubspaceMatrix s = line_sqrt2();
  CountReport r = count_report(s, CountMode::A, 10, mpq_class(1, 5));
  EXPECT_EQ(r.exact, 4);
  EXPECT_EQ(r.main_term, 4);
  EXPECT_EQ(r.discrepancy, 0);
  CountReport r2 = count_report(s, CountMode::A, 10, mpq_class(1, 10));
  EXPECT_EQ(r2.exact, 1);
  EXPECT_EQ(r2.main_term, 2);
  EXPECT_EQ(r2.discrepancy, 1);
  EXPECT_EQ(r2.normalized, 1);
  CountReport r3 = count_report(s, CountMode::N, 5, mpq_class(3, 10));
  EXPECT_EQ(r3.exact, 15);
  EXPECT_EQ(r3.main_term, 15);
  EXPECT_EQ(r3.discrepancy, 0);
  // normalized = discrepancy / (main / 2^(n-d))
  DiscrepancySummary sum = discrepancy_report(s, {5, 10, 20}, mpq_class(1, 10), CountMode::A);
  ASSERT_EQ(sum.reports.size(), 3u);
  for (const auto& rep : sum.reports) {
    EXPECT_EQ(rep.normalized, rep.discrepancy / (rep.main_term / 2));
    EXPECT_LE(rep.normalized, sum.max_normalized);
  }
  EXPECT_THROW(discrepancy_report(s, {}, mpq_class(1, 10), CountMode::A), Error);
}

}  // namespace
}  // namespace dioph
