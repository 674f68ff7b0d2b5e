#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "dioph/numerics.hpp"

namespace dioph {
namespace {

CertifiedReal sqrt_of(long d) { return Surd::sqrt_of(d); }

CertifiedReal fuzzy(const char* text, long bits, const char* radius) {
  Ball b = Ball::from_decimal(text, bits);
  BigFloat r(64);
  mpfr_set_str(r.get(), radius, 10, MPFR_RNDU);
  return Ball(b.mid(), r);
}

TEST(Surd, CanonicalForm) {
  Surd s = Surd::make(2, 4, 8, 6);  // (2 + 4 sqrt 8)/6 = (1 + 4 sqrt 2)/3
  EXPECT_EQ(s.p(), 1);
  EXPECT_EQ(s.q(), 4);
  EXPECT_EQ(s.d(), 2);
  EXPECT_EQ(s.r(), 3);
  Surd neg = Surd::make(1, 1, 5, -2);
  EXPECT_EQ(neg.r(), 2);
  EXPECT_EQ(neg.p(), -1);
  EXPECT_TRUE(Surd::make(3, 2, 9, 1).is_rational());
  EXPECT_EQ(Surd::make(3, 2, 9, 1).to_rational(), 9);
}

TEST(Surd, SignAndFloor) {
  EXPECT_EQ(Surd::make(-1, 1, 2, 1).sign(), 1);   // sqrt2 - 1
  EXPECT_EQ(Surd::make(-2, 1, 2, 1).sign(), -1);  // sqrt2 - 2
  EXPECT_EQ(Surd::make(3, -2, 2, 1).sign(), 1);   // 3 - 2 sqrt2 > 0
  EXPECT_EQ(Surd::sqrt_of(2).floor(), 1);
  EXPECT_EQ((-Surd::sqrt_of(2)).floor(), -2);
  EXPECT_EQ(Surd::make(1, 1, 5, 2).floor(), 1);
  EXPECT_EQ(Surd::make(-7, 3, 7, 4).floor(), 0);  // (-7 + 7.937)/4
}

TEST(Frac, Examples) {
  EXPECT_EQ(frac(CertifiedReal::rational(mpq_class(-1, 4))).surd().to_rational(), mpq_class(3, 4));
  EXPECT_EQ(frac(CertifiedReal::integer(3L)).surd().to_rational(), 0);
  CertifiedReal f = frac(sqrt_of(2));
  EXPECT_EQ(f.surd(), Surd::make(-1, 1, 2, 1));
  EXPECT_NEAR(static_cast<double>(f.approx()), 0.4142135624, 1e-10);
}

TEST(Frac, UndecidableNearInteger) {
  EXPECT_THROW(frac(fuzzy("3", 128, "1e-20")), PrecisionInsufficient);
  EXPECT_NO_THROW(frac(fuzzy("3.5", 128, "1e-20")));
}

TEST(DistNearest, Examples) {
  EXPECT_EQ(dist_nearest(CertifiedReal::rational(mpq_class(1, 2))).surd().to_rational(), mpq_class(1, 2));
  EXPECT_EQ(dist_nearest(CertifiedReal::integer(7L)).surd().to_rational(), 0);
  CertifiedReal x = dist_nearest(Surd::make(0, 2, 2, 1));
  EXPECT_EQ(x.surd(), Surd::make(3, -2, 2, 1));
  EXPECT_NEAR(static_cast<double>(x.approx()), 0.1715728753, 1e-10);
}

TEST(CmpMargin, Examples) {
  EXPECT_EQ(cmp_margin(sqrt_of(2), CertifiedReal::rational(mpq_class(3, 2))), Ordering::Less);
  EXPECT_EQ(cmp_margin(CertifiedReal::rational(mpq_class(1, 2)), CertifiedReal::rational(mpq_class(1, 2))),
            Ordering::Equal);
  EXPECT_THROW(cmp_margin(fuzzy("0.5", 128, "1e-30"), CertifiedReal::rational(mpq_class(1, 2))),
               PrecisionInsufficient);
  EXPECT_EQ(cmp_margin(sqrt_of(2), sqrt_of(3)), Ordering::Less);
  EXPECT_EQ(cmp_margin(Surd::make(0, 1, 8, 1), Surd::make(0, 2, 2, 1)), Ordering::Equal);
}

// Interval endpoints of a ball, for oracle comparisons.
std::pair<long double, long double> bounds(const Ball& b) {
  return {b.lower().to_long_double(MPFR_RNDD), b.upper().to_long_double(MPFR_RNDU)};
}

TEST(DistNearest, PropertiesBothModes) {
  std::mt19937_64 rng(20240611);
  for (int i = 0; i < 10000; ++i) {
    long d = 2 + static_cast<long>(rng() % 200);
    if (mpz_perfect_square_p(mpz_class(d).get_mpz_t())) continue;
    long p = static_cast<long>(rng() % 2001) - 1000;
    long q = static_cast<long>(rng() % 41) - 20;
    long r = 1 + static_cast<long>(rng() % 50);
    long k = static_cast<long>(rng() % 21) - 10;
    CertifiedReal x = Surd::make(p, q, d, r);
    CertifiedReal dn = dist_nearest(x);
    // Range and symmetry.
    ASSERT_GE(dn.surd().sign(), 0);
    ASSERT_NE(cmp_margin(dn, CertifiedReal::rational(mpq_class(1, 2))), Ordering::Greater);
    ASSERT_EQ(dist_nearest(-x).surd(), dn.surd());
    ASSERT_EQ(dist_nearest(x + CertifiedReal::integer(k)).surd(), dn.surd());
    CertifiedReal f = frac(x);
    if (!f.surd().is_zero()) {
      Surd alt = compare(f.surd(), Surd::integer(1) - f.surd()) < 0 ? f.surd() : Surd::integer(1) - f.surd();
      ASSERT_EQ(alt, dn.surd());
    }
    // Ball mode: the same identities hold inside the radius.
    CertifiedReal xb = x.to_ball(256);
    CertifiedReal db = dist_nearest(xb);
    CertifiedReal fb = frac(xb);
    auto [lo, hi] = bounds(db.ball());
    long double exact = dn.approx();
    ASSERT_LE(lo, exact + 1e-18L);
    ASSERT_GE(hi, exact - 1e-18L);
    long double fv = fb.approx();
    ASSERT_NEAR(static_cast<double>(std::min(fv, 1 - fv)), static_cast<double>(db.approx()), 1e-15);
  }
}

TEST(DistNearest, SurdAgreesWithMpfrSqrtAt256Bits) {
  for (long d : {2L, 3L, 5L, 7L}) {
    BigFloat root(256);
    mpfr_set_ui(root.get(), static_cast<unsigned long>(d), MPFR_RNDN);
    int t = mpfr_sqrt(root.get(), root.get(), MPFR_RNDN);
    ASSERT_NE(t, 0);
    BigFloat rad(64);
    mpfr_set_ui_2exp(rad.get(), 1, -250, MPFR_RNDU);
    Ball ball_root(root, rad);
    for (long j = 1; j <= 10000; ++j) {
      CertifiedReal exact = dist_nearest(Surd::sqrt_of(d) * mpz_class(j));
      CertifiedReal approx = dist_nearest(CertifiedReal(ball_root * mpz_class(j)));
      Ball diff = exact.to_ball(300) - approx.ball();
      // |exact - approx.mid| must be inside approx's radius.
      BigFloat gap(300);
      mpfr_abs(gap.get(), diff.mid().get(), MPFR_RNDU);
      mpfr_sub(gap.get(), gap.get(), exact.to_ball(300).rad().get(), MPFR_RNDD);
      ASSERT_LE(mpfr_cmp(gap.get(), approx.ball().rad().get()), 0) << "d=" << d << " j=" << j;
    }
  }
}

TEST(Ball, ArithmeticEnclosures) {
  Ball a = Ball::from_decimal("0.1", 64);
  EXPECT_FALSE(a.is_exact());
  Ball b = Ball::from_decimal("0.5", 64);
  EXPECT_TRUE(b.is_exact());
  Ball c = (a * b).reciprocal();
  auto [lo, hi] = bounds(c);
  EXPECT_LE(lo, 20.0L);
  EXPECT_GE(hi, 20.0L);
  EXPECT_THROW(Ball::from_decimal("1.2.3", 64), Error);
}

TEST(FixedFrac, MatchesExactFraction) {
  FixedFrac f = to_fixed_frac(sqrt_of(2));
  EXPECT_EQ(f.err, 1u);
  EXPECT_NEAR(static_cast<double>(fixed_to_ld(f.value)), 0.41421356237309504880, 1e-18);
  FixedFrac g = to_fixed_frac(-sqrt_of(2));
  EXPECT_NEAR(static_cast<double>(fixed_to_ld(g.value)), 1 - 0.41421356237309504880, 1e-18);
  // Integer combinations wrap: 5 sqrt 2 mod 1.
  u128 five = f.value * 5;
  EXPECT_NEAR(static_cast<double>(fixed_to_ld(fixed_dist(five))), 0.0710678118654752, 1e-15);
  EXPECT_EQ(to_fixed_frac(CertifiedReal::integer(3L)).err, 0u);
}

TEST(PrecisionPolicy, RetryLadderEscalates) {
  PrecisionPolicy p{128, 1024};
  std::vector<long> seen;
  long got = with_precision_retry(p, [&](long bits) {
    seen.push_back(bits);
    if (bits < 512) throw PrecisionInsufficient("more");
    return bits;
  });
  EXPECT_EQ(got, 512);
  EXPECT_EQ(seen, (std::vector<long>{128, 256, 512}));
  EXPECT_THROW(with_precision_retry(p, [](long) -> long { throw PrecisionInsufficient("never"); }),
               PrecisionInsufficient);
}

}  // namespace
}  // namespace dioph
