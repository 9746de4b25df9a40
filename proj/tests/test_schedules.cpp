#include <gtest/gtest.h>

#include <cmath>

#include "epd_gossip/schedules.hpp"

using namespace epd_gossip;

namespace {

struct Reference {
  double alpha, beta;
  int n;
  double a, b, c;
};

// coefficients solved from sympy's normalized Jacobi polynomials
const Reference kReference[] = {
    {0.5, 0.0, 0, 5.0 / 6, 1.0 / 6, 0},          {0.5, 0.0, 1, 63.0 / 50, 7.0 / 250, 36.0 / 125},
    {0.5, 0.0, 2, 143.0 / 98, 11.0 / 882, 208.0 / 441}, {0.5, 0.0, 3, 85.0 / 54, 5.0 / 702, 68.0 / 117},
    {1.0, 0.0, 0, 3.0 / 4, 1.0 / 4, 0},          {1.0, 0.0, 1, 10.0 / 9, 2.0 / 27, 5.0 / 27},
    {1.0, 0.0, 2, 21.0 / 16, 3.0 / 80, 7.0 / 20}, {1.0, 0.0, 3, 36.0 / 25, 4.0 / 175, 81.0 / 175},
    {1.5, 0.0, 0, 7.0 / 10, 3.0 / 10, 0},        {1.5, 0.0, 1, 99.0 / 98, 81.0 / 686, 44.0 / 343},
    {1.5, 0.0, 2, 65.0 / 54, 13.0 / 198, 80.0 / 297}, {1.5, 0.0, 3, 323.0 / 242, 51.0 / 1210, 228.0 / 605},
    {2.0, 0.0, 0, 2.0 / 3, 1.0 / 3, 0},          {2.0, 0.0, 1, 15.0 / 16, 5.0 / 32, 3.0 / 32},
    {2.0, 0.0, 2, 28.0 / 25, 7.0 / 75, 16.0 / 75}, {2.0, 0.0, 3, 5.0 / 4, 1.0 / 16, 5.0 / 16},
    {0.25, 0.0, 0, 9.0 / 10, 1.0 / 10, 0},       {0.25, 0.0, 1, 221.0 / 162, 13.0 / 1458, 272.0 / 729},
    {0.25, 0.0, 2, 525.0 / 338, 21.0 / 5746, 1600.0 / 2873}, {0.25, 0.0, 3, 957.0 / 578, 29.0 / 14450, 4752.0 / 7225},
    {1.0, 0.5, 0, 7.0 / 8, 1.0 / 8, 0},          {1.0, 0.5, 1, 33.0 / 28, 9.0 / 196, 11.0 / 49},
    {1.0, 0.5, 2, 65.0 / 48, 13.0 / 528, 25.0 / 66}, {1.0, 0.5, 3, 323.0 / 220, 17.0 / 1100, 133.0 / 275},
};

}  // namespace

TEST(PrintedSchedule, KnownValuesD2) {
  const auto s = jacobi_printed_schedule(2);
  const auto t0 = s(0);
  EXPECT_DOUBLE_EQ(t0.a, 0.75);
  EXPECT_DOUBLE_EQ(t0.b, 0.25);
  EXPECT_EQ(t0.c, 0.0);
  const auto t1 = s(1);
  EXPECT_NEAR(t1.a, 10.0 / 9.0, 1e-15);
  EXPECT_NEAR(t1.b, 2.0 / 27.0, 1e-15);
  EXPECT_NEAR(t1.c, 5.0 / 27.0, 1e-15);
  EXPECT_NEAR(t1.a + t1.b - t1.c, 1.0, 1e-15);
}

TEST(PrintedSchedule, MatchesReferenceForHalfIntegerAlpha) {
  for (const auto& r : kReference) {
    if (r.beta != 0.0 || std::abs(2.0 * r.alpha - std::round(2.0 * r.alpha)) > 0) continue;
    const auto t = jacobi_printed_schedule(static_cast<int>(2.0 * r.alpha))(r.n);
    EXPECT_NEAR(t.a, r.a, 1e-14) << r.alpha << " " << r.n;
    EXPECT_NEAR(t.b, r.b, 1e-14) << r.alpha << " " << r.n;
    EXPECT_NEAR(t.c, r.c, 1e-14) << r.alpha << " " << r.n;
  }
}

TEST(GeneralSchedule, MatchesReference) {
  for (const auto& r : kReference) {
    const auto t = jacobi_general_schedule(r.alpha, r.beta)(r.n);
    EXPECT_NEAR(t.a, r.a, 1e-14) << r.alpha << "," << r.beta << " n=" << r.n;
    EXPECT_NEAR(t.b, r.b, 1e-14) << r.alpha << "," << r.beta << " n=" << r.n;
    EXPECT_NEAR(t.c, r.c, 1e-14) << r.alpha << "," << r.beta << " n=" << r.n;
  }
}

TEST(GeneralSchedule, FamilyEquivalence) {
  for (int d = 1; d <= 4; ++d) {
    const auto p = jacobi_printed_schedule(d);
    const auto g = jacobi_general_schedule(0.5 * d, 0.0);
    for (std::int64_t n = 0; n <= 1000; ++n) {
      const auto x = p(n);
      const auto y = g(n);
      ASSERT_NEAR(x.a, y.a, 1e-12) << d << " " << n;
      ASSERT_NEAR(x.b, y.b, 1e-12) << d << " " << n;
      ASSERT_NEAR(x.c, y.c, 1e-12) << d << " " << n;
    }
  }
}

TEST(Schedules, ConservationEverywhere) {
  std::vector<CoefficientSchedule> all;
  for (int d = 1; d <= 4; ++d) all.push_back(jacobi_printed_schedule(d));
  for (auto [a, b] : {std::pair{0.25, 0.0}, {0.75, 0.0}, {1.0, 0.5}, {3.0, 2.0}, {-0.5, -0.5}, {0.0, 0.9}}) {
    all.push_back(jacobi_general_schedule(a, b));
  }
  for (const auto& s : all) {
    for (std::int64_t n = 0; n <= 10000; ++n) {
      const auto t = s(n);
      ASSERT_NEAR(t.a + t.b - t.c, 1.0, 1e-12) << s.id() << " " << n;
    }
  }
}

TEST(Schedules, CoefficientRanges) {
  for (auto [a, b] : {std::pair{0.5, 0.0}, {1.0, 0.0}, {0.25, 0.0}, {2.0, 1.0}}) {
    const auto s = jacobi_general_schedule(a, b);
    for (std::int64_t n = 1; n <= 5000; ++n) {
      const auto t = s(n);
      ASSERT_GT(t.a, 0.0);
      ASSERT_LE(t.a, 2.5);
      ASSERT_GE(t.c, 0.0);
      ASSERT_LT(t.c, 1.0);
    }
  }
}

TEST(Schedules, DampingLimit) {
  const auto s = jacobi_general_schedule(0.5, 0.0);
  const auto t = s(100000);
  EXPECT_NEAR(100000.0 * (1.0 - t.c), 2.0, 1e-3);
  EXPECT_NEAR(t.a, 2.0, 1e-3);
}

TEST(Schedules, InvalidParameters) {
  EXPECT_THROW((void)jacobi_general_schedule(-1.0, 0.0), Error);
  EXPECT_THROW((void)jacobi_printed_schedule(0), Error);
  EXPECT_THROW((void)jacobi_printed_schedule(2)(-1), Error);
}

TEST(Schedules, IdsAndParams) {
  EXPECT_EQ(jacobi_printed_schedule(2).id(), "jacobi_printed(d=2)");
  EXPECT_EQ(jacobi_general_schedule(0.25, 0.0).id(), "jacobi(alpha=0.25,beta=0)");
  const auto p = jacobi_printed_schedule(3).jacobi_params();
  ASSERT_TRUE(p.has_value());
  EXPECT_DOUBLE_EQ(p->alpha, 1.5);
  EXPECT_DOUBLE_EQ(p->beta, 0.0);
  EXPECT_FALSE(custom_schedule("x", std::vector<CoefficientTriple>{{1, 0, 0}}).jacobi_params().has_value());
}

TEST(CustomSchedule, TableBounds) {
  const auto s = custom_schedule("two", std::vector<CoefficientTriple>{{1, 0, 0}, {2, 0, 1}});
  EXPECT_EQ(s(1).a, 2.0);
  EXPECT_THROW((void)s(2), Error);
  EXPECT_EQ(s.id(), "custom(two)");
}

TEST(Asymptotics, PrintedSchedulesConverge) {
  const auto r2 = check_schedule_asymptotics(jacobi_printed_schedule(2), 3.0);
  EXPECT_TRUE(r2.ok());
  const auto r1 = check_schedule_asymptotics(jacobi_printed_schedule(1), 2.0);
  EXPECT_TRUE(r1.ok());
  for (std::size_t i = 1; i < r2.samples.size(); ++i) {
    EXPECT_LT(r2.samples[i].damping_gap, r2.samples[i - 1].damping_gap);
  }
}

TEST(Asymptotics, ConstantDampingIsFlagged) {
  const auto s = custom_schedule("c09", [](std::int64_t) { return CoefficientTriple{1.9, 0.0, 0.9}; });
  EXPECT_FALSE(check_schedule_asymptotics(s, 3.0).ok());
}

TEST(Asymptotics, WrongLimitIsFlagged) {
  EXPECT_FALSE(check_schedule_asymptotics(jacobi_printed_schedule(2), 2.0).ok());
}
