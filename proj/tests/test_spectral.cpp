#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "epd_gossip/spectral.hpp"

using namespace epd_gossip;

namespace {

constexpr double kPi = std::numbers::pi;

ErrorKind kind_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  ADD_FAILURE() << "no exception";
  return ErrorKind::ConfigError;
}

// mean zero, not symmetric, aperiodic
LatticeFilter skewed_filter() { return new_filter(1, {{{-2}, 0.2}, {{0}, 0.4}, {{1}, 0.4}}, "skewed"); }

}  // namespace

TEST(FieldFourier, Examples) {
  const std::vector<double> xi = {0.7};
  EXPECT_EQ(field_fourier(dirac_field(1), xi), std::complex<double>(1.0, 0.0));
  const auto tr = run_simple(lazy_filter_1d(), 1, {1});
  const auto z = field_fourier(tr.snapshot(1), xi);
  EXPECT_NEAR(z.real(), 0.5 + 0.5 * std::cos(0.7), 1e-15);
  EXPECT_NEAR(z.imag(), 0.0, 1e-15);
  EXPECT_THROW((void)field_fourier(dirac_field(2), xi), Error);
}

TEST(Plancherel, Examples) {
  EXPECT_NEAR(plancherel_l2(dirac_field(1), 8), 1.0, 1e-15);
  const auto tr = run_simple(lazy_filter_1d(), 1, {1});
  EXPECT_NEAR(plancherel_l2(tr.snapshot(1), 3), 0.375, 1e-15);
  EXPECT_EQ(kind_of([&] { (void)plancherel_l2(tr.snapshot(1), 2); }), ErrorKind::ResolutionTooLow);
}

TEST(Plancherel, MatchesSumOfSquaresOnRandomFields) {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> g;
  for (int d = 1; d <= 3; ++d) {
    ScalarField x(d, 3);
    for (double& v : x.values()) v = g(rng);
    EXPECT_NEAR(plancherel_l2(x, 7), x.sum_squares(), 1e-10 * x.sum_squares()) << d;
    EXPECT_NEAR(plancherel_l2(x, 16), x.sum_squares(), 1e-10 * x.sum_squares()) << d;
  }
}

TEST(Homomorphism, IterateTransformIsPolynomialOfSymbol) {
  const auto f = triangular_filter();
  const auto s = jacobi_printed_schedule(2);
  const auto tr = run_second_order(f, s, 12, {5, 12});
  const specfun::JacobiParams p(1.0, 0.0);
  for (auto xi : {std::vector<double>{0.3, -1.2}, {2.0, 2.5}, {-kPi, 0.1}}) {
    const auto w = filter_fourier(f, xi);
    for (std::int64_t n : {5, 12}) {
      const auto lhs = field_fourier(tr.snapshot(n), xi);
      const auto rhs = schedule_symbol(s, w, n);
      EXPECT_NEAR(std::abs(lhs - rhs), 0.0, 1e-13);
      EXPECT_NEAR(rhs.real(), specfun::jacobi_normalized(static_cast<int>(n), p, w.real()), 1e-13);
    }
  }
}

TEST(SpectralNorm, AgreesWithDirectIteration) {
  const auto f = triangular_filter();
  const auto tr = run_second_order(f, jacobi_printed_schedule(2), 20, {});
  EXPECT_NEAR(jacobi_iterate_l2_spectral(f, specfun::JacobiParams(1.0, 0.0), 20, 64), tr.metrics.back().l2_sq,
              1e-13);
}

TEST(SharpConstant, Values) {
  EXPECT_NEAR(sharp_rate_constant(triangular_filter()), std::sqrt(3.0) / kPi, 1e-14);
  EXPECT_NEAR(sharp_rate_constant(lazy_filter_1d()), 1.0 / std::sqrt(2.0), 1e-14);
  EXPECT_NEAR(sharp_rate_constant(standard_filter(2)), 2.0 / kPi, 1e-14);
}

TEST(SharpRate, SlopeAndRatioOnLazy) {
  const auto rep = sharp_rate_estimate(lazy_filter_1d(), jacobi_printed_schedule(1), {100, 150, 200, 400});
  ASSERT_EQ(rep.series.size(), 4u);
  EXPECT_NEAR(rep.loglog_slope(100, 400), -1.0, 0.1);
  EXPECT_TRUE(rep.verdict) << rep.series.back().ratio;
  EXPECT_EQ(kind_of([] { (void)sharp_rate_estimate(standard_filter(1), jacobi_printed_schedule(1), {10}); }),
            ErrorKind::NotAperiodic);
}

TEST(WeakEpd, ZeroFrequencyHasNoGap) {
  const std::vector<double> xi = {0.0, 0.0};
  const auto rep = verify_weak_epd_pointwise(triangular_filter(), jacobi_printed_schedule(2), xi, 1.0,
                                             {0.1, 0.05, 0.025});
  for (const auto& p : rep.series) EXPECT_LE(p.metric, kWeakEpdRoundingFloor);
  EXPECT_TRUE(rep.verdict);
}

TEST(WeakEpd, LazyConverges) {
  const std::vector<double> xi = {2.0};
  const auto rep =
      verify_weak_epd_pointwise(lazy_filter_1d(), jacobi_printed_schedule(1), xi, 1.0, {0.1, 0.05, 0.025, 0.0125});
  EXPECT_TRUE(rep.verdict);
  EXPECT_LT(rep.series.back().metric, 0.01);
  EXPECT_EQ(rep.params.at("xi"), "2");
}

TEST(WeakEpd, TriangularDecreases) {
  const std::vector<double> xi = {1.0, 0.0};
  const auto rep = verify_weak_epd_pointwise(triangular_filter(), jacobi_general_schedule(1.0, 0.0), xi, 2.0,
                                             {0.2, 0.1, 0.05, 0.025});
  EXPECT_TRUE(rep.strictly_decreasing());
  EXPECT_TRUE(rep.verdict);
}

TEST(TheoremChecks, Rejections) {
  const std::vector<double> xi2 = {1.0, 0.0};
  const std::vector<double> xi1 = {1.0};
  EXPECT_EQ(kind_of([&] {
              (void)verify_weak_epd_pointwise(standard_filter(2), jacobi_printed_schedule(2), xi2, 1.0, {0.1, 0.05});
            }),
            ErrorKind::NotAperiodic);
  EXPECT_EQ(kind_of([&] {
              (void)verify_weak_epd_pointwise(skewed_filter(), jacobi_printed_schedule(1), xi1, 1.0, {0.1, 0.05});
            }),
            ErrorKind::NotSymmetric);
  EXPECT_EQ(kind_of([] { (void)verify_local_clt(standard_filter(2), {10, 20}); }), ErrorKind::NotAperiodic);
  const auto custom = custom_schedule("c", [](std::int64_t) { return CoefficientTriple{1.0, 0.0, 0.0}; });
  EXPECT_EQ(kind_of([&] { (void)verify_local_epd(lazy_filter_1d(), custom, {10}); }), ErrorKind::InvalidParameters);
}

TEST(TheoremChecks, PeriodicFilterMessageNamesFrequency) {
  try {
    (void)verify_local_clt(standard_filter(2), {10});
    FAIL();
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("xi = ("), std::string::npos) << e.what();
  }
}

TEST(LocalClt, SkewedFilterStillConverges) {
  // symmetry is not required for the local CLT
  const auto rep = verify_local_clt(skewed_filter(), {25, 50, 100, 200});
  EXPECT_TRUE(rep.verdict);
}

TEST(LocalClt, RoundZeroExcluded) {
  const auto rep = verify_local_clt(lazy_filter_1d(), {0, 20, 40, 80, 160});
  ASSERT_EQ(rep.series.size(), 4u);
  EXPECT_EQ(rep.series.front().n, 20.0);
  EXPECT_TRUE(rep.verdict);
  EXPECT_TRUE(rep.strictly_decreasing());
}

TEST(LocalEpd, LazyDecreases) {
  const auto rep = verify_local_epd(lazy_filter_1d(), jacobi_printed_schedule(1), {25, 50, 100, 200});
  ASSERT_EQ(rep.series.size(), 4u);
  EXPECT_TRUE(rep.verdict);
  EXPECT_EQ(rep.auxiliary.size(), rep.series.size());
  EXPECT_FALSE(rep.note.empty());
}

TEST(LocalEpd, SpectralErrorAgreesWithLatticeError) {
  // Parseval: the frequency-side error equals the sum over all of Z. The
  // filtered oracle decays like 1/v, so the lattice box has to be wide.
  const auto f = lazy_filter_1d();
  LocalEpdOptions opt;
  opt.box_margin = 600;
  const auto rep = verify_local_epd(f, jacobi_printed_schedule(1), {40}, opt);
  const double lattice = rep.series.front().metric / 40.0;
  const double spectral = local_epd_error_spectral(f, specfun::JacobiParams(0.5, 0.0), 40, 512);
  EXPECT_NEAR(lattice, spectral, 3e-5 * spectral);
}
