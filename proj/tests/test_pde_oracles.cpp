#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "epd_gossip/pde_oracles.hpp"
#include "epd_gossip/quadrature.hpp"

using namespace epd_gossip;

namespace {

constexpr double kPi = std::numbers::pi;

Eigen::MatrixXd q1(double v) { return Eigen::MatrixXd::Constant(1, 1, v); }

Eigen::MatrixXd tri_q() {
  Eigen::MatrixXd q(2, 2);
  q << 2.0 / 3, 1.0 / 3, 1.0 / 3, 2.0 / 3;
  return q;
}

double eval(const EpdSolution& s, std::vector<double> y) { return s(y); }
double eval(const HeatSolution& s, std::vector<double> y) { return s(y); }

}  // namespace

TEST(Covariance, Derived) {
  const Covariance c(tri_q());
  EXPECT_NEAR(c.det(), 1.0 / 3, 1e-15);
  EXPECT_NEAR((c.sqrt() * c.sqrt() - tri_q()).norm(), 0.0, 1e-14);
  EXPECT_NEAR((c.inverse() * tri_q() - Eigen::MatrixXd::Identity(2, 2)).norm(), 0.0, 1e-14);
  Eigen::MatrixXd bad(2, 2);
  bad << 1, 0.5, 0.4, 1;
  EXPECT_THROW(Covariance{bad}, Error);
  bad << 1, 2, 2, 1;
  EXPECT_THROW(Covariance{bad}, Error);
}

TEST(Heat, Values) {
  const HeatSolution h(q1(1.0), 1.0);
  EXPECT_NEAR(eval(h, {0.0}), 1.0 / std::sqrt(2.0 * kPi), 1e-15);
  EXPECT_NEAR(eval(h, {1.0}), std::exp(-0.5) / std::sqrt(2.0 * kPi), 1e-15);
  const HeatSolution h2(tri_q(), 3.0);
  EXPECT_NEAR(eval(h2, {1.0, -2.0}), 0.008910574654926659697, 1e-15);
  EXPECT_NEAR(h2.mass(), 1.0, 1e-10);
  EXPECT_THROW(HeatSolution(q1(1.0), 0.0), Error);
}

TEST(Heat, TrapezoidMass) {
  const HeatSolution h(q1(0.5), 4.0);
  double s = 0.0;
  for (int k = -4000; k <= 4000; ++k) s += eval(h, {k * 0.01}) * 0.01;
  EXPECT_NEAR(s, 1.0, 1e-10);
}

TEST(Epd, ReferenceValuesOneDim) {
  EXPECT_NEAR(eval(EpdSolution(1.0, q1(0.5), 5.0), {1.3}), 0.1674491537047768572, 1e-14);
  EXPECT_NEAR(eval(EpdSolution(0.25, q1(0.5), 5.0), {1.3}), 0.12239915656118419441, 1e-14);
  EXPECT_NEAR(eval(EpdSolution(2.0, q1(0.5), 5.0), {1.3}), 0.19308003749852136513, 1e-14);
}

TEST(Epd, ReferenceValueTwoDim) {
  EXPECT_NEAR(eval(EpdSolution(1.5, tri_q(), 4.0), {1.0, -2.0}), 0.018274143778914283779, 1e-15);
}

TEST(Epd, IndicatorPathAgrees) {
  const Covariance c(tri_q());
  const EpdSolution s(1.0, tri_q(), 2.5);
  int inside = 0;
  for (int i = 0; i < 10; ++i) {
    for (int j = 0; j < 10; ++j) {
      const std::vector<double> y = {-3.0 + 0.61 * i, -3.0 + 0.63 * j};
      const double a = s(y);
      const double b = epd_eval_indicator(c, 2.5, y);
      EXPECT_NEAR(a, b, 1e-14) << y[0] << "," << y[1];
      inside += b > 0.0;
    }
  }
  EXPECT_GT(inside, 10);
  EXPECT_LT(inside, 90);
}

TEST(Epd, SupportBoundary) {
  const EpdSolution s(1.0, q1(0.5), 5.0);
  const double edge = 5.0 * std::sqrt(0.5);
  EXPECT_EQ(eval(s, {edge * 1.0001}), 0.0);
  EXPECT_GT(eval(s, {edge * 0.999}), 0.0);
  // alpha < d/2: the density blows up at the boundary
  const EpdSolution low(0.25, q1(0.5), 5.0);
  EXPECT_GT(eval(low, {edge * 0.99999}), eval(low, {0.0}) * 5.0);
}

TEST(Epd, MassAndDomain) {
  for (double a : {0.25, 0.5, 1.0, 2.0}) EXPECT_NEAR(EpdSolution(a, q1(0.5), 5.0).mass(), 1.0, 1e-8) << a;
  EXPECT_NEAR(EpdSolution(1.0, tri_q(), 3.0).mass(), 1.0, 1e-8);
  EXPECT_THROW(EpdSolution(-0.5, q1(1.0), 1.0), Error);
  EXPECT_THROW(EpdSolution(0.0, tri_q(), 1.0), Error);
  EXPECT_THROW(EpdSolution(1.0, q1(1.0), -1.0), Error);
}

TEST(Epd, FourierTransform) {
  const EpdSolution s(1.0, tri_q(), 3.0);
  const std::vector<double> zero = {0.0, 0.0};
  EXPECT_EQ(epd_fourier(s, zero), 1.0);
  // scale invariance: (t, xi) and (t/2, 2 xi) agree
  const EpdSolution half(1.0, tri_q(), 1.5);
  const std::vector<double> xi = {0.4, -0.7};
  const std::vector<double> xi2 = {0.8, -1.4};
  EXPECT_NEAR(epd_fourier(s, xi), epd_fourier(half, xi2), 1e-15);
  // alpha = 1/2, Q = 1: u_hat = sin(t xi)/(t xi), zero at t xi = pi
  const EpdSolution one(0.5, q1(1.0), 1.0);
  const std::vector<double> pi = {kPi};
  EXPECT_NEAR(epd_fourier(one, pi), 0.0, 1e-15);
}

TEST(Epd, FourierMatchesDensityOneDim) {
  const EpdSolution s(1.5, q1(0.5), 4.0);
  const double r = 4.0 * std::sqrt(0.5);
  const auto rule = quadrature::composite_gauss_legendre(-r, r, 64, 8);
  for (double xi : {0.0, 0.3, 1.1, 2.5}) {
    double acc = 0.0;
    for (std::size_t k = 0; k < rule.nodes.size(); ++k) {
      acc += rule.weights[k] * eval(s, {rule.nodes[k]}) * std::cos(xi * rule.nodes[k]);
    }
    EXPECT_NEAR(acc, epd_fourier(s, std::vector<double>{xi}), 1e-7) << xi;
  }
}

TEST(Epd, Anisotropy) {
  Eigen::MatrixXd q(2, 2);
  q << 0.7, 0.25, 0.25, 0.4;
  const Covariance c(q);
  const EpdSolution aniso(1.5, q, 2.0);
  const EpdSolution iso(1.5, Eigen::MatrixXd::Identity(2, 2), 2.0);
  for (auto y : {std::vector<double>{0.3, -0.2}, {1.0, 0.5}, {-0.6, 0.9}}) {
    const Eigen::Vector2d z = c.inverse_sqrt() * Eigen::Vector2d(y[0], y[1]);
    EXPECT_NEAR(aniso(y), eval(iso, {z(0), z(1)}) / std::sqrt(c.det()), 1e-13);
  }
}

TEST(Sinc, Values) {
  EXPECT_EQ(sinc_filter(std::vector<double>{0.0, 0.0}), 1.0);
  EXPECT_EQ(sinc_filter(std::vector<double>{1.0}), 0.0);
  EXPECT_EQ(sinc_filter(std::vector<double>{0.0, -3.0}), 0.0);
  EXPECT_NEAR(sinc_filter(std::vector<double>{0.5}), 2.0 / kPi, 1e-15);
}

TEST(BandLimited, ReferenceValuesOneDim) {
  const EpdSolution s(0.5, q1(0.5), 5.0);
  const auto f = epd_filtered_on_lattice(s, 8);
  const std::pair<int, double> want[] = {{0, 0.14122620890076538323},
                                         {1, 0.14151598567806713399},
                                         {3, 0.13563940321162921886},
                                         {4, 0.012184135082772272109},
                                         {6, 0.0011992502524028787838}};
  for (const auto& [v, w] : want) {
    EXPECT_NEAR(f.at(std::vector<int>{v}), w, 1e-9) << v;
    EXPECT_NEAR(f.at(std::vector<int>{-v}), w, 1e-9) << -v;
  }
}

TEST(BandLimited, LargeTime) {
  const EpdSolution s(0.5, q1(0.5), 20.0);
  EXPECT_NEAR(epd_filtered_on_lattice(s, 2).at(std::vector<int>{0}), 0.034893956724669623637, 1e-9);
}

TEST(BandLimited, ReferenceValuesTwoDim) {
  const EpdSolution s(1.0, tri_q(), 3.0);
  const auto f = epd_filtered_on_lattice(s, 3);
  EXPECT_NEAR(f.at(std::vector<int>{0, 0}), 0.049962569458, 1e-8);
  EXPECT_NEAR(f.at(std::vector<int>{1, 2}), 0.057812313808049, 1e-8);
  EXPECT_NEAR(f.at(std::vector<int>{2, -1}), 0.0032002254007407, 1e-8);
}

TEST(BandLimited, MassOnLargeBox) {
  const EpdSolution s(1.0, q1(0.5), 5.0);
  EXPECT_NEAR(epd_filtered_on_lattice(s, 60).mass(), 1.0, 1e-4);
}

TEST(BandLimited, DoublingIsStable) {
  const EpdSolution s(1.0, q1(0.5), 5.0);
  FilteredOracleOptions a;
  a.quad_points_per_dim = 64;
  a.check_convergence = false;
  FilteredOracleOptions b = a;
  b.quad_points_per_dim = 128;
  const auto x = epd_filtered_on_lattice(s, 6, a);
  const auto y = epd_filtered_on_lattice(s, 6, b);
  for (std::size_t k = 0; k < x.size(); ++k) EXPECT_NEAR(x.values()[k], y.values()[k], 1e-9);
}

TEST(BandLimited, UnresolvedQuadratureIsReported) {
  const EpdSolution s(0.5, q1(0.5), 20.0);
  FilteredOracleOptions o;
  o.quad_points_per_dim = 8;
  try {
    (void)epd_filtered_on_lattice(s, 4, o);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::QuadratureUnresolved);
  }
  o.quad_points_per_dim = 12;
  EXPECT_THROW((void)epd_filtered_on_lattice(s, 4, o), Error);
}
