#pragma once

#include <cmath>
#include <cstddef>
#include <numbers>
#include <vector>

#include "error.hpp"

namespace epd_gossip::quadrature {

struct Rule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

/// Gauss-Legendre nodes and weights on [-1, 1] (Newton on P_n, Tricomi start).
inline Rule gauss_legendre(std::size_t n) {
  if (n == 0) throw Error(ErrorKind::InvalidArgument, "Gauss-Legendre rule needs at least one node");
  if (n == 1) return Rule{{0.0}, {2.0}};
  Rule rule;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  const double nd = static_cast<double>(n);
  for (std::size_t i = 0; i < (n + 1) / 2; ++i) {
    double x = std::cos(std::numbers::pi * (static_cast<double>(i) + 0.75) / (nd + 0.5));
    double dp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0;
      double p1 = x;
      for (std::size_t k = 2; k <= n; ++k) {
        const double kd = static_cast<double>(k);
        const double p2 = ((2.0 * kd - 1.0) * x * p1 - (kd - 1.0) * p0) / kd;
        p0 = p1;
        p1 = p2;
      }
      dp = nd * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    rule.nodes[i] = -x;
    rule.nodes[n - 1 - i] = x;
    rule.weights[i] = w;
    rule.weights[n - 1 - i] = w;
  }
  return rule;
}

/// Composite Gauss-Legendre on [a, b]: `panels` equal panels of `order` nodes each.
inline Rule composite_gauss_legendre(double a, double b, std::size_t panels, std::size_t order = 8) {
  const Rule base = gauss_legendre(order);
  Rule rule;
  rule.nodes.reserve(panels * order);
  rule.weights.reserve(panels * order);
  const double h = (b - a) / static_cast<double>(panels);
  for (std::size_t p = 0; p < panels; ++p) {
    const double mid = a + (static_cast<double>(p) + 0.5) * h;
    for (std::size_t k = 0; k < order; ++k) {
      rule.nodes.push_back(mid + 0.5 * h * base.nodes[k]);
      rule.weights.push_back(0.5 * h * base.weights[k]);
    }
  }
  return rule;
}

/// Tanh-sinh (double exponential) rule on [a, b]. Tolerates integrable
/// algebraic endpoint singularities; nodes never touch the endpoints.
template <typename F>
double tanh_sinh(F&& f, double a, double b, int levels = 7) {
  const double half = 0.5 * (b - a);
  const double h = std::ldexp(1.0, -levels + 1) * 0.5;
  const double t_max = 4.0;
  double sum = 0.0;
  const int steps = static_cast<int>(std::ceil(t_max / h));
  for (int k = -steps; k <= steps; ++k) {
    const double t = k * h;
    const double s = 0.5 * std::numbers::pi * std::sinh(t);
    const double c = std::cosh(s);
    const double x = std::tanh(s);
    const double w = 0.5 * std::numbers::pi * std::cosh(t) / (c * c);
    // distance to the nearer endpoint, computed without cancellation
    const double gap = 1.0 / (std::exp(std::abs(s)) * c);
    if (gap * half <= 0.0) continue;
    const double y = x >= 0.0 ? b - half * gap : a + half * gap;
    if (y <= a || y >= b) continue;
    sum += w * f(y);
  }
  return sum * h * half;
}

}  // namespace epd_gossip::quadrature
