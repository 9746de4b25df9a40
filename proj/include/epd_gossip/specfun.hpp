#pragma once

// Gamma, Bessel J of real order, Jacobi polynomials and the edge-of-spectrum
// asymptotics of their normalized form.

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <string>

#include "error.hpp"

namespace epd_gossip::specfun {

/// Jacobi weight parameters; (1 - x)^alpha (1 + x)^beta on [-1, 1].
struct JacobiParams {
  double alpha;
  double beta;

  JacobiParams(double a, double b) : alpha(a), beta(b) {
    if (!(a > -1.0) || !(b > -1.0)) {
      throw Error(ErrorKind::InvalidParameters,
                  "Jacobi parameters must exceed -1 (alpha=" + std::to_string(a) +
                      ", beta=" + std::to_string(b) + ")");
    }
  }
};

inline double gamma_fn(double x) {
  if (!(x > 0.0)) throw Error(ErrorKind::DomainError, "gamma_fn needs x > 0");
  return std::tgamma(x);
}

namespace detail {

// Power series sum_k (-z^2/4)^k / (k! Gamma(k + nu + 1)), i.e. (z/2)^-nu J_nu(z).
inline double bessel_reduced_series(double nu, double z) {
  const double q = -0.25 * z * z;
  double term = 1.0 / gamma_fn(nu + 1.0);
  double sum = term;
  for (int k = 1; k < 500; ++k) {
    term *= q / (static_cast<double>(k) * (static_cast<double>(k) + nu));
    sum += term;
    if (std::abs(term) < 1e-17 * std::abs(sum) && k > 2) break;
  }
  return sum;
}

}  // namespace detail

/// Switch from the power series to the library large-argument routine.
inline constexpr double kBesselSeriesCutoff = 12.0;

/// J_order(z) for order >= 0, z >= 0.
inline double bessel_j(double order, double z) {
  if (!(order >= 0.0) || !(z >= 0.0)) {
    throw Error(ErrorKind::DomainError, "bessel_j needs order >= 0 and z >= 0");
  }
  if (z == 0.0) return order == 0.0 ? 1.0 : 0.0;
  if (z <= kBesselSeriesCutoff) {
    return std::pow(0.5 * z, order) * detail::bessel_reduced_series(order, z);
  }
  return std::cyl_bessel_j(order, z);
}

/// Gamma(nu + 1) (2/z)^nu J_nu(z); equals 1 at z = 0 and is smooth in z^2.
inline double bessel_normalized(double nu, double z) {
  if (z < 0.0) z = -z;
  if (z <= kBesselSeriesCutoff) return gamma_fn(nu + 1.0) * detail::bessel_reduced_series(nu, z);
  return gamma_fn(nu + 1.0) * std::pow(2.0 / z, nu) * bessel_j(nu, z);
}

/// P_n^{(alpha,beta)}(x) by the forward three-term recurrence.
inline double jacobi_poly(int n, const JacobiParams& p, double x) {
  if (n < 0) throw Error(ErrorKind::InvalidArgument, "jacobi_poly needs n >= 0");
  const double a = p.alpha;
  const double b = p.beta;
  if (n == 0) return 1.0;
  double prev = 1.0;
  double cur = 0.5 * (a + b + 2.0) * x + 0.5 * (a - b);
  for (int k = 1; k < n; ++k) {
    const double kd = k;
    const double s = 2.0 * kd + a + b;
    const double lead = 2.0 * (kd + 1.0) * (kd + a + b + 1.0) * s;
    const double next = ((s + 1.0) * ((s + 2.0) * s * x + a * a - b * b) * cur -
                         2.0 * (kd + a) * (kd + b) * (s + 2.0) * prev) /
                        lead;
    prev = cur;
    cur = next;
  }
  return cur;
}

/// P_n^{(alpha,beta)}(1) = binomial(n + alpha, n), as a running product.
inline double jacobi_at_one(int n, const JacobiParams& p) {
  double v = 1.0;
  for (int k = 1; k <= n; ++k) v *= (static_cast<double>(k) + p.alpha) / static_cast<double>(k);
  return v;
}

/// pi_n = P_n / P_n(1); exactly 1 at x = 1.
inline double jacobi_normalized(int n, const JacobiParams& p, double x) {
  if (x == 1.0) return 1.0;
  return jacobi_poly(n, p, x) / jacobi_at_one(n, p);
}

/// Limit of pi_n^{(d/2,0)}(1 - z^2/(2n^2)) as n -> infinity:
/// 2^{d/2} Gamma(d/2 + 1) z^{-d/2} J_{d/2}(z). Continuous at z = 0 with value 1.
inline double mehler_heine_limit(double d, double z) {
  if (z < 0.0) throw Error(ErrorKind::DomainError, "mehler_heine_limit needs z >= 0");
  return bessel_normalized(0.5 * d, z);
}

/// Constants in the two-branch sup bound for |pi_n^{(d/2,0)}|.
struct SupBoundConstants {
  double c1;
  double c2;
};

/// Bound for |pi_n^{(d/2,0)}(lambda)|:
///   c1 (arccos|lambda|)^{-d/2-1/2} n^{-d/2-1/2}  when |lambda| <= 1 - 1/n^2,
///   c2                                            otherwise.
/// Diagnostic only; the constants are calibrated, not derived.
inline double jacobi_sup_bound(int n, double lambda, double d, const SupBoundConstants& k) {
  const double nd = static_cast<double>(n);
  const double al = std::abs(lambda);
  if (n == 0 || al > 1.0 - 1.0 / (nd * nd)) return k.c2;
  const double e = -0.5 * d - 0.5;
  return k.c1 * std::pow(std::acos(al), e) * std::pow(nd, e);
}

/// Empirical constants: c2 is the max of |pi_n| near the edge, c1 the max of
/// |pi_n(lambda)| (arccos|lambda|)^{d/2+1/2} n^{d/2+1/2} in the bulk, over
/// 1 <= n <= n_max and a deterministic lambda sample. A relative safety
/// margin is applied to both.
inline SupBoundConstants calibrate_sup_bound(double d, int n_max = 500, int samples_per_n = 200,
                                             double margin = 1.25) {
  const JacobiParams p(0.5 * d, 0.0);
  std::mt19937_64 rng(20240611);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  double c1 = 0.0;
  double c2 = 0.0;
  const double e = 0.5 * d + 0.5;
  for (int n = 1; n <= n_max; ++n) {
    const double nd = n;
    const double edge = 1.0 - 1.0 / (nd * nd);
    for (int s = 0; s < samples_per_n; ++s) {
      // half the samples uniform in theta, half concentrated near the edges
      const double u = unit(rng);
      const double theta = (s % 2 == 0) ? u * std::numbers::pi : std::pow(u, 3.0) * std::numbers::pi;
      double lambda = std::cos(theta);
      if (s % 4 == 3) lambda = -lambda;
      const double v = std::abs(jacobi_normalized(n, p, lambda));
      if (std::abs(lambda) > edge) {
        c2 = std::max(c2, v);
      } else {
        c1 = std::max(c1, v * std::pow(std::acos(std::abs(lambda)), e) * std::pow(nd, e));
      }
    }
    c2 = std::max(c2, 1.0);
  }
  return {c1 * margin, c2 * margin};
}

/// Frozen output of calibrate_sup_bound(d) (n_max 500, margin 1.25), rounded
/// up. Other dimensions are calibrated on demand.
inline SupBoundConstants default_sup_bound_constants(int d) {
  switch (d) {
    case 1: return {1.65, 1.25};
    case 2: return {2.77, 1.25};
    case 3: return {5.46, 1.25};
    case 4: return {12.23, 1.25};
    default: return calibrate_sup_bound(d);
  }
}

}  // namespace epd_gossip::specfun
