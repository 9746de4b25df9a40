#pragma once

// Closed-form fundamental solutions of the limiting PDEs:
//   heat   d_t u = (1/2) div(Q grad u)
//   EPD    d_tt u + (2 alpha + 1)/t d_t u = div(Q grad u)
// and the lattice samples of the EPD solution band-limited to [-pi, pi]^d.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <limits>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "error.hpp"
#include "lattice.hpp"
#include "quadrature.hpp"
#include "specfun.hpp"

namespace epd_gossip {

/// Symmetric positive-definite covariance with its derived quantities.
class Covariance {
 public:
  explicit Covariance(const Eigen::MatrixXd& q) : dim_(static_cast<int>(q.rows())) {
    if (q.rows() != q.cols() || q.rows() < 1) {
      throw Error(ErrorKind::InvalidArgument, "covariance must be a nonempty square matrix");
    }
    if ((q - q.transpose()).cwiseAbs().maxCoeff() > 1e-12) {
      throw Error(ErrorKind::InvalidArgument, "covariance must be symmetric");
    }
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(q);
    const Eigen::VectorXd ev = eig.eigenvalues();
    if (ev.minCoeff() <= 0.0) throw Error(ErrorKind::InvalidArgument, "covariance must be positive definite");
    const Eigen::MatrixXd& vecs = eig.eigenvectors();
    q_ = q;
    inv_ = vecs * ev.cwiseInverse().asDiagonal() * vecs.transpose();
    sqrt_ = vecs * ev.cwiseSqrt().asDiagonal() * vecs.transpose();
    inv_sqrt_ = vecs * ev.cwiseSqrt().cwiseInverse().asDiagonal() * vecs.transpose();
    det_ = ev.prod();
    max_eig_ = ev.maxCoeff();
    flat_q_.assign(q_.data(), q_.data() + q_.size());
    flat_inv_.assign(inv_.data(), inv_.data() + inv_.size());
  }

  [[nodiscard]] int dim() const noexcept { return dim_; }
  [[nodiscard]] const Eigen::MatrixXd& matrix() const noexcept { return q_; }
  [[nodiscard]] const Eigen::MatrixXd& inverse() const noexcept { return inv_; }
  [[nodiscard]] const Eigen::MatrixXd& sqrt() const noexcept { return sqrt_; }
  [[nodiscard]] const Eigen::MatrixXd& inverse_sqrt() const noexcept { return inv_sqrt_; }
  [[nodiscard]] double det() const noexcept { return det_; }
  [[nodiscard]] double max_eigenvalue() const noexcept { return max_eig_; }

  /// <y, Q^{-1} y>
  [[nodiscard]] double inverse_form(std::span<const double> y) const { return form(flat_inv_, y); }
  /// <xi, Q xi>
  [[nodiscard]] double form(std::span<const double> xi) const { return form(flat_q_, xi); }

 private:
  [[nodiscard]] double form(const std::vector<double>& m, std::span<const double> y) const {
    if (static_cast<int>(y.size()) != dim_) throw Error(ErrorKind::DimensionMismatch, "vector length");
    double s = 0.0;
    for (int i = 0; i < dim_; ++i) {
      double row = 0.0;
      for (int j = 0; j < dim_; ++j) row += m[static_cast<std::size_t>(i + j * dim_)] * y[j];
      s += y[i] * row;
    }
    return s;
  }

  int dim_;
  Eigen::MatrixXd q_, inv_, sqrt_, inv_sqrt_;
  double det_ = 0.0;
  double max_eig_ = 0.0;
  std::vector<double> flat_q_, flat_inv_;
};

inline constexpr double kOracleMassTol = 1e-6;

namespace detail {

// Integral over R^d (d <= 2) of g(y), where g is supported on or concentrated
// in the ellipsoid <y, Q^{-1} y> <= scale^2. The map y = scale Q^{1/2} s
// turns it into a radial integral over |s| <= radius.
template <typename G>
double ellipsoidal_integral(const Covariance& cov, double scale, double radius, bool endpoint_singular, G&& g) {
  const int d = cov.dim();
  const Eigen::MatrixXd& root = cov.sqrt();
  const double jac = std::pow(scale, d) * std::sqrt(cov.det());
  auto radial = [&](auto&& f) {
    if (endpoint_singular) return quadrature::tanh_sinh(f, 0.0, radius);
    const auto rule = quadrature::composite_gauss_legendre(0.0, radius, 24, 8);
    double s = 0.0;
    for (std::size_t k = 0; k < rule.nodes.size(); ++k) s += rule.weights[k] * f(rule.nodes[k]);
    return s;
  };
  if (d == 1) {
    const double r0 = root(0, 0);
    auto f = [&](double s) {
      const double a = scale * r0 * s;
      const double b = -a;
      return g(std::span<const double>(&a, 1)) + g(std::span<const double>(&b, 1));
    };
    return jac * radial(f);
  }
  if (d == 2) {
    constexpr int kAngles = 32;
    auto f = [&](double r) {
      double acc = 0.0;
      for (int k = 0; k < kAngles; ++k) {
        const double th = 2.0 * std::numbers::pi * k / kAngles;
        const double s0 = r * std::cos(th);
        const double s1 = r * std::sin(th);
        const double y[2] = {scale * (root(0, 0) * s0 + root(0, 1) * s1),
                             scale * (root(1, 0) * s0 + root(1, 1) * s1)};
        acc += g(std::span<const double>(y, 2));
      }
      return r * acc * 2.0 * std::numbers::pi / kAngles;
    };
    return jac * radial(f);
  }
  throw Error(ErrorKind::InvalidArgument, "ellipsoidal integral implemented for d <= 2");
}

}  // namespace detail

/// Gaussian fundamental solution of the heat equation.
class HeatSolution {
 public:
  HeatSolution(const Eigen::MatrixXd& q, double t, bool check_mass = true) : cov_(q), t_(t) {
    if (!(t > 0.0)) throw Error(ErrorKind::DomainError, "heat solution needs t > 0");
    const int d = cov_.dim();
    norm_ = 1.0 / (std::pow(2.0 * std::numbers::pi * t, 0.5 * d) * std::sqrt(cov_.det()));
    if (check_mass && d <= 2) {
      const double m = mass();
      if (std::abs(m - 1.0) > kOracleMassTol) {
        throw Error(ErrorKind::DomainError, "heat oracle mass " + std::to_string(m) + " != 1");
      }
    }
  }

  [[nodiscard]] int dim() const noexcept { return cov_.dim(); }
  [[nodiscard]] double time() const noexcept { return t_; }
  [[nodiscard]] const Covariance& covariance() const noexcept { return cov_; }

  /// (2 pi t)^{-d/2} (det Q)^{-1/2} exp(-<y, Q^{-1} y> / (2t))
  [[nodiscard]] double operator()(std::span<const double> y) const {
    return norm_ * std::exp(-cov_.inverse_form(y) / (2.0 * t_));
  }

  /// Numerical total mass (d <= 2).
  [[nodiscard]] double mass() const {
    return detail::ellipsoidal_integral(cov_, std::sqrt(t_), 12.0, false,
                                        [this](std::span<const double> y) { return (*this)(y); });
  }

 private:
  Covariance cov_;
  double t_;
  double norm_ = 0.0;
};

inline double heat_eval(const HeatSolution& sol, std::span<const double> y) { return sol(y); }

/// Fundamental solution of the EPD equation with damping (2 alpha + 1)/t,
/// supported on the ellipsoid <y, Q^{-1} y> <= t^2.
class EpdSolution {
 public:
  EpdSolution(double alpha, const Eigen::MatrixXd& q, double t, bool check_mass = true)
      : alpha_(alpha), cov_(q), t_(t) {
    const int d = cov_.dim();
    if (!(alpha > 0.5 * d - 1.0)) {
      throw Error(ErrorKind::DomainError, "EPD fundamental solution needs alpha > d/2 - 1");
    }
    if (!(t > 0.0)) throw Error(ErrorKind::DomainError, "EPD solution needs t > 0");
    exponent_ = alpha - 0.5 * d;
    coeff_ = specfun::gamma_fn(alpha + 1.0) /
             (std::pow(std::numbers::pi, 0.5 * d) * specfun::gamma_fn(alpha + 1.0 - 0.5 * d) *
              std::sqrt(cov_.det()) * std::pow(t, 2.0 * alpha));
    if (check_mass && d <= 2) {
      const double m = mass();
      if (std::abs(m - 1.0) > kOracleMassTol) {
        throw Error(ErrorKind::DomainError, "EPD oracle mass " + std::to_string(m) + " != 1");
      }
    }
  }

  [[nodiscard]] double alpha() const noexcept { return alpha_; }
  [[nodiscard]] int dim() const noexcept { return cov_.dim(); }
  [[nodiscard]] double time() const noexcept { return t_; }
  [[nodiscard]] const Covariance& covariance() const noexcept { return cov_; }

  /// Gamma(a+1) / (pi^{d/2} Gamma(a+1-d/2) sqrt(det Q)) t^{-2a} (t^2 - <y,Q^{-1}y>)_+^{a-d/2}
  [[nodiscard]] double operator()(std::span<const double> y) const {
    const double gap = t_ * t_ - cov_.inverse_form(y);
    if (gap < 0.0) return 0.0;
    if (gap == 0.0) {
      if (exponent_ > 0.0) return 0.0;
      if (exponent_ < 0.0) return std::numeric_limits<double>::infinity();
    }
    return coeff_ * std::pow(gap, exponent_);
  }

  /// Numerical total mass (d <= 2).
  [[nodiscard]] double mass() const {
    return detail::ellipsoidal_integral(cov_, t_, 1.0, true,
                                        [this](std::span<const double> y) { return (*this)(y); });
  }

 private:
  double alpha_;
  Covariance cov_;
  double t_;
  double exponent_ = 0.0;
  double coeff_ = 0.0;
};

inline double epd_eval(const EpdSolution& sol, std::span<const double> y) { return sol(y); }

/// The alpha = d/2 solution written as a constant times the indicator of the
/// closed ellipsoid. Separate code path from epd_eval.
inline double epd_eval_indicator(const Covariance& cov, double t, std::span<const double> y) {
  const int d = cov.dim();
  const double level = cov.inverse_form(y);
  if (level > t * t) return 0.0;
  return specfun::gamma_fn(0.5 * d + 1.0) /
         (std::pow(std::numbers::pi, 0.5 * d) * std::sqrt(cov.det()) * std::pow(t, d));
}

/// u_hat(t, xi) = 2^a Gamma(a+1) <xi,Q xi>^{-a/2} t^{-a} J_a(t <xi,Q xi>^{1/2}); 1 at xi = 0.
inline double epd_fourier(const EpdSolution& sol, std::span<const double> xi) {
  const double s = std::sqrt(sol.covariance().form(xi));
  return specfun::bessel_normalized(sol.alpha(), sol.time() * s);
}

/// prod_i sin(pi x_i) / (pi x_i)
inline double sinc_filter(std::span<const double> x) {
  double p = 1.0;
  for (double xi : x) {
    if (xi == 0.0) continue;
    // sin(pi k) is exactly zero at integers; std::sin(pi * k) is not
    if (xi == std::round(xi)) return 0.0;
    p *= std::sin(std::numbers::pi * xi) / (std::numbers::pi * xi);
  }
  return p;
}

inline int default_quadrature_points(double t) {
  const int m = std::max(64, 8 * static_cast<int>(std::ceil(t)));
  return (m + 7) / 8 * 8;
}

struct FilteredOracleOptions {
  int quad_points_per_dim = 0;  ///< 0 selects default_quadrature_points(t)
  bool check_convergence = true;
  double convergence_tol = 1e-6;
  double imaginary_tol = 1e-8;
};

namespace detail {

// (2 pi)^{-d} sum_j w_j u_hat(xi_j) exp(-i <xi_j, v>) on v in [-m, m]^d, with a
// tensor-product composite Gauss-Legendre rule of `points` nodes per dimension.
// Contracts one axis at a time.
inline ScalarField band_limited_samples(const EpdSolution& sol, int m, int points, double imaginary_tol) {
  using cplx = std::complex<double>;
  const int d = sol.dim();
  if (points % 8 != 0 || points < 8) {
    throw Error(ErrorKind::InvalidArgument, "quadrature points per dimension must be a positive multiple of 8");
  }
  const auto rule = quadrature::composite_gauss_legendre(-std::numbers::pi, std::numbers::pi,
                                                         static_cast<std::size_t>(points / 8), 8);
  const std::size_t M = rule.nodes.size();
  const std::size_t side = 2 * static_cast<std::size_t>(m) + 1;

  // values on the node grid, weights folded in
  std::size_t total = 1;
  for (int i = 0; i < d; ++i) total *= M;
  std::vector<cplx> data(total);
  std::vector<double> xi(d);
  for (std::size_t k = 0; k < total; ++k) {
    std::size_t r = k;
    double w = 1.0;
    for (int i = d - 1; i >= 0; --i) {
      const std::size_t j = r % M;
      r /= M;
      xi[i] = rule.nodes[j];
      w *= rule.weights[j];
    }
    data[k] = w * epd_fourier(sol, xi);
  }

  // phase table: e^{-i xi_j v}, v = -m..m
  std::vector<cplx> phase(side * M);
  for (std::size_t a = 0; a < side; ++a) {
    const double v = static_cast<double>(a) - m;
    for (std::size_t j = 0; j < M; ++j) phase[a * M + j] = std::polar(1.0, -rule.nodes[j] * v);
  }

  // dims[i] is the current extent of axis i
  std::vector<std::size_t> dims(d, M);
  for (int axis = d - 1; axis >= 0; --axis) {
    std::size_t outer = 1;
    for (int i = 0; i < axis; ++i) outer *= dims[i];
    std::size_t inner = 1;
    for (int i = axis + 1; i < d; ++i) inner *= dims[i];
    std::vector<cplx> next(outer * side * inner);
    for (std::size_t o = 0; o < outer; ++o) {
      for (std::size_t a = 0; a < side; ++a) {
        cplx* dst = next.data() + (o * side + a) * inner;
        const cplx* ph = phase.data() + a * M;
        for (std::size_t j = 0; j < M; ++j) {
          const cplx* src = data.data() + (o * M + j) * inner;
          const cplx p = ph[j];
          for (std::size_t c = 0; c < inner; ++c) dst[c] += p * src[c];
        }
      }
    }
    data = std::move(next);
    dims[axis] = side;
  }

  ScalarField out(d, m);
  const double norm = std::pow(2.0 * std::numbers::pi, -d);
  double worst_imag = 0.0;
  auto vals = out.values();
  for (std::size_t k = 0; k < vals.size(); ++k) {
    vals[k] = norm * data[k].real();
    worst_imag = std::max(worst_imag, norm * std::abs(data[k].imag()));
  }
  if (worst_imag > imaginary_tol) {
    throw Error(ErrorKind::QuadratureUnresolved,
                "imaginary residue " + std::to_string(worst_imag) + " in band-limited samples");
  }
  return out;
}

}  // namespace detail

/// v -> (u(t, .) * psi)(v) on [-m, m]^d, via the band-limited Fourier integral.
/// With convergence checking on, the rule is run at M and 2M nodes per
/// dimension and the finer result is returned.
inline ScalarField epd_filtered_on_lattice(const EpdSolution& sol, int box_radius,
                                           const FilteredOracleOptions& opt = {}) {
  if (box_radius < 0) throw Error(ErrorKind::InvalidArgument, "box radius must be >= 0");
  // the integrand oscillates at frequency up to max(t sqrt(lambda_max), box radius)
  const double reach = std::max(sol.time() * std::sqrt(sol.covariance().max_eigenvalue()), static_cast<double>(box_radius));
  const int points = opt.quad_points_per_dim > 0 ? opt.quad_points_per_dim : default_quadrature_points(reach);
  ScalarField coarse = detail::band_limited_samples(sol, box_radius, points, opt.imaginary_tol);
  if (!opt.check_convergence) return coarse;
  ScalarField fine = detail::band_limited_samples(sol, box_radius, 2 * points, opt.imaginary_tol);
  double worst = 0.0;
  const auto a = coarse.values();
  const auto b = fine.values();
  for (std::size_t k = 0; k < a.size(); ++k) worst = std::max(worst, std::abs(a[k] - b[k]));
  if (worst > opt.convergence_tol) {
    throw Error(ErrorKind::QuadratureUnresolved, "doubling quadrature points from " + std::to_string(points) +
                                                     " changed values by " + std::to_string(worst));
  }
  return fine;
}

}  // namespace epd_gossip
