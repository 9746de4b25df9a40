#pragma once

// Fourier-side tools for lattice fields and the numerical checks of the
// limit theorems (local CLT, weak/local EPD convergence, sharp l2 rate).

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdio>
#include <cstdint>
#include <map>
#include <numbers>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "error.hpp"
#include "gossip.hpp"
#include "lattice.hpp"
#include "pde_oracles.hpp"
#include "quadrature.hpp"
#include "schedules.hpp"
#include "specfun.hpp"

namespace epd_gossip {

/// x_hat(xi) = sum_v exp(i <xi, v>) x(v), summed over the stored box.
inline std::complex<double> field_fourier(const ScalarField& x, std::span<const double> xi) {
  if (static_cast<int>(xi.size()) != x.dim()) throw Error(ErrorKind::DimensionMismatch, "frequency length");
  const auto vals = x.values();
  double re = 0.0;
  double im = 0.0;
  for (std::size_t k = 0; k < vals.size(); ++k) {
    if (vals[k] == 0.0) continue;
    const Offset v = x.coords(k);
    double phase = 0.0;
    for (int i = 0; i < x.dim(); ++i) phase += xi[i] * v[i];
    re += vals[k] * std::cos(phase);
    im += vals[k] * std::sin(phase);
  }
  return {re, im};
}

/// (1/M^d) sum_j |x_hat(xi_j)|^2 on the uniform grid xi_j = -pi + 2 pi j / M.
/// Exact (equal to sum_v x(v)^2) once M >= 2 m + 1.
inline double plancherel_l2(const ScalarField& x, int quad_points_per_dim) {
  using cplx = std::complex<double>;
  const int m = x.box_radius();
  if (quad_points_per_dim < 2 * m + 1) {
    throw Error(ErrorKind::ResolutionTooLow, "Plancherel grid needs M >= 2*box_radius + 1 = " +
                                                 std::to_string(2 * m + 1));
  }
  const int d = x.dim();
  const std::size_t M = static_cast<std::size_t>(quad_points_per_dim);
  const std::size_t side = x.side();
  std::vector<cplx> phase(M * side);
  for (std::size_t j = 0; j < M; ++j) {
    const double xi = -std::numbers::pi + 2.0 * std::numbers::pi * static_cast<double>(j) / static_cast<double>(M);
    for (std::size_t a = 0; a < side; ++a) {
      phase[j * side + a] = std::polar(1.0, xi * (static_cast<double>(a) - m));
    }
  }
  // partial DFT along each axis in turn, vertex axis -> frequency axis
  std::vector<cplx> data(x.values().begin(), x.values().end());
  std::vector<std::size_t> dims(d, side);
  for (int axis = d - 1; axis >= 0; --axis) {
    std::size_t outer = 1;
    for (int i = 0; i < axis; ++i) outer *= dims[i];
    std::size_t inner = 1;
    for (int i = axis + 1; i < d; ++i) inner *= dims[i];
    std::vector<cplx> next(outer * M * inner);
    for (std::size_t o = 0; o < outer; ++o) {
      for (std::size_t j = 0; j < M; ++j) {
        cplx* dst = next.data() + (o * M + j) * inner;
        const cplx* ph = phase.data() + j * side;
        for (std::size_t a = 0; a < side; ++a) {
          const cplx* src = data.data() + (o * side + a) * inner;
          const cplx p = ph[a];
          for (std::size_t c = 0; c < inner; ++c) dst[c] += p * src[c];
        }
      }
    }
    data = std::move(next);
    dims[axis] = M;
  }
  double s = 0.0;
  for (const auto& z : data) s += std::norm(z);
  return s / static_cast<double>(data.size());
}

/// Fourier symbol of the second-order recursion at a single frequency:
/// runs the scalar recurrence with omega replaced by `symbol`.
inline std::complex<double> schedule_symbol(const CoefficientSchedule& s, std::complex<double> symbol,
                                            std::int64_t n) {
  std::complex<double> prev = 0.0;
  std::complex<double> cur = 1.0;
  for (std::int64_t k = 0; k < n; ++k) {
    const auto t = s(k);
    const std::complex<double> next = t.a * symbol * cur + t.b * cur - t.c * prev;
    prev = cur;
    cur = next;
  }
  return cur;
}

/// (1/M^d) sum_j pi_n(omega_hat(xi_j))^2 on the uniform grid: the l2 norm of the
/// Jacobi iterate computed purely on the frequency side (symmetric filters).
/// Exact for M >= 2 n R + 1.
inline double jacobi_iterate_l2_spectral(const LatticeFilter& f, const specfun::JacobiParams& p, int n,
                                         int quad_points_per_dim) {
  const int d = f.dim();
  const std::size_t M = static_cast<std::size_t>(quad_points_per_dim);
  std::size_t total = 1;
  for (int i = 0; i < d; ++i) total *= M;
  std::vector<double> xi(d);
  double s = 0.0;
  for (std::size_t k = 0; k < total; ++k) {
    std::size_t r = k;
    for (int i = d - 1; i >= 0; --i) {
      xi[i] = -std::numbers::pi + 2.0 * std::numbers::pi * static_cast<double>(r % M) / static_cast<double>(M);
      r /= M;
    }
    const double lam = std::clamp(filter_fourier(f, xi).real(), -1.0, 1.0);
    const double v = specfun::jacobi_normalized(n, p, lam);
    s += v * v;
  }
  return s / static_cast<double>(total);
}

enum class TheoremId { CLT, LocalCLT, WeakEPD, LocalEPD, SharpRate };

constexpr const char* to_string(TheoremId id) {
  switch (id) {
    case TheoremId::CLT: return "CLT";
    case TheoremId::LocalCLT: return "LocalCLT";
    case TheoremId::WeakEPD: return "WeakEPD";
    case TheoremId::LocalEPD: return "LocalEPD";
    case TheoremId::SharpRate: return "SharpRate";
  }
  return "?";
}

struct SeriesPoint {
  double n;  ///< round index, or epsilon for the weak-EPD check
  double metric;
};

struct TheoremReport {
  TheoremId theorem_id;
  std::map<std::string, std::string> params;
  std::vector<SeriesPoint> series;
  std::vector<SeriesPoint> auxiliary;  ///< exploratory side series, never part of the verdict
  bool verdict = false;
  std::string note;

  [[nodiscard]] bool strictly_decreasing() const {
    for (std::size_t i = 1; i < series.size(); ++i) {
      if (!(series[i].metric < series[i - 1].metric)) return false;
    }
    return !series.empty();
  }
};

namespace detail {

inline bool decreasing_tail(const std::vector<SeriesPoint>& s, std::size_t window) {
  if (s.size() < 2) return false;
  const std::size_t start = s.size() > window ? s.size() - window : 0;
  for (std::size_t i = start + 1; i < s.size(); ++i) {
    if (!(s[i].metric < s[i - 1].metric)) return false;
  }
  return true;
}

inline LatticeFilter require_aperiodic(const LatticeFilter& f) {
  try {
    return certify_aperiodic(f);
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::PeriodicityDetected) throw Error(ErrorKind::NotAperiodic, e.what());
    throw;
  }
}

inline void require_symmetric(const LatticeFilter& f) {
  if (!f.is_symmetric()) throw Error(ErrorKind::NotSymmetric, "filter '" + f.name() + "' is not symmetric");
}

inline specfun::JacobiParams require_jacobi(const CoefficientSchedule& s) {
  auto p = s.jacobi_params();
  if (!p) throw Error(ErrorKind::InvalidParameters, "schedule " + s.id() + " is not a Jacobi family");
  return *p;
}

inline std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace detail

inline constexpr double kWeakEpdRoundingFloor = 1e-12;

struct LocalCltOptions {
  double threshold = 0.05;
  std::size_t monotone_window = 3;
  RunOptions run;
};

/// e_n = n^{d/2} sup_v |x_n(v) - u_heat(n, v)| for simple gossip.
inline TheoremReport verify_local_clt(const LatticeFilter& filter, const std::vector<std::int64_t>& rounds,
                                      const LocalCltOptions& opt = {}) {
  const LatticeFilter f = detail::require_aperiodic(filter);
  const int d = f.dim();
  const std::set<std::int64_t> snaps(rounds.begin(), rounds.end());
  const std::int64_t n_max = rounds.empty() ? 0 : *snaps.rbegin();
  const IterationTrace trace = run_simple(f, n_max, snaps, opt.run);

  TheoremReport rep{TheoremId::LocalCLT, {}, {}, {}, false, ""};
  rep.params["filter"] = f.name();
  rep.params["threshold"] = detail::fmt(opt.threshold);
  double max_tail = 0.0;
  for (std::int64_t n : snaps) {
    if (n == 0) continue;
    const ScalarField& x = trace.snapshot(n);
    const HeatSolution heat(f.covariance(), static_cast<double>(n), false);
    const auto vals = x.values();
    double worst = 0.0;
    std::vector<double> y(d);
    for (std::size_t k = 0; k < vals.size(); ++k) {
      const Offset v = x.coords(k);
      for (int i = 0; i < d; ++i) y[i] = v[i];
      worst = std::max(worst, std::abs(vals[k] - heat(y)));
    }
    // outside the box x_n vanishes; the heat kernel there is at most its value
    // on the nearest face |y_i| = box + 1
    double qmax = 0.0;
    for (int i = 0; i < d; ++i) qmax = std::max(qmax, f.covariance()(i, i));
    const double c = x.box_radius() + 1.0;
    const double tail = std::exp(-c * c / (2.0 * static_cast<double>(n) * qmax)) /
                        (std::pow(2.0 * std::numbers::pi * static_cast<double>(n), 0.5 * d) *
                         std::sqrt(f.covariance().determinant()));
    worst = std::max(worst, tail);
    const double scale = std::pow(static_cast<double>(n), 0.5 * d);
    if (n >= 10) max_tail = std::max(max_tail, scale * tail);
    rep.series.push_back({static_cast<double>(n), scale * worst});
  }
  rep.params["outside_box_residual"] = detail::fmt(max_tail);
  rep.verdict = detail::decreasing_tail(rep.series, opt.monotone_window) && !rep.series.empty() &&
                rep.series.back().metric < opt.threshold;
  return rep;
}

/// |pi_{floor(t/eps)}(omega_hat(eps xi)) - u_hat(t, xi)| for each eps.
/// The series is indexed by eps; the verdict asks the gap to shrink with eps.
inline TheoremReport verify_weak_epd_pointwise(const LatticeFilter& filter, const CoefficientSchedule& schedule,
                                               std::span<const double> xi, double t,
                                               const std::vector<double>& eps_list) {
  detail::require_symmetric(filter);
  const LatticeFilter f = detail::require_aperiodic(filter);
  const specfun::JacobiParams p = detail::require_jacobi(schedule);
  if (!(t > 0.0)) throw Error(ErrorKind::InvalidArgument, "t must be > 0");
  const EpdSolution limit(p.alpha, f.covariance(), t, false);
  const double target = epd_fourier(limit, xi);

  TheoremReport rep{TheoremId::WeakEPD, {}, {}, {}, false, ""};
  rep.params["filter"] = f.name();
  rep.params["schedule"] = schedule.id();
  rep.params["t"] = detail::fmt(t);
  std::string xs;
  for (double c : xi) xs += (xs.empty() ? "" : ",") + detail::fmt(c);
  rep.params["xi"] = xs;
  std::vector<double> scaled(xi.size());
  for (double eps : eps_list) {
    if (!(eps > 0.0)) throw Error(ErrorKind::InvalidArgument, "eps must be > 0");
    // t/eps is meant to be an integer for the listed eps; guard against 1/0.1 = 9.999...
    const auto n = static_cast<int>(std::floor(t / eps + 1e-9));
    for (std::size_t i = 0; i < xi.size(); ++i) scaled[i] = eps * xi[i];
    const double lam = std::clamp(filter_fourier(f, scaled).real(), -1.0, 1.0);
    rep.series.push_back({eps, std::abs(specfun::jacobi_normalized(n, p, lam) - target)});
  }
  // eps_list is given coarse to fine. Gaps at rounding level (xi = 0, where
  // the weights sum to 1 only up to an ulp) count as converged.
  bool ok = rep.series.size() >= 2;
  for (std::size_t i = 1; i < rep.series.size(); ++i) {
    const double before = rep.series[i - 1].metric;
    const double after = rep.series[i].metric;
    if (!(after < before || after <= kWeakEpdRoundingFloor)) ok = false;
  }
  rep.verdict = ok;
  return rep;
}

struct LocalEpdOptions {
  std::size_t monotone_window = 3;
  int box_margin = 5;
  FilteredOracleOptions quadrature;
  RunOptions run;
};

/// E_n = n^d sum_v (x_n(v) - (u(n,.) * psi)(v))^2 for the Jacobi iteration.
/// The auxiliary series carries the same quantity without the sinc filter.
inline TheoremReport verify_local_epd(const LatticeFilter& filter, const CoefficientSchedule& schedule,
                                      const std::vector<std::int64_t>& rounds, const LocalEpdOptions& opt = {}) {
  detail::require_symmetric(filter);
  const LatticeFilter f = detail::require_aperiodic(filter);
  const specfun::JacobiParams p = detail::require_jacobi(schedule);
  const int d = f.dim();
  const std::set<std::int64_t> snaps(rounds.begin(), rounds.end());
  const std::int64_t n_max = rounds.empty() ? 0 : *snaps.rbegin();
  const IterationTrace trace = run_second_order(f, schedule, n_max, snaps, opt.run);

  TheoremReport rep{TheoremId::LocalEPD, {}, {}, {}, false, ""};
  rep.params["filter"] = f.name();
  rep.params["schedule"] = schedule.id();
  for (std::int64_t n : snaps) {
    if (n == 0) continue;  // Dirac against a t = 0 oracle is undefined
    const double t = static_cast<double>(n);
    const int box = static_cast<int>(n) * f.radius() + opt.box_margin;
    const ScalarField x = trace.snapshot(n).embedded(box);
    const EpdSolution sol(p.alpha, f.covariance(), t, false);
    const ScalarField filtered = epd_filtered_on_lattice(sol, box, opt.quadrature);
    const auto xv = x.values();
    const auto uv = filtered.values();
    double err = 0.0;
    double raw = 0.0;
    std::vector<double> y(d);
    for (std::size_t k = 0; k < xv.size(); ++k) {
      const double e = xv[k] - uv[k];
      err += e * e;
      const Offset v = x.coords(k);
      for (int i = 0; i < d; ++i) y[i] = v[i];
      const double u = sol(y);
      const double r = xv[k] - (std::isfinite(u) ? u : 0.0);
      raw += r * r;
    }
    const double scale = std::pow(t, d);
    rep.series.push_back({t, scale * err});
    rep.auxiliary.push_back({t, scale * raw});
  }
  rep.verdict = detail::decreasing_tail(rep.series, opt.monotone_window);
  rep.note = "auxiliary series: unfiltered n^d sum (x_n - u(n,v))^2, exploratory";
  return rep;
}

/// (2 pi)^{-d} int_{[-pi,pi]^d} (pi_n(omega_hat(xi)) - u_hat(n, xi))^2 dxi:
/// the frequency-side value of the local EPD error (before the n^d scaling).
inline double local_epd_error_spectral(const LatticeFilter& f, const specfun::JacobiParams& p, int n,
                                       int quad_points_per_dim) {
  const int d = f.dim();
  const EpdSolution sol(p.alpha, f.covariance(), static_cast<double>(n), false);
  const auto rule = quadrature::composite_gauss_legendre(-std::numbers::pi, std::numbers::pi,
                                                         static_cast<std::size_t>(quad_points_per_dim / 8), 8);
  const std::size_t M = rule.nodes.size();
  std::size_t total = 1;
  for (int i = 0; i < d; ++i) total *= M;
  std::vector<double> xi(d);
  double s = 0.0;
  for (std::size_t k = 0; k < total; ++k) {
    std::size_t r = k;
    double w = 1.0;
    for (int i = d - 1; i >= 0; --i) {
      xi[i] = rule.nodes[r % M];
      w *= rule.weights[r % M];
      r /= M;
    }
    const double lam = std::clamp(filter_fourier(f, xi).real(), -1.0, 1.0);
    const double diff = specfun::jacobi_normalized(n, p, lam) - epd_fourier(sol, xi);
    s += w * diff * diff;
  }
  return s / std::pow(2.0 * std::numbers::pi, d);
}

/// 1 / ((det Q)^{1/2} |B(0,1)|) with |B(0,1)| = pi^{d/2} / Gamma(d/2 + 1).
inline double sharp_rate_constant(const LatticeFilter& f) {
  const int d = f.dim();
  const double ball = std::pow(std::numbers::pi, 0.5 * d) / specfun::gamma_fn(0.5 * d + 1.0);
  return 1.0 / (std::sqrt(f.covariance().determinant()) * ball);
}

struct SharpRatePoint {
  std::int64_t n;
  double l2_sq;
  double scaled;     ///< n^d l2_sq
  double predicted;  ///< sharp_rate_constant
  double ratio;      ///< scaled / predicted
};

struct SharpRateReport {
  std::string filter_id;
  std::string schedule_id;
  double predicted_constant = 0.0;
  std::vector<SharpRatePoint> series;
  double tolerance = 0.05;
  bool verdict = false;

  /// least-squares slope of log(l2_sq) against log(n) over rounds in [lo, hi]
  [[nodiscard]] double loglog_slope(std::int64_t lo, std::int64_t hi) const {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int k = 0;
    for (const auto& p : series) {
      if (p.n < lo || p.n > hi) continue;
      const double lx = std::log(static_cast<double>(p.n));
      const double ly = std::log(p.l2_sq);
      sx += lx;
      sy += ly;
      sxx += lx * lx;
      sxy += lx * ly;
      ++k;
    }
    if (k < 2) throw Error(ErrorKind::InvalidArgument, "slope needs at least two rounds in range");
    return (k * sxy - sx * sy) / (k * sxx - sx * sx);
  }
};

/// Compares n^d sum_v x_n(v)^2 with the sharp-rate constant.
inline SharpRateReport sharp_rate_estimate(const LatticeFilter& filter, const CoefficientSchedule& schedule,
                                           const std::vector<std::int64_t>& rounds, double tolerance = 0.05,
                                           const RunOptions& run = {}) {
  detail::require_symmetric(filter);
  const LatticeFilter f = detail::require_aperiodic(filter);
  (void)detail::require_jacobi(schedule);
  const int d = f.dim();
  const std::int64_t n_max = rounds.empty() ? 0 : *std::max_element(rounds.begin(), rounds.end());
  const IterationTrace trace = run_second_order(f, schedule, n_max, {}, run);
  SharpRateReport rep;
  rep.filter_id = f.name();
  rep.schedule_id = schedule.id();
  rep.predicted_constant = sharp_rate_constant(f);
  rep.tolerance = tolerance;
  for (std::int64_t n : std::set<std::int64_t>(rounds.begin(), rounds.end())) {
    if (n == 0) continue;
    const double l2 = trace.metrics[static_cast<std::size_t>(n)].l2_sq;
    const double scaled = std::pow(static_cast<double>(n), d) * l2;
    rep.series.push_back({n, l2, scaled, rep.predicted_constant, scaled / rep.predicted_constant});
  }
  rep.verdict = !rep.series.empty() && std::abs(rep.series.back().ratio - 1.0) <= tolerance;
  return rep;
}

}  // namespace epd_gossip
