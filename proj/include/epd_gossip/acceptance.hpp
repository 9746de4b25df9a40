#pragma once

// The acceptance suite: ten criteria, each a group of named checks with a
// pinned tolerance and a wall-clock budget. Used by the acceptance test
// binary and by `epd-gossip verify-all`.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "error.hpp"
#include "gossip.hpp"
#include "lattice.hpp"
#include "pde_oracles.hpp"
#include "schedules.hpp"
#include "specfun.hpp"
#include "spectral.hpp"

namespace epd_gossip::acceptance {

// tolerances
inline constexpr double kSharpRateTol = 0.05;
inline constexpr double kSlopeTol = 0.1;
inline constexpr double kMehlerHeineCap = 1e-2;
inline constexpr double kScheduleTol = 1e-12;
inline constexpr double kBesselTol = 1e-10;
inline constexpr double kBinomialTol = 1e-10;
inline constexpr double kMassTol = 1e-10;
inline constexpr double kPlancherelTol = 1e-10;
inline constexpr double kHomomorphismTol = 1e-10;
inline constexpr double kAnisotropyTol = 1e-10;
inline constexpr double kFlatProfileRatio = 1.5;

struct CheckResult {
  std::string name;
  bool passed = false;
  std::string detail;
  double seconds = 0.0;
};

struct CriterionResult {
  int id = 0;
  std::string title;
  double budget_seconds = 0.0;
  double seconds = 0.0;
  std::vector<CheckResult> checks;

  [[nodiscard]] bool within_budget() const { return seconds <= budget_seconds; }
  [[nodiscard]] bool passed() const {
    if (!within_budget() || checks.empty()) return false;
    for (const auto& c : checks) {
      if (!c.passed) return false;
    }
    return true;
  }
};

struct Options {
  int threads = 1;
  bool inject_periodic = false;  ///< also feed a periodic filter to the CLT check
  std::set<int> only;            ///< empty runs every criterion
};

struct Summary {
  std::vector<CriterionResult> criteria;
  std::vector<TheoremReport> reports;

  [[nodiscard]] bool passed() const {
    for (const auto& c : criteria) {
      if (!c.passed()) return false;
    }
    return !criteria.empty();
  }
  [[nodiscard]] std::size_t check_count() const {
    std::size_t n = 0;
    for (const auto& c : criteria) n += c.checks.size();
    return n;
  }
};

namespace detail {

using Clock = std::chrono::steady_clock;

inline double since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

inline std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

inline std::string series_text(const std::vector<SeriesPoint>& s) {
  std::string out;
  for (const auto& p : s) out += (out.empty() ? "" : " ") + fmt(p.metric);
  return out;
}

/// Runs `body`, which fills `detail` and returns the verdict. Library errors
/// become failures carrying the error text.
inline CheckResult run_check(const std::string& name, const std::function<bool(std::string&)>& body) {
  CheckResult r;
  r.name = name;
  const auto t0 = Clock::now();
  try {
    r.passed = body(r.detail);
  } catch (const std::exception& e) {
    r.passed = false;
    r.detail = e.what();
  }
  r.seconds = since(t0);
  return r;
}

inline double rel_err(double got, double want) {
  return std::abs(got - want) / std::max(1.0, std::abs(want));
}

}  // namespace detail

/// Criterion 1: n^2 l2_sq at n = 200 on the triangular lattice vs sqrt(3)/pi.
inline CriterionResult criterion_sharp_constant(const Options& opt, Summary&) {
  CriterionResult c{1, "sharp-rate constant (triangular, n=200)", 120.0, 0.0, {}};
  c.checks.push_back(detail::run_check("sharp_rate_constant_triangular", [&](std::string& d) {
    const auto rep = sharp_rate_estimate(triangular_filter(), jacobi_printed_schedule(2), {200}, kSharpRateTol,
                                         {1e8, opt.threads});
    const auto& p = rep.series.back();
    d = "n^2 l2=" + detail::fmt(p.scaled) + " predicted=" + detail::fmt(rep.predicted_constant) +
        " ratio=" + detail::fmt(p.ratio);
    const bool constant_ok = std::abs(rep.predicted_constant - std::sqrt(3.0) / std::numbers::pi) < 1e-12;
    return constant_ok && std::abs(p.ratio - 1.0) <= kSharpRateTol;
  }));
  return c;
}

/// Criterion 2: log-log slope over [100, 200] within 0.1 of -d.
inline CriterionResult criterion_sharp_slope(const Options& opt, Summary&) {
  CriterionResult c{2, "sharp-rate exponent (d=1,2)", 240.0, 0.0, {}};
  const std::vector<std::int64_t> rounds{100, 120, 140, 160, 180, 200};
  struct Case {
    const char* name;
    LatticeFilter f;
  };
  for (const auto& k : {Case{"sharp_rate_slope_d1", lazy_filter_1d()}, Case{"sharp_rate_slope_d2", triangular_filter()}}) {
    c.checks.push_back(detail::run_check(k.name, [&](std::string& d) {
      const int dim = k.f.dim();
      const auto rep =
          sharp_rate_estimate(k.f, jacobi_printed_schedule(dim), rounds, kSharpRateTol, {1e8, opt.threads});
      const double slope = rep.loglog_slope(100, 200);
      d = k.f.name() + " slope=" + detail::fmt(slope) + " target=" + std::to_string(-dim);
      return std::abs(slope + dim) <= kSlopeTol;
    }));
  }
  return c;
}

/// Criterion 3: n^d l2 distance to the band-limited EPD oracle strictly decreasing.
inline CriterionResult criterion_local_epd(const Options& opt, Summary& sum) {
  CriterionResult c{3, "local EPD convergence", 180.0, 0.0, {}};
  struct Case {
    const char* name;
    LatticeFilter f;
    std::vector<std::int64_t> rounds;
  };
  for (const auto& k : {Case{"local_epd_lazy1d", lazy_filter_1d(), {25, 50, 100, 200}},
                        Case{"local_epd_triangular", triangular_filter(), {20, 40, 80}}}) {
    c.checks.push_back(detail::run_check(k.name, [&](std::string& d) {
      LocalEpdOptions o;
      o.run.threads = opt.threads;
      const auto rep = verify_local_epd(k.f, jacobi_printed_schedule(k.f.dim()), k.rounds, o);
      sum.reports.push_back(rep);
      d = "E_n: " + detail::series_text(rep.series);
      return rep.strictly_decreasing();
    }));
  }
  return c;
}

/// Criterion 4: n^{d/2} sup error of simple gossip vs the heat kernel strictly decreasing.
inline CriterionResult criterion_local_clt(const Options& opt, Summary& sum) {
  CriterionResult c{4, "local CLT", 120.0, 0.0, {}};
  const std::vector<std::int64_t> rounds{50, 100, 200, 400};
  std::vector<std::pair<std::string, LatticeFilter>> cases{{"local_clt_triangular", triangular_filter()},
                                                           {"local_clt_lazy1d", lazy_filter_1d()}};
  if (opt.inject_periodic) cases.emplace_back("local_clt_injected_periodic", standard_filter(2));
  for (const auto& [name, f] : cases) {
    c.checks.push_back(detail::run_check(name, [&](std::string& d) {
      LocalCltOptions o;
      o.run.threads = opt.threads;
      const auto rep = verify_local_clt(f, rounds, o);
      sum.reports.push_back(rep);
      d = "e_n: " + detail::series_text(rep.series);
      return rep.strictly_decreasing();
    }));
  }
  // negative path: a periodic filter must be refused, naming the frequency
  c.checks.push_back(detail::run_check("periodic_filter_rejected", [&](std::string& d) {
    try {
      (void)verify_local_clt(standard_filter(1), {10});
    } catch (const Error& e) {
      d = e.what();
      return e.kind() == ErrorKind::NotAperiodic && d.find("xi = (") != std::string::npos;
    }
    d = "standard1 was accepted";
    return false;
  }));
  return c;
}

/// Criterion 5: the weak-EPD Fourier gap shrinks with eps at random xi.
inline CriterionResult criterion_weak_epd(const Options&, Summary& sum) {
  CriterionResult c{5, "weak EPD pointwise Fourier step", 10.0, 0.0, {}};
  const std::vector<double> eps{0.1, 0.05, 0.02, 0.01, 0.005};
  c.checks.push_back(detail::run_check("weak_epd_random_xi", [&](std::string& d) {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(-3.0, 3.0);
    const auto f = triangular_filter();
    const auto s = jacobi_printed_schedule(2);
    int ok = 0;
    constexpr int kSamples = 6;
    for (int k = 0; k < kSamples; ++k) {
      const double xi[2] = {u(rng), u(rng)};
      const auto rep = verify_weak_epd_pointwise(f, s, xi, 1.0, eps);
      if (rep.verdict) ++ok;
      if (k == 0) sum.reports.push_back(rep);
    }
    d = std::to_string(ok) + "/" + std::to_string(kSamples) + " xi with a shrinking gap";
    return ok == kSamples;
  }));
  return c;
}

/// Criterion 6: Mehler-Heine limit, decreasing in n and below 1e-2 at n = 800.
inline CriterionResult criterion_mehler_heine(const Options&, Summary&) {
  CriterionResult c{6, "Mehler-Heine asymptotics", 5.0, 0.0, {}};
  c.checks.push_back(detail::run_check("mehler_heine", [&](std::string& d) {
    bool ok = true;
    double worst = 0.0;
    for (int dim = 1; dim <= 3; ++dim) {
      const specfun::JacobiParams p(0.5 * dim, 0.0);
      for (double z : {0.5, 1.0, 2.0, 5.0}) {
        double prev = std::numeric_limits<double>::infinity();
        for (int n : {50, 100, 200, 400, 800}) {
          const double lam = 1.0 - z * z / (2.0 * n * n);
          const double gap = std::abs(specfun::jacobi_normalized(n, p, lam) - specfun::mehler_heine_limit(dim, z));
          if (!(gap < prev)) ok = false;
          prev = gap;
        }
        worst = std::max(worst, prev);
      }
    }
    d = "worst gap at n=800: " + detail::fmt(worst);
    return ok && worst < kMehlerHeineCap;
  }));
  return c;
}

/// Criterion 7: general (d/2, 0) schedule equals the printed one; a + b - c = 1.
inline CriterionResult criterion_schedules(const Options&, Summary&) {
  CriterionResult c{7, "schedule cross-validation", 5.0, 0.0, {}};
  c.checks.push_back(detail::run_check("schedule_family_equivalence", [&](std::string& d) {
    double worst = 0.0;
    for (int dim = 1; dim <= 4; ++dim) {
      const auto printed = jacobi_printed_schedule(dim);
      const auto general = jacobi_general_schedule(0.5 * dim, 0.0);
      for (std::int64_t n = 0; n <= 1000; ++n) {
        const auto a = printed(n);
        const auto b = general(n);
        worst = std::max({worst, std::abs(a.a - b.a), std::abs(a.b - b.b), std::abs(a.c - b.c)});
      }
    }
    d = "max coefficient difference " + detail::fmt(worst);
    return worst <= kScheduleTol;
  }));
  c.checks.push_back(detail::run_check("schedule_conservation", [&](std::string& d) {
    std::vector<CoefficientSchedule> all;
    for (int dim = 1; dim <= 4; ++dim) all.push_back(jacobi_printed_schedule(dim));
    for (auto [al, be] : {std::pair{0.25, 0.0}, {0.5, 0.0}, {0.75, 0.0}, {1.0, 0.5}, {2.5, -0.5}, {0.0, 0.0}}) {
      all.push_back(jacobi_general_schedule(al, be));
    }
    double worst = 0.0;
    for (const auto& s : all) {
      for (std::int64_t n = 0; n <= 10000; ++n) {
        const auto t = s(n);
        worst = std::max(worst, std::abs(t.a + t.b - t.c - 1.0));
      }
    }
    d = "max |a+b-c-1| " + detail::fmt(worst);
    return worst <= kScheduleTol;
  }));
  return c;
}

/// Criterion 8: special-function and oracle normalization checks.
inline CriterionResult criterion_special_functions(const Options&, Summary&) {
  CriterionResult c{8, "special-function oracles", 30.0, 0.0, {}};
  c.checks.push_back(detail::run_check("bessel_half_integer", [&](std::string& d) {
    double worst = 0.0;
    for (int k = 0; k <= 2990; ++k) {
      const double z = 0.1 + 0.01 * k;
      const double s = std::sqrt(2.0 / (std::numbers::pi * z));
      worst = std::max(worst, std::abs(specfun::bessel_j(0.5, z) - s * std::sin(z)));
      worst = std::max(worst, std::abs(specfun::bessel_j(1.5, z) - s * (std::sin(z) / z - std::cos(z))));
    }
    d = "max abs error " + detail::fmt(worst);
    return worst <= kBesselTol;
  }));
  c.checks.push_back(detail::run_check("jacobi_at_one_binomial", [&](std::string& d) {
    double worst = 0.0;
    for (double al : {0.5, 1.0, 1.5, 2.0, 0.25}) {
      const specfun::JacobiParams p(al, 0.0);
      for (int n = 0; n <= 500; ++n) {
        const double binom = std::exp(std::lgamma(n + al + 1.0) - std::lgamma(n + 1.0) - std::lgamma(al + 1.0));
        worst = std::max(worst, std::abs(specfun::jacobi_poly(n, p, 1.0) - binom) / binom);
      }
    }
    d = "max relative error " + detail::fmt(worst);
    return worst <= kBinomialTol;
  }));
  c.checks.push_back(detail::run_check("oracle_mass_normalization", [&](std::string& d) {
    Eigen::MatrixXd q1(1, 1);
    q1 << 0.5;
    const Eigen::MatrixXd q2 = triangular_filter().covariance();
    double worst = 0.0;
    worst = std::max(worst, std::abs(HeatSolution(q1, 7.0, false).mass() - 1.0));
    worst = std::max(worst, std::abs(HeatSolution(q2, 3.0, false).mass() - 1.0));
    for (double al : {0.5, 1.0, 0.25, 2.0}) worst = std::max(worst, std::abs(EpdSolution(al, q1, 5.0, false).mass() - 1.0));
    for (double al : {1.0, 1.5, 0.5, 3.0}) worst = std::max(worst, std::abs(EpdSolution(al, q2, 4.0, false).mass() - 1.0));
    d = "max |mass - 1| " + detail::fmt(worst);
    return worst <= kOracleMassTol;
  }));
  return c;
}

/// Criterion 9: mass conservation over 1000 rounds, Plancherel, Fourier
/// homomorphism and the anisotropy identity.
inline CriterionResult criterion_properties(const Options& opt, Summary&) {
  CriterionResult c{9, "property suites", 60.0, 0.0, {}};
  c.checks.push_back(detail::run_check("mass_conservation_1000_rounds", [&](std::string& d) {
    double worst = 0.0;
    const RunOptions ro{1e8, opt.threads};
    for (const auto& f : {lazy_filter_1d(), standard_filter(1), standard_filter(2), triangular_filter()}) {
      for (const auto& m : run_simple(f, 1000, {}, ro).metrics) worst = std::max(worst, std::abs(m.mass - 1.0));
      const auto s = jacobi_printed_schedule(f.dim());
      for (const auto& m : run_second_order(f, s, 1000, {}, ro).metrics) worst = std::max(worst, std::abs(m.mass - 1.0));
    }
    d = "max |mass - 1| " + detail::fmt(worst);
    return worst <= kMassTol;
  }));
  c.checks.push_back(detail::run_check("plancherel_exactness", [&](std::string& d) {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    double worst = 0.0;
    for (int trial = 0; trial < 100; ++trial) {
      const int dim = 1 + trial % 2;
      const int r = 1 + static_cast<int>(rng() % 6);
      ScalarField x(dim, r);
      for (auto& v : x.values()) v = (rng() % 3 == 0) ? u(rng) : 0.0;
      const int m = 2 * r + 1 + static_cast<int>(rng() % 4);
      worst = std::max(worst, detail::rel_err(plancherel_l2(x, m), x.sum_squares()));
    }
    d = "max relative error " + detail::fmt(worst);
    return worst <= kPlancherelTol;
  }));
  c.checks.push_back(detail::run_check("fourier_homomorphism", [&](std::string& d) {
    std::mt19937_64 rng(13);
    std::uniform_real_distribution<double> u(-std::numbers::pi, std::numbers::pi);
    const std::vector<LatticeFilter> filters{triangular_filter(), lazy_filter_1d(), standard_filter(2)};
    double worst = 0.0;
    for (int trial = 0; trial < 20; ++trial) {
      const auto& f = filters[static_cast<std::size_t>(trial) % filters.size()];
      ScalarField x(f.dim(), 4);
      for (auto& v : x.values()) v = u(rng);
      std::vector<double> xi(static_cast<std::size_t>(f.dim()));
      for (auto& v : xi) v = u(rng);
      const auto lhs = field_fourier(convolve(f, x), xi);
      const auto rhs = filter_fourier(f, xi) * field_fourier(x, xi);
      worst = std::max(worst, std::abs(lhs - rhs) / std::max(1.0, std::abs(rhs)));
    }
    d = "max relative error " + detail::fmt(worst);
    return worst <= kHomomorphismTol;
  }));
  c.checks.push_back(detail::run_check("anisotropy_transform", [&](std::string& d) {
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> u(-4.0, 4.0);
    Eigen::MatrixXd q(2, 2);
    q << 0.7, 0.25, 0.25, 0.4;
    const Eigen::MatrixXd id = Eigen::MatrixXd::Identity(2, 2);
    double worst = 0.0;
    for (double al : {1.5, 2.0}) {
      const EpdSolution aniso(al, q, 3.0, false);
      const EpdSolution iso(al, id, 3.0, false);
      const Eigen::MatrixXd& w = aniso.covariance().inverse_sqrt();
      const double scale = 1.0 / std::sqrt(aniso.covariance().det());
      for (int k = 0; k < 50; ++k) {
        const Eigen::Vector2d y(u(rng), u(rng));
        const Eigen::Vector2d z = w * y;
        const double lhs = aniso(std::span<const double>(y.data(), 2));
        const double rhs = iso(std::span<const double>(z.data(), 2)) * scale;
        worst = std::max(worst, detail::rel_err(lhs, rhs));
      }
    }
    d = "max relative error " + detail::fmt(worst);
    return worst <= kAnisotropyTol;
  }));
  return c;
}

struct AlphaProfile {
  double center;
  double edge;
  double interior_max;
  double interior_min;
};

/// Round-200 profile of the (alpha, 0) Jacobi iteration on the lazy 1-d filter.
/// Edge: v = floor(0.9 n sqrt(Q)); interior: |v| <= 0.8 n sqrt(Q).
inline AlphaProfile alpha_profile(const LatticeFilter& f, double alpha, std::int64_t n, const RunOptions& ro = {}) {
  const auto tr = run_second_order(f, jacobi_general_schedule(alpha, 0.0), n, {n}, ro);
  const ScalarField& x = tr.snapshot(n);
  const double reach = static_cast<double>(n) * std::sqrt(f.covariance()(0, 0));
  const int edge = static_cast<int>(std::floor(0.9 * reach));
  const int lim = static_cast<int>(std::floor(0.8 * reach));
  AlphaProfile p{};
  const int zero[1] = {0};
  const int e[1] = {edge};
  p.center = x.at(zero);
  p.edge = x.at(e);
  p.interior_max = -std::numeric_limits<double>::infinity();
  p.interior_min = std::numeric_limits<double>::infinity();
  for (int v = -lim; v <= lim; ++v) {
    const int vv[1] = {v};
    p.interior_max = std::max(p.interior_max, x.at(vv));
    p.interior_min = std::min(p.interior_min, x.at(vv));
  }
  return p;
}

/// Criterion 10: edge vs center concentration as alpha crosses d/2.
inline CriterionResult criterion_alpha_sweep(const Options& opt, Summary&) {
  CriterionResult c{10, "alpha-sweep profile shape (d=1, n=200)", 60.0, 0.0, {}};
  const auto f = lazy_filter_1d();
  const RunOptions ro{1e8, opt.threads};
  c.checks.push_back(detail::run_check("alpha_0.75_center_heavy", [&](std::string& d) {
    const auto p = alpha_profile(f, 0.75, 200, ro);
    d = "center=" + detail::fmt(p.center) + " edge=" + detail::fmt(p.edge);
    return p.center > p.edge;
  }));
  c.checks.push_back(detail::run_check("alpha_0.25_edge_heavy", [&](std::string& d) {
    const auto p = alpha_profile(f, 0.25, 200, ro);
    d = "center=" + detail::fmt(p.center) + " edge=" + detail::fmt(p.edge);
    return p.edge > p.center;
  }));
  c.checks.push_back(detail::run_check("alpha_0.5_flat_interior", [&](std::string& d) {
    const auto p = alpha_profile(f, 0.5, 200, ro);
    const double ratio = p.interior_max / p.interior_min;
    d = "interior max/min=" + detail::fmt(ratio);
    return p.interior_min > 0.0 && ratio < kFlatProfileRatio;
  }));
  return c;
}

using CriterionFn = CriterionResult (*)(const Options&, Summary&);

inline const std::vector<CriterionFn>& criteria() {
  static const std::vector<CriterionFn> all{
      criterion_sharp_constant, criterion_sharp_slope,      criterion_local_epd,       criterion_local_clt,
      criterion_weak_epd,       criterion_mehler_heine,     criterion_schedules,       criterion_special_functions,
      criterion_properties,     criterion_alpha_sweep};
  return all;
}

/// Runs the selected criteria in order; `on_done` sees each result as it lands.
inline Summary run(const Options& opt = {}, const std::function<void(const CriterionResult&)>& on_done = {}) {
  Summary sum;
  int id = 0;
  for (const auto fn : criteria()) {
    ++id;
    if (!opt.only.empty() && !opt.only.contains(id)) continue;
    const auto t0 = detail::Clock::now();
    CriterionResult r = fn(opt, sum);
    r.seconds = detail::since(t0);
    if (on_done) on_done(r);
    sum.criteria.push_back(std::move(r));
  }
  return sum;
}

/// "PASS [3] local EPD convergence (12.3 s / budget 180 s)"
inline std::string verdict_line(const CriterionResult& r) {
  char buf[256];
  std::snprintf(buf, sizeof buf, "%s [%d] %s (%.1f s / budget %.0f s)%s", r.passed() ? "PASS" : "FAIL", r.id,
                r.title.c_str(), r.seconds, r.budget_seconds, r.within_budget() ? "" : " over budget");
  return buf;
}

}  // namespace epd_gossip::acceptance
