#pragma once

// Experiment drivers behind the command-line tool. Each one reads an
// ExperimentConfig, writes CSV/JSON into an output directory and returns
// the files written plus a list of named checks.

#include <chrono>
#include <cmath>
#include <ctime>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <tuple>
#include <vector>

#include <json.hpp>

#include "acceptance.hpp"
#include "error.hpp"
#include "gossip.hpp"
#include "io.hpp"
#include "lattice.hpp"
#include "pde_oracles.hpp"
#include "schedules.hpp"
#include "spectral.hpp"

namespace epd_gossip::experiments {

using json = nlohmann::json;
namespace fs = std::filesystem;

enum class Experiment { Profile, Shape2d, AlphaSweep, Rates, VerifyAll, Oracle };

inline std::optional<Experiment> parse_experiment(const std::string& s) {
  static const std::map<std::string, Experiment> names{
      {"profile", Experiment::Profile},       {"shape2d", Experiment::Shape2d},
      {"alpha-sweep", Experiment::AlphaSweep}, {"alpha_sweep", Experiment::AlphaSweep},
      {"rates", Experiment::Rates},           {"verify-all", Experiment::VerifyAll},
      {"verify_all", Experiment::VerifyAll},  {"oracle", Experiment::Oracle}};
  const auto it = names.find(s);
  if (it == names.end()) return std::nullopt;
  return it->second;
}

struct ExperimentConfig {
  Experiment experiment = Experiment::Profile;
  json filter;                       ///< name, path or inline object
  json schedule = "jacobi";          ///< second-order schedule where one is used
  std::vector<std::int64_t> rounds;  ///< rounds / snapshots of interest
  std::vector<double> alphas{0.25, 0.5, 0.75};
  FilteredOracleOptions quadrature;
  double tolerance = 0.05;  ///< sharp-rate ratio tolerance
  bool inject_periodic = false;
  std::set<int> only_criteria;
  // oracle dump
  double alpha = -1.0;  ///< < 0 means d/2
  double time = 10.0;
  int box = 12;
  std::optional<Eigen::MatrixXd> covariance;
  fs::path base_dir;
  int threads = 1;
};

/// Defaults mirror the figure parameters of each experiment.
inline ExperimentConfig parse_config(const json& j, Experiment which, const fs::path& base_dir = {}) {
  if (!j.is_object()) throw Error(ErrorKind::ConfigError, "config must be a JSON object");
  ExperimentConfig c;
  c.experiment = which;
  c.base_dir = base_dir;
  if (j.contains("experiment")) {
    const auto tag = j.at("experiment").get<std::string>();
    const auto e = parse_experiment(tag);
    if (!e) throw Error(ErrorKind::ConfigError, "unknown experiment tag '" + tag + "'");
    if (*e != which) throw Error(ErrorKind::ConfigError, "config is for '" + tag + "', not this command");
  }
  switch (which) {
    case Experiment::Profile:
      c.filter = "lazy1d";
      c.rounds = {15, 50, 200};
      break;
    case Experiment::Shape2d:
      c.filter = "triangular";
      c.rounds = {30};
      break;
    case Experiment::AlphaSweep:
      c.filter = "lazy1d";
      c.rounds = {200};
      break;
    case Experiment::Rates:
      c.filter = "triangular";
      for (std::int64_t n = 10; n <= 200; n += 10) c.rounds.push_back(n);
      break;
    case Experiment::VerifyAll:
    case Experiment::Oracle:
      c.filter = "lazy1d";
      break;
  }
  try {
    if (j.contains("filter")) c.filter = j.at("filter");
    if (j.contains("schedule")) c.schedule = j.at("schedule");
    if (j.contains("rounds")) c.rounds = j.at("rounds").get<std::vector<std::int64_t>>();
    if (j.contains("alphas")) c.alphas = j.at("alphas").get<std::vector<double>>();
    if (j.contains("tolerance")) c.tolerance = j.at("tolerance").get<double>();
    if (j.contains("inject_periodic")) c.inject_periodic = j.at("inject_periodic").get<bool>();
    if (j.contains("criteria")) {
      for (int k : j.at("criteria").get<std::vector<int>>()) c.only_criteria.insert(k);
    }
    if (j.contains("quadrature")) {
      const auto& q = j.at("quadrature");
      c.quadrature.quad_points_per_dim = q.value("points_per_dim", 0);
      c.quadrature.convergence_tol = q.value("convergence_tol", c.quadrature.convergence_tol);
      c.quadrature.check_convergence = q.value("check_convergence", true);
    }
    if (j.contains("alpha")) c.alpha = j.at("alpha").get<double>();
    if (j.contains("t")) c.time = j.at("t").get<double>();
    if (j.contains("box")) c.box = j.at("box").get<int>();
    if (j.contains("covariance")) {
      const auto rows = j.at("covariance").get<std::vector<std::vector<double>>>();
      Eigen::MatrixXd q(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.size()));
      for (std::size_t r = 0; r < rows.size(); ++r) {
        if (rows[r].size() != rows.size()) throw Error(ErrorKind::ConfigError, "covariance must be square");
        for (std::size_t k = 0; k < rows.size(); ++k) q(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(k)) = rows[r][k];
      }
      c.covariance = q;
    }
  } catch (const json::exception& e) {
    throw Error(ErrorKind::ConfigError, std::string("malformed config: ") + e.what());
  }
  for (auto n : c.rounds) {
    if (n <= 0) throw Error(ErrorKind::ConfigError, "rounds must be positive");
  }
  if (which != Experiment::VerifyAll && which != Experiment::Oracle && c.rounds.empty()) {
    throw Error(ErrorKind::ConfigError, "no rounds configured");
  }
  if (c.box < 0 || !(c.time > 0.0)) throw Error(ErrorKind::ConfigError, "oracle needs box >= 0 and t > 0");
  return c;
}

struct Check {
  std::string name;
  bool passed;
  std::string detail;
};

struct ExperimentResult {
  std::vector<fs::path> files;
  std::vector<Check> checks;
  std::vector<std::string> warnings;

  [[nodiscard]] bool passed() const {
    for (const auto& c : checks) {
      if (!c.passed) return false;
    }
    return true;
  }
};

namespace detail {

using io::num;

inline void emit(ExperimentResult& r, const fs::path& path, const std::string& text) {
  io::write_text_file(path, text);
  r.files.push_back(path);
}

inline LatticeFilter filter_of(const ExperimentConfig& c) { return io::resolve_filter(c.filter, c.base_dir); }

inline CoefficientSchedule schedule_of(const ExperimentConfig& c, int dim) {
  auto s = io::resolve_schedule(c.schedule, dim, c.base_dir);
  if (!s) throw Error(ErrorKind::ConfigError, "this experiment needs a second-order schedule, not \"simple\"");
  return *s;
}

inline specfun::JacobiParams jacobi_of(const CoefficientSchedule& s) {
  const auto p = s.jacobi_params();
  if (!p) throw Error(ErrorKind::ConfigError, "schedule " + s.id() + " has no EPD oracle; use a Jacobi family");
  return *p;
}

inline std::set<std::int64_t> round_set(const ExperimentConfig& c) { return {c.rounds.begin(), c.rounds.end()}; }

inline std::string json_text(const json& j) { return j.dump(2) + "\n"; }

inline json checks_json(const ExperimentResult& r) {
  json arr = json::array();
  for (const auto& c : r.checks) arr.push_back({{"name", c.name}, {"passed", c.passed}, {"detail", c.detail}});
  return arr;
}

inline std::string alpha_tag(double a) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", a);
  return buf;
}

}  // namespace detail

/// d = 1 overlays: iterates of both schedules against their oracles, one CSV per round.
inline ExperimentResult cmd_profile(const ExperimentConfig& c, const fs::path& out) {
  const LatticeFilter f = detail::filter_of(c);
  if (f.dim() != 1) throw Error(ErrorKind::ConfigError, "profile needs a 1-d filter");
  const CoefficientSchedule s = detail::schedule_of(c, 1);
  const specfun::JacobiParams p = detail::jacobi_of(s);
  const auto snaps = detail::round_set(c);
  const std::int64_t n_max = *snaps.rbegin();
  const RunOptions ro{1e8, c.threads};
  const IterationTrace simple = run_simple(f, n_max, snaps, ro);
  const IterationTrace jac = run_second_order(f, s, n_max, snaps, ro);

  ExperimentResult res;
  // (n, n^d l2 gap, unscaled sup gap)
  std::vector<std::tuple<std::int64_t, double, double>> scaled_gap;
  double worst_mass = 0.0;
  for (std::int64_t n : snaps) {
    const double t = static_cast<double>(n);
    const int box = static_cast<int>(n) * f.radius();
    const ScalarField xs = simple.snapshot(n).embedded(box);
    const ScalarField xj = jac.snapshot(n).embedded(box);
    const HeatSolution heat(f.covariance(), t, false);
    const EpdSolution epd(p.alpha, f.covariance(), t, false);
    const ScalarField filtered = epd_filtered_on_lattice(epd, box, c.quadrature);
    std::string csv = "v,x_n_simple,heat_oracle,x_n_jacobi,epd_oracle,epd_filtered\n";
    double gap = 0.0;
    double sup_gap = 0.0;
    for (std::size_t k = 0; k < xs.size(); ++k) {
      const int v = xs.coords(k)[0];
      const double y[1] = {static_cast<double>(v)};
      gap += (xj[k] - filtered[k]) * (xj[k] - filtered[k]);
      sup_gap = std::max(sup_gap, std::abs(xj[k] - filtered[k]));
      csv += std::to_string(v) + "," + detail::num(xs[k]) + "," + detail::num(heat(y)) + "," + detail::num(xj[k]) +
             "," + detail::num(epd(y)) + "," + detail::num(filtered[k]) + "\n";
    }
    worst_mass = std::max({worst_mass, std::abs(xs.mass() - 1.0), std::abs(xj.mass() - 1.0)});
    scaled_gap.emplace_back(n, t * gap, sup_gap);
    detail::emit(res, out / ("profile_n" + std::to_string(n) + ".csv"), csv);
  }
  res.checks.push_back({"profile_mass", worst_mass <= 1e-9, "max |sum x - 1| " + detail::num(worst_mass)});
  if (scaled_gap.size() >= 2) {
    // verdict on the l2 statistic; the sup gap is reported alongside
    const auto& [n0, l2_0, sup_0] = scaled_gap.front();
    const auto& [n1, l2_1, sup_1] = scaled_gap.back();
    res.checks.push_back({"profile_gap_shrinks", l2_1 < l2_0,
                          "n sum (x_jacobi - epd_filtered)^2: n=" + std::to_string(n0) + " " + detail::num(l2_0) +
                              ", n=" + std::to_string(n1) + " " + detail::num(l2_1) + "; max gap " +
                              detail::num(sup_0) + " -> " + detail::num(sup_1)});
  }
  return res;
}

/// Coefficient of variation of x over { v : <v, Q^{-1} v> <= (0.8 n)^2 }.
inline double interior_cv(const ScalarField& x, const Covariance& cov, double n) {
  double s = 0.0;
  double s2 = 0.0;
  std::size_t k = 0;
  const double lim = 0.8 * n;
  std::vector<double> y(static_cast<std::size_t>(x.dim()));
  for (std::size_t i = 0; i < x.size(); ++i) {
    const Offset v = x.coords(i);
    for (std::size_t j = 0; j < y.size(); ++j) y[j] = v[j];
    if (cov.inverse_form(y) > lim * lim) continue;
    s += x[i];
    s2 += x[i] * x[i];
    ++k;
  }
  if (k == 0) return 0.0;
  const double mean = s / static_cast<double>(k);
  const double var = std::max(0.0, s2 / static_cast<double>(k) - mean * mean);
  return std::sqrt(var) / std::abs(mean);
}

/// d = 2 grids of the simple and Jacobi iterates plus the oracle ellipse.
inline ExperimentResult cmd_shape2d(const ExperimentConfig& c, const fs::path& out) {
  const LatticeFilter f = detail::filter_of(c);
  if (f.dim() != 2) throw Error(ErrorKind::ConfigError, "shape2d needs a 2-d filter");
  const CoefficientSchedule s = detail::schedule_of(c, 2);
  const specfun::JacobiParams p = detail::jacobi_of(s);
  const auto snaps = detail::round_set(c);
  const std::int64_t n_max = *snaps.rbegin();
  const RunOptions ro{1e8, c.threads};
  const IterationTrace simple = run_simple(f, n_max, snaps, ro);
  const IterationTrace jac = run_second_order(f, s, n_max, snaps, ro);
  const Covariance cov(f.covariance());

  ExperimentResult res;
  json oracle = {{"covariance", {{cov.matrix()(0, 0), cov.matrix()(0, 1)}, {cov.matrix()(1, 0), cov.matrix()(1, 1)}}},
                 {"alpha", p.alpha},
                 {"ellipses", json::array()}};
  for (std::int64_t n : snaps) {
    const int box = static_cast<int>(n) * f.radius();
    const ScalarField xs = simple.snapshot(n).embedded(box);
    const ScalarField xj = jac.snapshot(n).embedded(box);
    for (const auto& [tag, x] : {std::pair<const char*, const ScalarField*>{"simple", &xs}, {"jacobi", &xj}}) {
      std::string csv = "v1,v2,value\n";
      for (std::size_t k = 0; k < x->size(); ++k) {
        const Offset v = x->coords(k);
        csv += std::to_string(v[0]) + "," + std::to_string(v[1]) + "," + detail::num((*x)[k]) + "\n";
      }
      detail::emit(res, out / ("shape2d_" + std::string(tag) + "_n" + std::to_string(n) + ".csv"), csv);
    }
    double min_simple = 0.0;
    for (double v : xs.values()) min_simple = std::min(min_simple, v);
    res.checks.push_back({"simple_nonnegative_n" + std::to_string(n), min_simple >= 0.0,
                          "min value " + detail::num(min_simple)});
    const double t = static_cast<double>(n);
    const double cv_s = interior_cv(xs, cov, t);
    const double cv_j = interior_cv(xj, cov, t);
    res.checks.push_back({"jacobi_more_even_n" + std::to_string(n), cv_j < cv_s,
                          "interior CV jacobi " + detail::num(cv_j) + " vs simple " + detail::num(cv_s)});
    // support of u(t, .) is <y, Q^{-1} y> <= t^2: semi-axes t sqrt(eigenvalues of Q)
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cov.matrix());
    oracle["ellipses"].push_back({{"n", n},
                                  {"t", t},
                                  {"semi_axes", {t * std::sqrt(eig.eigenvalues()(0)), t * std::sqrt(eig.eigenvalues()(1))}},
                                  {"axes", {{eig.eigenvectors()(0, 0), eig.eigenvectors()(1, 0)},
                                            {eig.eigenvectors()(0, 1), eig.eigenvectors()(1, 1)}}}});
  }
  detail::emit(res, out / "shape2d_oracle.json", detail::json_text(oracle));
  return res;
}

/// d = 1 profiles of the (alpha, 0) Jacobi iteration with the matching EPD oracle.
inline ExperimentResult cmd_alpha_sweep(const ExperimentConfig& c, const fs::path& out) {
  const LatticeFilter f = detail::filter_of(c);
  if (f.dim() != 1) throw Error(ErrorKind::ConfigError, "alpha-sweep needs a 1-d filter");
  const double half_d = 0.5 * f.dim();
  const std::int64_t n = *std::max_element(c.rounds.begin(), c.rounds.end());
  const RunOptions ro{1e8, c.threads};
  ExperimentResult res;
  for (double alpha : c.alphas) {
    const std::string tag = detail::alpha_tag(alpha);
    if (alpha <= half_d - 0.5) {
      res.warnings.push_back("alpha=" + tag + " is at or below d/2 - 1/2; oracle column is nan where the density is undefined");
    }
    const auto tr = run_second_order(f, jacobi_general_schedule(alpha, 0.0), n, {n}, ro);
    const ScalarField x = tr.snapshot(n).embedded(static_cast<int>(n) * f.radius());
    std::optional<EpdSolution> oracle;
    try {
      oracle.emplace(alpha, f.covariance(), static_cast<double>(n), false);
    } catch (const Error& e) {
      res.warnings.push_back("alpha=" + tag + ": " + e.what());
    }
    std::string csv = "v,x_n,epd_oracle\n";
    for (std::size_t k = 0; k < x.size(); ++k) {
      const int v = x.coords(k)[0];
      const double y[1] = {static_cast<double>(v)};
      csv += std::to_string(v) + "," + detail::num(x[k]) + "," + (oracle ? detail::num((*oracle)(y)) : "nan") + "\n";
    }
    detail::emit(res, out / ("alpha_sweep_alpha" + tag + "_n" + std::to_string(n) + ".csv"), csv);

    const auto pr = acceptance::alpha_profile(f, alpha, n, ro);
    const std::string shape = "center=" + detail::num(pr.center) + " edge=" + detail::num(pr.edge) +
                              " interior max/min=" + detail::num(pr.interior_max / pr.interior_min);
    if (std::abs(alpha - half_d) < 1e-12) {
      res.checks.push_back({"alpha" + tag + "_flat",
                            pr.interior_min > 0.0 && pr.interior_max / pr.interior_min < acceptance::kFlatProfileRatio,
                            shape});
    } else if (alpha > half_d) {
      res.checks.push_back({"alpha" + tag + "_center_heavy", pr.center > pr.edge, shape});
    } else {
      res.checks.push_back({"alpha" + tag + "_edge_heavy", pr.edge > pr.center, shape});
    }
  }
  return res;
}

/// n, l2_sq, predicted constant / n^d and the ratio, plus the fitted slope.
inline ExperimentResult cmd_rates(const ExperimentConfig& c, const fs::path& out) {
  const LatticeFilter f = detail::filter_of(c);
  const CoefficientSchedule s = detail::schedule_of(c, f.dim());
  (void)detail::jacobi_of(s);
  const RunOptions ro{1e8, c.threads};
  const auto rep = sharp_rate_estimate(f, s, c.rounds, c.tolerance, ro);
  const int d = f.dim();
  ExperimentResult res;
  std::string csv = "n,l2_sq,predicted,ratio\n";
  for (const auto& p : rep.series) {
    const double pred = p.predicted / std::pow(static_cast<double>(p.n), d);
    csv += std::to_string(p.n) + "," + detail::num(p.l2_sq) + "," + detail::num(pred) + "," + detail::num(p.ratio) + "\n";
  }
  detail::emit(res, out / "rates.csv", csv);
  json summary = {{"filter", rep.filter_id},
                  {"schedule", rep.schedule_id},
                  {"predicted_constant", rep.predicted_constant},
                  {"final_ratio", rep.series.empty() ? 0.0 : rep.series.back().ratio}};
  res.checks.push_back({"rates_ratio", rep.verdict,
                        "ratio at n=" + std::to_string(rep.series.back().n) + ": " + detail::num(rep.series.back().ratio)});
  std::int64_t lo = 100;
  std::int64_t hi = 200;
  int in_range = 0;
  for (const auto& p : rep.series) in_range += (p.n >= lo && p.n <= hi) ? 1 : 0;
  if (in_range < 2) {
    lo = rep.series.front().n;
    hi = rep.series.back().n;
  }
  if (rep.series.size() >= 2) {
    const double slope = rep.loglog_slope(lo, hi);
    summary["slope"] = slope;
    summary["slope_range"] = {lo, hi};
    res.checks.push_back({"rates_slope", std::abs(slope + d) <= acceptance::kSlopeTol,
                          "slope over [" + std::to_string(lo) + ", " + std::to_string(hi) + "]: " + detail::num(slope)});
  }
  detail::emit(res, out / "rates.json", detail::json_text(summary));
  return res;
}

/// Vertex, u(t, v) and (u * psi)(v) on a box.
inline ExperimentResult cmd_oracle(const ExperimentConfig& c, const fs::path& out) {
  const Eigen::MatrixXd q = c.covariance ? *c.covariance : detail::filter_of(c).covariance();
  const int d = static_cast<int>(q.rows());
  const double alpha = c.alpha < 0.0 ? 0.5 * d : c.alpha;
  const EpdSolution sol(alpha, q, c.time, false);
  const ScalarField filtered = epd_filtered_on_lattice(sol, c.box, c.quadrature);
  ExperimentResult res;
  std::string csv;
  for (int i = 1; i <= d; ++i) csv += "index_" + std::to_string(i) + ",";
  csv += "u,u_filtered\n";
  std::vector<double> y(static_cast<std::size_t>(d));
  for (std::size_t k = 0; k < filtered.size(); ++k) {
    const Offset v = filtered.coords(k);
    for (int i = 0; i < d; ++i) {
      csv += std::to_string(v[i]) + ",";
      y[i] = v[i];
    }
    csv += detail::num(sol(y)) + "," + detail::num(filtered[k]) + "\n";
  }
  detail::emit(res, out / "oracle.csv", csv);
  return res;
}

/// The acceptance suite with per-check JSON and a report file per theorem check.
inline ExperimentResult cmd_verify_all(const ExperimentConfig& c, const fs::path& out,
                                       const std::function<void(const acceptance::CriterionResult&)>& on_done = {}) {
  acceptance::Options opt;
  opt.threads = c.threads;
  opt.inject_periodic = c.inject_periodic;
  opt.only = c.only_criteria;
  const auto started = std::chrono::system_clock::now();
  const acceptance::Summary sum = acceptance::run(opt, on_done);

  ExperimentResult res;
  json criteria = json::array();
  for (const auto& cr : sum.criteria) {
    json checks = json::array();
    for (const auto& ch : cr.checks) {
      checks.push_back({{"name", ch.name}, {"passed", ch.passed}, {"detail", ch.detail}});
      res.checks.push_back({ch.name, ch.passed, ch.detail});
    }
    criteria.push_back({{"id", cr.id},
                        {"title", cr.title},
                        {"passed", cr.passed()},
                        {"budget_seconds", cr.budget_seconds},
                        {"within_budget", cr.within_budget()},
                        {"checks", checks}});
    if (!cr.within_budget()) res.checks.push_back({"budget_" + std::to_string(cr.id), false, "over budget"});
  }
  // timings and timestamps live only in the metadata block
  json timings = json::object();
  for (const auto& cr : sum.criteria) timings[std::to_string(cr.id)] = cr.seconds;
  const std::time_t when = std::chrono::system_clock::to_time_t(started);
  char stamp[32];
  std::strftime(stamp, sizeof stamp, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&when));
  const json summary = {{"passed", sum.passed()},
                        {"check_count", sum.check_count()},
                        {"criteria", criteria},
                        {"metadata", {{"started", stamp}, {"seconds", timings}, {"threads", c.threads}}}};
  detail::emit(res, out / "verify_all_summary.json", detail::json_text(summary));
  std::map<std::string, int> seen;
  for (const auto& r : sum.reports) {
    const std::string base = std::string("report_") + to_string(r.theorem_id) + "_" + std::to_string(seen[to_string(r.theorem_id)]++);
    detail::emit(res, out / (base + ".json"), detail::json_text(io::report_to_json(r)));
    detail::emit(res, out / (base + ".csv"), io::report_to_csv(r));
  }
  return res;
}

inline ExperimentResult run_experiment(const ExperimentConfig& c, const fs::path& out) {
  switch (c.experiment) {
    case Experiment::Profile: return cmd_profile(c, out);
    case Experiment::Shape2d: return cmd_shape2d(c, out);
    case Experiment::AlphaSweep: return cmd_alpha_sweep(c, out);
    case Experiment::Rates: return cmd_rates(c, out);
    case Experiment::VerifyAll: return cmd_verify_all(c, out);
    case Experiment::Oracle: return cmd_oracle(c, out);
  }
  throw Error(ErrorKind::ConfigError, "unknown experiment");
}

}  // namespace epd_gossip::experiments
