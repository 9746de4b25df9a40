#pragma once

// Simple and second-order gossip iterations started from the Dirac field.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "error.hpp"
#include "lattice.hpp"
#include "schedules.hpp"

namespace epd_gossip {

struct RoundMetrics {
  std::int64_t n;
  double l2_sq;
  double sup;
  double mass;
};

struct IterationTrace {
  std::string filter_id;
  std::string schedule_id;  ///< "simple" for first-order runs
  std::int64_t rounds = 0;
  std::map<std::int64_t, ScalarField> snapshots;
  std::vector<RoundMetrics> metrics;  ///< one record per round 0..rounds

  [[nodiscard]] const ScalarField& snapshot(std::int64_t n) const {
    const auto it = snapshots.find(n);
    if (it == snapshots.end()) {
      throw Error(ErrorKind::SnapshotMissing, "no snapshot retained for round " + std::to_string(n));
    }
    return it->second;
  }
};

struct RunOptions {
  double cell_budget = 1e8;
  int threads = 1;
};

namespace detail {

inline void check_budget(const LatticeFilter& f, std::int64_t n_max, const RunOptions& opt) {
  if (n_max < 0) throw Error(ErrorKind::InvalidArgument, "round count must be >= 0");
  const double side = 2.0 * static_cast<double>(n_max) * f.radius() + 1.0;
  const double cells = std::pow(side, f.dim());
  if (cells > opt.cell_budget) {
    throw Error(ErrorKind::OutOfMemory, "final box would hold " + std::to_string(cells) +
                                            " cells, budget is " + std::to_string(opt.cell_budget));
  }
}

inline RoundMetrics measure(std::int64_t n, const ScalarField& x) {
  double sq = 0.0;
  double sup = 0.0;
  double mass = 0.0;
  for (double v : x.values()) {
    sq += v * v;
    sup = std::max(sup, std::abs(v));
    mass += v;
  }
  return {n, sq, sup, mass};
}

}  // namespace detail

/// x_0 = Dirac, x_{n+1} = omega * x_n.
inline IterationTrace run_simple(const LatticeFilter& f, std::int64_t n_max,
                                 const std::set<std::int64_t>& snapshot_rounds, const RunOptions& opt = {}) {
  detail::check_budget(f, n_max, opt);
  IterationTrace trace;
  trace.filter_id = f.name();
  trace.schedule_id = "simple";
  trace.rounds = n_max;
  ScalarField x = dirac_field(f.dim());
  std::vector<double> spare;
  trace.metrics.push_back(detail::measure(0, x));
  for (std::int64_t n = 0;; ++n) {
    if (snapshot_rounds.contains(n)) trace.snapshots.emplace(n, x);
    if (n == n_max) break;
    FieldStats st;
    ScalarField next = gossip_step(f, x, 1.0, 0.0, nullptr, 0.0, opt.threads, std::move(spare), &st);
    spare = std::move(x).release_storage();
    x = std::move(next);
    trace.metrics.push_back({n + 1, st.l2_sq, st.sup, st.mass});
  }
  return trace;
}

/// x_0 = Dirac, x_1 = a_0 omega*x_0 + b_0 x_0,
/// x_{n+1} = a_n omega*x_n + b_n x_n - c_n x_{n-1}. Values may go negative.
inline IterationTrace run_second_order(const LatticeFilter& f, const CoefficientSchedule& s, std::int64_t n_max,
                                       const std::set<std::int64_t>& snapshot_rounds,
                                       const RunOptions& opt = {}) {
  detail::check_budget(f, n_max, opt);
  IterationTrace trace;
  trace.filter_id = f.name();
  trace.schedule_id = s.id();
  trace.rounds = n_max;
  ScalarField prev(f.dim(), 0);  // x_{-1}, only ever scaled by c_0 = 0
  ScalarField cur = dirac_field(f.dim());
  std::vector<double> spare;
  trace.metrics.push_back(detail::measure(0, cur));
  for (std::int64_t n = 0;; ++n) {
    if (snapshot_rounds.contains(n)) trace.snapshots.emplace(n, cur);
    if (n == n_max) break;
    const CoefficientTriple k = s(n);
    FieldStats st;
    ScalarField next =
        gossip_step(f, cur, k.a, k.b, n > 0 ? &prev : nullptr, k.c, opt.threads, std::move(spare), &st);
    // rotate buffers: the oldest one backs the next round
    spare = std::move(prev).release_storage();
    prev = std::move(cur);
    cur = std::move(next);
    trace.metrics.push_back({n + 1, st.l2_sq, st.sup, st.mass});
  }
  return trace;
}

/// Nonzero entries of the retained round-n field, in lexicographic vertex order.
inline std::vector<std::pair<Offset, double>> fundamental_profile(const IterationTrace& trace, std::int64_t n) {
  const ScalarField& x = trace.snapshot(n);
  std::vector<std::pair<Offset, double>> out;
  const auto vals = x.values();
  for (std::size_t k = 0; k < vals.size(); ++k) {
    if (vals[k] != 0.0) out.emplace_back(x.coords(k), vals[k]);
  }
  return out;
}

}  // namespace epd_gossip
