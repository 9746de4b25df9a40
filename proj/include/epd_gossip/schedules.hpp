#pragma once

// Coefficient producers for second-order iterations
//   x_{n+1} = a_n omega * x_n + b_n x_n - c_n x_{n-1},   c_0 = 0.

#include <cmath>
#include <cstdio>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "error.hpp"
#include "specfun.hpp"

namespace epd_gossip {

struct CoefficientTriple {
  double a;
  double b;
  double c;
};

struct JacobiPrintedFamily {
  int d;
};
struct JacobiGeneralFamily {
  double alpha;
  double beta;
};
struct CustomFamily {
  std::string name;
};

using ScheduleFamily = std::variant<JacobiPrintedFamily, JacobiGeneralFamily, CustomFamily>;

class CoefficientSchedule {
 public:
  using Producer = std::function<CoefficientTriple(std::int64_t)>;

  CoefficientSchedule(ScheduleFamily family, Producer produce)
      : family_(std::move(family)), produce_(std::move(produce)) {}

  [[nodiscard]] CoefficientTriple operator()(std::int64_t n) const {
    if (n < 0) throw Error(ErrorKind::InvalidArgument, "schedule index must be >= 0");
    return produce_(n);
  }

  [[nodiscard]] const ScheduleFamily& family() const noexcept { return family_; }

  /// Jacobi parameters when the schedule belongs to a Jacobi family.
  [[nodiscard]] std::optional<specfun::JacobiParams> jacobi_params() const {
    if (const auto* p = std::get_if<JacobiPrintedFamily>(&family_)) {
      return specfun::JacobiParams(0.5 * p->d, 0.0);
    }
    if (const auto* g = std::get_if<JacobiGeneralFamily>(&family_)) {
      return specfun::JacobiParams(g->alpha, g->beta);
    }
    return std::nullopt;
  }

  [[nodiscard]] std::string id() const {
    if (const auto* p = std::get_if<JacobiPrintedFamily>(&family_)) {
      return "jacobi_printed(d=" + std::to_string(p->d) + ")";
    }
    if (const auto* g = std::get_if<JacobiGeneralFamily>(&family_)) {
      return "jacobi(alpha=" + format_real(g->alpha) + ",beta=" + format_real(g->beta) + ")";
    }
    return "custom(" + std::get<CustomFamily>(family_).name + ")";
  }

 private:
  static std::string format_real(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%g", v);
    return buf;
  }

  ScheduleFamily family_;
  Producer produce_;
};

/// The Jacobi (d/2, 0) coefficients in their closed rational form.
inline CoefficientSchedule jacobi_printed_schedule(int d) {
  if (d < 1) throw Error(ErrorKind::InvalidParameters, "dimension must be >= 1");
  const double dd = d;
  return CoefficientSchedule(JacobiPrintedFamily{d}, [dd](std::int64_t n) -> CoefficientTriple {
    if (n == 0) return {(dd + 4.0) / (2.0 * (2.0 + dd)), dd / (2.0 * (2.0 + dd)), 0.0};
    const double nn = static_cast<double>(n);
    const double h = 0.5 * dd;
    const double den = (nn + 1.0 + h) * (nn + 1.0 + h);
    const double a = (2.0 * nn + h + 1.0) * (2.0 * nn + h + 2.0) / (2.0 * den);
    const double b = dd * dd * (2.0 * nn + h + 1.0) / (8.0 * den * (2.0 * nn + h));
    const double c = nn * nn * (2.0 * nn + h + 2.0) / (den * (2.0 * nn + h));
    return {a, b, c};
  });
}

/// Coefficients reproducing pi_n^{(alpha,beta)}(omega), from the classical
/// Jacobi three-term recurrence renormalized by P_n(1) = binomial(n + alpha, n).
inline CoefficientSchedule jacobi_general_schedule(double alpha, double beta) {
  const specfun::JacobiParams p(alpha, beta);  // validates alpha, beta > -1
  return CoefficientSchedule(JacobiGeneralFamily{alpha, beta}, [p](std::int64_t n) -> CoefficientTriple {
    const double al = p.alpha;
    const double be = p.beta;
    if (n == 0) {
      // pi_1(x) = ((alpha+beta+2) x + alpha - beta) / (2 (alpha+1))
      return {(al + be + 2.0) / (2.0 * (al + 1.0)), (al - be) / (2.0 * (al + 1.0)), 0.0};
    }
    const double nn = static_cast<double>(n);
    const double s = 2.0 * nn + al + be;
    const double k1 = nn + al + be + 1.0;
    const double k2 = nn + al + 1.0;
    const double a = (s + 1.0) * (s + 2.0) / (2.0 * k1 * k2);
    const double b = (s + 1.0) * (al * al - be * be) / (2.0 * k1 * s * k2);
    const double c = nn * (nn + be) * (s + 2.0) / (k1 * s * k2);
    return {a, b, c};
  });
}

/// Explicitly tabulated coefficients; indices beyond the table are rejected.
inline CoefficientSchedule custom_schedule(std::string name, std::vector<CoefficientTriple> triples) {
  auto table = std::make_shared<const std::vector<CoefficientTriple>>(std::move(triples));
  return CoefficientSchedule(CustomFamily{std::move(name)}, [table](std::int64_t n) -> CoefficientTriple {
    if (n >= static_cast<std::int64_t>(table->size())) {
      throw Error(ErrorKind::InvalidArgument,
                  "custom schedule has " + std::to_string(table->size()) + " triples, index " +
                      std::to_string(n) + " requested");
    }
    return (*table)[static_cast<std::size_t>(n)];
  });
}

inline CoefficientSchedule custom_schedule(std::string name, CoefficientSchedule::Producer produce) {
  return CoefficientSchedule(CustomFamily{std::move(name)}, std::move(produce));
}

struct AsymptoticSample {
  std::int64_t n;
  double a_gap;        ///< |a_n - 2|
  double damping_gap;  ///< |n (1 - c_n) - expected|
};

struct AsymptoticsReport {
  std::vector<AsymptoticSample> samples;
  bool decreasing = false;  ///< both gaps shrink over the last two samples
  bool within_tol = false;  ///< both gaps below `tol` at the last sample
  [[nodiscard]] bool ok() const { return decreasing && within_tol; }
};

/// Samples a_n -> 2 and n (1 - c_n) -> expected_limit at n = 10^2 .. 10^5.
inline AsymptoticsReport check_schedule_asymptotics(const CoefficientSchedule& s, double expected_limit,
                                                    double tol = 1e-3) {
  AsymptoticsReport rep;
  for (std::int64_t n : {100, 1000, 10000, 100000}) {
    const auto t = s(n);
    const double nd = static_cast<double>(n);
    rep.samples.push_back({n, std::abs(t.a - 2.0), std::abs(nd * (1.0 - t.c) - expected_limit)});
  }
  const auto& last = rep.samples.back();
  const auto& prev = rep.samples[rep.samples.size() - 2];
  auto shrinks = [](double before, double after) { return after < before || after < 1e-12; };
  rep.decreasing = shrinks(prev.a_gap, last.a_gap) && shrinks(prev.damping_gap, last.damping_gap);
  rep.within_tol = last.a_gap < tol && last.damping_gap < tol;
  return rep;
}

}  // namespace epd_gossip
