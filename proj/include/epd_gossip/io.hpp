#pragma once

// JSON and CSV formats: filters, fields, schedules, run descriptors, metrics
// and theorem reports. Numbers are written with %.17g so output round-trips
// and is byte-stable.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "error.hpp"
#include "gossip.hpp"
#include "lattice.hpp"
#include "schedules.hpp"
#include "spectral.hpp"

namespace epd_gossip::io {

using json = nlohmann::json;
namespace fs = std::filesystem;

inline std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline json read_json_file(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::ConfigError, "cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw Error(ErrorKind::ConfigError, path.string() + ": " + e.what());
  }
}

inline void write_text_file(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::ConfigError, "cannot write " + path.string());
  out << text;
}

// ---- filters ---------------------------------------------------------------

inline LatticeFilter filter_from_json(const json& j, std::string name = "custom") {
  try {
    const int dim = j.at("dim").get<int>();
    std::vector<FilterEntry> entries;
    for (const auto& e : j.at("entries")) {
      entries.push_back({e.at("offset").get<Offset>(), e.at("weight").get<double>()});
    }
    if (j.contains("name")) name = j.at("name").get<std::string>();
    return new_filter(dim, std::move(entries), std::move(name));
  } catch (const json::exception& e) {
    throw Error(ErrorKind::ConfigError, std::string("malformed filter: ") + e.what());
  }
}

inline json filter_to_json(const LatticeFilter& f) {
  json entries = json::array();
  for (const auto& e : f.entries()) entries.push_back({{"offset", e.offset}, {"weight", e.weight}});
  return {{"dim", f.dim()}, {"entries", entries}};
}

inline LatticeFilter load_filter_file(const fs::path& path) {
  return filter_from_json(read_json_file(path), path.stem().string());
}

/// "lazy1d", "triangular" or "standardN".
inline std::optional<LatticeFilter> builtin_filter(const std::string& name) {
  if (name == "lazy1d") return lazy_filter_1d();
  if (name == "triangular") return triangular_filter();
  if (name.rfind("standard", 0) == 0 && name.size() > 8) {
    const std::string tail = name.substr(8);
    if (tail.find_first_not_of("0123456789") != std::string::npos) return std::nullopt;
    const int d = std::stoi(tail);
    if (d < 1 || d > 8) throw Error(ErrorKind::ConfigError, "unsupported builtin " + name);
    return standard_filter(d);
  }
  return std::nullopt;
}

/// Builtin name, path (relative to base_dir) or inline object.
inline LatticeFilter resolve_filter(const json& spec, const fs::path& base_dir = {}) {
  if (spec.is_object()) return filter_from_json(spec);
  if (!spec.is_string()) throw Error(ErrorKind::ConfigError, "filter must be a name, a path or an object");
  const auto s = spec.get<std::string>();
  if (auto b = builtin_filter(s)) return *b;
  const fs::path p = fs::path(s).is_absolute() ? fs::path(s) : base_dir / s;
  if (!fs::exists(p)) throw Error(ErrorKind::ConfigError, "filter '" + s + "' is neither builtin nor a file");
  return load_filter_file(p);
}

// ---- fields ----------------------------------------------------------------

inline std::string field_csv_header(int dim) {
  std::string h;
  for (int i = 1; i <= dim; ++i) h += "index_" + std::to_string(i) + ",";
  return h + "value\n";
}

/// Every cell of the box, in lexicographic order.
inline std::string field_to_csv(const ScalarField& x) {
  std::string out = field_csv_header(x.dim());
  const auto vals = x.values();
  for (std::size_t k = 0; k < vals.size(); ++k) {
    for (int c : x.coords(k)) out += std::to_string(c) + ",";
    out += num(vals[k]) + "\n";
  }
  return out;
}

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;
};

inline CsvTable parse_csv(const std::string& text) {
  CsvTable t;
  std::istringstream in(text);
  std::string line;
  auto split = [](const std::string& l) {
    std::vector<std::string> cells;
    std::string cell;
    std::istringstream ls(l);
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    if (!l.empty() && l.back() == ',') cells.emplace_back();
    return cells;
  };
  if (!std::getline(in, line)) throw Error(ErrorKind::ConfigError, "empty CSV");
  t.header = split(line);
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto cells = split(line);
    if (cells.size() != t.header.size()) {
      throw Error(ErrorKind::ConfigError, "CSV row has " + std::to_string(cells.size()) + " cells, header has " +
                                              std::to_string(t.header.size()));
    }
    std::vector<double> row;
    for (const auto& c : cells) {
      try {
        std::size_t used = 0;
        row.push_back(std::stod(c, &used));
        if (used != c.size()) throw std::invalid_argument(c);
      } catch (const std::exception&) {
        throw Error(ErrorKind::ConfigError, "non-numeric CSV cell '" + c + "'");
      }
    }
    t.rows.push_back(std::move(row));
  }
  return t;
}

inline ScalarField field_from_csv(const std::string& text) {
  const CsvTable t = parse_csv(text);
  const int dim = static_cast<int>(t.header.size()) - 1;
  if (dim < 1 || t.header.back() != "value") throw Error(ErrorKind::ConfigError, "not a field CSV");
  int radius = 0;
  for (const auto& r : t.rows) {
    for (int i = 0; i < dim; ++i) radius = std::max(radius, std::abs(static_cast<int>(r[i])));
  }
  ScalarField x(dim, radius);
  Offset v(static_cast<std::size_t>(dim));
  for (const auto& r : t.rows) {
    for (int i = 0; i < dim; ++i) v[i] = static_cast<int>(r[i]);
    x[x.flat_index(v)] = r[dim];
  }
  return x;
}

// ---- schedules ---------------------------------------------------------------

inline CoefficientSchedule schedule_from_json(const json& j) {
  try {
    std::vector<CoefficientTriple> triples;
    for (const auto& t : j.at("triples")) {
      if (t.size() != 3) throw Error(ErrorKind::ConfigError, "each triple needs three numbers");
      triples.push_back({t[0].get<double>(), t[1].get<double>(), t[2].get<double>()});
    }
    return custom_schedule(j.at("name").get<std::string>(), std::move(triples));
  } catch (const json::exception& e) {
    throw Error(ErrorKind::ConfigError, std::string("malformed schedule: ") + e.what());
  }
}

inline json schedule_to_json(const std::string& name, const std::vector<CoefficientTriple>& triples) {
  json arr = json::array();
  for (const auto& t : triples) arr.push_back({t.a, t.b, t.c});
  return {{"name", name}, {"triples", arr}};
}

/// Empty optional means simple gossip.
using ScheduleChoice = std::optional<CoefficientSchedule>;

/// "simple", "jacobi", {"alpha", "beta"}, an inline table or a file path.
inline ScheduleChoice resolve_schedule(const json& spec, int dim, const fs::path& base_dir = {}) {
  try {
    if (spec.is_string()) {
      const auto s = spec.get<std::string>();
      if (s == "simple") return std::nullopt;
      if (s == "jacobi") return jacobi_printed_schedule(dim);
      const fs::path p = fs::path(s).is_absolute() ? fs::path(s) : base_dir / s;
      if (!fs::exists(p)) throw Error(ErrorKind::ConfigError, "schedule '" + s + "' is neither builtin nor a file");
      return schedule_from_json(read_json_file(p));
    }
    if (spec.is_object() && spec.contains("triples")) return schedule_from_json(spec);
    if (spec.is_object() && spec.contains("alpha")) {
      return jacobi_general_schedule(spec.at("alpha").get<double>(), spec.value("beta", 0.0));
    }
  } catch (const json::exception& e) {
    throw Error(ErrorKind::ConfigError, std::string("malformed schedule spec: ") + e.what());
  }
  throw Error(ErrorKind::ConfigError, "schedule must be \"simple\", \"jacobi\", {alpha, beta} or a file");
}

// ---- runs --------------------------------------------------------------------

struct RunDescriptor {
  LatticeFilter filter;
  ScheduleChoice schedule;
  std::int64_t rounds;
  std::set<std::int64_t> snapshots;
};

inline RunDescriptor run_descriptor_from_json(const json& j, const fs::path& base_dir = {}) {
  if (!j.contains("filter") || !j.contains("rounds")) {
    throw Error(ErrorKind::ConfigError, "run descriptor needs \"filter\" and \"rounds\"");
  }
  LatticeFilter f = resolve_filter(j.at("filter"), base_dir);
  ScheduleChoice s = resolve_schedule(j.value("schedule", json("simple")), f.dim(), base_dir);
  std::int64_t rounds = 0;
  std::set<std::int64_t> snaps;
  try {
    rounds = j.at("rounds").get<std::int64_t>();
    if (j.contains("snapshots")) {
      for (const auto& v : j.at("snapshots")) snaps.insert(v.get<std::int64_t>());
    }
  } catch (const json::exception& e) {
    throw Error(ErrorKind::ConfigError, std::string("malformed run descriptor: ") + e.what());
  }
  if (rounds <= 0) throw Error(ErrorKind::ConfigError, "rounds must be positive");
  for (auto n : snaps) {
    if (n < 0 || n > rounds) throw Error(ErrorKind::ConfigError, "snapshot round out of range");
  }
  return {std::move(f), std::move(s), rounds, std::move(snaps)};
}

inline IterationTrace execute(const RunDescriptor& r, const RunOptions& opt = {}) {
  if (r.schedule) return run_second_order(r.filter, *r.schedule, r.rounds, r.snapshots, opt);
  return run_simple(r.filter, r.rounds, r.snapshots, opt);
}

inline std::string metrics_to_csv(const IterationTrace& t) {
  std::string out = "n,l2_sq,sup,mass\n";
  for (const auto& m : t.metrics) {
    out += std::to_string(m.n) + "," + num(m.l2_sq) + "," + num(m.sup) + "," + num(m.mass) + "\n";
  }
  return out;
}

// ---- reports -----------------------------------------------------------------

inline json report_to_json(const TheoremReport& r) {
  json series = json::array();
  for (const auto& p : r.series) series.push_back({{"n", p.n}, {"metric", p.metric}});
  json out = {{"theorem_id", to_string(r.theorem_id)},
              {"params", r.params},
              {"series", series},
              {"verdict", r.verdict ? "pass" : "fail"}};
  if (!r.auxiliary.empty()) {
    json aux = json::array();
    for (const auto& p : r.auxiliary) aux.push_back({{"n", p.n}, {"metric", p.metric}});
    out["auxiliary"] = aux;
  }
  if (!r.note.empty()) out["note"] = r.note;
  return out;
}

/// Numeric mirror of the series; verdict as 1 (pass) or 0 (fail).
inline std::string report_to_csv(const TheoremReport& r) {
  std::string out = "n,metric,verdict\n";
  for (const auto& p : r.series) out += num(p.n) + "," + num(p.metric) + "," + (r.verdict ? "1" : "0") + "\n";
  return out;
}

}  // namespace epd_gossip::io
