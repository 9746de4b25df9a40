// epd-gossip: runs the experiments and the acceptance suite.
//
//   epd-gossip <profile|shape2d|alpha-sweep|rates|verify-all|oracle>
//              --config file.json --out dir [--threads N]
//
// Exit codes: 0 success, 1 check failure, 2 config error.

#include <cstdio>
#include <filesystem>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "epd_gossip.hpp"

namespace fs = std::filesystem;
using namespace epd_gossip;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitCheckFailed = 1;
constexpr int kExitConfig = 2;

int run(experiments::Experiment which, const std::string& config_path, const fs::path& out, int threads) {
  nlohmann::json cfg = nlohmann::json::object();
  fs::path base;
  if (!config_path.empty()) {
    cfg = io::read_json_file(config_path);
    base = fs::path(config_path).parent_path();
  }
  experiments::ExperimentConfig c = experiments::parse_config(cfg, which, base);
  c.threads = threads;

  experiments::ExperimentResult res;
  if (which == experiments::Experiment::VerifyAll) {
    res = experiments::cmd_verify_all(c, out, [](const acceptance::CriterionResult& r) {
      std::printf("%s\n", acceptance::verdict_line(r).c_str());
      for (const auto& ch : r.checks) {
        std::printf("    %s %s: %s\n", ch.passed ? "ok  " : "FAIL", ch.name.c_str(), ch.detail.c_str());
      }
      std::fflush(stdout);
    });
  } else {
    res = experiments::run_experiment(c, out);
    for (const auto& ch : res.checks) {
      std::printf("%s %s: %s\n", ch.passed ? "PASS" : "FAIL", ch.name.c_str(), ch.detail.c_str());
    }
    nlohmann::json checks = nlohmann::json::array();
    for (const auto& ch : res.checks) checks.push_back({{"name", ch.name}, {"passed", ch.passed}, {"detail", ch.detail}});
    io::write_text_file(out / "checks.json", checks.dump(2) + "\n");
  }
  for (const auto& w : res.warnings) std::fprintf(stderr, "warning: %s\n", w.c_str());
  for (const auto& f : res.files) std::printf("wrote %s\n", f.string().c_str());
  return res.passed() ? kExitOk : kExitCheckFailed;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Gossip iterations on Z^d and their heat / EPD scaling limits"};
  app.require_subcommand(1);
  std::string config;
  std::string out = "out";
  int threads = 1;

  struct Sub {
    const char* name;
    const char* help;
    experiments::Experiment which;
  };
  const Sub subs[] = {
      {"profile", "d=1 profiles against the heat and EPD oracles", experiments::Experiment::Profile},
      {"shape2d", "d=2 grids of the simple and Jacobi iterates", experiments::Experiment::Shape2d},
      {"alpha-sweep", "profiles of the (alpha, 0) Jacobi iteration", experiments::Experiment::AlphaSweep},
      {"rates", "n^d sum x_n^2 against the sharp-rate constant", experiments::Experiment::Rates},
      {"verify-all", "run the acceptance suite", experiments::Experiment::VerifyAll},
      {"oracle", "dump u(t, v) and its band-limited samples", experiments::Experiment::Oracle},
  };
  for (const auto& s : subs) {
    auto* cmd = app.add_subcommand(s.name, s.help);
    cmd->add_option("--config", config, "JSON config file")->check(CLI::ExistingFile);
    cmd->add_option("--out", out, "output directory")->capture_default_str();
    cmd->add_option("--threads", threads, "worker threads per step")->check(CLI::Range(1, 256))->capture_default_str();
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitConfig;
  }

  for (const auto& s : subs) {
    if (!app.got_subcommand(s.name)) continue;
    try {
      return run(s.which, config, out, threads);
    } catch (const Error& e) {
      std::fprintf(stderr, "error: %s\n", e.what());
      return e.kind() == ErrorKind::ConfigError ? kExitConfig : kExitCheckFailed;
    } catch (const std::exception& e) {
      std::fprintf(stderr, "error: %s\n", e.what());
      return kExitCheckFailed;
    }
  }
  return kExitConfig;
}
