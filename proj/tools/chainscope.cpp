#include <chrono>
#include <filesystem>
#include <iostream>
#include <map>

#include <CLI11.hpp>

#include "chainscope/commands.hpp"
#include "chainscope/report.hpp"
#include "chainscope/transition.hpp"

using namespace chainscope;

namespace {

const std::map<std::string, std::string> kAbout{
    {"reach", "cells visited by true orbits, or graph reach at a given eps"},
    {"chainreach", "chain reachable set over a sequence of halving eps"},
    {"robust", "robustness certificate or witness chain at a point"},
    {"minimal", "census of minimal sets with stability and isolation"},
    {"basin", "weak basin of a forward-invariant target"},
    {"dichotomy", "minimal-set census checked against robustness at samples"},
    {"verify", "run a property verifier over random instances"},
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Reachability, chain reachability and minimal-set analysis of discrete dynamical systems"};
  app.set_version_flag("--version", std::string(CHAINSCOPE_VERSION));
  std::string config_path;
  std::string out_path;
  std::string threads = "auto";
  bool quiet = false;
  app.require_subcommand(1);
  for (const auto& name : command_names()) {
    auto* sub = app.add_subcommand(name, kAbout.at(name));
    sub->add_option("--config", config_path, "config file (JSON)")->required();
    sub->add_option("--out", out_path, "report path; CSV sidecars go next to it");
    sub->add_option("--threads", threads, "worker threads or 'auto'");
    sub->add_flag("--quiet", quiet, "no progress or timing on stderr");
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : kExitError;
  }
  const std::string command = app.get_subcommands().front()->get_name();

  RunConfig cfg;
  try {
    cfg = load_config(config_path);
  } catch (const Error& e) {
    std::cerr << "chainscope: " << e.what() << "\n";
    return kExitError;
  }
  int n_threads = cfg.threads;
  if (threads != "auto") {
    try {
      n_threads = std::stoi(threads);
    } catch (const std::exception&) {
      n_threads = -1;
    }
    if (n_threads < 1) {
      std::cerr << "chainscope: --threads must be a positive integer or 'auto'\n";
      return kExitError;
    }
  }
  set_worker_threads(static_cast<unsigned>(n_threads));

  std::optional<std::string> stem;
  std::filesystem::path out_dir;
  if (!out_path.empty()) {
    const std::filesystem::path p(out_path);
    stem = p.filename().string();
    out_dir = p.parent_path();
  }

  const auto t0 = std::chrono::steady_clock::now();
  const CommandOutput out = run_command(command, cfg, stem);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  if (out.exit_code == kExitError) {
    std::cerr << "chainscope: " << out.error << "\n";
    return kExitError;
  }
  try {
    const std::string text = canonical_json(out.report);
    if (stem) {
      write_text(text, out_path);
      for (const auto& [name, contents] : out.sidecars) write_text(contents, (out_dir / name).string());
    } else {
      std::cout << text;
    }
  } catch (const Error& e) {
    std::cerr << "chainscope: " << e.what() << "\n";
    return kExitError;
  }
  if (!quiet) {
    std::cerr << "chainscope " << command << ": exit " << out.exit_code << ", " << worker_threads() << " thread(s), "
              << secs << " s\n";
  }
  return out.exit_code;
}
