// SPDX-License-Identifier: Apache-2.0
//
// nvqa: run the noise-resilience experiments from the command line.
//
// Exit codes: 0 success, 1 invalid input, 2 runtime failure.
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "nvqa/circuit_json.hpp"
#include "nvqa/experiments.hpp"
#include "nvqa/verify.hpp"

namespace {

constexpr int kExitInvalid = 1;
constexpr int kExitRuntime = 2;

nvqa::ExperimentConfig load_config(const std::string& name, const std::string& path) {
  const auto exp = nvqa::parse_experiment(name);
  if (path.empty()) return nvqa::default_config(exp);
  std::ifstream in(path);
  if (!in) throw nvqa::ConfigError("cannot open config file '" + path + "'");
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw nvqa::ConfigError("config file '" + path + "' is not valid JSON: " + e.what());
  }
  return nvqa::config_from_json(j, exp);
}

void print_list() {
  for (auto e : nvqa::kAllExperiments) {
    const auto c = nvqa::default_config(e);
    std::cout << nvqa::to_string(e) << "\n  " << nvqa::describe(e) << "\n  defaults: ";
    auto j = nvqa::to_json(c);
    j.erase("experiment");
    std::cout << j.dump() << "\n";
  }
}

int run_verify() {
  bool ok = true;
  for (const auto& c : nvqa::verify_invariants()) {
    std::printf("%s  %-55s %.3g (tol %.0e)\n", c.passed ? "PASS" : "FAIL", c.name.c_str(), c.value, c.tolerance);
    ok = ok && c.passed;
  }
  return ok ? 0 : kExitRuntime;
}

nvqa::Circuit named_circuit(const std::string& name, int layers) {
  if (name == "hea") return nvqa::build_hea(layers);
  if (name == "vqe4q") return nvqa::build_4q_vqe();
  if (name == "valley") return nvqa::build_valley_demo();
  if (name.size() == 3 && name.starts_with("2q")) {
    return nvqa::build_2q_circuit(nvqa::parse_two_qubit_variant(name.substr(2)));
  }
  throw nvqa::ConfigError("unknown circuit '" + name + "' (expected 2qa, 2qb, 2qc, hea, vqe4q, valley)");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Density-matrix simulator and noise-resilience experiments for variational circuits"};
  app.set_version_flag("--version", std::string(nvqa::kVersion));
  app.require_subcommand(1);

  auto* run = app.add_subcommand("run", "Run one experiment and write <out>/<experiment>.csv and .json");
  std::string experiment, config_path, out_dir;
  std::optional<std::uint64_t> seed;
  std::optional<int> targets;
  bool force = false;
  run->add_option("experiment", experiment, "Experiment name (see `nvqa list`)")->required();
  run->add_option("--config", config_path, "JSON config; missing keys use the experiment defaults");
  run->add_option("--seed", seed, "Override the config seed");
  run->add_option("--targets", targets, "Override n_targets")->check(CLI::PositiveNumber);
  run->add_option("--out", out_dir, "Output directory");
  run->add_flag("--force", force, "Rerun even if this config already completed in the output directory");

  app.add_subcommand("list", "List experiments and their defaults");
  app.add_subcommand("verify", "Run the built-in invariant checks");

  auto* circ = app.add_subcommand("circuit", "Print a circuit as JSON");
  std::string circuit_name;
  int layers = 1;
  circ->add_option("name", circuit_name, "2qa, 2qb, 2qc, hea, vqe4q or valley")->required();
  circ->add_option("--layers", layers, "Layer count for hea")->check(CLI::Range(1, 16));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitInvalid;
  }

  try {
    if (app.got_subcommand("list")) {
      print_list();
      return 0;
    }
    if (app.got_subcommand("verify")) return run_verify();
    if (app.got_subcommand("circuit")) {
      std::cout << nvqa::circuit_to_json(named_circuit(circuit_name, layers)).dump(2) << "\n";
      return 0;
    }

    auto cfg = load_config(experiment, config_path);
    if (seed) cfg.seed = *seed;
    if (targets) cfg.n_targets = *targets;
    if (!out_dir.empty()) cfg.output_dir = out_dir;
    nvqa::validate(cfg);

    nvqa::ResultRecord rec;
    const auto status = nvqa::run_and_store(cfg, force, &rec);
    if (status == nvqa::RunStatus::skipped) {
      std::cout << "up to date: " << nvqa::csv_path(cfg).string() << " (config " << nvqa::config_hash(cfg)
                << "); use --force to rerun\n";
      return 0;
    }
    std::cout << "wrote " << nvqa::csv_path(cfg).string() << " (" << rec.table.rows.size() << " rows, "
              << rec.wall_seconds << " s, config " << rec.config_hash << ")\n";
    return 0;
  } catch (const nvqa::ConfigError& e) {
    std::cerr << "nvqa: " << e.what() << "\n";
    return kExitInvalid;
  } catch (const std::exception& e) {
    std::cerr << "nvqa: " << e.what() << "\n";
    return kExitRuntime;
  }
}
