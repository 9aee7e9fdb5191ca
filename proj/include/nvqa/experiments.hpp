// SPDX-License-Identifier: Apache-2.0
//
// Experiment definitions, configuration, and result persistence.
//
// Every experiment returns a ResultRecord: one table (written as CSV with
// 17-significant-digit numbers) plus a JSON summary. Wall time is kept out of
// the table so that identical configs give byte-identical CSV files.
#pragma once

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "nvqa/channels.hpp"
#include "nvqa/circuits.hpp"
#include "nvqa/degen.hpp"
#include "nvqa/measures.hpp"
#include "nvqa/noisemodel.hpp"
#include "nvqa/optimize.hpp"
#include "nvqa/parallel.hpp"
#include "nvqa/randstates.hpp"

#ifndef NVQA_VERSION
#define NVQA_VERSION "0.1.0"
#endif

namespace nvqa {

inline constexpr std::string_view kVersion = NVQA_VERSION;

/// Bad user input (config file, CLI values). The CLI maps it to exit code 1.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

enum class Experiment {
  vqe2q,
  vqe4q,
  vqe_unequal,
  target_fidelity,
  degeneracy_hist,
  transition_scan,
  valley_demo,
  alpha_beta_table
};

inline constexpr std::array<Experiment, 8> kAllExperiments = {
    Experiment::vqe2q,           Experiment::vqe4q,           Experiment::vqe_unequal,
    Experiment::target_fidelity, Experiment::degeneracy_hist, Experiment::transition_scan,
    Experiment::valley_demo,     Experiment::alpha_beta_table};

inline std::string_view to_string(Experiment e) {
  switch (e) {
    case Experiment::vqe2q: return "vqe2q";
    case Experiment::vqe4q: return "vqe4q";
    case Experiment::vqe_unequal: return "vqe_unequal";
    case Experiment::target_fidelity: return "target_fidelity";
    case Experiment::degeneracy_hist: return "degeneracy_hist";
    case Experiment::transition_scan: return "transition_scan";
    case Experiment::valley_demo: return "valley_demo";
    case Experiment::alpha_beta_table: return "alpha_beta_table";
  }
  return "?";
}

inline Experiment parse_experiment(std::string_view s) {
  for (auto e : kAllExperiments)
    if (to_string(e) == s) return e;
  throw ConfigError("unknown experiment '" + std::string(s) + "'");
}

inline std::string_view describe(Experiment e) {
  switch (e) {
    case Experiment::vqe2q: return "2-qubit VQE minima vs gamma for the three ansatz variants";
    case Experiment::vqe4q: return "4-qubit VQE minima vs gamma";
    case Experiment::vqe_unequal: return "2-qubit VQE with one qubit 10x noisier than the other";
    case Experiment::target_fidelity: return "random-target fidelity vs layers, reoptimised and not";
    case Experiment::degeneracy_hist: return "fidelity histogram over degenerate parameter images";
    case Experiment::transition_scan: return "tracked gamma sweeps looking for noise-induced transitions";
    case Experiment::valley_demo: return "1-qubit cost landscape with and without phase damping";
    case Experiment::alpha_beta_table: return "stochastic-model coefficients alpha and beta per channel";
  }
  return "";
}

inline std::string_view to_string(SweepMode m) { return m == SweepMode::track ? "track" : "restart"; }

inline SweepMode parse_sweep_mode(std::string_view s) {
  if (s == "track") return SweepMode::track;
  if (s == "restart") return SweepMode::restart;
  throw ConfigError("unknown sweep_mode '" + std::string(s) + "' (expected track or restart)");
}

// ---------------------------------------------------------------------------
// Configuration
// ---------------------------------------------------------------------------

struct ExperimentConfig {
  Experiment experiment = Experiment::vqe2q;
  std::vector<NoiseKind> kinds;
  std::vector<double> gamma_grid;
  std::vector<int> layers;
  std::vector<TwoQubitVariant> variants;
  int n_targets = 100;
  std::uint64_t seed = 1;
  int n_starts = 100;
  int n_samples = 10000;
  int n_qubits = 4;
  int resolution = 101;
  SweepMode sweep_mode = SweepMode::restart;
  std::string output_dir = "results";
};

inline std::vector<double> uniform_grid(double lo, double hi, int points) {
  std::vector<double> g(static_cast<std::size_t>(points));
  for (int i = 0; i < points; ++i) {
    // Rounded to 12 decimals so that 0.015 is stored as the double nearest 0.015.
    g[static_cast<std::size_t>(i)] = std::round((lo + (hi - lo) * i / (points - 1)) * 1e12) / 1e12;
  }
  return g;
}

/// Desk-scale defaults for each experiment.
inline ExperimentConfig default_config(Experiment e) {
  ExperimentConfig c;
  c.experiment = e;
  c.kinds = {kAllNoiseKinds.begin(), kAllNoiseKinds.end()};
  c.variants = {TwoQubitVariant::a, TwoQubitVariant::b, TwoQubitVariant::c};
  switch (e) {
    case Experiment::vqe2q:
    case Experiment::vqe4q:
    case Experiment::vqe_unequal:
      c.gamma_grid = uniform_grid(0.0, 1.0, 21);
      c.n_starts = 100;
      break;
    case Experiment::target_fidelity:
      c.gamma_grid = {0.001, 0.01, 0.05, 0.1};
      c.layers = {1, 2, 3, 4, 5, 6, 7, 8};
      c.n_starts = 8;
      c.n_samples = 2000;
      break;
    case Experiment::degeneracy_hist:
      c.gamma_grid = {0.01};
      c.layers = {4};
      c.n_starts = 20;
      break;
    case Experiment::transition_scan:
      c.kinds = {NoiseKind::phase};
      c.gamma_grid = uniform_grid(0.0, 0.1, 21);
      c.layers = {3};
      c.n_targets = 5;
      c.n_starts = 10;
      c.sweep_mode = SweepMode::track;
      break;
    case Experiment::valley_demo:
      c.kinds = {NoiseKind::phase};
      c.gamma_grid = {0.0, 0.4};
      break;
    case Experiment::alpha_beta_table:
      c.n_samples = 10000;
      break;
  }
  return c;
}

inline void validate(const ExperimentConfig& c) {
  auto fail = [&](const std::string& msg) { throw ConfigError(std::string(to_string(c.experiment)) + ": " + msg); };
  if (c.kinds.empty()) fail("kinds must not be empty");
  const bool uses_gamma = c.experiment != Experiment::alpha_beta_table;
  if (uses_gamma && c.gamma_grid.empty()) fail("gamma_grid must not be empty");
  for (double g : c.gamma_grid) {
    if (!(g >= 0.0 && g <= 1.0)) fail("gamma value " + std::to_string(g) + " outside [0, 1]");
  }
  if (!std::is_sorted(c.gamma_grid.begin(), c.gamma_grid.end())) fail("gamma_grid must be ascending");
  const bool uses_layers = c.experiment == Experiment::target_fidelity ||
                           c.experiment == Experiment::degeneracy_hist ||
                           c.experiment == Experiment::transition_scan;
  if (uses_layers && c.layers.empty()) fail("layers must not be empty");
  for (int l : c.layers) {
    if (l < 1 || l > 16) fail("layer count " + std::to_string(l) + " outside [1, 16]");
  }
  const bool uses_variants = c.experiment == Experiment::vqe2q || c.experiment == Experiment::vqe_unequal;
  if (uses_variants && c.variants.empty()) fail("variants must not be empty");
  if (c.n_targets < 1) fail("n_targets must be >= 1");
  if (c.n_starts < 1) fail("n_starts must be >= 1");
  if (c.n_samples < 100) fail("n_samples must be >= 100");
  if (c.n_qubits < 1 || c.n_qubits > 8) fail("n_qubits must be in [1, 8]");
  if (c.resolution < 2 || c.resolution > 2001) fail("resolution must be in [2, 2001]");
}

inline nlohmann::json to_json(const ExperimentConfig& c) {
  nlohmann::json j;
  j["experiment"] = to_string(c.experiment);
  j["kinds"] = nlohmann::json::array();
  for (auto k : c.kinds) j["kinds"].push_back(to_string(k));
  j["gamma_grid"] = c.gamma_grid;
  j["layers"] = c.layers;
  j["variants"] = nlohmann::json::array();
  for (auto v : c.variants) j["variants"].push_back(to_string(v));
  j["n_targets"] = c.n_targets;
  j["seed"] = c.seed;
  j["n_starts"] = c.n_starts;
  j["n_samples"] = c.n_samples;
  j["n_qubits"] = c.n_qubits;
  j["resolution"] = c.resolution;
  j["sweep_mode"] = to_string(c.sweep_mode);
  j["output_dir"] = c.output_dir;
  return j;
}

/// Reads a (possibly partial) config. Missing keys take the defaults of the
/// named experiment; `fallback` names the experiment when the file omits it.
inline ExperimentConfig config_from_json(const nlohmann::json& j, std::optional<Experiment> fallback = {}) {
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  static const std::array<std::string_view, 14> known = {
      "experiment", "kinds",    "gamma_grid", "layers",     "variants",   "n_targets",  "seed",
      "n_starts",   "n_samples", "n_qubits",  "resolution", "sweep_mode", "output_dir", "description"};
  for (const auto& [key, _] : j.items()) {
    if (std::find(known.begin(), known.end(), key) == known.end()) throw ConfigError("unknown config key '" + key + "'");
  }
  std::optional<Experiment> named;
  if (j.contains("experiment")) named = parse_experiment(j.at("experiment").get<std::string>());
  if (named && fallback && *named != *fallback) {
    throw ConfigError("config is for '" + std::string(to_string(*named)) + "', not '" +
                      std::string(to_string(*fallback)) + "'");
  }
  if (!named && !fallback) throw ConfigError("config does not name an experiment");
  ExperimentConfig c = default_config(named ? *named : *fallback);
  try {
    if (j.contains("kinds")) {
      c.kinds.clear();
      for (const auto& k : j.at("kinds")) c.kinds.push_back(parse_noise_kind(k.get<std::string>()));
    }
    if (j.contains("gamma_grid")) c.gamma_grid = j.at("gamma_grid").get<std::vector<double>>();
    if (j.contains("layers")) c.layers = j.at("layers").get<std::vector<int>>();
    if (j.contains("variants")) {
      c.variants.clear();
      for (const auto& v : j.at("variants")) c.variants.push_back(parse_two_qubit_variant(v.get<std::string>()));
    }
    if (j.contains("n_targets")) c.n_targets = j.at("n_targets").get<int>();
    if (j.contains("seed")) c.seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("n_starts")) c.n_starts = j.at("n_starts").get<int>();
    if (j.contains("n_samples")) c.n_samples = j.at("n_samples").get<int>();
    if (j.contains("n_qubits")) c.n_qubits = j.at("n_qubits").get<int>();
    if (j.contains("resolution")) c.resolution = j.at("resolution").get<int>();
    if (j.contains("sweep_mode")) c.sweep_mode = parse_sweep_mode(j.at("sweep_mode").get<std::string>());
    if (j.contains("output_dir")) c.output_dir = j.at("output_dir").get<std::string>();
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("config type error: ") + e.what());
  } catch (const ConfigError&) {
    throw;
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  validate(c);
  return c;
}

/// FNV-1a over the canonical (sorted-key) JSON of everything except
/// output_dir, as 16 hex digits.
inline std::string config_hash(const ExperimentConfig& c) {
  nlohmann::json j = to_json(c);
  j.erase("output_dir");
  const std::string s = j.dump();
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : s) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

/// Independent seed for a sub-task (splitmix64 finaliser of seed + tag).
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t tag) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (tag + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// ---------------------------------------------------------------------------
// Tables and CSV
// ---------------------------------------------------------------------------

using Cell = std::variant<std::int64_t, double, std::string>;

struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<Cell>> rows;

  void add_row(std::vector<Cell> row) {
    if (row.size() != columns.size()) throw std::logic_error("Table::add_row: wrong number of cells");
    rows.push_back(std::move(row));
  }

  std::size_t column(std::string_view name) const {
    for (std::size_t i = 0; i < columns.size(); ++i)
      if (columns[i] == name) return i;
    throw std::out_of_range("Table: no column '" + std::string(name) + "'");
  }
};

/// %.17g, with nan / inf / -inf spelled out.
inline std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline std::string format_cell(const Cell& c) {
  if (const auto* i = std::get_if<std::int64_t>(&c)) return std::to_string(*i);
  if (const auto* d = std::get_if<double>(&c)) return format_number(*d);
  const auto& s = std::get<std::string>(c);
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char ch : s) {
    if (ch == '"') out += '"';
    out += ch;
  }
  return out + "\"";
}

inline std::string to_csv(const Table& t) {
  std::string out;
  for (std::size_t i = 0; i < t.columns.size(); ++i) out += (i ? "," : "") + t.columns[i];
  out += '\n';
  for (const auto& row : t.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) out += (i ? "," : "") + format_cell(row[i]);
    out += '\n';
  }
  return out;
}

inline std::string join_numbers(const Eigen::VectorXd& v) {
  std::string s;
  for (Eigen::Index i = 0; i < v.size(); ++i) s += (i ? ";" : "") + format_number(v[i]);
  return s;
}

// ---------------------------------------------------------------------------
// Results
// ---------------------------------------------------------------------------

struct ResultRecord {
  ExperimentConfig config;
  std::string config_hash;
  std::string version{kVersion};
  Table table;
  nlohmann::json summary = nlohmann::json::object();
  double wall_seconds = 0.0;
};

namespace detail {

inline double mean_of(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return v.empty() ? 0.0 : s / static_cast<double>(v.size());
}

/// Sample standard deviation (n - 1); zero for fewer than two values.
inline double std_of(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  const double m = mean_of(v);
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return std::sqrt(s / static_cast<double>(v.size() - 1));
}

inline std::int64_t as_int(std::size_t v) { return static_cast<std::int64_t>(v); }

}  // namespace detail

// ---------------------------------------------------------------------------
// VQE sweeps
// ---------------------------------------------------------------------------

/// Rows: every distinct minimum at every (circuit, kind, qubit scale, gamma).
inline ResultRecord run_vqe_sweep(const ExperimentConfig& cfg) {
  struct Case {
    std::string circuit;
    Circuit c;
    PauliSum h;
    std::vector<double> scale;
  };
  std::vector<Case> cases;
  switch (cfg.experiment) {
    case Experiment::vqe2q:
      for (auto v : cfg.variants)
        cases.push_back({std::string("2q_") + std::string(to_string(v)), build_2q_circuit(v), transverse_ising_2q(), {1.0, 1.0}});
      break;
    case Experiment::vqe4q:
      cases.push_back({"4q", build_4q_vqe(), impurity_4q(), {1.0, 1.0, 1.0, 1.0}});
      break;
    case Experiment::vqe_unequal:
      for (auto v : cfg.variants)
        for (const std::vector<double>& s : {std::vector<double>{1.0, 0.1}, std::vector<double>{0.1, 1.0}})
          cases.push_back({std::string("2q_") + std::string(to_string(v)), build_2q_circuit(v), transverse_ising_2q(), s});
      break;
    default:
      throw std::logic_error("run_vqe_sweep: not a VQE experiment");
  }

  ResultRecord rec;
  rec.config = cfg;
  rec.table.columns = {"circuit", "kind", "qubit_scale", "gamma", "minimum", "energy",
                       "fidelity", "concurrence", "grad_norm", "params"};
  MultistartOptions opts;
  opts.n_starts = cfg.n_starts;
  std::uint64_t case_index = 0;
  nlohmann::json best = nlohmann::json::array();
  for (const auto& cs : cases) {
    std::string scale_label;
    for (std::size_t i = 0; i < cs.scale.size(); ++i) scale_label += (i ? ";" : "") + format_number(cs.scale[i]);
    for (auto kind : cfg.kinds) {
      opts.seed = derive_seed(cfg.seed, case_index++);
      const CostFn base(cs.c, NoiseSpec(make_channel(kind, 0.0), cs.scale), EnergyObjective{cs.h});
      const auto sweep = sweep_gamma(base, cfg.gamma_grid, cfg.sweep_mode, opts);
      for (const auto& pt : sweep) {
        for (std::size_t m = 0; m < pt.minima.size(); ++m) {
          const auto& r = pt.minima[m];
          rec.table.add_row({cs.circuit, std::string(to_string(kind)), scale_label, pt.gamma, detail::as_int(m),
                             r.quality.energy, r.quality.fidelity, r.quality.concurrence, r.grad_norm,
                             join_numbers(r.params)});
        }
        if (!pt.minima.empty()) {
          best.push_back({{"circuit", cs.circuit}, {"kind", to_string(kind)}, {"qubit_scale", scale_label},
                          {"gamma", pt.gamma}, {"n_minima", pt.minima.size()},
                          {"energy", pt.minima.front().quality.energy},
                          {"concurrence", pt.minima.front().quality.concurrence}});
        }
      }
    }
  }
  rec.summary["best"] = std::move(best);
  rec.summary["ground_energy"] = ground_truth(cases.front().h).energy;
  return rec;
}

// ---------------------------------------------------------------------------
// Random-target fidelity
// ---------------------------------------------------------------------------

/// Real Haar targets; target i uses RngStream(seed, i).
inline std::vector<DensityMatrix> sample_targets(int count, int n_qubits, std::uint64_t seed) {
  std::vector<DensityMatrix> out;
  out.reserve(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) {
    RngStream rng(seed, static_cast<std::uint64_t>(i));
    out.push_back(sample_real_haar_state(n_qubits, rng));
  }
  return out;
}

/// Best-of-n_starts noiseless optimum of the L-layer HEA for every target.
inline std::vector<OptResult> noiseless_optima(int layers, const std::vector<DensityMatrix>& targets, int n_starts,
                                               std::uint64_t seed) {
  const Circuit c = build_hea(layers, targets.front().n_qubits());
  std::vector<OptResult> out(targets.size());
  parallel_for(targets.size(), [&](std::size_t i) {
    MultistartOptions opts;
    opts.n_starts = n_starts;
    opts.seed = derive_seed(seed, i);
    opts.threads = 1;
    out[i] = best_of(CostFn(c, NoiseSpec::none(c.n_qubits()), InfidelityObjective{targets[i]}), opts);
  });
  return out;
}

struct TargetOutcome {
  double fidelity_ideal = 0.0;    // noiseless optimum, no noise
  double fidelity_non = 0.0;      // noiseless optimum, with noise
  double fidelity_reopt = 0.0;    // reoptimised with noise
};

/// Non-reoptimised and (optionally) reoptimised fidelity of every target at
/// one (L, kind, gamma).
inline std::vector<TargetOutcome> target_outcomes(int layers, NoiseKind kind, double gamma,
                                                  const std::vector<DensityMatrix>& targets,
                                                  const std::vector<OptResult>& optima, bool reoptimise,
                                                  const BfgsOptions& bfgs = {}) {
  const int n = targets.front().n_qubits();
  const Circuit c = build_hea(layers, n);
  const NoiseSpec noise = NoiseSpec::uniform(kind, gamma, n);
  std::vector<TargetOutcome> out(targets.size());
  parallel_for(targets.size(), [&](std::size_t i) {
    const CostFn cf(c, noise, InfidelityObjective{targets[i]});
    TargetOutcome& o = out[i];
    o.fidelity_ideal = 1.0 - optima[i].cost;
    o.fidelity_non = 1.0 - cf(optima[i].params);
    o.fidelity_reopt = reoptimise ? 1.0 - minimize(cf, optima[i].params, bfgs).cost : o.fidelity_non;
  });
  return out;
}

inline ResultRecord run_target_fidelity(const ExperimentConfig& cfg) {
  ResultRecord rec;
  rec.config = cfg;
  rec.table.columns = {"layers", "d", "kind", "gamma", "mode", "mean_fidelity", "std_fidelity",
                       "mean_rel_infidelity", "std_rel_infidelity", "mean_ideal_infidelity",
                       "std_ideal_infidelity", "model_mean_rel_infidelity", "model_std_rel_infidelity",
                       "n_targets"};
  const auto targets = sample_targets(cfg.n_targets, cfg.n_qubits, derive_seed(cfg.seed, 1));

  std::vector<ModelParams> model;
  nlohmann::json model_json = nlohmann::json::object();
  for (auto kind : cfg.kinds) {
    model.push_back(estimate_alpha_beta(kind, cfg.n_qubits, haar_sampler(), cfg.n_samples,
                                        derive_seed(cfg.seed, 100 + static_cast<std::uint64_t>(kind))));
    model_json[std::string(to_string(kind))] = {{"alpha", model.back().alpha}, {"beta", model.back().beta}};
  }
  rec.summary["model"] = model_json;

  for (int l : cfg.layers) {
    const auto optima = noiseless_optima(l, targets, cfg.n_starts, derive_seed(cfg.seed, 1000 + static_cast<std::uint64_t>(l)));
    std::vector<double> ideal_inf;
    for (const auto& o : optima) ideal_inf.push_back(o.cost);
    const double ideal_mean = detail::mean_of(ideal_inf), ideal_std = detail::std_of(ideal_inf);
    rec.summary["ideal_infidelity"][std::to_string(l)] = {{"mean", ideal_mean}, {"std", ideal_std}};
    const int d = 2 * l;
    for (std::size_t k = 0; k < cfg.kinds.size(); ++k) {
      for (double g : cfg.gamma_grid) {
        const auto outs = target_outcomes(l, cfg.kinds[k], g, targets, optima, true);
        const auto pred = predict(model[k], g, d);
        for (int mode = 0; mode < 2; ++mode) {
          std::vector<double> f, rel;
          for (const auto& o : outs) {
            const double fv = mode == 0 ? o.fidelity_non : o.fidelity_reopt;
            f.push_back(fv);
            rel.push_back(o.fidelity_ideal - fv);
          }
          rec.table.add_row({std::int64_t{l}, std::int64_t{d}, std::string(to_string(cfg.kinds[k])), g,
                             std::string(mode == 0 ? "non_reopt" : "reopt"), detail::mean_of(f), detail::std_of(f),
                             detail::mean_of(rel), detail::std_of(rel), ideal_mean, ideal_std,
                             pred.mean_rel_infidelity, pred.std_rel_infidelity, std::int64_t{cfg.n_targets}});
        }
      }
    }
  }
  return rec;
}

// ---------------------------------------------------------------------------
// Degeneracy histogram
// ---------------------------------------------------------------------------

inline constexpr double kHistogramBinWidth = 0.002;

inline ResultRecord run_degeneracy_hist(const ExperimentConfig& cfg) {
  ResultRecord rec;
  rec.config = cfg;
  rec.table.columns = {"kind", "gamma", "bin_lower", "bin_upper", "count"};
  const int l = cfg.layers.front();
  const double gamma = cfg.gamma_grid.front();
  const auto target = sample_targets(1, cfg.n_qubits, derive_seed(cfg.seed, 1)).front();
  const auto optimum = noiseless_optima(l, {target}, cfg.n_starts, derive_seed(cfg.seed, 2)).front();
  const Circuit c = build_hea(l, cfg.n_qubits);
  const auto group = generate_degeneracy_maps(c);
  rec.summary["layers"] = l;
  rec.summary["n_maps"] = group.maps.size();
  rec.summary["rank"] = group.rank;
  rec.summary["truncated"] = group.truncated;
  rec.summary["noiseless_fidelity"] = 1.0 - optimum.cost;
  if (group.truncated) rec.summary["warning"] = "degeneracy group truncated at the enumeration cap";
  for (auto kind : cfg.kinds) {
    const auto f = degeneracy_split(c, optimum.params, group.maps, NoiseSpec::uniform(kind, gamma, cfg.n_qubits), target);
    for (const auto& [lower, count] : histogram(f, kHistogramBinWidth)) {
      rec.table.add_row({std::string(to_string(kind)), gamma, lower, lower + kHistogramBinWidth, std::int64_t{count}});
    }
    const auto [lo, hi] = std::minmax_element(f.begin(), f.end());
    rec.summary["spread"][std::string(to_string(kind))] = {{"min", *lo}, {"max", *hi}, {"range", *hi - *lo}};
  }
  return rec;
}

// ---------------------------------------------------------------------------
// Transition scan
// ---------------------------------------------------------------------------

/// Euclidean norm of the angle change with each component wrapped to (-pi, pi].
inline double angle_jump(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  double s = 0.0;
  for (Eigen::Index i = 0; i < a.size(); ++i) {
    double d = std::remainder(b[i] - a[i], 2.0 * std::numbers::pi);
    s += d * d;
  }
  return std::sqrt(s);
}

/// Indices i (of the jump from point i to i + 1) whose jump exceeds
/// `factor` times the median jump and an absolute floor.
inline std::vector<std::size_t> flag_discontinuities(const std::vector<double>& jumps, double factor = 10.0,
                                                     double floor = 1e-6) {
  if (jumps.empty()) return {};
  std::vector<double> sorted = jumps;
  std::sort(sorted.begin(), sorted.end());
  const std::size_t n = sorted.size();
  const double median = n % 2 ? sorted[n / 2] : 0.5 * (sorted[n / 2 - 1] + sorted[n / 2]);
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < jumps.size(); ++i) {
    if (jumps[i] > factor * median && jumps[i] > floor) out.push_back(i);
  }
  return out;
}

/// The four tracked parameters of a P-parameter circuit.
inline std::array<int, 4> designated_angles(int n_params) {
  return {0, n_params / 3, (2 * n_params) / 3, n_params - 1};
}

inline ResultRecord run_transition_scan(const ExperimentConfig& cfg) {
  ResultRecord rec;
  rec.config = cfg;
  const int l = cfg.layers.front();
  const Circuit c = build_hea(l, cfg.n_qubits);
  const auto idx = designated_angles(c.n_params());
  rec.table.columns = {"target", "kind", "gamma", "fidelity", "concurrence", "fidelity_noiseless",
                       "concurrence_noiseless", "theta_" + std::to_string(idx[0]), "theta_" + std::to_string(idx[1]),
                       "theta_" + std::to_string(idx[2]), "theta_" + std::to_string(idx[3]), "angle_jump",
                       "discontinuity"};
  const auto targets = sample_targets(cfg.n_targets, cfg.n_qubits, derive_seed(cfg.seed, 1));
  const auto optima = noiseless_optima(l, targets, cfg.n_starts, derive_seed(cfg.seed, 2));

  struct Trace {
    std::vector<OptResult> points;
    std::vector<QualityRecord> noiseless;
  };
  nlohmann::json flagged = nlohmann::json::array();
  for (auto kind : cfg.kinds) {
    std::vector<Trace> traces(targets.size());
    parallel_for(targets.size(), [&](std::size_t t) {
      const CostFn base(c, NoiseSpec::uniform(kind, 0.0, cfg.n_qubits), InfidelityObjective{targets[t]});
      Eigen::VectorXd theta = optima[t].params;
      for (double g : cfg.gamma_grid) {
        const CostFn cf = base.with_noise(base.noise().with_gamma(g));
        const auto r = cfg.sweep_mode == SweepMode::track ? minimize(cf, theta) : [&] {
          MultistartOptions o;
          o.n_starts = cfg.n_starts;
          o.seed = derive_seed(cfg.seed, 10 + t);
          o.threads = 1;
          return best_of(cf, o);
        }();
        theta = r.params;
        traces[t].points.push_back(r);
        traces[t].noiseless.push_back(cf.noiseless().quality(cf.noiseless().state(r.params)));
      }
    });
    for (std::size_t t = 0; t < targets.size(); ++t) {
      const auto& pts = traces[t].points;
      std::vector<double> jumps;
      for (std::size_t i = 1; i < pts.size(); ++i) jumps.push_back(angle_jump(pts[i - 1].params, pts[i].params));
      const auto flags = flag_discontinuities(jumps);
      std::vector<bool> is_flagged(pts.size(), false);
      for (auto f : flags) is_flagged[f + 1] = true;
      if (!flags.empty()) {
        flagged.push_back({{"target", t}, {"kind", to_string(kind)}, {"first_gamma", cfg.gamma_grid[flags.front() + 1]}});
      }
      for (std::size_t i = 0; i < pts.size(); ++i) {
        const auto& p = pts[i];
        rec.table.add_row({detail::as_int(t), std::string(to_string(kind)), cfg.gamma_grid[i], p.quality.fidelity,
                           p.quality.concurrence, traces[t].noiseless[i].fidelity, traces[t].noiseless[i].concurrence,
                           p.params[idx[0]], p.params[idx[1]], p.params[idx[2]], p.params[idx[3]],
                           i == 0 ? 0.0 : jumps[i - 1], std::int64_t{is_flagged[i] ? 1 : 0}});
      }
    }
  }
  rec.summary["layers"] = l;
  rec.summary["flagged"] = flagged;
  rec.summary["n_flagged"] = flagged.size();
  rec.summary["n_traces"] = targets.size() * cfg.kinds.size();
  return rec;
}

// ---------------------------------------------------------------------------
// Valley demo
// ---------------------------------------------------------------------------

inline ResultRecord run_valley_demo(const ExperimentConfig& cfg) {
  ResultRecord rec;
  rec.config = cfg;
  rec.table.columns = {"kind", "gamma", "theta0", "theta1", "cost"};
  const Circuit c = build_valley_demo();
  const auto zero = zero_state(1);
  const int res = cfg.resolution;
  const double step = 2.0 * std::numbers::pi / res;
  for (auto kind : cfg.kinds) {
    for (double g : cfg.gamma_grid) {
      const NoiseSpec noise = NoiseSpec::uniform(kind, g, 1);
      for (int i = 0; i < res; ++i) {
        for (int j = 0; j < res; ++j) {
          const double t0 = i * step, t1 = j * step;
          rec.table.add_row({std::string(to_string(kind)), g, t0, t1,
                             fidelity(zero, evaluate(c, Eigen::Vector2d(t0, t1), noise))});
        }
      }
      // Cost range along the noiseless minimum line t0 + t1 = pi.
      double lo = 1e300, hi = -1e300;
      for (int i = 0; i < res; ++i) {
        const double t0 = i * step;
        const double v = fidelity(zero, evaluate(c, Eigen::Vector2d(t0, std::numbers::pi - t0), noise));
        lo = std::min(lo, v);
        hi = std::max(hi, v);
      }
      rec.summary["valley_range"][std::string(to_string(kind))][format_number(g)] = hi - lo;
    }
  }
  return rec;
}

// ---------------------------------------------------------------------------
// Alpha / beta table
// ---------------------------------------------------------------------------

inline ResultRecord run_alpha_beta_table(const ExperimentConfig& cfg) {
  ResultRecord rec;
  rec.config = cfg;
  rec.table.columns = {"kind", "n_qubits", "alpha", "beta", "stderr_alpha", "stderr_beta", "n_samples"};
  for (auto kind : cfg.kinds) {
    const auto p = estimate_alpha_beta(kind, cfg.n_qubits, haar_sampler(), cfg.n_samples,
                                       derive_seed(cfg.seed, static_cast<std::uint64_t>(kind)));
    rec.table.add_row({std::string(to_string(kind)), std::int64_t{cfg.n_qubits}, p.alpha, p.beta, p.stderr_alpha,
                       p.stderr_beta, std::int64_t{p.n_samples}});
  }
  return rec;
}

// ---------------------------------------------------------------------------
// Dispatch and persistence
// ---------------------------------------------------------------------------

inline ResultRecord run_experiment(const ExperimentConfig& cfg) {
  validate(cfg);
  const auto start = std::chrono::steady_clock::now();
  ResultRecord rec;
  switch (cfg.experiment) {
    case Experiment::vqe2q:
    case Experiment::vqe4q:
    case Experiment::vqe_unequal: rec = run_vqe_sweep(cfg); break;
    case Experiment::target_fidelity: rec = run_target_fidelity(cfg); break;
    case Experiment::degeneracy_hist: rec = run_degeneracy_hist(cfg); break;
    case Experiment::transition_scan: rec = run_transition_scan(cfg); break;
    case Experiment::valley_demo: rec = run_valley_demo(cfg); break;
    case Experiment::alpha_beta_table: rec = run_alpha_beta_table(cfg); break;
  }
  rec.config = cfg;
  rec.config_hash = config_hash(cfg);
  rec.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return rec;
}

inline std::filesystem::path csv_path(const ExperimentConfig& cfg) {
  return std::filesystem::path(cfg.output_dir) / (std::string(to_string(cfg.experiment)) + ".csv");
}

inline std::filesystem::path sidecar_path(const ExperimentConfig& cfg) {
  return std::filesystem::path(cfg.output_dir) / (std::string(to_string(cfg.experiment)) + ".json");
}

inline nlohmann::json sidecar_json(const ResultRecord& rec) {
  return {{"experiment", to_string(rec.config.experiment)},
          {"config", to_json(rec.config)},
          {"config_hash", rec.config_hash},
          {"seed", rec.config.seed},
          {"version", rec.version},
          {"columns", rec.table.columns},
          {"n_rows", rec.table.rows.size()},
          {"summary", rec.summary},
          {"timings", {{"wall_seconds", rec.wall_seconds}}}};
}

/// Writes the CSV and the JSON sidecar; the sidecar goes last so its presence
/// marks a complete run.
inline void write_result(const ResultRecord& rec) {
  std::filesystem::create_directories(rec.config.output_dir);
  const auto sidecar = sidecar_path(rec.config);
  std::filesystem::remove(sidecar);
  {
    std::ofstream csv(csv_path(rec.config), std::ios::binary | std::ios::trunc);
    csv << to_csv(rec.table);
    if (!csv) throw std::runtime_error("failed to write " + csv_path(rec.config).string());
  }
  std::ofstream js(sidecar, std::ios::binary | std::ios::trunc);
  js << sidecar_json(rec).dump(2) << '\n';
  if (!js) throw std::runtime_error("failed to write " + sidecar.string());
}

/// Hash stored by a previous complete run in the same output directory.
inline std::optional<std::string> completed_hash(const ExperimentConfig& cfg) {
  if (!std::filesystem::exists(csv_path(cfg)) || !std::filesystem::exists(sidecar_path(cfg))) return std::nullopt;
  try {
    std::ifstream in(sidecar_path(cfg));
    const auto j = nlohmann::json::parse(in);
    return j.at("config_hash").get<std::string>();
  } catch (const std::exception&) {
    return std::nullopt;
  }
}

enum class RunStatus { ran, skipped };

/// Runs and stores an experiment unless the same config already completed
/// in the output directory (or `force`).
inline RunStatus run_and_store(const ExperimentConfig& cfg, bool force, ResultRecord* out = nullptr) {
  validate(cfg);
  if (!force && completed_hash(cfg) == config_hash(cfg)) return RunStatus::skipped;
  ResultRecord rec = run_experiment(cfg);
  write_result(rec);
  if (out) *out = std::move(rec);
  return RunStatus::ran;
}

}  // namespace nvqa
