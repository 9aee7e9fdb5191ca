// SPDX-License-Identifier: Apache-2.0
//
// Acceptance suite. Prints one PASS/FAIL line per criterion and exits
// nonzero if any criterion fails.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <unistd.h>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "nvqa/channels.hpp"
#include "nvqa/circuits.hpp"
#include "nvqa/degen.hpp"
#include "nvqa/experiments.hpp"
#include "nvqa/measures.hpp"
#include "nvqa/noisemodel.hpp"
#include "nvqa/optimize.hpp"
#include "nvqa/randstates.hpp"
#include "support.hpp"

using namespace nvqa;

namespace {

constexpr std::uint64_t kSeed = 2024;
constexpr int kTargets = 100;

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

// Shared across criteria 5, 6, 7 and 10.
struct Shared {
  std::vector<DensityMatrix> targets;
  std::vector<OptResult> optima2, optima4, optima6;
  std::vector<ModelParams> model;  // indexed by NoiseKind
} shared;

const std::vector<OptResult>& optima_for(int layers) {
  auto& slot = layers == 2 ? shared.optima2 : layers == 4 ? shared.optima4 : shared.optima6;
  if (slot.empty()) {
    const int count = layers == 6 ? 20 : kTargets;
    const std::vector<DensityMatrix> t(shared.targets.begin(), shared.targets.begin() + count);
    slot = noiseless_optima(layers, t, 8, derive_seed(kSeed, 1000 + static_cast<std::uint64_t>(layers)));
  }
  return slot;
}

Outcome vqe_exactness() {
  const double ground = -std::sqrt(5.0);
  double worst_e = 0.0, worst_c = 0.0;
  MultistartOptions opts;
  opts.n_starts = 20;
  opts.seed = kSeed;
  for (auto v : {TwoQubitVariant::a, TwoQubitVariant::b, TwoQubitVariant::c}) {
    const auto r = best_of(CostFn(build_2q_circuit(v), NoiseSpec::none(2), EnergyObjective{transverse_ising_2q()}), opts);
    worst_e = std::max(worst_e, std::abs(r.cost - ground));
    worst_c = std::max(worst_c, std::abs(r.quality.concurrence - 1.0 / std::sqrt(5.0)));
  }
  opts.n_starts = 40;
  const auto r4 = best_of(CostFn(build_4q_vqe(), NoiseSpec::none(4), EnergyObjective{impurity_4q()}), opts);
  worst_e = std::max(worst_e, std::abs(r4.cost - ground));
  const double c4 = std::abs(r4.quality.concurrence - 2.0 / std::sqrt(5.0));
  return {worst_e <= 1e-6 && worst_c <= 1e-6 && c4 <= 1e-6,
          fmt("max |E+sqrt5| %.2e, 2q |C-1/sqrt5| %.2e, 4q |C-2/sqrt5| %.2e", worst_e, worst_c, c4)};
}

Outcome channel_suite() {
  double completeness = 0.0;
  for (auto kind : kAllNoiseKinds)
    for (int i = 0; i <= 100; ++i) completeness = std::max(completeness, make_channel(kind, i / 100.0).completeness_error());

  std::mt19937_64 gen(kSeed);
  double fixed = 0.0;
  for (int s = 0; s < 20; ++s) {
    const auto rho = test::random_mixed(1, gen);
    const Matrix& m = rho.matrix();
    Matrix phase = m;
    phase(0, 1) = phase(1, 0) = 0.0;
    Matrix amp = Matrix::Zero(2, 2);
    amp(0, 0) = 1.0;
    const Matrix mixed = Matrix::Identity(2, 2) / 2.0;
    fixed = std::max(fixed, test::max_abs_diff(test::tensor_kraus_oracle(m, 1, make_channel(NoiseKind::phase, 1.0)), phase));
    fixed = std::max(fixed, test::max_abs_diff(test::tensor_kraus_oracle(m, 1, make_channel(NoiseKind::amplitude, 1.0)), amp));
    fixed = std::max(fixed,
                     test::max_abs_diff(test::tensor_kraus_oracle(m, 1, make_channel(NoiseKind::depolarising, 1.0)), mixed));
  }

  double product = 0.0;
  std::uniform_real_distribution<double> ug(0.0, 1.0);
  for (int s = 0; s < 50; ++s) {
    const auto rho = s % 2 ? test::random_mixed(2, gen) : test::random_pure(2, gen);
    for (auto kind : kAllNoiseKinds) {
      const double g = ug(gen);
      const Matrix oracle = test::tensor_kraus_oracle(rho.matrix(), 2, make_channel(kind, g));
      product = std::max(product, test::max_abs_diff(apply_product_channel(rho, NoiseSpec::uniform(kind, g, 2)).matrix(), oracle));
    }
  }
  return {completeness <= 1e-12 && fixed <= 1e-12 && product <= 1e-12,
          fmt("completeness %.2e, fixed points %.2e, product vs tensor Kraus %.2e", completeness, fixed, product)};
}

Outcome gradient_check() {
  double worst = 0.0;
  std::uniform_real_distribution<double> ug(0.0, 0.3);
  std::mt19937_64 gen(kSeed + 3);
  for (int c = 0; c < 20; ++c) {
    const NoiseKind kind = kAllNoiseKinds[static_cast<std::size_t>(c % 3)];
    const double g = ug(gen);
    Circuit circ = build_hea(1 + c % 3);
    Objective obj = InfidelityObjective{test::random_pure(4, gen)};
    switch (c % 5) {
      case 0: circ = build_2q_circuit(TwoQubitVariant::a); obj = EnergyObjective{transverse_ising_2q()}; break;
      case 1: circ = build_2q_circuit(TwoQubitVariant::c); obj = EnergyObjective{transverse_ising_2q()}; break;
      case 2: circ = build_4q_vqe(); obj = EnergyObjective{impurity_4q()}; break;
      default: break;
    }
    const CostFn cf(circ, NoiseSpec::uniform(kind, g, circ.n_qubits()), obj);
    const auto theta = random_angles(cf.n_params(), kSeed, 300 + static_cast<std::uint64_t>(c));
    const auto fd = test::finite_difference_gradient([&](const Eigen::VectorXd& x) { return cf(x); }, theta, 1e-5);
    worst = std::max(worst, (gradient(cf, theta) - fd).cwiseAbs().maxCoeff());
  }
  return {worst <= 1e-6, fmt("max componentwise |shift - FD| %.2e over 20 cases", worst)};
}

Outcome global_depol() {
  double worst = 0.0;
  std::mt19937_64 gen(kSeed + 4);
  std::uniform_real_distribution<double> ug(0.0, 1.0);
  for (int k = 0; k < 20; ++k) {
    const int n = 1 + k % 4;
    const int d = 1 + k % 7 * 2;
    const double g = ug(gen) * 0.5;
    const auto psi = test::random_pure(n, gen);
    Matrix rho = psi.matrix();
    for (int i = 0; i < d; ++i) {
      rho = test::global_depolarise(rho, g);
      // An interleaved unitary does not change the result; check that too.
      const Matrix u = test::embed_by_kron(test::random_unitary_1q(gen), n, i % n);
      rho = u * rho * u.adjoint();
      rho = u.adjoint() * rho * u;
    }
    const double sim = 1.0 - (psi.matrix() * rho).trace().real();
    worst = std::max(worst, std::abs(sim - global_depol_infidelity(g, d, n)));
  }
  return {worst <= 1e-12, fmt("max |closed form - simulation| %.2e over 20 triples", worst)};
}

Outcome table_one() {
  const double ref[3][2] = {{0.888, 0.00585}, {1.88, 0.119}, {2.78, 0.0132}};
  bool ok = true;
  std::string detail;
  shared.model.clear();
  for (auto kind : kAllNoiseKinds) {
    const auto k = static_cast<std::size_t>(kind);
    const auto p = estimate_alpha_beta(kind, 4, haar_sampler(), 10000, derive_seed(kSeed, 100 + k));
    shared.model.push_back(p);
    const double za = std::abs(p.alpha - ref[k][0]) / p.stderr_alpha;
    const double zb = std::abs(p.beta - ref[k][1]) / p.stderr_beta;
    ok = ok && za <= 3.0 && zb <= 3.0;
    detail += fmt("%s a=%.4f (%.1f se) b=%.5f (%.1f se); ", std::string(to_string(kind)).c_str(), p.alpha, za, p.beta, zb);
  }
  return {ok, detail};
}

Outcome expressibility() {
  const auto& opt = optima_for(4);
  std::vector<double> inf;
  int above = 0;
  for (const auto& o : opt) {
    inf.push_back(o.cost);
    if (o.cost > 1e-6) ++above;
  }
  const double mean = detail::mean_of(inf), sd = detail::std_of(inf);
  return {mean <= 1e-6 && sd <= 1e-6,
          fmt("mean infidelity %.3e, std %.3e, %d/%d targets above 1e-6", mean, sd, above, kTargets)};
}

Outcome reopt_ordering() {
  const std::vector<DensityMatrix> t(shared.targets.begin(), shared.targets.begin() + 20);
  double worst_order = -1.0, worst_depol = 0.0, phase_gain = 0.0;
  for (int l : {2, 4, 6}) {
    const auto& all = optima_for(l);
    const std::vector<OptResult> opt(all.begin(), all.begin() + 20);
    for (auto kind : kAllNoiseKinds)
      for (double g : {0.01, 0.05}) {
        const auto outs = target_outcomes(l, kind, g, t, opt, true);
        double mean_delta = 0.0;
        for (const auto& o : outs) {
          // cost = 1 - fidelity, so reopt cost - non-reopt cost = F_non - F_reopt.
          worst_order = std::max(worst_order, o.fidelity_non - o.fidelity_reopt);
          mean_delta += (o.fidelity_reopt - o.fidelity_non) / static_cast<double>(outs.size());
        }
        if (kind == NoiseKind::depolarising) worst_depol = std::max(worst_depol, std::abs(mean_delta));
        if (kind == NoiseKind::phase && l == 6 && g == 0.05) phase_gain = mean_delta;
      }
  }
  return {worst_order <= 1e-9 && worst_depol <= 1e-3 && phase_gain > 1e-3,
          fmt("max (reopt - non) cost %.2e, depolarising max |dF| %.2e, phase L=6 g=0.05 gain %.2e", worst_order,
              worst_depol, phase_gain)};
}

Outcome degeneracy() {
  const Circuit c = build_hea(4);
  const auto group = generate_degeneracy_maps(c);
  double ideal = 0.0;
  for (int s = 0; s < 3; ++s) {
    const auto theta = random_angles(c.n_params(), kSeed, 500 + static_cast<std::uint64_t>(s));
    const DensityMatrix ref = evaluate(c, theta);
    for (const auto& f : degeneracy_split(c, theta, group.maps, NoiseSpec::none(4), ref))
      ideal = std::max(ideal, std::abs(f - 1.0));
  }
  const auto& opt = optima_for(4);
  double spread[3] = {0, 0, 0};
  for (auto kind : kAllNoiseKinds) {
    const auto f = degeneracy_split(c, opt[0].params, group.maps, NoiseSpec::uniform(kind, 0.01, 4), shared.targets[0]);
    const auto [lo, hi] = std::minmax_element(f.begin(), f.end());
    spread[static_cast<int>(kind)] = *hi - *lo;
  }
  const bool ok = group.maps.size() == 4096 && ideal <= 1e-10 && spread[0] <= 1e-9 && spread[2] <= 1e-9 &&
                  spread[1] > 0.002;
  return {ok, fmt("%zu maps, |F-1| at gamma=0 %.2e, spread phase %.2e depolarising %.2e amplitude %.4f",
                  group.maps.size(), ideal, spread[0], spread[2], spread[1])};
}

Outcome entanglement_collapse() {
  double worst = 0.0;
  MultistartOptions opts;
  opts.n_starts = 20;
  opts.seed = kSeed;
  int minima = 0;
  for (auto v : {TwoQubitVariant::a, TwoQubitVariant::b, TwoQubitVariant::c}) {
    const CostFn cf(build_2q_circuit(v), NoiseSpec::uniform(NoiseKind::depolarising, 0.3, 2),
                    EnergyObjective{transverse_ising_2q()});
    for (const auto& m : multistart(cf, opts)) {
      worst = std::max(worst, m.quality.concurrence);
      ++minima;
    }
  }
  return {worst == 0.0, fmt("max concurrence %.2e over %d minima of 3 variants", worst, minima)};
}

Outcome linear_model() {
  const double gammas[] = {1e-4, 3e-4, 1e-3};
  bool ok = true;
  std::string detail;
  for (int l : {2, 4}) {
    const auto& opt = optima_for(l);
    for (auto kind : kAllNoiseKinds) {
      double num = 0.0, den = 0.0;
      for (double g : gammas) {
        double rel = 0.0;
        for (const auto& o : target_outcomes(l, kind, g, shared.targets, opt, false))
          rel += (o.fidelity_ideal - o.fidelity_non) / kTargets;
        num += g * rel;
        den += g * g;
      }
      const double slope = num / den;
      const double model = shared.model[static_cast<std::size_t>(kind)].alpha * 2 * l;
      const double ratio = slope / model;
      ok = ok && std::abs(ratio - 1.0) <= 0.3;
      detail += fmt("L%d %s %.3f/%.3f; ", l, std::string(to_string(kind)).c_str(), slope, model);
    }
  }
  return {ok, detail + "(slope/alpha*d)"};
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Outcome determinism() {
  const auto root = std::filesystem::temp_directory_path() / ("nvqa_acceptance_" + std::to_string(::getpid()));
  bool ok = true;
  std::string detail;
  std::vector<ExperimentConfig> cfgs;
  auto v = default_config(Experiment::vqe2q);
  v.gamma_grid = {0.0, 0.1, 0.2};
  v.n_starts = 5;
  cfgs.push_back(v);
  auto t = default_config(Experiment::target_fidelity);
  t.layers = {2};
  t.gamma_grid = {0.01};
  t.n_targets = 5;
  t.n_starts = 2;
  t.n_samples = 200;
  cfgs.push_back(t);
  auto h = default_config(Experiment::degeneracy_hist);
  h.layers = {2};
  h.n_starts = 2;
  cfgs.push_back(h);
  for (auto cfg : cfgs) {
    std::string bytes[2];
    for (int run = 0; run < 2; ++run) {
      cfg.output_dir = (root / std::to_string(run)).string();
      run_and_store(cfg, true);
      bytes[run] = slurp(csv_path(cfg));
    }
    const bool same = !bytes[0].empty() && bytes[0] == bytes[1];
    ok = ok && same;
    detail += fmt("%s %s (%zu bytes); ", std::string(to_string(cfg.experiment)).c_str(), same ? "identical" : "differs",
                  bytes[0].size());
  }
  std::filesystem::remove_all(root);
  return {ok, detail};
}

}  // namespace

int main() {
  shared.targets = sample_targets(kTargets, 4, derive_seed(kSeed, 1));
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria = {
      {"noiseless VQE exactness", vqe_exactness},
      {"channel correctness", channel_suite},
      {"parameter-shift gradient", gradient_check},
      {"global depolarising closed form", global_depol},
      {"alpha/beta table", table_one},
      {"layered ansatz expressibility (L=4)", expressibility},
      {"reoptimisation ordering", reopt_ordering},
      {"degeneracy suite", degeneracy},
      {"depolarising entanglement collapse", entanglement_collapse},
      {"linear model slope", linear_model},
      {"determinism", determinism},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double sec = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::printf("%s %2zu %s: %s [%.1f s]\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first, o.detail.c_str(), sec);
    std::fflush(stdout);
    if (!o.pass) ++failed;
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
