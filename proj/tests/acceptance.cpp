// Copyright 2026 The Remix Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Acceptance gate. Prints one PASS/FAIL line per criterion and exits nonzero
// if any criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <iterator>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include "oracles.hpp"
#include "remix/experiment.hpp"
#include "remix/imbalance.hpp"
#include "remix/mixing.hpp"
#include "remix/model.hpp"

namespace fs = std::filesystem;
using namespace remix;

namespace {

struct Outcome {
  bool pass;
  std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string fmt(double v, int precision = 4) {
  std::ostringstream os;
  os.precision(precision);
  os << v;
  return os.str();
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

fs::path scratch_dir() {
  static const fs::path dir = [] {
    const auto d = fs::temp_directory_path() / ("remix_acceptance_" + std::to_string(::getpid()));
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

int run_cli(const std::string& args, const fs::path& out) {
  const std::string cmd = std::string("\"") + REMIX_CLI_PATH + "\" " + args + " --out \"" + out.string() +
                          "\" > \"" + (out.string() + ".log") + "\" 2>&1";
  return std::system(cmd.c_str());
}

// Label factor agrees with the case-by-case oracle on 10^6 tuples, < 5 s.
Outcome label_factor_oracle() {
  const auto start = Clock::now();
  const double taus[] = {0.0, 0.25, 0.5, 1.0};
  const double kappas[] = {1.0, 3.0, 10.0};
  Rng rng = make_rng(2024);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_int_distribution<std::size_t> count(1, 2000);
  std::uniform_int_distribution<int> pick(0, 9);
  std::size_t mismatches = 0;
  constexpr std::size_t kTuples = 1'000'000;
  for (std::size_t t = 0; t < kTuples; ++t) {
    const double tau = taus[t % 4];
    const double kappa = kappas[(t / 4) % 3];
    double lambda = unit(rng);
    // Bias a share of draws onto the branch boundaries.
    const int mode = pick(rng);
    if (mode == 0) lambda = tau;
    if (mode == 1) lambda = 1.0 - tau;
    if (mode == 2) lambda = std::round(lambda * 8.0) / 8.0;
    std::size_t n_i = count(rng);
    std::size_t n_j = count(rng);
    if (mode == 3) n_i = static_cast<std::size_t>(kappa) * n_j;
    if (mode == 4) n_j = static_cast<std::size_t>(kappa) * n_i;
    if (mode == 5) n_j = n_i;
    const double got = remix_label_factor(lambda, n_i, n_j, tau, kappa);
    const double want = oracle::label_factor(lambda, n_i, n_j, tau, kappa);
    if (got != want) ++mismatches;
  }
  const double elapsed = seconds_since(start);
  return {mismatches == 0 && elapsed < 5.0,
          std::to_string(mismatches) + " mismatches in 1e6 tuples, " + fmt(elapsed, 3) + " s (limit 5 s)"};
}

// Remix with tau = 0 and Mixup give byte-identical metrics.csv, < 30 s.
Outcome tau_zero_degeneration() {
  const auto start = Clock::now();
  const auto a = scratch_dir() / "degenerate_mixup";
  const auto b = scratch_dir() / "degenerate_remix";
  const std::string common = "--dataset two_moons --epochs 50 --seed 11";
  const int ra = run_cli(common + " --method mixup", a);
  const int rb = run_cli(common + " --method remix --tau 0", b);
  const double elapsed = seconds_since(start);
  if (ra != 0 || rb != 0) return {false, "CLI exit status " + std::to_string(ra) + "/" + std::to_string(rb)};
  const auto ma = slurp(a / "metrics.csv");
  const auto mb = slurp(b / "metrics.csv");
  const bool same = !ma.empty() && ma == mb;
  return {same && elapsed < 30.0, std::string(same ? "identical" : "different") + " metrics.csv (" +
                                      std::to_string(ma.size()) + " bytes), " + fmt(elapsed, 3) +
                                      " s (limit 30 s)"};
}

// Analytic gradients within 1e-4 relative error of central differences, < 10 s.
Outcome gradient_check() {
  const auto start = Clock::now();
  const std::vector<std::vector<std::size_t>> shapes{{2, 8, 2}, {4, 16, 16, 3}, {3, 5, 7, 6, 4}, {10, 12, 10}};
  double worst = 0.0;
  std::uint64_t seed = 900;
  for (const auto& widths : shapes) {
    for (auto activation : {Activation::tanh, Activation::relu}) {
      ModelState state = ModelState::initialize({widths, activation, seed++});
      Rng rng = make_rng(seed);
      std::normal_distribution<double> gauss(0.0, 1.0);
      for (auto& layer : state.layers()) {
        for (Eigen::Index k = 0; k < layer.bias.size(); ++k) layer.bias[k] = 0.1 * gauss(rng);
      }
      const std::size_t classes = widths.back();
      std::vector<std::vector<double>> xs;
      for (int k = 0; k < 6; ++k) {
        std::vector<double> x(widths.front());
        for (auto& v : x) v = gauss(rng);
        xs.push_back(std::move(x));
      }
      std::vector<WeightedExample> batch;
      std::gamma_distribution<double> g(1.0, 1.0);
      for (std::size_t k = 0; k < xs.size(); ++k) {
        std::vector<double> p(classes);
        double sum = 0.0;
        for (auto& v : p) sum += (v = g(rng));
        for (auto& v : p) v /= sum;
        batch.push_back({xs[k], SoftLabel(p), 0.5 + static_cast<double>(k) / 4.0});
      }
      const auto analytic = backward(state, batch);
      const auto numeric =
          oracle::finite_difference(state, [&](const ModelState& s) { return batch_loss(s, batch); });
      worst = std::max(worst, oracle::max_relative_error(analytic.gradients, numeric));
    }
  }
  const double elapsed = seconds_since(start);
  return {worst <= 1e-4 && elapsed < 10.0, std::to_string(shapes.size() * 2) + " shapes, max relative error " +
                                               fmt(worst, 3) + " (limit 1e-4), " + fmt(elapsed, 3) +
                                               " s (limit 10 s)"};
}

// CutMix area law on 10^4 masks, lambda = 0.75, 32x32.
Outcome cutmix_area_law() {
  constexpr std::size_t kSide = 32;
  const FeatureShape shape{1, kSide, kSide};
  const std::vector<double> zeros(shape.size(), 0.0);
  const std::vector<double> ones(shape.size(), 1.0);
  const double bound = (2.0 * kSide + 1.0) / (kSide * kSide);
  Rng rng = make_rng(75);
  std::size_t unclipped = 0;
  std::size_t area_violations = 0;
  std::size_t label_violations = 0;
  for (int k = 0; k < 10'000; ++k) {
    const auto mask = sample_cut_mask(kSide, kSide, 0.75, rng);
    const auto mixed = apply_cut_mask(zeros, ones, shape, mask);
    double pasted = 0.0;
    for (double v : mixed) pasted += v;
    const double fraction = pasted / static_cast<double>(shape.size());
    if (mask.width == 16 && mask.height == 16) {
      ++unclipped;
      if (std::abs(fraction - 0.25) > bound) ++area_violations;
    }
    if (mask.effective_lambda() != 1.0 - fraction) ++label_violations;
  }
  return {unclipped > 0 && area_violations == 0 && label_violations == 0,
          std::to_string(unclipped) + " unclipped masks, " + std::to_string(area_violations) +
              " outside bound " + fmt(bound) + ", " + std::to_string(label_violations) +
              " label factors != 1 - pasted fraction"};
}

// Long-tailed and step profiles have the documented shapes.
Outcome dataset_construction() {
  const auto lt = long_tailed_sizes(5000, 10, 100);
  const auto st = step_sizes(5000, 10, 100, 0.5);
  const auto& l = lt.values();
  const auto& s = st.values();
  const double tol = 1.0 / static_cast<double>(*std::min_element(l.begin(), l.end()));
  const bool lt_ratio = std::abs(lt.imbalance_ratio() / 100.0 - 1.0) <= tol;
  const bool lt_decay = std::adjacent_find(l.begin(), l.end(), std::less_equal<>()) == l.end();
  const bool st_ratio = std::abs(st.imbalance_ratio() / 100.0 - 1.0) <= tol;
  const std::set<std::size_t> levels(s.begin(), s.end());
  const bool st_two_level = levels == std::set<std::size_t>{50, 5000} &&
                            std::count(s.begin(), s.end(), 5000u) == 5 &&
                            std::is_sorted(s.rbegin(), s.rend());
  return {lt_ratio && lt_decay && st_ratio && st_two_level,
          "long-tail ratio " + fmt(lt.imbalance_ratio()) + (lt_decay ? " strictly decaying" : " NOT decaying") +
              ", step ratio " + fmt(st.imbalance_ratio()) + (st_two_level ? " two-level 5x5000/5x50" : " NOT two-level")};
}

// E_1 = 1, weights monotone in count, re-sampler frequencies within 3 sigma.
Outcome effective_number_checks() {
  bool e1 = true;
  for (double beta : {0.0, 0.5, 0.9, 0.99, 0.999, 0.9999, 0.99999}) e1 = e1 && effective_number(1, beta) == 1.0;

  const ClassCounts counts{{5000, 2997, 1797, 1077, 646, 387, 232, 139, 83, 50}};
  bool monotone = true;
  for (double beta : {0.9, 0.99, 0.999, 0.9999}) {
    const auto p = build_profile(counts, beta);
    for (std::size_t c = 0; c < counts.num_classes(); ++c) {
      for (std::size_t d = 0; d < counts.num_classes(); ++d) {
        if (counts[c] > counts[d] && p.weights[c] > p.weights[d]) monotone = false;
      }
    }
  }
  const auto profile = build_profile(counts);
  monotone = monotone && std::is_sorted(profile.weights.begin(), profile.weights.end());

  std::vector<std::size_t> labels;
  for (std::size_t c = 0; c < counts.num_classes(); ++c) labels.insert(labels.end(), counts[c], c);
  ClassBalancedSampler sampler(labels, profile);
  Rng rng = make_rng(10);
  constexpr std::size_t kDraws = 100'000;
  std::vector<double> hits(counts.num_classes(), 0.0);
  for (std::size_t k = 0; k < kDraws; ++k) hits[labels[sampler.draw(rng)]] += 1.0;
  double worst_z = 0.0;
  for (std::size_t c = 0; c < counts.num_classes(); ++c) {
    const double p = profile.sample_probs[c];
    const double sigma = std::sqrt(kDraws * p * (1.0 - p));
    worst_z = std::max(worst_z, std::abs(hits[c] - kDraws * p) / sigma);
  }
  return {e1 && monotone && worst_z <= 3.0, std::string("E_1 ") + (e1 ? "exact" : "WRONG") + ", weights " +
                                                (monotone ? "monotone" : "NOT monotone") +
                                                ", sampler max |z| " + fmt(worst_z, 3) + " over 1e5 draws (limit 3)"};
}

// Two moons, step rho = 10 (500 vs 50), 2-64-64-2, 200 epochs, 5 seeds.
Outcome boundary_shift() {
  const auto start = Clock::now();
  double erm = 0.0;
  double remix_recall = 0.0;
  double remix_top1 = 0.0;
  double mixup_top1 = 0.0;
  constexpr int kSeeds = 5;
  for (int seed = 0; seed < kSeeds; ++seed) {
    TrainPlan plan;
    plan.dataset = DatasetKind::two_moons;
    plan.imbalance = {ImbalanceKind::step, 10.0, 0.5, 2, 500};
    plan.hidden_widths = {64, 64};
    plan.epochs = 200;
    plan.seed = static_cast<std::uint64_t>(seed);
    const auto data = prepare_data(plan);
    const auto minority = minority_classes(data.counts);
    auto minority_recall = [&](const EvalReport& r) {
      double sum = 0.0;
      for (auto c : minority) sum += r.per_class_recall[c];
      return sum / static_cast<double>(minority.size());
    };
    plan.method = Method::erm;
    erm += minority_recall(train(plan, data.train, data.eval).reports.back());
    plan.method = Method::mixup;
    mixup_top1 += train(plan, data.train, data.eval).reports.back().top1;
    plan.method = Method::remix;
    plan.tau = 0.5;
    plan.kappa = 3.0;
    const auto r = train(plan, data.train, data.eval).reports.back();
    remix_recall += minority_recall(r);
    remix_top1 += r.top1;
  }
  erm /= kSeeds;
  remix_recall /= kSeeds;
  remix_top1 /= kSeeds;
  mixup_top1 /= kSeeds;
  const double elapsed = seconds_since(start);
  const bool pass = remix_recall >= erm + 0.05 && remix_top1 >= mixup_top1 - 0.01 && elapsed < 300.0;
  return {pass, "minority recall remix " + fmt(remix_recall) + " vs erm " + fmt(erm) + " (need +0.05), top1 remix " +
                    fmt(remix_top1) + " vs mixup " + fmt(mixup_top1) + " (need >= -0.01), " + fmt(elapsed, 3) +
                    " s (limit 300 s)"};
}

// forward_split then resume_from equals forward bit for bit.
Outcome manifold_identity() {
  const auto state = ModelState::initialize({{6, 32, 24, 16, 5}, Activation::tanh, 8});
  Rng rng = make_rng(9);
  std::normal_distribution<double> gauss(0.0, 2.0);
  std::size_t checks = 0;
  std::size_t mismatches = 0;
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<double> x(6);
    for (auto& v : x) v = gauss(rng);
    const Eigen::VectorXd full = forward(state, x);
    for (std::size_t k = 0; k < state.num_layers(); ++k) {
      ++checks;
      if (resume_from(state, forward_split(state, x, k), k) != full) ++mismatches;
    }
  }
  return {mismatches == 0, std::to_string(mismatches) + " mismatches over " + std::to_string(checks) +
                               " (input, layer) pairs"};
}

// Same CLI plan twice gives byte-identical metrics.csv.
Outcome cli_determinism() {
  const std::vector<std::string> plans{
      "--method remix --epochs 40 --seed 5",
      "--method remix_cutmix --defer drs --defer-epoch 10 --epochs 20 --seed 6",
      "--method remix_manifold --defer drw --defer-epoch 10 --imbalance longtail --dataset two_circles "
      "--epochs 20 --seed 7"};
  std::size_t identical = 0;
  for (std::size_t p = 0; p < plans.size(); ++p) {
    const auto a = scratch_dir() / ("determinism_" + std::to_string(p) + "_a");
    const auto b = scratch_dir() / ("determinism_" + std::to_string(p) + "_b");
    if (run_cli(plans[p], a) != 0 || run_cli(plans[p], b) != 0) continue;
    const auto ma = slurp(a / "metrics.csv");
    if (!ma.empty() && ma == slurp(b / "metrics.csv")) ++identical;
  }
  return {identical == plans.size(),
          std::to_string(identical) + "/" + std::to_string(plans.size()) + " plans reproduced byte-identically"};
}

// Tau sweep over 0.0 .. 0.9 on the toy plan: 10 rows with real variation.
Outcome tau_sweep() {
  TrainPlan plan;
  plan.method = Method::remix;
  plan.seed = 1;
  std::vector<double> taus;
  for (int k = 0; k < 10; ++k) taus.push_back(k / 10.0);
  const auto rows = run_tau_sweep(plan, taus, 4);
  std::set<double> top1;
  std::set<double> recall;
  std::size_t ok = 0;
  for (const auto& row : rows) {
    if (!row.ok) continue;
    ++ok;
    top1.insert(row.top1);
    recall.insert(row.minority_recall);
  }
  std::ostringstream table;
  write_sweep_csv(table, rows);
  std::ofstream(scratch_dir() / "tau_sweep.csv") << table.str();
  const bool varied = top1.size() >= 3 && recall.size() >= 3;
  return {rows.size() == 10 && ok == 10 && varied,
          std::to_string(rows.size()) + " rows, " + std::to_string(ok) + " ok, " + std::to_string(top1.size()) +
              " distinct top1, " + std::to_string(recall.size()) + " distinct minority recall (need >= 3 each), top1 " +
              fmt(*top1.begin()) + ".." + fmt(*top1.rbegin())};
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"label factor matches the case-by-case oracle", label_factor_oracle},
      {"remix with tau=0 reproduces mixup metrics.csv", tau_zero_degeneration},
      {"analytic gradients match central differences", gradient_check},
      {"cutmix area law and exact label factor", cutmix_area_law},
      {"long-tailed and step dataset construction", dataset_construction},
      {"effective number, weights and re-sampler", effective_number_checks},
      {"remix shifts the boundary toward the majority class", boundary_shift},
      {"manifold split and resume equals forward", manifold_identity},
      {"CLI reruns reproduce metrics.csv", cli_determinism},
      {"tau sweep table", tau_sweep},
  };
  int failures = 0;
  for (const auto& [name, check] : criteria) {
    Outcome outcome{false, ""};
    try {
      outcome = check();
    } catch (const std::exception& e) {
      outcome = {false, std::string("exception: ") + e.what()};
    }
    if (!outcome.pass) ++failures;
    std::cout << (outcome.pass ? "[PASS] " : "[FAIL] ") << name << ": " << outcome.detail << std::endl;
  }
  std::cout << (criteria.size() - static_cast<std::size_t>(failures)) << "/" << criteria.size()
            << " acceptance criteria passed" << std::endl;
  fs::remove_all(scratch_dir());
  return failures == 0 ? 0 : 1;
}
