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

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include "remix/errors.hpp"
#include "remix/experiment.hpp"

namespace {

enum ExitCode : int { kOk = 0, kConfig = 2, kData = 3, kFault = 4 };

struct Options {
  std::string dataset = "two_moons";
  std::string imbalance = "step";
  std::string method = "remix";
  std::string milestones = "150:0.1,180:0.1";
  std::string defer = "none";
  std::string hidden = "64,64";
  std::string activation = "relu";
  std::string tau_sweep;
  std::size_t defer_epoch = 0;
  std::size_t threads = 1;
  bool no_augment = false;
};

std::vector<std::size_t> parse_widths(const std::string& text) {
  std::vector<std::size_t> widths;
  for (double w : remix::parse_real_list(text)) {
    if (w < 1 || w != static_cast<double>(static_cast<std::size_t>(w))) {
      throw remix::ConfigError("hidden widths must be positive integers, got '" + text + "'");
    }
    widths.push_back(static_cast<std::size_t>(w));
  }
  return widths;
}

void report(const remix::TrainingRun& run, const remix::TrainPlan& plan) {
  const auto& last = run.reports.back();
  std::cout << "method=" << remix::to_string(plan.method) << " epochs=" << plan.epochs << " top1=" << last.top1;
  for (std::size_t c = 0; c < last.per_class_recall.size(); ++c) {
    std::cout << " recall" << c << '=' << last.per_class_recall[c];
  }
  std::cout << '\n';
}

int run_sweep(const remix::TrainPlan& plan, const Options& opts) {
  const auto taus = remix::parse_real_list(opts.tau_sweep);
  const auto rows = remix::run_tau_sweep(plan, taus, opts.threads);
  std::filesystem::create_directories(plan.out_dir);
  std::ofstream out(plan.out_dir / "tau_sweep.csv");
  if (!out) throw remix::IoError("cannot write " + (plan.out_dir / "tau_sweep.csv").string());
  remix::write_sweep_csv(out, rows);
  remix::write_sweep_csv(std::cout, rows);
  for (const auto& row : rows) {
    if (!row.ok) std::cerr << "tau " << row.tau << " failed: " << row.error << '\n';
  }
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Train imbalanced classifiers with Remix and related mixing regularizers"};
  remix::TrainPlan plan;
  Options opts;
  std::string out_dir = "remix_out";

  app.add_option("--dataset", opts.dataset, "two_moons, two_circles, two_blobs or cifar10")->capture_default_str();
  app.add_option("--data-dir", plan.data_dir, "Directory with the CIFAR-10 binary batches");
  app.add_option("--imbalance", opts.imbalance, "longtail or step")->capture_default_str();
  app.add_option("--rho", plan.imbalance.rho, "Imbalance ratio n_max / n_min")->capture_default_str();
  app.add_option("--mu", plan.imbalance.mu, "Fraction of minority classes (step)")->capture_default_str();
  app.add_option("--n-max", plan.imbalance.n_max, "Samples in the largest class")->capture_default_str();
  app.add_option("--noise", plan.noise_sd, "Noise level of the toy generators")->capture_default_str();
  app.add_option("--eval-per-class", plan.eval_per_class, "Balanced evaluation samples per toy class")
      ->capture_default_str();
  app.add_option("--method", opts.method,
                 "erm, mixup, remix, cutmix, remix_cutmix, manifold_mixup or remix_manifold")
      ->capture_default_str();
  app.add_option("--alpha", plan.alpha, "Beta(alpha, alpha) parameter")->capture_default_str();
  app.add_option("--tau", plan.tau, "Remix threshold tau")->capture_default_str();
  app.add_option("--kappa", plan.kappa, "Remix majority ratio kappa")->capture_default_str();
  app.add_flag("--per-pair-lambda", plan.per_pair_lambda, "Draw a fresh lambda for every pair");
  app.add_option("--epochs", plan.epochs)->capture_default_str();
  app.add_option("--batch-size", plan.batch_size)->capture_default_str();
  app.add_option("--lr", plan.optim.lr)->capture_default_str();
  app.add_option("--momentum", plan.optim.momentum)->capture_default_str();
  app.add_option("--weight-decay", plan.optim.weight_decay)->capture_default_str();
  app.add_option("--milestones", opts.milestones, "Learning rate steps as e1:m1,e2:m2")->capture_default_str();
  app.add_option("--defer", opts.defer, "none, drw or drs")->capture_default_str();
  auto* defer_epoch = app.add_option("--defer-epoch", opts.defer_epoch, "Epoch the deferred phase starts");
  auto* beta = app.add_option("--beta", "Effective-number beta (default (N-1)/N)");
  app.add_option("--hidden", opts.hidden, "Hidden layer widths")->capture_default_str();
  app.add_option("--activation", opts.activation, "relu or tanh")->capture_default_str();
  app.add_flag("--no-augment", opts.no_augment, "Disable flip and crop on CIFAR-10");
  app.add_option("--raster", plan.raster_resolution, "Boundary raster resolution")->capture_default_str();
  app.add_option("--seed", plan.seed)->capture_default_str();
  app.add_option("--out", out_dir, "Output directory")->capture_default_str();
  app.add_option("--tau-sweep", opts.tau_sweep, "Run one cell per tau in this list instead of a single run");
  app.add_option("--threads", opts.threads, "Worker threads for --tau-sweep")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfig;
  }

  try {
    plan.dataset = remix::parse_dataset_kind(opts.dataset);
    plan.imbalance.kind = remix::parse_imbalance_kind(opts.imbalance);
    plan.method = remix::parse_method(opts.method);
    plan.optim.milestones = remix::parse_milestones(opts.milestones);
    plan.defer = remix::parse_defer_mode(opts.defer);
    plan.hidden_widths = parse_widths(opts.hidden);
    plan.activation = remix::parse_activation(opts.activation);
    plan.augment = !opts.no_augment;
    plan.out_dir = out_dir;
    if (*defer_epoch) plan.defer_epoch = opts.defer_epoch;
    if (*beta) plan.beta = beta->as<double>();
    plan.validate();
  } catch (const remix::ParameterError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfig;
  }

  try {
    if (!opts.tau_sweep.empty()) return run_sweep(plan, opts);
    const auto run = remix::run_training(plan);
    report(run, plan);
    return kOk;
  } catch (const remix::ParameterError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfig;
  } catch (const remix::DataError& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return kData;
  } catch (const std::exception& e) {
    std::cerr << "training fault: " << e.what() << '\n';
    return kFault;
  }
}
