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

#include <doctest.h>

#include <sstream>

#include "remix/errors.hpp"
#include "remix/experiment.hpp"

using namespace remix;

namespace {

// Model whose output depends only on a fixed bias: predicts `cls` everywhere.
ModelState constant_model(std::size_t inputs, std::size_t classes, std::size_t cls) {
  DenseLayer hidden{Eigen::MatrixXd::Zero(2, static_cast<Eigen::Index>(inputs)), Eigen::VectorXd::Zero(2)};
  DenseLayer out{Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(classes), 2),
                 Eigen::VectorXd::Zero(static_cast<Eigen::Index>(classes))};
  out.bias[static_cast<Eigen::Index>(cls)] = 1.0;
  return ModelState({hidden, out}, Activation::relu);
}

// Predicts class 1 iff x + y > 0.
ModelState diagonal_model() {
  DenseLayer hidden{Eigen::MatrixXd::Identity(2, 2), Eigen::VectorXd::Zero(2)};
  DenseLayer out{Eigen::MatrixXd::Zero(2, 2), Eigen::VectorXd::Zero(2)};
  hidden.weight << 1, 1, -1, -1;
  out.weight << 0, 1, 1, 0;
  return ModelState({hidden, out}, Activation::relu);
}

Dataset points(std::vector<LabeledSample> samples, std::size_t classes) {
  Dataset d;
  d.samples = std::move(samples);
  d.shape = FeatureShape{1, 1, 2};
  for (std::size_t c = 0; c < classes; ++c) d.class_names.push_back("c" + std::to_string(c));
  return d;
}

TrainPlan quick_plan(Method method) {
  TrainPlan plan;
  plan.method = method;
  plan.epochs = 8;
  plan.batch_size = 32;
  plan.imbalance.n_max = 120;
  plan.eval_per_class = 100;
  plan.hidden_widths = {16, 16};
  plan.optim.milestones = {{5, 0.1}};
  plan.seed = 3;
  return plan;
}

std::string metrics_text(const TrainingRun& run) {
  std::ostringstream os;
  write_metrics_csv(os, run.reports);
  return os.str();
}

}  // namespace

TEST_CASE("evaluate") {
  const auto model = diagonal_model();
  SUBCASE("perfect predictions") {
    const auto d = points({{{1, 1}, 1}, {{-1, -2}, 0}, {{3, -1}, 1}}, 2);
    const auto r = evaluate(model, d, 4);
    CHECK(r.epoch == 4);
    CHECK(r.top1 == 1.0);
    CHECK(r.confusion == std::vector<std::vector<std::size_t>>{{1, 0}, {0, 2}});
  }
  SUBCASE("constant predictor on a balanced set") {
    std::vector<LabeledSample> s;
    for (std::size_t c = 0; c < 4; ++c) {
      for (int k = 0; k < 5; ++k) s.push_back({{static_cast<double>(k), 0.0}, c});
    }
    const auto r = evaluate(constant_model(2, 4, 2), points(s, 4), 0);
    CHECK(r.top1 == 0.25);
    CHECK(r.per_class_recall == std::vector<double>{0, 0, 1, 0});
  }
  SUBCASE("recall is the diagonal over the row sum") {
    const auto d = points({{{1, 1}, 1}, {{-1, -1}, 1}, {{-1, -1}, 0}}, 2);
    const auto r = evaluate(model, d, 0);
    CHECK(r.per_class_recall[0] == 1.0);
    CHECK(r.per_class_recall[1] == 0.5);
    CHECK(r.top1 == doctest::Approx(2.0 / 3.0));
    for (std::size_t c = 0; c < 2; ++c) {
      std::size_t row = 0;
      for (auto v : r.confusion[c]) row += v;
      CHECK(row == (c == 0 ? 1u : 2u));
    }
  }
  SUBCASE("ties go to the lower class") {
    const auto r = evaluate(constant_model(2, 3, 0), points({{{0, 0}, 0}}, 3), 0);
    CHECK(r.top1 == 1.0);
    Eigen::VectorXd tie(3);
    tie << 1.0, 2.0, 2.0;
    CHECK(argmax(tie) == 1);
  }
  SUBCASE("shape mismatch") {
    Dataset d = points({{{1, 1}, 1}}, 2);
    d.shape = FeatureShape{1, 1, 3};
    CHECK_THROWS_AS((void)evaluate(model, d, 0), DimensionError);
  }
}

TEST_CASE("boundary raster") {
  const Bounds bounds{-2, 2, -2, 2};
  const auto uniform = export_boundary_raster(constant_model(2, 2, 1), bounds, 16);
  CHECK(std::all_of(uniform.classes.begin(), uniform.classes.end(), [](auto c) { return c == 1; }));

  const auto model = diagonal_model();
  const auto raster = export_boundary_raster(model, bounds, 21);
  for (std::size_t r = 0; r < 21; ++r) {
    for (std::size_t c = 0; c < 21; ++c) {
      const auto p = raster.cell_center(r, c);
      CHECK(raster.at(r, c) == predict(model, p));
    }
  }
  CHECK(raster.at(0, 20) == 1);  // top right
  CHECK(raster.at(20, 0) == 0);  // bottom left

  std::ostringstream pgm;
  write_raster_pgm(pgm, raster);
  const std::string bytes = pgm.str();
  CHECK(bytes.rfind("P5\n21 21\n255\n", 0) == 0);
  CHECK(bytes.size() == std::string("P5\n21 21\n255\n").size() + 21 * 21);
  CHECK(static_cast<unsigned char>(bytes[13 + 20]) == 255);

  std::ostringstream csv;
  write_raster_csv(csv, raster);
  CHECK(csv.str().rfind("row,col,x,y,class\n", 0) == 0);

  CHECK_THROWS_AS((void)export_boundary_raster(constant_model(3, 2, 0), bounds, 4), ParameterError);
  CHECK_THROWS_AS((void)export_boundary_raster(model, bounds, 0), ParameterError);
}

TEST_CASE("plan validation and parsing") {
  TrainPlan plan;
  CHECK_NOTHROW(plan.validate());
  auto broken = [&](auto mutate) {
    TrainPlan p;
    mutate(p);
    CHECK_THROWS_AS(p.validate(), ConfigError);
  };
  broken([](TrainPlan& p) { p.tau = 1.5; });
  broken([](TrainPlan& p) { p.kappa = 0.5; });
  broken([](TrainPlan& p) { p.alpha = 0.0; });
  broken([](TrainPlan& p) { p.epochs = 0; });
  broken([](TrainPlan& p) { p.batch_size = 0; });
  broken([](TrainPlan& p) { p.imbalance.rho = 0.5; });
  broken([](TrainPlan& p) { p.imbalance.mu = 1.0; });
  broken([](TrainPlan& p) { p.optim.momentum = 1.0; });
  broken([](TrainPlan& p) { p.dataset = DatasetKind::cifar10; });

  const auto ms = parse_milestones("150:0.1, 180:0.01");
  REQUIRE(ms.size() == 2);
  CHECK(ms[1].epoch == 180);
  CHECK(ms[1].multiplier == 0.01);
  CHECK(parse_milestones("").empty());
  CHECK_THROWS_AS((void)parse_milestones("150"), ConfigError);
  CHECK_THROWS_AS((void)parse_milestones("x:0.1"), ConfigError);
  CHECK(parse_real_list("0,0.5,1") == std::vector<double>{0.0, 0.5, 1.0});
  CHECK_THROWS_AS((void)parse_method("focal"), ConfigError);

  plan.defer = DeferMode::drw;
  CHECK(plan.schedule().phase_boundary_epoch == 150);
  plan.defer_epoch = 3;
  CHECK(plan.schedule().phase_boundary_epoch == 3);

  std::ostringstream os;
  write_plan(os, plan);
  CHECK(os.str().find("method = remix\n") != std::string::npos);
  CHECK(os.str().find("milestones = 150:0.1,180:0.1\n") != std::string::npos);
}

TEST_CASE("prepare_data builds the imbalanced train set and a balanced eval set") {
  TrainPlan plan = quick_plan(Method::erm);
  const auto data = prepare_data(plan);
  CHECK(data.train.class_histogram() == std::vector<std::size_t>{120, 12});
  CHECK(data.eval.class_histogram() == std::vector<std::size_t>{100, 100});
  CHECK(minority_classes(data.counts) == std::vector<std::size_t>{1});
}

TEST_CASE("ERM separates balanced blobs") {
  TrainPlan plan;
  plan.method = Method::erm;
  plan.dataset = DatasetKind::two_blobs;
  plan.imbalance.rho = 1.0;
  plan.noise_sd = 0.0;
  plan.epochs = 50;
  plan.optim.milestones = {{40, 0.1}};
  plan.seed = 1;
  const auto data = prepare_data(plan);

  // Reference: the fixed linear rule x + y > 0 on the same held-out set.
  const auto linear = evaluate(diagonal_model(), data.eval, 0);
  CHECK(linear.top1 >= 0.98);

  const auto run = train(plan, data.train, data.eval);
  CHECK(run.reports.size() == 50);
  CHECK(run.reports.back().top1 >= 0.98);
  const auto raster = export_boundary_raster(run.model, bounds_of(data.eval), 40);
  CHECK(std::count(raster.classes.begin(), raster.classes.end(), 0u) > 0);
  CHECK(std::count(raster.classes.begin(), raster.classes.end(), 1u) > 0);
}

TEST_CASE("remix with tau = 0 trains exactly like mixup") {
  TrainPlan mix = quick_plan(Method::mixup);
  TrainPlan re = quick_plan(Method::remix);
  re.tau = 0.0;
  const auto data = prepare_data(mix);
  const auto a = train(mix, data.train, data.eval);
  const auto b = train(re, data.train, data.eval);
  CHECK(metrics_text(a) == metrics_text(b));
  CHECK(a.model == b.model);
  CHECK(b.relabeled_pairs == 0);

  TrainPlan active = re;
  active.tau = 0.5;
  CHECK(train(active, data.train, data.eval).relabeled_pairs > 0);
}

TEST_CASE("optimizer steps per epoch are ceil(n / batch)") {
  TrainPlan plan = quick_plan(Method::remix);
  const auto data = prepare_data(plan);  // 132 training samples
  plan.epochs = 1;
  plan.batch_size = 1000;
  CHECK(train(plan, data.train, data.eval).steps_per_epoch == std::vector<std::size_t>{1});
  plan.epochs = 2;
  plan.batch_size = 32;
  CHECK(train(plan, data.train, data.eval).steps_per_epoch == std::vector<std::size_t>{5, 5});
  plan.batch_size = 1;
  plan.epochs = 1;
  CHECK(train(plan, data.train, data.eval).steps_per_epoch == std::vector<std::size_t>{132});
}

TEST_CASE("every method and deferral mode trains to finite metrics, reproducibly") {
  for (auto method : {Method::erm, Method::mixup, Method::remix, Method::cutmix, Method::remix_cutmix,
                      Method::manifold_mixup, Method::remix_manifold}) {
    for (auto defer : {DeferMode::none, DeferMode::drw, DeferMode::drs}) {
      TrainPlan plan = quick_plan(method);
      plan.epochs = 4;
      plan.defer = defer;
      plan.defer_epoch = 2;
      const auto data = prepare_data(plan);
      const auto first = train(plan, data.train, data.eval);
      const auto second = train(plan, data.train, data.eval);
      CAPTURE(to_string(method));
      CAPTURE(to_string(defer));
      CHECK(first.model.all_finite());
      CHECK(metrics_text(first) == metrics_text(second));
      CHECK(first.model == second.model);
    }
  }
}

TEST_CASE("deferred phases change training only from the boundary on") {
  TrainPlan plain = quick_plan(Method::remix);
  plain.epochs = 4;
  const auto data = prepare_data(plain);
  for (auto mode : {DeferMode::drw, DeferMode::drs}) {
    TrainPlan deferred = plain;
    deferred.defer = mode;
    deferred.defer_epoch = 2;
    const auto a = train(plain, data.train, data.eval);
    const auto b = train(deferred, data.train, data.eval);
    for (std::size_t e = 0; e < 2; ++e) CHECK(a.reports[e].top1 == b.reports[e].top1);
    CHECK_FALSE(a.model == b.model);
  }
}

TEST_CASE("training faults carry epoch context") {
  TrainPlan plan = quick_plan(Method::erm);
  plan.optim.lr = 1e300;
  plan.optim.milestones.clear();
  const auto data = prepare_data(plan);
  try {
    (void)train(plan, data.train, data.eval);
    FAIL("expected a TrainingFault");
  } catch (const TrainingFault& e) {
    CHECK(std::string(e.what()).find("epoch ") != std::string::npos);
  }
}

TEST_CASE("tau sweep") {
  TrainPlan plan = quick_plan(Method::remix);
  plan.epochs = 3;
  const std::vector<double> taus{0.0, 0.5, 1.5, 1.0};
  const auto rows = run_tau_sweep(plan, taus, 2);
  REQUIRE(rows.size() == 4);
  CHECK(rows[0].ok);
  CHECK(rows[1].ok);
  CHECK_FALSE(rows[2].ok);  // invalid tau is marked, not fatal
  CHECK(rows[3].ok);
  CHECK(rows[1].tau == 0.5);

  // tau = 0 cell reproduces the mixup run.
  TrainPlan mix = plan;
  mix.method = Method::mixup;
  const auto data = prepare_data(mix);
  CHECK(train(mix, data.train, data.eval).reports.back().top1 == rows[0].top1);

  const auto again = run_tau_sweep(plan, taus, 1);
  std::ostringstream a;
  std::ostringstream b;
  write_sweep_csv(a, rows);
  write_sweep_csv(b, again);
  CHECK(a.str() == b.str());
  CHECK(a.str().rfind("tau,top1,minority_recall,status\n", 0) == 0);

  plan.method = Method::mixup;
  CHECK_THROWS_AS((void)run_tau_sweep(plan, taus), ConfigError);
}

TEST_CASE("run_training writes the output directory") {
  TrainPlan plan = quick_plan(Method::remix);
  plan.epochs = 2;
  plan.raster_resolution = 8;
  plan.out_dir = std::filesystem::temp_directory_path() / "remix_test_outputs";
  std::filesystem::remove_all(plan.out_dir);
  const auto run = run_training(plan);
  for (const char* name : {"metrics.csv", "confusion_final.csv", "plan.txt", "profile.txt", "model.rmxm",
                           "boundary.csv", "boundary.pgm", "train.csv"}) {
    CAPTURE(name);
    CHECK(std::filesystem::exists(plan.out_dir / name));
  }
  const auto loaded = load_model(plan.out_dir / "model.rmxm");
  CHECK(loaded.layers()[0].weight == run.model.layers()[0].weight);
  std::filesystem::remove_all(plan.out_dir);
}
