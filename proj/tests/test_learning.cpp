// Copyright 2026 The Avifront Authors
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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <memory>
#include <vector>

#include "avifront/classifier.h"
#include "avifront/gradcheck.h"
#include "avifront/loss.h"
#include "avifront/optim.h"
#include "avifront/rng.h"
#include "avifront/trainer.h"
#include "doctest.h"

using namespace avifront;

namespace {

constexpr double kPi = 3.14159265358979323846;

// Small configuration that keeps CNN and frontend work cheap in unit tests.
FrontendConfig tiny_config() {
  FrontendConfig cfg;
  cfg.sample_rate_hz = 8000;
  cfg.n_mels = 16;
  cfg.f_min_hz = 300.0;
  cfg.f_max_hz = 3500.0;
  cfg.n_filters = 8;
  cfg.strf_n_filters = 4;
  return cfg;
}

ClassifierConfig tiny_classifier(int input_channels = 1) {
  ClassifierConfig cfg;
  cfg.input_channels = input_channels;
  cfg.channels = {4};
  return cfg;
}

Waveform tone_or_noise(bool tone, double freq_hz, uint64_t seed) {
  Waveform w;
  w.sample_rate_hz = 8000;
  w.samples.resize(800);
  Rng rng(seed);
  for (size_t i = 0; i < w.samples.size(); ++i) {
    const double n = 0.05 * rng.normal();
    w.samples[i] =
        tone ? 0.5 * std::sin(2.0 * kPi * freq_hz * i / 8000.0) + n : n;
  }
  return w;
}

struct ToyData {
  std::vector<Waveform> x;
  std::vector<int> y;
};

ToyData toy_dataset(int n, uint64_t seed) {
  ToyData d;
  for (int i = 0; i < n; ++i) {
    const bool tone = (i % 2 == 0);
    d.x.push_back(tone_or_noise(tone, 1200.0, seed + i));
    d.y.push_back(tone ? 1 : 0);
  }
  return d;
}

}  // namespace

TEST_CASE("binary cross-entropy values and gradient") {
  SUBCASE("z = 0 gives ln 2 and a symmetric gradient") {
    const BceResult r = bce_loss(0.0, 1);
    CHECK(r.loss == doctest::Approx(std::log(2.0)).epsilon(1e-15));
    CHECK(r.dlogit == doctest::Approx(-0.5).epsilon(1e-15));
    const BceResult r0 = bce_loss(0.0, 0);
    CHECK(r0.loss == doctest::Approx(std::log(2.0)).epsilon(1e-15));
    CHECK(r0.dlogit == doctest::Approx(0.5).epsilon(1e-15));
  }
  SUBCASE("large correct logits are numerically quiet") {
    CHECK(bce_loss(50.0, 1).loss == doctest::Approx(0.0).epsilon(1e-20));
    CHECK(bce_loss(-50.0, 0).loss == doctest::Approx(0.0).epsilon(1e-20));
    CHECK(std::isfinite(bce_loss(900.0, 0).loss));
    CHECK(bce_loss(900.0, 0).loss == doctest::Approx(900.0).epsilon(1e-12));
  }
  SUBCASE("closed form at z = 1.5") {
    const BceResult r = bce_loss(1.5, 0);
    CHECK(r.loss ==
          doctest::Approx(std::log1p(std::exp(1.5))).epsilon(1e-15));
    CHECK(r.dlogit == doctest::Approx(sigmoid(1.5)).epsilon(1e-15));
  }
  SUBCASE("gradient matches finite differences") {
    const double h = 1e-6;
    for (const double z : {-3.0, -0.2, 0.7, 4.0}) {
      for (const int y : {0, 1}) {
        const double fd =
            (bce_loss(z + h, y).loss - bce_loss(z - h, y).loss) / (2.0 * h);
        CHECK(bce_loss(z, y).dlogit == doctest::Approx(fd).epsilon(1e-7));
      }
    }
  }
  SUBCASE("labels outside {0, 1} are rejected") {
    CHECK_THROWS_AS(bce_loss(0.0, 2), ConfigError);
    CHECK_THROWS_AS(bce_loss(0.0, -1), ConfigError);
  }
}

TEST_CASE("adam optimizer") {
  SUBCASE("first step moves by about lr in the gradient direction") {
    ParamTensor p("w", {2});
    p.value = {1.0, -2.0};
    p.grad = {3.7, -0.004};
    Adam adam({&p}, 0.1);
    adam.step();
    // Bias correction makes the first update lr * g / (|g| + eps).
    CHECK(p.value[0] == doctest::Approx(1.0 - 0.1).epsilon(1e-6));
    CHECK(p.value[1] == doctest::Approx(-2.0 + 0.1).epsilon(1e-4));
    CHECK(adam.step_count() == 1);
    // step() consumed the gradient.
    CHECK(p.grad[0] == 0.0);
    CHECK(p.grad[1] == 0.0);
  }
  SUBCASE("first step is invariant to gradient scale") {
    ParamTensor a("a", {1}), b("b", {1});
    a.value = {0.5};
    b.value = {0.5};
    a.grad = {1e-3};
    b.grad = {1e3};
    Adam oa({&a}, 0.01), ob({&b}, 0.01);
    oa.step();
    ob.step();
    CHECK(a.value[0] == doctest::Approx(b.value[0]).epsilon(1e-6));
  }
  SUBCASE("zero gradient leaves the value unchanged") {
    ParamTensor p("w", {1});
    p.value = {4.2};
    Adam adam({&p}, 0.5);
    adam.step();
    CHECK(p.value[0] == 4.2);
  }
  SUBCASE("learning rate must be positive") {
    ParamTensor p("w", {1});
    CHECK_THROWS_AS(Adam({&p}, 0.0), ConfigError);
  }
}

TEST_CASE("plateau scheduler") {
  SUBCASE("flat validation loss triggers one reduction after patience epochs") {
    PlateauScheduler sched(10.0, 3, 1e-4, 1e-6);
    double lr = 0.1;
    lr = sched.update(1.0, lr);  // first value counts as an improvement
    CHECK(lr == 0.1);
    lr = sched.update(1.0, lr);
    CHECK(lr == 0.1);
    lr = sched.update(1.0, lr);
    CHECK(lr == 0.1);
    lr = sched.update(1.0, lr);  // third stale epoch in a row
    CHECK(lr == doctest::Approx(0.01).epsilon(1e-12));
    // Counter was reset, next stale epoch does not reduce again.
    lr = sched.update(1.0, lr);
    CHECK(lr == doctest::Approx(0.01).epsilon(1e-12));
  }
  SUBCASE("improvement resets the stale counter") {
    PlateauScheduler sched(10.0, 2, 1e-4, 1e-6);
    double lr = 0.1;
    lr = sched.update(1.0, lr);
    lr = sched.update(1.0, lr);   // stale 1
    lr = sched.update(0.5, lr);   // improvement
    lr = sched.update(0.5, lr);   // stale 1
    CHECK(lr == 0.1);
    lr = sched.update(0.5, lr);   // stale 2 -> reduce
    CHECK(lr == doctest::Approx(0.01).epsilon(1e-12));
  }
  SUBCASE("sub-min_delta improvements count as stale") {
    PlateauScheduler sched(10.0, 1, 1e-2, 1e-6);
    double lr = 1.0;
    lr = sched.update(1.0, lr);
    lr = sched.update(0.9999, lr);  // within min_delta of best
    CHECK(lr == doctest::Approx(0.1).epsilon(1e-12));
  }
  SUBCASE("learning rate never drops below lr_min") {
    PlateauScheduler sched(10.0, 1, 1e-4, 1e-6);
    double lr = 1e-6;
    sched.update(1.0, lr);
    lr = sched.update(1.0, lr);
    CHECK(lr == 1e-6);
  }
  SUBCASE("constructor validation") {
    CHECK_THROWS_AS(PlateauScheduler(1.0, 5, 1e-4, 1e-6), ConfigError);
    CHECK_THROWS_AS(PlateauScheduler(10.0, 0, 1e-4, 1e-6), ConfigError);
  }
}

TEST_CASE("grad_check agrees with hand gradients on a quadratic map") {
  ParamTensor w("w", {3});
  w.value = {0.4, -1.1, 2.2};
  const std::vector<double> a = {1.0, -2.0, 0.5};
  const std::vector<double> b = {0.3, 0.7, -0.2};
  auto loss = [&]() {
    double acc = 0.0;
    for (int i = 0; i < 3; ++i) {
      acc += a[i] * w.value[i] + b[i] * w.value[i] * w.value[i];
    }
    return acc;
  };
  auto compute = [&]() {
    w.zero_grad();
    for (int i = 0; i < 3; ++i) w.grad[i] = a[i] + 2.0 * b[i] * w.value[i];
  };
  Rng rng(0);
  const GradCheckReport rep = grad_check(loss, compute, {&w}, 1e-5, 16, rng);
  CHECK(rep.n_checked == 3u);
  CHECK(rep.max_rel_err < 1e-9);

  // A deliberately wrong gradient is flagged.
  auto wrong = [&]() {
    w.zero_grad();
    for (int i = 0; i < 3; ++i) w.grad[i] = a[i];  // missing quadratic term
  };
  const GradCheckReport bad = grad_check(loss, wrong, {&w}, 1e-5, 16, rng);
  CHECK(bad.max_rel_err > 1e-2);
  CHECK(bad.worst_param == "w");

  CHECK_THROWS_AS(grad_check(loss, compute, {&w}, 1e-2, 16, rng), ConfigError);
}

TEST_CASE("classifier gradients match finite differences") {
  const ClassifierConfig ccfg = tiny_classifier();
  Classifier clf(ccfg, 11);
  // Pick the first input whose forward pass stays clear of ReLU/max-pool
  // kinks so the central difference stays on one linear piece.
  Grid3 input;
  for (uint64_t seed = 0; seed < 32; ++seed) {
    Grid3 candidate(1, 12, 10);
    Rng rng(seed);
    for (double& x : candidate.v) x = rng.normal();
    clf.forward(candidate);
    if (clf.last_kink_margin() > 1e-3) {
      input = candidate;
      break;
    }
  }
  REQUIRE(input.size() > 0u);
  Rng rng(5);
  const GradCheckReport rep =
      classifier_grad_check(clf, input, 1, 1e-5, 30, rng);
  CHECK(rep.n_checked > 0u);
  CAPTURE(rep.worst_param);
  CAPTURE(rep.worst_analytic);
  CAPTURE(rep.worst_numeric);
  CHECK(rep.max_rel_err < 1e-4);
}

TEST_CASE("classifier input gradient matches finite differences") {
  const ClassifierConfig ccfg = tiny_classifier();
  Classifier clf(ccfg, 3);
  Grid3 input(1, 10, 8);
  Rng rng(21);
  for (double& x : input.v) x = rng.normal();
  clf.forward(input);
  REQUIRE(clf.last_kink_margin() > 1e-4);

  const int label = 0;
  const double logit = clf.forward(input);
  for (ParamTensor* p : clf.params()) p->zero_grad();
  const Grid3 dinput = clf.backward(bce_loss(logit, label).dlogit);
  REQUIRE(dinput.same_shape(input));

  const double h = 1e-5;
  for (size_t i : {size_t(0), size_t(17), size_t(40), input.size() - 1}) {
    Grid3 ip = input, im = input;
    ip.v[i] += h;
    im.v[i] -= h;
    const double lp = bce_loss(clf.forward(ip), label).loss;
    const double lm = bce_loss(clf.forward(im), label).loss;
    const double fd = (lp - lm) / (2.0 * h);
    CHECK(dinput.v[i] == doctest::Approx(fd).epsilon(1e-4));
  }
}

TEST_CASE("learnable frontend gradients pass the probe-loss check") {
  const FrontendConfig cfg = tiny_config();
  Waveform w = tone_or_noise(true, 900.0, 42);
  SUBCASE("pcen") {
    auto fe = make_frontend(FrontendKind::Pcen, cfg, 1);
    const GradCheckReport rep = frontend_grad_check(*fe, w, 7, 1e-5, 12);
    CAPTURE(rep.worst_param);
    CHECK(rep.max_rel_err < 1e-4);
  }
  SUBCASE("per-tensor groups cover every parameter") {
    auto fe = make_frontend(FrontendKind::Pcen, cfg, 1);
    const auto groups = frontend_grad_check_groups(*fe, w, 7, 1e-5, 6);
    REQUIRE(groups.size() == 3u);
    CHECK(groups[0].group == "pcen.log_alpha");
    CHECK(groups[1].group == "pcen.log_delta");
    CHECK(groups[2].group == "pcen.logit_r");
    for (const auto& g : groups) {
      CAPTURE(g.group);
      CHECK(g.report.max_rel_err < 1e-4);
      CHECK(g.report.n_checked == 6u);
    }
  }
  SUBCASE("fixed frontends are rejected") {
    auto fe = make_frontend(FrontendKind::Logmel, cfg, 1);
    CHECK_THROWS_AS(frontend_grad_check(*fe, w, 7, 1e-5, 12), ConfigError);
  }
}

TEST_CASE("training overfits a small separable problem") {
  const FrontendConfig fcfg = tiny_config();
  auto fe = make_frontend(FrontendKind::Logmel, fcfg, 0);
  Classifier clf(tiny_classifier(), 1);
  const ToyData train = toy_dataset(8, 100);

  TrainConfig tc;
  tc.epochs = 40;
  tc.batch_size = 4;
  tc.lr = 0.02;
  tc.seed = 7;
  const TrainResult res =
      train_model(*fe, clf, train.x, train.y, train.x, train.y, tc);
  REQUIRE_FALSE(res.aborted);
  REQUIRE_FALSE(res.history.empty());
  const double first = res.history.front().train_loss;
  const double last = res.history.back().train_loss;
  CHECK(last < 0.5 * first);
  CHECK(res.history.back().train_acc == 1.0);
  CHECK(res.best_epoch >= 1);
  CHECK(res.best_params.size() == training_params(*fe, clf).size());

  // The model keeps the best-validation parameters, so a fresh evaluation
  // reproduces the recorded best validation loss.
  const EvalResult ev = evaluate(*fe, clf, train.x, train.y);
  CHECK(ev.loss == doctest::Approx(res.best_val_loss).epsilon(1e-12));
}

TEST_CASE("lr = 0 freezes every parameter but still evaluates") {
  const FrontendConfig fcfg = tiny_config();
  auto fe = make_frontend(FrontendKind::Pcen, fcfg, 9);
  Classifier clf(tiny_classifier(), 2);
  const ToyData train = toy_dataset(6, 300);

  std::vector<std::vector<double>> before;
  for (const ParamTensor* p : training_params(*fe, clf)) {
    before.push_back(p->value);
  }
  TrainConfig tc;
  tc.epochs = 3;
  tc.batch_size = 3;
  tc.lr = 0.0;
  tc.seed = 1;
  const TrainResult res =
      train_model(*fe, clf, train.x, train.y, train.x, train.y, tc);
  REQUIRE(res.history.size() == 3u);
  const std::vector<ParamTensor*> params = training_params(*fe, clf);
  for (size_t i = 0; i < params.size(); ++i) {
    REQUIRE(params[i]->value.size() == before[i].size());
    for (size_t j = 0; j < before[i].size(); ++j) {
      CHECK(params[i]->value[j] == before[i][j]);
    }
  }
  // Frozen training is stationary: every epoch sees the same model.
  CHECK(res.history[0].val_loss == res.history[2].val_loss);
}

TEST_CASE("training is bit-identical across runs with the same seed") {
  const FrontendConfig fcfg = tiny_config();
  const ToyData train = toy_dataset(8, 500);
  const ToyData val = toy_dataset(4, 900);

  auto run = [&]() {
    auto fe = make_frontend(FrontendKind::Pcen, fcfg, 4);
    Classifier clf(tiny_classifier(), 4);
    TrainConfig tc;
    tc.epochs = 4;
    tc.batch_size = 4;
    tc.lr = 0.005;
    tc.seed = 77;
    return train_model(*fe, clf, train.x, train.y, val.x, val.y, tc);
  };
  const TrainResult a = run();
  const TrainResult b = run();
  REQUIRE(a.history.size() == b.history.size());
  for (size_t i = 0; i < a.history.size(); ++i) {
    CHECK(a.history[i].train_loss == b.history[i].train_loss);
    CHECK(a.history[i].val_loss == b.history[i].val_loss);
    CHECK(a.history[i].train_acc == b.history[i].train_acc);
  }
  REQUIRE(a.best_params.size() == b.best_params.size());
  for (size_t i = 0; i < a.best_params.size(); ++i) {
    REQUIRE(a.best_params[i].size() == b.best_params[i].size());
    for (size_t j = 0; j < a.best_params[i].size(); ++j) {
      CHECK(a.best_params[i][j] == b.best_params[i][j]);
    }
  }
  CHECK(a.best_optimizer_step == b.best_optimizer_step);
}

TEST_CASE("target validation accuracy stops training early") {
  const FrontendConfig fcfg = tiny_config();
  auto fe = make_frontend(FrontendKind::Logmel, fcfg, 0);
  Classifier clf(tiny_classifier(), 1);
  const ToyData train = toy_dataset(8, 100);

  TrainConfig tc;
  tc.epochs = 50;
  tc.batch_size = 4;
  tc.lr = 0.02;
  tc.seed = 7;
  tc.target_val_acc = 0.99;
  const TrainResult res =
      train_model(*fe, clf, train.x, train.y, train.x, train.y, tc);
  REQUIRE_FALSE(res.history.empty());
  CHECK(res.history.size() < 50u);
  CHECK(res.history.back().val_acc >= 0.99);
}

TEST_CASE("non-finite parameters abort training with a named culprit") {
  const FrontendConfig fcfg = tiny_config();
  auto fe = make_frontend(FrontendKind::Pcen, fcfg, 9);
  Classifier clf(tiny_classifier(), 2);
  clf.params()[0]->value[0] = std::numeric_limits<double>::quiet_NaN();
  const ToyData train = toy_dataset(4, 300);

  TrainConfig tc;
  tc.epochs = 10;
  tc.batch_size = 4;
  tc.lr = 0.001;
  tc.seed = 1;
  const TrainResult res =
      train_model(*fe, clf, train.x, train.y, train.x, train.y, tc);
  CHECK(res.aborted);
  CHECK(res.abort_reason.find("non-finite loss") != std::string::npos);
  CHECK(res.abort_reason.find("clf.conv0.w") != std::string::npos);
}

TEST_CASE("trainer input validation") {
  const FrontendConfig fcfg = tiny_config();
  auto fe = make_frontend(FrontendKind::Logmel, fcfg, 0);
  Classifier clf(tiny_classifier(), 1);
  TrainConfig tc;
  std::vector<Waveform> x;
  std::vector<int> y;
  CHECK_THROWS_AS(train_model(*fe, clf, x, y, x, y, tc), ConfigError);
  const ToyData d = toy_dataset(4, 0);
  std::vector<int> short_y = {1};
  CHECK_THROWS_AS(train_model(*fe, clf, d.x, short_y, x, y, tc), ConfigError);
  TrainConfig bad = tc;
  bad.batch_size = 0;
  CHECK_THROWS_AS(train_model(*fe, clf, d.x, d.y, x, y, bad), ConfigError);
  CHECK_THROWS_AS(evaluate(*fe, clf, d.x, short_y), ConfigError);
}
