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

#include "avifront/trainer.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "avifront/loss.h"
#include "avifront/rng.h"

namespace avifront {
namespace {

std::string find_nonfinite_param(const std::vector<ParamTensor*>& params) {
  for (const ParamTensor* p : params) {
    for (double x : p->value) {
      if (!std::isfinite(x)) return p->name;
    }
    for (double g : p->grad) {
      if (!std::isfinite(g)) return p->name;
    }
  }
  return "";
}

}  // namespace

std::vector<ParamTensor*> training_params(Frontend& frontend, Classifier& clf) {
  std::vector<ParamTensor*> params = frontend.params();
  for (ParamTensor* p : clf.params()) params.push_back(p);
  return params;
}

EvalResult evaluate(Frontend& frontend, Classifier& clf,
                    const std::vector<Waveform>& xs,
                    const std::vector<int>& ys) {
  if (xs.size() != ys.size()) {
    throw ConfigError("evaluate: waveform/label count mismatch");
  }
  EvalResult r;
  if (xs.empty()) return r;
  size_t correct = 0;
  for (size_t i = 0; i < xs.size(); ++i) {
    const FeatureMap fm = frontend.forward(xs[i]);
    const double logit = clf.forward(fm.values);
    const double prob = sigmoid(logit);
    const int pred = prob > 0.5 ? 1 : 0;
    r.loss += bce_loss(logit, ys[i]).loss;
    r.probs.push_back(prob);
    r.preds.push_back(pred);
    if (pred == ys[i]) ++correct;
  }
  r.loss /= static_cast<double>(xs.size());
  r.accuracy = static_cast<double>(correct) / static_cast<double>(xs.size());
  return r;
}

TrainResult train_model(Frontend& frontend, Classifier& clf,
                        const std::vector<Waveform>& train_x,
                        const std::vector<int>& train_y,
                        const std::vector<Waveform>& val_x,
                        const std::vector<int>& val_y, const TrainConfig& cfg) {
  if (train_x.empty()) throw ConfigError("train: empty training set");
  if (train_x.size() != train_y.size() || val_x.size() != val_y.size()) {
    throw ConfigError("train: waveform/label count mismatch");
  }
  if (cfg.batch_size < 1) throw ConfigError("train: batch_size must be >= 1");
  if (cfg.epochs < 1) throw ConfigError("train: epochs must be >= 1");

  const std::vector<ParamTensor*> params = training_params(frontend, clf);
  const bool learn_frontend = frontend.learnable();
  Adam adam(params, cfg.lr > 0.0 ? cfg.lr : 1e-30);
  const bool frozen = !(cfg.lr > 0.0);
  PlateauScheduler scheduler(cfg.lr_factor, cfg.patience, cfg.min_delta,
                             cfg.lr_min);
  Rng master(cfg.seed);

  // Fixed frontends are deterministic functions of the clip, so their
  // features are computed once and reused every epoch.
  std::vector<Grid3> train_feats, val_feats;
  if (!learn_frontend) {
    train_feats.reserve(train_x.size());
    for (const Waveform& w : train_x) train_feats.push_back(frontend.forward(w).values);
    val_feats.reserve(val_x.size());
    for (const Waveform& w : val_x) val_feats.push_back(frontend.forward(w).values);
  }

  TrainResult result;
  double best = std::numeric_limits<double>::infinity();
  double lr = cfg.lr;
  std::vector<size_t> order(train_x.size());
  std::iota(order.begin(), order.end(), size_t{0});

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    Rng epoch_rng = master.fork(static_cast<uint64_t>(epoch) + 1);
    epoch_rng.shuffle(order);

    double loss_sum = 0.0;
    size_t correct = 0;
    for (size_t start = 0; start < order.size();
         start += static_cast<size_t>(cfg.batch_size)) {
      const size_t stop =
          std::min(order.size(), start + static_cast<size_t>(cfg.batch_size));
      const double inv_batch = 1.0 / static_cast<double>(stop - start);
      for (size_t bi = start; bi < stop; ++bi) {
        const size_t i = order[bi];
        double logit;
        if (learn_frontend) {
          const FeatureMap fm = frontend.forward(train_x[i]);
          logit = clf.forward(fm.values);
        } else {
          logit = clf.forward(train_feats[i]);
        }
        const BceResult bce = bce_loss(logit, train_y[i]);
        loss_sum += bce.loss;
        if ((sigmoid(logit) > 0.5 ? 1 : 0) == train_y[i]) ++correct;
        if (!std::isfinite(bce.loss)) {
          result.aborted = true;
          const std::string bad = find_nonfinite_param(params);
          result.abort_reason =
              "non-finite loss at epoch " + std::to_string(epoch + 1) +
              (bad.empty() ? std::string(", logit diverged")
                           : ", parameter '" + bad + "' is non-finite");
          return result;
        }
        const Grid3 dfeat = clf.backward(bce.dlogit * inv_batch);
        if (learn_frontend) frontend.backward(dfeat);
      }
      if (!frozen) {
        adam.step();
      } else {
        for (ParamTensor* p : params) p->zero_grad();
      }
    }

    EpochRow row;
    row.epoch = epoch + 1;
    row.train_loss = loss_sum / static_cast<double>(order.size());
    row.train_acc =
        static_cast<double>(correct) / static_cast<double>(order.size());

    if (!val_x.empty()) {
      double vloss = 0.0;
      size_t vcorrect = 0;
      for (size_t i = 0; i < val_x.size(); ++i) {
        double logit;
        if (learn_frontend) {
          logit = clf.forward(frontend.forward(val_x[i]).values);
        } else {
          logit = clf.forward(val_feats[i]);
        }
        vloss += bce_loss(logit, val_y[i]).loss;
        if ((sigmoid(logit) > 0.5 ? 1 : 0) == val_y[i]) ++vcorrect;
      }
      row.val_loss = vloss / static_cast<double>(val_x.size());
      row.val_acc =
          static_cast<double>(vcorrect) / static_cast<double>(val_x.size());
    } else {
      row.val_loss = row.train_loss;
      row.val_acc = row.train_acc;
    }
    row.lr = lr;
    result.history.push_back(row);

    if (row.val_loss < best) {
      best = row.val_loss;
      result.best_epoch = epoch + 1;
      result.best_val_loss = best;
      result.best_params.clear();
      for (const ParamTensor* p : params) result.best_params.push_back(p->value);
      result.best_moment1 = adam.moment1();
      result.best_moment2 = adam.moment2();
      result.best_optimizer_step = adam.step_count();
    }
    if (cfg.target_val_acc > 0.0 && row.val_acc >= cfg.target_val_acc) break;
    lr = scheduler.update(row.val_loss, lr);
    if (!frozen) adam.set_lr(lr);
  }

  if (result.best_epoch < 0) {
    result.best_epoch = static_cast<int>(result.history.size());
    result.best_val_loss = result.history.empty()
                               ? std::numeric_limits<double>::quiet_NaN()
                               : result.history.back().val_loss;
    for (const ParamTensor* p : params) result.best_params.push_back(p->value);
    result.best_moment1 = adam.moment1();
    result.best_moment2 = adam.moment2();
    result.best_optimizer_step = adam.step_count();
  }
  for (size_t pi = 0; pi < params.size(); ++pi) {
    params[pi]->value = result.best_params[pi];
  }
  return result;
}

}  // namespace avifront
