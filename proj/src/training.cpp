/* Copyright 2026 The codeseg Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#include "codeseg/training.hpp"

#include <cmath>
#include <algorithm>
#include <numeric>
#include <sstream>
#include <utility>

#include "json.hpp"

#include "codeseg/error.hpp"
#include "codeseg/log.hpp"

namespace codeseg {

void TrainConfig::validate() const {
  if (batch_size < 1) fail(ErrorCode::kConfig, "batch_size must be at least 1");
  if (patience < 1) fail(ErrorCode::kConfig, "patience must be at least 1");
  if (max_epochs < 1) fail(ErrorCode::kConfig, "max_epochs must be at least 1");
  if (!(threshold > 0.0 && threshold < 1.0)) {
    fail(ErrorCode::kConfig, "threshold must lie strictly between 0 and 1");
  }
  if (!(adam.lr > 0.0)) fail(ErrorCode::kConfig, "learning rate must be positive");
}

bool EarlyStopping::observe(double metric) {
  ++epochs_seen_;
  if (epochs_seen_ == 1 || metric > best_) {
    best_ = metric;
    best_epoch_ = epochs_seen_;
    stale_ = 0;
    return true;
  }
  ++stale_;
  return false;
}

std::string history_to_json(const TrainHistory& history) {
  nlohmann::ordered_json j;
  j["best_epoch"] = history.best_epoch;
  j["early_stopped"] = history.early_stopped;
  auto& epochs = j["epochs"] = nlohmann::ordered_json::array();
  for (const auto& e : history.epochs) {
    epochs.push_back({{"epoch", e.epoch},
                      {"train_loss", e.train_loss},
                      {"val_newline_accuracy", e.val_accuracy}});
  }
  return j.dump(2);
}

std::string report_to_json(const EvalReport& r) {
  nlohmann::ordered_json j;
  j["newline_accuracy"] = r.newline_accuracy;
  j["scored_newlines"] = r.scored();
  j["confusion"] = {{"true_positives", r.true_positives},
                    {"true_negatives", r.true_negatives},
                    {"false_positives", r.false_positives},
                    {"false_negatives", r.false_negatives}};
  j["positive_rate"] = r.positive_rate;
  return j.dump(2);
}

void check_variant(ModelKind kind, SampleVariant variant) {
  if (variant_for(kind) != variant) {
    fail(ErrorCode::kVariantMismatch,
         "a " + std::string(kind_name(kind)) + " model needs " +
             std::string(variant_name(variant_for(kind))) + " samples, got " +
             std::string(variant_name(variant)) + " samples");
  }
}

EvalReport score_newlines(std::span<const double> probabilities,
                          std::span<const std::uint8_t> labels, double threshold) {
  if (probabilities.size() != labels.size()) {
    fail(ErrorCode::kShapeMismatch, "score_newlines: probability/label count mismatch");
  }
  EvalReport r;
  std::size_t positives = 0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const bool predicted = probabilities[i] >= threshold;
    const bool actual = labels[i] != 0;
    positives += actual;
    if (predicted && actual) ++r.true_positives;
    else if (!predicted && !actual) ++r.true_negatives;
    else if (predicted) ++r.false_positives;
    else ++r.false_negatives;
  }
  const std::size_t n = r.scored();
  if (n == 0) fail(ErrorCode::kPrecondition, "no newlines to score; newline accuracy undefined");
  r.newline_accuracy = static_cast<double>(r.true_positives + r.true_negatives) / static_cast<double>(n);
  r.positive_rate = static_cast<double>(positives) / static_cast<double>(n);
  return r;
}

void predict_newlines(const ModelParams& model, const SampleSet& samples,
                      std::vector<double>& probabilities, std::vector<std::uint8_t>& labels) {
  check_variant(model.spec.kind, variant_of(samples));
  probabilities.clear();
  labels.clear();
  Rng unused(0);
  std::visit(
      [&](const auto& list) {
        using T = typename std::decay_t<decltype(list)>::value_type;
        for (const auto& s : list) {
          if constexpr (std::is_same_v<T, BagSample>) {
            probabilities.push_back(logreg_forward(model, s.counts));
            labels.push_back(s.label);
          } else if constexpr (std::is_same_v<T, CenteredSample>) {
            probabilities.push_back(centered_forward(model, s.symbols, false, unused));
            labels.push_back(s.label);
          } else {
            bool any_newline = false;
            for (Symbol sym : s.symbols) any_newline |= (sym == kNewline);
            if (!any_newline) continue;
            const auto probs = uncentered_forward(model, s.symbols, false, unused);
            for (std::size_t i = 0; i < kSeqWindow; ++i) {
              if (s.symbols[i] != kNewline) continue;
              probabilities.push_back(probs[i]);
              labels.push_back(s.labels[i]);
            }
          }
        }
      },
      samples);
}

EvalReport evaluate(const ModelParams& model, const SampleSet& samples, double threshold) {
  if (sample_count(samples) == 0) {
    fail(ErrorCode::kPrecondition, "cannot evaluate on an empty sample set");
  }
  std::vector<double> probs;
  std::vector<std::uint8_t> labels;
  predict_newlines(model, samples, probs, labels);
  return score_newlines(probs, labels, threshold);
}

double baseline_accuracy(const SampleSet& samples) {
  std::size_t scored = 0;
  std::size_t negatives = 0;
  std::visit(
      [&](const auto& list) {
        using T = typename std::decay_t<decltype(list)>::value_type;
        for (const auto& s : list) {
          if constexpr (std::is_same_v<T, SeqSample>) {
            for (std::size_t i = 0; i < kSeqWindow; ++i) {
              if (s.symbols[i] != kNewline) continue;
              ++scored;
              negatives += (s.labels[i] == 0);
            }
          } else {
            ++scored;
            negatives += (s.label == 0);
          }
        }
      },
      samples);
  if (scored == 0) fail(ErrorCode::kPrecondition, "baseline accuracy undefined: no newlines");
  return static_cast<double>(negatives) / static_cast<double>(scored);
}

double batch_loss_and_gradient(const ModelParams& model, const SampleSet& set,
                               std::span<const std::size_t> batch, Rng& dropout_rng,
                               ModelParams& grads) {
  check_variant(model.spec.kind, variant_of(set));
  double total = 0.0;
  std::size_t outputs = 0;
  std::visit(
      [&](const auto& list) {
        using T = typename std::decay_t<decltype(list)>::value_type;
        const std::size_t per_sample = std::is_same_v<T, SeqSample> ? kSeqWindow : 1;
        outputs = batch.size() * per_sample;
        const double scale = 1.0 / static_cast<double>(outputs);
        for (std::size_t idx : batch) {
          const auto& s = list.at(idx);
          if constexpr (std::is_same_v<T, BagSample>) {
            total += logreg_loss(model, s.counts, s.label, &grads, scale);
          } else if constexpr (std::is_same_v<T, CenteredSample>) {
            total += centered_loss(model, s.symbols, s.label, true, dropout_rng, &grads, scale);
          } else {
            total += uncentered_loss(model, s.symbols, s.labels, true, dropout_rng, &grads, scale);
          }
        }
      },
      set);
  return outputs == 0 ? 0.0 : total / static_cast<double>(outputs);
}

TrainResult train(const ModelParams& model, const SampleSet& train_samples,
                  const SampleSet& val_samples, const TrainConfig& cfg,
                  const EpochCallback& on_epoch) {
  cfg.validate();
  check_variant(model.spec.kind, variant_of(train_samples));
  check_variant(model.spec.kind, variant_of(val_samples));
  if (sample_count(val_samples) == 0) fail(ErrorCode::kPrecondition, "validation set is empty");
  const std::size_t n = sample_count(train_samples);
  if (n == 0) fail(ErrorCode::kPrecondition, "training set is empty");

  TrainResult result{model, {}};
  ModelParams params = model;
  ModelParams best = model;
  ModelParams grads = model.zeros_like();
  nn::AdamState adam;
  EarlyStopping stopper(cfg.patience);
  const Rng root(cfg.seed);

  std::vector<std::size_t> order(n);
  for (std::size_t epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
    Rng shuffle_rng = root.derive(2 * epoch);
    Rng dropout_rng = root.derive(2 * epoch + 1);
    std::iota(order.begin(), order.end(), std::size_t{0});
    shuffle_rng.shuffle(std::span<std::size_t>(order));

    double loss_sum = 0.0;
    std::size_t batches = 0;
    for (std::size_t start = 0; start < n; start += cfg.batch_size) {
      const std::size_t end = std::min(n, start + cfg.batch_size);
      const std::span<const std::size_t> batch(order.data() + start, end - start);
      for (auto& ref : grads.tensors()) ref.tensor->zero();
      const double loss = batch_loss_and_gradient(params, train_samples, batch, dropout_rng, grads);
      if (!std::isfinite(loss)) {
        fail(ErrorCode::kNumerical, "non-finite loss in epoch " + std::to_string(epoch) +
                                        ", batch " + std::to_string(batches));
      }
      const auto grad_refs = std::as_const(grads).tensors();
      nn::adam_step(params.tensors(), grad_refs, adam, cfg.adam);
      // Batch losses are weighted by batch size so the epoch figure is a
      // per-output mean even when the last batch is short.
      loss_sum += loss * static_cast<double>(end - start);
      ++batches;
    }

    EpochRecord rec;
    rec.epoch = epoch;
    rec.train_loss = loss_sum / static_cast<double>(n);
    rec.val_accuracy = evaluate(params, val_samples, cfg.threshold).newline_accuracy;
    result.history.epochs.push_back(rec);

    std::ostringstream msg;
    msg << "epoch " << epoch << " loss=" << rec.train_loss
        << " val_newline_accuracy=" << rec.val_accuracy;
    log::info(msg.str());
    if (on_epoch) on_epoch(rec);

    if (stopper.observe(rec.val_accuracy)) best = params;
    if (cfg.target_accuracy > 0.0 && rec.val_accuracy >= cfg.target_accuracy) break;
    if (stopper.should_stop()) {
      result.history.early_stopped = true;
      break;
    }
  }
  result.history.best_epoch = stopper.best_epoch();
  result.model = std::move(best);
  return result;
}

}  // namespace codeseg
