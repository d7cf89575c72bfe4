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

#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "codeseg/models.hpp"
#include "codeseg/nnkernel.hpp"
#include "codeseg/windowing.hpp"

namespace codeseg {

struct TrainConfig {
  std::size_t batch_size = 128;
  std::size_t patience = 20;
  std::size_t max_epochs = 500;
  nn::AdamConfig adam;
  std::uint64_t seed = 42;
  double threshold = 0.5;
  // Stop as soon as validation accuracy reaches this value; 0 disables.
  double target_accuracy = 0.0;

  void validate() const;
};

struct EpochRecord {
  std::size_t epoch = 0;  // 1-based
  double train_loss = 0.0;
  double val_accuracy = 0.0;
};

struct TrainHistory {
  std::vector<EpochRecord> epochs;
  std::size_t best_epoch = 0;  // 1-based, 0 when nothing was recorded
  bool early_stopped = false;
};

std::string history_to_json(const TrainHistory& history);

// Patience counter over a metric where larger is better. Improvement means
// a strict increase over the best value seen so far.
class EarlyStopping {
 public:
  explicit EarlyStopping(std::size_t patience) : patience_(patience) {}

  // Records the next epoch's metric; returns true if it is a new best.
  bool observe(double metric);
  bool should_stop() const { return epochs_seen_ > 0 && stale_ >= patience_; }
  std::size_t best_epoch() const { return best_epoch_; }
  double best() const { return best_; }

 private:
  std::size_t patience_;
  std::size_t epochs_seen_ = 0;
  std::size_t stale_ = 0;
  std::size_t best_epoch_ = 0;
  double best_ = 0.0;
};

struct EvalReport {
  double newline_accuracy = 0.0;
  std::size_t true_positives = 0;
  std::size_t true_negatives = 0;
  std::size_t false_positives = 0;
  std::size_t false_negatives = 0;
  // Fraction of scored newlines whose label is dividing.
  double positive_rate = 0.0;

  std::size_t scored() const {
    return true_positives + true_negatives + false_positives + false_negatives;
  }
};

std::string report_to_json(const EvalReport& report);

// Throws kVariantMismatch when `variant` is not what `kind` trains on.
void check_variant(ModelKind kind, SampleVariant variant);

// Confusion counts over parallel (probability, label) lists.
EvalReport score_newlines(std::span<const double> probabilities,
                          std::span<const std::uint8_t> labels, double threshold);

// Probability and label of every scored newline in `samples`. For sequence
// samples only LF positions are scored.
void predict_newlines(const ModelParams& model, const SampleSet& samples,
                      std::vector<double>& probabilities, std::vector<std::uint8_t>& labels);

EvalReport evaluate(const ModelParams& model, const SampleSet& samples,
                    double threshold = 0.5);

// Accuracy of always predicting non-dividing.
double baseline_accuracy(const SampleSet& samples);

using EpochCallback = std::function<void(const EpochRecord&)>;

struct TrainResult {
  ModelParams model;
  TrainHistory history;
};

// Mini-batch Adam with early stopping on validation newline accuracy. The
// returned model holds the weights of the best epoch.
TrainResult train(const ModelParams& model, const SampleSet& train_samples,
                  const SampleSet& val_samples, const TrainConfig& cfg,
                  const EpochCallback& on_epoch = {});

// Mean loss of one batch and its gradient, given sample indices into `set`.
// Exposed for tests; `grads` must be shaped like `model`.
double batch_loss_and_gradient(const ModelParams& model, const SampleSet& set,
                               std::span<const std::size_t> batch, Rng& dropout_rng,
                               ModelParams& grads);

}  // namespace codeseg
