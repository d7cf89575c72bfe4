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
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "codeseg/nnkernel.hpp"
#include "codeseg/rng.hpp"
#include "codeseg/tensor.hpp"
#include "codeseg/windowing.hpp"

namespace codeseg {

enum class ModelKind : std::uint8_t { kLogreg = 0, kUncentered = 1, kCentered = 2 };

std::string_view kind_name(ModelKind kind);
ModelKind parse_kind(std::string_view name);
// The sample variant each architecture trains on.
SampleVariant variant_for(ModelKind kind);

struct ArchSpec {
  ModelKind kind = ModelKind::kCentered;
  std::size_t vocab = kVocabSize;
  std::size_t embed_dim = 20;
  std::size_t lstm_hidden = 256;
  std::vector<std::size_t> dense_sizes{150, 75, 1};
  std::size_t window = kCenteredWindow;
  std::size_t bag_dim = kBagDim;
  double dropout_rate = 0.2;

  static ArchSpec logreg();
  static ArchSpec uncentered();
  static ArchSpec centered();
  static ArchSpec defaults(ModelKind kind);

  // Throws kConfig. Windows other than 100/101 are accepted so that shrunken
  // networks can be gradient-checked; a centered window must be odd.
  void validate() const;

  friend bool operator==(const ArchSpec&, const ArchSpec&) = default;
};

struct DenseLayer {
  Tensor2 W;  // out x in
  Tensor2 b;  // out x 1
};

// Every trainable array of one architecture. Unused members stay empty
// (e.g. the LSTM tensors of a logistic-regression model).
struct ModelParams {
  ArchSpec spec;
  DenseLayer logreg;
  Tensor2 embedding;  // vocab x embed_dim
  nn::LstmCellParams lstm_fwd;
  nn::LstmCellParams lstm_bwd;
  std::vector<DenseLayer> dense;
  DenseLayer aggregate;  // centered only: 1 x window

  // Stable, named view over the allocated tensors. Order is fixed by kind
  // and is the order used on disk.
  std::vector<TensorRef> tensors();
  std::vector<ConstTensorRef> tensors() const;

  std::size_t parameter_count() const;
  ModelParams zeros_like() const;
  bool all_finite() const;
};

// Allocates all tensors for `spec` filled with zeros.
ModelParams allocate_model(const ArchSpec& spec);
ModelParams init_model(const ArchSpec& spec, Rng& rng);

double logreg_forward(const ModelParams& params, std::span<const std::uint32_t> counts);

// Intermediate values of one sequence-model forward pass.
struct SequenceCache {
  std::vector<Symbol> symbols;
  Tensor2 embedded;  // after dropout
  std::vector<double> embed_mask;
  nn::BiLstmCache lstm;
  Tensor2 lstm_out;  // after dropout
  std::vector<double> lstm_mask;
  std::vector<Tensor2> dense_in;   // input of each dense layer (post-dropout)
  std::vector<Tensor2> dense_out;  // raw activation output of each layer
  std::vector<std::vector<double>> dense_masks;  // hidden layers only
  std::vector<double> step_values;  // last dense layer, one per step
  double aggregate_logit = 0.0;     // centered only
  double aggregate_prob = 0.0;
};

// Runs embed -> dropout -> biLSTM -> dropout -> dense stack per time step.
// The last dense layer is linear. For the uncentered kind step_values are its
// sigmoid probabilities; for centered they are the raw outputs, which the
// aggregate layer turns into one probability.
void sequence_forward(const ModelParams& params, std::span<const Symbol> symbols,
                      bool training, Rng& rng, SequenceCache& cache);

// Backpropagates dL/dz of the output logits: one per step for uncentered,
// exactly one (the aggregate logit) for centered. Accumulates into `grads`.
void sequence_backward(const ModelParams& params, const SequenceCache& cache,
                       std::span<const double> dlogits, ModelParams& grads);

std::vector<double> uncentered_forward(const ModelParams& params,
                                       std::span<const Symbol> symbols, bool training,
                                       Rng& rng);

// Throws kPrecondition unless the center symbol is LF.
double centered_forward(const ModelParams& params, std::span<const Symbol> symbols,
                        bool training, Rng& rng);

// Loss helpers. Each returns the summed binary cross entropy of one sample
// and, when `grads` is non-null, accumulates `scale` * dLoss/dparams.
double logreg_loss(const ModelParams& params, std::span<const std::uint32_t> counts,
                   std::uint8_t label, ModelParams* grads, double scale = 1.0);
double uncentered_loss(const ModelParams& params, std::span<const Symbol> symbols,
                       std::span<const std::uint8_t> labels, bool training, Rng& rng,
                       ModelParams* grads, double scale = 1.0);
double centered_loss(const ModelParams& params, std::span<const Symbol> symbols,
                     std::uint8_t label, bool training, Rng& rng, ModelParams* grads,
                     double scale = 1.0);

}  // namespace codeseg
