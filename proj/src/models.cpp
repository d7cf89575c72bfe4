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

#include "codeseg/models.hpp"

#include <algorithm>
#include <string>

#include "codeseg/error.hpp"

namespace codeseg {

std::string_view kind_name(ModelKind kind) {
  switch (kind) {
    case ModelKind::kLogreg: return "logreg";
    case ModelKind::kUncentered: return "uncentered";
    case ModelKind::kCentered: return "centered";
  }
  return "?";
}

ModelKind parse_kind(std::string_view name) {
  if (name == "logreg") return ModelKind::kLogreg;
  if (name == "uncentered") return ModelKind::kUncentered;
  if (name == "centered") return ModelKind::kCentered;
  fail(ErrorCode::kConfig, "unknown architecture '" + std::string(name) + "'");
}

SampleVariant variant_for(ModelKind kind) {
  switch (kind) {
    case ModelKind::kLogreg: return SampleVariant::kBag;
    case ModelKind::kUncentered: return SampleVariant::kUncentered;
    case ModelKind::kCentered: return SampleVariant::kCentered;
  }
  return SampleVariant::kCentered;
}

ArchSpec ArchSpec::logreg() {
  ArchSpec s;
  s.kind = ModelKind::kLogreg;
  s.window = kBagLines;
  return s;
}

ArchSpec ArchSpec::uncentered() {
  ArchSpec s;
  s.kind = ModelKind::kUncentered;
  s.window = kSeqWindow;
  return s;
}

ArchSpec ArchSpec::centered() {
  ArchSpec s;
  s.kind = ModelKind::kCentered;
  s.window = kCenteredWindow;
  return s;
}

ArchSpec ArchSpec::defaults(ModelKind kind) {
  switch (kind) {
    case ModelKind::kLogreg: return logreg();
    case ModelKind::kUncentered: return uncentered();
    case ModelKind::kCentered: return centered();
  }
  return centered();
}

void ArchSpec::validate() const {
  auto bad = [](const std::string& msg) { fail(ErrorCode::kConfig, "invalid ArchSpec: " + msg); };
  if (!(dropout_rate >= 0.0 && dropout_rate < 1.0)) bad("dropout_rate must be in [0, 1)");
  if (kind == ModelKind::kLogreg) {
    if (bag_dim != kBagDim) bad("logreg requires bag_dim = 1792");
    return;
  }
  if (vocab < 1 || embed_dim < 1 || lstm_hidden < 1) bad("vocab, embed_dim and lstm_hidden must be positive");
  if (dense_sizes.empty() || dense_sizes.back() != 1) bad("dense_sizes must end with 1");
  if (std::find(dense_sizes.begin(), dense_sizes.end(), 0u) != dense_sizes.end()) {
    bad("dense sizes must be positive");
  }
  if (window < 1) bad("window must be positive");
  if (kind == ModelKind::kCentered && window % 2 == 0) bad("centered window must be odd");
}

std::vector<TensorRef> ModelParams::tensors() {
  std::vector<TensorRef> out;
  if (spec.kind == ModelKind::kLogreg) {
    out.push_back({"logreg.W", &logreg.W});
    out.push_back({"logreg.b", &logreg.b});
    return out;
  }
  out.push_back({"embedding", &embedding});
  out.push_back({"lstm_fwd.W", &lstm_fwd.W});
  out.push_back({"lstm_fwd.U", &lstm_fwd.U});
  out.push_back({"lstm_fwd.b", &lstm_fwd.b});
  out.push_back({"lstm_bwd.W", &lstm_bwd.W});
  out.push_back({"lstm_bwd.U", &lstm_bwd.U});
  out.push_back({"lstm_bwd.b", &lstm_bwd.b});
  for (std::size_t l = 0; l < dense.size(); ++l) {
    out.push_back({"dense" + std::to_string(l) + ".W", &dense[l].W});
    out.push_back({"dense" + std::to_string(l) + ".b", &dense[l].b});
  }
  if (spec.kind == ModelKind::kCentered) {
    out.push_back({"aggregate.W", &aggregate.W});
    out.push_back({"aggregate.b", &aggregate.b});
  }
  return out;
}

std::vector<ConstTensorRef> ModelParams::tensors() const {
  std::vector<ConstTensorRef> out;
  for (const auto& ref : const_cast<ModelParams*>(this)->tensors()) {
    out.push_back({ref.name, ref.tensor});
  }
  return out;
}

std::size_t ModelParams::parameter_count() const {
  std::size_t n = 0;
  for (const auto& ref : tensors()) n += ref.tensor->size();
  return n;
}

ModelParams ModelParams::zeros_like() const {
  ModelParams z = *this;
  for (auto& ref : z.tensors()) ref.tensor->zero();
  return z;
}

bool ModelParams::all_finite() const {
  for (const auto& ref : tensors()) {
    if (!ref.tensor->all_finite()) return false;
  }
  return true;
}

ModelParams allocate_model(const ArchSpec& spec) {
  spec.validate();
  ModelParams m;
  m.spec = spec;
  if (spec.kind == ModelKind::kLogreg) {
    m.logreg = {Tensor2(1, spec.bag_dim), Tensor2(1, 1)};
    return m;
  }
  m.embedding = Tensor2(spec.vocab, spec.embed_dim);
  m.lstm_fwd = nn::LstmCellParams::zeros(spec.embed_dim, spec.lstm_hidden);
  m.lstm_bwd = nn::LstmCellParams::zeros(spec.embed_dim, spec.lstm_hidden);
  std::size_t in = 2 * spec.lstm_hidden;
  for (std::size_t out : spec.dense_sizes) {
    m.dense.push_back({Tensor2(out, in), Tensor2(out, 1)});
    in = out;
  }
  if (spec.kind == ModelKind::kCentered) m.aggregate = {Tensor2(1, spec.window), Tensor2(1, 1)};
  return m;
}

ModelParams init_model(const ArchSpec& spec, Rng& rng) {
  ModelParams m = allocate_model(spec);
  if (spec.kind == ModelKind::kLogreg) {
    nn::glorot_uniform(m.logreg.W, rng);
    return m;
  }
  nn::glorot_uniform(m.embedding, rng);
  m.lstm_fwd = nn::LstmCellParams::init(spec.embed_dim, spec.lstm_hidden, rng);
  m.lstm_bwd = nn::LstmCellParams::init(spec.embed_dim, spec.lstm_hidden, rng);
  for (auto& layer : m.dense) nn::glorot_uniform(layer.W, rng);
  if (spec.kind == ModelKind::kCentered) nn::glorot_uniform(m.aggregate.W, rng);
  return m;
}

namespace {

double logreg_logit(const ModelParams& params, std::span<const std::uint32_t> counts) {
  if (params.spec.kind != ModelKind::kLogreg) {
    fail(ErrorCode::kPrecondition, "logreg_forward called on a non-logreg model");
  }
  if (counts.size() != params.spec.bag_dim) {
    fail(ErrorCode::kShapeMismatch, "logreg_forward: expected " +
                                        std::to_string(params.spec.bag_dim) + " counts, got " +
                                        std::to_string(counts.size()));
  }
  double z = params.logreg.b.data[0];
  const auto& w = params.logreg.W.data;
  for (std::size_t i = 0; i < counts.size(); ++i) {
    if (counts[i] != 0) z += w[i] * static_cast<double>(counts[i]);
  }
  return z;
}

}  // namespace

double logreg_forward(const ModelParams& params, std::span<const std::uint32_t> counts) {
  return nn::sigmoid(logreg_logit(params, counts));
}

double logreg_loss(const ModelParams& params, std::span<const std::uint32_t> counts,
                   std::uint8_t label, ModelParams* grads, double scale) {
  const double z = logreg_logit(params, counts);
  const double p = nn::sigmoid(z);
  const double y = label;
  if (grads != nullptr) {
    const double dz = scale * (p - y);
    auto& gw = grads->logreg.W.data;
    for (std::size_t i = 0; i < counts.size(); ++i) {
      if (counts[i] != 0) gw[i] += dz * static_cast<double>(counts[i]);
    }
    grads->logreg.b.data[0] += dz;
  }
  return nn::bce_logit_loss(z, y);
}

namespace {

void require_sequence_kind(const ModelParams& params) {
  if (params.spec.kind == ModelKind::kLogreg) {
    fail(ErrorCode::kPrecondition, "sequence forward called on a logreg model");
  }
}

nn::Activation layer_activation(const ModelParams& params, std::size_t layer) {
  // The output layer is computed as a logit; the uncentered sigmoid is
  // applied afterwards so the loss can be taken on the logit.
  return layer + 1 < params.dense.size() ? nn::Activation::kTanh : nn::Activation::kNone;
}

}  // namespace

void sequence_forward(const ModelParams& params, std::span<const Symbol> symbols, bool training,
                      Rng& rng, SequenceCache& cache) {
  require_sequence_kind(params);
  const ArchSpec& spec = params.spec;
  if (symbols.size() != spec.window) {
    fail(ErrorCode::kShapeMismatch, "sequence_forward: expected " + std::to_string(spec.window) +
                                        " symbols, got " + std::to_string(symbols.size()));
  }
  const std::size_t T = symbols.size();
  const double rate = spec.dropout_rate;

  cache.symbols.assign(symbols.begin(), symbols.end());
  cache.embedded = nn::embedding_forward(symbols, params.embedding);
  cache.embed_mask = nn::dropout_inplace(cache.embedded.flat(), rate, rng, training);

  cache.lstm = nn::bilstm_forward(cache.embedded, params.lstm_fwd, params.lstm_bwd);
  cache.lstm_out = cache.lstm.out;
  cache.lstm_mask = nn::dropout_inplace(cache.lstm_out.flat(), rate, rng, training);

  const std::size_t L = params.dense.size();
  cache.dense_in.resize(L);
  cache.dense_out.resize(L);
  cache.dense_masks.assign(L > 0 ? L - 1 : 0, {});
  const Tensor2* input = &cache.lstm_out;
  for (std::size_t l = 0; l < L; ++l) {
    const DenseLayer& layer = params.dense[l];
    cache.dense_in[l] = *input;
    Tensor2& out = cache.dense_out[l];
    out = Tensor2(T, layer.W.rows);
    const auto act = layer_activation(params, l);
    for (std::size_t t = 0; t < T; ++t) {
      nn::dense_forward(cache.dense_in[l].row(t), layer.W, layer.b.flat(), act, out.row(t));
    }
    if (l + 1 < L) {
      // The next layer consumes a dropped-out copy; dense_out keeps the raw
      // activations for the tanh derivative.
      Tensor2 next = out;
      cache.dense_masks[l] = nn::dropout_inplace(next.flat(), rate, rng, training);
      cache.dense_in[l + 1] = std::move(next);
      input = &cache.dense_in[l + 1];
    }
  }

  cache.step_values.resize(T);
  const bool uncentered = spec.kind == ModelKind::kUncentered;
  for (std::size_t t = 0; t < T; ++t) {
    const double v = cache.dense_out[L - 1](t, 0);
    cache.step_values[t] = uncentered ? nn::sigmoid(v) : v;
  }

  cache.aggregate_logit = 0.0;
  cache.aggregate_prob = 0.0;
  if (spec.kind == ModelKind::kCentered) {
    double z = params.aggregate.b.data[0];
    for (std::size_t t = 0; t < T; ++t) z += params.aggregate.W.data[t] * cache.step_values[t];
    cache.aggregate_logit = z;
    cache.aggregate_prob = nn::sigmoid(z);
  }
}

void sequence_backward(const ModelParams& params, const SequenceCache& cache,
                       std::span<const double> dlogits, ModelParams& grads) {
  require_sequence_kind(params);
  const std::size_t T = cache.symbols.size();
  const std::size_t L = params.dense.size();
  if (cache.dense_out.size() != L || cache.embedded.rows != T) {
    fail(ErrorCode::kShapeMismatch, "sequence_backward: cache does not match model");
  }

  // dL/d(last layer pre-activation) per step.
  Tensor2 dy(T, 1);
  if (params.spec.kind == ModelKind::kUncentered) {
    if (dlogits.size() != T) fail(ErrorCode::kShapeMismatch, "sequence_backward: need one logit gradient per step");
    for (std::size_t t = 0; t < T; ++t) dy.data[t] = dlogits[t];
  } else {
    if (dlogits.size() != 1) fail(ErrorCode::kShapeMismatch, "sequence_backward: need one aggregate logit gradient");
    const double dz = dlogits[0];
    for (std::size_t t = 0; t < T; ++t) {
      grads.aggregate.W.data[t] += dz * cache.step_values[t];
      dy.data[t] = dz * params.aggregate.W.data[t];
    }
    grads.aggregate.b.data[0] += dz;
  }

  for (std::size_t l = L; l-- > 0;) {
    const DenseLayer& layer = params.dense[l];
    DenseLayer& g = grads.dense[l];
    const auto act = layer_activation(params, l);
    Tensor2 dx(T, layer.W.cols);
    for (std::size_t t = 0; t < T; ++t) {
      nn::dense_backward(cache.dense_in[l].row(t), layer.W, cache.dense_out[l].row(t), dy.row(t),
                         act, g.W, g.b.flat(), dx.row(t));
    }
    const std::vector<double>& mask = (l > 0) ? cache.dense_masks[l - 1] : cache.lstm_mask;
    for (std::size_t i = 0; i < dx.data.size(); ++i) dx.data[i] *= mask[i];
    dy = std::move(dx);
  }

  Tensor2 demb(T, params.spec.embed_dim);
  nn::bilstm_backward(cache.lstm, params.lstm_fwd, params.lstm_bwd, dy, grads.lstm_fwd,
                      grads.lstm_bwd, &demb);
  for (std::size_t i = 0; i < demb.data.size(); ++i) demb.data[i] *= cache.embed_mask[i];
  nn::embedding_backward(cache.symbols, demb, grads.embedding);
}

std::vector<double> uncentered_forward(const ModelParams& params, std::span<const Symbol> symbols,
                                       bool training, Rng& rng) {
  if (params.spec.kind != ModelKind::kUncentered) {
    fail(ErrorCode::kPrecondition, "uncentered_forward called on a " +
                                       std::string(kind_name(params.spec.kind)) + " model");
  }
  SequenceCache cache;
  sequence_forward(params, symbols, training, rng, cache);
  return cache.step_values;
}

namespace {

void require_center_newline(const ModelParams& params, std::span<const Symbol> symbols) {
  if (params.spec.kind != ModelKind::kCentered) {
    fail(ErrorCode::kPrecondition, "centered_forward called on a " +
                                       std::string(kind_name(params.spec.kind)) + " model");
  }
  if (symbols.size() != params.spec.window) {
    fail(ErrorCode::kShapeMismatch, "centered_forward: expected " +
                                        std::to_string(params.spec.window) + " symbols");
  }
  if (symbols[symbols.size() / 2] != kNewline) {
    fail(ErrorCode::kPrecondition, "centered_forward: center symbol is not a newline");
  }
}

}  // namespace

double centered_forward(const ModelParams& params, std::span<const Symbol> symbols, bool training,
                        Rng& rng) {
  require_center_newline(params, symbols);
  SequenceCache cache;
  sequence_forward(params, symbols, training, rng, cache);
  return cache.aggregate_prob;
}

double uncentered_loss(const ModelParams& params, std::span<const Symbol> symbols,
                       std::span<const std::uint8_t> labels, bool training, Rng& rng,
                       ModelParams* grads, double scale) {
  if (params.spec.kind != ModelKind::kUncentered) {
    fail(ErrorCode::kPrecondition, "uncentered_loss called on a non-uncentered model");
  }
  if (labels.size() != symbols.size()) {
    fail(ErrorCode::kShapeMismatch, "uncentered_loss: one label per symbol required");
  }
  SequenceCache cache;
  sequence_forward(params, symbols, training, rng, cache);
  double loss = 0.0;
  std::vector<double> dlogits(symbols.size());
  for (std::size_t t = 0; t < symbols.size(); ++t) {
    const double p = cache.step_values[t];
    loss += nn::bce_logit_loss(cache.dense_out.back()(t, 0), labels[t]);
    // BCE composed with the sigmoid: dL/dz = p - y.
    dlogits[t] = scale * (p - labels[t]);
  }
  if (grads != nullptr) sequence_backward(params, cache, dlogits, *grads);
  return loss;
}

double centered_loss(const ModelParams& params, std::span<const Symbol> symbols,
                     std::uint8_t label, bool training, Rng& rng, ModelParams* grads,
                     double scale) {
  require_center_newline(params, symbols);
  SequenceCache cache;
  sequence_forward(params, symbols, training, rng, cache);
  const double p = cache.aggregate_prob;
  if (grads != nullptr) {
    const double dz = scale * (p - label);
    sequence_backward(params, cache, std::span<const double>(&dz, 1), *grads);
  }
  return nn::bce_logit_loss(cache.aggregate_logit, label);
}

}  // namespace codeseg
