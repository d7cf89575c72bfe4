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

#include "codeseg/rng.hpp"
#include "codeseg/tensor.hpp"

namespace codeseg::nn {

enum class Activation { kNone, kSigmoid, kTanh };

double sigmoid(double z);

// y = act(W x + b), W is M x D.
std::vector<double> dense_forward(std::span<const double> x, const Tensor2& W,
                                  std::span<const double> b, Activation act);
void dense_forward(std::span<const double> x, const Tensor2& W,
                   std::span<const double> b, Activation act, std::span<double> y);

// Backward through y = act(W x + b) given dL/dy. Accumulates into dW and db.
// When `dx` is non-empty it receives dL/dx (overwritten).
void dense_backward(std::span<const double> x, const Tensor2& W,
                    std::span<const double> y, std::span<const double> dy,
                    Activation act, Tensor2& dW, std::span<double> db,
                    std::span<double> dx);

// LSTM cell weights. Gate blocks along the 4H axis are ordered [i, f, g, o];
// checkpoints depend on this order.
struct LstmCellParams {
  Tensor2 W;  // 4H x D
  Tensor2 U;  // 4H x H
  Tensor2 b;  // 4H x 1

  std::size_t hidden() const { return U.cols; }
  std::size_t input() const { return W.cols; }

  static LstmCellParams zeros(std::size_t input, std::size_t hidden);
  // Glorot-uniform weights, zero bias except +1 on the forget gate.
  static LstmCellParams init(std::size_t input, std::size_t hidden, Rng& rng);
  void validate() const;
};

struct LstmState {
  std::vector<double> h;
  std::vector<double> c;
};

LstmState lstm_step(std::span<const double> x, std::span<const double> h_prev,
                    std::span<const double> c_prev, const LstmCellParams& p);

// Activations kept for backpropagation through time. All rows are indexed by
// original time, whichever direction the pass ran in.
struct LstmCache {
  bool reverse = false;
  Tensor2 x;      // T x D
  Tensor2 gates;  // T x 4H, post-activation i, f, g, o
  Tensor2 c;      // T x H
  Tensor2 h;      // T x H

  std::size_t steps() const { return h.rows; }
};

LstmCache lstm_forward(const Tensor2& xs, const LstmCellParams& p, bool reverse);

// `dh` is dL/dh (T x H). Accumulates parameter gradients into `grad` and,
// when `dx` is non-null, adds dL/dx into it (T x D).
void lstm_backward(const LstmCache& cache, const LstmCellParams& p,
                   const Tensor2& dh, LstmCellParams& grad, Tensor2* dx);

struct BiLstmCache {
  LstmCache fwd;
  LstmCache bwd;
  Tensor2 out;  // T x 2H, [forward | backward]
};

BiLstmCache bilstm_forward(const Tensor2& xs, const LstmCellParams& p_fwd,
                           const LstmCellParams& p_bwd);
void bilstm_backward(const BiLstmCache& cache, const LstmCellParams& p_fwd,
                     const LstmCellParams& p_bwd, const Tensor2& dout,
                     LstmCellParams& g_fwd, LstmCellParams& g_bwd, Tensor2* dx);

// Row lookup: output[t] = E[symbols[t]].
Tensor2 embedding_forward(std::span<const std::uint16_t> symbols, const Tensor2& E);
void embedding_backward(std::span<const std::uint16_t> symbols, const Tensor2& dout,
                        Tensor2& dE);

struct DropoutResult {
  std::vector<double> values;
  std::vector<double> mask;  // 0 or 1/(1-rate) per element
};

// Inverted dropout. Identity (mask of ones) when not training.
DropoutResult dropout(std::span<const double> x, double rate, Rng& rng, bool training);
// In-place variant; returns the mask.
std::vector<double> dropout_inplace(std::span<double> x, double rate, Rng& rng,
                                    bool training);

inline constexpr double kBceEpsilon = 1e-12;

double bce_loss(double p, double y);
// bce_loss(sigmoid(z), y) evaluated from the logit, without cancellation in 1 - p.
double bce_logit_loss(double z, double y);
// dL/dp on the clamped probability.
double bce_grad(double p, double y);

struct AdamConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

struct AdamState {
  std::vector<Tensor2> m;
  std::vector<Tensor2> v;
  std::uint64_t t = 0;
};

// One bias-corrected Adam update. Throws kNumerical, naming the tensor, on
// a non-finite gradient; parameters are left untouched in that case.
void adam_step(std::span<const TensorRef> params, std::span<const ConstTensorRef> grads,
               AdamState& state, const AdamConfig& cfg);

// Glorot-uniform fill, r = sqrt(6 / (rows + cols)).
void glorot_uniform(Tensor2& t, Rng& rng);

inline constexpr double kGradCheckStep = 1e-5;

struct GradCheckProblem {
  std::vector<TensorRef> params;
  std::function<double()> loss;
  // Analytic dL/dparam, one tensor per entry of `params`, same order.
  std::function<std::vector<Tensor2>()> gradients;
};

struct GradCheckReport {
  double max_rel_error = 0.0;
  bool pass = true;
  std::string worst_tensor;
  std::size_t worst_index = 0;
  double worst_analytic = 0.0;
  double worst_numeric = 0.0;
  std::size_t checked = 0;
};

// Compares analytic gradients with central differences for every scalar
// parameter. rel = |a - n| / max(|a|, |n|, 1e-8).
GradCheckReport grad_check(const GradCheckProblem& problem, double tolerance);
GradCheckReport grad_check(const std::function<GradCheckProblem(Rng&)>& build,
                           double tolerance, Rng& rng);

}  // namespace codeseg::nn
