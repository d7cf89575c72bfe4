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

#include "codeseg/nnkernel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "codeseg/error.hpp"

namespace codeseg::nn {
namespace {

void require(bool cond, const char* what) {
  if (!cond) fail(ErrorCode::kShapeMismatch, what);
}

double activate(double z, Activation act) {
  switch (act) {
    case Activation::kNone: return z;
    case Activation::kSigmoid: return sigmoid(z);
    case Activation::kTanh: return std::tanh(z);
  }
  return z;
}

// d act / dz expressed through the activation's output.
double activation_slope(double y, Activation act) {
  switch (act) {
    case Activation::kNone: return 1.0;
    case Activation::kSigmoid: return y * (1.0 - y);
    case Activation::kTanh: return 1.0 - y * y;
  }
  return 1.0;
}

// y += M x, M is rows x cols.
void gemv_add(const Tensor2& M, std::span<const double> x, std::span<double> y) {
  for (std::size_t r = 0; r < M.rows; ++r) {
    const double* row = M.data.data() + r * M.cols;
    double acc = 0.0;
    for (std::size_t c = 0; c < M.cols; ++c) acc += row[c] * x[c];
    y[r] += acc;
  }
}

// y += M^T v
void gemv_t_add(const Tensor2& M, std::span<const double> v, std::span<double> y) {
  for (std::size_t r = 0; r < M.rows; ++r) {
    const double vr = v[r];
    if (vr == 0.0) continue;
    const double* row = M.data.data() + r * M.cols;
    for (std::size_t c = 0; c < M.cols; ++c) y[c] += vr * row[c];
  }
}

// G += v x^T
void outer_add(Tensor2& G, std::span<const double> v, std::span<const double> x) {
  for (std::size_t r = 0; r < G.rows; ++r) {
    const double vr = v[r];
    if (vr == 0.0) continue;
    double* row = G.data.data() + r * G.cols;
    for (std::size_t c = 0; c < G.cols; ++c) row[c] += vr * x[c];
  }
}

}  // namespace

double sigmoid(double z) {
  if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

void dense_forward(std::span<const double> x, const Tensor2& W, std::span<const double> b,
                   Activation act, std::span<double> y) {
  require(W.cols == x.size() && W.rows == b.size() && W.rows == y.size(),
          "dense_forward: shape mismatch");
  std::copy(b.begin(), b.end(), y.begin());
  gemv_add(W, x, y);
  for (double& v : y) v = activate(v, act);
}

std::vector<double> dense_forward(std::span<const double> x, const Tensor2& W,
                                  std::span<const double> b, Activation act) {
  std::vector<double> y(W.rows);
  dense_forward(x, W, b, act, y);
  return y;
}

void dense_backward(std::span<const double> x, const Tensor2& W, std::span<const double> y,
                    std::span<const double> dy, Activation act, Tensor2& dW,
                    std::span<double> db, std::span<double> dx) {
  require(W.cols == x.size() && W.rows == y.size() && y.size() == dy.size() &&
              dW.same_shape(W) && db.size() == W.rows && (dx.empty() || dx.size() == W.cols),
          "dense_backward: shape mismatch");
  std::vector<double> dz(W.rows);
  for (std::size_t r = 0; r < W.rows; ++r) dz[r] = dy[r] * activation_slope(y[r], act);
  outer_add(dW, dz, x);
  for (std::size_t r = 0; r < W.rows; ++r) db[r] += dz[r];
  if (!dx.empty()) {
    std::fill(dx.begin(), dx.end(), 0.0);
    gemv_t_add(W, dz, dx);
  }
}

// ---------------------------------------------------------------------------
// LSTM

LstmCellParams LstmCellParams::zeros(std::size_t input, std::size_t hidden) {
  return {Tensor2(4 * hidden, input), Tensor2(4 * hidden, hidden), Tensor2(4 * hidden, 1)};
}

LstmCellParams LstmCellParams::init(std::size_t input, std::size_t hidden, Rng& rng) {
  LstmCellParams p = zeros(input, hidden);
  glorot_uniform(p.W, rng);
  glorot_uniform(p.U, rng);
  for (std::size_t j = 0; j < hidden; ++j) p.b.data[hidden + j] = 1.0;
  return p;
}

void LstmCellParams::validate() const {
  const std::size_t h = U.cols;
  require(U.rows == 4 * h && W.rows == 4 * h && b.rows == 4 * h && b.cols == 1,
          "LstmCellParams: inconsistent shapes");
}

namespace {

// Computes the four post-activation gate blocks [i f g o] into `gates`.
void lstm_gates(std::span<const double> x, std::span<const double> h_prev,
                const LstmCellParams& p, std::span<double> gates) {
  const std::size_t H = p.hidden();
  std::copy(p.b.data.begin(), p.b.data.end(), gates.begin());
  gemv_add(p.W, x, gates);
  gemv_add(p.U, h_prev, gates);
  for (std::size_t j = 0; j < H; ++j) {
    gates[j] = sigmoid(gates[j]);
    gates[H + j] = sigmoid(gates[H + j]);
    gates[2 * H + j] = std::tanh(gates[2 * H + j]);
    gates[3 * H + j] = sigmoid(gates[3 * H + j]);
  }
}

}  // namespace

LstmState lstm_step(std::span<const double> x, std::span<const double> h_prev,
                    std::span<const double> c_prev, const LstmCellParams& p) {
  p.validate();
  const std::size_t H = p.hidden();
  require(x.size() == p.input() && h_prev.size() == H && c_prev.size() == H,
          "lstm_step: shape mismatch");
  std::vector<double> gates(4 * H);
  lstm_gates(x, h_prev, p, gates);
  LstmState s{std::vector<double>(H), std::vector<double>(H)};
  for (std::size_t j = 0; j < H; ++j) {
    s.c[j] = gates[H + j] * c_prev[j] + gates[j] * gates[2 * H + j];
    s.h[j] = gates[3 * H + j] * std::tanh(s.c[j]);
  }
  return s;
}

LstmCache lstm_forward(const Tensor2& xs, const LstmCellParams& p, bool reverse) {
  p.validate();
  const std::size_t T = xs.rows;
  const std::size_t H = p.hidden();
  require(T >= 1, "lstm_forward: empty sequence");
  require(xs.cols == p.input(), "lstm_forward: input width mismatch");

  LstmCache cache;
  cache.reverse = reverse;
  cache.x = xs;
  cache.gates = Tensor2(T, 4 * H);
  cache.c = Tensor2(T, H);
  cache.h = Tensor2(T, H);

  const std::vector<double> zeros(H, 0.0);
  std::span<const double> h_prev = zeros;
  std::span<const double> c_prev = zeros;
  for (std::size_t s = 0; s < T; ++s) {
    const std::size_t t = reverse ? T - 1 - s : s;
    auto gates = cache.gates.row(t);
    lstm_gates(xs.row(t), h_prev, p, gates);
    auto c = cache.c.row(t);
    auto h = cache.h.row(t);
    for (std::size_t j = 0; j < H; ++j) {
      c[j] = gates[H + j] * c_prev[j] + gates[j] * gates[2 * H + j];
      h[j] = gates[3 * H + j] * std::tanh(c[j]);
    }
    h_prev = h;
    c_prev = c;
  }
  return cache;
}

void lstm_backward(const LstmCache& cache, const LstmCellParams& p, const Tensor2& dh,
                   LstmCellParams& grad, Tensor2* dx) {
  const std::size_t T = cache.steps();
  const std::size_t H = p.hidden();
  require(dh.rows == T && dh.cols == H, "lstm_backward: dh shape mismatch");
  require(cache.x.cols == p.input() && cache.gates.cols == 4 * H,
          "lstm_backward: cache does not match parameters");
  require(grad.W.same_shape(p.W) && grad.U.same_shape(p.U) && grad.b.same_shape(p.b),
          "lstm_backward: gradient shape mismatch");
  require(dx == nullptr || dx->same_shape(cache.x), "lstm_backward: dx shape mismatch");

  const std::vector<double> zeros(H, 0.0);
  std::vector<double> dh_next(H, 0.0);
  std::vector<double> dc_next(H, 0.0);
  std::vector<double> dz(4 * H);

  // Walk the steps in the opposite order of the forward pass.
  for (std::size_t s = T; s-- > 0;) {
    const std::size_t t = cache.reverse ? T - 1 - s : s;
    const bool first = (s == 0);
    const std::size_t t_prev = cache.reverse ? t + 1 : t - 1;
    std::span<const double> h_prev = first ? std::span<const double>(zeros) : cache.h.row(t_prev);
    std::span<const double> c_prev = first ? std::span<const double>(zeros) : cache.c.row(t_prev);

    auto gates = cache.gates.row(t);
    auto c = cache.c.row(t);
    auto dh_ext = dh.row(t);
    for (std::size_t j = 0; j < H; ++j) {
      const double i = gates[j], f = gates[H + j], g = gates[2 * H + j], o = gates[3 * H + j];
      const double tc = std::tanh(c[j]);
      const double dht = dh_ext[j] + dh_next[j];
      const double dc = dc_next[j] + dht * o * (1.0 - tc * tc);
      dz[j] = dc * g * i * (1.0 - i);
      dz[H + j] = dc * c_prev[j] * f * (1.0 - f);
      dz[2 * H + j] = dc * i * (1.0 - g * g);
      dz[3 * H + j] = dht * tc * o * (1.0 - o);
      dc_next[j] = dc * f;
    }
    outer_add(grad.W, dz, cache.x.row(t));
    outer_add(grad.U, dz, h_prev);
    for (std::size_t r = 0; r < 4 * H; ++r) grad.b.data[r] += dz[r];
    if (dx != nullptr) gemv_t_add(p.W, dz, dx->row(t));
    std::fill(dh_next.begin(), dh_next.end(), 0.0);
    gemv_t_add(p.U, dz, dh_next);
  }
}

BiLstmCache bilstm_forward(const Tensor2& xs, const LstmCellParams& p_fwd,
                           const LstmCellParams& p_bwd) {
  require(p_fwd.hidden() == p_bwd.hidden(), "bilstm_forward: hidden size mismatch");
  BiLstmCache cache{lstm_forward(xs, p_fwd, false), lstm_forward(xs, p_bwd, true), {}};
  const std::size_t T = xs.rows;
  const std::size_t H = p_fwd.hidden();
  cache.out = Tensor2(T, 2 * H);
  for (std::size_t t = 0; t < T; ++t) {
    auto row = cache.out.row(t);
    std::copy_n(cache.fwd.h.row(t).begin(), H, row.begin());
    std::copy_n(cache.bwd.h.row(t).begin(), H, row.begin() + H);
  }
  return cache;
}

void bilstm_backward(const BiLstmCache& cache, const LstmCellParams& p_fwd,
                     const LstmCellParams& p_bwd, const Tensor2& dout, LstmCellParams& g_fwd,
                     LstmCellParams& g_bwd, Tensor2* dx) {
  const std::size_t T = cache.out.rows;
  const std::size_t H = p_fwd.hidden();
  require(dout.rows == T && dout.cols == 2 * H, "bilstm_backward: dout shape mismatch");
  Tensor2 dh_f(T, H), dh_b(T, H);
  for (std::size_t t = 0; t < T; ++t) {
    auto row = dout.row(t);
    std::copy_n(row.begin(), H, dh_f.row(t).begin());
    std::copy_n(row.begin() + H, H, dh_b.row(t).begin());
  }
  lstm_backward(cache.fwd, p_fwd, dh_f, g_fwd, dx);
  lstm_backward(cache.bwd, p_bwd, dh_b, g_bwd, dx);
}

// ---------------------------------------------------------------------------
// Embedding, dropout, loss

Tensor2 embedding_forward(std::span<const std::uint16_t> symbols, const Tensor2& E) {
  Tensor2 out(symbols.size(), E.cols);
  for (std::size_t t = 0; t < symbols.size(); ++t) {
    if (symbols[t] >= E.rows) {
      fail(ErrorCode::kPrecondition,
           "embedding_forward: symbol " + std::to_string(symbols[t]) + " out of range");
    }
    auto src = E.row(symbols[t]);
    std::copy(src.begin(), src.end(), out.row(t).begin());
  }
  return out;
}

void embedding_backward(std::span<const std::uint16_t> symbols, const Tensor2& dout,
                        Tensor2& dE) {
  require(dout.rows == symbols.size() && dout.cols == dE.cols,
          "embedding_backward: shape mismatch");
  for (std::size_t t = 0; t < symbols.size(); ++t) {
    auto dst = dE.row(symbols[t]);
    auto src = dout.row(t);
    for (std::size_t k = 0; k < dst.size(); ++k) dst[k] += src[k];
  }
}

std::vector<double> dropout_inplace(std::span<double> x, double rate, Rng& rng,
                                    bool training) {
  if (!(rate >= 0.0 && rate < 1.0)) {
    fail(ErrorCode::kConfig, "dropout rate must be in [0, 1), got " + std::to_string(rate));
  }
  std::vector<double> mask(x.size(), 1.0);
  if (!training || rate == 0.0) return mask;
  const double keep_scale = 1.0 / (1.0 - rate);
  for (std::size_t i = 0; i < x.size(); ++i) {
    mask[i] = rng.bernoulli(rate) ? 0.0 : keep_scale;
    x[i] *= mask[i];
  }
  return mask;
}

DropoutResult dropout(std::span<const double> x, double rate, Rng& rng, bool training) {
  DropoutResult r{std::vector<double>(x.begin(), x.end()), {}};
  r.mask = dropout_inplace(r.values, rate, rng, training);
  return r;
}

double bce_loss(double p, double y) {
  const double q = std::clamp(p, kBceEpsilon, 1.0 - kBceEpsilon);
  return -(y * std::log(q) + (1.0 - y) * std::log(1.0 - q));
}

double bce_logit_loss(double z, double y) {
  static const double limit = std::log((1.0 - kBceEpsilon) / kBceEpsilon);
  const double zc = std::clamp(z, -limit, limit);
  return std::max(zc, 0.0) - y * zc + std::log1p(std::exp(-std::abs(zc)));
}

double bce_grad(double p, double y) {
  const double q = std::clamp(p, kBceEpsilon, 1.0 - kBceEpsilon);
  return (q - y) / (q * (1.0 - q));
}

// ---------------------------------------------------------------------------
// Optimizer, init, gradient checking

void adam_step(std::span<const TensorRef> params, std::span<const ConstTensorRef> grads,
               AdamState& state, const AdamConfig& cfg) {
  require(params.size() == grads.size(), "adam_step: parameter/gradient count mismatch");
  for (std::size_t k = 0; k < params.size(); ++k) {
    require(params[k].tensor->same_shape(*grads[k].tensor), "adam_step: shape mismatch");
    if (!grads[k].tensor->all_finite()) {
      fail(ErrorCode::kNumerical, "non-finite gradient in tensor '" + grads[k].name + "'");
    }
  }
  if (state.m.size() != params.size()) {
    state.m.clear();
    state.v.clear();
    for (const auto& p : params) {
      state.m.emplace_back(p.tensor->rows, p.tensor->cols);
      state.v.emplace_back(p.tensor->rows, p.tensor->cols);
    }
    state.t = 0;
  }
  ++state.t;
  const double t = static_cast<double>(state.t);
  const double c1 = 1.0 - std::pow(cfg.beta1, t);
  const double c2 = 1.0 - std::pow(cfg.beta2, t);
  for (std::size_t k = 0; k < params.size(); ++k) {
    auto& w = params[k].tensor->data;
    const auto& g = grads[k].tensor->data;
    auto& m = state.m[k].data;
    auto& v = state.v[k].data;
    for (std::size_t i = 0; i < w.size(); ++i) {
      m[i] = cfg.beta1 * m[i] + (1.0 - cfg.beta1) * g[i];
      v[i] = cfg.beta2 * v[i] + (1.0 - cfg.beta2) * g[i] * g[i];
      const double m_hat = m[i] / c1;
      const double v_hat = v[i] / c2;
      w[i] -= cfg.lr * m_hat / (std::sqrt(v_hat) + cfg.eps);
    }
  }
}

void glorot_uniform(Tensor2& t, Rng& rng) {
  const double r = std::sqrt(6.0 / static_cast<double>(t.rows + t.cols));
  for (double& v : t.data) v = rng.uniform(-r, r);
}

GradCheckReport grad_check(const GradCheckProblem& problem, double tolerance) {
  const std::vector<Tensor2> analytic = problem.gradients();
  require(analytic.size() == problem.params.size(), "grad_check: gradient count mismatch");

  GradCheckReport report;
  for (std::size_t k = 0; k < problem.params.size(); ++k) {
    Tensor2& w = *problem.params[k].tensor;
    require(analytic[k].same_shape(w), "grad_check: gradient shape mismatch");
    for (std::size_t i = 0; i < w.size(); ++i) {
      const double saved = w.data[i];
      w.data[i] = saved + kGradCheckStep;
      const double up = problem.loss();
      w.data[i] = saved - kGradCheckStep;
      const double down = problem.loss();
      w.data[i] = saved;

      const double numeric = (up - down) / (2.0 * kGradCheckStep);
      const double a = analytic[k].data[i];
      const double denom = std::max({std::abs(a), std::abs(numeric), 1e-8});
      const double rel = std::abs(a - numeric) / denom;
      ++report.checked;
      if (rel > report.max_rel_error || std::isnan(rel)) {
        report.max_rel_error = std::isnan(rel) ? std::numeric_limits<double>::infinity() : rel;
        report.worst_tensor = problem.params[k].name;
        report.worst_index = i;
        report.worst_analytic = a;
        report.worst_numeric = numeric;
      }
    }
  }
  report.pass = report.max_rel_error < tolerance;
  return report;
}

GradCheckReport grad_check(const std::function<GradCheckProblem(Rng&)>& build,
                           double tolerance, Rng& rng) {
  return grad_check(build(rng), tolerance);
}

}  // namespace codeseg::nn
