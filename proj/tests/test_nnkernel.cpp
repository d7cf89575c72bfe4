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

#include <cmath>
#include <limits>
#include <memory>

#include "doctest.h"

#include "codeseg/error.hpp"
#include "codeseg/nnkernel.hpp"
#include "support/oracles.hpp"

using namespace codeseg;
using namespace codeseg::nn;

namespace {

Tensor2 random_tensor(std::size_t r, std::size_t c, Rng& rng, double scale = 1.0) {
  Tensor2 t(r, c);
  for (double& v : t.data) v = rng.uniform(-scale, scale);
  return t;
}

LstmCellParams random_cell(std::size_t D, std::size_t H, Rng& rng) {
  return {random_tensor(4 * H, D, rng, 0.6), random_tensor(4 * H, H, rng, 0.6),
          random_tensor(4 * H, 1, rng, 0.3)};
}

double dot(const Tensor2& a, const Tensor2& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.data.size(); ++i) s += a.data[i] * b.data[i];
  return s;
}

void adam_scalar(Tensor2& theta, const Tensor2& grad, AdamState& state, const AdamConfig& cfg) {
  const std::vector<TensorRef> params{{"t", &theta}};
  const std::vector<ConstTensorRef> grads{{"t", &grad}};
  adam_step(params, grads, state, cfg);
}

}  // namespace

TEST_SUITE("nnkernel") {
  TEST_CASE("dense_forward trivial cases") {
    Tensor2 W(3, 2);
    const std::vector<double> b(3, 0.0), x{0.7, -1.2};
    for (double y : dense_forward(x, W, b, Activation::kSigmoid)) CHECK(y == 0.5);

    Tensor2 I(2, 2);
    I(0, 0) = I(1, 1) = 1.0;
    const std::vector<double> b2(2, 0.0);
    CHECK(dense_forward(x, I, b2, Activation::kNone) == x);
  }

  TEST_CASE("dense_forward matches naive matmul") {
    Rng rng(1);
    const Tensor2 W = random_tensor(3, 2, rng);
    const std::vector<double> x{rng.uniform(-1, 1), rng.uniform(-1, 1)};
    const std::vector<double> b{rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1)};
    const auto expected = testing::naive_affine(W.data, 3, 2, x, b);
    const auto none = dense_forward(x, W, b, Activation::kNone);
    const auto th = dense_forward(x, W, b, Activation::kTanh);
    for (std::size_t i = 0; i < 3; ++i) {
      CHECK(none[i] == doctest::Approx(expected[i]).epsilon(1e-14));
      CHECK(th[i] == doctest::Approx(std::tanh(expected[i])).epsilon(1e-14));
    }
  }

  TEST_CASE("dense_forward rejects mismatched shapes") {
    Tensor2 W(3, 2);
    const std::vector<double> x(3), b(3);
    CHECK_THROWS_AS(dense_forward(x, W, b, Activation::kNone), Error);
  }

  TEST_CASE("dense_backward matches finite differences") {
    Rng rng(2);
    for (Activation act : {Activation::kNone, Activation::kSigmoid, Activation::kTanh}) {
      auto W = std::make_shared<Tensor2>(random_tensor(4, 3, rng));
      auto b = std::make_shared<Tensor2>(random_tensor(4, 1, rng));
      auto x = std::make_shared<Tensor2>(random_tensor(3, 1, rng));
      const Tensor2 r = random_tensor(4, 1, rng);
      GradCheckProblem p;
      p.params = {{"W", W.get()}, {"b", b.get()}, {"x", x.get()}};
      p.loss = [=] {
        const auto y = dense_forward(x->flat(), *W, b->flat(), act);
        double s = 0;
        for (std::size_t i = 0; i < y.size(); ++i) s += r.data[i] * y[i];
        return s;
      };
      p.gradients = [=] {
        const auto y = dense_forward(x->flat(), *W, b->flat(), act);
        Tensor2 gW(4, 3), gb(4, 1), gx(3, 1);
        dense_backward(x->flat(), *W, y, r.flat(), act, gW, gb.flat(), gx.flat());
        return std::vector<Tensor2>{gW, gb, gx};
      };
      const auto report = grad_check(p, 1e-6);
      CHECK_MESSAGE(report.pass, "max rel error " << report.max_rel_error);
    }
  }

  TEST_CASE("lstm_step analytic cases") {
    const auto p = LstmCellParams::zeros(2, 3);
    const std::vector<double> x{0.3, -0.4}, zeros(3, 0.0), ones(3, 1.0);
    const auto s0 = lstm_step(x, zeros, zeros, p);
    for (std::size_t j = 0; j < 3; ++j) {
      CHECK(s0.c[j] == 0.0);
      CHECK(s0.h[j] == 0.0);
    }
    const auto s1 = lstm_step(x, zeros, ones, p);
    for (std::size_t j = 0; j < 3; ++j) {
      CHECK(s1.c[j] == doctest::Approx(0.5).epsilon(1e-15));
      CHECK(s1.h[j] == doctest::Approx(0.23105857863000487).epsilon(1e-14));
    }
  }

  TEST_CASE("lstm_step matches the scalar oracle") {
    Rng rng(3);
    const auto p = random_cell(2, 3, rng);
    const std::vector<double> x{rng.uniform(-1, 1), rng.uniform(-1, 1)};
    std::vector<double> h(3), c(3);
    for (auto& v : h) v = rng.uniform(-1, 1);
    for (auto& v : c) v = rng.uniform(-1, 1);
    const auto got = lstm_step(x, h, c, p);
    const auto want = testing::scalar_lstm_step(p.W.data, p.U.data, p.b.data, 3, 2, x, h, c);
    for (std::size_t j = 0; j < 3; ++j) {
      CHECK(got.h[j] == doctest::Approx(want.h[j]).epsilon(1e-13));
      CHECK(got.c[j] == doctest::Approx(want.c[j]).epsilon(1e-13));
    }
  }

  TEST_CASE("lstm_step rejects mismatched shapes") {
    const auto p = LstmCellParams::zeros(2, 3);
    const std::vector<double> x(3), h(3), c(3);
    CHECK_THROWS_AS(lstm_step(x, h, c, p), Error);
  }

  TEST_CASE("lstm_forward chains steps") {
    Rng rng(4);
    const auto p = random_cell(2, 3, rng);
    const Tensor2 xs = random_tensor(4, 2, rng);

    const auto one = lstm_forward(random_tensor(1, 2, rng), p, false);
    CHECK(one.steps() == 1);

    const auto cache = lstm_forward(xs, p, false);
    std::vector<double> h(3, 0.0), c(3, 0.0);
    for (std::size_t t = 0; t < 4; ++t) {
      std::vector<double> x(xs.row(t).begin(), xs.row(t).end());
      auto next = testing::scalar_lstm_step(p.W.data, p.U.data, p.b.data, 3, 2, x, h, c);
      h = next.h;
      c = next.c;
      for (std::size_t j = 0; j < 3; ++j) CHECK(cache.h(t, j) == doctest::Approx(h[j]).epsilon(1e-13));
    }
  }

  TEST_CASE("reverse pass equals forward pass on reversed input") {
    Rng rng(5);
    const auto p = random_cell(3, 4, rng);
    const Tensor2 xs = random_tensor(7, 3, rng);
    Tensor2 rev(7, 3);
    for (std::size_t t = 0; t < 7; ++t) {
      for (std::size_t d = 0; d < 3; ++d) rev(t, d) = xs(6 - t, d);
    }
    const auto backward = lstm_forward(xs, p, true);
    const auto forward_on_rev = lstm_forward(rev, p, false);
    for (std::size_t t = 0; t < 7; ++t) {
      for (std::size_t j = 0; j < 4; ++j) CHECK(backward.h(t, j) == forward_on_rev.h(6 - t, j));
    }

    // A palindromic constant input gives the same states either way.
    Tensor2 constant(5, 3, 0.25);
    const auto a = lstm_forward(constant, p, false);
    const auto b = lstm_forward(constant, p, true);
    for (std::size_t t = 0; t < 5; ++t) {
      for (std::size_t j = 0; j < 4; ++j) CHECK(a.h(t, j) == b.h(4 - t, j));
    }
  }

  TEST_CASE("bilstm_forward composes two directional passes") {
    Rng rng(6);
    const auto pf = random_cell(2, 2, rng);
    const auto pb = random_cell(2, 2, rng);
    const Tensor2 xs = random_tensor(3, 2, rng);
    const auto bi = bilstm_forward(xs, pf, pb);
    const auto f = lstm_forward(xs, pf, false);
    const auto b = lstm_forward(xs, pb, true);
    for (std::size_t t = 0; t < 3; ++t) {
      for (std::size_t j = 0; j < 2; ++j) {
        CHECK(bi.out(t, j) == f.h(t, j));
        CHECK(bi.out(t, 2 + j) == b.h(t, j));
      }
    }
    const auto zero = bilstm_forward(Tensor2(4, 2), LstmCellParams::zeros(2, 3),
                                     LstmCellParams::zeros(2, 3));
    for (double v : zero.out.data) CHECK(v == 0.0);
    CHECK_THROWS_AS(bilstm_forward(xs, pf, random_cell(2, 3, rng)), Error);
  }

  TEST_CASE("bilstm_backward matches finite differences") {
    Rng rng(7);
    const std::size_t T = 5, D = 3, H = 4;
    auto pf = std::make_shared<LstmCellParams>(random_cell(D, H, rng));
    auto pb = std::make_shared<LstmCellParams>(random_cell(D, H, rng));
    auto xs = std::make_shared<Tensor2>(random_tensor(T, D, rng));
    const Tensor2 r = random_tensor(T, 2 * H, rng);
    GradCheckProblem p;
    p.params = {{"f.W", &pf->W}, {"f.U", &pf->U}, {"f.b", &pf->b},
                {"b.W", &pb->W}, {"b.U", &pb->U}, {"b.b", &pb->b}, {"x", xs.get()}};
    p.loss = [=] { return dot(bilstm_forward(*xs, *pf, *pb).out, r); };
    p.gradients = [=] {
      const auto cache = bilstm_forward(*xs, *pf, *pb);
      auto gf = LstmCellParams::zeros(D, H), gb = LstmCellParams::zeros(D, H);
      Tensor2 dx(T, D);
      bilstm_backward(cache, *pf, *pb, r, gf, gb, &dx);
      return std::vector<Tensor2>{gf.W, gf.U, gf.b, gb.W, gb.U, gb.b, dx};
    };
    const auto report = grad_check(p, 1e-6);
    CHECK_MESSAGE(report.pass, "max rel error " << report.max_rel_error << " in " << report.worst_tensor);
  }

  TEST_CASE("embedding lookup and gradient accumulation") {
    Tensor2 E(4, 4);
    for (std::size_t i = 0; i < 4; ++i) E(i, i) = 1.0;
    const std::vector<std::uint16_t> sym{2, 0, 2};
    const auto out = embedding_forward(sym, E);
    CHECK(out(0, 2) == 1.0);
    CHECK(out(1, 0) == 1.0);
    for (std::size_t k = 0; k < 4; ++k) CHECK(out(0, k) == out(2, k));

    CHECK_THROWS_AS(embedding_forward(std::vector<std::uint16_t>{4}, E), Error);

    Rng rng(8);
    auto table = std::make_shared<Tensor2>(random_tensor(5, 3, rng));
    const std::vector<std::uint16_t> symbols{1, 3, 1, 1, 4};
    GradCheckProblem p;
    p.params = {{"E", table.get()}};
    p.loss = [=] {
      double s = 0;
      for (double v : embedding_forward(symbols, *table).data) s += v;
      return s;
    };
    p.gradients = [=] {
      Tensor2 dE(5, 3);
      embedding_backward(symbols, Tensor2(symbols.size(), 3, 1.0), dE);
      return std::vector<Tensor2>{dE};
    };
    const auto grads = p.gradients();
    CHECK(grads[0](1, 0) == 3.0);  // symbol 1 occurs three times
    CHECK(grads[0](0, 0) == 0.0);
    CHECK(grad_check(p, 1e-6).pass);
  }

  TEST_CASE("dropout") {
    Rng rng(9);
    const std::vector<double> x{1, 2, 3, 4};
    const auto none = dropout(x, 0.0, rng, true);
    CHECK(none.values == x);
    CHECK(none.mask == std::vector<double>(4, 1.0));
    const auto inference = dropout(x, 0.7, rng, false);
    CHECK(inference.values == x);

    const std::vector<double> big(100000, 1.0);
    const auto r = dropout(big, 0.2, rng, true);
    std::size_t survivors = 0;
    for (std::size_t i = 0; i < big.size(); ++i) {
      if (r.mask[i] != 0.0) {
        ++survivors;
        CHECK(r.values[i] == doctest::Approx(1.25));
      }
    }
    const double frac = static_cast<double>(survivors) / 1e5;
    CHECK(frac >= 0.79);
    CHECK(frac <= 0.81);

    CHECK_THROWS_AS(dropout(x, 1.0, rng, true), Error);

    Rng a(77), b(77);
    CHECK(dropout(big, 0.2, a, true).mask == dropout(big, 0.2, b, true).mask);
  }

  TEST_CASE("binary cross entropy") {
    CHECK(bce_loss(1.0, 1.0) == doctest::Approx(0.0).epsilon(1e-11));
    CHECK(bce_loss(0.5, 1.0) == doctest::Approx(0.6931471805599453).epsilon(1e-15));
    CHECK(std::isfinite(bce_loss(0.0, 1.0)));
    CHECK(std::isfinite(bce_grad(1.0, 0.0)));

    Rng rng(10);
    for (int i = 0; i < 200; ++i) {
      const double p = rng.uniform(0.01, 0.99);
      const double y = static_cast<double>(rng.below(2));
      const double h = 1e-6;
      const double numeric = (bce_loss(p + h, y) - bce_loss(p - h, y)) / (2 * h);
      CHECK(bce_grad(p, y) == doctest::Approx(numeric).epsilon(1e-6));
    }
  }

  TEST_CASE("logit cross entropy agrees with the probability form") {
    for (double z : {-30.0, -8.0, -1.0, 0.0, 0.3, 5.0, 12.0, 40.0}) {
      for (double y : {0.0, 1.0}) {
        // Beyond the clamp the probability form itself carries ~1e-4 error.
        const double tol = std::abs(z) > 20.0 ? 1e-4 : 1e-9;
        CHECK(bce_logit_loss(z, y) == doctest::Approx(bce_loss(sigmoid(z), y)).epsilon(tol));
      }
    }
    CHECK(bce_logit_loss(0.0, 1.0) == doctest::Approx(0.6931471805599453).epsilon(1e-15));
  }

  TEST_CASE("adam_step") {
    Tensor2 w(1, 3, 0.5), g(1, 3, 0.0);
    AdamState state;
    std::vector<TensorRef> params{{"w", &w}};
    std::vector<ConstTensorRef> grads{{"w", &g}};
    adam_step(params, grads, state, {});
    CHECK(w.data == std::vector<double>(3, 0.5));
    CHECK(state.t == 1);

    Tensor2 theta(1, 1, 0.0), grad(1, 1, 0.5);
    AdamState s2;
    adam_scalar(theta, grad, s2, {});
    CHECK(theta.data[0] == doctest::Approx(-0.001).epsilon(1e-6));

    Tensor2 bad(1, 3, 0.0);
    bad.data[1] = std::numeric_limits<double>::quiet_NaN();
    std::vector<ConstTensorRef> bad_grads{{"weights.bad", &bad}};
    CHECK_THROWS_WITH_AS(adam_step(params, bad_grads, state, {}),
                         doctest::Contains("weights.bad"), Error);
  }

  TEST_CASE("adam minimizes a quadratic") {
    Tensor2 theta(1, 1, 1.0), grad(1, 1);
    AdamState state;
    AdamConfig cfg;
    cfg.lr = 0.01;
    for (int step = 0; step < 100; ++step) {
      grad.data[0] = 2.0 * theta.data[0];
      adam_scalar(theta, grad, state, cfg);
    }
    // Frozen from an independent scalar recurrence of the same update rule.
    CHECK(theta.data[0] == doctest::Approx(0.2244460452318788).epsilon(1e-12));
    CHECK(std::abs(theta.data[0]) < 0.5);
  }

  TEST_CASE("grad_check detects corrupted gradients and honors tolerance") {
    Rng rng(12);
    auto W = std::make_shared<Tensor2>(random_tensor(3, 2, rng));
    auto b = std::make_shared<Tensor2>(random_tensor(3, 1, rng));
    const std::vector<double> x{0.4, -0.9};
    auto build = [&](double corruption) {
      GradCheckProblem p;
      p.params = {{"W", W.get()}, {"b", b.get()}};
      p.loss = [=] {
        double s = 0;
        for (double v : dense_forward(x, *W, b->flat(), Activation::kTanh)) s += v;
        return s;
      };
      p.gradients = [=] {
        const auto y = dense_forward(x, *W, b->flat(), Activation::kTanh);
        Tensor2 gW(3, 2), gb(3, 1);
        const std::vector<double> ones(3, 1.0);
        dense_backward(x, *W, y, ones, Activation::kTanh, gW, gb.flat(), {});
        for (double& v : gW.data) v *= corruption;
        return std::vector<Tensor2>{gW, gb};
      };
      return p;
    };
    CHECK(grad_check(build(1.0), 1e-4).pass);
    const auto corrupted = grad_check(build(2.0), 1e-4);
    CHECK_FALSE(corrupted.pass);
    CHECK(corrupted.worst_tensor == "W");
    CHECK(grad_check(build(2.0), std::numeric_limits<double>::infinity()).pass);
  }
}
