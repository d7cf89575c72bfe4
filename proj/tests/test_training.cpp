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

#include "doctest.h"

#include "codeseg/error.hpp"
#include "codeseg/training.hpp"
#include "support/model_check.hpp"
#include "support/synthetic_corpus.hpp"

using namespace codeseg;

namespace {

Block synthetic_block(std::size_t n, std::uint64_t seed) {
  return build_block(testing::synthetic_corpus(n, seed));
}

ArchSpec small_centered() {
  ArchSpec s = ArchSpec::centered();
  s.embed_dim = 4;
  s.lstm_hidden = 4;
  s.dense_sizes = {4, 1};
  return s;
}

}  // namespace

TEST_SUITE("training") {
  TEST_CASE("early stopping waits out the patience after the peak") {
    EarlyStopping stop(20);
    const double metrics[] = {0.5, 0.6, 0.7, 0.65, 0.7};
    std::size_t epoch = 0;
    while (true) {
      ++epoch;
      const double m = epoch <= 5 ? metrics[epoch - 1] : 0.6;
      stop.observe(m);
      if (stop.should_stop()) break;
      REQUIRE(epoch < 100);
    }
    CHECK(epoch == 23);
    CHECK(stop.best_epoch() == 3);
    CHECK(stop.best() == 0.7);
  }

  TEST_CASE("early stopping counts ties as stale") {
    EarlyStopping stop(2);
    CHECK(stop.observe(0.5));
    CHECK_FALSE(stop.observe(0.5));
    CHECK_FALSE(stop.should_stop());
    CHECK_FALSE(stop.observe(0.5));
    CHECK(stop.should_stop());
    CHECK(stop.best_epoch() == 1);
  }

  TEST_CASE("score_newlines counts") {
    const std::vector<double> p{0.9, 0.2, 0.6, 0.1};
    const std::vector<std::uint8_t> y{1, 0, 0, 0};
    const auto r = score_newlines(p, y, 0.5);
    CHECK(r.newline_accuracy == 0.75);
    CHECK(r.true_positives == 1);
    CHECK(r.false_positives == 1);
    CHECK(r.true_negatives == 2);
    CHECK(r.false_negatives == 0);
    CHECK(r.positive_rate == 0.25);
    CHECK(score_newlines(p, y, 0.6).newline_accuracy == 0.75);
    CHECK_THROWS_AS(score_newlines({}, {}, 0.5), Error);
  }

  TEST_CASE("baseline accuracy on an exact-ratio corpus") {
    const Block block = build_block(testing::exact_ratio_corpus(10000, 794));
    const SampleSet centered = gen_centered_samples(block);
    CHECK(sample_count(centered) == 10000);
    CHECK(baseline_accuracy(centered) == doctest::Approx(0.9206).epsilon(1e-12));

    const SampleSet seq = gen_uncentered_samples(block);
    CHECK(baseline_accuracy(seq) == doctest::Approx(0.9206).epsilon(1e-3));
  }

  TEST_CASE("baseline plus positive rate is one") {
    Rng rng(1);
    const ModelParams m = init_model(small_centered(), rng);
    for (std::uint64_t seed : {1u, 2u, 3u}) {
      const SampleSet s = gen_centered_samples(synthetic_block(20, seed));
      const auto r = evaluate(m, s);
      CHECK(baseline_accuracy(s) + r.positive_rate == doctest::Approx(1.0).epsilon(1e-12));
    }
  }

  TEST_CASE("evaluate agrees with a brute-force count") {
    Rng rng(2);
    const Block block = synthetic_block(12, 4);
    const ModelParams mc = init_model(small_centered(), rng);
    const auto centered = gen_centered_samples(block);
    std::size_t correct = 0;
    for (const auto& s : centered) {
      Rng r(0);
      const bool predicted = centered_forward(mc, s.symbols, false, r) >= 0.5;
      correct += predicted == (s.label == 1);
    }
    CHECK(evaluate(mc, SampleSet(centered)).newline_accuracy ==
          doctest::Approx(static_cast<double>(correct) / centered.size()).epsilon(1e-15));

    ArchSpec us = small_centered();
    us.kind = ModelKind::kUncentered;
    us.window = kSeqWindow;
    const ModelParams mu = init_model(us, rng);
    const auto seq = gen_uncentered_samples(block);
    std::size_t scored = 0, right = 0;
    for (const auto& s : seq) {
      Rng r(0);
      const auto p = uncentered_forward(mu, s.symbols, false, r);
      for (std::size_t i = 0; i < kSeqWindow; ++i) {
        if (s.symbols[i] != kNewline) continue;
        ++scored;
        right += (p[i] >= 0.5) == (s.labels[i] == 1);
      }
    }
    const auto report = evaluate(mu, SampleSet(seq));
    CHECK(report.scored() == scored);
    CHECK(report.newline_accuracy == doctest::Approx(static_cast<double>(right) / scored).epsilon(1e-15));
  }

  TEST_CASE("variant mismatch is rejected") {
    Rng rng(3);
    const ModelParams lr = init_model(ArchSpec::logreg(), rng);
    const SampleSet centered = gen_centered_samples(synthetic_block(12, 5));
    CHECK_THROWS_AS(evaluate(lr, centered), Error);
    try {
      train(lr, centered, centered, TrainConfig{});
      FAIL("expected a variant mismatch");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::kVariantMismatch);
    }
  }

  TEST_CASE("config validation") {
    TrainConfig c;
    c.batch_size = 0;
    CHECK_THROWS_AS(c.validate(), Error);
    c = TrainConfig{};
    c.threshold = 1.0;
    CHECK_THROWS_AS(c.validate(), Error);
    c = TrainConfig{};
    c.adam.lr = 0.0;
    CHECK_THROWS_AS(c.validate(), Error);
  }

  TEST_CASE("repeated steps on one batch lower the loss") {
    Rng rng(4);
    ArchSpec spec = small_centered();
    spec.dropout_rate = 0.0;
    ModelParams m = init_model(spec, rng);
    const SampleSet set = gen_centered_samples(synthetic_block(10, 6));
    std::vector<std::size_t> batch(std::min<std::size_t>(32, sample_count(set)));
    for (std::size_t i = 0; i < batch.size(); ++i) batch[i] = i;
    nn::AdamState adam;
    nn::AdamConfig cfg;
    cfg.lr = 1e-3;
    double previous = INFINITY;
    for (int step = 0; step < 5; ++step) {
      ModelParams g = m.zeros_like();
      Rng drop(0);
      const double loss = batch_loss_and_gradient(m, set, batch, drop, g);
      CHECK(loss < previous);
      previous = loss;
      nn::adam_step(m.tensors(), std::as_const(g).tensors(), adam, cfg);
    }
  }

  TEST_CASE("training is deterministic and restores the best epoch") {
    Rng rng(5);
    const ModelParams m = init_model(ArchSpec::logreg(), rng);
    const SampleSet tr = gen_bag_samples(synthetic_block(60, 7));
    const SampleSet va = gen_bag_samples(synthetic_block(20, 8));
    TrainConfig cfg;
    cfg.batch_size = 32;
    cfg.max_epochs = 15;
    cfg.patience = 5;
    cfg.adam.lr = 0.01;
    std::size_t callbacks = 0;
    const auto a = train(m, tr, va, cfg, [&](const EpochRecord&) { ++callbacks; });
    const auto b = train(m, tr, va, cfg);
    CHECK(callbacks == a.history.epochs.size());
    REQUIRE(a.history.epochs.size() == b.history.epochs.size());
    for (std::size_t i = 0; i < a.history.epochs.size(); ++i) {
      CHECK(a.history.epochs[i].train_loss == b.history.epochs[i].train_loss);
      CHECK(a.history.epochs[i].val_accuracy == b.history.epochs[i].val_accuracy);
    }
    CHECK(a.model.logreg.W == b.model.logreg.W);

    REQUIRE(a.history.best_epoch >= 1);
    const double best = a.history.epochs[a.history.best_epoch - 1].val_accuracy;
    for (const auto& e : a.history.epochs) CHECK(e.val_accuracy <= best);
    CHECK(evaluate(a.model, va).newline_accuracy == best);

    cfg.seed = 43;
    const auto c = train(m, tr, va, cfg);
    CHECK_FALSE(c.model.logreg.W == a.model.logreg.W);
  }

  TEST_CASE("history serializes to JSON") {
    TrainHistory h;
    h.epochs.push_back({1, 0.5, 0.9});
    h.best_epoch = 1;
    const std::string json = history_to_json(h);
    CHECK(json.find("\"best_epoch\": 1") != std::string::npos);
    CHECK(json.find("val_newline_accuracy") != std::string::npos);
  }
}
