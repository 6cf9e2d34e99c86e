// Copyright 2026 The pcgkit Authors
// SPDX-License-Identifier: Apache-2.0
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <fstream>
#include <numeric>

#include "pcgkit/nn/adam.hpp"
#include "pcgkit/nn/checkpoint.hpp"
#include "pcgkit/nn/grad_check.hpp"
#include "pcgkit/nn/layers.hpp"
#include "pcgkit/nn/model.hpp"
#include "test_util.hpp"

using namespace pcg::nn;

namespace {

Tensor random_tensor(Rng& rng, Shape s, double scale = 1.0) {
  Tensor t(std::move(s));
  for (double& v : t.data) v = rng.uniform(-scale, scale);
  return t;
}

void randomize(Layer& l, Rng& rng) {
  for (Param* p : l.params())
    for (double& v : p->value.data) v = rng.uniform(-0.5, 0.5);
}

std::size_t count_kind(const ModelSpec& s, LayerKind k) {
  return std::count_if(s.layers.begin(), s.layers.end(),
                       [&](const LayerSpec& l) { return l.kind == k; });
}

}  // namespace

TEST_CASE("xavier init statistics and determinism") {
  ModelSpec spec{"t", {100}, {LayerSpec::dense(100), LayerSpec::of(LayerKind::Softmax)}};
  Model a(spec, 42), b(spec, 42), c(spec, 43);
  const auto& w = a.params()[0]->value.data;
  const double mean = std::accumulate(w.begin(), w.end(), 0.0) / double(w.size());
  double var = 0;
  for (double v : w) var += (v - mean) * (v - mean);
  var /= double(w.size());
  // Uniform on +-a has variance a^2 / 3 = 2 / (fan_in + fan_out).
  CHECK(var == doctest::Approx(0.01).epsilon(0.15));
  const double bound = std::sqrt(6.0 / 200.0);
  for (double v : w) CHECK(std::abs(v) <= bound);
  for (double v : a.params()[1]->value.data) CHECK(v == 0.0);
  for (std::size_t i = 0; i < a.params().size(); ++i)
    CHECK(a.params()[i]->value == b.params()[i]->value);
  CHECK(a.params()[0]->value != c.params()[0]->value);
}

TEST_CASE("softmax rows sum to one and survive extreme logits") {
  Softmax sm;
  const auto p = sm.infer(Tensor({1, 3}, {0, 0, 0}));
  for (double v : p.data) CHECK(v == doctest::Approx(1.0 / 3.0));
  Rng rng(3);
  Tensor big = random_tensor(rng, {16, 5}, 800.0);
  const auto q = sm.infer(big);
  for (std::size_t b = 0; b < 16; ++b) {
    double s = 0;
    for (std::size_t k = 0; k < 5; ++k) {
      CHECK(std::isfinite(q.data[b * 5 + k]));
      s += q.data[b * 5 + k];
    }
    CHECK(std::abs(s - 1.0) < 1e-6);
  }
}

TEST_CASE("cross entropy values") {
  CHECK(cross_entropy(Tensor({1, 3}, {1.0 / 3, 1.0 / 3, 1.0 / 3}), {1}) ==
        doctest::Approx(std::log(3.0)));
  CHECK(cross_entropy(Tensor({1, 3}, {0, 1, 0}), {1}) == 0.0);
  CHECK(cross_entropy(Tensor({1, 3}, {0.7, 0.2, 0.1}), {0}) == doctest::Approx(0.35667494));
  CHECK_THROWS_AS(cross_entropy(Tensor({1, 3}, {0.7, 0.2, 0.1}), {3}), std::out_of_range);
  CHECK_THROWS_AS(cross_entropy(Tensor({1, 3}, {0.7, 0.2, 0.1}), {-1}), std::out_of_range);
}

TEST_CASE("dropout semantics") {
  Dropout d(0.25, 9);
  Rng rng(1);
  Tensor x = random_tensor(rng, {50, 200});
  CHECK(d.forward(x, false) == x);
  const auto y = d.forward(x, true);
  std::size_t zeros = 0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    if (y.data[i] == 0.0) ++zeros;
    else CHECK(y.data[i] == doctest::Approx(x.data[i] / 0.75));
  }
  CHECK(double(zeros) / double(y.size()) == doctest::Approx(0.25).epsilon(0.05));
  CHECK_THROWS_AS(Dropout(1.0, 0), std::invalid_argument);
}

TEST_CASE("batchnorm normalizes per channel in train mode") {
  Rng rng(5);
  BatchNorm1D bn(3);
  Tensor x = random_tensor(rng, {8, 3, 20}, 4.0);
  for (double& v : x.data) v += 7.0;
  const auto y = bn.forward(x, true);
  for (std::size_t c = 0; c < 3; ++c) {
    double s = 0, ss = 0;
    for (std::size_t b = 0; b < 8; ++b)
      for (std::size_t t = 0; t < 20; ++t) s += y.data[(b * 3 + c) * 20 + t];
    const double m = s / 160.0;
    for (std::size_t b = 0; b < 8; ++b)
      for (std::size_t t = 0; t < 20; ++t) {
        const double d = y.data[(b * 3 + c) * 20 + t] - m;
        ss += d * d;
      }
    CHECK(std::abs(m) < 1e-4);
    CHECK(std::abs(ss / 160.0 - 1.0) < 1e-4);
    // Running mean moved 10% of the way from 0 toward the batch mean.
    double bm = 0;
    for (std::size_t b = 0; b < 8; ++b)
      for (std::size_t t = 0; t < 20; ++t) bm += x.data[(b * 3 + c) * 20 + t];
    CHECK(bn.running_mean().data[c] == doctest::Approx(0.1 * bm / 160.0));
  }
  // Eval uses running statistics and is a pure function.
  const auto e1 = bn.forward(x, false);
  const auto e2 = bn.infer(x);
  CHECK(e1 == e2);
}

TEST_CASE("conv1d matches a direct convolution oracle") {
  Rng rng(11);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t B = 1 + rng.below(3), C = 1 + rng.below(4), O = 1 + rng.below(4);
    const std::size_t K = 1 + rng.below(7), S = 1 + rng.below(3), P = rng.below(K + 1);
    const std::size_t L = K + rng.below(30);
    Conv1D conv(C, O, K, S, P);
    randomize(conv, rng);
    Tensor x = random_tensor(rng, {B, C, L});
    const auto y = conv.forward(x, false);
    const std::size_t lout = (L + 2 * P - K) / S + 1;
    REQUIRE(y.shape == Shape{B, O, lout});
    const auto& W = conv.weight().value.data;
    const auto& bias = conv.bias().value.data;
    for (std::size_t b = 0; b < B; ++b)
      for (std::size_t o = 0; o < O; ++o)
        for (std::size_t t = 0; t < lout; ++t) {
          double ref = bias[o];
          for (std::size_t c = 0; c < C; ++c)
            for (std::size_t j = 0; j < K; ++j) {
              const long long i = static_cast<long long>(t * S + j) - static_cast<long long>(P);
              if (i < 0 || i >= static_cast<long long>(L)) continue;
              ref += W[(o * C + c) * K + j] * x.data[(b * C + c) * L + i];
            }
          CHECK(y.data[(b * O + o) * lout + t] == doctest::Approx(ref).epsilon(1e-12));
        }
  }
}

TEST_CASE("gradient checks for every layer kind") {
  GradCheckOptions opt;
  Rng rng(2);
  SUBCASE("Conv1D 3->4, k=5") {
    Conv1D conv(3, 4, 5, 1, 2);
    randomize(conv, rng);
    CHECK(grad_check(conv, {2, 3, 12}, opt).max_error() < 1e-4);
    Conv1D strided(3, 4, 5, 2, 3);
    randomize(strided, rng);
    CHECK(grad_check(strided, {2, 3, 13}, opt).max_error() < 1e-4);
  }
  SUBCASE("Dense") {
    Dense d(6, 4);
    randomize(d, rng);
    CHECK(grad_check(d, {3, 6}, opt).max_error() < 1e-6);
  }
  SUBCASE("BatchNorm1D") {
    BatchNorm1D bn(3);
    randomize(bn, rng);
    CHECK(grad_check(bn, {4, 3, 5}, opt).max_error() < 1e-4);
    BatchNorm1D flat(5);
    randomize(flat, rng);
    CHECK(grad_check(flat, {6, 5}, opt).max_error() < 1e-4);
  }
  SUBCASE("MaxPool1D") {
    MaxPool1D pool(2);
    CHECK(grad_check(pool, {2, 3, 10}, opt).max_error() < 1e-4);
  }
  SUBCASE("ReLU away from the kink") {
    ReLU relu;
    GradCheckOptions o = opt;
    o.min_abs_input = 0.01;
    CHECK(grad_check(relu, {3, 7}, o).max_error() < 1e-6);
  }
  SUBCASE("Tanh, Softmax, Flatten, Dropout") {
    Tanh th;
    CHECK(grad_check(th, {3, 7}, opt).max_error() < 1e-4);
    Softmax sm;
    CHECK(grad_check(sm, {3, 5}, opt).max_error() < 1e-4);
    Flatten fl;
    CHECK(grad_check(fl, {2, 3, 4}, opt).max_error() < 1e-6);
    Dropout dr(0.25, 4);
    CHECK(grad_check(dr, {4, 9}, opt).max_error() < 1e-6);
  }
  SUBCASE("LSTM over 10 timesteps") {
    LSTM lstm(3, 5);
    randomize(lstm, rng);
    const auto rep = grad_check(lstm, {2, 3, 10}, opt);
    CHECK(rep.max_error() < 1e-4);
    CHECK(rep.checked == 2 * 3 * 10 + 4 * 5 * 3 + 4 * 5 * 5 + 4 * 5);
  }
  SUBCASE("fused softmax + cross-entropy") {
    CHECK(grad_check_softmax_ce(4, 3, opt).max_error() < 1e-4);
  }
}

TEST_CASE("end-to-end model gradients") {
  GradCheckOptions opt;
  SUBCASE("CNN1D") {
    PresetOptions po;
    po.conv = {{4, 4, 2, 2}, {6, 4, 2, 2}};
    po.dense = {12, 8};
    Model m(make_preset(Preset::CNN1D, {3, 40}, 3, po), 7);
    CHECK(grad_check_model(m, 5, opt).max_error() < 1e-4);
  }
  SUBCASE("CRNN") {
    PresetOptions po;
    po.conv = {{4, 4, 2, 2}, {5, 4, 2, 2}};
    po.lstm_hidden = 6;
    Model m(make_preset(Preset::CRNN, {3, 48}, 3, po), 7);
    CHECK(grad_check_model(m, 4, opt).max_error() < 1e-4);
  }
  SUBCASE("LSTM_RNN") {
    PresetOptions po;
    po.lstm_hidden = 6;
    Model m(make_preset(Preset::LSTM_RNN, {4, 12}, 2, po), 7);
    CHECK(grad_check_model(m, 3, opt).max_error() < 1e-4);
  }
}

TEST_CASE("zero loss gradient gives zero parameter gradients") {
  Model m(make_preset(Preset::CRNN, {3, 64}, 3), 1);
  Rng rng(1);
  m.forward(random_tensor(rng, {4, 3, 64}), true);
  m.backward(Tensor({4, 3}));
  for (Param* p : m.params())
    for (double g : p->grad.data) CHECK(g == 0.0);
}

TEST_CASE("backward before forward and shape errors") {
  Dense d(3, 2);
  CHECK_THROWS_AS(d.backward(Tensor({1, 2})), std::logic_error);
  Model m(make_preset(Preset::CNN1D, {3, 200}, 3), 1);
  CHECK_THROWS_AS(m.backward_from_labels({0}), std::logic_error);
  try {
    m.forward(Tensor({2, 3, 100}), false);
    FAIL("expected a shape error");
  } catch (const ShapeError& e) {
    CHECK(std::string(e.what()).find("input") != std::string::npos);
  }
  // Too short for four conv/pool blocks: the failing layer is named.
  try {
    Model tiny(make_preset(Preset::CNN1D, {3, 20}, 3), 1);
    FAIL("expected a shape error");
  } catch (const ShapeError& e) {
    CHECK(std::string(e.what()).find("layer ") != std::string::npos);
  }
  ModelSpec bad{"bad", {4}, {LayerSpec::of(LayerKind::Softmax), LayerSpec::dense(2),
                             LayerSpec::of(LayerKind::Softmax)}};
  CHECK_THROWS_AS(Model(bad, 1), std::invalid_argument);
}

TEST_CASE("presets have the documented topology") {
  const auto cnn = make_preset(Preset::CNN1D, {22, 1000}, 3);
  CHECK(count_kind(cnn, LayerKind::Conv1D) == 4);
  CHECK(count_kind(cnn, LayerKind::Dense) == 4);
  CHECK(count_kind(cnn, LayerKind::Dropout) == 3);
  CHECK(count_kind(cnn, LayerKind::MaxPool1D) == 4);
  CHECK(count_kind(cnn, LayerKind::BatchNorm1D) == 4);
  CHECK(cnn.layers.back().kind == LayerKind::Softmax);
  Model m(cnn, 1);
  CHECK(m.num_classes() == 3);
  const auto crnn = make_preset(Preset::CRNN, {22, 1000}, 3);
  CHECK(count_kind(crnn, LayerKind::Conv1D) == 2);
  CHECK(count_kind(crnn, LayerKind::LSTM) == 1);
  const auto lstm = make_preset(Preset::LSTM_RNN, {22, 1000}, 2);
  CHECK(lstm.layers.size() == 3);
  CHECK(lstm.layers[0].out == 128);
  CHECK(model_spec_from_json(to_json(cnn)) == cnn);
  CHECK(parse_preset("CNN1D") == Preset::CNN1D);
  CHECK(parse_preset("lstm-rnn") == Preset::LSTM_RNN);
  CHECK(!parse_preset("resnet"));
}

TEST_CASE("adam first step and zero gradients") {
  Param p{"w", Tensor({1}, {0.5}), Tensor({1}, {1.0})};
  Adam adam(AdamConfig{1e-3});
  adam.step({&p});
  // m_hat = 1, v_hat = 1 after bias correction.
  CHECK(p.value.data[0] == doctest::Approx(0.5 - 1e-3 / (1.0 + 1e-8)).epsilon(1e-14));
  CHECK(p.grad.data[0] == 0.0);
  Param q{"z", Tensor({3}, {1, 2, 3}), Tensor({3})};
  Adam a2;
  a2.step({&q});
  CHECK(q.value.data == std::vector<double>{1, 2, 3});
}

namespace {

struct Toy {
  Tensor x;
  std::vector<int> y;
};

Toy toy_batch(std::size_t n, Shape per, std::size_t classes, std::uint64_t seed) {
  Rng rng(seed);
  Shape s{n};
  s.insert(s.end(), per.begin(), per.end());
  Toy t{random_tensor(rng, s), {}};
  for (std::size_t i = 0; i < n; ++i) t.y.push_back(static_cast<int>(rng.below(classes)));
  return t;
}

std::vector<double> train_steps(Model& m, Adam& opt, const Toy& data, int steps) {
  std::vector<double> losses;
  for (int i = 0; i < steps; ++i) {
    m.forward(data.x, true);
    losses.push_back(m.backward_from_labels(data.y));
    opt.step(m.params());
  }
  return losses;
}

}  // namespace

TEST_CASE("training is deterministic and eval is pure") {
  const auto spec = make_preset(Preset::CNN1D, {4, 256}, 3);
  const Toy data = toy_batch(8, {4, 256}, 3, 3);
  Model a(spec, 5), b(spec, 5);
  Adam oa(AdamConfig{1e-3}), ob(AdamConfig{1e-3});
  CHECK(train_steps(a, oa, data, 5) == train_steps(b, ob, data, 5));
  for (std::size_t i = 0; i < a.params().size(); ++i)
    CHECK(a.params()[i]->value == b.params()[i]->value);
  const auto e1 = a.infer(data.x);
  const auto e2 = a.infer(data.x);
  CHECK(e1 == e2);
  CHECK(a.forward(data.x, false) == e1);
}

TEST_CASE("CNN1D memorizes 32 samples within 500 steps") {
  const auto spec = make_preset(Preset::CNN1D, {4, 256}, 3);
  const Toy data = toy_batch(32, {4, 256}, 3, 17);
  Model m(spec, 1);
  Adam opt(AdamConfig{1e-3});
  double loss = 1e9;
  int step = 0;
  for (; step < 500 && loss >= 0.01; ++step) {
    m.forward(data.x, true);
    m.backward_from_labels(data.y);
    opt.step(m.params());
    if (step % 10 == 9) loss = cross_entropy(m.infer(data.x), data.y);
  }
  MESSAGE("memorization: eval loss " << loss << " after " << step << " steps");
  CHECK(loss < 0.01);
}

TEST_CASE("checkpoint round trip resumes the exact trajectory") {
  pcg::testing::TempDir dir;
  const auto spec = make_preset(Preset::CNN1D, {4, 256}, 3);
  const Toy data = toy_batch(8, {4, 256}, 3, 9);
  Model m(spec, 2);
  Adam opt(AdamConfig{1e-3});
  train_steps(m, opt, data, 3);
  const auto path = dir.path() / "model.ckpt";
  save_checkpoint(path, m, &opt, {{"epoch", 3}});
  auto ck = load_checkpoint(path);
  REQUIRE(ck.model);
  REQUIRE(ck.optimizer);
  CHECK(ck.extra["epoch"] == 3);
  CHECK(ck.model->spec() == spec);
  CHECK(ck.model->infer(data.x) == m.infer(data.x));
  const auto l1 = train_steps(m, opt, data, 3);
  const auto l2 = train_steps(*ck.model, *ck.optimizer, data, 3);
  CHECK(l1 == l2);

  save_checkpoint(path, m, nullptr);
  CHECK_FALSE(load_checkpoint(path).optimizer);
  {
    std::ofstream out(dir.path() / "bad.ckpt", std::ios::binary);
    out << "PCGMxxxx";
  }
  CHECK_THROWS_AS(load_checkpoint(dir.path() / "bad.ckpt"), CheckpointError);
}
