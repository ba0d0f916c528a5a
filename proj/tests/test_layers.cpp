// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <cmath>
#include <numeric>

#include "morphkit/layers.hpp"

using namespace morphkit;
using namespace morphkit::nn;
using ad::Shape;

namespace {

void zero_all(ParamStore &s) {
  for (auto *p : s.all())
    p->value.fill(0.0);
}

Var probs(Tape &t, std::vector<double> p) { return t.constant(Tensor::row(std::move(p))); }

} // namespace

TEST_CASE("embedding lookup") {
  ParamStore s;
  Rng rng(1);
  auto e = Embedding::create(s, "emb", "embedding", 3, 3, rng);
  Tape t;
  auto same = e.forward(t, std::vector<int>{0, 0});
  for (int j = 0; j < 3; ++j)
    CHECK(same.value().at(0, j) == same.value().at(1, j));

  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t j = 0; j < 3; ++j)
      e.table->value.at(i, j) = i == j ? 1.0 : 0.0;
  Tape fresh;
  auto one = e.forward(fresh, std::vector<int>{2});
  CHECK(one.value().at(0, 0) == 0.0);
  CHECK(one.value().at(0, 2) == 1.0);
  CHECK_THROWS(e.forward(t, std::vector<int>{3}));
}

TEST_CASE("gaussian noise") {
  Rng rng(2);
  Tape t;
  auto x = t.constant(Tensor({1, 100000}, 0.0));
  auto same = gaussian_noise(x, 0.0, true, rng);
  auto infer = gaussian_noise(x, 0.1, false, rng);
  CHECK(same.value()[17] == 0.0);
  CHECK(infer.value()[17] == 0.0);
  auto noisy = gaussian_noise(x, 0.1, true, rng);
  const auto d = noisy.value().data();
  const double m = std::accumulate(d.begin(), d.end(), 0.0) / d.size();
  CHECK(std::abs(m) < 3 * 0.1 / std::sqrt(1e5));
}

TEST_CASE("dropout") {
  Rng rng(3);
  Tape t;
  auto x = t.constant(Tensor({1, 200000}, 2.0));
  CHECK(dropout(x, 0.0, true, rng).value()[5] == 2.0);
  CHECK(dropout(x, 0.5, false, rng).value()[5] == 2.0);
  const auto d = dropout(x, 0.5, true, rng).value().data();
  const double m = std::accumulate(d.begin(), d.end(), 0.0) / d.size();
  CHECK(std::abs(m - 2.0) < 0.05 * 2.0);
  CHECK_THROWS(dropout(x, 1.0, true, rng));
}

TEST_CASE("convolution") {
  ParamStore s;
  Rng rng(4);
  SUBCASE("output width is len - w + 1") {
    auto c = Conv1d::create(s, "c4", "tag", 4, 8, 5, rng);
    Tape t;
    auto y = c.forward(t, t.constant(Tensor({18, 8}, 0.1)));
    CHECK(y.shape() == Shape{15, 5});
    CHECK_THROWS_AS(c.forward(t, t.constant(Tensor({3, 8}))), ad::ShapeError);
  }
  SUBCASE("hand example") {
    auto c = Conv1d::create(s, "c2", "tag", 2, 1, 1, rng);
    c.weight->value.fill(1.0);
    c.bias->value.fill(0.0);
    Tape t;
    auto y = c.forward(t, t.constant(Tensor({5, 1}, std::vector<double>{1, 2, 3, 4, 5})));
    REQUIRE(y.value().numel() == 4);
    CHECK(y.value()[0] == 3.0);
    CHECK(y.value()[1] == 5.0);
    CHECK(y.value()[2] == 7.0);
    CHECK(y.value()[3] == 9.0);
  }
  SUBCASE("zero weights give zeros") {
    auto c = Conv1d::create(s, "c5", "tag", 5, 3, 4, rng);
    zero_all(s);
    Tape t;
    auto y = c.forward(t, t.constant(Tensor({9, 3}, 1.3)));
    for (double v : y.value().data())
      CHECK(v == 0.0);
  }
}

TEST_CASE("pooling") {
  Tape t;
  CHECK(pool(t.constant(Tensor({15, 2})), PoolMode::Max).shape() == Shape{7, 2});
  CHECK(pool(t.constant(Tensor({14, 2})), PoolMode::Avg).shape() == Shape{7, 2});
  auto x = t.constant(Tensor({4, 1}, std::vector<double>{1, 3, 2, 5}));
  auto mx = pool(x, PoolMode::Max);
  auto av = pool(x, PoolMode::Avg);
  CHECK(mx.value()[0] == 3.0);
  CHECK(mx.value()[1] == 5.0);
  CHECK(av.value()[0] == 2.0);
  CHECK(av.value()[1] == 3.5);
  auto c = t.constant(Tensor({7, 3}, 4.25));
  for (auto mode : {PoolMode::Max, PoolMode::Avg})
    for (double v : pool(c, mode).value().data())
      CHECK(v == 4.25);
  CHECK_THROWS_AS(pool(t.constant(Tensor({1, 3})), PoolMode::Max), ad::ShapeError);
}

TEST_CASE("Z vector") {
  Tape t;
  auto p = t.constant(Tensor({7, 64}));
  auto z = build_z(p, p, p, p);
  CHECK(z.shape() == Shape{1, 7 * 256});
  for (double v : z.value().data())
    CHECK(v == 0.0);
  CHECK_THROWS_AS(build_z(p, p, p, t.constant(Tensor({6, 64}))), ad::ShapeError);
}

TEST_CASE("context sequence") {
  Tape t;
  std::vector<Var> nine(9, t.constant(Tensor({1, 5})));
  CHECK(build_context_seq(nine, 4).shape() == Shape{9, 5});
  std::vector<Var> one{t.constant(Tensor({1, 5}, 2.0))};
  CHECK(build_context_seq(one, 0).shape() == Shape{1, 5});
  std::vector<Var> three{t.constant(Tensor({1, 2}, 0.0)), t.constant(Tensor({1, 2}, 1.0)),
                         t.constant(Tensor({1, 2}, 2.0))};
  auto seq = build_context_seq(three, 1);
  CHECK(seq.value().at(0, 0) == 0.0);
  CHECK(seq.value().at(1, 0) == 1.0);
  CHECK(seq.value().at(2, 1) == 2.0);
  CHECK_THROWS_AS(build_context_seq(three, 2), ad::ShapeError);
}

TEST_CASE("GRU step") {
  ParamStore s;
  Rng rng(5);
  auto cell = GRUCell::create(s, "g", "tag", 3, 4, rng);
  zero_all(s);
  Tape t;
  auto v = t.constant(Tensor::row({1, -2, 0.5, 4}));
  auto h = cell.step(t, t.constant(Tensor::row({0.3, 0.1, -1})), v);
  for (std::size_t i = 0; i < 4; ++i)
    CHECK(h.value()[i] == doctest::Approx(0.5 * v.value()[i]));
  auto z = cell.step(t, t.constant(Tensor({1, 3})), cell.zero_state(t));
  for (double x : z.value().data())
    CHECK(x == 0.0);
  CHECK_THROWS_AS(cell.step(t, t.constant(Tensor({1, 2})), v), ad::ShapeError);
}

TEST_CASE("GRU gradients through three steps") {
  ParamStore s;
  Rng rng(6);
  auto cell = GRUCell::create(s, "g", "tag", 3, 4, rng);
  auto &x = s.add("x", "in", glorot({3, 3}, 3, 3, rng));
  auto ps = s.all();
  auto f = [&](Tape &t) {
    auto h = cell.zero_state(t);
    auto xs = t.param(x);
    for (std::size_t i = 0; i < 3; ++i)
      h = cell.step(t, ad::slice(xs, 0, i, i + 1), h);
    return ad::sum_all(ad::tanh(h));
  };
  CHECK(ad::grad_check(f, ps) < 1e-5);
}

TEST_CASE("BiGRU") {
  ParamStore s;
  Rng rng(7);
  auto bi = BiGRU::create(s, "b", "tag", 3, 5, rng);
  Tape t;
  auto one = t.constant(Tensor({1, 3}, 0.4));
  auto last = bi.forward(t, one, BiGruOutput::Last);
  auto step = bi.forward(t, one, BiGruOutput::PerStep);
  CHECK(last.shape() == Shape{1, 10});
  CHECK(step.shape() == Shape{1, 10});
  for (std::size_t i = 0; i < 10; ++i)
    CHECK(last.value()[i] == doctest::Approx(step.value()[i]));
  // a single step: each direction is one cell step from zero
  auto f = bi.fwd.step(t, one, bi.fwd.zero_state(t));
  auto b = bi.bwd.step(t, one, bi.bwd.zero_state(t));
  CHECK(last.value()[0] == doctest::Approx(f.value()[0]));
  CHECK(last.value()[5] == doctest::Approx(b.value()[0]));
  CHECK(bi.forward(t, t.constant(Tensor({4, 3}, 0.1)), BiGruOutput::PerStep).shape() ==
        Shape{4, 10});
  CHECK_THROWS_AS(bi.forward(t, t.constant(Tensor({0, 3})), BiGruOutput::Last), std::exception);
}

TEST_CASE("dense head") {
  ParamStore s;
  Rng rng(8);
  auto head = DenseHead::create(s, "h", "tag", 6, 3, 5, 4, 7, 0.5, rng);
  CHECK(head.classes() == 7);
  auto ps = s.all();
  auto &rnn = s.add("rnn", "in", glorot({1, 6}, 1, 6, rng));
  auto &feat = s.add("feat", "in", glorot({1, 3}, 1, 3, rng));
  auto all = s.all();
  auto f = [&](Tape &t) {
    Rng r(0);
    auto p = head.forward(t, t.param(rnn), t.param(feat), false, r);
    return ad::sum_all(ad::mul(p, ad::log(p)));
  };
  CHECK(ad::grad_check(f, all) < 1e-5);

  for (auto *p : ps)
    p->value.fill(0.0);
  Tape t;
  auto p = head.forward(t, t.param(rnn), t.param(feat), false, rng);
  for (double v : p.value().data())
    CHECK(v == doctest::Approx(1.0 / 7));
  CHECK_THROWS(DenseHead::create(s, "bad", "tag", 6, 0, 5, 4, 1, 0.5, rng));
}

TEST_CASE("head argmax is invariant to positive rescaling of its input") {
  ParamStore s;
  Rng rng(9);
  auto head = DenseHead::create(s, "h", "tag", 4, 0, 6, 6, 5, 0.0, rng);
  // only the final softmax layer sees the rescaled input
  for (double k : {0.1, 1.0, 7.5}) {
    Tape t;
    auto x = t.constant(Tensor::row({0.3, -0.8, 1.2, 0.05}));
    auto h2 = head.hidden2.forward(t, ad::relu(head.hidden1.forward(t, x)));
    auto logits = head.out.forward(t, ad::tanh(h2));
    auto base = ad::softmax(logits, 1);
    auto scaled = ad::softmax(ad::scale(logits, k), 1);
    const auto a = base.value().data();
    const auto b = scaled.value().data();
    CHECK(std::max_element(a.begin(), a.end()) - a.begin() ==
          std::max_element(b.begin(), b.end()) - b.begin());
  }
}

TEST_CASE("Luong attention") {
  ParamStore s;
  Rng rng(10);
  auto att = LuongAttention::create(s, "a", "lemma", 2, 2, rng);
  Tape t;
  SUBCASE("single state") {
    auto enc = t.constant(Tensor({1, 2}, std::vector<double>{0.4, -1}));
    auto r = att.attend(t, t.constant(Tensor::row({1, 2})), enc);
    CHECK(r.weights.value()[0] == doctest::Approx(1.0));
    CHECK(r.context.value()[1] == doctest::Approx(-1.0));
  }
  SUBCASE("zero W_a gives the mean") {
    att.w_a->value.fill(0.0);
    auto enc = t.constant(Tensor({2, 2}, std::vector<double>{1, 2, 3, 6}));
    auto r = att.attend(t, t.constant(Tensor::row({1, 2})), enc);
    CHECK(r.weights.value()[0] == doctest::Approx(0.5));
    CHECK(r.context.value()[0] == doctest::Approx(2.0));
    CHECK(r.context.value()[1] == doctest::Approx(4.0));
  }
  SUBCASE("identity W_a, unit scale") {
    att.w_a->value = Tensor({2, 2}, std::vector<double>{1, 0, 0, 1});
    att.log_scale->value.fill(0.0);
    auto enc = t.constant(Tensor({2, 2}, std::vector<double>{1, 0, 0, 1}));
    auto r = att.attend(t, t.constant(Tensor::row({2, 1})), enc);
    const double e2 = std::exp(2.0), e1 = std::exp(1.0);
    CHECK(r.weights.value()[0] == doctest::Approx(e2 / (e1 + e2)));
    CHECK(r.weights.value()[1] == doctest::Approx(e1 / (e1 + e2)));
  }
}

TEST_CASE("joint loss") {
  Tape t;
  auto targets = TaskTargets{{}, {1, 0}};
  SUBCASE("perfect predictions") {
    TaskOutputs o;
    for (std::size_t j = 0; j < corpus::kNumTags; ++j)
      o.tags[j] = probs(t, {1, 0, 0});
    o.lemma_steps = {probs(t, {0, 1}), probs(t, {1, 0})};
    targets.tags.ids.fill(0);
    std::vector<TaskOutputs> outs{o};
    std::vector<TaskTargets> tg{targets};
    CHECK(joint_loss(t, outs, tg, LossWeights::heuristic(0.7)).total.value().item() ==
          doctest::Approx(0.0));
  }
  SUBCASE("uniform predictions give ln C") {
    TaskOutputs o;
    for (std::size_t j = 0; j < corpus::kNumTags; ++j)
      o.tags[j] = probs(t, {0.25, 0.25, 0.25, 0.25});
    o.lemma_steps = {probs(t, {0.5, 0.5}), probs(t, {0.5, 0.5})};
    targets.tags.ids.fill(2);
    std::vector<TaskOutputs> outs{o};
    std::vector<TaskTargets> tg{targets};
    auto r = joint_loss(t, outs, tg, LossWeights::single(3));
    CHECK(r.total.value().item() == doctest::Approx(std::log(4.0)));
    CHECK(joint_loss(t, outs, tg, LossWeights::single(kLemmaTask)).total.value().item() ==
          doctest::Approx(std::log(2.0)));
    LossWeights zero;
    CHECK(joint_loss(t, outs, tg, zero).total.value().item() == 0.0);
  }
  SUBCASE("zero probability is clamped") {
    TaskOutputs o;
    for (std::size_t j = 0; j < corpus::kNumTags; ++j)
      o.tags[j] = probs(t, {1, 0});
    targets.tags.ids.fill(1);
    targets.lemma.clear();
    std::vector<TaskOutputs> outs{o};
    std::vector<TaskTargets> tg{targets};
    const double v = joint_loss(t, outs, tg, LossWeights::single(0)).total.value().item();
    CHECK(v == doctest::Approx(-std::log(kLogClamp)));
  }
}

TEST_CASE("loss weight presets") {
  auto c = LossWeights::calibrated();
  CHECK(c.tag(corpus::Tag::POS) == 0.7);
  CHECK(c.tag(corpus::Tag::G) == 0.9);
  CHECK(c.tag(corpus::Tag::P) == 0.9);
  CHECK(c.tag(corpus::Tag::C) == 0.95);
  CHECK(c.lemma() == doctest::Approx(0.3));
  auto h = LossWeights::heuristic(0.4);
  CHECK(h.tag(corpus::Tag::TAM) == 0.4);
  CHECK(h.lemma() == doctest::Approx(0.6));
  LossWeights bad;
  bad.lambda[2] = -1;
  CHECK_THROWS(bad.validate());
}
