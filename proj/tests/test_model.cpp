// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "fixtures.hpp"
#include "morphkit/layers.hpp"
#include "morphkit/model.hpp"

using namespace morphkit;
using namespace morphkit::model;
using fixtures::tiny_config;
using fixtures::tiny_data;
using fixtures::tiny_model;

namespace {

// Random prefix-dependent log-probability tables over `v` symbols.
struct TableDecoder {
  std::size_t v;
  std::uint64_t seed;
  std::pair<std::vector<double>, std::vector<int>> operator()(const std::vector<int> &prefix,
                                                              int prev) const {
    std::vector<int> next = prefix;
    next.push_back(prev);
    std::uint64_t h = seed;
    for (int s : next)
      h = h * 1000003u + static_cast<std::uint64_t>(s + 7);
    std::mt19937_64 rng(h);
    std::uniform_real_distribution<double> u(0.05, 1.0);
    std::vector<double> p(v);
    double z = 0;
    for (auto &x : p)
      z += x = u(rng);
    for (auto &x : p)
      x = std::log(x / z);
    return {p, next};
  }
};

std::pair<std::vector<int>, double> brute_force(const TableDecoder &d, int start, int len) {
  std::vector<int> best;
  double best_score = -INFINITY;
  const int total = static_cast<int>(std::pow(d.v, len));
  for (int code = 0; code < total; ++code) {
    std::vector<int> seq;
    int c = code;
    for (int i = 0; i < len; ++i, c /= static_cast<int>(d.v))
      seq.push_back(c % static_cast<int>(d.v));
    std::reverse(seq.begin(), seq.end());
    std::vector<int> state;
    int prev = start;
    double s = 0;
    for (int sym : seq) {
      auto [lp, ns] = d(state, prev);
      s += lp[sym];
      state = ns;
      prev = sym;
    }
    if (s > best_score) {
      best_score = s;
      best = seq;
    }
  }
  return {best, best_score};
}

} // namespace

TEST_CASE("config shapes") {
  ModelConfig c;
  CHECK(c.conv_out(4) == 15);
  CHECK(c.conv_out(5) == 14);
  CHECK(c.pooled_rows() == 7);
  CHECK(c.z_size() == 28 * c.maps);
  CHECK(c.seq_len() == 9);
  CHECK(c.max_decode_len() == 20);
  CHECK_NOTHROW(c.validate());
  ModelConfig odd;
  odd.len_max = 17;
  CHECK_THROWS_AS(odd.validate(), ModelError);
  ModelConfig att;
  att.attention = AttentionKind::Bahdanau;
  CHECK_THROWS_AS(att.validate(), ModelError);
  ModelConfig only;
  only.pool = PoolVariant::MaxOnly;
  CHECK(only.z_size() == 14 * only.maps);
}

TEST_CASE("config maps round-trip") {
  ModelConfig c = tiny_config();
  c.pool = PoolVariant::AvgOnly;
  c.tie_conv = true;
  c.widths = {2, 3};
  c.len_max = 7;
  const auto back = ModelConfig::from_map(c.to_map());
  CHECK(back.to_map() == c.to_map());
  CHECK(back.widths == std::vector<int>{2, 3});
  CHECK_THROWS_AS(ModelConfig::from_map({{"wingspan", "3"}}), ModelError);
}

TEST_CASE("tag heads") {
  const auto t = tiny_data();
  const auto m = tiny_model(t);
  nn::Rng rng(0);
  ad::Tape tape;
  const auto p = m.tag_forward(tape, t.examples[1], false, rng);
  for (std::size_t j = 0; j < corpus::kNumTags; ++j) {
    const auto d = p[j].value().data();
    CHECK(d.size() == t.domains.at(j).size());
    CHECK(std::accumulate(d.begin(), d.end(), 0.0) == doctest::Approx(1.0).epsilon(1e-9));
  }
  ad::Tape again;
  const auto q = m.tag_forward(again, t.examples[1], false, rng);
  for (std::size_t j = 0; j < corpus::kNumTags; ++j)
    CHECK(std::equal(p[j].value().data().begin(), p[j].value().data().end(),
                     q[j].value().data().begin()));
}

TEST_CASE("shape pipeline at the reference configuration") {
  const auto t = tiny_data();
  ModelConfig c;
  c.len_max = 18;
  c.cw = 4;
  c.emb_dim = 5;
  c.maps = 3;
  c.rnn_size = 4;
  auto ex = corpus::encode_examples(t.sentences, t.vocab, t.domains, {4, 18, false});
  lingfeat::attach_features(ex, t.sentences, lingfeat::PhonoTable::load(lingfeat::default_table_path()));
  const auto m = tiny_model(t, 1, c);
  nn::Rng rng(0);
  ad::Tape tape;
  const auto z = m.word_z(tape, ex[0].word_ids, 4, false, rng);
  CHECK(z.shape() == ad::Shape{1, 28 * 3});
  CHECK(ex[0].context_ids.size() == 8);
  CHECK(m.tag_rnn(tape, ex[0], false, rng).shape() == ad::Shape{1, 8});
}

TEST_CASE("gradients through the tag predictor") {
  const auto t = tiny_data();
  auto m = tiny_model(t);
  auto params = m.params().all();
  const auto &ex = t.examples[0];
  auto f = [&](ad::Tape &tape) {
    nn::Rng rng(0);
    std::vector<nn::TaskOutputs> outs(1);
    outs[0].tags = m.tag_forward(tape, ex, false, rng);
    std::vector<nn::TaskTargets> tg{{ex.gold_tags, {}}};
    return nn::joint_loss(tape, outs, tg, nn::LossWeights::heuristic(0.7)).total;
  };
  CHECK(ad::grad_check(f, params, 1e-6, ad::ErrorScale::PerTensor) < 1e-4);
}

TEST_CASE("gradients through the lemma predictor") {
  const auto t = tiny_data();
  auto m = tiny_model(t);
  auto params = m.params().all();
  const auto &ex = t.examples[2]; // "ca" -> "c": two decode steps
  REQUIRE(m.lemma_targets(ex).size() == 2);
  auto f = [&](ad::Tape &tape) {
    nn::Rng rng(0);
    std::vector<nn::TaskOutputs> outs(1);
    outs[0].lemma_steps = m.lemma_forward(tape, ex, false, rng);
    std::vector<nn::TaskTargets> tg{{ex.gold_tags, m.lemma_targets(ex)}};
    return nn::joint_loss(tape, outs, tg, nn::LossWeights::single(nn::kLemmaTask)).total;
  };
  CHECK(ad::grad_check(f, params, 1e-6, ad::ErrorScale::PerTensor) < 1e-4);
}

TEST_CASE("beam search on small tables") {
  const int stop = 99; // unreachable: every sequence runs the full length
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    CAPTURE(seed);
    TableDecoder d{3, seed};
    const auto [want, score] = brute_force(d, 3, 3);
    const auto wide = beam_search(std::vector<int>{}, d, 3, stop, 27, 3);
    CHECK(wide.symbols == want);
    CHECK(wide.score == doctest::Approx(score));
    const auto four = beam_search(std::vector<int>{}, d, 3, stop, 4, 3);
    CHECK(four.score <= score + 1e-12);

    // width 1 is greedy
    std::vector<int> state, greedy;
    int prev = 3;
    for (int i = 0; i < 3; ++i) {
      auto [lp, ns] = d(state, prev);
      prev = static_cast<int>(std::max_element(lp.begin(), lp.end()) - lp.begin());
      greedy.push_back(prev);
      state = ns;
    }
    CHECK(beam_search(std::vector<int>{}, d, 3, stop, 1, 3).symbols == greedy);
  }
}

TEST_CASE("beam search freezes stopped hypotheses") {
  // symbol 2 is stop and always the single most likely first move
  auto step = [](int s, int prev) {
    std::vector<double> p{std::log(0.3), std::log(0.1), std::log(0.6)};
    if (prev == 0)
      p = {std::log(0.05), std::log(0.05), std::log(0.9)};
    return std::pair{p, s + 1};
  };
  const auto r = beam_search(0, step, 5, 2, 3, 4);
  CHECK(r.finished);
  CHECK(r.symbols.empty());
  CHECK(r.score == doctest::Approx(std::log(0.6)));
  // nothing can finish when stop is out of reach
  const auto live = beam_search(0, step, 5, 7, 2, 2);
  CHECK_FALSE(live.finished);
  CHECK(live.symbols.size() == 2);
}

TEST_CASE("beam decoding never emits framing symbols") {
  const auto t = tiny_data();
  const auto m = tiny_model(t, 3);
  for (const auto &ex : t.examples) {
    const auto r = m.beam_decode(ex.word_ids);
    CHECK(r.symbols.size() <= static_cast<std::size_t>(m.config().max_decode_len()));
    for (int s : r.symbols) {
      CHECK(s != corpus::CharVocab::kPad);
      CHECK(s != t.vocab.start_id());
      CHECK(s != t.vocab.stop_id());
    }
  }
  // saturated width agrees with a wider one
  const auto a = m.beam_decode(t.examples[0].word_ids, 500, 2);
  const auto b = m.beam_decode(t.examples[0].word_ids, 1000, 2);
  CHECK(a.score == doctest::Approx(b.score));
}

TEST_CASE("analysis") {
  const auto t = tiny_data();
  const auto m = tiny_model(t);
  CHECK(m.analyze(corpus::Sentence{}).empty());
  auto s = t.sentences[0];
  s.tokens[1].surface = "abcabcabc";
  const auto a = m.analyze(s);
  REQUIRE(a.size() == 2);
  CHECK_FALSE(a[0].error.has_value());
  CHECK(a[1].error.has_value());
  CHECK(a[1].error->find("abcabcabc") != std::string::npos);
  for (std::size_t j = 0; j < corpus::kNumTags; ++j)
    CHECK(t.domains.at(j).find(a[0].tags[j]).has_value());
}

TEST_CASE("checkpoints are self-describing") {
  const auto t = tiny_data();
  auto masks = MorphModel::default_masks(tiny_config());
  masks[2] = lingfeat::FeatureMask::from_slots(lingfeat::pool_size(), {0, 13});
  MorphModel m(tiny_config(), t.vocab, t.domains, masks, 9);
  m.set_phono_table(lingfeat::PhonoTable::load(lingfeat::default_table_path()));
  const auto text = m.serialize();
  const auto back = MorphModel::deserialize(text);
  CHECK(back.serialize() == text);
  CHECK(back.mask(corpus::Tag::N) == masks[2]);
  CHECK(back.vocab().fingerprint() == t.vocab.fingerprint());
  const auto a = m.analyze(t.sentences[0]);
  const auto b = back.analyze(t.sentences[0]);
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].lemma == b[i].lemma);
    CHECK(a[i].probs == b[i].probs);
  }
  std::string broken = text;
  broken.replace(broken.find("vocab_fingerprint"), 17, "vocab_fingerprinX");
  CHECK_THROWS(MorphModel::deserialize(broken));
  // a vocabulary edited after the fact no longer matches its fingerprint
  std::string edited = text;
  const auto at = edited.find('\n', edited.find("\nvocab ") + 1) + 1;
  edited[at] = edited[at] == '6' ? '7' : '6';
  CHECK_THROWS_WITH(MorphModel::deserialize(edited), doctest::Contains("fingerprint"));
  CHECK_THROWS(MorphModel::deserialize("morphkit-model 2\n"));
}

TEST_CASE("the embedding is shared by both predictors") {
  const auto t = tiny_data();
  auto m = tiny_model(t);
  CHECK(m.params().get("embedding").group == kEmbeddingGroup);
  nn::Rng rng(0);
  ad::Tape before;
  const auto p0 = m.tag_forward(before, t.examples[0], false, rng)[0].value();

  m.params().zero_grad();
  ad::Tape tape;
  std::vector<nn::TaskOutputs> outs(1);
  outs[0].lemma_steps = m.lemma_forward(tape, t.examples[0], false, rng);
  std::vector<nn::TaskTargets> tg{{t.examples[0].gold_tags, m.lemma_targets(t.examples[0])}};
  tape.backward(nn::joint_loss(tape, outs, tg, nn::LossWeights::single(nn::kLemmaTask)).total);
  auto &emb = m.params().get("embedding");
  for (std::size_t i = 0; i < emb.value.numel(); ++i)
    emb.value[i] -= 0.5 * emb.grad[i];

  ad::Tape after;
  const auto p1 = m.tag_forward(after, t.examples[0], false, rng)[0].value();
  double diff = 0;
  for (std::size_t i = 0; i < p0.numel(); ++i)
    diff += std::abs(p0[i] - p1[i]);
  CHECK(diff > 0.0);
}

TEST_CASE("feature masks size the heads") {
  const auto t = tiny_data();
  auto masks = MorphModel::default_masks(tiny_config());
  masks[0] = lingfeat::FeatureMask::none(lingfeat::pool_size());
  masks[1] = lingfeat::FeatureMask::from_slots(lingfeat::pool_size(), {1, 2, 3});
  MorphModel m(tiny_config(), t.vocab, t.domains, masks, 1);
  const auto &pos = m.params().get("tag.head.POS.d1.W");
  const auto &g = m.params().get("tag.head.G.d1.W");
  CHECK(g.value.dim(0) == pos.value.dim(0) + 3);
  auto no_feat = tiny_config();
  no_feat.use_features = false;
  for (const auto &mask : MorphModel::default_masks(no_feat))
    CHECK(mask.count() == 0);
}
