// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <random>

#include "morphkit/eval.hpp"

using namespace morphkit;
using namespace morphkit::eval;

namespace {

Prediction tok(std::string lemma, corpus::TagLabels tags) { return {std::move(lemma), tags}; }

const corpus::TagLabels kTags{"n", "m", "sg", "3", "d", "-"};

// Plain corpus BLEU straight from n-gram counts; byte strings only.
double bleu_oracle(const std::vector<std::string> &hyp, const std::vector<std::string> &ref) {
  double log_p = 0.0;
  int orders = 0;
  std::size_t hl = 0, rl = 0;
  for (std::size_t i = 0; i < hyp.size(); ++i) {
    hl += hyp[i].size();
    rl += ref[i].size();
  }
  for (std::size_t n = 1; n <= 4; ++n) {
    std::size_t match = 0, total = 0;
    for (std::size_t i = 0; i < hyp.size(); ++i) {
      std::map<std::string, int> rc;
      for (std::size_t k = 0; k + n <= ref[i].size(); ++k)
        ++rc[ref[i].substr(k, n)];
      for (std::size_t k = 0; k + n <= hyp[i].size(); ++k, ++total)
        if (rc[hyp[i].substr(k, n)]-- > 0)
          ++match;
    }
    if (total == 0)
      continue;
    if (match == 0)
      return 0.0;
    log_p += std::log(static_cast<double>(match) / static_cast<double>(total));
    ++orders;
  }
  if (orders == 0)
    return 0.0;
  const double bp = hl >= rl ? 1.0 : std::exp(1.0 - static_cast<double>(rl) / static_cast<double>(hl));
  return 100.0 * bp * std::exp(log_p / orders);
}

} // namespace

TEST_CASE("tag accuracy and combinations") {
  auto other = kTags;
  other[1] = "f";
  std::vector<Prediction> gold{tok("a", kTags), tok("b", kTags), tok("c", kTags),
                               tok("d", kTags)};
  std::vector<Prediction> pred{tok("a", kTags), tok("b", other), tok("x", kTags),
                               tok("x", other)};
  CHECK(tag_accuracy(pred, gold, corpus::Tag::POS) == 1.0);
  CHECK(tag_accuracy(pred, gold, corpus::Tag::G) == 0.5);
  const auto gnp = parse_combo("G + N + P");
  CHECK(combined_accuracy(pred, gold, gnp) == 0.5);
  CHECK(combined_accuracy(pred, gold, parse_combo("L+G")) == 0.25);
  CHECK(combined_accuracy(pred, gold, parse_combo("L")) == 0.5);
  CHECK(combo_name(gnp) == "G + N + P");
  CHECK_THROWS_AS(parse_combo("G + GENDER"), EvalError);
  pred.pop_back();
  CHECK_THROWS_AS(tag_accuracy(pred, gold, corpus::Tag::POS), EvalError);
}

TEST_CASE("three of four lemmas right") {
  std::vector<Prediction> gold{tok("a", kTags), tok("b", kTags), tok("c", kTags),
                               tok("d", kTags)};
  auto pred = gold;
  pred[2].lemma = "cc";
  const auto r = evaluate(pred, gold, {"a", "b", "c", "d"});
  CHECK(r.tokens == 4);
  CHECK(r.row("L") == 0.75);
  CHECK(r.row("POS") == 1.0);
  CHECK(r.mean_levenshtein == 0.25);
  CHECK(r.errors.erroneous == 1);
  CHECK(r.errors.single_char == 1);
  CHECK(r.errors.repeated_last_char == 1);
  CHECK(r.errors.lemma_off_by_one == 1);
  CHECK_THROWS_AS(r.row("nope"), EvalError);
  CHECK(report_csv(r).rfind("metric,value\n", 0) == 0);
}

TEST_CASE("levenshtein") {
  CHECK(levenshtein("kitten", "sitting") == 3);
  CHECK(levenshtein("", "abc") == 3);
  CHECK(levenshtein("abc", "abc") == 0);
  CHECK(levenshtein("flaw", "lawn") == 2);
  // two scalars, one grapheme
  CHECK(levenshtein("कि", "") == 2);
  CHECK(levenshtein("कि", "", EditUnit::Grapheme) == 1);
  CHECK(levenshtein("किताब", "कताब", EditUnit::Grapheme) == 1);
}

TEST_CASE("character bleu") {
  CHECK(char_bleu({"abcd", "xyz"}, {"abcd", "xyz"}) == doctest::Approx(100.0));
  CHECK(char_bleu({"abc"}, {"xyz"}) == 0.0);
  CHECK(char_bleu({"abcd"}, {"abcf"}) == 0.0); // no 4-gram match, no smoothing
  CHECK_THROWS_AS(char_bleu({}, {}), EvalError);
  CHECK_THROWS_AS(char_bleu({"a"}, {"a", "b"}), EvalError);
  CHECK(mean_sentence_bleu({"abcd"}, {"abcd"}) == doctest::Approx(100.0));
  CHECK(mean_sentence_bleu({"abcd"}, {"abcf"}) > 0.0);
}

TEST_CASE("character bleu agrees with a direct count on random corpora") {
  std::mt19937 gen(11);
  std::uniform_int_distribution<int> len(1, 7), ch(0, 2), size(1, 6);
  auto word = [&] {
    std::string s(static_cast<std::size_t>(len(gen)), 'a');
    for (auto &c : s)
      c = static_cast<char>('a' + ch(gen));
    return s;
  };
  for (int trial = 0; trial < 300; ++trial) {
    std::vector<std::string> h, r;
    for (int i = size(gen); i > 0; --i) {
      h.push_back(word());
      r.push_back(word());
    }
    REQUIRE(char_bleu(h, r) == doctest::Approx(bleu_oracle(h, r)).epsilon(1e-9));
  }
}
