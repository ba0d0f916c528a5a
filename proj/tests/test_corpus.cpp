// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <sstream>

#include "morphkit/corpus.hpp"

using namespace morphkit::corpus;

namespace {

const ColumnSchema kStd = ColumnSchema::standard();

std::vector<Sentence> parse(std::string_view text, TagDomains *d = nullptr,
                            ParseReport *r = nullptr) {
  return parse_treebank_text(text, kStd, d, r);
}

Sentence words(std::initializer_list<const char *> ws) {
  Sentence s;
  for (const char *w : ws) {
    Token t;
    t.surface = w;
    t.lemma = w;
    t.tags.fill("Unk");
    s.tokens.push_back(t);
  }
  return s;
}

} // namespace

TEST_CASE("treebank row with missing tags") {
  TagDomains d;
  const auto s = parse("पूरे\tpUrA\tadj\tm\tsg\t-\to\t-\n", &d);
  REQUIRE(s.size() == 1);
  const auto &t = s[0].tokens.at(0);
  CHECK(t.surface == "पूरे");
  CHECK(t.lemma == "pUrA");
  CHECK(t.tags[0] == "adj");
  CHECK(t.tags[1] == "m");
  CHECK(t.tags[2] == "sg");
  CHECK(t.tags[3] == "Unk");
  CHECK(t.tags[4] == "o");
  CHECK(t.tags[5] == "Unk");
  CHECK(d[Tag::P].label(0) == "Unk");
}

TEST_CASE("empty input and schema violations") {
  CHECK(parse("").empty());
  CHECK(parse("\n\n").empty());
  try {
    parse("a\ta\tn\tm\tsg\t3\td\t0\nb\tb\tn\tm\tsg\n");
    FAIL("expected ParseError");
  } catch (const ParseError &e) {
    CHECK(e.line() == 2);
  }
}

TEST_CASE("sentence breaks and multi-analysis fields") {
  ParseReport rep;
  const auto s = parse("a\ta|b\tn\tm\tsg\t3\td\t0\n\nb\tb\tv\tf|m\tpl\t3\td\t0\n", nullptr, &rep);
  REQUIRE(s.size() == 2);
  CHECK(s[0].tokens[0].lemma == "a");
  CHECK(s[1].tokens[0].tags[1] == "f");
  CHECK(rep.multi_analysis_tokens == 2);
}

TEST_CASE("frozen domains reject unseen labels") {
  TagDomains d;
  parse("a\ta\tn\tm\tsg\t3\td\t0\n", &d);
  d.freeze();
  CHECK_NOTHROW(parse("b\tb\tn\tm\tsg\t3\td\t0\n", &d));
  CHECK_THROWS_WITH_AS(parse("b\tb\tv\tm\tsg\t3\td\t0\n", &d),
                       doctest::Contains("unknown POS label 'v'"), ParseError);
}

TEST_CASE("manifest column order") {
  const auto schema =
      ColumnSchema::parse_manifest("# x\ncolumns=lemma,surface,pos,gender,number,person,case,tam\n");
  const auto s = parse_treebank_text("L\tS\tn\tm\tsg\t3\td\t0\n", schema);
  CHECK(s[0].tokens[0].surface == "S");
  CHECK(s[0].tokens[0].lemma == "L");
  CHECK_THROWS(ColumnSchema::parse_manifest("columns=surface,pos\n"));
  CHECK_THROWS(ColumnSchema::parse_manifest("columns=surface,lemma,colour\n"));
}

TEST_CASE("treebank formatting round-trips") {
  const std::string text = "a\tx\tn\tm\tsg\t-\td\t-\nb\ty\tv\tf\tpl\t3\to\t0\n\nc\tz\tn\tm\tsg\t3\td\t0\n";
  const auto s = parse(text);
  CHECK(format_treebank(s) == text + "\n");
  CHECK(parse(format_treebank(s)).size() == 2);
}

TEST_CASE("vocabulary") {
  std::vector<Sentence> c{words({"ab", "bc"})};
  const auto v = build_vocab(c);
  CHECK(v.size() == 5);
  CHECK(v.encode(U'z') == v.unk_char_id());
  CHECK(v.encode(U'a') >= 2);
  CHECK(v.start_id() == 5);
  CHECK(v.stop_id() == 6);
  CHECK(v.output_size() == 7);
  CHECK(v.decode(v.encode("cab")) == "cab");
}

TEST_CASE("encoding pads and windows") {
  TagDomains d;
  SUBCASE("one word, cw 4") {
    std::vector<Sentence> c{words({"ab"})};
    const auto v = build_vocab(c);
    const auto ex = encode_token(c[0], 0, v, d, {4, 18, false});
    REQUIRE(ex.context_ids.size() == 8);
    for (const auto &slot : ex.context_ids)
      for (int id : slot)
        CHECK(id == CharVocab::kPad);
    REQUIRE(ex.word_ids.size() == 18);
    CHECK(ex.word_ids[0] == v.encode(U'a'));
    CHECK(ex.word_ids[1] == v.encode(U'b'));
    for (std::size_t i = 2; i < 18; ++i)
      CHECK(ex.word_ids[i] == CharVocab::kPad);
    REQUIRE(ex.gold_lemma_ids.size() == 20);
    CHECK(ex.gold_lemma_ids[0] == v.start_id());
    CHECK(ex.gold_lemma_ids[3] == v.stop_id());
  }
  SUBCASE("middle word, cw 1") {
    std::vector<Sentence> c{words({"a", "b", "c"})};
    const auto v = build_vocab(c);
    const auto ex = encode_token(c[0], 1, v, d, {1, 4, false});
    REQUIRE(ex.context_ids.size() == 2);
    CHECK(ex.context_ids[0][0] == v.encode(U'a'));
    CHECK(ex.context_ids[1][0] == v.encode(U'c'));
  }
  SUBCASE("left context runs farthest first") {
    std::vector<Sentence> c{words({"a", "b", "c"})};
    const auto v = build_vocab(c);
    const auto ex = encode_token(c[0], 2, v, d, {2, 4, false});
    CHECK(ex.context_ids[0][0] == v.encode(U'a'));
    CHECK(ex.context_ids[1][0] == v.encode(U'b'));
    CHECK(ex.context_ids[2][0] == CharVocab::kPad);
  }
  SUBCASE("overlong words") {
    std::vector<Sentence> c{words({"abcdef"})};
    const auto v = build_vocab(c);
    try {
      encode_token(c[0], 0, v, d, {1, 4, false});
      FAIL("expected IngestError");
    } catch (const IngestError &e) {
      CHECK(std::string(e.what()).find("abcdef") != std::string::npos);
    }
    CHECK(encode_token(c[0], 0, v, d, {1, 4, true}).word_length == 4);
  }
}

TEST_CASE("splits") {
  std::vector<Sentence> c;
  for (int i = 0; i < 10; ++i)
    c.push_back(words({"x"}));
  const auto s = split_corpus(c, {0.8, 0.1, 0.1}, 3);
  CHECK(s.train.size() == 8);
  CHECK(s.dev.size() == 1);
  CHECK(s.test.size() == 1);
  CHECK_THROWS(split_corpus(c, {0.5, 0.5, 0.5}, 3));

  std::vector<Sentence> named;
  for (int i = 0; i < 10; ++i)
    named.push_back(words({std::to_string(i).c_str()}));
  const auto a = split_corpus(named, {0.6, 0.2, 0.2}, 9);
  const auto b = split_corpus(named, {0.6, 0.2, 0.2}, 9);
  for (std::size_t i = 0; i < a.train.size(); ++i)
    CHECK(a.train[i].tokens[0].surface == b.train[i].tokens[0].surface);
}

TEST_CASE("encoded cache round-trips") {
  TagDomains d;
  const auto s = parse("ab\tab\tn\tm\tsg\t3\td\t0\nc\tc\tv\tf\tpl\t-\to\tya\n", &d);
  EncodedCorpus c;
  c.options = {1, 4, false};
  c.vocab = build_vocab(s);
  c.domains = d;
  c.examples = encode_examples(s, c.vocab, d, c.options);
  c.examples[0].features = {0.25, -1.5};
  std::stringstream ss;
  write_encoded(ss, c);
  const auto back = read_encoded(ss);
  REQUIRE(back.examples.size() == 2);
  CHECK(back.examples[1].gold_tags == c.examples[1].gold_tags);
  CHECK(back.examples[0].features == c.examples[0].features);
  CHECK(back.examples[1].context_ids == c.examples[1].context_ids);
  CHECK(back.vocab.fingerprint() == c.vocab.fingerprint());
  CHECK(back.domains.at(5).labels() == d.at(5).labels());
}
