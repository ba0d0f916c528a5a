// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include "morphkit/lingfeat.hpp"
#include "morphkit/text.hpp"

using namespace morphkit;
using namespace morphkit::lingfeat;

namespace {

std::size_t slot(std::string_view n) { return slot_index(n).value(); }

} // namespace

TEST_CASE("pool layout") {
  CHECK(pool_size() == 64);
  CHECK(slot("LoT") == 0);
  CHECK(slot("NW") == 11);
  CHECK(slot("#vowels") == 12);
  CHECK(slot_index("Is_diphthong").has_value());
  CHECK_FALSE(slot_index("nonsense").has_value());
}

TEST_CASE("surface features") {
  const auto v = extract_surface("abc", 0, std::nullopt, "de");
  CHECK(v.at(slot("LoT")) == 3);
  CHECK(v.at(slot("is_first")) == 1);
  CHECK(v.at(slot("is_last")) == 0);
  CHECK(v.at(slot("pref-1")) == categorical_code("a", Encoding::Network));
  CHECK(v.at(slot("suff-2")) == categorical_code("bc", Encoding::Network));
  CHECK(v.at(slot("PW")) == categorical_code(kBeginSentinel, Encoding::Network));
  CHECK(v.at(slot("NW")) == categorical_code("de", Encoding::Network));

  const auto w = extract_surface("ab", 3, "x", std::nullopt);
  CHECK(w.at(slot("pref-3")) == categorical_code("ab", Encoding::Network));
  CHECK(w.at(slot("is_last")) == 1);
  CHECK(w.at(slot("NW")) == categorical_code(kEndSentinel, Encoding::Network));

  // LoT counts code points
  CHECK(extract_surface("घर", 1, "a", "b").at(0) == 2);
  CHECK(extract_surface("abc", 0, std::nullopt, "de") == v);
}

TEST_CASE("phonological counts") {
  PhonoTable table;
  PhonoRecord x;
  x.type = "vowel";
  x.height = "F";
  PhonoRecord y;
  y.type = "consonant";
  y.place = "D";
  table.set(U'x', x);
  table.set(U'y', y);
  const auto v = extract_phonological("xyx", table);
  CHECK(v.at(slot("#vowels")) == 2);
  CHECK(v.at(slot("#consonants")) == 1);
  CHECK(v.at(slot("Height:F")) == 2);
  CHECK(v.at(slot("Place:D")) == 1);

  PhonoTable empty;
  empty.set(U'x', {});
  for (std::size_t i = kSurfaceSlots; i < pool_size(); ++i)
    CHECK(extract_phonological("xx", empty).at(i) == 0);
}

TEST_CASE("shipped table") {
  const auto table = PhonoTable::load(default_table_path());
  const auto d = extract_phonological("१२३", table);
  CHECK(d.at(slot("#digits")) == 3);
  for (std::size_t i = kSurfaceSlots; i < pool_size(); ++i)
    if (i != slot("#digits"))
      CHECK(d.at(i) == 0);
  const auto k = extract_phonological("ख", table);
  CHECK(k.at(slot("#consonants")) == 1);
  CHECK(k.at(slot("Place:KT")) == 1);
  CHECK(extract_phonological("औ", table).at(slot("Is_diphthong")) == 1);
  // precomposed nukta letter
  CHECK(table.find(U'ड़') != nullptr);
}

TEST_CASE("table parsing errors") {
  CHECK_THROWS_AS(PhonoTable::parse("x\ttype=vowel\n"), FeatureError);
  CHECK_THROWS_AS(PhonoTable::parse("@schema name=t pool=64\nx\ttype=planet\n"), FeatureError);
  CHECK_THROWS_AS(PhonoTable::parse("@schema name=t pool=12\n"), FeatureError);
  const auto t = PhonoTable::parse("@schema name=t pool=64\nU+0041\ttype=vowel;height=M\n");
  REQUIRE(t.find(U'A') != nullptr);
  CHECK(t.find(U'A')->height == "M");
}

TEST_CASE("masks") {
  const FeatureVector v{1, 2, 3, 4};
  CHECK(apply_mask(v, FeatureMask::all(4)) == v);
  CHECK(apply_mask(v, FeatureMask::none(4)).empty());
  CHECK(apply_mask(v, FeatureMask::from_string("0101")) == FeatureVector{2, 4});
  CHECK_THROWS(apply_mask(v, FeatureMask::all(3)));

  const auto m = FeatureMask::from_slots(pool_size(), {0, 5, 63});
  const auto back = parse_mask_file(format_mask_file(m, "POS"));
  CHECK(back == m);
  CHECK(back.selected_names().at(1) == "pref-3");
}

TEST_CASE("feature list notation") {
  const auto s = resolve_feature_list("Surface: LoT, pref-1/3; Type: #punct; Height: M/B");
  const std::vector<std::size_t> want{slot("LoT"), slot("pref-1"), slot("pref-3"), slot("#punct"),
                                      slot("Height:M"), slot("Height:B")};
  auto sorted = want;
  std::sort(sorted.begin(), sorted.end());
  CHECK(s == sorted);
  CHECK_THROWS_AS(resolve_feature_list("Surface: LoT, wingspan"), FeatureError);

  // every shipped list resolves
  const auto text = text::read_file(std::filesystem::path(MORPHKIT_DATA_DIR) / "moo_features.tsv");
  int rows = 0;
  for (const auto &line : text::split(text, '\n')) {
    const auto cols = text::split(line, '\t');
    if (cols.size() != 3 || line.front() == '#')
      continue;
    CAPTURE(line);
    CHECK_FALSE(resolve_feature_list(cols[2]).empty());
    ++rows;
  }
  CHECK(rows == 12);
}

TEST_CASE("features attach to encoded examples") {
  corpus::Sentence s;
  for (const char *w : {"घर", "में"}) {
    corpus::Token t;
    t.surface = t.lemma = w;
    t.tags.fill("Unk");
    s.tokens.push_back(t);
  }
  const std::vector<corpus::Sentence> c{s};
  const auto v = corpus::build_vocab(c);
  corpus::TagDomains d;
  auto ex = corpus::encode_examples(c, v, d, {1, 4, false});
  const auto table = PhonoTable::load(default_table_path());
  attach_features(ex, c, table);
  CHECK(ex[1].features.size() == pool_size());
  CHECK(ex[1].features == extract(s, 1, table));
  CHECK(ex[1].features.at(slot("is_last")) == 1);
}
