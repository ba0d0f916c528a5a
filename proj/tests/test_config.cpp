// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include "fixtures.hpp"
#include "morphkit/config.hpp"

using namespace morphkit;
using namespace morphkit::config;

TEST_CASE("config text parsing") {
  const auto f = ConfigFile::parse("top = 1\n"
                                   "# comment\n"
                                   "; another\n"
                                   "[model]\n"
                                   "  cw =  3 \n"
                                   "\n"
                                   "[train]\n"
                                   "lr=0.5\n");
  CHECK(f.get("", "top") == "1");
  CHECK(f.get("model", "cw") == "3");
  CHECK(f.get("train", "lr") == "0.5");
  CHECK_FALSE(f.has("train", "cw"));
  CHECK(ConfigFile::parse(f.to_string()).sections() == f.sections());

  CHECK_THROWS_WITH_AS(ConfigFile::parse("[a]\nx=1\nx=2\n"), doctest::Contains("duplicate key"),
                       ConfigError);
  CHECK_THROWS_AS(ConfigFile::parse("[a\n"), ConfigError);
  CHECK_THROWS_AS(ConfigFile::parse("just words\n"), ConfigError);
  CHECK_THROWS_AS(ConfigFile::parse("= 3\n"), ConfigError);
}

TEST_CASE("run config applies sections and rejects unknown keys") {
  RunConfig rc;
  rc.apply(ConfigFile::parse("[model]\ncw = 3\nrnn_size = 20\n[train]\nbatch_size = 4\n"
                             "freeze = false\n[ga]\npopulation = 12\n[run]\nseed = 9\n"));
  CHECK(rc.model.cw == 3);
  CHECK(rc.model.rnn_size == 20);
  CHECK(rc.training.batch_size == 4);
  CHECK(rc.training.patience == train::kNeverFreeze);
  CHECK(rc.ga.population == 12);
  CHECK(rc.seed == 9);
  rc.propagate_seed();
  CHECK(rc.training.seed == 9);
  CHECK(rc.ga.seed == 9);

  RunConfig bad;
  CHECK_THROWS_WITH_AS(bad.apply(ConfigFile::parse("[model]\nwidth = 3\n")),
                       doctest::Contains("unknown key"), ConfigError);
  CHECK_THROWS_AS(bad.apply(ConfigFile::parse("[nope]\nx = 1\n")), ConfigError);
  CHECK_THROWS_AS(bad.apply(ConfigFile::parse("[train]\nbatch_size = many\n")), ConfigError);
  CHECK_THROWS_AS(bad.apply(ConfigFile::parse("[train]\noptimizer = sgd\n")), ConfigError);
  CHECK_THROWS_AS(bad.apply(ConfigFile::parse("[corpus]\nsplit = 0.5,0.5\n")), ConfigError);
}

TEST_CASE("weight presets and per-task overrides") {
  const auto h = weights_preset("heuristic:0.6");
  CHECK(h.lambda[0] == doctest::Approx(0.6));
  CHECK(h.lemma() == doctest::Approx(0.4));
  CHECK_THROWS_AS(weights_preset("heuristic:x"), ConfigError);
  CHECK_THROWS_AS(weights_preset("best"), ConfigError);

  RunConfig rc;
  // the override lands after the preset whatever the key order
  rc.apply(ConfigFile::parse("[weights]\nlambda.C = 0.2\npreset = heuristic:0.5\n"));
  CHECK(rc.weights.tag(corpus::Tag::C) == doctest::Approx(0.2));
  CHECK(rc.weights.tag(corpus::Tag::POS) == doctest::Approx(0.5));
  CHECK(rc.weights.lemma() == doctest::Approx(0.5));
  CHECK_THROWS_AS(rc.apply(ConfigFile::parse("[weights]\nlambda.X = 1\n")), ConfigError);
}

TEST_CASE("later layers override earlier ones") {
  RunConfig rc;
  rc.apply(ConfigFile::parse("[model]\ncw = 3\n"));
  rc.apply(ConfigFile::parse("[model]\ncw = 1\n"));
  CHECK(rc.model.cw == 1);
  CHECK(rc.model.rnn_size == model::ModelConfig{}.rnn_size); // untouched keys keep defaults
}

TEST_CASE("relative corpus paths resolve against the config file") {
  const auto rc = RunConfig::from_file(fixtures::data_dir() / "toy" / "toy.cfg");
  CHECK(rc.train == fixtures::data_dir() / "toy" / "toy.tsv");
  CHECK(std::filesystem::exists(rc.train));
  CHECK(rc.seed == 7);
  CHECK_THROWS_AS(RunConfig::from_file(fixtures::data_dir() / "missing.cfg"), ConfigError);
}

TEST_CASE("every key is documented with its default") {
  const auto text = describe_keys();
  for (const auto &k : documented_keys()) {
    CAPTURE(k.key);
    CHECK(text.find(k.key) != std::string::npos);
  }
  CHECK(text.find("[model]") != std::string::npos);
  CHECK(text.find("batch_size") != std::string::npos);
  const auto &keys = documented_keys();
  const auto cw = std::find_if(keys.begin(), keys.end(),
                               [](const KeyDoc &k) { return k.section == "model" && k.key == "cw"; });
  REQUIRE(cw != keys.end());
  CHECK(cw->default_value == std::to_string(model::ModelConfig{}.cw));
}
