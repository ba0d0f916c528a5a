// SPDX-License-Identifier: Apache-2.0
// Shared test fixtures: a tiny two-sentence model and the shipped toy corpus.
#ifndef MORPHKIT_TESTS_FIXTURES_HPP
#define MORPHKIT_TESTS_FIXTURES_HPP

#include <filesystem>

#include "morphkit/config.hpp"
#include "morphkit/corpus.hpp"
#include "morphkit/lingfeat.hpp"
#include "morphkit/model.hpp"
#include "morphkit/pipeline.hpp"

namespace fixtures {

using namespace morphkit;

inline std::filesystem::path data_dir() { return MORPHKIT_DATA_DIR; }

inline const char *kTinyTreebank =
    "ab\ta\tn\tm\tsg\t3\td\t-\n"
    "bca\tbc\tv\tf\tpl\t-\to\tya\n"
    "\n"
    "ca\tc\tn\tf\tsg\t3\to\t-\n";

struct Tiny {
  std::vector<corpus::Sentence> sentences;
  corpus::CharVocab vocab;
  corpus::TagDomains domains;
  std::vector<corpus::EncodedExample> examples;
};

/// len_max 6, d 4, N 3, CW 1, as small as the shapes allow.
inline model::ModelConfig tiny_config() {
  model::ModelConfig c;
  c.len_max = 6;
  c.emb_dim = 4;
  c.maps = 3;
  c.cw = 1;
  c.rnn_size = 3;
  c.head1 = 4;
  c.head2 = 3;
  c.enc_size = 3;
  c.dec_size = 4;
  return c;
}

inline Tiny tiny_data() {
  Tiny t;
  t.sentences = corpus::parse_treebank_text(kTinyTreebank, corpus::ColumnSchema::standard(),
                                            &t.domains);
  t.domains.freeze();
  t.vocab = corpus::build_vocab(t.sentences);
  t.examples = corpus::encode_examples(t.sentences, t.vocab, t.domains, {1, 6, false});
  lingfeat::attach_features(t.examples, t.sentences,
                            lingfeat::PhonoTable::load(lingfeat::default_table_path()));
  return t;
}

inline model::MorphModel tiny_model(const Tiny &t, std::uint64_t seed = 1,
                                    model::ModelConfig c = tiny_config()) {
  model::MorphModel m(c, t.vocab, t.domains, seed);
  m.set_phono_table(lingfeat::PhonoTable::load(lingfeat::default_table_path()));
  return m;
}

/// toy.cfg with every sentence in the training split.
inline config::RunConfig toy_config() {
  auto cfg = config::RunConfig::from_file(data_dir() / "toy" / "toy.cfg");
  cfg.split = {1.0, 0.0, 0.0};
  cfg.propagate_seed();
  return cfg;
}

} // namespace fixtures

#endif
