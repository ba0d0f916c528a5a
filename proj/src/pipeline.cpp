// SPDX-License-Identifier: Apache-2.0
#include "morphkit/pipeline.hpp"

#include <algorithm>

#include "morphkit/text.hpp"

namespace morphkit::pipeline {

namespace fs = std::filesystem;

Workspace load_workspace(const config::RunConfig &cfg) {
  if (cfg.train.empty())
    throw config::ConfigError("no training corpus configured ([corpus] train)");
  for (const auto &p : {cfg.train, cfg.dev, cfg.test, cfg.manifest})
    if (!p.empty() && !fs::exists(p))
      throw config::ConfigError("missing file: " + p.string());

  Workspace ws;
  const auto schema = cfg.manifest.empty() ? corpus::ColumnSchema::standard()
                                           : corpus::ColumnSchema::from_manifest_file(cfg.manifest);
  ws.train = corpus::parse_treebank(cfg.train, schema, &ws.domains, &ws.report);
  if (!cfg.dev.empty())
    ws.dev = corpus::parse_treebank(cfg.dev, schema, &ws.domains, &ws.report);
  if (!cfg.test.empty())
    ws.test = corpus::parse_treebank(cfg.test, schema, &ws.domains, &ws.report);
  if (cfg.dev.empty() && cfg.test.empty() && cfg.split[0] < 1.0) {
    auto parts = corpus::split_corpus(ws.train, cfg.split, cfg.seed);
    ws.train = std::move(parts.train);
    ws.dev = std::move(parts.dev);
    ws.test = std::move(parts.test);
  }
  ws.domains.freeze();
  ws.vocab = corpus::build_vocab(ws.train);

  ws.model = cfg.model;
  if (cfg.fit_lenmax) {
    int longest = corpus::longest_word(ws.train);
    for (const auto *split : {&ws.dev, &ws.test})
      longest = std::max(longest, corpus::longest_word(*split));
    // pooled widths must agree across filter widths, so round up to even
    ws.model.len_max = std::max(longest + (longest % 2), ws.model.widths.back() + 1);
  }
  ws.model.validate();

  ws.table = lingfeat::PhonoTable::load(cfg.phono_table.empty() ? lingfeat::default_table_path()
                                                                : cfg.phono_table);
  corpus::EncodeOptions opts{ws.model.cw, ws.model.len_max, cfg.truncate};
  auto encode = [&](const std::vector<corpus::Sentence> &s) {
    auto ex = corpus::encode_examples(s, ws.vocab, ws.domains, opts);
    lingfeat::attach_features(ex, s, ws.table);
    return ex;
  };
  ws.train_ex = encode(ws.train);
  ws.dev_ex = encode(ws.dev);
  ws.test_ex = encode(ws.test);
  return ws;
}

fs::path mask_path(const fs::path &dir, corpus::Tag tag) {
  return dir / ("features." + std::string(corpus::kTagNames[static_cast<std::size_t>(tag)]) +
                ".mask");
}

model::MorphModel::Masks load_masks(const fs::path &dir, const model::ModelConfig &mc) {
  auto masks = model::MorphModel::default_masks(mc);
  if (dir.empty() || !mc.use_features)
    return masks;
  for (std::size_t i = 0; i < corpus::kNumTags; ++i) {
    const auto p = mask_path(dir, static_cast<corpus::Tag>(i));
    if (!fs::exists(p))
      continue;
    auto m = lingfeat::parse_mask_file(text::read_file(p));
    if (m.size() != lingfeat::pool_size())
      throw config::ConfigError(p.string() + ": mask covers " + std::to_string(m.size()) +
                                " slots, pool has " + std::to_string(lingfeat::pool_size()));
    masks[i] = std::move(m);
  }
  return masks;
}

model::MorphModel make_model(const Workspace &ws, const model::MorphModel::Masks &masks,
                             std::uint64_t seed) {
  model::MorphModel m(ws.model, ws.vocab, ws.domains, masks, seed);
  m.set_phono_table(ws.table);
  return m;
}

} // namespace morphkit::pipeline
