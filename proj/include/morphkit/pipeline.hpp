// SPDX-License-Identifier: Apache-2.0
/**
 * @file   pipeline.hpp
 * @brief  Corpus loading and model construction shared by the CLI stages.
 */
#ifndef MORPHKIT_PIPELINE_HPP
#define MORPHKIT_PIPELINE_HPP

#include <filesystem>
#include <vector>

#include "morphkit/config.hpp"
#include "morphkit/corpus.hpp"
#include "morphkit/lingfeat.hpp"
#include "morphkit/model.hpp"

namespace morphkit::pipeline {

struct Workspace {
  std::vector<corpus::Sentence> train, dev, test;
  corpus::CharVocab vocab;      // built from the training split only
  corpus::TagDomains domains;   // labels from every split, frozen
  lingfeat::PhonoTable table;
  model::ModelConfig model;     // len_max refitted when requested
  corpus::ParseReport report;
  std::vector<corpus::EncodedExample> train_ex, dev_ex, test_ex;
};

/// Reads the configured treebanks. A lone training file is split by
/// cfg.split with cfg.seed.
Workspace load_workspace(const config::RunConfig &cfg);

/// features.<TAG>.mask from `dir` where present, default masks elsewhere.
model::MorphModel::Masks load_masks(const std::filesystem::path &dir,
                                    const model::ModelConfig &mc);

model::MorphModel make_model(const Workspace &ws, const model::MorphModel::Masks &masks,
                             std::uint64_t seed);

std::filesystem::path mask_path(const std::filesystem::path &dir, corpus::Tag tag);

} // namespace morphkit::pipeline

#endif
