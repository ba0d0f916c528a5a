// SPDX-License-Identifier: Apache-2.0
/**
 * @file   config.hpp
 * @brief  Run configuration: `key = value` text with [section] headers.
 *
 *     # comment
 *     [model]
 *     cw = 4
 *
 * Defaults < file values < command-line flags.
 */
#ifndef MORPHKIT_CONFIG_HPP
#define MORPHKIT_CONFIG_HPP

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "morphkit/layers.hpp"
#include "morphkit/model.hpp"
#include "morphkit/select.hpp"
#include "morphkit/train.hpp"

namespace morphkit::config {

class ConfigError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// section -> key -> value. Keys before the first header land in "".
class ConfigFile {
public:
  static ConfigFile parse(std::string_view text);
  static ConfigFile load(const std::filesystem::path &path);

  bool has(const std::string &section, const std::string &key) const;
  std::optional<std::string> get(const std::string &section, const std::string &key) const;
  const std::map<std::string, std::map<std::string, std::string>> &sections() const {
    return sections_;
  }
  void set(const std::string &section, const std::string &key, std::string value);
  std::string to_string() const;

private:
  std::map<std::string, std::map<std::string, std::string>> sections_;
};

struct KeyDoc {
  std::string section;
  std::string key;
  std::string default_value;
  std::string help;
};

/// Every recognised key with its default, for --help output.
const std::vector<KeyDoc> &documented_keys();
std::string describe_keys();

struct RunConfig {
  // [corpus]
  std::filesystem::path train, dev, test, manifest, phono_table;
  std::array<double, 3> split{0.8, 0.1, 0.1};
  bool fit_lenmax = false;
  bool truncate = false;
  // [model], [train], [ga], [weights]
  model::ModelConfig model;
  train::TrainConfig training;
  select::GAConfig ga;
  select::FitnessConfig fitness;
  nn::LossWeights weights = nn::LossWeights::calibrated();
  // [features]
  std::filesystem::path mask_dir;
  // [run]
  std::uint64_t seed = 0;
  int jobs = 1;
  std::filesystem::path out_dir = ".";

  /// Applies file values; relative paths resolve against `base`.
  void apply(const ConfigFile &f, const std::filesystem::path &base = {});
  static RunConfig from_file(const std::filesystem::path &path);
  /// Pushes the seed into every seeded sub-config.
  void propagate_seed();
  void validate() const;
};

/// Parses a shared-weight preset: "calibrated" or "heuristic:<lambda>".
nn::LossWeights weights_preset(std::string_view spec);

} // namespace morphkit::config

#endif
