// SPDX-License-Identifier: Apache-2.0
#include "morphkit/config.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "morphkit/lingfeat.hpp"
#include "morphkit/text.hpp"

namespace morphkit::config {

ConfigFile ConfigFile::parse(std::string_view textv) {
  ConfigFile f;
  std::string section;
  std::size_t lineno = 0;
  for (const auto &raw : text::split(textv, '\n')) {
    ++lineno;
    const auto line = text::trim(raw);
    if (line.empty() || line.front() == '#' || line.front() == ';')
      continue;
    if (line.front() == '[') {
      if (line.back() != ']')
        throw ConfigError("config line " + std::to_string(lineno) + ": unterminated section");
      section = std::string(text::trim(line.substr(1, line.size() - 2)));
      f.sections_[section];
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string_view::npos)
      throw ConfigError("config line " + std::to_string(lineno) + ": expected key = value");
    const std::string key(text::trim(line.substr(0, eq)));
    const std::string value(text::trim(line.substr(eq + 1)));
    if (key.empty())
      throw ConfigError("config line " + std::to_string(lineno) + ": empty key");
    if (f.has(section, key))
      throw ConfigError("config line " + std::to_string(lineno) + ": duplicate key '" + key +
                        "' in [" + section + "]");
    f.sections_[section][key] = value;
  }
  return f;
}

ConfigFile ConfigFile::load(const std::filesystem::path &path) {
  if (!std::filesystem::exists(path))
    throw ConfigError("config file not found: " + path.string());
  try {
    return parse(text::read_file(path));
  } catch (const ConfigError &e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

bool ConfigFile::has(const std::string &section, const std::string &key) const {
  auto s = sections_.find(section);
  return s != sections_.end() && s->second.count(key);
}

std::optional<std::string> ConfigFile::get(const std::string &section,
                                           const std::string &key) const {
  auto s = sections_.find(section);
  if (s == sections_.end())
    return std::nullopt;
  auto k = s->second.find(key);
  if (k == s->second.end())
    return std::nullopt;
  return k->second;
}

void ConfigFile::set(const std::string &section, const std::string &key, std::string value) {
  sections_[section][key] = std::move(value);
}

std::string ConfigFile::to_string() const {
  std::ostringstream os;
  for (const auto &[name, kv] : sections_) {
    if (!name.empty())
      os << '[' << name << "]\n";
    for (const auto &[k, v] : kv)
      os << k << " = " << v << '\n';
  }
  return os.str();
}

const std::vector<KeyDoc> &documented_keys() {
  static const std::vector<KeyDoc> docs = [] {
    std::vector<KeyDoc> d = {
        {"corpus", "train", "", "training treebank"},
        {"corpus", "dev", "", "development treebank"},
        {"corpus", "test", "", "test treebank"},
        {"corpus", "manifest", "", "column manifest (columns=...)"},
        {"corpus", "split", "0.8,0.1,0.1", "train/dev/test ratios for an unsplit corpus"},
        {"corpus", "fit_lenmax", "false", "set len_max from the longest word"},
        {"corpus", "truncate", "false", "cut overlong words instead of rejecting them"},
        {"corpus", "phono_table", "data/phono_brahmi.tsv", "character attribute table"},
        {"model", "len_max", "18", "characters per word"},
        {"model", "emb_dim", "64", "character embedding size"},
        {"model", "maps", "64", "feature maps per convolution width"},
        {"model", "cw", "4", "context words on each side"},
        {"model", "widths", "4,5", "convolution filter widths"},
        {"model", "rnn_size", "64", "tag BiGRU size per direction"},
        {"model", "head1", "64", "first dense layer of each tag head (ReLU)"},
        {"model", "head2", "128", "second dense layer of each tag head (tanh)"},
        {"model", "enc_size", "64", "lemma encoder size per direction"},
        {"model", "dec_size", "64", "lemma decoder size"},
        {"model", "emb_dropout", "0.5", "dropout after the embedding"},
        {"model", "head_dropout", "0.5", "dropout inside tag heads"},
        {"model", "noise_sigma", "0.1", "Gaussian noise std during training"},
        {"model", "beam_width", "4", "lemma beam width"},
        {"model", "length_norm", "false", "length-normalise beam scores"},
        {"model", "pool", "max_avg", "max_avg | max_only | avg_only"},
        {"model", "tie_conv", "false", "share convolutions across context slots"},
        {"model", "attention", "luong", "luong (bahdanau, monotonic reserved)"},
        {"model", "use_features", "true", "feed linguistic features to the heads"},
        {"train", "batch_size", "32", "examples per update"},
        {"train", "max_epochs", "200", "epoch cap"},
        {"train", "patience", "5", "epochs without tag dev-loss gain before freezing"},
        {"train", "lemma_patience", "5", "lemma early stopping after the freeze"},
        {"train", "min_delta", "1e-4", "smallest counted improvement"},
        {"train", "lr", "1.0", "Adadelta learning rate"},
        {"train", "rho", "0.95", "Adadelta decay"},
        {"train", "eps", "1e-6", "Adadelta epsilon"},
        {"train", "max_grad_norm", "0", "global gradient norm clamp (0 = off)"},
        {"train", "dev_bleu", "true", "beam-decode dev lemmas every epoch"},
        {"train", "freeze", "true", "progressive freezing on/off"},
        {"ga", "generations", "30", "GA generations"},
        {"ga", "population", "60", "GA population size"},
        {"ga", "crossover", "0.7", "single-point crossover probability"},
        {"ga", "mutation", "0.03", "per-bit mutation probability"},
        {"ga", "tournament", "2", "tournament size"},
        {"ga", "elites", "1", "individuals copied unchanged"},
        {"ga", "alpha", "0.05", "weight of the feature-count penalty"},
        {"ga", "folds", "3", "cross-validation folds"},
        {"ga", "metric", "micro_f1", "micro_f1 | accuracy"},
        {"ga", "trees", "15", "random forest size"},
        {"ga", "min_samples_split", "2", "forest split threshold"},
        {"ga", "min_samples_leaf", "1", "forest leaf minimum"},
        {"weights", "preset", "calibrated", "calibrated | heuristic:<lambda>"},
        {"features", "mask_dir", "", "directory of features.<TAG>.mask files"},
        {"run", "seed", "0", "random seed (MORPHKIT_SEED fallback)"},
        {"run", "jobs", "1", "worker threads"},
        {"run", "out", ".", "output directory"},
    };
    for (auto n : nn::kTaskNames)
      d.push_back({"weights", "lambda." + std::string(n), "", "override one task weight"});
    return d;
  }();
  return docs;
}

std::string describe_keys() {
  std::ostringstream os;
  std::string section;
  for (const auto &k : documented_keys()) {
    if (k.section != section) {
      section = k.section;
      os << "\n[" << section << "]\n";
    }
    os << "  " << k.key;
    for (std::size_t i = k.key.size(); i < 18; ++i)
      os << ' ';
    os << (k.default_value.empty() ? "-" : k.default_value);
    for (std::size_t i = k.default_value.size(); i < 22; ++i)
      os << ' ';
    os << k.help << '\n';
  }
  return os.str();
}

nn::LossWeights weights_preset(std::string_view spec) {
  if (spec == "calibrated")
    return nn::LossWeights::calibrated();
  if (spec.rfind("heuristic:", 0) == 0) {
    const std::string v(spec.substr(10));
    try {
      return nn::LossWeights::heuristic(std::stod(v));
    } catch (const std::invalid_argument &) {
      throw ConfigError("bad heuristic weight '" + v + "'");
    }
  }
  throw ConfigError("unknown weight preset '" + std::string(spec) +
                    "' (calibrated or heuristic:<lambda>)");
}

namespace {

bool parse_bool(const std::string &key, const std::string &v) {
  if (v == "true" || v == "1" || v == "yes" || v == "on")
    return true;
  if (v == "false" || v == "0" || v == "no" || v == "off")
    return false;
  throw ConfigError(key + ": expected true/false, got '" + v + "'");
}

double parse_double(const std::string &key, const std::string &v) {
  try {
    std::size_t used = 0;
    const double d = std::stod(v, &used);
    if (used == v.size())
      return d;
  } catch (const std::exception &) {
  }
  throw ConfigError(key + ": expected a number, got '" + v + "'");
}

long long parse_int(const std::string &key, const std::string &v) {
  try {
    std::size_t used = 0;
    const long long d = std::stoll(v, &used);
    if (used == v.size())
      return d;
  } catch (const std::exception &) {
  }
  throw ConfigError(key + ": expected an integer, got '" + v + "'");
}

} // namespace

void RunConfig::apply(const ConfigFile &f, const std::filesystem::path &base) {
  auto path_of = [&](const std::string &v) {
    std::filesystem::path p(v);
    return p.is_relative() && !base.empty() ? base / p : p;
  };
  for (const auto &[section, kv] : f.sections()) {
    for (const auto &[key, v] : kv) {
      const std::string where = "[" + section + "] " + key;
      if (section == "corpus") {
        if (key == "train") train = path_of(v);
        else if (key == "dev") dev = path_of(v);
        else if (key == "test") test = path_of(v);
        else if (key == "manifest") manifest = path_of(v);
        else if (key == "phono_table") phono_table = path_of(v);
        else if (key == "fit_lenmax") fit_lenmax = parse_bool(where, v);
        else if (key == "truncate") truncate = parse_bool(where, v);
        else if (key == "split") {
          const auto parts = text::split(v, ',');
          if (parts.size() != 3)
            throw ConfigError(where + ": expected three comma-separated ratios");
          for (std::size_t i = 0; i < 3; ++i)
            split[i] = parse_double(where, std::string(text::trim(parts[i])));
        } else throw ConfigError("unknown key " + where);
      } else if (section == "model") {
        std::map<std::string, std::string> m = model.to_map();
        if (!m.count(key))
          throw ConfigError("unknown key " + where);
        m[key] = v;
        try {
          model = model::ModelConfig::from_map(m);
        } catch (const model::ModelError &e) {
          throw ConfigError(where + ": " + e.what());
        }
      } else if (section == "train") {
        if (key == "batch_size") training.batch_size = static_cast<int>(parse_int(where, v));
        else if (key == "max_epochs") training.max_epochs = static_cast<int>(parse_int(where, v));
        else if (key == "patience") training.patience = static_cast<int>(parse_int(where, v));
        else if (key == "lemma_patience")
          training.lemma_patience = static_cast<int>(parse_int(where, v));
        else if (key == "min_delta") training.min_delta = parse_double(where, v);
        else if (key == "lr") training.optimizer.lr = parse_double(where, v);
        else if (key == "rho") training.optimizer.rho = parse_double(where, v);
        else if (key == "eps") training.optimizer.eps = parse_double(where, v);
        else if (key == "max_grad_norm") training.max_grad_norm = parse_double(where, v);
        else if (key == "dev_bleu") training.dev_bleu = parse_bool(where, v);
        else if (key == "freeze") {
          if (!parse_bool(where, v))
            training.patience = train::kNeverFreeze;
        } else if (key == "optimizer") {
          if (v != "adadelta")
            throw ConfigError(where + ": only adadelta is available");
        } else throw ConfigError("unknown key " + where);
      } else if (section == "ga") {
        if (key == "generations") ga.generations = static_cast<int>(parse_int(where, v));
        else if (key == "population") ga.population = static_cast<int>(parse_int(where, v));
        else if (key == "crossover") ga.crossover_prob = parse_double(where, v);
        else if (key == "mutation") ga.mutation_prob = parse_double(where, v);
        else if (key == "tournament") ga.tournament = static_cast<int>(parse_int(where, v));
        else if (key == "elites") ga.elites = static_cast<int>(parse_int(where, v));
        else if (key == "alpha") fitness.alpha = parse_double(where, v);
        else if (key == "folds") fitness.folds = static_cast<int>(parse_int(where, v));
        else if (key == "trees") fitness.rf.trees = static_cast<int>(parse_int(where, v));
        else if (key == "min_samples_split")
          fitness.rf.min_samples_split = static_cast<int>(parse_int(where, v));
        else if (key == "min_samples_leaf")
          fitness.rf.min_samples_leaf = static_cast<int>(parse_int(where, v));
        else if (key == "metric") {
          if (v == "micro_f1") fitness.metric = select::Metric::MicroF1;
          else if (v == "accuracy") fitness.metric = select::Metric::Accuracy;
          else throw ConfigError(where + ": expected micro_f1 or accuracy");
        } else throw ConfigError("unknown key " + where);
      } else if (section == "weights") {
        if (key == "preset") {
          weights = weights_preset(v);
        } else if (key.rfind("lambda.", 0) != 0) {
          throw ConfigError("unknown key " + where);
        }
      } else if (section == "features") {
        if (key == "mask_dir") mask_dir = path_of(v);
        else throw ConfigError("unknown key " + where);
      } else if (section == "run") {
        if (key == "seed") seed = static_cast<std::uint64_t>(parse_int(where, v));
        else if (key == "jobs") jobs = static_cast<int>(parse_int(where, v));
        else if (key == "out") out_dir = path_of(v);
        else throw ConfigError("unknown key " + where);
      } else {
        throw ConfigError("unknown config section [" + section + "]");
      }
    }
  }
  // Per-task overrides apply after any preset.
  if (auto s = f.sections().find("weights"); s != f.sections().end()) {
    for (const auto &[key, v] : s->second) {
      if (key.rfind("lambda.", 0) != 0)
        continue;
      const std::string task = key.substr(7);
      auto it = std::find(nn::kTaskNames.begin(), nn::kTaskNames.end(), task);
      if (it == nn::kTaskNames.end())
        throw ConfigError("[weights] " + key + ": unknown task '" + task + "'");
      weights.lambda[static_cast<std::size_t>(it - nn::kTaskNames.begin())] =
          parse_double("[weights] " + key, v);
    }
  }
}

RunConfig RunConfig::from_file(const std::filesystem::path &path) {
  RunConfig c;
  c.apply(ConfigFile::load(path), path.parent_path());
  return c;
}

void RunConfig::propagate_seed() {
  training.seed = seed;
  ga.seed = seed;
  fitness.seed = seed;
  ga.jobs = jobs;
}

void RunConfig::validate() const {
  model.validate();
  training.validate();
  ga.validate();
  fitness.rf.validate();
  weights.validate();
  double s = 0;
  for (double r : split) {
    if (r < 0)
      throw ConfigError("split ratios must be non-negative");
    s += r;
  }
  if (std::abs(s - 1.0) > 1e-9)
    throw ConfigError("split ratios must sum to 1");
  if (jobs < 1)
    throw ConfigError("jobs must be >= 1");
}

} // namespace morphkit::config
