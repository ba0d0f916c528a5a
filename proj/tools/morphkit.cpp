// SPDX-License-Identifier: Apache-2.0
// morphkit: command-line driver for ingestion, feature selection, training,
// weight calibration, analysis and evaluation.
#include <CLI11.hpp>

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <sstream>

#include "morphkit/config.hpp"
#include "morphkit/corpus.hpp"
#include "morphkit/eval.hpp"
#include "morphkit/lingfeat.hpp"
#include "morphkit/model.hpp"
#include "morphkit/pipeline.hpp"
#include "morphkit/select.hpp"
#include "morphkit/text.hpp"
#include "morphkit/train.hpp"

namespace fs = std::filesystem;
using namespace morphkit;

namespace {

struct Common {
  std::string config;
  std::uint64_t seed = 0;
  int jobs = 1;
  std::string out;
  std::vector<std::string> sets;
  CLI::Option *seed_opt = nullptr;
  CLI::Option *jobs_opt = nullptr;
};

void add_common(CLI::App *sub, Common &c) {
  sub->add_option("--config", c.config, "run configuration file");
  c.seed_opt = sub->add_option("--seed", c.seed, "random seed (else [run] seed, else MORPHKIT_SEED, else 0)");
  c.jobs_opt = sub->add_option("--jobs", c.jobs, "worker thread cap")->check(CLI::PositiveNumber);
  sub->add_option("--out", c.out, "output directory (else [run] out)");
  sub->add_option("--set", c.sets, "override a config key: section.key=value")->take_all();
  sub->footer("Config keys (section, key, default, meaning):\n" + config::describe_keys());
}

config::RunConfig resolve(const Common &c) {
  config::RunConfig cfg;
  bool seed_in_file = false;
  if (!c.config.empty()) {
    if (!fs::exists(c.config))
      throw config::ConfigError("missing config file: " + c.config);
    const auto file = config::ConfigFile::load(c.config);
    cfg.apply(file, fs::path(c.config).parent_path());
    seed_in_file = file.has("run", "seed");
  }
  if (!c.sets.empty()) {
    config::ConfigFile over;
    for (const auto &s : c.sets) {
      const auto eq = s.find('=');
      const auto dot = s.find('.');
      if (eq == std::string::npos || dot == std::string::npos || dot > eq)
        throw config::ConfigError("--set expects section.key=value, got '" + s + "'");
      over.set(s.substr(0, dot), s.substr(dot + 1, eq - dot - 1), s.substr(eq + 1));
    }
    cfg.apply(over);
    seed_in_file = seed_in_file || over.has("run", "seed");
  }
  if (!seed_in_file)
    if (const char *env = std::getenv("MORPHKIT_SEED"))
      cfg.seed = std::stoull(env);
  if (c.seed_opt->count())
    cfg.seed = c.seed;
  if (c.jobs_opt->count())
    cfg.jobs = c.jobs;
  if (!c.out.empty())
    cfg.out_dir = c.out;
  cfg.propagate_seed();
  cfg.validate();
  fs::create_directories(cfg.out_dir);
  return cfg;
}

void write_out(const fs::path &p, std::string_view content) {
  text::write_atomic(p, content);
  std::cerr << "wrote " << p.string() << '\n';
}

train::EpochCallback progress() {
  return [](const train::EpochRecord &r, const model::MorphModel &) {
    std::cerr << "epoch " << r.epoch << "  train " << r.train_loss << "  dev tags "
              << r.dev.tag_loss() << "  lemma " << r.dev.loss[nn::kLemmaTask]
              << (r.tags_frozen ? "  [tags frozen]" : "") << '\n';
  };
}

// ---------------------------------------------------------------- stages

int cmd_ingest(const Common &c, bool fit, bool truncate) {
  auto cfg = resolve(c);
  cfg.fit_lenmax = cfg.fit_lenmax || fit;
  cfg.truncate = cfg.truncate || truncate;
  const auto ws = pipeline::load_workspace(cfg);
  const std::pair<const char *, const std::vector<corpus::Sentence> *> splits[] = {
      {"train", &ws.train}, {"dev", &ws.dev}, {"test", &ws.test}};
  const std::vector<corpus::EncodedExample> *encoded[] = {&ws.train_ex, &ws.dev_ex, &ws.test_ex};
  for (std::size_t i = 0; i < 3; ++i) {
    write_out(cfg.out_dir / (std::string(splits[i].first) + ".tsv"),
              corpus::format_treebank(*splits[i].second));
    std::ostringstream os;
    corpus::write_encoded(os, {{ws.model.cw, ws.model.len_max, cfg.truncate}, ws.vocab,
                               ws.domains, *encoded[i]});
    write_out(cfg.out_dir / (std::string(splits[i].first) + ".enc"), os.str());
  }
  std::cout << "sentences  " << ws.train.size() << " / " << ws.dev.size() << " / "
            << ws.test.size() << "\n"
            << "tokens     " << ws.train_ex.size() << " / " << ws.dev_ex.size() << " / "
            << ws.test_ex.size() << "\n"
            << "chars      " << ws.vocab.chars().size() << "\n"
            << "len_max    " << ws.model.len_max << "\n"
            << "multi-analysis tokens " << ws.report.multi_analysis_tokens << "\n";
  for (std::size_t t = 0; t < corpus::kNumTags; ++t)
    std::cout << "domain " << corpus::kTagNames[t] << "  " << ws.domains.at(t).size()
              << " labels\n";
  return 0;
}

int cmd_select(const Common &c, const std::string &tag_name, const std::string &corpus_path,
               const std::string &preset) {
  auto cfg = resolve(c);
  const auto tag = corpus::tag_from_name(tag_name);
  if (!tag)
    throw config::ConfigError("unknown tag '" + tag_name + "'");
  const fs::path dir = cfg.mask_dir.empty() ? cfg.out_dir : cfg.mask_dir;
  fs::create_directories(dir);

  if (!preset.empty()) {
    // Tag-wise lists shipped in data/moo_features.tsv.
    const auto table = text::read_file(fs::path(MORPHKIT_DATA_DIR) / "moo_features.tsv");
    for (const auto &line : text::split(table, '\n')) {
      const auto cols = text::split(line, '\t');
      if (cols.size() == 3 && cols[0] == tag_name && cols[1] == preset) {
        const auto m = lingfeat::FeatureMask::from_slots(
            lingfeat::pool_size(), lingfeat::resolve_feature_list(cols[2]));
        write_out(pipeline::mask_path(dir, *tag), lingfeat::format_mask_file(m, tag_name));
        return 0;
      }
    }
    throw config::ConfigError("no feature list for " + tag_name + "/" + preset);
  }

  const fs::path path = corpus_path.empty() ? cfg.train : fs::path(corpus_path);
  if (path.empty() || !fs::exists(path))
    throw config::ConfigError("missing corpus: " + path.string());
  const auto schema = cfg.manifest.empty() ? corpus::ColumnSchema::standard()
                                           : corpus::ColumnSchema::from_manifest_file(cfg.manifest);
  corpus::TagDomains domains;
  const auto sentences = corpus::parse_treebank(path, schema, &domains);
  const auto table = lingfeat::PhonoTable::load(
      cfg.phono_table.empty() ? lingfeat::default_table_path() : cfg.phono_table);
  const auto data = select::make_dataset(sentences, domains, *tag, table);
  const auto result = select::ga_run(data, cfg.ga, cfg.fitness);

  lingfeat::FeatureMask mask{result.best.bits};
  write_out(pipeline::mask_path(dir, *tag), lingfeat::format_mask_file(mask, tag_name));
  write_out(cfg.out_dir / ("ga_trace." + tag_name + ".csv"), select::trace_csv(result));
  write_out(cfg.out_dir / ("ga_pareto." + tag_name + ".csv"), select::pareto_csv(result));
  std::cout << tag_name << " fitness " << result.best.fitness.value_or(0.0) << " with "
            << mask.count() << "/" << mask.size() << " features\n";
  for (const auto &n : mask.selected_names())
    std::cout << "  " << n << '\n';
  return 0;
}

int cmd_train(const Common &c, int epochs) {
  auto cfg = resolve(c);
  if (epochs > 0)
    cfg.training.max_epochs = epochs;
  const auto ws = pipeline::load_workspace(cfg);
  auto m = pipeline::make_model(ws, pipeline::load_masks(cfg.mask_dir, ws.model), cfg.seed);
  const auto r = train::train_joint(m, ws.train_ex, ws.dev_ex, cfg.weights, cfg.training,
                                    progress());
  write_out(cfg.out_dir / "train_log.csv", train::history_csv(r));
  m.save(cfg.out_dir / "model.ckpt");
  std::cout << "epochs " << r.epochs_run << "  freeze "
            << (r.freeze_epoch ? std::to_string(*r.freeze_epoch) : "-") << '\n';
  return 0;
}

int cmd_calibrate(const Common &c, bool no_tune) {
  auto cfg = resolve(c);
  const auto ws = pipeline::load_workspace(cfg);
  const auto masks = pipeline::load_masks(cfg.mask_dir, ws.model);
  train::CalibrationConfig cc;
  cc.train = cfg.training;
  cc.tune = !no_tune;
  const auto &dev = ws.dev_ex.empty() ? ws.train_ex : ws.dev_ex;
  const auto r = train::calibrate_lambdas(
      [&] { return pipeline::make_model(ws, masks, cfg.seed); }, ws.train_ex, dev, cc);
  write_out(cfg.out_dir / "calibration.csv", train::calibration_csv(r));
  write_out(cfg.out_dir / "weights.cfg", train::weights_manifest(r.chosen));
  std::cout << "chosen " << r.chosen.to_string() << '\n';
  return 0;
}

int cmd_compare(const Common &c) {
  auto cfg = resolve(c);
  const auto ws = pipeline::load_workspace(cfg);
  const auto masks = pipeline::load_masks(cfg.mask_dir, ws.model);
  const auto &dev = ws.dev_ex.empty() ? ws.train_ex : ws.dev_ex;
  const auto rows = train::run_individual_vs_mt(
      [&] { return pipeline::make_model(ws, masks, cfg.seed); }, ws.train_ex, dev, cfg.weights,
      cfg.training);
  const auto csv = train::comparison_csv(rows);
  write_out(cfg.out_dir / "comparison.csv", csv);
  std::cout << csv;
  return 0;
}

// One token per line, first tab field is the surface; blank lines split
// sentences.
std::vector<corpus::Sentence> read_tokens(const fs::path &p) {
  std::vector<corpus::Sentence> out(1);
  for (const auto &raw : text::split(text::read_file(p), '\n')) {
    const auto line = text::trim(raw);
    if (line.empty()) {
      if (!out.back().tokens.empty())
        out.emplace_back();
      continue;
    }
    corpus::Token tok;
    tok.surface = text::split(line, '\t').front();
    tok.tags.fill(std::string(corpus::kUnk));
    out.back().tokens.push_back(std::move(tok));
  }
  if (out.back().tokens.empty())
    out.pop_back();
  return out;
}

int cmd_analyze(const std::string &model_path, const std::string &input,
                const std::string &out) {
  for (const auto &p : {model_path, input})
    if (!fs::exists(p))
      throw config::ConfigError("missing file: " + p);
  const auto m = model::MorphModel::load(model_path);
  auto sentences = read_tokens(input);
  std::size_t failed = 0;
  for (auto &s : sentences) {
    const auto analyses = m.analyze(s);
    for (std::size_t i = 0; i < s.tokens.size(); ++i) {
      const auto &a = analyses[i];
      if (a.error) {
        ++failed;
        std::cerr << "warning: " << *a.error << '\n';
        s.tokens[i].lemma = s.tokens[i].surface;
        continue;
      }
      s.tokens[i].lemma = a.lemma;
      s.tokens[i].tags = a.tags;
    }
  }
  const auto text_out = corpus::format_treebank(sentences);
  if (out.empty())
    std::cout << text_out;
  else
    write_out(out, text_out);
  if (failed)
    std::cerr << failed << " token(s) left unanalyzed\n";
  return 0;
}

int cmd_evaluate(const std::string &pred_path, const std::string &gold_path,
                 const std::string &out, const std::string &unit, const std::string &model_path) {
  for (const auto &p : {pred_path, gold_path})
    if (!fs::exists(p))
      throw config::ConfigError("missing file: " + p);
  const auto schema = corpus::ColumnSchema::standard();
  const auto pred = corpus::parse_treebank(pred_path, schema);
  const auto gold = corpus::parse_treebank(gold_path, schema);
  const auto p = eval::predictions_of(pred);
  const auto g = eval::predictions_of(gold);
  const auto ps = eval::surfaces_of(pred);
  const auto gs = eval::surfaces_of(gold);
  if (ps.size() != gs.size())
    throw eval::EvalError("token counts differ: " + std::to_string(ps.size()) + " predicted, " +
                          std::to_string(gs.size()) + " gold");
  for (std::size_t i = 0; i < ps.size(); ++i)
    if (ps[i] != gs[i])
      throw eval::EvalError("token " + std::to_string(i + 1) + " surfaces differ: '" + ps[i] +
                            "' vs '" + gs[i] + "'");
  eval::EvalOptions opts;
  opts.edit_unit = unit == "grapheme" ? eval::EditUnit::Grapheme : eval::EditUnit::Scalar;
  std::optional<model::MorphModel> m;
  if (!model_path.empty())
    m = model::MorphModel::load(model_path);
  const auto r = eval::evaluate(p, g, gs, opts, m ? &m->vocab() : nullptr);
  std::cout << eval::report_text(r);
  if (!out.empty())
    write_out(out, eval::report_csv(r));
  return 0;
}

} // namespace

int main(int argc, char **argv) {
  CLI::App app{"morphkit: joint morphological tagging and lemmatization"};
  app.require_subcommand(1);
  app.fallthrough(false);

  Common ci, cs, ct, cc, cm;
  bool fit = false, truncate = false;
  auto *ingest = app.add_subcommand("ingest", "read treebanks, split, and cache encoded examples");
  add_common(ingest, ci);
  ingest->add_flag("--fit-lenmax", fit, "set len_max from the longest word");
  ingest->add_flag("--truncate", truncate, "cut overlong words instead of failing");

  std::string tag, corpus_path, preset;
  auto *sel = app.add_subcommand("select-features", "GA search for one tag's feature mask");
  add_common(sel, cs);
  sel->add_option("--tag", tag, "POS, G, N, P, C or TAM")->required();
  sel->add_option("--corpus", corpus_path, "treebank to score on (else [corpus] train)");
  sel->add_option("--preset", preset, "write the shipped list for a language instead (hindi, urdu)");

  int epochs = 0;
  auto *tr = app.add_subcommand("train", "train the joint model");
  add_common(tr, ct);
  tr->add_option("--epochs", epochs, "override [train] max_epochs");

  bool no_tune = false;
  auto *cal = app.add_subcommand("calibrate", "sweep the shared tag weight, then tune single tags");
  add_common(cal, cc);
  cal->add_flag("--no-tune", no_tune, "grid sweep only");

  std::string model_path, input, out_file;
  auto *an = app.add_subcommand("analyze", "tag and lemmatize tokenized text");
  an->add_option("--model", model_path, "checkpoint")->required();
  an->add_option("--input", input, "one token per line, blank line between sentences")->required();
  an->add_option("--out", out_file, "analysis file (else stdout)");

  std::string pred, gold, unit = "scalar";
  auto *ev = app.add_subcommand("evaluate", "score predictions against gold");
  ev->add_option("--pred", pred, "predicted analyses")->required();
  ev->add_option("--gold", gold, "gold treebank")->required();
  ev->add_option("--out", out_file, "also write metric,value CSV here");
  ev->add_option("--edit-unit", unit, "Levenshtein unit")
      ->check(CLI::IsMember({"scalar", "grapheme"}))
      ->capture_default_str();
  ev->add_option("--model", model_path, "checkpoint, for the OOV-character bucket");

  auto *cmp = app.add_subcommand("compare-mt", "single-task runs against the joint model");
  add_common(cmp, cm);

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success &e) {
    return app.exit(e);
  } catch (const CLI::ParseError &e) {
    app.exit(e);
    return 2;
  }

  try {
    if (ingest->parsed()) return cmd_ingest(ci, fit, truncate);
    if (sel->parsed()) return cmd_select(cs, tag, corpus_path, preset);
    if (tr->parsed()) return cmd_train(ct, epochs);
    if (cal->parsed()) return cmd_calibrate(cc, no_tune);
    if (an->parsed()) return cmd_analyze(model_path, input, out_file);
    if (ev->parsed()) return cmd_evaluate(pred, gold, out_file, unit, model_path);
    if (cmp->parsed()) return cmd_compare(cm);
  } catch (const std::exception &e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 2;
}
