// SPDX-License-Identifier: Apache-2.0
#include "morphkit/train.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "morphkit/eval.hpp"

namespace morphkit::train {

using ad::Tensor;
using corpus::kNumTags;

void adadelta_update(Tensor &param, const Tensor &grad, AdadeltaState &st,
                     const AdadeltaConfig &cfg) {
  if (param.shape() != grad.shape())
    throw TrainError("adadelta: parameter " + ad::shape_str(param.shape()) +
                     " and gradient " + ad::shape_str(grad.shape()) + " differ");
  if (st.sq_grad.shape() != param.shape()) {
    st.sq_grad = Tensor(param.shape());
    st.sq_update = Tensor(param.shape());
  }
  const double rho = cfg.rho, eps = cfg.eps;
  for (std::size_t i = 0; i < param.numel(); ++i) {
    const double g = grad[i];
    st.sq_grad[i] = rho * st.sq_grad[i] + (1.0 - rho) * g * g;
    const double dx = -std::sqrt(st.sq_update[i] + eps) / std::sqrt(st.sq_grad[i] + eps) * g;
    st.sq_update[i] = rho * st.sq_update[i] + (1.0 - rho) * dx * dx;
    param[i] += cfg.lr * dx;
  }
}

void Adadelta::step(std::span<ad::Parameter *const> params,
                    const std::vector<std::string> &frozen_groups) {
  for (ad::Parameter *p : params) {
    if (std::find(frozen_groups.begin(), frozen_groups.end(), p->group) != frozen_groups.end())
      continue;
    adadelta_update(p->value, p->grad, state_[p], cfg_);
  }
}

bool Plateau::observe(double loss) {
  if (triggered_)
    return false;
  if (loss < best_ - min_delta_) {
    best_ = loss;
    bad_ = 0;
    return false;
  }
  best_ = std::min(best_, loss);
  if (++bad_ >= patience_) {
    triggered_ = true;
    return true;
  }
  return false;
}

void TrainConfig::validate() const {
  if (optimizer.lr <= 0)
    throw TrainError("learning rate must be > 0");
  if (optimizer.rho <= 0 || optimizer.rho >= 1)
    throw TrainError("adadelta rho must lie in (0, 1)");
  if (optimizer.eps <= 0)
    throw TrainError("adadelta eps must be > 0");
  if (batch_size < 1 || max_epochs < 0)
    throw TrainError("batch_size must be >= 1 and max_epochs >= 0");
  if (patience < 1 || lemma_patience < 1)
    throw TrainError("patience must be >= 1");
  if (max_grad_norm < 0)
    throw TrainError("max_grad_norm must be >= 0");
}

double DevMetrics::tag_loss() const {
  double s = 0.0;
  for (std::size_t j = 0; j < kNumTags; ++j)
    s += loss[j];
  return s;
}

nn::LossBreakdown batch_loss(ad::Tape &t, const MorphModel &m,
                             std::span<const EncodedExample> batch,
                             const LossWeights &weights, bool training, nn::Rng &rng,
                             bool tags_frozen) {
  bool any_tag = false;
  for (std::size_t j = 0; j < kNumTags; ++j)
    any_tag |= weights.lambda[j] != 0.0;
  const bool run_tags = any_tag && !tags_frozen;
  const bool run_lemma = weights.lemma() != 0.0;
  std::vector<nn::TaskOutputs> outs(batch.size());
  std::vector<nn::TaskTargets> tgts(batch.size());
  for (std::size_t i = 0; i < batch.size(); ++i) {
    tgts[i].tags = batch[i].gold_tags;
    if (run_tags) {
      const auto probs = m.tag_forward(t, batch[i], training, rng);
      for (std::size_t j = 0; j < kNumTags; ++j)
        if (weights.lambda[j] != 0.0)
          outs[i].tags[j] = probs[j];
    }
    if (run_lemma) {
      outs[i].lemma_steps = m.lemma_forward(t, batch[i], training, rng);
      tgts[i].lemma = m.lemma_targets(batch[i]);
    }
  }
  return nn::joint_loss(t, outs, tgts, weights);
}

DevMetrics measure(const MorphModel &m, const std::vector<EncodedExample> &examples,
                   bool decode_bleu) {
  DevMetrics d;
  if (examples.empty()) {
    d.bleu = std::nan("");
    return d;
  }
  nn::Rng unused(0);
  std::array<std::size_t, kNumTags> correct{};
  std::size_t lemma_ok = 0;
  std::vector<std::string> pred_lemmas, gold_lemmas;
  for (const auto &ex : examples) {
    ad::Tape t;
    const auto probs = m.tag_forward(t, ex, false, unused);
    for (std::size_t j = 0; j < kNumTags; ++j) {
      const auto p = probs[j].value().data();
      const int gold = ex.gold_tags.ids[j];
      d.loss[j] += -std::log(std::max(p[static_cast<std::size_t>(gold)], nn::kLogClamp));
      correct[j] += (std::max_element(p.begin(), p.end()) - p.begin()) == gold;
    }
    const auto steps = m.lemma_forward(t, ex, false, unused);
    const auto tgt = m.lemma_targets(ex);
    double ce = 0.0;
    bool exact = true;
    for (std::size_t s = 0; s < steps.size(); ++s) {
      const auto p = steps[s].value().data();
      ce += -std::log(std::max(p[static_cast<std::size_t>(tgt[s])], nn::kLogClamp));
      exact &= (std::max_element(p.begin(), p.end()) - p.begin()) == tgt[s];
    }
    d.loss[nn::kLemmaTask] += ce / static_cast<double>(steps.size());
    lemma_ok += exact;
    if (decode_bleu) {
      const auto r = m.beam_decode(ex.word_ids);
      pred_lemmas.push_back(m.vocab().decode(r.symbols));
      std::vector<int> g(tgt.begin(), tgt.end() - 1);
      gold_lemmas.push_back(m.vocab().decode(g));
    }
  }
  const double n = static_cast<double>(examples.size());
  for (auto &l : d.loss)
    l /= n;
  for (std::size_t j = 0; j < kNumTags; ++j)
    d.f1[j] = static_cast<double>(correct[j]) / n; // single-label micro-F1
  d.lemma_accuracy = static_cast<double>(lemma_ok) / n;
  d.bleu = decode_bleu ? eval::char_bleu(pred_lemmas, gold_lemmas) : std::nan("");
  return d;
}

namespace {

void clip_gradients(std::span<ad::Parameter *const> params, double max_norm) {
  double sq = 0.0;
  for (const auto *p : params)
    for (double g : p->grad.data())
      sq += g * g;
  const double norm = std::sqrt(sq);
  if (norm <= max_norm || norm == 0.0)
    return;
  const double k = max_norm / norm;
  for (auto *p : params)
    for (double &g : p->grad.data())
      g *= k;
}

} // namespace

TrainResult train_joint(MorphModel &m, const std::vector<EncodedExample> &train,
                        const std::vector<EncodedExample> &dev, const LossWeights &weights,
                        const TrainConfig &cfg, const EpochCallback &on_epoch) {
  cfg.validate();
  weights.validate();
  if (train.empty())
    throw TrainError("training set is empty");
  const auto &monitor = dev.empty() ? train : dev;
  Adadelta opt(cfg.optimizer);
  nn::Rng rng(cfg.seed);
  const auto params = m.params().all();
  const std::vector<std::string> frozen_groups{model::kEmbeddingGroup, model::kTagGroup};

  std::vector<std::size_t> order(train.size());
  std::iota(order.begin(), order.end(), 0);
  Plateau tag_plateau(cfg.patience, cfg.min_delta);
  Plateau lemma_plateau(cfg.lemma_patience, cfg.min_delta);
  bool frozen = false;
  TrainResult result;

  for (int epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    double loss_sum = 0.0;
    std::size_t batches = 0;
    for (std::size_t b = 0; b < order.size(); b += static_cast<std::size_t>(cfg.batch_size)) {
      const std::size_t e = std::min(order.size(), b + static_cast<std::size_t>(cfg.batch_size));
      std::vector<EncodedExample> batch;
      batch.reserve(e - b);
      for (std::size_t i = b; i < e; ++i)
        batch.push_back(train[order[i]]);
      m.params().zero_grad();
      ad::Tape t;
      const auto lb = batch_loss(t, m, batch, weights, true, rng, frozen);
      for (std::size_t j = 0; j < kNumTasks; ++j)
        if (!std::isfinite(lb.per_task[j]))
          throw TrainError("non-finite loss from the " + std::string(nn::kTaskNames[j]) +
                           " head at epoch " + std::to_string(epoch));
      const double total = lb.total.value().item();
      if (!std::isfinite(total))
        throw TrainError("non-finite joint loss at epoch " + std::to_string(epoch));
      t.backward(lb.total);
      if (cfg.max_grad_norm > 0)
        clip_gradients(params, cfg.max_grad_norm);
      opt.step(params, frozen ? frozen_groups : std::vector<std::string>{});
      loss_sum += total;
      ++batches;
    }
    EpochRecord rec;
    rec.epoch = epoch;
    rec.train_loss = loss_sum / static_cast<double>(std::max<std::size_t>(1, batches));
    rec.dev = measure(m, monitor, cfg.dev_bleu);
    rec.tags_frozen = frozen;
    result.history.push_back(rec);
    result.epochs_run = epoch;
    if (on_epoch)
      on_epoch(rec, m);

    if (!frozen) {
      if (cfg.patience != kNeverFreeze && tag_plateau.observe(rec.dev.tag_loss())) {
        frozen = true;
        result.freeze_epoch = epoch;
        if (weights.lemma() == 0.0) {
          result.stopped_early = true; // nothing left to train
          break;
        }
      }
    } else if (lemma_plateau.observe(rec.dev.loss[nn::kLemmaTask])) {
      result.stopped_early = true;
      break;
    }
  }
  return result;
}

std::string history_csv(const TrainResult &r) {
  std::ostringstream os;
  os.precision(10);
  os << "epoch,train_loss";
  for (auto n : nn::kTaskNames)
    os << ",dev_loss_" << n;
  for (std::size_t j = 0; j < kNumTags; ++j)
    os << ",dev_f1_" << corpus::kTagNames[j];
  os << ",dev_lemma_acc,dev_bleu,tags_frozen\n";
  for (const auto &e : r.history) {
    os << e.epoch << ',' << e.train_loss;
    for (double l : e.dev.loss)
      os << ',' << l;
    for (double f : e.dev.f1)
      os << ',' << f;
    os << ',' << e.dev.lemma_accuracy << ',';
    if (!std::isnan(e.dev.bleu))
      os << e.dev.bleu;
    os << ',' << (e.tags_frozen ? 1 : 0) << '\n';
  }
  return os.str();
}

// ------------------------------------------------------------ calibration

namespace {

double overall(const DevMetrics &d) {
  double s = 0.0;
  for (double f : d.f1)
    s += f;
  return (s + d.bleu / 100.0) / static_cast<double>(kNumTasks);
}

DevMetrics run_once(const ModelFactory &make, const std::vector<EncodedExample> &train,
                    const std::vector<EncodedExample> &dev, const LossWeights &w,
                    const TrainConfig &cfg) {
  MorphModel m = make();
  train_joint(m, train, dev, w, cfg);
  return measure(m, dev.empty() ? train : dev, true);
}

} // namespace

CalibrationResult calibrate_lambdas(const ModelFactory &make,
                                    const std::vector<EncodedExample> &train,
                                    const std::vector<EncodedExample> &dev,
                                    const CalibrationConfig &cfg) {
  if (cfg.grid_points < 2)
    throw TrainError("calibration grid needs at least 2 points");
  CalibrationResult res;
  std::size_t best = 0;
  for (int i = 0; i < cfg.grid_points; ++i) {
    const double lambda = static_cast<double>(i) / (cfg.grid_points - 1);
    CalibrationRow row;
    row.phase = "grid";
    row.weights = LossWeights::heuristic(lambda);
    row.dev = run_once(make, train, dev, row.weights, cfg.train);
    row.score = overall(row.dev);
    res.rows.push_back(row);
    if (row.score > res.rows[best].score)
      best = res.rows.size() - 1;
  }
  res.rows[best].accepted = true;
  LossWeights current = res.rows[best].weights;
  DevMetrics current_dev = res.rows[best].dev;
  const double shared = current.lambda[0];

  if (cfg.tune) {
    for (std::size_t j = 0; j < kNumTags; ++j) {
      double grid_best = 0.0;
      for (int i = 0; i < cfg.grid_points; ++i)
        grid_best = std::max(grid_best, res.rows[i].dev.f1[j]);
      if (current_dev.f1[j] >= grid_best)
        continue; // already optimal for this tag
      for (double off : cfg.offsets) {
        CalibrationRow row;
        row.phase = "tune";
        row.weights = current;
        row.weights.lambda[j] = std::min(1.0, shared + off);
        if (row.weights.lambda[j] == current.lambda[j])
          continue;
        row.dev = run_once(make, train, dev, row.weights, cfg.train);
        row.score = overall(row.dev);
        bool ok = row.dev.f1[j] > current_dev.f1[j];
        for (std::size_t k = 0; k < kNumTags && ok; ++k)
          if (k != j && row.dev.f1[k] < current_dev.f1[k] - cfg.tolerance)
            ok = false;
        if (ok && row.dev.bleu / 100.0 < current_dev.bleu / 100.0 - cfg.tolerance)
          ok = false;
        row.accepted = ok;
        if (ok) {
          current = row.weights;
          current_dev = row.dev;
        }
        res.rows.push_back(row);
      }
    }
  }
  res.chosen = current;
  return res;
}

std::string calibration_header() {
  std::string h = "phase";
  for (auto n : nn::kTaskNames)
    h += ",lambda_" + std::string(n);
  for (std::size_t j = 0; j < kNumTags; ++j)
    h += ",f1_" + std::string(corpus::kTagNames[j]);
  return h + ",lemma_acc,bleu,score,accepted";
}

std::string calibration_csv(const CalibrationResult &r) {
  std::ostringstream os;
  os.precision(10);
  os << calibration_header() << '\n';
  for (const auto &row : r.rows) {
    os << row.phase;
    for (double l : row.weights.lambda)
      os << ',' << l;
    for (double f : row.dev.f1)
      os << ',' << f;
    os << ',' << row.dev.lemma_accuracy << ',' << row.dev.bleu << ',' << row.score << ','
       << (row.accepted ? 1 : 0) << '\n';
  }
  return os.str();
}

std::string weights_manifest(const LossWeights &w) {
  std::ostringstream os;
  os.precision(17);
  os << "[weights]\n";
  for (std::size_t j = 0; j < kNumTasks; ++j)
    os << "lambda." << nn::kTaskNames[j] << " = " << w.lambda[j] << '\n';
  return os.str();
}

// ------------------------------------------------------ single vs joint

std::vector<ComparisonRow> run_individual_vs_mt(const ModelFactory &make,
                                                const std::vector<EncodedExample> &train,
                                                const std::vector<EncodedExample> &dev,
                                                const LossWeights &joint,
                                                const TrainConfig &cfg) {
  std::vector<ComparisonRow> rows;
  for (std::size_t task = 0; task < kNumTasks; ++task) {
    ComparisonRow r;
    r.run = "single:" + std::string(nn::kTaskNames[task]);
    r.weights = LossWeights::single(task);
    r.dev = run_once(make, train, dev, r.weights, cfg);
    rows.push_back(r);
  }
  ComparisonRow mt;
  mt.run = "mt";
  mt.weights = joint;
  mt.dev = run_once(make, train, dev, joint, cfg);
  rows.push_back(mt);
  return rows;
}

std::string comparison_csv(const std::vector<ComparisonRow> &rows) {
  std::ostringstream os;
  os.precision(10);
  os << "run";
  for (std::size_t j = 0; j < kNumTags; ++j)
    os << ",f1_" << corpus::kTagNames[j];
  os << ",lemma_acc,bleu\n";
  for (const auto &r : rows) {
    os << r.run;
    for (double f : r.dev.f1)
      os << ',' << f;
    os << ',' << r.dev.lemma_accuracy << ',' << r.dev.bleu << '\n';
  }
  return os.str();
}

} // namespace morphkit::train
