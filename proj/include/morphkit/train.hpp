// SPDX-License-Identifier: Apache-2.0
/**
 * @file   train.hpp
 * @brief  Joint training with Adadelta and progressive freezing, the loss
 *         weight calibration sweep, and the single-task comparison harness.
 */
#ifndef MORPHKIT_TRAIN_HPP
#define MORPHKIT_TRAIN_HPP

#include <array>
#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "morphkit/autodiff.hpp"
#include "morphkit/corpus.hpp"
#include "morphkit/layers.hpp"
#include "morphkit/model.hpp"

namespace morphkit::train {

using corpus::EncodedExample;
using model::MorphModel;
using nn::LossWeights;
using nn::kNumTasks;

class TrainError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

struct AdadeltaConfig {
  double lr = 1.0;
  double rho = 0.95;
  double eps = 1e-6;
};

struct AdadeltaState {
  ad::Tensor sq_grad;   // E[g^2]
  ad::Tensor sq_update; // E[dx^2]
};

/// E[g^2] <- rho E[g^2] + (1-rho) g^2
/// dx      = -sqrt(E[dx^2] + eps) / sqrt(E[g^2] + eps) * g
/// E[dx^2] <- rho E[dx^2] + (1-rho) dx^2
/// x      <- x + lr * dx
void adadelta_update(ad::Tensor &param, const ad::Tensor &grad, AdadeltaState &state,
                     const AdadeltaConfig &cfg);

class Adadelta {
public:
  explicit Adadelta(AdadeltaConfig cfg = {}) : cfg_(cfg) {}
  /// Updates every parameter whose group is not frozen.
  void step(std::span<ad::Parameter *const> params,
            const std::vector<std::string> &frozen_groups = {});
  const AdadeltaConfig &config() const { return cfg_; }

private:
  AdadeltaConfig cfg_;
  std::map<const ad::Parameter *, AdadeltaState> state_;
};

/// "No improvement larger than min_delta for `patience` consecutive epochs".
class Plateau {
public:
  Plateau(int patience, double min_delta) : patience_(patience), min_delta_(min_delta) {}
  /// Returns true on the epoch the plateau is first detected.
  bool observe(double loss);
  bool triggered() const { return triggered_; }
  double best() const { return best_; }

private:
  int patience_;
  double min_delta_;
  double best_ = std::numeric_limits<double>::infinity();
  int bad_ = 0;
  bool triggered_ = false;
};

inline constexpr int kNeverFreeze = std::numeric_limits<int>::max();

struct TrainConfig {
  AdadeltaConfig optimizer;
  int batch_size = 32;
  int max_epochs = 200;
  /// Epochs without summed tag dev-loss improvement before the tag
  /// predictor and shared embedding freeze. kNeverFreeze disables it.
  int patience = 5;
  double min_delta = 1e-4;
  /// Early stopping for the lemma predictor once tags are frozen.
  int lemma_patience = 5;
  double max_grad_norm = 0.0; // 0 disables the clamp
  bool dev_bleu = true;       // beam-decode the dev set every epoch
  std::uint64_t seed = 0;

  void validate() const;
};

struct DevMetrics {
  std::array<double, kNumTasks> loss{}; // unweighted mean cross-entropy
  std::array<double, corpus::kNumTags> f1{};
  double lemma_accuracy = 0.0; // teacher-forced argmax, exact match
  double bleu = 0.0;           // beam decoded; NaN when skipped
  double tag_loss() const;
};

/// Inference-mode metrics over a set of examples.
DevMetrics measure(const MorphModel &m, const std::vector<EncodedExample> &examples,
                   bool decode_bleu);

struct EpochRecord {
  int epoch = 0;
  double train_loss = 0.0;
  DevMetrics dev;
  bool tags_frozen = false;
};

struct TrainResult {
  std::vector<EpochRecord> history;
  std::optional<int> freeze_epoch;
  int epochs_run = 0;
  bool stopped_early = false;
};

using EpochCallback = std::function<void(const EpochRecord &, const MorphModel &)>;

/// Minimizes the weighted joint loss. When `dev` is empty the training set
/// is monitored instead.
TrainResult train_joint(MorphModel &m, const std::vector<EncodedExample> &train,
                        const std::vector<EncodedExample> &dev, const LossWeights &weights,
                        const TrainConfig &cfg, const EpochCallback &on_epoch = nullptr);

/// epoch,train_loss,dev_loss_<task>...,dev_f1_<tag>...,dev_lemma_acc,dev_bleu,tags_frozen
std::string history_csv(const TrainResult &r);

/// One weighted loss over a batch; tasks with zero weight, and tag tasks
/// when `tags_frozen`, are left out of the graph.
nn::LossBreakdown batch_loss(ad::Tape &t, const MorphModel &m,
                             std::span<const EncodedExample> batch,
                             const LossWeights &weights, bool training, nn::Rng &rng,
                             bool tags_frozen = false);

// ------------------------------------------------------------ calibration

using ModelFactory = std::function<MorphModel()>;

struct CalibrationRow {
  std::string phase; // "grid" or "tune"
  LossWeights weights;
  DevMetrics dev;
  double score = 0.0; // mean of the six tag F1 and BLEU/100
  bool accepted = false;
};

struct CalibrationConfig {
  TrainConfig train;
  int grid_points = 11; // 0, 0.1, ..., 1
  bool tune = true;
  /// Candidate raises of a single tag weight above the chosen shared value.
  std::vector<double> offsets{0.2, 0.25};
  double tolerance = 0.005;
};

struct CalibrationResult {
  std::vector<CalibrationRow> rows;
  LossWeights chosen;
};

CalibrationResult calibrate_lambdas(const ModelFactory &make,
                                    const std::vector<EncodedExample> &train,
                                    const std::vector<EncodedExample> &dev,
                                    const CalibrationConfig &cfg);

/// phase,lambda_POS,...,lambda_L,f1_POS,...,f1_TAM,lemma_acc,bleu,score,accepted
std::string calibration_csv(const CalibrationResult &r);
std::string calibration_header();
/// [weights] section with one "lambda.<TASK> = v" line per task.
std::string weights_manifest(const LossWeights &w);

// ------------------------------------------------------ single vs joint

struct ComparisonRow {
  std::string run; // "single:POS" ... "single:L", "mt"
  LossWeights weights;
  DevMetrics dev;
};

std::vector<ComparisonRow> run_individual_vs_mt(const ModelFactory &make,
                                                const std::vector<EncodedExample> &train,
                                                const std::vector<EncodedExample> &dev,
                                                const LossWeights &joint,
                                                const TrainConfig &cfg);

/// run,f1_POS,...,f1_TAM,lemma_acc,bleu
std::string comparison_csv(const std::vector<ComparisonRow> &rows);

} // namespace morphkit::train

#endif
