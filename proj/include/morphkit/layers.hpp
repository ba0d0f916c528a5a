// SPDX-License-Identifier: Apache-2.0
/**
 * @file   layers.hpp
 * @brief  Neural building blocks on top of the autodiff tape.
 *
 * Orientation: a word is a (len x d) matrix, one row per character.
 * Convolution output is (positions x maps), pooling halves the position
 * axis, vectors travel as (1 x n) rows.
 */
#ifndef MORPHKIT_LAYERS_HPP
#define MORPHKIT_LAYERS_HPP

#include <array>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "morphkit/autodiff.hpp"
#include "morphkit/corpus.hpp"

namespace morphkit::nn {

using ad::Parameter;
using ad::ParamStore;
using ad::Tape;
using ad::Tensor;
using ad::Var;
using Rng = std::mt19937_64;

/// Uniform Glorot initialisation.
Tensor glorot(ad::Shape shape, std::size_t fan_in, std::size_t fan_out, Rng &rng);

struct Embedding {
  Parameter *table = nullptr;

  static Embedding create(ParamStore &store, const std::string &name,
                          const std::string &group, std::size_t vocab,
                          std::size_t dim, Rng &rng);
  std::size_t dim() const { return table->value.dim(1); }
  std::size_t vocab() const { return table->value.dim(0); }
  Var forward(Tape &t, std::span<const int> ids) const;
};

/// Adds i.i.d. N(0, sigma^2) noise in training mode; identity otherwise.
Var gaussian_noise(Var x, double sigma, bool training, Rng &rng);

/// Inverted dropout: survivors are scaled by 1/(1-rate).
Var dropout(Var x, double rate, bool training, Rng &rng);

/// One convolution over character rows: out[i, l] =
/// relu(sum(x[i:i+width, :] * H_l) + b_l). H_l is stored as column l of a
/// (width*d x maps) matrix.
struct Conv1d {
  Parameter *weight = nullptr;
  Parameter *bias = nullptr;
  std::size_t width = 0;

  static Conv1d create(ParamStore &store, const std::string &name,
                       const std::string &group, std::size_t width,
                       std::size_t in_dim, std::size_t maps, Rng &rng);
  std::size_t maps() const { return weight->value.dim(1); }
  Var forward(Tape &t, Var x) const;
};

enum class PoolMode { Max, Avg };

/// Non-overlapping windows of 2 along the position axis; an odd trailing
/// row is dropped. (L x N) -> (floor(L/2) x N).
Var pool(Var x, PoolMode mode);

/// Concatenates [max4 | avg4 | max5 | avg5] along the map axis and
/// flattens to a (1 x rows*total_maps) row. Any subset may be given for
/// the pooling ablations; order is preserved.
Var build_z(std::span<const Var> pooled);
Var build_z(Var max4, Var avg4, Var max5, Var avg5);

/// Stacks 2*cw+1 word vectors (left context, word, right context) into
/// a (2*cw+1 x n) sequence.
Var build_context_seq(std::span<const Var> z, int cw);

/// GRU with z = s(xW_z + hU_z + b_z), r = s(xW_r + hU_r + b_r),
/// c = tanh(xW_h + (r*h)U_h + b_h), h' = (1-z)*h + z*c.
/// W is stored fused as (in x 3h) in z|r|c order.
struct GRUCell {
  Parameter *w = nullptr;    // in x 3h
  Parameter *u_zr = nullptr; // h x 2h
  Parameter *u_h = nullptr;  // h x h
  Parameter *b = nullptr;    // 3h

  static GRUCell create(ParamStore &store, const std::string &name,
                        const std::string &group, std::size_t in,
                        std::size_t hidden, Rng &rng);
  std::size_t input_size() const { return w->value.dim(0); }
  std::size_t hidden_size() const { return u_h->value.dim(0); }

  /// Input projection xW + b for every row of xs at once.
  Var project(Tape &t, Var xs) const;
  Var step_projected(Tape &t, Var xw_row, Var h) const;
  Var step(Tape &t, Var x, Var h) const;
  Var zero_state(Tape &t) const;
};

enum class BiGruOutput { Last, PerStep };

struct BiGRU {
  GRUCell fwd;
  GRUCell bwd;

  static BiGRU create(ParamStore &store, const std::string &name,
                      const std::string &group, std::size_t in,
                      std::size_t hidden, Rng &rng);
  std::size_t output_size() const { return 2 * fwd.hidden_size(); }

  /// Last: (1 x 2h) = [final forward | final backward].
  /// PerStep: (T x 2h), row t = [forward_t | backward_t].
  Var forward(Tape &t, Var seq, BiGruOutput mode) const;
};

struct Dense {
  Parameter *w = nullptr;
  Parameter *b = nullptr;

  static Dense create(ParamStore &store, const std::string &name,
                      const std::string &group, std::size_t in, std::size_t out,
                      Rng &rng);
  Var forward(Tape &t, Var x) const;
};

/// concat(rnn, features) -> Dense+ReLU -> dropout -> Dense+tanh -> dropout
/// -> Dense+softmax.
struct DenseHead {
  Dense hidden1;
  Dense hidden2;
  Dense out;
  double dropout_rate = 0.5;

  static DenseHead create(ParamStore &store, const std::string &name,
                          const std::string &group, std::size_t rnn_size,
                          std::size_t feature_size, std::size_t size1,
                          std::size_t size2, std::size_t classes,
                          double dropout_rate, Rng &rng);
  std::size_t classes() const { return out.w->value.dim(1); }
  Var logits(Tape &t, Var rnn_out, std::optional<Var> features, bool training,
             Rng &rng) const;
  Var forward(Tape &t, Var rnn_out, std::optional<Var> features, bool training,
              Rng &rng) const;
};

/// Luong global attention, general score scaled by a learned positive
/// scalar: score(h, s) = exp(log_scale) * h W_a s^T.
struct LuongAttention {
  Parameter *w_a = nullptr; // dec x enc
  Parameter *log_scale = nullptr;

  struct Result {
    Var context; // 1 x enc
    Var weights; // 1 x S
  };

  static LuongAttention create(ParamStore &store, const std::string &name,
                               const std::string &group, std::size_t dec,
                               std::size_t enc, Rng &rng);
  Result attend(Tape &t, Var h, Var encoder_states) const;
};

inline constexpr std::size_t kNumTasks = corpus::kNumTags + 1;
inline constexpr std::size_t kLemmaTask = corpus::kNumTags;
inline constexpr std::array<std::string_view, kNumTasks> kTaskNames = {
    "POS", "G", "N", "P", "C", "TAM", "L"};

/// The seven coefficients of the joint loss, six tags then lemma.
struct LossWeights {
  std::array<double, kNumTasks> lambda{};

  double &tag(corpus::Tag t) { return lambda[static_cast<std::size_t>(t)]; }
  double tag(corpus::Tag t) const { return lambda[static_cast<std::size_t>(t)]; }
  double &lemma() { return lambda[kLemmaTask]; }
  double lemma() const { return lambda[kLemmaTask]; }

  /// All tags share `tag_weight`; lemma gets 1 - tag_weight.
  static LossWeights heuristic(double tag_weight);
  /// Calibrated operating point: tags 0.7 with G = P = 0.9 and C = 0.95,
  /// lemma 0.3.
  static LossWeights calibrated();
  /// Only task `task` carries weight 1.
  static LossWeights single(std::size_t task);

  void validate() const;
  std::string to_string() const;
};

inline constexpr double kLogClamp = 1e-12;

/// -log(max(p[target], 1e-12)) for a (1 x C) probability row.
Var cross_entropy(Var probs, int target);

struct TaskOutputs {
  std::array<Var, corpus::kNumTags> tags;
  std::vector<Var> lemma_steps; // one (1 x V) distribution per target symbol
};

struct TaskTargets {
  corpus::TagSet tags;
  std::vector<int> lemma; // target symbols aligned with lemma_steps
};

struct LossBreakdown {
  Var total;
  std::array<double, kNumTasks> per_task{}; // unweighted mean cross-entropy
};

/// Sum over tasks of lambda_j times the mean cross-entropy over examples.
/// The lemma term of an example is the mean over its target symbols.
/// Absent outputs (null tag vars, empty lemma_steps) contribute nothing.
LossBreakdown joint_loss(Tape &t, std::span<const TaskOutputs> outputs,
                         std::span<const TaskTargets> targets,
                         const LossWeights &weights);

/// Sums a list of same-shaped vars.
Var sum_vars(std::span<const Var> xs);

} // namespace morphkit::nn

#endif
