// SPDX-License-Identifier: Apache-2.0
#include "morphkit/layers.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace morphkit::nn {

using ad::Shape;

Tensor glorot(Shape shape, std::size_t fan_in, std::size_t fan_out, Rng &rng) {
  const double a = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
  std::uniform_real_distribution<double> u(-a, a);
  Tensor t(std::move(shape));
  for (auto &v : t.data())
    v = u(rng);
  return t;
}

// ------------------------------------------------------------- Embedding

Embedding Embedding::create(ParamStore &store, const std::string &name,
                            const std::string &group, std::size_t vocab,
                            std::size_t dim, Rng &rng) {
  std::normal_distribution<double> n(0.0, 0.1);
  Tensor t(Shape{vocab, dim});
  for (auto &v : t.data())
    v = n(rng);
  return Embedding{&store.add(name, group, std::move(t))};
}

Var Embedding::forward(Tape &t, std::span<const int> ids) const {
  return ad::rows(t.param(*table), ids);
}

// ---------------------------------------------------- stochastic layers

Var gaussian_noise(Var x, double sigma, bool training, Rng &rng) {
  if (sigma < 0)
    throw std::invalid_argument("gaussian_noise: sigma must be >= 0");
  if (!training || sigma == 0.0)
    return x;
  std::normal_distribution<double> n(0.0, sigma);
  Tensor noise(x.shape());
  for (auto &v : noise.data())
    v = n(rng);
  return ad::add(x, x.tape->constant(std::move(noise)));
}

Var dropout(Var x, double rate, bool training, Rng &rng) {
  if (rate < 0 || rate >= 1)
    throw std::invalid_argument("dropout: rate must be in [0, 1)");
  if (!training || rate == 0.0)
    return x;
  std::bernoulli_distribution keep(1.0 - rate);
  Tensor mask(x.shape());
  const double s = 1.0 / (1.0 - rate);
  for (auto &v : mask.data())
    v = keep(rng) ? s : 0.0;
  return ad::mul(x, x.tape->constant(std::move(mask)));
}

// ----------------------------------------------------------- convolution

Conv1d Conv1d::create(ParamStore &store, const std::string &name,
                      const std::string &group, std::size_t width,
                      std::size_t in_dim, std::size_t maps, Rng &rng) {
  Conv1d c;
  c.width = width;
  c.weight = &store.add(name + ".H", group,
                        glorot(Shape{width * in_dim, maps}, width * in_dim, maps, rng));
  c.bias = &store.add(name + ".b", group, Tensor(Shape{maps}));
  return c;
}

Var Conv1d::forward(Tape &t, Var x) const {
  if (x.value().rank() != 2 || x.value().dim(0) < width)
    throw ad::ShapeError("conv: input " + ad::shape_str(x.shape()) +
                         " is shorter than filter width " + std::to_string(width));
  Var windows = ad::unfold(x, width);
  return ad::relu(ad::add(ad::matmul(windows, t.param(*weight)), t.param(*bias)));
}

Var pool(Var x, PoolMode mode) {
  const Shape &s = x.shape();
  if (s.size() != 2 || s[0] < 2)
    throw ad::ShapeError("pool: input " + ad::shape_str(s) +
                         " needs at least 2 positions");
  const std::size_t half = s[0] / 2, maps = s[1];
  Var even = s[0] % 2 ? ad::slice(x, 0, 0, 2 * half) : x;
  Var grouped = ad::reshape(even, Shape{half, 2, maps});
  return mode == PoolMode::Max ? ad::max(grouped, 1) : ad::mean(grouped, 1);
}

Var build_z(std::span<const Var> pooled) {
  if (pooled.empty())
    throw ad::ShapeError("build_z: no pooled inputs");
  const std::size_t rows = pooled[0].value().dim(0);
  for (const Var &p : pooled)
    if (p.value().rank() != 2 || p.value().dim(0) != rows)
      throw ad::ShapeError("build_z: pooled inputs " + ad::shape_str(pooled[0].shape()) +
                           " and " + ad::shape_str(p.shape()) + " differ in length");
  Var z = ad::concat(pooled, 1);
  return ad::reshape(z, Shape{1, z.value().numel()});
}

Var build_z(Var max4, Var avg4, Var max5, Var avg5) {
  const std::array<Var, 4> parts{max4, avg4, max5, avg5};
  return build_z(parts);
}

Var build_context_seq(std::span<const Var> z, int cw) {
  if (cw < 0 || z.size() != static_cast<std::size_t>(2 * cw + 1))
    throw ad::ShapeError("build_context_seq: expected " + std::to_string(2 * cw + 1) +
                         " word vectors, got " + std::to_string(z.size()));
  return ad::concat(z, 0);
}

// ------------------------------------------------------------------- GRU

GRUCell GRUCell::create(ParamStore &store, const std::string &name,
                        const std::string &group, std::size_t in,
                        std::size_t hidden, Rng &rng) {
  GRUCell c;
  c.w = &store.add(name + ".W", group, glorot(Shape{in, 3 * hidden}, in, hidden, rng));
  c.u_zr = &store.add(name + ".Uzr", group,
                      glorot(Shape{hidden, 2 * hidden}, hidden, hidden, rng));
  c.u_h = &store.add(name + ".Uh", group, glorot(Shape{hidden, hidden}, hidden, hidden, rng));
  c.b = &store.add(name + ".b", group, Tensor(Shape{3 * hidden}));
  return c;
}

Var GRUCell::project(Tape &t, Var xs) const {
  return ad::add(ad::matmul(xs, t.param(*w)), t.param(*b));
}

Var GRUCell::step_projected(Tape &t, Var xw, Var h) const {
  const std::size_t H = hidden_size();
  if (xw.value().rank() != 2 || xw.value().dim(1) != 3 * H || h.value().numel() != H)
    throw ad::ShapeError("gru_step: projected input " + ad::shape_str(xw.shape()) +
                         " and state " + ad::shape_str(h.shape()) +
                         " do not match hidden size " + std::to_string(H));
  Var hu = ad::matmul(h, t.param(*u_zr));
  Var z = ad::sigmoid(ad::add(ad::slice(xw, 1, 0, H), ad::slice(hu, 1, 0, H)));
  Var r = ad::sigmoid(ad::add(ad::slice(xw, 1, H, 2 * H), ad::slice(hu, 1, H, 2 * H)));
  Var cand = ad::tanh(ad::add(ad::slice(xw, 1, 2 * H, 3 * H),
                              ad::matmul(ad::mul(r, h), t.param(*u_h))));
  // h' = h + z * (cand - h)
  return ad::add(h, ad::mul(z, ad::sub(cand, h)));
}

Var GRUCell::step(Tape &t, Var x, Var h) const {
  if (x.value().rank() != 2 || x.value().dim(0) != 1 || x.value().dim(1) != input_size())
    throw ad::ShapeError("gru_step: input " + ad::shape_str(x.shape()) +
                         " does not match cell input size " +
                         std::to_string(input_size()));
  return step_projected(t, project(t, x), h);
}

Var GRUCell::zero_state(Tape &t) const {
  return t.constant(Tensor(Shape{1, hidden_size()}));
}

BiGRU BiGRU::create(ParamStore &store, const std::string &name,
                    const std::string &group, std::size_t in, std::size_t hidden,
                    Rng &rng) {
  BiGRU b;
  b.fwd = GRUCell::create(store, name + ".fwd", group, in, hidden, rng);
  b.bwd = GRUCell::create(store, name + ".bwd", group, in, hidden, rng);
  return b;
}

Var BiGRU::forward(Tape &t, Var seq, BiGruOutput mode) const {
  if (seq.value().rank() != 2 || seq.value().dim(0) == 0)
    throw ad::ShapeError("bigru: empty or malformed sequence " + ad::shape_str(seq.shape()));
  const std::size_t T = seq.value().dim(0);
  Var xf = fwd.project(t, seq);
  Var xb = bwd.project(t, seq);
  std::vector<Var> hf(T), hb(T);
  Var h = fwd.zero_state(t);
  for (std::size_t i = 0; i < T; ++i)
    h = hf[i] = fwd.step_projected(t, ad::slice(xf, 0, i, i + 1), h);
  h = bwd.zero_state(t);
  for (std::size_t i = T; i-- > 0;)
    h = hb[i] = bwd.step_projected(t, ad::slice(xb, 0, i, i + 1), h);
  if (mode == BiGruOutput::Last)
    return ad::concat({hf[T - 1], hb[0]}, 1);
  return ad::concat({ad::concat(hf, 0), ad::concat(hb, 0)}, 1);
}

// ----------------------------------------------------------------- dense

Dense Dense::create(ParamStore &store, const std::string &name,
                    const std::string &group, std::size_t in, std::size_t out,
                    Rng &rng) {
  Dense d;
  d.w = &store.add(name + ".W", group, glorot(Shape{in, out}, in, out, rng));
  d.b = &store.add(name + ".b", group, Tensor(Shape{out}));
  return d;
}

Var Dense::forward(Tape &t, Var x) const {
  return ad::add(ad::matmul(x, t.param(*w)), t.param(*b));
}

DenseHead DenseHead::create(ParamStore &store, const std::string &name,
                            const std::string &group, std::size_t rnn_size,
                            std::size_t feature_size, std::size_t size1,
                            std::size_t size2, std::size_t classes,
                            double dropout_rate, Rng &rng) {
  if (classes < 2)
    throw std::invalid_argument("dense head " + name + ": needs at least 2 classes");
  DenseHead h;
  h.hidden1 = Dense::create(store, name + ".d1", group, rnn_size + feature_size, size1, rng);
  h.hidden2 = Dense::create(store, name + ".d2", group, size1, size2, rng);
  h.out = Dense::create(store, name + ".out", group, size2, classes, rng);
  h.dropout_rate = dropout_rate;
  return h;
}

Var DenseHead::logits(Tape &t, Var rnn_out, std::optional<Var> features,
                      bool training, Rng &rng) const {
  Var x = features ? ad::concat({rnn_out, *features}, 1) : rnn_out;
  Var a = dropout(ad::relu(hidden1.forward(t, x)), dropout_rate, training, rng);
  Var b = dropout(ad::tanh(hidden2.forward(t, a)), dropout_rate, training, rng);
  return out.forward(t, b);
}

Var DenseHead::forward(Tape &t, Var rnn_out, std::optional<Var> features,
                       bool training, Rng &rng) const {
  return ad::softmax(logits(t, rnn_out, features, training, rng), 1);
}

// ------------------------------------------------------------- attention

LuongAttention LuongAttention::create(ParamStore &store, const std::string &name,
                                      const std::string &group, std::size_t dec,
                                      std::size_t enc, Rng &rng) {
  LuongAttention a;
  a.w_a = &store.add(name + ".Wa", group, glorot(Shape{dec, enc}, dec, enc, rng));
  a.log_scale = &store.add(name + ".log_scale", group, Tensor(Shape{1}));
  return a;
}

LuongAttention::Result LuongAttention::attend(Tape &t, Var h, Var enc) const {
  if (enc.value().rank() != 2 || enc.value().dim(0) == 0)
    throw ad::ShapeError("attention: encoder states " + ad::shape_str(enc.shape()) +
                         " are empty");
  Var proj = ad::matmul(h, t.param(*w_a));                    // 1 x enc
  Var scores = ad::matmul(proj, ad::transpose(enc));          // 1 x S
  scores = ad::mul(scores, ad::exp(t.param(*log_scale)));
  Var weights = ad::softmax(scores, 1);
  return Result{ad::matmul(weights, enc), weights};
}

// ------------------------------------------------------------------ loss

LossWeights LossWeights::heuristic(double tag_weight) {
  LossWeights w;
  for (std::size_t i = 0; i < corpus::kNumTags; ++i)
    w.lambda[i] = tag_weight;
  w.lemma() = 1.0 - tag_weight;
  return w;
}

LossWeights LossWeights::calibrated() {
  LossWeights w = heuristic(0.7);
  w.tag(corpus::Tag::G) = 0.9;
  w.tag(corpus::Tag::P) = 0.9;
  w.tag(corpus::Tag::C) = 0.95;
  return w;
}

LossWeights LossWeights::single(std::size_t task) {
  LossWeights w;
  w.lambda.at(task) = 1.0;
  return w;
}

void LossWeights::validate() const {
  for (std::size_t i = 0; i < kNumTasks; ++i)
    if (!(lambda[i] >= 0.0) || !std::isfinite(lambda[i]))
      throw std::invalid_argument("loss weight for " + std::string(kTaskNames[i]) +
                                  " must be a finite non-negative number");
}

std::string LossWeights::to_string() const {
  std::ostringstream os;
  for (std::size_t i = 0; i < kNumTasks; ++i)
    os << (i ? " " : "") << kTaskNames[i] << '=' << lambda[i];
  return os.str();
}

Var cross_entropy(Var probs, int target) {
  const auto k = static_cast<std::size_t>(target);
  if (target < 0 || k >= probs.value().numel())
    throw std::out_of_range("cross_entropy: target " + std::to_string(target) +
                            " outside distribution of size " +
                            std::to_string(probs.value().numel()));
  Var p = ad::slice(ad::reshape(probs, Shape{1, probs.value().numel()}), 1, k, k + 1);
  return ad::scale(ad::log(p, kLogClamp), -1.0);
}

Var sum_vars(std::span<const Var> xs) {
  if (xs.empty())
    throw std::invalid_argument("sum_vars: empty list");
  std::vector<Var> flat;
  flat.reserve(xs.size());
  for (const Var &x : xs)
    flat.push_back(ad::reshape(x, Shape{1, x.value().numel()}));
  return ad::sum_all(ad::concat(flat, 0));
}

LossBreakdown joint_loss(Tape &t, std::span<const TaskOutputs> outputs,
                         std::span<const TaskTargets> targets,
                         const LossWeights &weights) {
  if (outputs.size() != targets.size() || outputs.empty())
    throw std::invalid_argument("joint_loss: need matching, non-empty outputs and targets");
  weights.validate();
  const double n = static_cast<double>(outputs.size());
  LossBreakdown out;
  std::vector<Var> terms;
  for (std::size_t j = 0; j < corpus::kNumTags; ++j) {
    if (outputs[0].tags[j].tape == nullptr)
      continue;
    std::vector<Var> ce;
    for (std::size_t i = 0; i < outputs.size(); ++i)
      ce.push_back(cross_entropy(outputs[i].tags[j], targets[i].tags.ids[j]));
    Var task = ad::scale(sum_vars(ce), 1.0 / n);
    out.per_task[j] = task.value().item();
    terms.push_back(ad::scale(task, weights.lambda[j]));
  }
  std::vector<Var> lemma_terms;
  for (std::size_t i = 0; i < outputs.size(); ++i) {
    const auto &steps = outputs[i].lemma_steps;
    if (steps.empty())
      continue;
    if (steps.size() != targets[i].lemma.size())
      throw std::invalid_argument("joint_loss: lemma steps and targets differ in length");
    std::vector<Var> ce;
    for (std::size_t s = 0; s < steps.size(); ++s)
      ce.push_back(cross_entropy(steps[s], targets[i].lemma[s]));
    lemma_terms.push_back(ad::scale(sum_vars(ce), 1.0 / static_cast<double>(ce.size())));
  }
  if (!lemma_terms.empty()) {
    Var task = ad::scale(sum_vars(lemma_terms), 1.0 / static_cast<double>(lemma_terms.size()));
    out.per_task[kLemmaTask] = task.value().item();
    terms.push_back(ad::scale(task, weights.lemma()));
  }
  out.total = terms.empty() ? t.constant(Tensor::scalar(0.0)) : sum_vars(terms);
  return out;
}

} // namespace morphkit::nn
