// SPDX-License-Identifier: Apache-2.0
#include "morphkit/forest.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace morphkit::forest {

double gini(std::span<const int> labels) {
  if (labels.empty())
    throw ForestError("gini of an empty label set");
  std::vector<std::size_t> counts;
  for (int l : labels) {
    if (l < 0)
      throw ForestError("negative class label " + std::to_string(l));
    if (static_cast<std::size_t>(l) >= counts.size())
      counts.resize(l + 1, 0);
    ++counts[l];
  }
  const double n = static_cast<double>(labels.size());
  double sum = 0.0;
  for (std::size_t c : counts)
    sum += (c / n) * (c / n);
  return 1.0 - sum;
}

void RFConfig::validate() const {
  if (trees < 1)
    throw ForestError("forest needs at least one tree");
  if (min_samples_split < 2)
    throw ForestError("min_samples_split must be >= 2");
  if (min_samples_leaf < 1)
    throw ForestError("min_samples_leaf must be >= 1");
}

namespace {

double gini_from_counts(const std::vector<double> &counts, double n) {
  double sum = 0.0;
  for (double c : counts)
    sum += c * c;
  return 1.0 - sum / (n * n);
}

struct Split {
  int feature = -1;
  double threshold = 0.0;
  double impurity = 0.0; // weighted child impurity
  std::size_t left_size = 0;
};

} // namespace

std::size_t DecisionTree::grow(const Matrix &x, std::span<const int> y,
                               std::vector<std::size_t> &idx, std::size_t lo,
                               std::size_t hi, const RFConfig &cfg,
                               std::mt19937_64 &rng) {
  const std::size_t n = hi - lo;
  std::vector<double> counts(classes_, 0.0);
  for (std::size_t i = lo; i < hi; ++i)
    counts[y[idx[i]]] += 1.0;
  const double node_gini = gini_from_counts(counts, static_cast<double>(n));

  auto make_leaf = [&] {
    Node leaf;
    leaf.proba = probs_.size();
    for (double c : counts)
      probs_.push_back(c / static_cast<double>(n));
    nodes_.push_back(leaf);
    return nodes_.size() - 1;
  };

  if (n < static_cast<std::size_t>(cfg.min_samples_split) ||
      n < 2 * static_cast<std::size_t>(cfg.min_samples_leaf) || node_gini <= 0.0)
    return make_leaf();

  const std::size_t f = x.cols;
  const std::size_t want =
      cfg.max_features == MaxFeatures::All
          ? f
          : std::max<std::size_t>(1, static_cast<std::size_t>(
                                         std::ceil(std::sqrt(static_cast<double>(f)))));

  // Draw candidate features in random order; constant ones do not count
  // toward the budget.
  std::vector<std::size_t> order(f);
  std::iota(order.begin(), order.end(), 0);
  Split best;
  best.impurity = node_gini;
  std::size_t visited = 0;
  std::vector<std::pair<double, int>> vals(n);
  const std::size_t min_leaf = cfg.min_samples_leaf;
  for (std::size_t k = 0; k < f && visited < want; ++k) {
    std::uniform_int_distribution<std::size_t> pick(k, f - 1);
    std::swap(order[k], order[pick(rng)]);
    const std::size_t feat = order[k];
    for (std::size_t i = 0; i < n; ++i)
      vals[i] = {x.at(idx[lo + i], feat), y[idx[lo + i]]};
    std::sort(vals.begin(), vals.end());
    if (vals.front().first == vals.back().first)
      continue;
    ++visited;
    std::vector<double> left(classes_, 0.0), right = counts;
    for (std::size_t i = 0; i + 1 < n; ++i) {
      left[vals[i].second] += 1.0;
      right[vals[i].second] -= 1.0;
      if (vals[i].first == vals[i + 1].first)
        continue;
      const std::size_t nl = i + 1, nr = n - nl;
      if (nl < min_leaf || nr < min_leaf)
        continue;
      const double imp = (nl * gini_from_counts(left, static_cast<double>(nl)) +
                          nr * gini_from_counts(right, static_cast<double>(nr))) /
                         static_cast<double>(n);
      if (best.feature < 0 || imp < best.impurity) {
        best.feature = static_cast<int>(feat);
        best.threshold = 0.5 * (vals[i].first + vals[i + 1].first);
        if (best.threshold == vals[i + 1].first) // guard against rounding
          best.threshold = vals[i].first;
        best.impurity = imp;
        best.left_size = nl;
      }
    }
  }
  if (best.feature < 0)
    return make_leaf();

  auto mid = std::partition(idx.begin() + lo, idx.begin() + hi, [&](std::size_t r) {
    return x.at(r, best.feature) <= best.threshold;
  });
  const std::size_t split = static_cast<std::size_t>(mid - idx.begin());

  const std::size_t self = nodes_.size();
  nodes_.push_back(Node{});
  nodes_[self].feature = best.feature;
  nodes_[self].threshold = best.threshold;
  const std::size_t l = grow(x, y, idx, lo, split, cfg, rng);
  const std::size_t r = grow(x, y, idx, split, hi, cfg, rng);
  nodes_[self].left = l;
  nodes_[self].right = r;
  return self;
}

void DecisionTree::fit(const Matrix &x, std::span<const int> y,
                       std::span<const std::size_t> sample, int classes,
                       const RFConfig &cfg, std::mt19937_64 &rng) {
  if (sample.empty())
    throw ForestError("tree fit on an empty sample");
  nodes_.clear();
  probs_.clear();
  classes_ = classes;
  std::vector<std::size_t> idx(sample.begin(), sample.end());
  grow(x, y, idx, 0, idx.size(), cfg, rng);
}

std::span<const double> DecisionTree::proba(std::span<const double> row) const {
  std::size_t i = 0;
  while (nodes_[i].feature >= 0)
    i = row[nodes_[i].feature] <= nodes_[i].threshold ? nodes_[i].left : nodes_[i].right;
  return {probs_.data() + nodes_[i].proba, static_cast<std::size_t>(classes_)};
}

std::size_t DecisionTree::depth() const {
  std::vector<std::pair<std::size_t, std::size_t>> stack{{0, 0}};
  std::size_t d = 0;
  while (!stack.empty()) {
    auto [i, level] = stack.back();
    stack.pop_back();
    d = std::max(d, level);
    if (nodes_[i].feature >= 0) {
      stack.push_back({nodes_[i].left, level + 1});
      stack.push_back({nodes_[i].right, level + 1});
    }
  }
  return d;
}

RandomForest RandomForest::fit(const Matrix &x, std::span<const int> y,
                               const RFConfig &cfg, std::uint64_t seed, int classes) {
  cfg.validate();
  if (x.rows != y.size())
    throw ForestError("forest: " + std::to_string(x.rows) + " rows but " +
                      std::to_string(y.size()) + " labels");
  if (x.rows == 0)
    throw ForestError("forest: empty training set");
  int max_label = *std::max_element(y.begin(), y.end());
  if (*std::min_element(y.begin(), y.end()) < 0)
    throw ForestError("forest: negative class label");
  if (classes <= 0)
    classes = max_label + 1;
  else if (max_label >= classes)
    throw ForestError("forest: label " + std::to_string(max_label) +
                      " outside declared class count " + std::to_string(classes));

  RandomForest rf;
  rf.classes_ = classes;
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> draw(0, x.rows - 1);
  std::vector<std::size_t> sample(x.rows);
  for (int t = 0; t < cfg.trees; ++t) {
    if (cfg.bootstrap)
      for (auto &s : sample)
        s = draw(rng);
    else
      std::iota(sample.begin(), sample.end(), 0);
    DecisionTree tree;
    tree.fit(x, y, sample, classes, cfg, rng);
    rf.trees_.push_back(std::move(tree));
  }
  return rf;
}

std::vector<double> RandomForest::predict_proba(std::span<const double> row) const {
  std::vector<double> p(classes_, 0.0);
  for (const auto &t : trees_) {
    auto tp = t.proba(row);
    for (int c = 0; c < classes_; ++c)
      p[c] += tp[c];
  }
  for (double &v : p)
    v /= static_cast<double>(trees_.size());
  return p;
}

int RandomForest::predict(std::span<const double> row) const {
  const auto p = predict_proba(row);
  return static_cast<int>(std::max_element(p.begin(), p.end()) - p.begin());
}

std::vector<int> RandomForest::predict(const Matrix &x) const {
  std::vector<int> out(x.rows);
  for (std::size_t r = 0; r < x.rows; ++r)
    out[r] = predict(x.row(r));
  return out;
}

} // namespace morphkit::forest
