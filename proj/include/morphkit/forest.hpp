// SPDX-License-Identifier: Apache-2.0
/**
 * @file   forest.hpp
 * @brief  Random forest classifier with gini splits.
 */
#ifndef MORPHKIT_FOREST_HPP
#define MORPHKIT_FOREST_HPP

#include <cstdint>
#include <random>
#include <span>
#include <stdexcept>
#include <vector>

namespace morphkit::forest {

class ForestError : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

/// 1 - sum_c p_c^2. Throws on an empty label list.
double gini(std::span<const int> labels);

/// Row-major feature matrix with integer labels.
struct Matrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;

  double at(std::size_t r, std::size_t c) const { return data[r * cols + c]; }
  std::span<const double> row(std::size_t r) const {
    return {data.data() + r * cols, cols};
  }
};

enum class MaxFeatures { Sqrt, All };

struct RFConfig {
  int trees = 15;
  int min_samples_split = 2;
  int min_samples_leaf = 1;
  MaxFeatures max_features = MaxFeatures::Sqrt;
  bool bootstrap = true;

  void validate() const;
};

class DecisionTree {
public:
  /// `sample` lists training rows (duplicates allowed, as in a bootstrap).
  void fit(const Matrix &x, std::span<const int> y, std::span<const std::size_t> sample,
           int classes, const RFConfig &cfg, std::mt19937_64 &rng);
  std::span<const double> proba(std::span<const double> row) const;
  std::size_t node_count() const { return nodes_.size(); }
  std::size_t depth() const;

private:
  struct Node {
    int feature = -1; // -1 marks a leaf
    double threshold = 0.0;
    std::size_t left = 0, right = 0;
    std::size_t proba = 0; // offset into probs_ for leaves
  };
  std::size_t grow(const Matrix &x, std::span<const int> y, std::vector<std::size_t> &idx,
                   std::size_t lo, std::size_t hi, const RFConfig &cfg,
                   std::mt19937_64 &rng);

  std::vector<Node> nodes_;
  std::vector<double> probs_;
  int classes_ = 0;
};

class RandomForest {
public:
  /// Labels must lie in [0, classes). `classes` defaults to max(y)+1.
  static RandomForest fit(const Matrix &x, std::span<const int> y, const RFConfig &cfg,
                          std::uint64_t seed, int classes = 0);

  /// Mean of per-tree leaf distributions.
  std::vector<double> predict_proba(std::span<const double> row) const;
  /// Argmax of predict_proba; ties go to the lowest class id.
  int predict(std::span<const double> row) const;
  std::vector<int> predict(const Matrix &x) const;

  std::size_t size() const { return trees_.size(); }
  int classes() const { return classes_; }

private:
  std::vector<DecisionTree> trees_;
  int classes_ = 0;
};

} // namespace morphkit::forest

#endif
