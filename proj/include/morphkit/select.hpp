// SPDX-License-Identifier: Apache-2.0
/**
 * @file   select.hpp
 * @brief  Genetic-algorithm feature selection with a random-forest fitness.
 *
 * fitness(F) = microF1_cv(F) - alpha * |F| / |U|
 */
#ifndef MORPHKIT_SELECT_HPP
#define MORPHKIT_SELECT_HPP

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "morphkit/corpus.hpp"
#include "morphkit/forest.hpp"
#include "morphkit/lingfeat.hpp"

namespace morphkit::select {

class SelectError : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

using Bits = std::vector<bool>;

struct Dataset {
  forest::Matrix x;
  std::vector<int> y;
  std::vector<std::string> feature_names;
};

/// One row per token: the full feature pool (raw categorical codes) and
/// the token's label for `tag`.
Dataset make_dataset(const std::vector<corpus::Sentence> &sentences,
                     const corpus::TagDomains &domains, corpus::Tag tag,
                     const lingfeat::PhonoTable &table);

/// Keeps only the columns whose bit is set.
forest::Matrix project(const forest::Matrix &x, const Bits &bits);

/// Micro-averaged F1 from pooled TP/FP/FN. For single-label predictions
/// this coincides with accuracy.
double micro_f1(const std::vector<int> &pred, const std::vector<int> &gold);
double accuracy(const std::vector<int> &pred, const std::vector<int> &gold);

enum class Metric { MicroF1, Accuracy };

struct FitnessConfig {
  forest::RFConfig rf;
  int folds = 3;
  double alpha = 0.05;
  Metric metric = Metric::MicroF1;
  std::uint64_t seed = 0;
};

/// Cross-validated score of a forest on the selected columns, without the
/// size penalty. An empty selection scores the training-fold majority class.
double cv_score(const Bits &bits, const Dataset &data, const FitnessConfig &cfg);
double fitness(const Bits &bits, const Dataset &data, const FitnessConfig &cfg);

struct GAConfig {
  int generations = 30;
  int population = 60;
  double crossover_prob = 0.7;
  double mutation_prob = 0.03;
  int tournament = 2;
  int elites = 1;
  std::uint64_t seed = 0;
  int jobs = 1;

  void validate() const;
};

struct Chromosome {
  Bits bits;
  std::optional<double> fitness;
};

struct GenerationStats {
  int generation = 0;
  double best = 0.0;      // best fitness in this population
  double mean = 0.0;
  double best_ever = 0.0;
  Bits best_bits;
  std::size_t evaluations = 0; // distinct fitness computations so far
};

struct ParetoPoint {
  std::size_t count = 0;
  double score = 0.0; // CV score before the size penalty
  Bits bits;
};

struct GAResult {
  Chromosome best;
  std::vector<GenerationStats> trace; // generation 0 is the initial population
  std::vector<ParetoPoint> pareto;    // non-dominated over all evaluated masks
};

using FitnessFn = std::function<double(const Bits &)>;
/// Maps (bits, fitness) to the score shown in the Pareto report.
using ScoreFn = std::function<double(const Bits &, double)>;

/// Runs the GA on an arbitrary fitness. Fitness values are cached by bits;
/// evaluations within a generation run on up to cfg.jobs threads.
GAResult ga_run(const FitnessFn &fitness, std::size_t pool, const GAConfig &cfg,
                std::vector<Chromosome> initial = {},
                const ScoreFn &score_of = nullptr);

GAResult ga_run(const Dataset &data, const GAConfig &cfg, const FitnessConfig &fit);

struct ExhaustiveResult {
  Bits best;
  double best_fitness = 0.0;
  std::size_t evaluated = 0;
};

/// Brute force over all 2^pool masks; pool must be <= 20.
ExhaustiveResult exhaustive(const FitnessFn &fitness, std::size_t pool);

/// generation,best,mean,best_ever,selected,bits
std::string trace_csv(const GAResult &r);
/// count,score,bits
std::string pareto_csv(const GAResult &r);

std::string bits_to_string(const Bits &b);

} // namespace morphkit::select

#endif
