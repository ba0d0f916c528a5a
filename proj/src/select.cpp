// SPDX-License-Identifier: Apache-2.0
#include "morphkit/select.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>
#include <numeric>
#include <random>
#include <sstream>
#include <thread>

namespace morphkit::select {

Dataset make_dataset(const std::vector<corpus::Sentence> &sentences,
                     const corpus::TagDomains &domains, corpus::Tag tag,
                     const lingfeat::PhonoTable &table) {
  Dataset d;
  d.feature_names = lingfeat::pool_slot_names();
  d.x.cols = lingfeat::pool_size();
  for (const auto &s : sentences) {
    for (std::size_t i = 0; i < s.tokens.size(); ++i) {
      const auto v = lingfeat::extract(s, i, table, lingfeat::Encoding::Raw);
      d.x.data.insert(d.x.data.end(), v.begin(), v.end());
      d.y.push_back(domains.lookup(tag, s.tokens[i].tags[static_cast<std::size_t>(tag)]));
      ++d.x.rows;
    }
  }
  return d;
}

forest::Matrix project(const forest::Matrix &x, const Bits &bits) {
  if (bits.size() != x.cols)
    throw SelectError("mask has " + std::to_string(bits.size()) + " bits for " +
                      std::to_string(x.cols) + " columns");
  forest::Matrix out;
  out.rows = x.rows;
  out.cols = static_cast<std::size_t>(std::count(bits.begin(), bits.end(), true));
  out.data.reserve(out.rows * out.cols);
  for (std::size_t r = 0; r < x.rows; ++r)
    for (std::size_t c = 0; c < x.cols; ++c)
      if (bits[c])
        out.data.push_back(x.at(r, c));
  return out;
}

double micro_f1(const std::vector<int> &pred, const std::vector<int> &gold) {
  if (pred.size() != gold.size() || pred.empty())
    throw SelectError("micro_f1: prediction/gold size mismatch or empty");
  double tp = 0, fp = 0, fn = 0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    if (pred[i] == gold[i]) {
      tp += 1;
    } else {
      fp += 1; // counted against the predicted class
      fn += 1; // and missed for the gold class
    }
  }
  return 2 * tp / (2 * tp + fp + fn);
}

double accuracy(const std::vector<int> &pred, const std::vector<int> &gold) {
  if (pred.size() != gold.size() || pred.empty())
    throw SelectError("accuracy: prediction/gold size mismatch or empty");
  std::size_t ok = 0;
  for (std::size_t i = 0; i < pred.size(); ++i)
    ok += pred[i] == gold[i];
  return static_cast<double>(ok) / static_cast<double>(pred.size());
}

namespace {

std::vector<int> fold_of(std::size_t n, int folds, std::uint64_t seed) {
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 rng(seed ^ 0x5eedf01dULL);
  std::shuffle(order.begin(), order.end(), rng);
  std::vector<int> f(n);
  for (std::size_t i = 0; i < n; ++i)
    f[order[i]] = static_cast<int>(i % static_cast<std::size_t>(folds));
  return f;
}

} // namespace

double cv_score(const Bits &bits, const Dataset &data, const FitnessConfig &cfg) {
  if (cfg.folds < 2)
    throw SelectError("cross validation needs at least 2 folds");
  if (data.x.rows < static_cast<std::size_t>(cfg.folds))
    throw SelectError("dataset has fewer rows than folds");
  const forest::Matrix x = project(data.x, bits);
  const std::vector<int> fold = fold_of(x.rows, cfg.folds, cfg.seed);
  const int classes = *std::max_element(data.y.begin(), data.y.end()) + 1;

  std::vector<int> pred(x.rows), gold(x.rows);
  for (int k = 0; k < cfg.folds; ++k) {
    forest::Matrix train;
    train.cols = x.cols;
    std::vector<int> ty;
    std::vector<std::size_t> test;
    for (std::size_t r = 0; r < x.rows; ++r) {
      if (fold[r] == k) {
        test.push_back(r);
      } else {
        auto row = x.row(r);
        train.data.insert(train.data.end(), row.begin(), row.end());
        ty.push_back(data.y[r]);
        ++train.rows;
      }
    }
    if (x.cols == 0) {
      std::vector<std::size_t> counts(classes, 0);
      for (int l : ty)
        ++counts[l];
      const int majority =
          static_cast<int>(std::max_element(counts.begin(), counts.end()) - counts.begin());
      for (std::size_t r : test)
        pred[r] = majority;
    } else {
      const auto rf = forest::RandomForest::fit(train, ty, cfg.rf,
                                                cfg.seed * 1000003ULL + k, classes);
      for (std::size_t r : test)
        pred[r] = rf.predict(x.row(r));
    }
  }
  gold = data.y;
  return cfg.metric == Metric::MicroF1 ? micro_f1(pred, gold) : accuracy(pred, gold);
}

double fitness(const Bits &bits, const Dataset &data, const FitnessConfig &cfg) {
  const double used = static_cast<double>(std::count(bits.begin(), bits.end(), true));
  return cv_score(bits, data, cfg) - cfg.alpha * used / static_cast<double>(bits.size());
}

void GAConfig::validate() const {
  if (generations < 1 || population < 1)
    throw SelectError("generations and population must be >= 1");
  if (crossover_prob < 0 || crossover_prob > 1 || mutation_prob < 0 || mutation_prob > 1)
    throw SelectError("GA probabilities must lie in [0, 1]");
  if (tournament < 1)
    throw SelectError("tournament size must be >= 1");
  if (elites < 0 || elites > population)
    throw SelectError("elite count must lie in [0, population]");
}

std::string bits_to_string(const Bits &b) {
  std::string s;
  for (bool v : b)
    s.push_back(v ? '1' : '0');
  return s;
}

namespace {

class FitnessCache {
public:
  FitnessCache(const FitnessFn &fn, int jobs) : fn_(fn), jobs_(std::max(1, jobs)) {}

  void evaluate(std::vector<Chromosome> &pop) {
    std::vector<const Bits *> todo;
    for (auto &c : pop)
      if (!cache_.count(c.bits) &&
          std::none_of(todo.begin(), todo.end(), [&](const Bits *b) { return *b == c.bits; }))
        todo.push_back(&c.bits);
    std::vector<double> values(todo.size());
    if (jobs_ == 1 || todo.size() < 2) {
      for (std::size_t i = 0; i < todo.size(); ++i)
        values[i] = fn_(*todo[i]);
    } else {
      std::size_t next = 0;
      std::mutex mu;
      std::exception_ptr err;
      auto worker = [&] {
        for (;;) {
          std::size_t i;
          {
            std::lock_guard lock(mu);
            if (next >= todo.size() || err)
              return;
            i = next++;
          }
          try {
            values[i] = fn_(*todo[i]);
          } catch (...) {
            std::lock_guard lock(mu);
            err = std::current_exception();
          }
        }
      };
      std::vector<std::thread> threads;
      const int n = std::min<int>(jobs_, static_cast<int>(todo.size()));
      for (int t = 0; t < n; ++t)
        threads.emplace_back(worker);
      for (auto &t : threads)
        t.join();
      if (err)
        std::rethrow_exception(err);
    }
    for (std::size_t i = 0; i < todo.size(); ++i) {
      if (!std::isfinite(values[i]))
        throw SelectError("fitness is not finite for mask " + bits_to_string(*todo[i]));
      cache_[*todo[i]] = values[i];
    }
    for (auto &c : pop)
      c.fitness = cache_.at(c.bits);
  }

  const std::map<Bits, double> &values() const { return cache_; }

private:
  const FitnessFn &fn_;
  int jobs_;
  std::map<Bits, double> cache_;
};

std::size_t tournament(const std::vector<Chromosome> &pop, int size, std::mt19937_64 &rng) {
  std::uniform_int_distribution<std::size_t> pick(0, pop.size() - 1);
  std::size_t best = pick(rng);
  for (int i = 1; i < size; ++i) {
    const std::size_t c = pick(rng);
    if (*pop[c].fitness > *pop[best].fitness)
      best = c;
  }
  return best;
}

std::size_t argbest(const std::vector<Chromosome> &pop) {
  std::size_t b = 0;
  for (std::size_t i = 1; i < pop.size(); ++i)
    if (*pop[i].fitness > *pop[b].fitness)
      b = i;
  return b;
}

} // namespace

GAResult ga_run(const FitnessFn &fitness_fn, std::size_t pool, const GAConfig &cfg,
                std::vector<Chromosome> initial, const ScoreFn &score_of) {
  cfg.validate();
  if (pool < 1)
    throw SelectError("feature pool must have at least one slot");
  std::mt19937_64 rng(cfg.seed);
  std::bernoulli_distribution coin(0.5), cross(cfg.crossover_prob),
      mutate(cfg.mutation_prob);

  std::vector<Chromosome> pop = std::move(initial);
  if (pop.empty()) {
    pop.resize(cfg.population);
    for (auto &c : pop) {
      c.bits.resize(pool);
      for (std::size_t i = 0; i < pool; ++i)
        c.bits[i] = coin(rng);
    }
  }
  for (const auto &c : pop)
    if (c.bits.size() != pool)
      throw SelectError("initial chromosome length differs from the pool size");

  FitnessCache cache(fitness_fn, cfg.jobs);
  GAResult result;
  Chromosome best_ever;

  auto record = [&](int g) {
    const std::size_t b = argbest(pop);
    if (!best_ever.fitness || *pop[b].fitness > *best_ever.fitness)
      best_ever = pop[b];
    GenerationStats s;
    s.generation = g;
    s.best = *pop[b].fitness;
    double sum = 0;
    for (const auto &c : pop)
      sum += *c.fitness;
    s.mean = sum / static_cast<double>(pop.size());
    s.best_ever = *best_ever.fitness;
    s.best_bits = best_ever.bits;
    s.evaluations = cache.values().size();
    result.trace.push_back(std::move(s));
  };

  cache.evaluate(pop);
  record(0);
  for (int g = 1; g <= cfg.generations; ++g) {
    std::vector<Chromosome> next;
    next.reserve(pop.size());
    // Elites pass through untouched.
    std::vector<std::size_t> order(pop.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      return *pop[a].fitness > *pop[b].fitness;
    });
    for (int e = 0; e < cfg.elites && e < static_cast<int>(pop.size()); ++e)
      next.push_back(pop[order[e]]);

    while (next.size() < pop.size()) {
      Bits a = pop[tournament(pop, cfg.tournament, rng)].bits;
      Bits b = pop[tournament(pop, cfg.tournament, rng)].bits;
      if (pool > 1 && cross(rng)) {
        std::uniform_int_distribution<std::size_t> cut(1, pool - 1);
        const std::size_t p = cut(rng);
        for (std::size_t i = p; i < pool; ++i) {
          const bool t = a[i];
          a[i] = b[i];
          b[i] = t;
        }
      }
      for (Bits *child : {&a, &b}) {
        for (std::size_t i = 0; i < pool; ++i)
          if (mutate(rng))
            (*child)[i] = !(*child)[i];
        if (next.size() < pop.size())
          next.push_back(Chromosome{std::move(*child), std::nullopt});
      }
    }
    pop = std::move(next);
    cache.evaluate(pop);
    record(g);
  }
  result.best = best_ever;

  // Pareto front over everything evaluated: fewer features, higher score.
  std::map<std::size_t, ParetoPoint> by_count;
  for (const auto &[bits, fit] : cache.values()) {
    const std::size_t n = static_cast<std::size_t>(std::count(bits.begin(), bits.end(), true));
    const double score = score_of ? score_of(bits, fit) : fit;
    auto it = by_count.find(n);
    if (it == by_count.end() || score > it->second.score)
      by_count[n] = ParetoPoint{n, score, bits};
  }
  double best_score = -1e300;
  for (auto &[n, p] : by_count) {
    if (p.score > best_score) {
      result.pareto.push_back(p);
      best_score = p.score;
    }
  }
  return result;
}

GAResult ga_run(const Dataset &data, const GAConfig &cfg, const FitnessConfig &fit) {
  const FitnessFn f = [&](const Bits &b) { return fitness(b, data, fit); };
  const ScoreFn unpenalized = [&](const Bits &b, double value) {
    const double used = static_cast<double>(std::count(b.begin(), b.end(), true));
    return value + fit.alpha * used / static_cast<double>(b.size());
  };
  return ga_run(f, data.x.cols, cfg, {}, unpenalized);
}

ExhaustiveResult exhaustive(const FitnessFn &fitness_fn, std::size_t pool) {
  if (pool < 1 || pool > 20)
    throw SelectError("exhaustive search supports pools of 1..20 slots");
  ExhaustiveResult r;
  const std::uint64_t total = 1ULL << pool;
  for (std::uint64_t m = 0; m < total; ++m) {
    Bits b(pool);
    for (std::size_t i = 0; i < pool; ++i)
      b[i] = (m >> i) & 1U;
    const double f = fitness_fn(b);
    if (r.evaluated == 0 || f > r.best_fitness) {
      r.best_fitness = f;
      r.best = b;
    }
    ++r.evaluated;
  }
  return r;
}

std::string trace_csv(const GAResult &r) {
  std::ostringstream os;
  os.precision(10);
  os << "generation,best,mean,best_ever,selected,evaluations,bits\n";
  for (const auto &s : r.trace)
    os << s.generation << ',' << s.best << ',' << s.mean << ',' << s.best_ever << ','
       << std::count(s.best_bits.begin(), s.best_bits.end(), true) << ','
       << s.evaluations << ',' << bits_to_string(s.best_bits) << '\n';
  return os.str();
}

std::string pareto_csv(const GAResult &r) {
  std::ostringstream os;
  os.precision(10);
  os << "count,score,bits\n";
  for (const auto &p : r.pareto)
    os << p.count << ',' << p.score << ',' << bits_to_string(p.bits) << '\n';
  return os.str();
}

} // namespace morphkit::select
