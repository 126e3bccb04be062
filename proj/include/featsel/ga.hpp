#pragma once

#include <atomic>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <unordered_map>
#include <utility>
#include <variant>
#include <vector>

#include "featsel/dataset.hpp"
#include "featsel/mlp.hpp"
#include "featsel/rng.hpp"
#include "featsel/svm.hpp"

namespace featsel {

// Genetic algorithm over feature masks. Fitness is the validation accuracy of
// a classifier trained on the masked features; the train/validation split and
// every model seed are fixed up front, so fitness is a pure function of the
// mask and results are memoizable and schedule-independent.

struct Chromosome {
  FeatureMask mask;
  std::optional<double> fitness;
};

struct ProportionalSelection {};             // one parent proportional, partner uniform
struct TournamentSelection { int nts = -1; };  // -1 resolves to round(0.6 * population)
struct HallOfFameSelection {};               // one parent from the archive, partner proportional

using SelectionStrategy =
    std::variant<ProportionalSelection, TournamentSelection, HallOfFameSelection>;

struct GaConfig {
  int population_size = 20;
  int generations = 10;
  double crossover_rate = 0.9;
  double mutation_rate = -1.0;  // -1 resolves to 1 / n_features
  int elitism_count = 1;
  std::uint64_t master_seed = 1;
  SelectionStrategy strategy = TournamentSelection{};
  int n_features = 10;

  void validate() const;
  int resolved_nts() const;
  double resolved_mutation_rate() const;
};

struct GenerationStats {
  FeatureMask best_mask;
  double best_fitness = 0.0;
  double mean_fitness = 0.0;
  std::size_t evaluations = 0;  // evaluator invocations this generation (cache misses)
};

struct EvolutionLog {
  std::vector<GenerationStats> generations;
  FeatureMask best_mask;
  double best_fitness = 0.0;
  std::optional<double> final_test_accuracy;  // filled by the experiment layer
  std::size_t total_evaluations = 0;
  std::size_t repair_count = 0;  // all-zero offspring replaced by resampled masks
};

using FitnessFn = std::function<double(const FeatureMask&)>;

struct GaResult {
  Chromosome best;
  EvolutionLog log;
  std::vector<Chromosome> hall_of_fame;  // per-generation bests, duplicates kept
};

/// Caches fitness by mask; invocations() counts actual evaluator calls.
/// Not thread-safe; evolve() batches cache misses instead of sharing it.
class MemoizedFitness {
 public:
  explicit MemoizedFitness(FitnessFn fn) : fn_(std::move(fn)) {}

  double operator()(const FeatureMask& mask);
  /// Stores an externally computed value (counts as one invocation).
  void insert(const FeatureMask& mask, double value);
  std::size_t invocations() const { return invocations_; }
  bool contains(const FeatureMask& mask) const { return cache_.count(mask.to_string()) > 0; }

 private:
  FitnessFn fn_;
  std::unordered_map<std::string, double> cache_;
  std::size_t invocations_ = 0;
};

/// Uniform random mask with at least one bit set.
FeatureMask random_mask(std::size_t n_features, Rng& rng);

/// population_size random masks, each drawn from its own derived seed;
/// all-zero masks are resampled.
std::vector<Chromosome> init_population(const GaConfig& cfg);

/// Roulette wheel over scaled fitness max(f, 1e-6). Returns a population index.
std::size_t select_proportional(const std::vector<Chromosome>& pop, Rng& rng);

/// Best of nts distinct chromosomes sampled without replacement; fitness ties
/// break toward the lower mask value.
std::size_t select_tournament(const std::vector<Chromosome>& pop, int nts, Rng& rng);

/// parent_a uniform over the hall of fame, parent_b proportional over pop.
std::pair<Chromosome, std::size_t> select_hall_of_fame(const std::vector<Chromosome>& hof,
                                                       const std::vector<Chromosome>& pop,
                                                       Rng& rng);

/// Deterministic single-point crossover at the given cut in [1, n-1].
std::pair<FeatureMask, FeatureMask> single_point_crossover(const FeatureMask& a,
                                                           const FeatureMask& b, std::size_t cut);

/// With probability rate, single-point crossover at a random cut; otherwise
/// children equal parents. All-zero children are replaced by resampled random
/// masks and counted in repair_count.
std::pair<FeatureMask, FeatureMask> crossover(const FeatureMask& a, const FeatureMask& b,
                                              double rate, Rng& rng,
                                              std::size_t* repair_count = nullptr);

/// Independent per-bit flips; an all-zero result is resampled (counted).
FeatureMask mutate(const FeatureMask& mask, double rate, Rng& rng,
                   std::size_t* repair_count = nullptr);

/// Runs the full loop: evaluate -> log -> select/crossover/mutate with
/// elitism. Deterministic per cfg.master_seed; fitness evaluations within a
/// generation may run on worker threads.
GaResult evolve(const GaConfig& cfg, const FitnessFn& fitness);

// Model-backed evaluators. The datasets are captured once; the same model
// seed and split serve every chromosome.
struct EvaluatorStats {
  std::atomic<std::size_t> divergences{0};
};

FitnessFn make_mlp_evaluator(Dataset fit, Dataset validation, std::vector<int> hidden,
                             TrainConfig cfg, std::shared_ptr<EvaluatorStats> stats = nullptr);

FitnessFn make_svm_evaluator(Dataset fit, Dataset validation, KernelSpec kernel, SvmConfig cfg,
                             std::shared_ptr<EvaluatorStats> stats = nullptr);

}  // namespace featsel
