#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "featsel/correlation.hpp"
#include "featsel/dataset.hpp"
#include "featsel/ga.hpp"
#include "featsel/magnitude.hpp"
#include "featsel/table.hpp"

namespace featsel {

/// Configuration mistakes (unknown technique, bad flags, missing files).
/// The CLI maps these to exit code 1; runtime failures map to 2.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// One experiment invocation. Unset numeric fields (-1) resolve to desk-scale
// defaults, or to the heavier profile under paper_scale.
struct ExperimentConfig {
  std::string technique;  // gen-data | baseline | correlate | magnitude | ga | report

  std::optional<std::string> csv_path;  // absent -> synthetic data
  SyntheticSpec synthetic;

  std::string model = "svm";            // ann | svm
  std::string strategy = "tournament";  // proportional | tournament | hof
  int population = -1;
  int generations = -1;
  int epochs = -1;
  int runs = -1;  // magnitude trainings
  int ablate = 4;
  double crossover_rate = 0.9;
  double mutation_rate = -1.0;  // -1 -> 1 / n_features
  int elitism = 1;
  double learning_rate = 0.0008;
  double weight_decay = -1.0;  // -1 -> technique default
  bool paper_scale = false;
  bool standardize = true;
  std::uint64_t master_seed = 1;
  std::string out_dir = "out";

  int resolved_epochs() const { return epochs > 0 ? epochs : (paper_scale ? 10000 : 500); }
  int resolved_population() const {
    return population > 0 ? population : (paper_scale ? 60 : 20);
  }
  int resolved_generations() const {
    return generations > 0 ? generations : (paper_scale ? 100 : 10);
  }
  int resolved_runs() const { return runs > 0 ? runs : (paper_scale ? 20 : 10); }
  // Magnitude rankings train with stronger decay: without it the surviving
  // weights stay dominated by their random initialization and the measure
  // ranks mostly noise.
  double resolved_weight_decay() const {
    if (weight_decay >= 0.0) return weight_decay;
    return technique == "magnitude" ? 0.01 : 0.0003;
  }
};

// Per-stage seeds, all derived from the master seed so a single flag
// reproduces an entire experiment.
struct StageSeeds {
  std::uint64_t outer_split = 0;
  std::uint64_t inner_split = 0;
  std::uint64_t mlp = 0;
  std::uint64_t svm = 0;
  std::uint64_t ga = 0;
  std::uint64_t magnitude = 0;

  static StageSeeds from_master(std::uint64_t master);
};

// Shared data preparation: outer 0.7/0.3 stratified split, z-scoring fitted
// on the outer train only, and an inner 0.7/0.3 split of the train partition
// for wrapper fitness. The test partition is only touched by final scoring.
struct Pipeline {
  Dataset train;
  Dataset test;
  Dataset fit;
  Dataset validation;
  Standardizer stats;
  bool standardized = false;
  StageSeeds seeds;
};

Dataset load_experiment_dataset(const ExperimentConfig& cfg);
Pipeline prepare_pipeline(const Dataset& full, bool standardize, std::uint64_t master_seed);

/// MLP hyperparameters for this experiment: epochs, learning rate and the
/// technique-resolved weight decay, with the given seed.
TrainConfig resolved_mlp_config(const ExperimentConfig& cfg, std::uint64_t seed);

struct ModelOutcome {
  double train_accuracy = 0.0;
  double test_accuracy = 0.0;
};

/// Trains the named model on train and scores both partitions. The MLP seed
/// and SVM seed come from the pipeline's stage seeds.
ModelOutcome fit_and_score(const Dataset& train, const Dataset& test, const std::string& model,
                           const ExperimentConfig& cfg, const StageSeeds& seeds);

ReportTable run_baseline(const Pipeline& pipeline, const ExperimentConfig& cfg);

struct AblationOutcome {
  ReportTable ranking_table;
  ReportTable ablation_table;
};

AblationOutcome run_correlation(const Pipeline& pipeline, const ExperimentConfig& cfg);

struct MagnitudeOutcome {
  MagnitudeReport report;
  ReportTable ranking_table;
  ReportTable runs_table;
  ReportTable ablation_table;
};

MagnitudeOutcome run_magnitude(const Pipeline& pipeline, const ExperimentConfig& cfg);

struct GaOutcome {
  GaResult result;
  double baseline_test_accuracy = 0.0;
  double best_test_accuracy = 0.0;
  ReportTable summary_table;
  ReportTable log_table;
};

GaOutcome run_ga(const Pipeline& pipeline, const ExperimentConfig& cfg);

/// Writes each table under out_dir as '<slug>.csv' / '<slug>.md' per format
/// ("csv", "md" or "both"). Returns the written paths. Byte-deterministic.
std::vector<std::string> emit_report(const std::vector<ReportTable>& tables,
                                     const std::string& format, const std::string& out_dir);

/// Runs one experiment end to end, writing artifacts plus a config echo with
/// every effective parameter into cfg.out_dir. Returns 0 on success, 1 on a
/// usage error, 2 on a runtime failure; errors are reported on stderr.
int run_experiment(const ExperimentConfig& cfg);

/// Same as run_experiment but throws (UsageError or std::runtime_error).
void run_experiment_or_throw(const ExperimentConfig& cfg);

}  // namespace featsel
