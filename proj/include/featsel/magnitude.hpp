#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "featsel/dataset.hpp"
#include "featsel/mlp.hpp"

namespace featsel {

// Input-importance scores computed from the absolute weights of a trained
// network: each layer's weights normalize into a column-stochastic
// contribution matrix, and the per-input share of each output is the chained
// product of those matrices from input to output.

struct ContributionMatrix {
  int fan_in = 0;
  int fan_out = 0;
  std::vector<double> p;                  // row-major fan_in x fan_out, columns sum to 1
  std::vector<bool> degenerate_column;    // all-zero weight column, set uniform and flagged

  double at(int i, int r) const { return p[static_cast<std::size_t>(i) * fan_out + r]; }
  bool any_degenerate() const;
};

struct InputMagnitudes {
  int n_inputs = 0;
  int n_outputs = 0;
  std::vector<double> q;       // row-major n_inputs x n_outputs, columns sum to 1
  std::vector<double> scores;  // per input: sum of each row of q
  bool any_degenerate = false;

  double q_at(int i, int k) const { return q[static_cast<std::size_t>(i) * n_outputs + k]; }
};

struct MagnitudeReport {
  std::vector<std::string> feature_names;
  std::vector<std::vector<double>> per_run_scores;  // [run][input]
  std::vector<double> mean_scores;
  std::vector<double> std_scores;                   // population std over runs
  std::vector<std::size_t> ranking;                 // ascending mean score, ties by column order
  int requested_runs = 0;
  int effective_runs = 0;                           // runs that trained without diverging

  const std::string& name_at_rank(std::size_t k) const { return feature_names[ranking.at(k)]; }
};

/// Column r: P_ir = |W_ir| / sum_p |W_pr|. All-zero columns become uniform
/// 1/fan_in and are flagged rather than raising.
ContributionMatrix contribution(const std::vector<double>& weights, int fan_in, int fan_out);
ContributionMatrix contribution(const MlpLayer& layer);

/// Chains the per-layer contribution matrices into Q (inputs x outputs);
/// score_i = sum_k Q_ik. Biases are excluded.
InputMagnitudes input_magnitudes(const MlpParams& params);

/// Trains n_runs networks with seeds derived from seed_stream, averages the
/// per-input scores and ranks ascending. Diverging runs are skipped and
/// reflected in effective_runs.
MagnitudeReport averaged_ranking(const Dataset& ds, const MlpArchitecture& arch,
                                 const TrainConfig& cfg, int n_runs, std::uint64_t seed_stream);

/// Mask j (1-based) clears the j lowest-scored inputs.
std::vector<FeatureMask> ablation_masks(const MagnitudeReport& report, std::size_t up_to_k);

/// Builds a report from externally supplied mean scores (single pseudo-run,
/// ranking recomputed). Used for reference fixtures.
MagnitudeReport report_from_scores(std::vector<std::string> names, std::vector<double> scores);

}  // namespace featsel
