#include "featsel/magnitude.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "featsel/parallel.hpp"
#include "featsel/rng.hpp"

namespace featsel {

namespace {

std::vector<std::size_t> ascending_ranking(const std::vector<double>& scores) {
  std::vector<std::size_t> ranking(scores.size());
  std::iota(ranking.begin(), ranking.end(), 0);
  std::stable_sort(ranking.begin(), ranking.end(),
                   [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });
  return ranking;
}

}  // namespace

bool ContributionMatrix::any_degenerate() const {
  return std::find(degenerate_column.begin(), degenerate_column.end(), true) !=
         degenerate_column.end();
}

ContributionMatrix contribution(const std::vector<double>& weights, int fan_in, int fan_out) {
  if (fan_in <= 0 || fan_out <= 0 ||
      weights.size() != static_cast<std::size_t>(fan_in) * fan_out) {
    throw std::invalid_argument("contribution: weight shape mismatch");
  }
  for (double w : weights) {
    if (!std::isfinite(w)) throw std::invalid_argument("contribution: non-finite weight");
  }
  ContributionMatrix cm;
  cm.fan_in = fan_in;
  cm.fan_out = fan_out;
  cm.p.resize(weights.size());
  cm.degenerate_column.assign(fan_out, false);
  for (int r = 0; r < fan_out; ++r) {
    double total = 0.0;
    for (int i = 0; i < fan_in; ++i) {
      total += std::abs(weights[static_cast<std::size_t>(i) * fan_out + r]);
    }
    if (total == 0.0) {
      cm.degenerate_column[r] = true;
      const double uniform = 1.0 / static_cast<double>(fan_in);
      for (int i = 0; i < fan_in; ++i) cm.p[static_cast<std::size_t>(i) * fan_out + r] = uniform;
    } else {
      for (int i = 0; i < fan_in; ++i) {
        cm.p[static_cast<std::size_t>(i) * fan_out + r] =
            std::abs(weights[static_cast<std::size_t>(i) * fan_out + r]) / total;
      }
    }
  }
  return cm;
}

ContributionMatrix contribution(const MlpLayer& layer) {
  return contribution(layer.weights, layer.fan_in, layer.fan_out);
}

InputMagnitudes input_magnitudes(const MlpParams& params) {
  if (params.layers.empty()) throw std::invalid_argument("input_magnitudes: empty network");

  InputMagnitudes result;
  result.n_inputs = params.n_inputs();
  result.n_outputs = params.n_outputs();

  // Running product of column-stochastic matrices stays column-stochastic.
  ContributionMatrix acc = contribution(params.layers[0]);
  result.any_degenerate = acc.any_degenerate();
  std::vector<double> q = acc.p;
  int rows = acc.fan_in;
  int cols = acc.fan_out;
  for (std::size_t l = 1; l < params.layers.size(); ++l) {
    const ContributionMatrix next = contribution(params.layers[l]);
    result.any_degenerate = result.any_degenerate || next.any_degenerate();
    std::vector<double> prod(static_cast<std::size_t>(rows) * next.fan_out, 0.0);
    for (int i = 0; i < rows; ++i) {
      for (int r = 0; r < cols; ++r) {
        const double qir = q[static_cast<std::size_t>(i) * cols + r];
        if (qir == 0.0) continue;
        for (int k = 0; k < next.fan_out; ++k) {
          prod[static_cast<std::size_t>(i) * next.fan_out + k] += qir * next.at(r, k);
        }
      }
    }
    q = std::move(prod);
    cols = next.fan_out;
  }

  result.q = std::move(q);
  result.scores.assign(result.n_inputs, 0.0);
  for (int i = 0; i < result.n_inputs; ++i) {
    for (int k = 0; k < result.n_outputs; ++k) result.scores[i] += result.q_at(i, k);
  }
  return result;
}

MagnitudeReport averaged_ranking(const Dataset& ds, const MlpArchitecture& arch,
                                 const TrainConfig& cfg, int n_runs, std::uint64_t seed_stream) {
  if (n_runs < 1) throw std::invalid_argument("averaged_ranking: n_runs must be >= 1");
  ds.validate();
  arch.validate();

  MagnitudeReport report;
  report.feature_names = ds.feature_names;
  report.requested_runs = n_runs;

  struct RunOutcome {
    bool ok = false;
    std::vector<double> scores;
  };
  std::vector<RunOutcome> outcomes(static_cast<std::size_t>(n_runs));

  parallel_for(static_cast<std::size_t>(n_runs), [&](std::size_t run) {
    TrainConfig run_cfg = cfg;
    run_cfg.seed = derive_seed(seed_stream, run);
    try {
      auto [params, train_report] = train_mlp(ds, Dataset{ds.feature_names, {}}, arch, run_cfg);
      (void)train_report;
      outcomes[run].scores = input_magnitudes(params).scores;
      outcomes[run].ok = true;
    } catch (const TrainingDivergence&) {
      outcomes[run].ok = false;  // skipped, reflected in effective_runs
    }
  });

  const std::size_t dim = ds.n_features();
  report.mean_scores.assign(dim, 0.0);
  for (const auto& outcome : outcomes) {
    if (!outcome.ok) continue;
    report.per_run_scores.push_back(outcome.scores);
    ++report.effective_runs;
  }
  if (report.effective_runs == 0) {
    throw std::runtime_error("averaged_ranking: every training run diverged");
  }
  for (const auto& scores : report.per_run_scores) {
    for (std::size_t j = 0; j < dim; ++j) report.mean_scores[j] += scores[j];
  }
  for (std::size_t j = 0; j < dim; ++j) {
    report.mean_scores[j] /= static_cast<double>(report.effective_runs);
  }
  report.std_scores.assign(dim, 0.0);
  for (const auto& scores : report.per_run_scores) {
    for (std::size_t j = 0; j < dim; ++j) {
      const double d = scores[j] - report.mean_scores[j];
      report.std_scores[j] += d * d;
    }
  }
  for (std::size_t j = 0; j < dim; ++j) {
    report.std_scores[j] = std::sqrt(report.std_scores[j] /
                                     static_cast<double>(report.effective_runs));
  }
  report.ranking = ascending_ranking(report.mean_scores);
  return report;
}

std::vector<FeatureMask> ablation_masks(const MagnitudeReport& report, std::size_t up_to_k) {
  const std::size_t n = report.feature_names.size();
  if (up_to_k < 1 || up_to_k >= n) {
    throw std::invalid_argument("ablation_masks: up_to_k must lie in [1, n_inputs)");
  }
  std::vector<FeatureMask> masks;
  masks.reserve(up_to_k);
  FeatureMask mask = FeatureMask::full(n);
  for (std::size_t j = 0; j < up_to_k; ++j) {
    mask.set(report.ranking[j], false);
    masks.push_back(mask);
  }
  return masks;
}

MagnitudeReport report_from_scores(std::vector<std::string> names, std::vector<double> scores) {
  if (names.size() != scores.size()) {
    throw std::invalid_argument("report_from_scores: size mismatch");
  }
  MagnitudeReport report;
  report.feature_names = std::move(names);
  report.per_run_scores.push_back(scores);
  report.mean_scores = std::move(scores);
  report.std_scores.assign(report.mean_scores.size(), 0.0);
  report.ranking = ascending_ranking(report.mean_scores);
  report.requested_runs = 1;
  report.effective_runs = 1;
  return report;
}

}  // namespace featsel
