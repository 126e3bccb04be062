#pragma once

#include <span>
#include <string>
#include <vector>

#include "featsel/dataset.hpp"

namespace featsel {

// Feature-to-label Pearson correlations with the ascending-|r| ranking used
// to build ablation masks.
struct CorrelationReport {
  std::vector<std::string> feature_names;
  std::vector<double> r;               // aligned with feature_names
  std::vector<bool> constant_flag;     // r forced to 0 for constant columns
  std::vector<std::size_t> ranking;    // indices sorted by |r| ascending, ties by column order

  const std::string& name_at_rank(std::size_t k) const { return feature_names[ranking.at(k)]; }
};

/// Pearson correlation with population moments, clamped to [-1, 1].
/// Throws std::domain_error when either input is constant.
double pearson(std::span<const double> x, std::span<const double> y);

/// Correlates every feature column against the 0/1 label vector. Constant
/// columns are flagged and ranked as r = 0 instead of raising.
CorrelationReport rank_features(const Dataset& ds);

/// Mask j (1-based, j = 1..up_to_k) clears exactly the j lowest-|r| features.
std::vector<FeatureMask> ablation_masks(const CorrelationReport& report, std::size_t up_to_k);

/// Builds a report from externally supplied per-feature correlations
/// (ranking and flags recomputed). Used for reference fixtures.
CorrelationReport report_from_values(std::vector<std::string> names, std::vector<double> r);

}  // namespace featsel
