#include "featsel/correlation.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace featsel {

namespace {

std::vector<std::size_t> ascending_abs_ranking(const std::vector<double>& r) {
  std::vector<std::size_t> ranking(r.size());
  std::iota(ranking.begin(), ranking.end(), 0);
  // Ties broken by column (DNA) order via stable sort.
  std::stable_sort(ranking.begin(), ranking.end(), [&](std::size_t a, std::size_t b) {
    return std::abs(r[a]) < std::abs(r[b]);
  });
  return ranking;
}

}  // namespace

double pearson(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw std::invalid_argument("pearson: length mismatch");
  if (x.size() < 2) throw std::invalid_argument("pearson: need at least 2 samples");

  const double n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;

  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = x[i] - mx;
    const double dy = y[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx == 0.0 || syy == 0.0) {
    throw std::domain_error("pearson: correlation undefined for constant input");
  }
  const double r = sxy / std::sqrt(sxx * syy);
  return std::clamp(r, -1.0, 1.0);
}

CorrelationReport rank_features(const Dataset& ds) {
  ds.validate();
  CorrelationReport report;
  report.feature_names = ds.feature_names;
  report.r.resize(ds.n_features());
  report.constant_flag.assign(ds.n_features(), false);

  const std::vector<double> labels = ds.labels01();
  if (ds.count_label(ClassLabel::Calm) == 0 || ds.count_label(ClassLabel::Stressful) == 0) {
    throw std::invalid_argument("rank_features: labels are constant");
  }
  for (std::size_t j = 0; j < ds.n_features(); ++j) {
    const std::vector<double> col = ds.column(j);
    try {
      report.r[j] = pearson(col, labels);
    } catch (const std::domain_error&) {
      report.r[j] = 0.0;
      report.constant_flag[j] = true;
    }
  }
  report.ranking = ascending_abs_ranking(report.r);
  return report;
}

std::vector<FeatureMask> ablation_masks(const CorrelationReport& report, std::size_t up_to_k) {
  const std::size_t n = report.feature_names.size();
  if (up_to_k < 1 || up_to_k >= n) {
    throw std::invalid_argument("ablation_masks: up_to_k must lie in [1, n_features)");
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

CorrelationReport report_from_values(std::vector<std::string> names, std::vector<double> r) {
  if (names.size() != r.size()) {
    throw std::invalid_argument("report_from_values: size mismatch");
  }
  CorrelationReport report;
  report.feature_names = std::move(names);
  report.r = std::move(r);
  report.constant_flag.assign(report.r.size(), false);
  report.ranking = ascending_abs_ranking(report.r);
  return report;
}

}  // namespace featsel
