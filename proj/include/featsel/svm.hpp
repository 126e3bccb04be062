#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "featsel/dataset.hpp"

namespace featsel {

// Soft-margin RBF-kernel SVM trained with sequential minimal optimization.

struct KernelSpec {
  enum class Kind { Rbf };
  enum class GammaMode { Auto, Fixed };

  Kind kind = Kind::Rbf;
  GammaMode gamma_mode = GammaMode::Auto;
  double gamma_value = 0.0;  // used when gamma_mode == Fixed
  int degree = 3;            // carried for config fidelity, unused by the RBF kernel

  /// Auto resolves to 1 / n_active_features.
  double resolve_gamma(std::size_t n_features) const;
};

struct SvmConfig {
  double C = 1.0;
  double tolerance = 1e-3;
  int max_passes = 10;          // consecutive no-change sweeps before stopping
  long max_iterations = -1;     // sweep cap; -1 resolves to 100 * n
  std::uint64_t seed = 22;
};

struct SvmModel {
  std::vector<std::vector<double>> support_vectors;
  std::vector<double> coefficients;          // alpha_i * y_i per support vector
  std::vector<std::size_t> support_indices;  // positions in the training set
  double bias = 0.0;
  double gamma = 0.0;
  double C = 1.0;
  double tolerance = 1e-3;
  KernelSpec kernel;
  bool converged = false;
  std::optional<Standardizer> standardization;  // pipeline stats, recorded for serialization

  std::size_t n_features() const {
    return support_vectors.empty() ? 0 : support_vectors.front().size();
  }
};

struct KktReport {
  double max_violation = 0.0;
  std::size_t n_margin = 0;   // 0 < alpha < C
  std::size_t n_bound = 0;    // alpha == C
  std::size_t n_inactive = 0; // alpha == 0
};

/// exp(-gamma * ||x - z||^2)
double rbf_kernel(std::span<const double> x, std::span<const double> z, double gamma);

/// Simplified SMO with seeded random second-index selection. Runs until
/// cfg.max_passes consecutive sweeps change no multiplier, or the sweep cap;
/// model.converged reports whether the KKT conditions hold within tolerance.
SvmModel train_smo(const Dataset& train, const KernelSpec& kernel, const SvmConfig& cfg);

double decision_value(const SvmModel& model, std::span<const double> x);
/// sign of the decision value; exactly 0 resolves to Stressful (+1).
ClassLabel predict(const SvmModel& model, std::span<const double> x);
double evaluate(const SvmModel& model, const Dataset& ds);

/// Worst slack in the KKT optimality conditions over the training set:
/// alpha == 0 wants margin >= 1, interior alpha wants margin == 1,
/// alpha == C wants margin <= 1.
KktReport kkt_report(const SvmModel& model, const Dataset& train);

/// Dual objective sum(alpha) - 1/2 sum_ij alpha_i alpha_j y_i y_j K_ij for a
/// full multiplier vector over the training set.
double dual_objective(const Dataset& train, std::span<const double> alphas, double gamma);

/// Multipliers of a trained model scattered back over the training set
/// (alpha_i = 0 off the support set).
std::vector<double> full_alphas(const SvmModel& model, std::size_t train_size);

void save_svm(const SvmModel& model, const std::string& path);
SvmModel load_svm(const std::string& path);

}  // namespace featsel
