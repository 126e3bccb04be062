#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "featsel/dataset.hpp"

namespace featsel {

// Fully connected feedforward classifier: ReLU hidden layers, softmax output
// over the two classes, trained full-batch with Adam plus L2 weight decay.

struct MlpArchitecture {
  std::vector<int> layer_sizes;  // e.g. {10, 18, 16, 8, 2}

  void validate() const;
  int n_inputs() const { return layer_sizes.front(); }
  int n_outputs() const { return layer_sizes.back(); }
};

/// Default topology: n_inputs-18-16-8-2. The shallow variant or any other
/// hidden stack is constructible by passing explicit hidden sizes.
MlpArchitecture make_architecture(int n_inputs, const std::vector<int>& hidden = {18, 16, 8});

struct MlpLayer {
  int fan_in = 0;
  int fan_out = 0;
  std::vector<double> weights;  // row-major fan_in x fan_out
  std::vector<double> biases;   // fan_out

  double weight_at(int i, int j) const { return weights[static_cast<std::size_t>(i) * fan_out + j]; }
};

struct MlpParams {
  std::vector<MlpLayer> layers;

  int n_inputs() const { return layers.front().fan_in; }
  int n_outputs() const { return layers.back().fan_out; }
  std::size_t parameter_count() const;
};

struct TrainConfig {
  double learning_rate = 0.0008;
  double weight_decay = 0.0003;
  int epochs = 10000;
  std::uint64_t seed = 7;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

struct TrainReport {
  double final_train_accuracy = 0.0;
  double test_accuracy = 0.0;
  std::vector<double> loss_curve;  // objective per epoch, before that epoch's update
  int epochs_run = 0;
};

/// Raised when the training objective stops being finite.
struct TrainingDivergence : std::runtime_error {
  int epoch;
  explicit TrainingDivergence(int at)
      : std::runtime_error("training diverged at epoch " + std::to_string(at)), epoch(at) {}
};

/// Stable softmax (max-subtracted).
std::vector<double> softmax(std::span<const double> logits);

/// Uniform fan-in initialization: weights ~ U(-sqrt(6/fan_in), +sqrt(6/fan_in)),
/// biases zero. Deterministic per seed.
MlpParams init_mlp(const MlpArchitecture& arch, std::uint64_t seed);

/// Class-probability vector for one input.
std::vector<double> mlp_forward(const MlpParams& params, std::span<const double> x);

/// Full-batch Adam for cfg.epochs steps. The objective is mean cross-entropy
/// plus 0.5 * weight_decay * sum of squared weights (biases undecayed).
/// Throws TrainingDivergence if the objective becomes non-finite.
std::pair<MlpParams, TrainReport> train_mlp(const Dataset& train, const Dataset& test,
                                            const MlpArchitecture& arch, const TrainConfig& cfg);

/// Fraction of records whose argmax class matches the label; probability ties
/// resolve to class 0.
double evaluate(const MlpParams& params, const Dataset& ds);

/// Compares the analytic gradient of the training objective against central
/// finite differences (step h) on n_samples randomly chosen parameters,
/// skipping draws whose perturbation crosses a ReLU kink. Returns the maximum
/// relative error |g_a - g_n| / max(|g_a|, |g_n|, 1e-8).
double gradient_check(const MlpParams& params, const Dataset& batch, double weight_decay = 0.0003,
                      int n_samples = 50, std::uint64_t seed = 12345, double h = 1e-5);

// Versioned flat binary serialization; bit-exact round-trip for f64 on the
// same platform.
void save_mlp(const MlpParams& params, const std::string& path);
MlpParams load_mlp(const std::string& path);

}  // namespace featsel
