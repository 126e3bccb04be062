#include "featsel/mlp.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>

#include "featsel/rng.hpp"

namespace featsel {

namespace {

constexpr char kMagic[8] = {'F', 'S', 'E', 'L', 'M', 'L', 'P', '1'};

struct Batch {
  std::size_t n = 0;
  int dim = 0;
  std::vector<double> x;   // n x dim
  std::vector<int> label;  // 0/1
};

Batch to_batch(const Dataset& ds) {
  Batch b;
  b.n = ds.size();
  b.dim = static_cast<int>(ds.n_features());
  b.x.reserve(b.n * static_cast<std::size_t>(b.dim));
  b.label.reserve(b.n);
  for (const auto& r : ds.records) {
    b.x.insert(b.x.end(), r.features.begin(), r.features.end());
    b.label.push_back(label_to_int(r.label));
  }
  return b;
}

// Activations and pre-activations for a whole batch, one buffer per layer.
struct Forward {
  std::vector<std::vector<double>> acts;  // acts[0] = input, acts[l+1] = layer l output
  std::vector<std::vector<double>> zs;    // zs[l] = pre-activation of layer l
};

// acts[last] holds softmax probabilities.
void forward_batch(const MlpParams& params, const std::vector<double>& x, std::size_t n,
                   Forward& fwd) {
  const std::size_t n_layers = params.layers.size();
  fwd.acts.resize(n_layers + 1);
  fwd.zs.resize(n_layers);
  fwd.acts[0] = x;

  for (std::size_t l = 0; l < n_layers; ++l) {
    const MlpLayer& layer = params.layers[l];
    const int in = layer.fan_in;
    const int out = layer.fan_out;
    auto& z = fwd.zs[l];
    z.assign(n * static_cast<std::size_t>(out), 0.0);
    const double* a = fwd.acts[l].data();
    for (std::size_t r = 0; r < n; ++r) {
      double* zrow = z.data() + r * out;
      for (int j = 0; j < out; ++j) zrow[j] = layer.biases[j];
      const double* arow = a + r * in;
      for (int i = 0; i < in; ++i) {
        const double ai = arow[i];
        if (ai == 0.0) continue;
        const double* wrow = layer.weights.data() + static_cast<std::size_t>(i) * out;
        for (int j = 0; j < out; ++j) zrow[j] += ai * wrow[j];
      }
    }
    auto& act = fwd.acts[l + 1];
    act = z;
    if (l + 1 < n_layers) {
      for (double& v : act) v = v > 0.0 ? v : 0.0;  // ReLU
    } else {
      for (std::size_t r = 0; r < n; ++r) {
        double* row = act.data() + r * out;
        double mx = row[0];
        for (int j = 1; j < out; ++j) mx = std::max(mx, row[j]);
        double sum = 0.0;
        for (int j = 0; j < out; ++j) {
          row[j] = std::exp(row[j] - mx);
          sum += row[j];
        }
        for (int j = 0; j < out; ++j) row[j] /= sum;
      }
    }
  }
}

// Mean cross-entropy from the output pre-activations (log-sum-exp form) plus
// the L2 weight penalty.
double objective(const MlpParams& params, const Forward& fwd, const std::vector<int>& labels,
                 double weight_decay) {
  const std::size_t n = labels.size();
  const auto& z = fwd.zs.back();
  const int out = params.layers.back().fan_out;
  double ce = 0.0;
  for (std::size_t r = 0; r < n; ++r) {
    const double* row = z.data() + r * out;
    double mx = row[0];
    for (int j = 1; j < out; ++j) mx = std::max(mx, row[j]);
    double sum = 0.0;
    for (int j = 0; j < out; ++j) sum += std::exp(row[j] - mx);
    ce -= row[labels[r]] - mx - std::log(sum);
  }
  ce /= static_cast<double>(n);
  double reg = 0.0;
  for (const auto& layer : params.layers) {
    for (double w : layer.weights) reg += w * w;
  }
  return ce + 0.5 * weight_decay * reg;
}

// Backprop of the objective. grads must be shaped like params.
void backward_batch(const MlpParams& params, const Forward& fwd, const std::vector<int>& labels,
                    double weight_decay, std::vector<MlpLayer>& grads) {
  const std::size_t n = labels.size();
  const std::size_t n_layers = params.layers.size();
  const double inv_n = 1.0 / static_cast<double>(n);

  // dZ at the output: (softmax - onehot) / n
  std::vector<double> delta = fwd.acts[n_layers];
  {
    const int out = params.layers.back().fan_out;
    for (std::size_t r = 0; r < n; ++r) {
      double* row = delta.data() + r * out;
      row[labels[r]] -= 1.0;
      for (int j = 0; j < out; ++j) row[j] *= inv_n;
    }
  }

  std::vector<double> prev_delta;
  for (std::size_t l = n_layers; l-- > 0;) {
    const MlpLayer& layer = params.layers[l];
    const int in = layer.fan_in;
    const int out = layer.fan_out;
    MlpLayer& g = grads[l];
    std::fill(g.weights.begin(), g.weights.end(), 0.0);
    std::fill(g.biases.begin(), g.biases.end(), 0.0);

    const double* a = fwd.acts[l].data();
    for (std::size_t r = 0; r < n; ++r) {
      const double* drow = delta.data() + r * out;
      const double* arow = a + r * in;
      for (int j = 0; j < out; ++j) g.biases[j] += drow[j];
      for (int i = 0; i < in; ++i) {
        const double ai = arow[i];
        if (ai == 0.0) continue;
        double* grow = g.weights.data() + static_cast<std::size_t>(i) * out;
        for (int j = 0; j < out; ++j) grow[j] += ai * drow[j];
      }
    }
    for (std::size_t k = 0; k < g.weights.size(); ++k) {
      g.weights[k] += weight_decay * layer.weights[k];
    }

    if (l == 0) break;
    // delta for the previous layer: (delta . W^T) gated by ReLU'(z)
    prev_delta.assign(n * static_cast<std::size_t>(in), 0.0);
    const auto& z_prev = fwd.zs[l - 1];
    for (std::size_t r = 0; r < n; ++r) {
      const double* drow = delta.data() + r * out;
      double* prow = prev_delta.data() + r * in;
      const double* zrow = z_prev.data() + r * in;
      for (int i = 0; i < in; ++i) {
        if (zrow[i] <= 0.0) continue;
        const double* wrow = layer.weights.data() + static_cast<std::size_t>(i) * out;
        double s = 0.0;
        for (int j = 0; j < out; ++j) s += drow[j] * wrow[j];
        prow[i] = s;
      }
    }
    delta.swap(prev_delta);
  }
}

std::vector<MlpLayer> zeros_like(const MlpParams& params) {
  std::vector<MlpLayer> out;
  out.reserve(params.layers.size());
  for (const auto& layer : params.layers) {
    MlpLayer g;
    g.fan_in = layer.fan_in;
    g.fan_out = layer.fan_out;
    g.weights.assign(layer.weights.size(), 0.0);
    g.biases.assign(layer.biases.size(), 0.0);
    out.push_back(std::move(g));
  }
  return out;
}

double accuracy_from_probs(const std::vector<double>& probs, const std::vector<int>& labels,
                           int out) {
  std::size_t correct = 0;
  for (std::size_t r = 0; r < labels.size(); ++r) {
    const double* row = probs.data() + r * out;
    const int pred = row[1] > row[0] ? 1 : 0;  // tie -> class 0
    if (pred == labels[r]) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(labels.size());
}

// ReLU on/off pattern across the batch; gradient checking rejects parameter
// perturbations that flip any of these.
std::vector<bool> relu_pattern(const MlpParams& params, const Forward& fwd) {
  std::vector<bool> pattern;
  for (std::size_t l = 0; l + 1 < params.layers.size(); ++l) {
    for (double z : fwd.zs[l]) pattern.push_back(z > 0.0);
  }
  return pattern;
}

void write_u32(std::ofstream& out, std::uint32_t v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(v));
}

std::uint32_t read_u32(std::ifstream& in) {
  std::uint32_t v = 0;
  in.read(reinterpret_cast<char*>(&v), sizeof(v));
  return v;
}

}  // namespace

void MlpArchitecture::validate() const {
  if (layer_sizes.size() < 2) {
    throw std::invalid_argument("architecture needs at least input and output layers");
  }
  for (int s : layer_sizes) {
    if (s <= 0) throw std::invalid_argument("architecture layer sizes must be positive");
  }
  if (layer_sizes.back() != 2) {
    throw std::invalid_argument("output layer must have exactly 2 units");
  }
}

MlpArchitecture make_architecture(int n_inputs, const std::vector<int>& hidden) {
  MlpArchitecture arch;
  arch.layer_sizes.push_back(n_inputs);
  for (int h : hidden) arch.layer_sizes.push_back(h);
  arch.layer_sizes.push_back(2);
  arch.validate();
  return arch;
}

std::size_t MlpParams::parameter_count() const {
  std::size_t n = 0;
  for (const auto& layer : layers) n += layer.weights.size() + layer.biases.size();
  return n;
}

std::vector<double> softmax(std::span<const double> logits) {
  if (logits.empty()) throw std::invalid_argument("softmax: empty input");
  double mx = logits[0];
  for (double v : logits) mx = std::max(mx, v);
  std::vector<double> out(logits.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    out[i] = std::exp(logits[i] - mx);
    sum += out[i];
  }
  for (double& v : out) v /= sum;
  return out;
}

MlpParams init_mlp(const MlpArchitecture& arch, std::uint64_t seed) {
  arch.validate();
  Rng rng(seed);
  MlpParams params;
  for (std::size_t l = 0; l + 1 < arch.layer_sizes.size(); ++l) {
    MlpLayer layer;
    layer.fan_in = arch.layer_sizes[l];
    layer.fan_out = arch.layer_sizes[l + 1];
    const double bound = std::sqrt(6.0 / static_cast<double>(layer.fan_in));
    layer.weights.resize(static_cast<std::size_t>(layer.fan_in) * layer.fan_out);
    for (double& w : layer.weights) w = rng.uniform(-bound, bound);
    layer.biases.assign(layer.fan_out, 0.0);
    params.layers.push_back(std::move(layer));
  }
  return params;
}

std::vector<double> mlp_forward(const MlpParams& params, std::span<const double> x) {
  if (static_cast<int>(x.size()) != params.n_inputs()) {
    throw std::invalid_argument("mlp_forward: input dimension mismatch");
  }
  Forward fwd;
  forward_batch(params, std::vector<double>(x.begin(), x.end()), 1, fwd);
  return fwd.acts.back();
}

std::pair<MlpParams, TrainReport> train_mlp(const Dataset& train, const Dataset& test,
                                            const MlpArchitecture& arch, const TrainConfig& cfg) {
  arch.validate();
  train.validate();
  if (static_cast<int>(train.n_features()) != arch.n_inputs()) {
    throw std::invalid_argument("train_mlp: dataset dimension does not match architecture input");
  }
  if (cfg.learning_rate <= 0.0) throw std::invalid_argument("train_mlp: learning_rate must be > 0");
  if (cfg.epochs < 1) throw std::invalid_argument("train_mlp: epochs must be >= 1");

  const Batch batch = to_batch(train);
  MlpParams params = init_mlp(arch, cfg.seed);

  std::vector<MlpLayer> grads = zeros_like(params);
  std::vector<MlpLayer> m = zeros_like(params);
  std::vector<MlpLayer> v = zeros_like(params);

  TrainReport report;
  report.loss_curve.reserve(static_cast<std::size_t>(cfg.epochs));

  Forward fwd;
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    forward_batch(params, batch.x, batch.n, fwd);
    const double loss = objective(params, fwd, batch.label, cfg.weight_decay);
    if (!std::isfinite(loss)) throw TrainingDivergence(epoch);
    report.loss_curve.push_back(loss);

    backward_batch(params, fwd, batch.label, cfg.weight_decay, grads);

    const double t = static_cast<double>(epoch + 1);
    const double bc1 = 1.0 - std::pow(cfg.beta1, t);
    const double bc2 = 1.0 - std::pow(cfg.beta2, t);
    for (std::size_t l = 0; l < params.layers.size(); ++l) {
      auto step = [&](std::vector<double>& w, std::vector<double>& gw, std::vector<double>& mw,
                      std::vector<double>& vw) {
        for (std::size_t k = 0; k < w.size(); ++k) {
          const double g = gw[k];
          mw[k] = cfg.beta1 * mw[k] + (1.0 - cfg.beta1) * g;
          vw[k] = cfg.beta2 * vw[k] + (1.0 - cfg.beta2) * g * g;
          const double mhat = mw[k] / bc1;
          const double vhat = vw[k] / bc2;
          w[k] -= cfg.learning_rate * mhat / (std::sqrt(vhat) + cfg.epsilon);
        }
      };
      step(params.layers[l].weights, grads[l].weights, m[l].weights, v[l].weights);
      step(params.layers[l].biases, grads[l].biases, m[l].biases, v[l].biases);
    }
  }
  report.epochs_run = cfg.epochs;

  forward_batch(params, batch.x, batch.n, fwd);
  report.final_train_accuracy = accuracy_from_probs(fwd.acts.back(), batch.label,
                                                    params.n_outputs());
  if (!test.records.empty()) {
    report.test_accuracy = evaluate(params, test);
  }
  return {std::move(params), std::move(report)};
}

double evaluate(const MlpParams& params, const Dataset& ds) {
  ds.validate();
  if (static_cast<int>(ds.n_features()) != params.n_inputs()) {
    throw std::invalid_argument("evaluate: dataset dimension mismatch");
  }
  const Batch batch = to_batch(ds);
  Forward fwd;
  forward_batch(params, batch.x, batch.n, fwd);
  return accuracy_from_probs(fwd.acts.back(), batch.label, params.n_outputs());
}

double gradient_check(const MlpParams& params, const Dataset& batch_ds, double weight_decay,
                      int n_samples, std::uint64_t seed, double h) {
  batch_ds.validate();
  const Batch batch = to_batch(batch_ds);

  Forward fwd;
  forward_batch(params, batch.x, batch.n, fwd);
  std::vector<MlpLayer> grads = zeros_like(params);
  backward_batch(params, fwd, batch.label, weight_decay, grads);

  // Flat view: (layer, is_bias, index)
  struct Slot {
    std::size_t layer;
    bool bias;
    std::size_t index;
  };
  std::vector<Slot> slots;
  for (std::size_t l = 0; l < params.layers.size(); ++l) {
    for (std::size_t k = 0; k < params.layers[l].weights.size(); ++k)
      slots.push_back({l, false, k});
    for (std::size_t k = 0; k < params.layers[l].biases.size(); ++k) slots.push_back({l, true, k});
  }

  MlpParams probe = params;
  auto param_ref = [&](const Slot& s) -> double& {
    return s.bias ? probe.layers[s.layer].biases[s.index] : probe.layers[s.layer].weights[s.index];
  };
  auto analytic = [&](const Slot& s) {
    return s.bias ? grads[s.layer].biases[s.index] : grads[s.layer].weights[s.index];
  };

  Rng rng(seed);
  Forward probe_fwd;
  double max_rel_error = 0.0;
  int accepted = 0;
  int attempts = 0;
  const int max_attempts = n_samples * 50;
  while (accepted < n_samples && attempts < max_attempts) {
    ++attempts;
    const Slot& slot = slots[rng.below(slots.size())];
    double& theta = param_ref(slot);
    const double saved = theta;

    theta = saved + h;
    forward_batch(probe, batch.x, batch.n, probe_fwd);
    const std::vector<bool> pattern_plus = relu_pattern(probe, probe_fwd);
    const double loss_plus = objective(probe, probe_fwd, batch.label, weight_decay);

    theta = saved - h;
    forward_batch(probe, batch.x, batch.n, probe_fwd);
    const std::vector<bool> pattern_minus = relu_pattern(probe, probe_fwd);
    const double loss_minus = objective(probe, probe_fwd, batch.label, weight_decay);

    theta = saved;
    if (pattern_plus != pattern_minus) continue;  // perturbation crosses a ReLU kink

    const double numeric = (loss_plus - loss_minus) / (2.0 * h);
    const double ga = analytic(slot);
    const double rel = std::abs(ga - numeric) / std::max({std::abs(ga), std::abs(numeric), 1e-8});
    max_rel_error = std::max(max_rel_error, rel);
    ++accepted;
  }
  if (accepted < n_samples) {
    throw std::runtime_error("gradient_check: could not sample enough kink-free parameters");
  }
  return max_rel_error;
}

void save_mlp(const MlpParams& params, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out.write(kMagic, sizeof(kMagic));
  write_u32(out, static_cast<std::uint32_t>(params.layers.size()));
  for (const auto& layer : params.layers) {
    write_u32(out, static_cast<std::uint32_t>(layer.fan_in));
    write_u32(out, static_cast<std::uint32_t>(layer.fan_out));
  }
  for (const auto& layer : params.layers) {
    out.write(reinterpret_cast<const char*>(layer.weights.data()),
              static_cast<std::streamsize>(layer.weights.size() * sizeof(double)));
    out.write(reinterpret_cast<const char*>(layer.biases.data()),
              static_cast<std::streamsize>(layer.biases.size() * sizeof(double)));
  }
  if (!out) throw std::runtime_error("write failed: " + path);
}

MlpParams load_mlp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open model file: " + path);
  char magic[8];
  in.read(magic, sizeof(magic));
  if (!in || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) {
    throw std::runtime_error(path + ": not a serialized MLP model (bad header)");
  }
  const std::uint32_t n_layers = read_u32(in);
  if (!in || n_layers == 0 || n_layers > 1024) {
    throw std::runtime_error(path + ": corrupt layer count");
  }
  MlpParams params;
  for (std::uint32_t l = 0; l < n_layers; ++l) {
    MlpLayer layer;
    layer.fan_in = static_cast<int>(read_u32(in));
    layer.fan_out = static_cast<int>(read_u32(in));
    if (!in || layer.fan_in <= 0 || layer.fan_out <= 0) {
      throw std::runtime_error(path + ": corrupt layer shape");
    }
    layer.weights.resize(static_cast<std::size_t>(layer.fan_in) * layer.fan_out);
    layer.biases.resize(layer.fan_out);
    params.layers.push_back(std::move(layer));
  }
  for (auto& layer : params.layers) {
    in.read(reinterpret_cast<char*>(layer.weights.data()),
            static_cast<std::streamsize>(layer.weights.size() * sizeof(double)));
    in.read(reinterpret_cast<char*>(layer.biases.data()),
            static_cast<std::streamsize>(layer.biases.size() * sizeof(double)));
  }
  if (!in) throw std::runtime_error(path + ": truncated model file");
  return params;
}

}  // namespace featsel
