#include "featsel/svm.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <stdexcept>

#include "featsel/rng.hpp"

namespace featsel {

namespace {

constexpr char kMagic[8] = {'F', 'S', 'E', 'L', 'S', 'V', 'M', '1'};
constexpr double kAlphaFloor = 1e-12;  // multipliers below this are treated as zero

void write_u32(std::ofstream& out, std::uint32_t v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(v));
}
void write_u64(std::ofstream& out, std::uint64_t v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(v));
}
void write_f64(std::ofstream& out, double v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(v));
}
std::uint32_t read_u32(std::ifstream& in) {
  std::uint32_t v = 0;
  in.read(reinterpret_cast<char*>(&v), sizeof(v));
  return v;
}
std::uint64_t read_u64(std::ifstream& in) {
  std::uint64_t v = 0;
  in.read(reinterpret_cast<char*>(&v), sizeof(v));
  return v;
}
double read_f64(std::ifstream& in) {
  double v = 0;
  in.read(reinterpret_cast<char*>(&v), sizeof(v));
  return v;
}

}  // namespace

double KernelSpec::resolve_gamma(std::size_t n_features) const {
  if (gamma_mode == GammaMode::Fixed) {
    if (gamma_value <= 0.0) throw std::invalid_argument("kernel: fixed gamma must be > 0");
    return gamma_value;
  }
  if (n_features == 0) throw std::invalid_argument("kernel: zero features");
  return 1.0 / static_cast<double>(n_features);
}

double rbf_kernel(std::span<const double> x, std::span<const double> z, double gamma) {
  if (x.size() != z.size()) throw std::invalid_argument("rbf_kernel: dimension mismatch");
  double d2 = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double d = x[i] - z[i];
    d2 += d * d;
  }
  return std::exp(-gamma * d2);
}

SvmModel train_smo(const Dataset& train, const KernelSpec& kernel, const SvmConfig& cfg) {
  train.validate();
  if (cfg.C <= 0.0 || cfg.tolerance <= 0.0 || cfg.max_passes < 1) {
    throw std::invalid_argument("train_smo: C, tolerance and max_passes must be positive");
  }
  const std::size_t n = train.size();
  if (train.count_label(ClassLabel::Calm) == 0 || train.count_label(ClassLabel::Stressful) == 0) {
    throw std::invalid_argument("train_smo: training set must contain both classes");
  }

  const double gamma = kernel.resolve_gamma(train.n_features());
  const double C = cfg.C;
  const double tol = cfg.tolerance;

  std::vector<double> y(n);
  for (std::size_t i = 0; i < n; ++i) {
    y[i] = train.records[i].label == ClassLabel::Stressful ? 1.0 : -1.0;
  }

  // Cached kernel matrix; the training sets here are small (hundreds).
  std::vector<double> K(n * n);
  for (std::size_t i = 0; i < n; ++i) {
    K[i * n + i] = 1.0;
    for (std::size_t j = i + 1; j < n; ++j) {
      const double k = rbf_kernel(train.records[i].features, train.records[j].features, gamma);
      K[i * n + j] = k;
      K[j * n + i] = k;
    }
  }

  std::vector<double> alphas(n, 0.0);
  double b = 0.0;

  auto decision = [&](std::size_t i) {
    double f = b;
    for (std::size_t j = 0; j < n; ++j) {
      if (alphas[j] > kAlphaFloor) f += alphas[j] * y[j] * K[j * n + i];
    }
    return f;
  };

  Rng rng(cfg.seed);
  const long max_sweeps = cfg.max_iterations < 0 ? static_cast<long>(100 * n)
                                                 : cfg.max_iterations;
  long sweeps = 0;
  int quiet_passes = 0;
  while (quiet_passes < cfg.max_passes && sweeps < max_sweeps) {
    std::size_t changed = 0;
    for (std::size_t i = 0; i < n; ++i) {
      const double Ei = decision(i) - y[i];
      const double ri = y[i] * Ei;  // margin - 1
      if (!((ri < -tol && alphas[i] < C) || (ri > tol && alphas[i] > 0.0))) continue;

      // A single random partner often clips to an empty step when most
      // multipliers sit at a bound; a few redraws keep the sweep moving.
      for (int attempt = 0; attempt < 10; ++attempt) {
        std::size_t j = rng.below(n - 1);
        if (j >= i) ++j;
        const double Ej = decision(j) - y[j];

        const double ai_old = alphas[i];
        const double aj_old = alphas[j];
        double L, H;
        if (y[i] != y[j]) {
          L = std::max(0.0, aj_old - ai_old);
          H = std::min(C, C + aj_old - ai_old);
        } else {
          L = std::max(0.0, ai_old + aj_old - C);
          H = std::min(C, ai_old + aj_old);
        }
        if (L >= H) continue;

        const double eta = 2.0 * K[i * n + j] - K[i * n + i] - K[j * n + j];
        if (eta >= 0.0) continue;

        double aj_new = aj_old - y[j] * (Ei - Ej) / eta;
        aj_new = std::clamp(aj_new, L, H);
        if (std::abs(aj_new - aj_old) < 1e-9) continue;

        const double ai_new = ai_old + y[i] * y[j] * (aj_old - aj_new);

        const double b1 = b - Ei - y[i] * (ai_new - ai_old) * K[i * n + i] -
                          y[j] * (aj_new - aj_old) * K[i * n + j];
        const double b2 = b - Ej - y[i] * (ai_new - ai_old) * K[i * n + j] -
                          y[j] * (aj_new - aj_old) * K[j * n + j];
        if (ai_new > 0.0 && ai_new < C) {
          b = b1;
        } else if (aj_new > 0.0 && aj_new < C) {
          b = b2;
        } else {
          b = 0.5 * (b1 + b2);
        }

        alphas[i] = ai_new;
        alphas[j] = aj_new;
        ++changed;
        break;
      }
    }
    quiet_passes = changed == 0 ? quiet_passes + 1 : 0;
    ++sweeps;
  }

  SvmModel model;
  model.gamma = gamma;
  model.C = C;
  model.tolerance = tol;
  model.kernel = kernel;
  model.bias = b;
  for (std::size_t i = 0; i < n; ++i) {
    if (alphas[i] > kAlphaFloor) {
      model.support_vectors.push_back(train.records[i].features);
      model.coefficients.push_back(std::clamp(alphas[i], 0.0, C) * y[i]);
      model.support_indices.push_back(i);
    }
  }
  model.converged = kkt_report(model, train).max_violation <= tol;
  return model;
}

double decision_value(const SvmModel& model, std::span<const double> x) {
  if (model.support_vectors.empty()) return model.bias;
  if (x.size() != model.n_features()) {
    throw std::invalid_argument("decision_value: dimension mismatch");
  }
  double f = model.bias;
  for (std::size_t s = 0; s < model.support_vectors.size(); ++s) {
    f += model.coefficients[s] * rbf_kernel(model.support_vectors[s], x, model.gamma);
  }
  return f;
}

ClassLabel predict(const SvmModel& model, std::span<const double> x) {
  return decision_value(model, x) >= 0.0 ? ClassLabel::Stressful : ClassLabel::Calm;
}

double evaluate(const SvmModel& model, const Dataset& ds) {
  ds.validate();
  std::size_t correct = 0;
  for (const auto& r : ds.records) {
    if (predict(model, r.features) == r.label) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(ds.size());
}

std::vector<double> full_alphas(const SvmModel& model, std::size_t train_size) {
  std::vector<double> alphas(train_size, 0.0);
  for (std::size_t s = 0; s < model.support_indices.size(); ++s) {
    const std::size_t i = model.support_indices[s];
    if (i >= train_size) throw std::invalid_argument("full_alphas: support index out of range");
    alphas[i] = std::abs(model.coefficients[s]);
  }
  return alphas;
}

KktReport kkt_report(const SvmModel& model, const Dataset& train) {
  train.validate();
  const std::size_t n = train.size();
  const std::vector<double> alphas = full_alphas(model, n);

  KktReport report;
  for (std::size_t i = 0; i < n; ++i) {
    const double yi = train.records[i].label == ClassLabel::Stressful ? 1.0 : -1.0;
    const double margin = yi * decision_value(model, train.records[i].features);
    const double a = alphas[i];
    double violation = 0.0;
    if (a <= kAlphaFloor) {
      ++report.n_inactive;
      violation = std::max(0.0, 1.0 - margin);
    } else if (a >= model.C - kAlphaFloor) {
      ++report.n_bound;
      violation = std::max(0.0, margin - 1.0);
    } else {
      ++report.n_margin;
      violation = std::abs(margin - 1.0);
    }
    report.max_violation = std::max(report.max_violation, violation);
  }
  return report;
}

double dual_objective(const Dataset& train, std::span<const double> alphas, double gamma) {
  const std::size_t n = train.size();
  if (alphas.size() != n) throw std::invalid_argument("dual_objective: size mismatch");
  std::vector<double> y(n);
  for (std::size_t i = 0; i < n; ++i) {
    y[i] = train.records[i].label == ClassLabel::Stressful ? 1.0 : -1.0;
  }
  double sum = 0.0;
  double quad = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sum += alphas[i];
    if (alphas[i] == 0.0) continue;
    for (std::size_t j = 0; j < n; ++j) {
      if (alphas[j] == 0.0) continue;
      quad += alphas[i] * alphas[j] * y[i] * y[j] *
              rbf_kernel(train.records[i].features, train.records[j].features, gamma);
    }
  }
  return sum - 0.5 * quad;
}

void save_svm(const SvmModel& model, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out.write(kMagic, sizeof(kMagic));
  const std::uint32_t n_sv = static_cast<std::uint32_t>(model.support_vectors.size());
  const std::uint32_t dim = static_cast<std::uint32_t>(model.n_features());
  write_u32(out, n_sv);
  write_u32(out, dim);
  write_f64(out, model.gamma);
  write_f64(out, model.C);
  write_f64(out, model.bias);
  write_f64(out, model.tolerance);
  out.put(model.converged ? 1 : 0);
  out.put(model.kernel.gamma_mode == KernelSpec::GammaMode::Auto ? 0 : 1);
  write_f64(out, model.kernel.gamma_value);
  write_u32(out, static_cast<std::uint32_t>(model.kernel.degree));
  for (double c : model.coefficients) write_f64(out, c);
  for (std::size_t idx : model.support_indices) write_u64(out, idx);
  for (const auto& sv : model.support_vectors) {
    out.write(reinterpret_cast<const char*>(sv.data()),
              static_cast<std::streamsize>(sv.size() * sizeof(double)));
  }
  if (model.standardization) {
    out.put(1);
    const auto& s = *model.standardization;
    write_u32(out, static_cast<std::uint32_t>(s.mean.size()));
    for (double v : s.mean) write_f64(out, v);
    for (double v : s.stddev) write_f64(out, v);
    for (bool c : s.constant_column) out.put(c ? 1 : 0);
  } else {
    out.put(0);
  }
  if (!out) throw std::runtime_error("write failed: " + path);
}

SvmModel load_svm(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open model file: " + path);
  char magic[8];
  in.read(magic, sizeof(magic));
  if (!in || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) {
    throw std::runtime_error(path + ": not a serialized SVM model (bad header)");
  }
  SvmModel model;
  const std::uint32_t n_sv = read_u32(in);
  const std::uint32_t dim = read_u32(in);
  model.gamma = read_f64(in);
  model.C = read_f64(in);
  model.bias = read_f64(in);
  model.tolerance = read_f64(in);
  model.converged = in.get() == 1;
  model.kernel.gamma_mode = in.get() == 0 ? KernelSpec::GammaMode::Auto
                                          : KernelSpec::GammaMode::Fixed;
  model.kernel.gamma_value = read_f64(in);
  model.kernel.degree = static_cast<int>(read_u32(in));
  model.coefficients.resize(n_sv);
  for (auto& c : model.coefficients) c = read_f64(in);
  model.support_indices.resize(n_sv);
  for (auto& idx : model.support_indices) idx = static_cast<std::size_t>(read_u64(in));
  model.support_vectors.assign(n_sv, std::vector<double>(dim));
  for (auto& sv : model.support_vectors) {
    in.read(reinterpret_cast<char*>(sv.data()),
            static_cast<std::streamsize>(sv.size() * sizeof(double)));
  }
  if (in.get() == 1) {
    Standardizer s;
    const std::uint32_t sdim = read_u32(in);
    s.mean.resize(sdim);
    s.stddev.resize(sdim);
    s.constant_column.resize(sdim);
    for (auto& v : s.mean) v = read_f64(in);
    for (auto& v : s.stddev) v = read_f64(in);
    for (std::uint32_t i = 0; i < sdim; ++i) s.constant_column[i] = in.get() == 1;
    model.standardization = std::move(s);
  }
  if (!in) throw std::runtime_error(path + ": truncated model file");
  return model;
}

}  // namespace featsel
