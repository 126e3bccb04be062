#include "featsel/dataset.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "featsel/rng.hpp"

namespace featsel {

namespace {

std::string trim(std::string_view s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::stringstream ss(line);
  while (std::getline(ss, cell, ',')) cells.push_back(trim(cell));
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

double parse_double(const std::string& cell, std::size_t line_no, const std::string& what) {
  double value = 0.0;
  const char* first = cell.data();
  const char* last = cell.data() + cell.size();
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc{} || ptr != last || cell.empty()) {
    throw std::runtime_error("row " + std::to_string(line_no) + ": non-numeric " + what +
                             " '" + cell + "'");
  }
  if (!std::isfinite(value)) {
    throw std::runtime_error("row " + std::to_string(line_no) + ": non-finite " + what);
  }
  return value;
}

ClassLabel parse_label(const std::string& cell, std::size_t line_no) {
  if (cell == "calm" || cell == "0") return ClassLabel::Calm;
  if (cell == "stressful" || cell == "1") return ClassLabel::Stressful;
  throw std::runtime_error("row " + std::to_string(line_no) + ": unknown label token '" +
                           cell + "' (expected calm, stressful, 0 or 1)");
}

// In-place Fisher-Yates with our own bounded draws, independent of
// std::shuffle's unspecified algorithm.
void shuffle_indices(std::vector<std::size_t>& v, Rng& rng) {
  for (std::size_t i = v.size(); i > 1; --i) {
    std::swap(v[i - 1], v[rng.below(i)]);
  }
}

std::vector<std::vector<std::size_t>> indices_by_class(const Dataset& ds) {
  std::vector<std::vector<std::size_t>> by_class(2);
  for (std::size_t i = 0; i < ds.size(); ++i) {
    by_class[static_cast<std::size_t>(label_to_int(ds.records[i].label))].push_back(i);
  }
  return by_class;
}

}  // namespace

FeatureMask FeatureMask::from_string(std::string_view s) {
  std::vector<bool> bits;
  bits.reserve(s.size());
  for (char c : s) {
    if (c != '0' && c != '1') {
      throw std::invalid_argument("mask string must contain only '0'/'1' characters");
    }
    bits.push_back(c == '1');
  }
  return FeatureMask(std::move(bits));
}

std::size_t FeatureMask::count() const {
  return static_cast<std::size_t>(std::count(bits_.begin(), bits_.end(), true));
}

std::string FeatureMask::to_string() const {
  std::string s;
  s.reserve(bits_.size());
  for (bool b : bits_) s.push_back(b ? '1' : '0');
  return s;
}

std::uint64_t FeatureMask::value() const {
  if (bits_.size() > 64) throw std::invalid_argument("mask value() supports up to 64 bits");
  std::uint64_t v = 0;
  for (bool b : bits_) v = (v << 1) | (b ? 1u : 0u);
  return v;
}

std::vector<double> Dataset::column(std::size_t j) const {
  std::vector<double> col;
  col.reserve(records.size());
  for (const auto& r : records) col.push_back(r.features.at(j));
  return col;
}

std::vector<double> Dataset::labels01() const {
  std::vector<double> out;
  out.reserve(records.size());
  for (const auto& r : records) out.push_back(static_cast<double>(label_to_int(r.label)));
  return out;
}

std::size_t Dataset::count_label(ClassLabel l) const {
  std::size_t n = 0;
  for (const auto& r : records)
    if (r.label == l) ++n;
  return n;
}

void Dataset::validate() const {
  if (records.empty()) throw std::invalid_argument("dataset is empty");
  const std::size_t dim = feature_names.size();
  for (std::size_t i = 0; i < records.size(); ++i) {
    if (records[i].features.size() != dim) {
      throw std::invalid_argument("record " + std::to_string(i) +
                                  " feature count does not match feature_names");
    }
    for (double v : records[i].features) {
      if (!std::isfinite(v)) {
        throw std::invalid_argument("record " + std::to_string(i) + " has a non-finite value");
      }
    }
  }
}

std::vector<std::string> default_feature_names(std::size_t n) {
  std::vector<std::string> names;
  names.reserve(n);
  if (n == 10) {
    for (int i = 1; i <= 5; ++i) names.push_back("rgb_" + std::to_string(i));
    for (int i = 1; i <= 5; ++i) names.push_back("thermal_" + std::to_string(i));
  } else {
    for (std::size_t i = 1; i <= n; ++i) names.push_back("x_" + std::to_string(i));
  }
  return names;
}

Dataset load_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open dataset file: " + path);

  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error(path + ": empty file");
  auto header = split_line(line);
  if (header.size() < 2 || header.back() != "label") {
    throw std::runtime_error(path + ": header must name features followed by 'label'");
  }
  Dataset ds;
  ds.feature_names.assign(header.begin(), header.end() - 1);
  const std::size_t dim = ds.feature_names.size();

  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty() && in.peek() == EOF) break;  // trailing newline
    auto cells = split_line(line);
    if (cells.size() != dim + 1) {
      throw std::runtime_error("row " + std::to_string(line_no) + ": expected " +
                               std::to_string(dim + 1) + " cells, got " +
                               std::to_string(cells.size()));
    }
    Record rec;
    rec.features.reserve(dim);
    for (std::size_t j = 0; j < dim; ++j) {
      rec.features.push_back(parse_double(cells[j], line_no, "feature cell"));
    }
    rec.label = parse_label(cells[dim], line_no);
    ds.records.push_back(std::move(rec));
  }
  ds.validate();
  return ds;
}

std::string to_csv_string(const Dataset& ds) {
  std::string out;
  for (std::size_t j = 0; j < ds.feature_names.size(); ++j) {
    out += ds.feature_names[j];
    out += ',';
  }
  out += "label\n";
  char buf[64];
  for (const auto& r : ds.records) {
    for (double v : r.features) {
      std::snprintf(buf, sizeof(buf), "%.17g", v);
      out += buf;
      out += ',';
    }
    out += (r.label == ClassLabel::Calm ? "calm" : "stressful");
    out += '\n';
  }
  return out;
}

void write_csv(const Dataset& ds, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out << to_csv_string(ds);
  if (!out) throw std::runtime_error("write failed: " + path);
}

Dataset synthesize(const SyntheticSpec& spec) {
  if (spec.n_records == 0) throw std::invalid_argument("synthesize: n_records must be positive");
  const std::size_t dim = spec.n_informative + spec.n_noise;
  if (dim == 0) throw std::invalid_argument("synthesize: zero features requested");
  if (spec.n_informative == 0 && spec.class_separation != 0.0) {
    throw std::invalid_argument(
        "synthesize: nonzero class_separation requires at least one informative feature");
  }
  if (spec.label_noise_rate < 0.0 || spec.label_noise_rate >= 1.0) {
    throw std::invalid_argument("synthesize: label_noise_rate must be in [0,1)");
  }

  Rng rng(spec.seed);
  Dataset ds;
  ds.feature_names = default_feature_names(dim);
  ds.records.reserve(spec.n_records);

  const double half_sep = spec.class_separation / 2.0;
  for (std::size_t i = 0; i < spec.n_records; ++i) {
    // Alternating true labels keep the classes balanced to within one record.
    const ClassLabel true_label = (i % 2 == 0) ? ClassLabel::Calm : ClassLabel::Stressful;
    const double sign = (true_label == ClassLabel::Stressful) ? +1.0 : -1.0;
    Record rec;
    rec.features.reserve(dim);
    for (std::size_t j = 0; j < spec.n_informative; ++j) {
      rec.features.push_back(rng.gaussian(sign * half_sep, 1.0));
    }
    for (std::size_t j = 0; j < spec.n_noise; ++j) {
      rec.features.push_back(rng.gaussian());
    }
    rec.label = true_label;
    if (spec.label_noise_rate > 0.0 && rng.bernoulli(spec.label_noise_rate)) {
      rec.label = (rec.label == ClassLabel::Calm) ? ClassLabel::Stressful : ClassLabel::Calm;
    }
    ds.records.push_back(std::move(rec));
  }
  return ds;
}

SplitResult split(const Dataset& ds, const SplitSpec& spec) {
  ds.validate();
  if (!(spec.train_fraction > 0.0 && spec.train_fraction < 1.0)) {
    throw std::invalid_argument("split: train_fraction must lie strictly inside (0,1)");
  }
  const std::size_t n = ds.size();
  const std::size_t target = static_cast<std::size_t>(
      std::llround(spec.train_fraction * static_cast<double>(n)));
  if (target == 0 || target == n) {
    throw std::invalid_argument("split: train_fraction leaves an empty partition");
  }

  Rng rng(spec.seed);
  std::vector<std::size_t> train_idx;

  if (spec.stratified) {
    auto by_class = indices_by_class(ds);
    for (const auto& cls : by_class) {
      if (cls.size() < 2) {
        throw std::invalid_argument("split: stratification needs at least 2 records per class");
      }
    }
    // Largest-remainder quotas: per-class counts within one of proportional
    // while the total matches round(train_fraction * n) exactly.
    std::vector<std::size_t> quota(by_class.size());
    std::vector<double> remainder(by_class.size());
    std::size_t assigned = 0;
    for (std::size_t c = 0; c < by_class.size(); ++c) {
      const double exact = spec.train_fraction * static_cast<double>(by_class[c].size());
      quota[c] = static_cast<std::size_t>(std::floor(exact));
      remainder[c] = exact - std::floor(exact);
      assigned += quota[c];
    }
    std::vector<std::size_t> order(by_class.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return remainder[a] > remainder[b]; });
    for (std::size_t k = 0; assigned < target && k < order.size(); ++k) {
      if (quota[order[k]] < by_class[order[k]].size()) {
        ++quota[order[k]];
        ++assigned;
      }
    }
    for (std::size_t c = 0; c < by_class.size(); ++c) {
      auto idx = by_class[c];
      shuffle_indices(idx, rng);
      train_idx.insert(train_idx.end(), idx.begin(), idx.begin() + quota[c]);
    }
  } else {
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), 0);
    shuffle_indices(idx, rng);
    train_idx.assign(idx.begin(), idx.begin() + target);
  }

  std::sort(train_idx.begin(), train_idx.end());
  std::vector<bool> in_train(n, false);
  for (std::size_t i : train_idx) in_train[i] = true;
  std::vector<std::size_t> test_idx;
  test_idx.reserve(n - train_idx.size());
  for (std::size_t i = 0; i < n; ++i) {
    if (!in_train[i]) test_idx.push_back(i);
  }

  SplitResult result;
  result.train = subset(ds, train_idx);
  result.test = subset(ds, test_idx);
  result.train_indices = std::move(train_idx);
  result.test_indices = std::move(test_idx);
  return result;
}

std::vector<Fold> kfold(const Dataset& ds, std::size_t k, std::uint64_t seed) {
  ds.validate();
  const std::size_t n = ds.size();
  if (k < 2) throw std::invalid_argument("kfold: k must be at least 2");
  if (k > n) throw std::invalid_argument("kfold: k exceeds the number of records");

  Rng rng(seed);
  auto by_class = indices_by_class(ds);
  std::vector<std::vector<std::size_t>> fold_members(k);
  // Global round-robin cursor carried across classes: fold sizes differ by at
  // most one overall while each class stays within one per fold.
  std::size_t cursor = 0;
  for (auto& cls : by_class) {
    shuffle_indices(cls, rng);
    for (std::size_t i : cls) {
      fold_members[cursor % k].push_back(i);
      ++cursor;
    }
  }

  std::vector<Fold> folds(k);
  for (std::size_t f = 0; f < k; ++f) {
    std::sort(fold_members[f].begin(), fold_members[f].end());
    folds[f].validation_indices = fold_members[f];
    for (std::size_t g = 0; g < k; ++g) {
      if (g == f) continue;
      folds[f].train_indices.insert(folds[f].train_indices.end(), fold_members[g].begin(),
                                    fold_members[g].end());
    }
    std::sort(folds[f].train_indices.begin(), folds[f].train_indices.end());
  }
  return folds;
}

Dataset apply_mask(const Dataset& ds, const FeatureMask& mask) {
  if (mask.size() != ds.n_features()) {
    throw std::invalid_argument("apply_mask: mask length does not match feature dimension");
  }
  if (mask.none()) throw std::invalid_argument("apply_mask: all-zero mask");

  Dataset out;
  for (std::size_t j = 0; j < mask.size(); ++j) {
    if (mask.test(j)) out.feature_names.push_back(ds.feature_names[j]);
  }
  out.records.reserve(ds.size());
  for (const auto& r : ds.records) {
    Record rec;
    rec.features.reserve(out.feature_names.size());
    for (std::size_t j = 0; j < mask.size(); ++j) {
      if (mask.test(j)) rec.features.push_back(r.features[j]);
    }
    rec.label = r.label;
    out.records.push_back(std::move(rec));
  }
  return out;
}

bool Standardizer::any_constant() const {
  return std::find(constant_column.begin(), constant_column.end(), true) !=
         constant_column.end();
}

Standardizer fit_standardizer(const Dataset& train) {
  train.validate();
  const std::size_t dim = train.n_features();
  const double n = static_cast<double>(train.size());
  Standardizer s;
  s.mean.assign(dim, 0.0);
  s.stddev.assign(dim, 1.0);
  s.constant_column.assign(dim, false);
  for (const auto& r : train.records) {
    for (std::size_t j = 0; j < dim; ++j) s.mean[j] += r.features[j];
  }
  for (std::size_t j = 0; j < dim; ++j) s.mean[j] /= n;
  std::vector<double> var(dim, 0.0);
  for (const auto& r : train.records) {
    for (std::size_t j = 0; j < dim; ++j) {
      const double d = r.features[j] - s.mean[j];
      var[j] += d * d;
    }
  }
  for (std::size_t j = 0; j < dim; ++j) {
    var[j] /= n;  // population variance
    if (var[j] < 1e-24) {
      s.constant_column[j] = true;
      s.mean[j] = 0.0;  // pass constant columns through unchanged
      s.stddev[j] = 1.0;
    } else {
      s.stddev[j] = std::sqrt(var[j]);
    }
  }
  return s;
}

Dataset apply_standardizer(const Standardizer& stats, const Dataset& ds) {
  if (stats.mean.size() != ds.n_features()) {
    throw std::invalid_argument("apply_standardizer: dimension mismatch");
  }
  Dataset out = ds;
  for (auto& r : out.records) {
    for (std::size_t j = 0; j < r.features.size(); ++j) {
      r.features[j] = (r.features[j] - stats.mean[j]) / stats.stddev[j];
    }
  }
  return out;
}

StandardizeResult standardize(const Dataset& train, const std::vector<Dataset>& others) {
  StandardizeResult result;
  result.stats = fit_standardizer(train);
  result.train = apply_standardizer(result.stats, train);
  result.others.reserve(others.size());
  for (const auto& ds : others) result.others.push_back(apply_standardizer(result.stats, ds));
  return result;
}

Dataset subset(const Dataset& ds, const std::vector<std::size_t>& indices) {
  Dataset out;
  out.feature_names = ds.feature_names;
  out.records.reserve(indices.size());
  for (std::size_t i : indices) out.records.push_back(ds.records.at(i));
  return out;
}

}  // namespace featsel
