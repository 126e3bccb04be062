#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace featsel {

enum class ClassLabel : int { Calm = 0, Stressful = 1 };

inline int label_to_int(ClassLabel l) { return static_cast<int>(l); }
inline ClassLabel label_from_int(int v) {
  return v == 0 ? ClassLabel::Calm : ClassLabel::Stressful;
}

struct Record {
  std::vector<double> features;
  ClassLabel label = ClassLabel::Calm;
};

// Ordered bit vector over the feature columns. Bit i selects column i; the
// column order is the DNA order printed by to_string() (first character =
// first feature).
class FeatureMask {
 public:
  FeatureMask() = default;
  explicit FeatureMask(std::vector<bool> bits) : bits_(std::move(bits)) {}

  static FeatureMask full(std::size_t n) { return FeatureMask(std::vector<bool>(n, true)); }
  /// Parses a string of '0'/'1' characters, e.g. "0101001101".
  static FeatureMask from_string(std::string_view s);

  std::size_t size() const { return bits_.size(); }
  bool test(std::size_t i) const { return bits_.at(i); }
  void set(std::size_t i, bool v) { bits_.at(i) = v; }

  std::size_t count() const;
  bool any() const { return count() > 0; }
  bool none() const { return count() == 0; }

  std::string to_string() const;
  /// Mask read as an unsigned binary number, to_string() order, MSB first.
  /// Used for deterministic tie-breaking. Requires size() <= 64.
  std::uint64_t value() const;

  const std::vector<bool>& bits() const { return bits_; }

  friend bool operator==(const FeatureMask& a, const FeatureMask& b) = default;

 private:
  std::vector<bool> bits_;
};

struct Dataset {
  std::vector<std::string> feature_names;
  std::vector<Record> records;

  std::size_t size() const { return records.size(); }
  std::size_t n_features() const { return feature_names.size(); }

  std::vector<double> column(std::size_t j) const;
  /// Labels as 0/1 reals, record order.
  std::vector<double> labels01() const;
  std::size_t count_label(ClassLabel l) const;

  /// Checks the structural invariants (non-empty, consistent dimensions,
  /// finite values). Throws std::invalid_argument on violation.
  void validate() const;
};

struct SplitSpec {
  double train_fraction = 0.7;
  bool stratified = true;
  std::uint64_t seed = 0;
};

struct SplitResult {
  Dataset train;
  Dataset test;
  std::vector<std::size_t> train_indices;
  std::vector<std::size_t> test_indices;
};

struct Fold {
  std::vector<std::size_t> train_indices;
  std::vector<std::size_t> validation_indices;
};

// Stand-in generator for the private stress dataset: class-conditional
// Gaussians with equal covariance. The first n_informative columns carry the
// class signal (means +/- class_separation/2 per class); the remaining
// n_noise columns are class-independent N(0,1). Labels are balanced to within
// one record before label noise is applied.
struct SyntheticSpec {
  std::size_t n_records = 620;
  std::size_t n_informative = 4;
  std::size_t n_noise = 6;
  double class_separation = 1.0;
  double label_noise_rate = 0.0;
  std::uint64_t seed = 1;
};

// Per-feature z-score statistics fitted on a training set.
struct Standardizer {
  std::vector<double> mean;
  std::vector<double> stddev;          // population stddev; 1.0 for constant columns
  std::vector<bool> constant_column;   // flagged, values passed through unchanged

  bool any_constant() const;
};

struct StandardizeResult {
  Dataset train;
  std::vector<Dataset> others;
  Standardizer stats;
};

/// Canonical feature names: rgb_1..rgb_5,thermal_1..thermal_5 when n == 10,
/// x_1..x_n otherwise.
std::vector<std::string> default_feature_names(std::size_t n);

Dataset load_csv(const std::string& path);
void write_csv(const Dataset& ds, const std::string& path);
std::string to_csv_string(const Dataset& ds);

Dataset synthesize(const SyntheticSpec& spec);

SplitResult split(const Dataset& ds, const SplitSpec& spec);

std::vector<Fold> kfold(const Dataset& ds, std::size_t k, std::uint64_t seed);

Dataset apply_mask(const Dataset& ds, const FeatureMask& mask);

Standardizer fit_standardizer(const Dataset& train);
Dataset apply_standardizer(const Standardizer& stats, const Dataset& ds);
/// Fits on train, transforms train and every dataset in `others` with the
/// train statistics.
StandardizeResult standardize(const Dataset& train, const std::vector<Dataset>& others);

Dataset subset(const Dataset& ds, const std::vector<std::size_t>& indices);

}  // namespace featsel
