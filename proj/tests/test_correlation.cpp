#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <vector>

#include "featsel/correlation.hpp"
#include "featsel/dataset.hpp"
#include "featsel/rng.hpp"

using namespace featsel;

namespace {

// Explicit two-pass formula, kept deliberately separate from the
// implementation: sum((x-mx)(y-my)) / (n * sigma_x * sigma_y).
double pearson_bruteforce(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sx = 0.0, sy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += (x[i] - mx) * (x[i] - mx);
    sy += (y[i] - my) * (y[i] - my);
  }
  const double sigma_x = std::sqrt(sx / n);
  const double sigma_y = std::sqrt(sy / n);
  double cov = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) cov += (x[i] - mx) * (y[i] - my);
  cov /= n;
  return cov / (sigma_x * sigma_y);
}

std::vector<double> random_vector(Rng& rng, std::size_t n) {
  std::vector<double> v(n);
  for (double& x : v) x = rng.gaussian(0.0, 2.0);
  return v;
}

// DNA order: rgb_1..rgb_5, thermal_1..thermal_5.
const std::vector<std::string> kDnaNames = {"rgb_1",     "rgb_2",     "rgb_3",     "rgb_4",
                                            "rgb_5",     "thermal_1", "thermal_2", "thermal_3",
                                            "thermal_4", "thermal_5"};
// Reference feature-label correlations used as a ranking fixture.
const std::vector<double> kReferenceR = {0.0054, 0.0055, -0.0093, 0.0039,  0.023,
                                         -0.0040, 0.015, 0.010,   -0.0015, 0.0025};

}  // namespace

TEST_CASE("pearson exact values") {
  const std::vector<double> x = {1.0, 2.0, 3.0, 4.0};
  CHECK(pearson(x, x) == doctest::Approx(1.0).epsilon(1e-12));
  std::vector<double> neg = x;
  for (double& v : neg) v = -v;
  CHECK(pearson(x, neg) == doctest::Approx(-1.0).epsilon(1e-12));
  CHECK(pearson(x, std::vector<double>{1.0, 3.0, 2.0, 4.0}) == doctest::Approx(0.8));
}

TEST_CASE("pearson matches the brute-force oracle on random vectors") {
  Rng rng(2024);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 2 + rng.below(200);
    const std::vector<double> x = random_vector(rng, n);
    std::vector<double> y = random_vector(rng, n);
    const double r = pearson(x, y);
    CHECK(std::abs(r - pearson_bruteforce(x, y)) < 1e-12);
    CHECK(std::abs(r) <= 1.0);
    CHECK(std::abs(pearson(y, x) - r) < 1e-12);  // symmetry
  }
}

TEST_CASE("pearson is affine-invariant up to the sign of the scale") {
  Rng rng(7);
  const std::vector<double> x = random_vector(rng, 80);
  const std::vector<double> y = random_vector(rng, 80);
  const double base = pearson(x, y);
  for (double a : {2.5, -0.75, 1e-3}) {
    std::vector<double> tx(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) tx[i] = a * x[i] + 4.2;
    const double sign = a > 0 ? 1.0 : -1.0;
    CHECK(pearson(tx, y) == doctest::Approx(sign * base).epsilon(1e-9));
  }
}

TEST_CASE("constant inputs raise, ranking flags them instead") {
  const std::vector<double> flat(10, 3.0);
  const std::vector<double> rising = {0, 1, 2, 3, 4, 5, 6, 7, 8, 9};
  CHECK_THROWS_AS(pearson(flat, rising), std::domain_error);

  Dataset ds;
  ds.feature_names = {"constant", "signal"};
  for (int i = 0; i < 10; ++i) {
    ds.records.push_back({{3.0, static_cast<double>(i)},
                          i < 5 ? ClassLabel::Calm : ClassLabel::Stressful});
  }
  const CorrelationReport report = rank_features(ds);
  CHECK(report.constant_flag[0]);
  CHECK(report.r[0] == 0.0);
  CHECK_FALSE(report.constant_flag[1]);
  CHECK(report.ranking.front() == 0);  // r = 0 ranks lowest
}

TEST_CASE("rank_features puts a label-aligned feature last") {
  Rng rng(11);
  Dataset ds;
  ds.feature_names = {"aligned", "n1", "n2", "n3"};
  for (int i = 0; i < 200; ++i) {
    const double signal = rng.gaussian();
    Record rec;
    rec.features = {signal, rng.gaussian(), rng.gaussian(), rng.gaussian()};
    rec.label = signal > 0.0 ? ClassLabel::Stressful : ClassLabel::Calm;
    ds.records.push_back(rec);
  }
  const CorrelationReport report = rank_features(ds);
  CHECK(report.ranking.back() == 0);
  CHECK(std::abs(report.r[0]) > 0.5);
}

TEST_CASE("all-noise data keeps correlations small across seeds") {
  int ok = 0;
  for (std::uint64_t seed = 100; seed < 150; ++seed) {
    const Dataset ds = synthesize(SyntheticSpec{620, 0, 10, 0.0, 0.0, seed});
    const CorrelationReport report = rank_features(ds);
    double max_abs = 0.0;
    for (double r : report.r) max_abs = std::max(max_abs, std::abs(r));
    if (max_abs < 0.15) ++ok;
  }
  CHECK(ok >= 45);
}

TEST_CASE("reference ranking fixture orders and ablates as published") {
  const CorrelationReport report = report_from_values(kDnaNames, kReferenceR);
  const std::vector<std::string> expected_order = {"thermal_4", "thermal_5", "rgb_4",
                                                   "thermal_1", "rgb_1",     "rgb_2",
                                                   "rgb_3",     "thermal_3", "thermal_2",
                                                   "rgb_5"};
  for (std::size_t k = 0; k < expected_order.size(); ++k) {
    CHECK(report.name_at_rank(k) == expected_order[k]);
  }

  const auto masks = ablation_masks(report, 4);
  REQUIRE(masks.size() == 4);
  // k = 1 clears thermal_4 only (DNA index 8).
  CHECK(masks[0].to_string() == "1111111101");
  // k = 2 additionally clears thermal_5.
  CHECK(masks[1].to_string() == "1111111100");
  CHECK(masks[2].count() == 7);
  CHECK(masks[3].count() == 6);
}

TEST_CASE("ablation mask boundaries") {
  const CorrelationReport report = report_from_values(kDnaNames, kReferenceR);
  const auto masks = ablation_masks(report, 9);
  CHECK(masks.back().count() == 1);
  CHECK(masks.back().test(4));  // rgb_5 carries the largest |r|
  CHECK_THROWS_AS(ablation_masks(report, 10), std::invalid_argument);
  CHECK_THROWS_AS(ablation_masks(report, 0), std::invalid_argument);
}

TEST_CASE("ranking ties break in DNA order") {
  const CorrelationReport report =
      report_from_values({"a", "b", "c"}, {0.5, -0.5, 0.1});
  CHECK(report.ranking == std::vector<std::size_t>{2, 0, 1});
}
