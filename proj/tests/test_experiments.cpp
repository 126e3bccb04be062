#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cstdlib>
#include <filesystem>
#include <map>

#include "featsel/experiments.hpp"
#include "json.hpp"

using namespace featsel;
namespace fs = std::filesystem;

namespace {

std::string fresh_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / name;
  fs::remove_all(dir);
  return dir.string();
}

ExperimentConfig small_config(const std::string& technique, const std::string& out) {
  ExperimentConfig cfg;
  cfg.technique = technique;
  cfg.out_dir = out;
  cfg.synthetic = SyntheticSpec{160, 4, 6, 1.5, 0.0, 3};
  cfg.master_seed = 9;
  cfg.epochs = 60;
  cfg.population = 8;
  cfg.generations = 3;
  cfg.runs = 2;
  cfg.ablate = 2;
  cfg.learning_rate = 0.01;
  return cfg;
}

}  // namespace

TEST_CASE("scale profiles resolve defaults") {
  ExperimentConfig cfg;
  CHECK(cfg.resolved_epochs() == 500);
  CHECK(cfg.resolved_population() == 20);
  CHECK(cfg.resolved_generations() == 10);
  CHECK(cfg.resolved_runs() == 10);
  cfg.paper_scale = true;
  CHECK(cfg.resolved_epochs() == 10000);
  CHECK(cfg.resolved_population() == 60);
  CHECK(cfg.resolved_generations() == 100);
  CHECK(cfg.resolved_runs() == 20);
  cfg.epochs = 123;
  CHECK(cfg.resolved_epochs() == 123);
}

TEST_CASE("baseline experiment writes the documented table shape") {
  const std::string out = fresh_dir("featsel_exp_baseline");
  ExperimentConfig cfg = small_config("baseline", out);
  REQUIRE(run_experiment(cfg) == 0);

  CHECK(fs::exists(fs::path(out) / "config.json"));
  const std::string md = read_text_file((fs::path(out) / "baseline.md").string());
  CHECK(md.find("| Model | Final Train Accuracy | Test Accuracy | Standardized |") !=
        std::string::npos);
  CHECK(md.find("| SVM |") != std::string::npos);

  SUBCASE("config echo carries every effective parameter") {
    const auto echo = nlohmann::json::parse(read_text_file((fs::path(out) / "config.json").string()));
    CHECK(echo["epochs"] == 60);
    CHECK(echo["population"] == 8);
    CHECK(echo["standardize"] == true);
    CHECK(echo["data"]["source"] == "synthetic");
    CHECK(echo["data"]["n_records"] == 160);
    CHECK(echo["mutation_rate"] == doctest::Approx(0.1));
    CHECK(echo["svm"]["C"] == doctest::Approx(1.0));
    CHECK(echo["seeds"].contains("outer_split"));
  }
}

TEST_CASE("gen-data emits a loadable dataset") {
  const std::string out = fresh_dir("featsel_exp_gendata");
  ExperimentConfig cfg = small_config("gen-data", out);
  REQUIRE(run_experiment(cfg) == 0);
  const Dataset ds = load_csv((fs::path(out) / "dataset.csv").string());
  CHECK(ds.size() == 160);
  CHECK(ds.n_features() == 10);
}

TEST_CASE("correlate produces a full ablation sweep") {
  const std::string out = fresh_dir("featsel_exp_corr");
  ExperimentConfig cfg = small_config("correlate", out);
  cfg.ablate = 4;
  REQUIRE(run_experiment(cfg) == 0);

  const std::string ranking = read_text_file((fs::path(out) / "correlation_ranking.csv").string());
  CHECK(ranking.rfind("feature,r,abs_rank", 0) == 0);

  const ReportTable parsed = [&] {
    const std::string csv = read_text_file((fs::path(out) / "correlation_ablation.csv").string());
    ReportTable t;
    std::size_t rows = 0;
    for (char c : csv) {
      if (c == '\n') ++rows;
    }
    t.rows.resize(rows - 1);  // minus the header line
    return t;
  }();
  CHECK(parsed.rows.size() == 5);  // full + remove-1..4
}

TEST_CASE("magnitude produces ranking, per-run scores and an ablation") {
  const std::string out = fresh_dir("featsel_exp_mag");
  ExperimentConfig cfg = small_config("magnitude", out);
  REQUIRE(run_experiment(cfg) == 0);
  CHECK(fs::exists(fs::path(out) / "magnitude_ranking.csv"));
  CHECK(fs::exists(fs::path(out) / "magnitude_ablation.csv"));
  const std::string runs = read_text_file((fs::path(out) / "magnitude_runs.csv").string());
  CHECK(runs.rfind("run,feature,score", 0) == 0);
  // 2 runs x 10 features plus the header
  std::size_t lines = 0;
  for (char c : runs) {
    if (c == '\n') ++lines;
  }
  CHECK(lines == 21);
}

TEST_CASE("ga writes an evolution log and a summary row") {
  const std::string out = fresh_dir("featsel_exp_ga");
  ExperimentConfig cfg = small_config("ga", out);
  cfg.model = "ann";
  REQUIRE(run_experiment(cfg) == 0);

  const std::string log = read_text_file((fs::path(out) / "evolution_log.csv").string());
  CHECK(log.rfind("generation,best_fitness,mean_fitness,best_mask,evals", 0) == 0);
  std::size_t lines = 0;
  for (char c : log) {
    if (c == '\n') ++lines;
  }
  CHECK(lines == 4);  // header + 3 generations

  const std::string summary = read_text_file((fs::path(out) / "ga_summary.md").string());
  CHECK(summary.find("Improvement") != std::string::npos);
  CHECK(summary.find("| ANN |") != std::string::npos);
}

TEST_CASE("report re-renders known artifacts") {
  const std::string out = fresh_dir("featsel_exp_report");
  ExperimentConfig cfg = small_config("baseline", out);
  REQUIRE(run_experiment(cfg) == 0);
  ExperimentConfig report = small_config("report", out);
  REQUIRE(run_experiment(report) == 0);
  const std::string md = read_text_file((fs::path(out) / "report.md").string());
  CHECK(md.find("baseline") != std::string::npos);

  SUBCASE("report with no artifacts is a usage error") {
    ExperimentConfig empty = small_config("report", fresh_dir("featsel_exp_empty"));
    CHECK(run_experiment(empty) == 1);
  }
}

TEST_CASE("experiments rerun to identical bytes across thread counts") {
  const std::string out = fresh_dir("featsel_det");
  const std::vector<std::string> artifacts = {"config.json", "evolution_log.csv",
                                              "ga_summary.csv", "ga_summary.md"};

  ExperimentConfig cfg = small_config("ga", out);
  cfg.model = "svm";
  setenv("FEATSEL_THREADS", "1", 1);
  REQUIRE(run_experiment(cfg) == 0);
  std::map<std::string, std::string> snapshot;
  for (const auto& name : artifacts) {
    snapshot[name] = read_text_file((fs::path(out) / name).string());
  }

  // Rerun with the identical config into the same directory.
  REQUIRE(run_experiment(cfg) == 0);
  for (const auto& name : artifacts) {
    CHECK(read_text_file((fs::path(out) / name).string()) == snapshot[name]);
  }

  // The worker count must not leak into any artifact, config echo included.
  setenv("FEATSEL_THREADS", "4", 1);
  REQUIRE(run_experiment(cfg) == 0);
  unsetenv("FEATSEL_THREADS");
  for (const auto& name : artifacts) {
    CHECK(read_text_file((fs::path(out) / name).string()) == snapshot[name]);
  }
}

TEST_CASE("usage errors surface as exit code 1, runtime failures as 2") {
  ExperimentConfig cfg = small_config("nonsense", fresh_dir("featsel_exp_err"));
  CHECK(run_experiment(cfg) == 1);

  cfg = small_config("baseline", fresh_dir("featsel_exp_err2"));
  cfg.model = "forest";
  CHECK(run_experiment(cfg) == 1);

  cfg = small_config("baseline", fresh_dir("featsel_exp_err3"));
  cfg.csv_path = "/definitely/missing.csv";
  CHECK(run_experiment(cfg) == 1);

  cfg = small_config("correlate", fresh_dir("featsel_exp_err4"));
  cfg.ablate = 10;
  CHECK(run_experiment(cfg) == 1);

  cfg = small_config("baseline", "/proc/featsel_unwritable/out");
  CHECK(run_experiment(cfg) == 2);
}

TEST_CASE("emit_report validates input and writes both formats") {
  CHECK_THROWS_AS(emit_report({}, "both", fresh_dir("featsel_emit")), UsageError);

  ReportTable table;
  table.title = "Demo Table";
  table.columns = {"a", "b"};
  table.add_row({"1", format_double(0.123456)});
  CHECK_THROWS_AS(table.add_row({"only-one"}), std::invalid_argument);
  CHECK_THROWS_AS(emit_report({table}, "yaml", fresh_dir("featsel_emit2")), UsageError);

  const std::string out = fresh_dir("featsel_emit3");
  const auto written = emit_report({table}, "both", out);
  REQUIRE(written.size() == 2);
  CHECK(read_text_file(written[0]) == "a,b\n1,0.1235\n");
  const std::string md = read_text_file(written[1]);
  CHECK(md.find("### Demo Table") != std::string::npos);
  CHECK(md.find("| 1 | 0.1235 |") != std::string::npos);

  SUBCASE("same tables, same bytes") {
    const std::string out2 = fresh_dir("featsel_emit4");
    const auto second = emit_report({table}, "both", out2);
    CHECK(read_text_file(second[0]) == read_text_file(written[0]));
    CHECK(read_text_file(second[1]) == read_text_file(written[1]));
  }
}
