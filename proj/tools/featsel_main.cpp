// Command-line driver for the feature-selection experiment toolkit.
//
// Subcommands: gen-data, baseline, correlate, magnitude, ga, report.
// Every run echoes its effective configuration (config.json) and writes
// CSV/Markdown artifacts into --out; reruns with the same flags and seed are
// byte-identical regardless of FEATSEL_THREADS.

#include <string>

#include "CLI11.hpp"
#include "featsel/experiments.hpp"

namespace {

void add_data_options(CLI::App* sub, featsel::ExperimentConfig& cfg, std::string& csv_path) {
  auto* data = sub->add_option("--data", csv_path, "CSV dataset path (features then 'label')");
  auto* synthetic =
      sub->add_flag("--synthetic", "use the synthetic generator (default when --data absent)");
  data->excludes(synthetic);
  sub->add_option("--records", cfg.synthetic.n_records, "synthetic: number of records")
      ->capture_default_str();
  sub->add_option("--informative", cfg.synthetic.n_informative,
                  "synthetic: informative feature count")
      ->capture_default_str();
  sub->add_option("--noise-features", cfg.synthetic.n_noise, "synthetic: noise feature count")
      ->capture_default_str();
  sub->add_option("--separation", cfg.synthetic.class_separation,
                  "synthetic: class mean separation per informative feature")
      ->capture_default_str();
  sub->add_option("--label-noise", cfg.synthetic.label_noise_rate,
                  "synthetic: label flip probability")
      ->capture_default_str();
  sub->add_option("--data-seed", cfg.synthetic.seed, "synthetic: generator seed")
      ->capture_default_str();
}

void add_common_options(CLI::App* sub, featsel::ExperimentConfig& cfg) {
  sub->add_option("--seed", cfg.master_seed, "master seed for splits, models and the GA")
      ->capture_default_str();
  sub->add_option("--out", cfg.out_dir, "output directory")->capture_default_str();
  sub->add_flag("--paper-scale", cfg.paper_scale,
                "heavy profile: epochs 10000, population 60, generations 100, runs 20");
  sub->add_flag("--no-standardize", [&cfg](std::int64_t) { cfg.standardize = false; },
                "skip z-scoring (statistics are otherwise fitted on the train split)");
}

void add_model_options(CLI::App* sub, featsel::ExperimentConfig& cfg) {
  sub->add_option("--model", cfg.model, "classifier: ann or svm")->capture_default_str();
  sub->add_option("--epochs", cfg.epochs, "MLP training epochs (default 500, paper-scale 10000)");
  sub->add_option("--learning-rate", cfg.learning_rate, "MLP Adam learning rate")
      ->capture_default_str();
  sub->add_option("--weight-decay", cfg.weight_decay,
                  "MLP L2 weight decay (default 0.0003; magnitude ranking 0.01)");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"featsel: correlation, weight-magnitude and GA feature selection experiments"};
  app.require_subcommand(1);

  featsel::ExperimentConfig cfg;
  std::string csv_path;

  auto* gen = app.add_subcommand("gen-data", "generate a synthetic dataset CSV");
  add_common_options(gen, cfg);
  gen->add_option("--records", cfg.synthetic.n_records, "number of records")
      ->capture_default_str();
  gen->add_option("--informative", cfg.synthetic.n_informative, "informative feature count")
      ->capture_default_str();
  gen->add_option("--noise-features", cfg.synthetic.n_noise, "noise feature count")
      ->capture_default_str();
  gen->add_option("--separation", cfg.synthetic.class_separation,
                  "class mean separation per informative feature")
      ->capture_default_str();
  gen->add_option("--label-noise", cfg.synthetic.label_noise_rate, "label flip probability")
      ->capture_default_str();
  gen->add_option("--data-seed", cfg.synthetic.seed, "generator seed")->capture_default_str();

  auto* baseline = app.add_subcommand("baseline", "all-features train/test accuracy of one model");
  add_data_options(baseline, cfg, csv_path);
  add_common_options(baseline, cfg);
  add_model_options(baseline, cfg);

  auto* correlate =
      app.add_subcommand("correlate", "feature-label correlation ranking and ablation sweep");
  add_data_options(correlate, cfg, csv_path);
  add_common_options(correlate, cfg);
  add_model_options(correlate, cfg);
  correlate->add_option("--ablate", cfg.ablate, "remove the 1..k lowest-ranked features")
      ->capture_default_str();

  auto* magnitude =
      app.add_subcommand("magnitude", "weight-magnitude importance ranking and ablation sweep");
  add_data_options(magnitude, cfg, csv_path);
  add_common_options(magnitude, cfg);
  add_model_options(magnitude, cfg);
  magnitude->add_option("--ablate", cfg.ablate, "remove the 1..k lowest-ranked features")
      ->capture_default_str();
  magnitude->add_option("--runs", cfg.runs, "trainings to average (default 10, paper-scale 20)");

  auto* ga = app.add_subcommand("ga", "genetic-algorithm wrapper selection over feature masks");
  add_data_options(ga, cfg, csv_path);
  add_common_options(ga, cfg);
  add_model_options(ga, cfg);
  ga->add_option("--strategy", cfg.strategy, "proportional, tournament or hof")
      ->capture_default_str();
  ga->add_option("--pop", cfg.population, "population size (default 20, paper-scale 60)");
  ga->add_option("--gen", cfg.generations, "generations (default 10, paper-scale 100)");
  ga->add_option("--crossover-rate", cfg.crossover_rate, "single-point crossover probability")
      ->capture_default_str();
  ga->add_option("--mutation-rate", cfg.mutation_rate,
                 "per-bit flip probability (default 1/n_features)");
  ga->add_option("--elitism", cfg.elitism, "individuals copied unchanged each generation")
      ->capture_default_str();

  auto* report = app.add_subcommand("report", "re-render artifact CSVs in --out as report.md");
  report->add_option("--out", cfg.out_dir, "directory holding experiment artifacts")
      ->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  cfg.technique = app.get_subcommands().front()->get_name();
  if (!csv_path.empty()) cfg.csv_path = csv_path;
  return featsel::run_experiment(cfg);
}
