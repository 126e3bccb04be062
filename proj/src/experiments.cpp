#include "featsel/experiments.hpp"

#include <algorithm>
#include <filesystem>
#include <iostream>

#include "json.hpp"

namespace featsel {

namespace fs = std::filesystem;
using ordered_json = nlohmann::ordered_json;

namespace {

constexpr int kInnerSplitOnly = 0;  // technique needs no inner split

std::string model_display(const std::string& model) { return model == "ann" ? "ANN" : "SVM"; }

void require_model(const std::string& model) {
  if (model != "ann" && model != "svm") {
    throw UsageError("unknown model '" + model + "' (expected ann or svm)");
  }
}

SvmConfig svm_config(std::uint64_t seed) {
  SvmConfig sc;
  sc.seed = seed;
  return sc;
}

SelectionStrategy parse_strategy(const std::string& name) {
  if (name == "proportional") return ProportionalSelection{};
  if (name == "tournament") return TournamentSelection{};
  if (name == "hof") return HallOfFameSelection{};
  throw UsageError("unknown strategy '" + name + "' (expected proportional, tournament or hof)");
}

std::string joined_names(const Dataset& ds, const FeatureMask& mask, bool kept) {
  std::string out;
  for (std::size_t j = 0; j < mask.size(); ++j) {
    if (mask.test(j) != kept) continue;
    if (!out.empty()) out += '+';
    out += ds.feature_names[j];
  }
  return out.empty() ? "none" : out;
}

ReportTable ablation_accuracy_table(const std::string& title, const Pipeline& pipeline,
                                    const std::vector<FeatureMask>& masks,
                                    const ExperimentConfig& cfg) {
  ReportTable table;
  table.title = title;
  table.columns = {"Removed", "Features Kept", "SVM Test Accuracy", "ANN Test Accuracy"};

  const FeatureMask full = FeatureMask::full(pipeline.train.n_features());
  std::vector<FeatureMask> all_masks;
  all_masks.push_back(full);
  all_masks.insert(all_masks.end(), masks.begin(), masks.end());

  for (const auto& mask : all_masks) {
    const Dataset train = apply_mask(pipeline.train, mask);
    const Dataset test = apply_mask(pipeline.test, mask);
    const ModelOutcome svm = fit_and_score(train, test, "svm", cfg, pipeline.seeds);
    const ModelOutcome ann = fit_and_score(train, test, "ann", cfg, pipeline.seeds);
    table.add_row({joined_names(pipeline.train, mask, /*kept=*/false),
                   std::to_string(mask.count()), format_double(svm.test_accuracy),
                   format_double(ann.test_accuracy)});
  }
  return table;
}

ordered_json config_echo(const ExperimentConfig& cfg, const StageSeeds& seeds,
                         std::size_t n_features) {
  ordered_json j;
  j["technique"] = cfg.technique;
  if (cfg.csv_path) {
    j["data"] = {{"source", "csv"}, {"path", *cfg.csv_path}};
  } else {
    j["data"] = {{"source", "synthetic"},
                 {"n_records", cfg.synthetic.n_records},
                 {"n_informative", cfg.synthetic.n_informative},
                 {"n_noise", cfg.synthetic.n_noise},
                 {"class_separation", cfg.synthetic.class_separation},
                 {"label_noise_rate", cfg.synthetic.label_noise_rate},
                 {"seed", cfg.synthetic.seed}};
  }
  j["model"] = cfg.model;
  j["standardize"] = cfg.standardize;
  j["master_seed"] = cfg.master_seed;
  j["paper_scale"] = cfg.paper_scale;
  j["epochs"] = cfg.resolved_epochs();
  j["population"] = cfg.resolved_population();
  j["generations"] = cfg.resolved_generations();
  j["runs"] = cfg.resolved_runs();
  j["ablate"] = cfg.ablate;
  j["strategy"] = cfg.strategy;
  j["crossover_rate"] = cfg.crossover_rate;
  j["mutation_rate"] = cfg.mutation_rate > 0.0
                           ? cfg.mutation_rate
                           : 1.0 / static_cast<double>(std::max<std::size_t>(n_features, 1));
  j["elitism"] = cfg.elitism;
  j["mlp"] = {{"hidden", {18, 16, 8}},
              {"learning_rate", cfg.learning_rate},
              {"weight_decay", cfg.resolved_weight_decay()},
              {"adam_beta1", 0.9},
              {"adam_beta2", 0.999},
              {"adam_epsilon", 1e-8}};
  j["svm"] = {{"kernel", "rbf"}, {"gamma", "auto"}, {"degree", 3},
              {"C", 1.0},        {"tolerance", 1e-3}, {"max_passes", 10}};
  j["seeds"] = {{"outer_split", seeds.outer_split}, {"inner_split", seeds.inner_split},
                {"mlp", seeds.mlp},                 {"svm", seeds.svm},
                {"ga", seeds.ga},                   {"magnitude", seeds.magnitude}};
  j["out_dir"] = cfg.out_dir;
  return j;
}

void write_tables(const std::string& out_dir, const std::vector<ReportTable>& tables) {
  emit_report(tables, "both", out_dir);
}

// The report technique re-renders whichever known CSV artifacts exist.
const char* kKnownArtifacts[] = {"baseline",         "correlation_ranking", "correlation_ablation",
                                 "magnitude_ranking", "magnitude_runs",     "magnitude_ablation",
                                 "ga_summary",        "evolution_log"};

ReportTable table_from_csv(const std::string& title, const std::string& content) {
  ReportTable table;
  table.title = title;
  std::size_t start = 0;
  bool header = true;
  while (start < content.size()) {
    std::size_t end = content.find('\n', start);
    if (end == std::string::npos) end = content.size();
    const std::string line = content.substr(start, end - start);
    start = end + 1;
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::size_t cell_start = 0;
    while (true) {
      const std::size_t comma = line.find(',', cell_start);
      if (comma == std::string::npos) {
        cells.push_back(line.substr(cell_start));
        break;
      }
      cells.push_back(line.substr(cell_start, comma - cell_start));
      cell_start = comma + 1;
    }
    if (header) {
      table.columns = cells;
      header = false;
    } else {
      table.add_row(cells);
    }
  }
  return table;
}

void run_report_technique(const ExperimentConfig& cfg) {
  std::string combined;
  std::size_t found = 0;
  for (const char* name : kKnownArtifacts) {
    const fs::path path = fs::path(cfg.out_dir) / (std::string(name) + ".csv");
    if (!fs::exists(path)) continue;
    const ReportTable table = table_from_csv(name, read_text_file(path.string()));
    combined += to_markdown(table);
    combined += '\n';
    ++found;
  }
  if (found == 0) {
    throw UsageError("report: no known artifact CSVs found in " + cfg.out_dir);
  }
  write_text_file((fs::path(cfg.out_dir) / "report.md").string(), combined);
}

}  // namespace

TrainConfig resolved_mlp_config(const ExperimentConfig& cfg, std::uint64_t seed) {
  TrainConfig tc;
  tc.learning_rate = cfg.learning_rate;
  tc.weight_decay = cfg.resolved_weight_decay();
  tc.epochs = cfg.resolved_epochs();
  tc.seed = seed;
  return tc;
}

StageSeeds StageSeeds::from_master(std::uint64_t master) {
  StageSeeds s;
  s.outer_split = derive_seed(master, 11);
  s.inner_split = derive_seed(master, 12);
  s.mlp = derive_seed(master, 13);
  s.svm = derive_seed(master, 14);
  s.ga = derive_seed(master, 15);
  s.magnitude = derive_seed(master, 16);
  return s;
}

Dataset load_experiment_dataset(const ExperimentConfig& cfg) {
  if (cfg.csv_path) {
    try {
      return load_csv(*cfg.csv_path);
    } catch (const std::runtime_error& e) {
      throw UsageError(e.what());
    }
  }
  return synthesize(cfg.synthetic);
}

Pipeline prepare_pipeline(const Dataset& full, bool standardize_features,
                          std::uint64_t master_seed) {
  Pipeline p;
  p.seeds = StageSeeds::from_master(master_seed);

  SplitSpec outer;
  outer.train_fraction = 0.7;
  outer.stratified = true;
  outer.seed = p.seeds.outer_split;
  SplitResult outer_split = split(full, outer);

  if (standardize_features) {
    StandardizeResult st = standardize(outer_split.train, {outer_split.test});
    p.train = std::move(st.train);
    p.test = std::move(st.others.front());
    p.stats = std::move(st.stats);
    p.standardized = true;
  } else {
    p.train = std::move(outer_split.train);
    p.test = std::move(outer_split.test);
    p.stats = Standardizer{};
  }

  SplitSpec inner;
  inner.train_fraction = 0.7;
  inner.stratified = true;
  inner.seed = p.seeds.inner_split;
  SplitResult inner_split = split(p.train, inner);
  p.fit = std::move(inner_split.train);
  p.validation = std::move(inner_split.test);
  return p;
}

ModelOutcome fit_and_score(const Dataset& train, const Dataset& test, const std::string& model,
                           const ExperimentConfig& cfg, const StageSeeds& seeds) {
  require_model(model);
  ModelOutcome outcome;
  if (model == "ann") {
    const MlpArchitecture arch = make_architecture(static_cast<int>(train.n_features()));
    auto [params, report] = train_mlp(train, test, arch, resolved_mlp_config(cfg, seeds.mlp));
    (void)params;
    outcome.train_accuracy = report.final_train_accuracy;
    outcome.test_accuracy = report.test_accuracy;
  } else {
    const SvmModel svm = train_smo(train, KernelSpec{}, svm_config(seeds.svm));
    outcome.train_accuracy = evaluate(svm, train);
    outcome.test_accuracy = evaluate(svm, test);
  }
  return outcome;
}

ReportTable run_baseline(const Pipeline& pipeline, const ExperimentConfig& cfg) {
  require_model(cfg.model);
  ReportTable table;
  table.title = "Baseline";
  table.columns = {"Model", "Final Train Accuracy", "Test Accuracy", "Standardized"};
  const ModelOutcome outcome =
      fit_and_score(pipeline.train, pipeline.test, cfg.model, cfg, pipeline.seeds);
  table.add_row({model_display(cfg.model), format_double(outcome.train_accuracy),
                 format_double(outcome.test_accuracy), pipeline.standardized ? "yes" : "no"});
  return table;
}

AblationOutcome run_correlation(const Pipeline& pipeline, const ExperimentConfig& cfg) {
  const std::size_t n = pipeline.train.n_features();
  if (cfg.ablate < 1 || static_cast<std::size_t>(cfg.ablate) >= n) {
    throw UsageError("correlate: --ablate must lie in [1, n_features)");
  }
  const CorrelationReport report = rank_features(pipeline.train);

  AblationOutcome outcome;
  outcome.ranking_table.title = "Correlation ranking";
  outcome.ranking_table.columns = {"feature", "r", "abs_rank"};
  for (std::size_t k = 0; k < report.ranking.size(); ++k) {
    const std::size_t j = report.ranking[k];
    outcome.ranking_table.add_row(
        {report.feature_names[j], format_double(report.r[j]), std::to_string(k + 1)});
  }

  const auto masks = ablation_masks(report, static_cast<std::size_t>(cfg.ablate));
  outcome.ablation_table = ablation_accuracy_table("Correlation ablation", pipeline, masks, cfg);
  return outcome;
}

MagnitudeOutcome run_magnitude(const Pipeline& pipeline, const ExperimentConfig& cfg) {
  const std::size_t n = pipeline.train.n_features();
  if (cfg.ablate < 1 || static_cast<std::size_t>(cfg.ablate) >= n) {
    throw UsageError("magnitude: --ablate must lie in [1, n_features)");
  }
  const MlpArchitecture arch = make_architecture(static_cast<int>(n));
  MagnitudeOutcome outcome;
  outcome.report = averaged_ranking(pipeline.train, arch, resolved_mlp_config(cfg, pipeline.seeds.mlp),
                                    cfg.resolved_runs(), pipeline.seeds.magnitude);

  outcome.ranking_table.title = "Magnitude ranking";
  outcome.ranking_table.columns = {"feature", "mean_score", "std_score", "rank"};
  for (std::size_t k = 0; k < outcome.report.ranking.size(); ++k) {
    const std::size_t j = outcome.report.ranking[k];
    outcome.ranking_table.add_row({outcome.report.feature_names[j],
                                   format_double(outcome.report.mean_scores[j]),
                                   format_double(outcome.report.std_scores[j]),
                                   std::to_string(k + 1)});
  }

  outcome.runs_table.title = "Magnitude runs";
  outcome.runs_table.columns = {"run", "feature", "score"};
  for (std::size_t run = 0; run < outcome.report.per_run_scores.size(); ++run) {
    for (std::size_t j = 0; j < outcome.report.feature_names.size(); ++j) {
      outcome.runs_table.add_row({std::to_string(run), outcome.report.feature_names[j],
                                  format_double(outcome.report.per_run_scores[run][j])});
    }
  }

  const auto masks = ablation_masks(outcome.report, static_cast<std::size_t>(cfg.ablate));
  outcome.ablation_table = ablation_accuracy_table("Magnitude ablation", pipeline, masks, cfg);
  return outcome;
}

GaOutcome run_ga(const Pipeline& pipeline, const ExperimentConfig& cfg) {
  require_model(cfg.model);
  const std::size_t n = pipeline.train.n_features();

  GaConfig ga_cfg;
  ga_cfg.population_size = cfg.resolved_population();
  ga_cfg.generations = cfg.resolved_generations();
  ga_cfg.crossover_rate = cfg.crossover_rate;
  ga_cfg.mutation_rate = cfg.mutation_rate;
  ga_cfg.elitism_count = cfg.elitism;
  ga_cfg.master_seed = pipeline.seeds.ga;
  ga_cfg.strategy = parse_strategy(cfg.strategy);
  ga_cfg.n_features = static_cast<int>(n);

  FitnessFn fitness;
  if (cfg.model == "ann") {
    fitness = make_mlp_evaluator(pipeline.fit, pipeline.validation, {18, 16, 8},
                                 resolved_mlp_config(cfg, pipeline.seeds.mlp));
  } else {
    fitness = make_svm_evaluator(pipeline.fit, pipeline.validation, KernelSpec{},
                                 svm_config(pipeline.seeds.svm));
  }

  GaOutcome outcome;
  outcome.result = evolve(ga_cfg, fitness);

  const ModelOutcome baseline =
      fit_and_score(pipeline.train, pipeline.test, cfg.model, cfg, pipeline.seeds);
  const Dataset best_train = apply_mask(pipeline.train, outcome.result.best.mask);
  const Dataset best_test = apply_mask(pipeline.test, outcome.result.best.mask);
  const ModelOutcome best = fit_and_score(best_train, best_test, cfg.model, cfg, pipeline.seeds);
  outcome.baseline_test_accuracy = baseline.test_accuracy;
  outcome.best_test_accuracy = best.test_accuracy;
  outcome.result.log.final_test_accuracy = best.test_accuracy;

  const double improvement = best.test_accuracy - baseline.test_accuracy;
  outcome.summary_table.title = "GA summary";
  outcome.summary_table.columns = {"Model",        "Strategy",  "Population", "Generations",
                                   "DNA",          "Test Accuracy", "Baseline",
                                   "Improvement"};
  outcome.summary_table.add_row(
      {model_display(cfg.model), cfg.strategy, std::to_string(ga_cfg.population_size),
       std::to_string(ga_cfg.generations), outcome.result.best.mask.to_string(),
       format_double(best.test_accuracy), format_double(baseline.test_accuracy),
       (improvement >= 0.0 ? "+" : "") + format_double(improvement)});

  outcome.log_table.title = "Evolution log";
  outcome.log_table.columns = {"generation", "best_fitness", "mean_fitness", "best_mask",
                               "evals"};
  for (std::size_t g = 0; g < outcome.result.log.generations.size(); ++g) {
    const auto& stats = outcome.result.log.generations[g];
    outcome.log_table.add_row({std::to_string(g), format_double(stats.best_fitness),
                               format_double(stats.mean_fitness), stats.best_mask.to_string(),
                               std::to_string(stats.evaluations)});
  }
  return outcome;
}

std::vector<std::string> emit_report(const std::vector<ReportTable>& tables,
                                     const std::string& format, const std::string& out_dir) {
  if (tables.empty()) throw UsageError("emit_report: no tables to write");
  if (format != "csv" && format != "md" && format != "both") {
    throw UsageError("emit_report: format must be csv, md or both");
  }
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) throw std::runtime_error("cannot create output directory: " + out_dir);

  std::vector<std::string> written;
  for (const auto& table : tables) {
    const std::string slug = slugify(table.title);
    if (format == "csv" || format == "both") {
      const std::string path = (fs::path(out_dir) / (slug + ".csv")).string();
      write_text_file(path, to_csv(table));
      written.push_back(path);
    }
    if (format == "md" || format == "both") {
      const std::string path = (fs::path(out_dir) / (slug + ".md")).string();
      write_text_file(path, to_markdown(table));
      written.push_back(path);
    }
  }
  return written;
}

void run_experiment_or_throw(const ExperimentConfig& cfg) {
  static const std::vector<std::string> kTechniques = {"gen-data", "baseline", "correlate",
                                                       "magnitude", "ga", "report"};
  if (std::find(kTechniques.begin(), kTechniques.end(), cfg.technique) == kTechniques.end()) {
    throw UsageError("unknown technique '" + cfg.technique + "'");
  }

  std::error_code ec;
  fs::create_directories(cfg.out_dir, ec);
  if (ec) throw std::runtime_error("cannot create output directory: " + cfg.out_dir);

  if (cfg.technique == "report") {
    run_report_technique(cfg);
    return;
  }

  const Dataset full = load_experiment_dataset(cfg);
  const StageSeeds seeds = StageSeeds::from_master(cfg.master_seed);
  write_text_file((fs::path(cfg.out_dir) / "config.json").string(),
                  config_echo(cfg, seeds, full.n_features()).dump(2) + "\n");

  if (cfg.technique == "gen-data") {
    write_csv(full, (fs::path(cfg.out_dir) / "dataset.csv").string());
    return;
  }

  const Pipeline pipeline = prepare_pipeline(full, cfg.standardize, cfg.master_seed);

  if (cfg.technique == "baseline") {
    write_tables(cfg.out_dir, {run_baseline(pipeline, cfg)});
  } else if (cfg.technique == "correlate") {
    const AblationOutcome outcome = run_correlation(pipeline, cfg);
    write_tables(cfg.out_dir, {outcome.ranking_table, outcome.ablation_table});
  } else if (cfg.technique == "magnitude") {
    const MagnitudeOutcome outcome = run_magnitude(pipeline, cfg);
    write_tables(cfg.out_dir, {outcome.ranking_table, outcome.runs_table,
                               outcome.ablation_table});
  } else {  // ga
    const GaOutcome outcome = run_ga(pipeline, cfg);
    write_tables(cfg.out_dir, {outcome.summary_table, outcome.log_table});
  }
}

int run_experiment(const ExperimentConfig& cfg) {
  try {
    run_experiment_or_throw(cfg);
    return 0;
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}

}  // namespace featsel
