// Python bindings for the feature-selection toolkit. The module exposes the
// main operations: dataset generation and splitting, correlation ranking,
// MLP and SVM training, weight-magnitude importances and the GA wrapper.

#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "featsel/correlation.hpp"
#include "featsel/dataset.hpp"
#include "featsel/experiments.hpp"
#include "featsel/ga.hpp"
#include "featsel/magnitude.hpp"
#include "featsel/mlp.hpp"
#include "featsel/svm.hpp"

namespace py = pybind11;
using namespace featsel;

namespace {

Dataset dataset_from_rows(const std::vector<std::vector<double>>& features,
                          const std::vector<int>& labels,
                          std::vector<std::string> feature_names) {
  if (features.size() != labels.size()) {
    throw std::invalid_argument("features and labels must have the same length");
  }
  Dataset ds;
  const std::size_t dim = features.empty() ? feature_names.size() : features.front().size();
  ds.feature_names = feature_names.empty() ? default_feature_names(dim)
                                           : std::move(feature_names);
  ds.records.reserve(features.size());
  for (std::size_t i = 0; i < features.size(); ++i) {
    ds.records.push_back({features[i], label_from_int(labels[i])});
  }
  ds.validate();
  return ds;
}

SelectionStrategy strategy_from_name(const std::string& name, int nts) {
  if (name == "proportional") return ProportionalSelection{};
  if (name == "tournament") return TournamentSelection{nts};
  if (name == "hof") return HallOfFameSelection{};
  throw std::invalid_argument("strategy must be proportional, tournament or hof");
}

py::dict log_to_dict(const EvolutionLog& log) {
  py::list generations;
  for (const auto& g : log.generations) {
    py::dict row;
    row["best_mask"] = g.best_mask.to_string();
    row["best_fitness"] = g.best_fitness;
    row["mean_fitness"] = g.mean_fitness;
    row["evaluations"] = g.evaluations;
    generations.append(row);
  }
  py::dict out;
  out["generations"] = generations;
  out["best_mask"] = log.best_mask.to_string();
  out["best_fitness"] = log.best_fitness;
  out["total_evaluations"] = log.total_evaluations;
  out["repair_count"] = log.repair_count;
  return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Feature-selection experiments: correlation, weight magnitude and GA wrapper";
  m.attr("__version__") = "0.1.0";

  py::class_<Dataset>(m, "Dataset")
      .def(py::init(&dataset_from_rows), py::arg("features"), py::arg("labels"),
           py::arg("feature_names") = std::vector<std::string>{})
      .def_property_readonly("feature_names",
                             [](const Dataset& ds) { return ds.feature_names; })
      .def("__len__", &Dataset::size)
      .def("n_features", &Dataset::n_features)
      .def("labels", &Dataset::labels01)
      .def("column", &Dataset::column, py::arg("index"))
      .def("features",
           [](const Dataset& ds) {
             std::vector<std::vector<double>> rows;
             rows.reserve(ds.size());
             for (const auto& r : ds.records) rows.push_back(r.features);
             return rows;
           })
      .def("to_csv", &to_csv_string);

  m.def(
      "synthesize",
      [](std::size_t n_records, std::size_t n_informative, std::size_t n_noise,
         double class_separation, double label_noise_rate, std::uint64_t seed) {
        SyntheticSpec spec{n_records, n_informative, n_noise, class_separation,
                           label_noise_rate, seed};
        return synthesize(spec);
      },
      py::arg("n_records") = 620, py::arg("n_informative") = 4, py::arg("n_noise") = 6,
      py::arg("class_separation") = 1.0, py::arg("label_noise_rate") = 0.0,
      py::arg("seed") = 1);

  m.def("load_csv", &load_csv, py::arg("path"));
  m.def("write_csv", &write_csv, py::arg("dataset"), py::arg("path"));

  m.def(
      "split",
      [](const Dataset& ds, double train_fraction, bool stratified, std::uint64_t seed) {
        const SplitResult r = split(ds, SplitSpec{train_fraction, stratified, seed});
        return py::make_tuple(r.train, r.test);
      },
      py::arg("dataset"), py::arg("train_fraction") = 0.7, py::arg("stratified") = true,
      py::arg("seed") = 0);

  m.def(
      "kfold",
      [](const Dataset& ds, std::size_t k, std::uint64_t seed) {
        std::vector<std::pair<std::vector<std::size_t>, std::vector<std::size_t>>> out;
        for (const auto& fold : kfold(ds, k, seed)) {
          out.emplace_back(fold.train_indices, fold.validation_indices);
        }
        return out;
      },
      py::arg("dataset"), py::arg("k"), py::arg("seed") = 0);

  m.def(
      "apply_mask",
      [](const Dataset& ds, const std::string& mask) {
        return apply_mask(ds, FeatureMask::from_string(mask));
      },
      py::arg("dataset"), py::arg("mask"));

  m.def(
      "standardize",
      [](const Dataset& train, const std::vector<Dataset>& others) {
        StandardizeResult r = standardize(train, others);
        py::dict stats;
        stats["mean"] = r.stats.mean;
        stats["stddev"] = r.stats.stddev;
        stats["constant_column"] = r.stats.constant_column;
        return py::make_tuple(r.train, r.others, stats);
      },
      py::arg("train"), py::arg("others") = std::vector<Dataset>{});

  m.def(
      "pearson",
      [](const std::vector<double>& x, const std::vector<double>& y) {
        return pearson(std::span<const double>(x), std::span<const double>(y));
      },
      py::arg("x"), py::arg("y"));

  py::class_<CorrelationReport>(m, "CorrelationReport")
      .def_readonly("feature_names", &CorrelationReport::feature_names)
      .def_readonly("r", &CorrelationReport::r)
      .def_readonly("ranking", &CorrelationReport::ranking)
      .def_readonly("constant_flag", &CorrelationReport::constant_flag);

  m.def("rank_features", &rank_features, py::arg("dataset"));
  m.def(
      "correlation_ablation_masks",
      [](const CorrelationReport& report, std::size_t up_to_k) {
        std::vector<std::string> out;
        for (const auto& mask : ablation_masks(report, up_to_k)) out.push_back(mask.to_string());
        return out;
      },
      py::arg("report"), py::arg("up_to_k"));

  py::class_<MlpParams>(m, "MlpParams")
      .def("n_inputs", &MlpParams::n_inputs)
      .def("n_outputs", &MlpParams::n_outputs)
      .def("parameter_count", &MlpParams::parameter_count);

  m.def(
      "train_mlp",
      [](const Dataset& train, const Dataset& test, const std::vector<int>& hidden,
         double learning_rate, double weight_decay, int epochs, std::uint64_t seed) {
        TrainConfig cfg;
        cfg.learning_rate = learning_rate;
        cfg.weight_decay = weight_decay;
        cfg.epochs = epochs;
        cfg.seed = seed;
        const MlpArchitecture arch =
            make_architecture(static_cast<int>(train.n_features()), hidden);
        py::gil_scoped_release release;
        auto [params, report] = train_mlp(train, test, arch, cfg);
        py::gil_scoped_acquire acquire;
        py::dict rep;
        rep["final_train_accuracy"] = report.final_train_accuracy;
        rep["test_accuracy"] = report.test_accuracy;
        rep["loss_curve"] = report.loss_curve;
        rep["epochs_run"] = report.epochs_run;
        return py::make_tuple(params, rep);
      },
      py::arg("train"), py::arg("test"), py::arg("hidden") = std::vector<int>{18, 16, 8},
      py::arg("learning_rate") = 0.0008, py::arg("weight_decay") = 0.0003,
      py::arg("epochs") = 500, py::arg("seed") = 7);

  m.def(
      "mlp_forward",
      [](const MlpParams& params, const std::vector<double>& x) {
        return mlp_forward(params, std::span<const double>(x));
      },
      py::arg("params"), py::arg("x"));
  m.def("mlp_evaluate",
        [](const MlpParams& params, const Dataset& ds) { return evaluate(params, ds); },
        py::arg("params"), py::arg("dataset"));
  m.def("gradient_check", &gradient_check, py::arg("params"), py::arg("batch"),
        py::arg("weight_decay") = 0.0003, py::arg("n_samples") = 50, py::arg("seed") = 12345,
        py::arg("h") = 1e-5);
  m.def("save_mlp", &save_mlp, py::arg("params"), py::arg("path"));
  m.def("load_mlp", &load_mlp, py::arg("path"));

  m.def(
      "input_magnitudes",
      [](const MlpParams& params) {
        const InputMagnitudes mags = input_magnitudes(params);
        py::dict out;
        out["scores"] = mags.scores;
        out["n_inputs"] = mags.n_inputs;
        out["n_outputs"] = mags.n_outputs;
        out["any_degenerate"] = mags.any_degenerate;
        return out;
      },
      py::arg("params"));

  py::class_<MagnitudeReport>(m, "MagnitudeReport")
      .def_readonly("feature_names", &MagnitudeReport::feature_names)
      .def_readonly("mean_scores", &MagnitudeReport::mean_scores)
      .def_readonly("std_scores", &MagnitudeReport::std_scores)
      .def_readonly("ranking", &MagnitudeReport::ranking)
      .def_readonly("per_run_scores", &MagnitudeReport::per_run_scores)
      .def_readonly("effective_runs", &MagnitudeReport::effective_runs);

  m.def(
      "averaged_ranking",
      [](const Dataset& ds, const std::vector<int>& hidden, double learning_rate,
         double weight_decay, int epochs, int n_runs, std::uint64_t seed_stream) {
        TrainConfig cfg;
        cfg.learning_rate = learning_rate;
        cfg.weight_decay = weight_decay;
        cfg.epochs = epochs;
        const MlpArchitecture arch = make_architecture(static_cast<int>(ds.n_features()), hidden);
        py::gil_scoped_release release;
        return averaged_ranking(ds, arch, cfg, n_runs, seed_stream);
      },
      py::arg("dataset"), py::arg("hidden") = std::vector<int>{18, 16, 8},
      py::arg("learning_rate") = 0.0008, py::arg("weight_decay") = 0.0003,
      py::arg("epochs") = 500, py::arg("n_runs") = 10, py::arg("seed_stream") = 1);

  m.def(
      "magnitude_ablation_masks",
      [](const MagnitudeReport& report, std::size_t up_to_k) {
        std::vector<std::string> out;
        for (const auto& mask : ablation_masks(report, up_to_k)) out.push_back(mask.to_string());
        return out;
      },
      py::arg("report"), py::arg("up_to_k"));

  py::class_<SvmModel>(m, "SvmModel")
      .def_property_readonly("n_support_vectors",
                             [](const SvmModel& m_) { return m_.support_vectors.size(); })
      .def_readonly("bias", &SvmModel::bias)
      .def_readonly("gamma", &SvmModel::gamma)
      .def_readonly("converged", &SvmModel::converged);

  m.def(
      "train_svm",
      [](const Dataset& train, double C, double tolerance, int max_passes, std::uint64_t seed,
         double gamma) {
        KernelSpec kernel;
        if (gamma > 0.0) {
          kernel.gamma_mode = KernelSpec::GammaMode::Fixed;
          kernel.gamma_value = gamma;
        }
        SvmConfig cfg;
        cfg.C = C;
        cfg.tolerance = tolerance;
        cfg.max_passes = max_passes;
        cfg.seed = seed;
        py::gil_scoped_release release;
        return train_smo(train, kernel, cfg);
      },
      py::arg("train"), py::arg("C") = 1.0, py::arg("tolerance") = 1e-3,
      py::arg("max_passes") = 10, py::arg("seed") = 22, py::arg("gamma") = 0.0);

  m.def(
      "rbf_kernel",
      [](const std::vector<double>& x, const std::vector<double>& z, double gamma) {
        return rbf_kernel(std::span<const double>(x), std::span<const double>(z), gamma);
      },
      py::arg("x"), py::arg("z"), py::arg("gamma"));
  m.def(
      "svm_decision_value",
      [](const SvmModel& model, const std::vector<double>& x) {
        return decision_value(model, std::span<const double>(x));
      },
      py::arg("model"), py::arg("x"));
  m.def(
      "svm_predict",
      [](const SvmModel& model, const std::vector<double>& x) {
        return label_to_int(predict(model, std::span<const double>(x)));
      },
      py::arg("model"), py::arg("x"));
  m.def("svm_evaluate",
        [](const SvmModel& model, const Dataset& ds) { return evaluate(model, ds); },
        py::arg("model"), py::arg("dataset"));
  m.def("save_svm", &save_svm, py::arg("model"), py::arg("path"));
  m.def("load_svm", &load_svm, py::arg("path"));

  m.def(
      "evolve",
      [](py::function fitness, int n_features, int population_size, int generations,
         double crossover_rate, double mutation_rate, int elitism, std::uint64_t master_seed,
         const std::string& strategy, int nts) {
        GaConfig cfg;
        cfg.population_size = population_size;
        cfg.generations = generations;
        cfg.crossover_rate = crossover_rate;
        cfg.mutation_rate = mutation_rate;
        cfg.elitism_count = elitism;
        cfg.master_seed = master_seed;
        cfg.strategy = strategy_from_name(strategy, nts);
        cfg.n_features = n_features;
        FitnessFn fn = [fitness](const FeatureMask& mask) {
          py::gil_scoped_acquire gil;
          return fitness(mask.to_string()).cast<double>();
        };
        GaResult result;
        {
          py::gil_scoped_release release;
          result = evolve(cfg, fn);
        }
        py::dict out;
        out["best_mask"] = result.best.mask.to_string();
        out["best_fitness"] = result.best.fitness.value();
        out["log"] = log_to_dict(result.log);
        out["hall_of_fame_size"] = result.hall_of_fame.size();
        return out;
      },
      py::arg("fitness"), py::arg("n_features") = 10, py::arg("population_size") = 20,
      py::arg("generations") = 10, py::arg("crossover_rate") = 0.9,
      py::arg("mutation_rate") = -1.0, py::arg("elitism") = 1, py::arg("master_seed") = 1,
      py::arg("strategy") = "tournament", py::arg("nts") = -1);

  m.def(
      "run_experiment",
      [](const std::string& technique, const std::string& out_dir, const std::string& model,
         const std::string& strategy, int population, int generations, int epochs, int runs,
         int ablate, std::uint64_t seed, bool paper_scale, bool standardize,
         const std::string& data, std::size_t records, std::size_t informative,
         std::size_t noise_features, double separation, double label_noise,
         std::uint64_t data_seed) {
        ExperimentConfig cfg;
        cfg.technique = technique;
        cfg.out_dir = out_dir;
        cfg.model = model;
        cfg.strategy = strategy;
        cfg.population = population;
        cfg.generations = generations;
        cfg.epochs = epochs;
        cfg.runs = runs;
        cfg.ablate = ablate;
        cfg.master_seed = seed;
        cfg.paper_scale = paper_scale;
        cfg.standardize = standardize;
        if (!data.empty()) cfg.csv_path = data;
        cfg.synthetic =
            SyntheticSpec{records, informative, noise_features, separation, label_noise,
                          data_seed};
        py::gil_scoped_release release;
        return run_experiment(cfg);
      },
      py::arg("technique"), py::arg("out_dir"), py::arg("model") = "svm",
      py::arg("strategy") = "tournament", py::arg("population") = -1,
      py::arg("generations") = -1, py::arg("epochs") = -1, py::arg("runs") = -1,
      py::arg("ablate") = 4, py::arg("seed") = 1, py::arg("paper_scale") = false,
      py::arg("standardize") = true, py::arg("data") = "", py::arg("records") = 620,
      py::arg("informative") = 4, py::arg("noise_features") = 6, py::arg("separation") = 1.0,
      py::arg("label_noise") = 0.0, py::arg("data_seed") = 1);
}
