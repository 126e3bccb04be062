#include "featsel/ga.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <unordered_set>

#include "featsel/parallel.hpp"

namespace featsel {

namespace {

constexpr double kFitnessFloor = 1e-6;

double scaled_fitness(const Chromosome& ch) {
  return std::max(ch.fitness.value(), kFitnessFloor);
}

// fitness descending, ties toward the lower mask value
bool fitter(const Chromosome& a, const Chromosome& b) {
  const double fa = a.fitness.value();
  const double fb = b.fitness.value();
  if (fa != fb) return fa > fb;
  return a.mask.value() < b.mask.value();
}

}  // namespace

void GaConfig::validate() const {
  if (population_size < 4) throw std::invalid_argument("ga: population_size must be >= 4");
  if (generations < 1) throw std::invalid_argument("ga: generations must be >= 1");
  if (crossover_rate < 0.0 || crossover_rate > 1.0) {
    throw std::invalid_argument("ga: crossover_rate must lie in [0,1]");
  }
  if (mutation_rate > 1.0) throw std::invalid_argument("ga: mutation_rate must lie in [0,1]");
  if (elitism_count < 0 || elitism_count > population_size) {
    throw std::invalid_argument("ga: elitism_count out of range");
  }
  if (n_features < 1) throw std::invalid_argument("ga: n_features must be >= 1");
  if (const auto* t = std::get_if<TournamentSelection>(&strategy)) {
    if (t->nts != -1 && (t->nts < 2 || t->nts > population_size)) {
      throw std::invalid_argument("ga: tournament nts must lie in [2, population_size]");
    }
  }
}

int GaConfig::resolved_nts() const {
  const auto* t = std::get_if<TournamentSelection>(&strategy);
  if (t == nullptr) return -1;
  if (t->nts != -1) return t->nts;
  const int nts = static_cast<int>(std::llround(0.6 * population_size));
  return std::clamp(nts, 2, population_size);
}

double GaConfig::resolved_mutation_rate() const {
  if (mutation_rate >= 0.0) return mutation_rate;
  return 1.0 / static_cast<double>(n_features);
}

double MemoizedFitness::operator()(const FeatureMask& mask) {
  const std::string key = mask.to_string();
  auto it = cache_.find(key);
  if (it != cache_.end()) return it->second;
  const double value = fn_(mask);
  cache_.emplace(key, value);
  ++invocations_;
  return value;
}

void MemoizedFitness::insert(const FeatureMask& mask, double value) {
  if (cache_.emplace(mask.to_string(), value).second) ++invocations_;
}

FeatureMask random_mask(std::size_t n_features, Rng& rng) {
  std::vector<bool> bits(n_features);
  while (true) {
    bool any = false;
    for (std::size_t i = 0; i < n_features; ++i) {
      bits[i] = rng.bernoulli(0.5);
      any = any || bits[i];
    }
    if (any) return FeatureMask(bits);
  }
}

std::vector<Chromosome> init_population(const GaConfig& cfg) {
  cfg.validate();
  std::vector<Chromosome> pop;
  pop.reserve(static_cast<std::size_t>(cfg.population_size));
  for (int i = 0; i < cfg.population_size; ++i) {
    Rng rng(derive_seed(cfg.master_seed, 0x100 + static_cast<std::uint64_t>(i)));
    pop.push_back({random_mask(static_cast<std::size_t>(cfg.n_features), rng), std::nullopt});
  }
  return pop;
}

std::size_t select_proportional(const std::vector<Chromosome>& pop, Rng& rng) {
  if (pop.empty()) throw std::invalid_argument("select_proportional: empty population");
  double total = 0.0;
  for (const auto& ch : pop) total += scaled_fitness(ch);
  const double target = rng.uniform01() * total;
  double cumulative = 0.0;
  for (std::size_t i = 0; i < pop.size(); ++i) {
    cumulative += scaled_fitness(pop[i]);
    if (target < cumulative) return i;
  }
  return pop.size() - 1;  // guards against rounding at the top end
}

std::size_t select_tournament(const std::vector<Chromosome>& pop, int nts, Rng& rng) {
  const int n = static_cast<int>(pop.size());
  if (nts < 2 || nts > n) throw std::invalid_argument("select_tournament: nts out of range");
  // Partial Fisher-Yates gives nts distinct entrants.
  std::vector<std::size_t> idx(pop.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::size_t best = pop.size();
  for (int t = 0; t < nts; ++t) {
    const std::size_t pick = t + rng.below(idx.size() - t);
    std::swap(idx[t], idx[pick]);
    const std::size_t candidate = idx[t];
    if (best == pop.size() || fitter(pop[candidate], pop[best])) best = candidate;
  }
  return best;
}

std::pair<Chromosome, std::size_t> select_hall_of_fame(const std::vector<Chromosome>& hof,
                                                       const std::vector<Chromosome>& pop,
                                                       Rng& rng) {
  if (hof.empty()) throw std::invalid_argument("select_hall_of_fame: empty hall of fame");
  const Chromosome parent_a = hof[rng.below(hof.size())];
  const std::size_t parent_b = select_proportional(pop, rng);
  return {parent_a, parent_b};
}

std::pair<FeatureMask, FeatureMask> single_point_crossover(const FeatureMask& a,
                                                           const FeatureMask& b,
                                                           std::size_t cut) {
  if (a.size() != b.size()) throw std::invalid_argument("crossover: mask length mismatch");
  if (cut < 1 || cut >= a.size()) throw std::invalid_argument("crossover: cut out of range");
  std::vector<bool> c1(a.size());
  std::vector<bool> c2(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    c1[i] = i < cut ? a.test(i) : b.test(i);
    c2[i] = i < cut ? b.test(i) : a.test(i);
  }
  return {FeatureMask(c1), FeatureMask(c2)};
}

std::pair<FeatureMask, FeatureMask> crossover(const FeatureMask& a, const FeatureMask& b,
                                              double rate, Rng& rng,
                                              std::size_t* repair_count) {
  if (a.size() != b.size()) throw std::invalid_argument("crossover: mask length mismatch");
  std::pair<FeatureMask, FeatureMask> children{a, b};
  if (a.size() > 1 && rng.bernoulli(rate)) {
    const std::size_t cut = 1 + rng.below(a.size() - 1);
    children = single_point_crossover(a, b, cut);
  }
  for (FeatureMask* child : {&children.first, &children.second}) {
    if (child->none()) {
      *child = random_mask(a.size(), rng);
      if (repair_count != nullptr) ++*repair_count;
    }
  }
  return children;
}

FeatureMask mutate(const FeatureMask& mask, double rate, Rng& rng, std::size_t* repair_count) {
  if (rate < 0.0 || rate > 1.0) throw std::invalid_argument("mutate: rate must lie in [0,1]");
  std::vector<bool> bits(mask.size());
  for (std::size_t i = 0; i < mask.size(); ++i) {
    const bool flip = rng.bernoulli(rate);
    bits[i] = flip ? !mask.test(i) : mask.test(i);
  }
  FeatureMask out(bits);
  if (out.none()) {
    out = random_mask(mask.size(), rng);
    if (repair_count != nullptr) ++*repair_count;
  }
  return out;
}

GaResult evolve(const GaConfig& cfg, const FitnessFn& fitness) {
  cfg.validate();
  if (!fitness) throw std::invalid_argument("evolve: missing fitness function");

  const double mutation_rate = cfg.resolved_mutation_rate();
  const int nts = cfg.resolved_nts();

  std::vector<Chromosome> pop = init_population(cfg);
  Rng rng(derive_seed(cfg.master_seed, 0xB4EED));

  MemoizedFitness memo(fitness);
  GaResult result;
  result.log.generations.reserve(static_cast<std::size_t>(cfg.generations));

  bool have_best = false;
  for (int gen = 0; gen < cfg.generations; ++gen) {
    // Evaluate cache misses in a batch; fitness is a pure function of the
    // mask, so worker scheduling cannot change any value.
    std::vector<std::size_t> miss_index;
    std::unordered_set<std::string> seen;
    for (std::size_t i = 0; i < pop.size(); ++i) {
      if (!memo.contains(pop[i].mask) && seen.insert(pop[i].mask.to_string()).second) {
        miss_index.push_back(i);
      }
    }
    std::vector<double> miss_values(miss_index.size());
    parallel_for(miss_index.size(),
                 [&](std::size_t k) { miss_values[k] = fitness(pop[miss_index[k]].mask); });
    const std::size_t gen_evals = miss_index.size();
    for (std::size_t k = 0; k < miss_index.size(); ++k) {
      memo.insert(pop[miss_index[k]].mask, miss_values[k]);
    }
    for (auto& ch : pop) ch.fitness = memo(ch.mask);

    GenerationStats stats;
    std::size_t best_i = 0;
    double mean = 0.0;
    for (std::size_t i = 0; i < pop.size(); ++i) {
      mean += pop[i].fitness.value();
      if (fitter(pop[i], pop[best_i])) best_i = i;
    }
    stats.best_mask = pop[best_i].mask;
    stats.best_fitness = pop[best_i].fitness.value();
    stats.mean_fitness = mean / static_cast<double>(pop.size());
    stats.evaluations = gen_evals;
    result.log.generations.push_back(stats);
    result.log.total_evaluations += gen_evals;
    result.hall_of_fame.push_back(pop[best_i]);

    if (!have_best || fitter(pop[best_i], result.best)) {
      result.best = pop[best_i];
      have_best = true;
    }

    if (gen + 1 == cfg.generations) break;

    // Next generation: elites copied unchanged, offspring fill the rest.
    std::vector<Chromosome> ranked = pop;
    std::sort(ranked.begin(), ranked.end(), fitter);
    std::vector<Chromosome> next(ranked.begin(), ranked.begin() + cfg.elitism_count);
    next.reserve(pop.size());
    while (next.size() < pop.size()) {
      FeatureMask pa;
      FeatureMask pb;
      if (std::holds_alternative<ProportionalSelection>(cfg.strategy)) {
        pa = pop[select_proportional(pop, rng)].mask;
        pb = pop[rng.below(pop.size())].mask;  // the partner is drawn at random
      } else if (std::holds_alternative<TournamentSelection>(cfg.strategy)) {
        pa = pop[select_tournament(pop, nts, rng)].mask;
        pb = pop[select_tournament(pop, nts, rng)].mask;
      } else {
        auto [a, b] = select_hall_of_fame(result.hall_of_fame, pop, rng);
        pa = a.mask;
        pb = pop[b].mask;
      }
      auto [c1, c2] = crossover(pa, pb, cfg.crossover_rate, rng, &result.log.repair_count);
      next.push_back({mutate(c1, mutation_rate, rng, &result.log.repair_count), std::nullopt});
      if (next.size() < pop.size()) {
        next.push_back({mutate(c2, mutation_rate, rng, &result.log.repair_count), std::nullopt});
      }
    }
    pop = std::move(next);
  }

  result.log.best_mask = result.best.mask;
  result.log.best_fitness = result.best.fitness.value();
  return result;
}

FitnessFn make_mlp_evaluator(Dataset fit, Dataset validation, std::vector<int> hidden,
                             TrainConfig cfg, std::shared_ptr<EvaluatorStats> stats) {
  fit.validate();
  validation.validate();
  if (fit.n_features() != validation.n_features()) {
    throw std::invalid_argument("make_mlp_evaluator: split dimension mismatch");
  }
  auto fit_ptr = std::make_shared<const Dataset>(std::move(fit));
  auto val_ptr = std::make_shared<const Dataset>(std::move(validation));
  return [fit_ptr, val_ptr, hidden = std::move(hidden), cfg,
          stats = std::move(stats)](const FeatureMask& mask) -> double {
    const Dataset masked_fit = apply_mask(*fit_ptr, mask);
    const Dataset masked_val = apply_mask(*val_ptr, mask);
    const MlpArchitecture arch = make_architecture(static_cast<int>(mask.count()), hidden);
    try {
      auto [params, report] = train_mlp(masked_fit, Dataset{masked_fit.feature_names, {}},
                                        arch, cfg);
      (void)report;
      return evaluate(params, masked_val);
    } catch (const TrainingDivergence&) {
      if (stats) stats->divergences.fetch_add(1);
      return 0.0;
    }
  };
}

FitnessFn make_svm_evaluator(Dataset fit, Dataset validation, KernelSpec kernel, SvmConfig cfg,
                             std::shared_ptr<EvaluatorStats> stats) {
  fit.validate();
  validation.validate();
  if (fit.n_features() != validation.n_features()) {
    throw std::invalid_argument("make_svm_evaluator: split dimension mismatch");
  }
  auto fit_ptr = std::make_shared<const Dataset>(std::move(fit));
  auto val_ptr = std::make_shared<const Dataset>(std::move(validation));
  (void)stats;  // SMO flags non-convergence on the model instead of throwing
  return [fit_ptr, val_ptr, kernel, cfg](const FeatureMask& mask) -> double {
    const Dataset masked_fit = apply_mask(*fit_ptr, mask);
    const Dataset masked_val = apply_mask(*val_ptr, mask);
    const SvmModel model = train_smo(masked_fit, kernel, cfg);  // gamma auto follows the mask
    return evaluate(model, masked_val);
  };
}

}  // namespace featsel
