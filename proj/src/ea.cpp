#include "nklon/ea.hpp"

#include <algorithm>
#include <numeric>

#include "nklon/errors.hpp"
#include "nklon/rng.hpp"

namespace nklon {

void EaConfig::validate(std::uint32_t n) const {
  if (pop_size < 2) throw ParameterError("ea: pop_size must be >= 2");
  if (!(mutation_rate >= 0.0 && mutation_rate <= 1.0))
    throw ParameterError("ea: mutation_rate must lie in [0,1]");
  if (!(crossover_rate >= 0.0 && crossover_rate <= 1.0))
    throw ParameterError("ea: crossover_rate must lie in [0,1]");
  if (tournament_size < 1) throw ParameterError("ea: tournament_size must be >= 1");
  if (elitism >= pop_size) throw ParameterError("ea: elitism must be < pop_size");
  if (budget_for(n) < pop_size)
    throw ParameterError("ea: eval_budget must cover one population");
}

std::uint64_t EaConfig::budget_for(std::uint32_t n) const {
  if (eval_budget > 0) return eval_budget;
  const std::uint64_t space = std::uint64_t{1} << n;
  return (space + 9) / 10;  // ceil(space / 10)
}

EaResult run_ea(const NkInstance& inst, FitnessValue global_max,
                const EaConfig& cfg) {
  const std::uint32_t n = inst.n();
  cfg.validate(n);
  const std::uint64_t budget = cfg.budget_for(n);
  const Genotype mask = static_cast<Genotype>((std::uint64_t{1} << n) - 1);
  SplitMix64 rng(cfg.seed);

  EaResult res;
  std::vector<Genotype> pop(cfg.pop_size);
  std::vector<std::int64_t> fit(cfg.pop_size);

  auto evaluate = [&](Genotype g) {
    const std::int64_t f = inst.fitness(g).numerator;
    ++res.evals_used;
    if (!res.success && f == global_max.numerator) {
      res.success = true;
      res.evals_to_success = res.evals_used;
    }
    return f;
  };

  for (std::uint32_t i = 0; i < cfg.pop_size; ++i) {
    pop[i] = static_cast<Genotype>(rng.bounded(std::uint64_t{1} << n));
    fit[i] = evaluate(pop[i]);
  }
  res.best_trace.push_back(*std::max_element(fit.begin(), fit.end()));

  // Winner of a k-way tournament with replacement; ties resolve to the
  // earliest drawn contestant.
  auto tournament = [&]() {
    std::uint32_t winner = static_cast<std::uint32_t>(rng.bounded(cfg.pop_size));
    for (std::uint32_t t = 1; t < cfg.tournament_size; ++t) {
      const std::uint32_t rival = static_cast<std::uint32_t>(rng.bounded(cfg.pop_size));
      if (fit[rival] > fit[winner]) winner = rival;
    }
    return pop[winner];
  };

  auto mutate = [&](Genotype g) {
    if (cfg.mutation_rate <= 0.0) return g;
    for (std::uint32_t b = 0; b < n; ++b)
      if (rng.next_double() < cfg.mutation_rate) g ^= Genotype{1} << b;
    return g;
  };

  std::vector<std::uint32_t> rank(cfg.pop_size);
  std::vector<Genotype> next_pop;
  std::vector<std::int64_t> next_fit;
  while (!res.success && res.evals_used < budget) {
    // Elite indices: best fitness first, index order on ties.
    std::iota(rank.begin(), rank.end(), 0u);
    std::stable_sort(rank.begin(), rank.end(),
                     [&](std::uint32_t a, std::uint32_t b) { return fit[a] > fit[b]; });
    next_pop.clear();
    next_fit.clear();
    for (std::uint32_t e = 0; e < cfg.elitism; ++e) {
      next_pop.push_back(pop[rank[e]]);
      next_fit.push_back(fit[rank[e]]);
    }
    while (next_pop.size() < cfg.pop_size) {
      Genotype a = tournament();
      Genotype b = tournament();
      if (cfg.crossover_rate > 0.0 && rng.next_double() < cfg.crossover_rate && n >= 2) {
        const std::uint32_t cut = 1 + static_cast<std::uint32_t>(rng.bounded(n - 1));
        const Genotype low = static_cast<Genotype>((std::uint64_t{1} << cut) - 1);
        const Genotype ca = (a & low) | (b & ~low & mask);
        const Genotype cb = (b & low) | (a & ~low & mask);
        a = ca;
        b = cb;
      }
      next_pop.push_back(mutate(a));
      if (next_pop.size() < cfg.pop_size) next_pop.push_back(mutate(b));
    }
    for (std::size_t i = cfg.elitism; i < next_pop.size(); ++i)
      next_fit.push_back(evaluate(next_pop[i]));
    pop.swap(next_pop);
    fit.swap(next_fit);
    res.best_trace.push_back(*std::max_element(fit.begin(), fit.end()));
  }
  if (!res.success) res.evals_to_success = res.evals_used;
  return res;
}

double success_rate(const NkInstance& inst, FitnessValue global_max,
                    const EaConfig& cfg, std::uint32_t runs) {
  if (runs < 1) throw ParameterError("success_rate: runs must be >= 1");
  std::uint32_t successes = 0;
  for (std::uint32_t r = 0; r < runs; ++r) {
    EaConfig run_cfg = cfg;
    run_cfg.seed = substream_seed(cfg.seed, r);
    if (run_ea(inst, global_max, run_cfg).success) ++successes;
  }
  return static_cast<double>(successes) / static_cast<double>(runs);
}

GridTuneResult grid_tune(const ModelSpec& family, std::uint32_t instances,
                         std::uint32_t runs, const EaConfig& base) {
  if (instances < 1) throw ParameterError("grid_tune: instances must be >= 1");
  family.validate();

  // Landscapes are shared across the grid so pairs compete on the same
  // instances.
  std::vector<NkInstance> landscapes;
  std::vector<FitnessValue> maxima;
  landscapes.reserve(instances);
  for (std::uint32_t idx = 0; idx < instances; ++idx) {
    ModelSpec spec = family;
    spec.seed = substream_seed(family.seed, idx);
    landscapes.push_back(generate_instance(spec));
    const auto fit = landscapes.back().all_fitness();
    maxima.push_back(FitnessValue{*std::max_element(fit.begin(), fit.end())});
  }

  GridTuneResult res;
  res.best_mean_rate = -1.0;
  // EA streams live in their own namespace so they never collide with
  // the landscape-generation streams derived from the same base seed.
  const std::uint64_t ea_base = substream_seed(base.seed, 0xEA);
  for (std::size_t ci = 0; ci < kCrossoverGrid.size(); ++ci) {
    for (std::size_t mi = 0; mi < kMutationGridC.size(); ++mi) {
      EaConfig cfg = base;
      cfg.mutation_rate = kMutationGridC[mi] / static_cast<double>(family.n);
      cfg.crossover_rate = kCrossoverGrid[ci];
      double total = 0.0;
      for (std::uint32_t idx = 0; idx < instances; ++idx) {
        cfg.seed = substream_seed(ea_base, (ci * kMutationGridC.size() + mi) *
                                               instances + idx);
        total += success_rate(landscapes[idx], maxima[idx], cfg, runs);
      }
      const double mean = total / static_cast<double>(instances);
      res.mean_rate[mi][ci] = mean;
      // Strict improvement keeps the first-seen pair on ties, i.e. the
      // lowest crossover then the lowest mutation.
      if (mean > res.best_mean_rate) {
        res.best_mean_rate = mean;
        res.mutation_c = kMutationGridC[mi];
        res.crossover_rate = kCrossoverGrid[ci];
      }
    }
  }
  return res;
}

}  // namespace nklon
