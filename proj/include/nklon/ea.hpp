#ifndef NKLON_EA_HPP
#define NKLON_EA_HPP

#include <array>
#include <cstdint>
#include <vector>

#include "nklon/landscape.hpp"

namespace nklon {

// Generational GA with tournament-2 selection, 1-point crossover,
// per-bit mutation and elitism.
struct EaConfig {
  std::uint32_t pop_size = 100;
  double mutation_rate = 0.0;      // per bit
  double crossover_rate = 0.0;
  std::uint32_t tournament_size = 2;
  std::uint64_t eval_budget = 0;   // 0 selects ceil(0.1 * 2^n)
  std::uint32_t elitism = 1;
  std::uint64_t seed = 0;

  void validate(std::uint32_t n) const;
  std::uint64_t budget_for(std::uint32_t n) const;
};

struct EaResult {
  bool success = false;
  std::uint64_t evals_used = 0;
  std::uint64_t evals_to_success = 0;  // evals_used when no success
  std::vector<std::int64_t> best_trace;  // best fitness numerator per generation
};

// A run succeeds when any evaluated individual's fitness equals
// global_max exactly (with neutrality the optimum is a network, so
// fitness equality is the success predicate). Deterministic given
// cfg.seed.
EaResult run_ea(const NkInstance& inst, FitnessValue global_max,
                const EaConfig& cfg);

// Fraction of successful runs; run r uses the seed substream(cfg.seed, r).
double success_rate(const NkInstance& inst, FitnessValue global_max,
                    const EaConfig& cfg, std::uint32_t runs);

// The mutation/crossover grids explored by the tuner.
inline constexpr std::array<double, 6> kMutationGridC = {0.01, 0.1, 0.5, 1.0, 1.5, 2.0};
inline constexpr std::array<double, 6> kCrossoverGrid = {0.0, 0.2, 0.4, 0.6, 0.8, 1.0};

struct GridTuneResult {
  double mutation_c = 0.0;        // selected rate is mutation_c / n
  double crossover_rate = 0.0;
  double best_mean_rate = 0.0;
  // mean success rate per (mutation index, crossover index)
  std::array<std::array<double, 6>, 6> mean_rate{};
};

// Mean success rate over `instances` seeded landscapes for each of the
// 36 rate pairs; ties break toward lower crossover, then lower mutation.
GridTuneResult grid_tune(const ModelSpec& family, std::uint32_t instances,
                         std::uint32_t runs, const EaConfig& base);

}  // namespace nklon

#endif
