#ifndef NKLON_BASINS_HPP
#define NKLON_BASINS_HPP

#include <cstdint>
#include <ostream>
#include <span>
#include <utility>
#include <vector>

#include "nklon/landscape.hpp"
#include "nklon/neutrality.hpp"
#include "nklon/rng.hpp"

namespace nklon {

// Sparse probability row: (lonn id, probability), sorted by id,
// entries strictly positive.
using SparseRow = std::vector<std::pair<std::int32_t, double>>;

// For every configuration, the distribution of the LONN reached by the
// stochastic hill climber; basin_size[i] is the summed probability mass
// of LONN i over the whole space.
struct BasinDistribution {
  std::vector<SparseRow> dist;     // indexed by genotype
  std::vector<double> basin_size;  // indexed by LONN id
  bool exact = true;               // false for Monte Carlo estimates
};

inline constexpr std::uint64_t kClimbStepCap = 10'000'000;

// One stochastic hill climb from start: repeatedly move to a uniformly
// chosen maximal-fitness neighbor (accepting equal fitness) until the
// current configuration lies in a LONN. Returns that LONN's id.
std::int32_t hill_climb(const NeutralPartition& part,
                        std::span<const std::int64_t> fit, Genotype start,
                        SplitMix64& rng,
                        std::uint64_t step_cap = kClimbStepCap);

// Exact absorption probabilities of the climb's Markov chain, computed
// level by level in descending fitness order. Plateau members that only
// see neutral maximal neighbors form per-network linear systems, solved
// densely up to kDensePlateauLimit unknowns and by sweep iteration
// beyond that.
inline constexpr std::size_t kDensePlateauLimit = 512;
inline constexpr double kPlateauResidual = 1e-12;
inline constexpr std::uint64_t kPlateauIterationCap = 200'000;

BasinDistribution exact_basin_distributions(const NkInstance& inst,
                                            const NeutralPartition& part,
                                            std::span<const std::int64_t> fit);
BasinDistribution exact_basin_distributions(const NkInstance& inst,
                                            const NeutralPartition& part);

// Empirical estimate: samples_per_start independent climbs from every
// configuration, one RNG substream per (start, replicate).
BasinDistribution monte_carlo_basins(const NkInstance& inst,
                                     const NeutralPartition& part,
                                     std::span<const std::int64_t> fit,
                                     std::uint32_t samples_per_start,
                                     std::uint64_t seed);

// CSV export: lonn_id,fitness,size.
void write_basin_sizes_csv(const NkInstance& inst, const NeutralPartition& part,
                           const BasinDistribution& dist, std::ostream& out);

// Full dump, one row per (genotype, lonn) pair: genotype,lonn_id,probability.
void write_distribution_csv(const BasinDistribution& dist, std::ostream& out);

}  // namespace nklon

#endif
