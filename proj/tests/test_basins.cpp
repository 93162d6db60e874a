#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <sstream>

#include "nklon/basins.hpp"
#include "nklon/errors.hpp"

using namespace nklon;

namespace {

ModelSpec spec_of(Variant v, std::uint32_t n, std::uint32_t k, std::uint64_t seed,
                  double p = 0.0, std::uint32_t q = 0) {
  ModelSpec s;
  s.variant = v;
  s.n = n;
  s.k = k;
  s.seed = seed;
  s.p = p;
  s.q = q;
  return s;
}

NkInstance constant_landscape(std::uint32_t n) {
  NkInstance inst = generate_instance(spec_of(Variant::Quantized, n, 1, 1, 0, 2));
  for (auto& t : inst.tables) std::fill(t.begin(), t.end(), 0);
  return inst;
}

void check_conservation(const NkInstance& inst, const BasinDistribution& dist,
                        double row_tol, double size_tol) {
  for (const auto& row : dist.dist) {
    double sum = 0.0;
    for (const auto& [id, p] : row) {
      CHECK(p > 0.0);
      CHECK(p <= 1.0 + 1e-12);
      sum += p;
    }
    CHECK(std::abs(sum - 1.0) < row_tol);
  }
  double total = 0.0;
  for (const double s : dist.basin_size) total += s;
  CHECK(std::abs(total - static_cast<double>(inst.space_size())) < size_tol);
}

double probability_of(const SparseRow& row, std::int32_t id) {
  for (const auto& [j, p] : row)
    if (j == id) return p;
  return 0.0;
}

}  // namespace

TEST_CASE("constant landscape absorbs every start into the single network") {
  const NkInstance inst = constant_landscape(6);
  const NeutralPartition part = neutral_partition(inst);
  const auto fit = inst.all_fitness();

  SplitMix64 rng(1);
  for (Genotype g = 0; g < 64; ++g) CHECK(hill_climb(part, fit, g, rng) == 0);

  const BasinDistribution exact = exact_basin_distributions(inst, part, fit);
  for (const auto& row : exact.dist) {
    REQUIRE(row.size() == 1);
    CHECK(row[0].first == 0);
    CHECK(row[0].second == 1.0);
  }
  CHECK(exact.basin_size[0] == doctest::Approx(64.0));

  const BasinDistribution mc = monte_carlo_basins(inst, part, fit, 3, 9);
  CHECK(mc.basin_size[0] == doctest::Approx(64.0));
  CHECK(!mc.exact);
}

TEST_CASE("a start inside a LONN is returned unchanged") {
  const NkInstance inst = generate_instance(spec_of(Variant::Quantized, 8, 2, 6, 0, 2));
  const NeutralPartition part = neutral_partition(inst);
  const auto fit = inst.all_fitness();
  SplitMix64 rng(2);
  for (Genotype g = 0; g < 256; ++g) {
    const std::int32_t li = part.lonn_index[part.nn_of[g]];
    if (li >= 0) CHECK(hill_climb(part, fit, g, rng) == li);
  }
}

TEST_CASE("all-distinct fitness gives indicator distributions") {
  const NkInstance inst = generate_instance(spec_of(Variant::Standard, 8, 3, 2024));
  const auto fit = inst.all_fitness();
  REQUIRE(std::set<std::int64_t>(fit.begin(), fit.end()).size() == fit.size());
  const NeutralPartition part = neutral_partition(inst, fit);
  const BasinDistribution exact = exact_basin_distributions(inst, part, fit);
  for (const auto& row : exact.dist) {
    REQUIRE(row.size() == 1);
    CHECK(row[0].second == 1.0);
  }
  // deterministic climber: a single sample reproduces the exact solution
  const BasinDistribution mc = monte_carlo_basins(inst, part, fit, 1, 5);
  for (Genotype g = 0; g < 256; ++g) CHECK(mc.dist[g] == exact.dist[g]);
}

TEST_CASE("LONN members always carry their own indicator row") {
  const NkInstance inst = generate_instance(spec_of(Variant::Probabilistic, 8, 2, 15, 0.8));
  const NeutralPartition part = neutral_partition(inst);
  const auto fit = inst.all_fitness();
  const BasinDistribution exact = exact_basin_distributions(inst, part, fit);
  for (Genotype g = 0; g < 256; ++g) {
    const std::int32_t li = part.lonn_index[part.nn_of[g]];
    if (li < 0) continue;
    REQUIRE(exact.dist[g].size() == 1);
    CHECK(exact.dist[g][0].first == li);
    CHECK(exact.dist[g][0].second == 1.0);
  }
}

TEST_CASE("plateau-heavy NKp instances conserve probability") {
  for (const double p : {0.8, 0.9}) {
    for (const std::uint64_t seed : {1ull, 2ull, 3ull}) {
      const NkInstance inst =
          generate_instance(spec_of(Variant::Probabilistic, 8, 2, seed, p));
      const NeutralPartition part = neutral_partition(inst);
      const BasinDistribution exact = exact_basin_distributions(inst, part);
      check_conservation(inst, exact, 1e-12, 1e-9);
    }
  }
}

TEST_CASE("a 1024-interior plateau goes through the sweep solver and still sums to 1") {
  // fitness = 1 iff bits 0 and 1 are both set: one LONN (the 1024-member
  // top network); the zero plateau has 2048 exits and 1024 interiors,
  // which exceeds the dense limit.
  NkInstance inst = generate_instance(spec_of(Variant::Quantized, 12, 1, 1, 0, 2));
  for (std::uint32_t gene = 0; gene < 12; ++gene) {
    inst.links[gene] = {gene == 0 ? 1u : 0u};
    std::fill(inst.tables[gene].begin(), inst.tables[gene].end(), 0);
  }
  inst.tables[0][3] = 1;  // own bit and partner bit both set
  REQUIRE(inst.fitness(3).numerator == 1);
  REQUIRE(inst.fitness(1).numerator == 0);

  const NeutralPartition part = neutral_partition(inst);
  REQUIRE(part.num_lonns() == 1);
  const BasinDistribution exact = exact_basin_distributions(inst, part);
  for (const auto& row : exact.dist) {
    REQUIRE(row.size() == 1);
    CHECK(row[0].second == doctest::Approx(1.0).epsilon(1e-12));
  }
  CHECK(exact.basin_size[0] == doctest::Approx(4096.0).epsilon(1e-9));
}

namespace {

// Whole-space oracle: build the climb's transition matrix over all 2^n
// states (LONN members absorbing) and run it to convergence. A wholly
// different route from the level-ordered production solver.
std::vector<std::vector<double>> matrix_oracle(const NkInstance& inst,
                                               const NeutralPartition& part,
                                               std::span<const std::int64_t> fit) {
  const std::size_t size = inst.space_size();
  const std::uint32_t n = inst.n();
  // rows: state -> distribution over LONNs, iterated via x <- P x
  std::vector<std::vector<double>> x(size,
                                     std::vector<double>(part.num_lonns(), 0.0));
  std::vector<std::vector<std::uint32_t>> argmax(size);
  for (Genotype g = 0; g < size; ++g) {
    const std::int32_t li = part.lonn_index[part.nn_of[g]];
    if (li >= 0) {
      x[g][li] = 1.0;
      continue;
    }
    std::int64_t fmax = std::numeric_limits<std::int64_t>::min();
    for (std::uint32_t b = 0; b < n; ++b) {
      const Genotype h = g ^ (Genotype{1} << b);
      if (fit[h] > fmax) {
        fmax = fit[h];
        argmax[g].clear();
        argmax[g].push_back(h);
      } else if (fit[h] == fmax) {
        argmax[g].push_back(h);
      }
    }
  }
  for (int iter = 0; iter < 4000; ++iter) {
    double worst = 0.0;
    for (Genotype g = 0; g < size; ++g) {
      if (argmax[g].empty()) continue;  // absorbing
      std::vector<double> next(part.num_lonns(), 0.0);
      for (const std::uint32_t h : argmax[g])
        for (std::size_t i = 0; i < next.size(); ++i)
          next[i] += x[h][i] / static_cast<double>(argmax[g].size());
      for (std::size_t i = 0; i < next.size(); ++i)
        worst = std::max(worst, std::abs(next[i] - x[g][i]));
      x[g] = std::move(next);
    }
    if (worst < 1e-14) break;
  }
  return x;
}

}  // namespace

TEST_CASE("level-ordered solver agrees with a whole-space matrix oracle") {
  const ModelSpec specs[] = {
      spec_of(Variant::Probabilistic, 8, 2, 7, 0.8),
      spec_of(Variant::Quantized, 8, 3, 11, 0, 2),
      spec_of(Variant::Standard, 8, 4, 13),
  };
  for (const ModelSpec& spec : specs) {
    const NkInstance inst = generate_instance(spec);
    const auto fit = inst.all_fitness();
    const NeutralPartition part = neutral_partition(inst, fit);
    const BasinDistribution exact = exact_basin_distributions(inst, part, fit);
    const auto oracle = matrix_oracle(inst, part, fit);
    for (Genotype g = 0; g < 256; ++g) {
      for (std::size_t i = 0; i < part.num_lonns(); ++i) {
        const double p = probability_of(exact.dist[g], static_cast<std::int32_t>(i));
        CHECK(std::abs(p - oracle[g][i]) < 1e-10);
      }
    }
  }
}

TEST_CASE("monte carlo frequencies match the exact solution on a 2-LONN landscape") {
  // smallest NKq seed whose landscape has exactly two LONNs
  NkInstance inst;
  NeutralPartition part;
  bool found = false;
  for (std::uint64_t seed = 1; seed <= 50 && !found; ++seed) {
    inst = generate_instance(spec_of(Variant::Quantized, 4, 1, seed, 0, 2));
    part = neutral_partition(inst);
    found = part.num_lonns() == 2;
  }
  REQUIRE(found);
  const auto fit = inst.all_fitness();
  const BasinDistribution exact = exact_basin_distributions(inst, part, fit);
  check_conservation(inst, exact, 1e-12, 1e-9);

  const std::uint32_t samples = 6250;  // 16 starts -> 1e5 climbs
  const BasinDistribution mc = monte_carlo_basins(inst, part, fit, samples, 77);
  for (Genotype g = 0; g < 16; ++g) {
    for (std::int32_t i = 0; i < 2; ++i) {
      const double p = probability_of(exact.dist[g], i);
      const double freq = probability_of(mc.dist[g], i);
      const double se = std::sqrt(p * (1.0 - p) / samples);
      CHECK(std::abs(freq - p) <= 3.0 * se + 1e-12);
    }
  }
}

TEST_CASE("monte carlo is an unbiased estimator of the exact distributions") {
  const NkInstance inst = generate_instance(spec_of(Variant::Quantized, 6, 2, 12, 0, 2));
  const NeutralPartition part = neutral_partition(inst);
  const auto fit = inst.all_fitness();
  const BasinDistribution exact = exact_basin_distributions(inst, part, fit);

  std::vector<std::vector<double>> mean(64,
                                        std::vector<double>(part.num_lonns(), 0.0));
  const int runs = 20;
  for (int run = 0; run < runs; ++run) {
    const BasinDistribution mc = monte_carlo_basins(inst, part, fit, 2000, 1000 + run);
    for (Genotype g = 0; g < 64; ++g)
      for (const auto& [i, f] : mc.dist[g]) mean[g][i] += f / runs;
  }
  for (Genotype g = 0; g < 64; ++g)
    for (std::size_t i = 0; i < part.num_lonns(); ++i)
      CHECK(std::abs(mean[g][i] - probability_of(exact.dist[g], static_cast<std::int32_t>(i)))
            < 0.01);
}

TEST_CASE("global-optimum basin size: exact within 3 sigma of monte carlo") {
  const NkInstance inst = generate_instance(spec_of(Variant::Quantized, 8, 3, 11, 0, 2));
  const auto fit = inst.all_fitness();
  const NeutralPartition part = neutral_partition(inst, fit);
  const BasinDistribution exact = exact_basin_distributions(inst, part, fit);
  const std::uint32_t samples = 2000;
  const BasinDistribution mc = monte_carlo_basins(inst, part, fit, samples, 31);

  const std::int64_t best =
      *std::max_element(part.nn_fitness.begin(), part.nn_fitness.end());
  std::int32_t opt = -1;
  for (std::size_t i = 0; i < part.num_lonns(); ++i)
    if (part.nn_fitness[part.lonn_network[i]] == best)
      opt = static_cast<std::int32_t>(i);
  REQUIRE(opt >= 0);
  // variance of the size estimate: sum over starts of p(1-p)/samples
  double variance = 0.0;
  for (Genotype g = 0; g < 256; ++g) {
    const double p = probability_of(exact.dist[g], opt);
    variance += p * (1.0 - p) / samples;
  }
  const double sigma = std::sqrt(variance);
  CHECK(std::abs(exact.basin_size[opt] - mc.basin_size[opt]) <= 3.0 * sigma + 1e-12);
}

TEST_CASE("monte carlo is deterministic given the seed") {
  const NkInstance inst = generate_instance(spec_of(Variant::Quantized, 6, 2, 4, 0, 2));
  const NeutralPartition part = neutral_partition(inst);
  const auto fit = inst.all_fitness();
  const BasinDistribution a = monte_carlo_basins(inst, part, fit, 100, 5);
  const BasinDistribution b = monte_carlo_basins(inst, part, fit, 100, 5);
  for (Genotype g = 0; g < 64; ++g) CHECK(a.dist[g] == b.dist[g]);
}

TEST_CASE("inconsistent partitions are detected rather than solved") {
  const NkInstance inst = constant_landscape(6);
  NeutralPartition part = neutral_partition(inst);
  const auto fit = inst.all_fitness();
  // erase the only LONN: every member now looks like an interior with no exit
  part.is_lonn[0] = 0;
  part.lonn_index[0] = -1;
  part.lonn_network.clear();
  CHECK_THROWS_AS(static_cast<void>(exact_basin_distributions(inst, part, fit)),
                  ConsistencyError);
  SplitMix64 rng(3);
  CHECK_THROWS_AS(static_cast<void>(hill_climb(part, fit, 0, rng, 100)),
                  ConvergenceError);
}

TEST_CASE("basin csv exports are well formed") {
  const NkInstance inst = generate_instance(spec_of(Variant::Quantized, 6, 1, 3, 0, 2));
  const NeutralPartition part = neutral_partition(inst);
  const BasinDistribution exact = exact_basin_distributions(inst, part);
  std::ostringstream sizes, dump;
  write_basin_sizes_csv(inst, part, exact, sizes);
  write_distribution_csv(exact, dump);
  const std::string sizes_text = sizes.str();
  CHECK(sizes_text.rfind("lonn_id,fitness,size\n", 0) == 0);
  CHECK(std::count(sizes_text.begin(), sizes_text.end(), '\n') ==
        static_cast<long>(part.num_lonns()) + 1);
  CHECK(dump.str().rfind("genotype,lonn_id,probability\n", 0) == 0);
}
