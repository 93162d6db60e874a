#ifndef NKLON_EXPERIMENT_HPP
#define NKLON_EXPERIMENT_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "nklon/basins.hpp"
#include "nklon/ea.hpp"
#include "nklon/landscape.hpp"
#include "nklon/lon.hpp"
#include "nklon/metrics.hpp"
#include "nklon/neutrality.hpp"

namespace nklon {

inline constexpr const char* kArtifactVersion = "0.1.0";
inline constexpr const char* kPrngName = "splitmix64";

// Exact mode refuses n beyond this without force (hours of runtime and
// gigabytes of distributions past it).
inline constexpr std::uint32_t kDeskScaleMaxN = 14;

// The full pipeline for one instance.
struct AnalysisResult {
  NeutralPartition partition;
  BasinDistribution distribution;
  LocalOptimaNetwork lon;
  MetricsReport metrics;
};

AnalysisResult analyze_instance(const NkInstance& inst, bool exact,
                                std::uint32_t mc_samples, std::uint64_t mc_seed);

// A batch over one model family: the cells are the cross product of
// params (q values, or p in parts-per-billion; {0} for the standard
// model) and k values.
struct ExperimentPlan {
  Variant variant = Variant::Standard;
  std::vector<std::int64_t> params;   // per-cell neutrality parameter
  std::vector<std::uint32_t> ks;
  std::uint32_t n = 0;
  Neighborhood neighborhood = Neighborhood::Random;
  std::uint32_t instances = 30;
  std::uint64_t base_seed = 0;
  bool exact = true;
  std::uint32_t mc_samples = 1000;
  std::string outdir;
  bool force = false;       // allow n > kDeskScaleMaxN in exact mode
  bool export_lon = false;  // per-instance edge list / GraphML / DOT
  std::uint32_t workers = 0;  // 0 = NKLON_WORKERS env or hardware

  void validate() const;
  std::string cell_name(std::int64_t param, std::uint32_t k) const;
  // Generation seed for one instance; a pure function of the identifying
  // fields, so re-runs and reordered grids agree.
  std::uint64_t instance_seed(std::int64_t param, std::uint32_t k,
                              std::uint32_t index) const;
};

// A cell's batch: the first plan.instances counter-derived seeds whose
// landscape has a unique global-optimum network (a tied optimum is an
// error downstream, so batches are defined over tie-free instances).
std::vector<std::uint64_t> screened_cell_seeds(const ExperimentPlan& plan,
                                               std::int64_t param,
                                               std::uint32_t k);

// Runs every cell (skipping completed ones), then assembles metrics.csv,
// aggregate.csv and manifest.json under plan.outdir.
void orchestrate(const ExperimentPlan& plan);

// Per-cell means and sample standard deviations of the metric columns;
// input is a parsed metrics.csv.
std::string aggregate_metrics(const struct CsvTable& metrics);

// EA campaign over the same cell grid: success_rate per instance at the
// given rates. Writes ea_results.csv into plan.outdir.
struct EaCampaign {
  ExperimentPlan plan;       // exact/mc fields unused
  double mutation_c = 1.0;   // per-bit rate = mutation_c / n
  double crossover_rate = 0.0;
  std::uint32_t runs = 100;
  bool tune = false;  // pick rates per cell by grid_tune first
  std::uint32_t tune_runs = 30;
  std::uint32_t pop_size = 100;
  std::uint64_t eval_budget = 0;  // 0 = ceil(0.1 * 2^n)
  std::uint32_t elitism = 1;
};

void run_ea_campaign(const EaCampaign& campaign);

}  // namespace nklon

#endif
