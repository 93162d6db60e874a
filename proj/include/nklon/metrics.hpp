#ifndef NKLON_METRICS_HPP
#define NKLON_METRICS_HPP

#include <array>
#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "nklon/lon.hpp"

namespace nklon {

inline constexpr std::size_t kWeightHistogramBins = 40;

struct ClusteringResult {
  std::vector<double> per_node;   // 0 for nodes with out-degree < 2
  double mean = 0.0;              // over all nodes
  std::size_t low_degree = 0;     // nodes with out-degree < 2
};

struct DisparityResult {
  std::vector<double> per_node;   // undefined entries hold 0
  double mean = 0.0;              // over nodes with positive strength
  std::size_t excluded = 0;       // nodes with zero strength
};

struct PathStats {
  double avg_path_length = 0.0;   // over finite ordered pairs i != j
  std::size_t finite_pairs = 0;
  std::size_t unreachable_pairs = 0;
  double avg_path_to_optimum = 0.0;
  std::size_t sources_to_optimum = 0;
  std::size_t unreachable_to_optimum = 0;
};

struct BasinStats {
  double mean = 0.0;
  double sd = 0.0;                // sample sd, 0 for a single node
  double global_optimum_share = 0.0;
  std::array<double, kWeightHistogramBins> weight_histogram{};  // off-diagonal arc counts
};

// One flat record of every scalar observable for one instance.
struct MetricsReport {
  std::string model;
  std::uint32_t n = 0;
  std::uint32_t k = 0;
  std::int64_t param = 0;
  std::uint64_t seed = 0;
  bool exact = true;

  std::size_t n_nodes = 0;
  std::size_t n_edges = 0;
  double mean_wii = 0.0;
  double mean_wij_offdiag = 0.0;
  double mean_basin_size = 0.0;
  double sd_basin_size = 0.0;
  double global_optimum_basin_share = 0.0;
  std::optional<bool> lognormal_pass;              // needs >= 3 nodes, variance
  std::optional<double> fitness_size_correlation;  // Pearson(fitness, ln size)
  std::optional<double> fitness_size_corr_p;
  double cw_mean = 0.0;
  std::size_t cw_low_degree = 0;
  double disparity_mean = 0.0;
  std::size_t disparity_excluded = 0;
  double avg_path_length = 0.0;
  std::size_t path_unreachable_pairs = 0;
  double avg_path_to_optimum = 0.0;
  std::size_t unreachable_to_optimum = 0;
  std::array<double, kWeightHistogramBins> weight_histogram{};
};

// Weighted clustering coefficient
//   c_w(i) = 1/(s_i (k_i - 1)) * sum over ordered pairs (j,h) of
//            (w_ij + w_ih)/2 * a_ij * a_jh * a_hi
// with self-loops excluded from a, s and k. Adjacency follows out-arcs.
ClusteringResult weighted_clustering(const LocalOptimaNetwork& lon);

// Disparity Y2(i) = sum_j (w_ij / s_i)^2 over j != i.
DisparityResult disparity(const LocalOptimaNetwork& lon);

// Shortest paths under arc length 1/w_ij (self-loops ignored);
// unreachable pairs are excluded from the averages and counted.
PathStats shortest_paths(const LocalOptimaNetwork& lon);

// Basin size moments, global-optimum share and the off-diagonal weight
// histogram (log-spaced bins over [1/(n·2^n), 1]).
BasinStats basin_statistics(const NkInstance& inst, const LocalOptimaNetwork& lon);

// Pearson correlation of (fitness, ln basin_size); nullopt when fewer
// than 2 nodes or a degenerate variance.
std::optional<double> fitness_size_correlation(const LocalOptimaNetwork& lon);

MetricsReport compute_metrics(const NkInstance& inst, const LocalOptimaNetwork& lon);

// metrics.csv: fixed column order, header + one row per instance.
std::string metrics_csv_header();
std::string metrics_csv_row(const MetricsReport& report);

// Per-node detail: lonn_id,fitness,basin_size,cw,y2.
void write_per_node_csv(const LocalOptimaNetwork& lon, std::ostream& out);

}  // namespace nklon

#endif
