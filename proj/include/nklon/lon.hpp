#ifndef NKLON_LON_HPP
#define NKLON_LON_HPP

#include <cstdint>
#include <ostream>
#include <vector>

#include "nklon/basins.hpp"
#include "nklon/landscape.hpp"
#include "nklon/neutrality.hpp"

namespace nklon {

struct LonNode {
  std::int32_t id = 0;              // LONN id from the partition
  std::int64_t fitness_num = 0;
  double fitness = 0.0;             // numerator / (n * scale)
  double basin_size = 0.0;
  bool is_global_optimum = false;
};

// Weighted directed graph over the LONNs. Arc weight w[i][j] is the
// probability that one uniform bit-flip from basin i, followed by the
// climb, lands in basin j. Self-loops are stored; rows sum to 1.
struct LocalOptimaNetwork {
  std::vector<LonNode> nodes;
  std::vector<SparseRow> arcs;      // per source, sorted by target
  std::int32_t global_optimum = -1; // node index
  bool exact = true;

  std::size_t num_nodes() const { return nodes.size(); }

  // Self-loop weight, 0 when absent.
  double self_weight(std::size_t i) const;
  // Strength: outgoing weight excluding the self-loop.
  double strength(std::size_t i) const;
  // Out-degree excluding the self-loop.
  std::size_t out_degree(std::size_t i) const;
  // Stored arcs with i != j; self-loops are not edges.
  std::size_t edge_count() const;
};

LocalOptimaNetwork build_lon(const NkInstance& inst, const NeutralPartition& part,
                             const BasinDistribution& dist);

// Edge list: src,dst,weight with 17 significant digits.
void write_edge_csv(const LocalOptimaNetwork& lon, std::ostream& out);
// GraphML with fitness, basin_size and is_global_optimum node attributes.
void write_graphml(const LocalOptimaNetwork& lon, std::ostream& out);
// DOT with node diameter proportional to basin size.
void write_dot(const LocalOptimaNetwork& lon, std::ostream& out);

}  // namespace nklon

#endif
