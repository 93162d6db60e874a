#ifndef NKLON_NEUTRALITY_HPP
#define NKLON_NEUTRALITY_HPP

#include <cstdint>
#include <ostream>
#include <span>
#include <vector>

#include "nklon/landscape.hpp"

namespace nklon {

// Partition of the search space into neutral networks: connected
// components of the equal-fitness Hamming-1 graph. A network is a LONN
// (local-optimum neutral network) when no member has a strictly fitter
// neighbor.
struct NeutralPartition {
  std::uint32_t n = 0;                      // genes
  std::vector<std::int32_t> nn_of;          // genotype -> network id
  std::vector<std::int64_t> nn_fitness;     // per network: fitness numerator
  std::vector<std::uint32_t> nn_size;       // per network: member count
  std::vector<std::uint8_t> is_lonn;        // per network
  std::vector<std::int32_t> lonn_index;     // per network: dense LONN id or -1
  std::vector<std::int32_t> lonn_network;   // per LONN id: network id

  std::size_t num_networks() const { return nn_fitness.size(); }
  std::size_t num_lonns() const { return lonn_network.size(); }
};

// Exhaustive partition via one union-find pass over the Hamming-1
// edges. Network ids are assigned by lowest member genotype, so the
// labeling is independent of traversal order.
NeutralPartition neutral_partition(const NkInstance& inst,
                                   std::span<const std::int64_t> fit);
NeutralPartition neutral_partition(const NkInstance& inst);

// Number of neighbors of g with exactly equal fitness.
std::uint32_t neutral_degree(const NkInstance& inst, Genotype g);

// True when the maximal-fitness configurations form a single neutral
// network. Downstream network construction treats a tied optimum as an
// error, so experiment batches screen instances with this probe.
bool has_unique_global_optimum(const NkInstance& inst,
                               std::span<const std::int64_t> fit);

// CSV export: nn_id,fitness,size,is_lonn.
void write_nn_summary_csv(const NkInstance& inst, const NeutralPartition& part,
                          std::ostream& out);

}  // namespace nklon

#endif
