#include "nklon/neutrality.hpp"

#include <algorithm>
#include <numeric>

#include "nklon/csvio.hpp"
#include "nklon/errors.hpp"

namespace nklon {

namespace {

// Union-find with union by size and path compression. "dominated" rides
// on the roots: a set is dominated once any member has a strictly
// fitter neighbor, and the flag is merged on union.
class DominanceUnionFind {
 public:
  explicit DominanceUnionFind(std::size_t size)
      : parent_(size), size_(size, 1), dominated_(size, 0) {
    std::iota(parent_.begin(), parent_.end(), 0u);
  }

  std::uint32_t find(std::uint32_t x) {
    std::uint32_t root = x;
    while (parent_[root] != root) root = parent_[root];
    while (parent_[x] != root) {
      std::uint32_t next = parent_[x];
      parent_[x] = root;
      x = next;
    }
    return root;
  }

  void unite(std::uint32_t a, std::uint32_t b) {
    a = find(a);
    b = find(b);
    if (a == b) return;
    if (size_[a] < size_[b]) std::swap(a, b);
    parent_[b] = a;
    size_[a] += size_[b];
    dominated_[a] = dominated_[a] | dominated_[b];
  }

  void mark_dominated(std::uint32_t x) { dominated_[find(x)] = 1; }
  bool dominated(std::uint32_t root) const { return dominated_[root] != 0; }

 private:
  std::vector<std::uint32_t> parent_;
  std::vector<std::uint32_t> size_;
  std::vector<std::uint8_t> dominated_;
};

}  // namespace

NeutralPartition neutral_partition(const NkInstance& inst,
                                   std::span<const std::int64_t> fit) {
  const std::uint32_t n = inst.n();
  if (n > kMaxEnumerableN)
    throw CapacityError("n=" + std::to_string(n) + " exceeds the enumeration cap of " +
                        std::to_string(kMaxEnumerableN));
  const std::uint64_t size = inst.space_size();
  if (fit.size() != size)
    throw ConsistencyError("fitness table size does not match 2^n");

  DominanceUnionFind uf(size);
  // One pass over the undirected Hamming-1 edges (g, g|bit), g with bit clear.
  for (std::uint64_t g = 0; g < size; ++g) {
    for (std::uint32_t b = 0; b < n; ++b) {
      if (g & (std::uint64_t{1} << b)) continue;
      const std::uint64_t h = g | (std::uint64_t{1} << b);
      if (fit[g] == fit[h]) {
        uf.unite(static_cast<std::uint32_t>(g), static_cast<std::uint32_t>(h));
      } else if (fit[g] < fit[h]) {
        uf.mark_dominated(static_cast<std::uint32_t>(g));
      } else {
        uf.mark_dominated(static_cast<std::uint32_t>(h));
      }
    }
  }

  NeutralPartition part;
  part.n = n;
  part.nn_of.assign(size, -1);
  std::vector<std::int32_t> id_of_root(size, -1);
  for (std::uint64_t g = 0; g < size; ++g) {
    const std::uint32_t root = uf.find(static_cast<std::uint32_t>(g));
    std::int32_t id = id_of_root[root];
    if (id < 0) {
      id = static_cast<std::int32_t>(part.nn_fitness.size());
      id_of_root[root] = id;
      part.nn_fitness.push_back(fit[g]);
      part.nn_size.push_back(0);
      part.is_lonn.push_back(uf.dominated(root) ? 0 : 1);
    }
    part.nn_of[g] = id;
    ++part.nn_size[id];
  }

  part.lonn_index.assign(part.num_networks(), -1);
  for (std::size_t i = 0; i < part.num_networks(); ++i) {
    if (part.is_lonn[i]) {
      part.lonn_index[i] = static_cast<std::int32_t>(part.lonn_network.size());
      part.lonn_network.push_back(static_cast<std::int32_t>(i));
    }
  }
  return part;
}

NeutralPartition neutral_partition(const NkInstance& inst) {
  if (inst.n() > kMaxEnumerableN)
    throw CapacityError("n=" + std::to_string(inst.n()) +
                        " exceeds the enumeration cap of " +
                        std::to_string(kMaxEnumerableN));
  const auto fit = inst.all_fitness();
  return neutral_partition(inst, fit);
}

bool has_unique_global_optimum(const NkInstance& inst,
                               std::span<const std::int64_t> fit) {
  const std::uint64_t size = inst.space_size();
  if (fit.size() != size)
    throw ConsistencyError("fitness table size does not match 2^n");
  const std::int64_t best = *std::max_element(fit.begin(), fit.end());
  std::uint64_t members = 0;
  Genotype first = 0;
  for (std::uint64_t g = 0; g < size; ++g) {
    if (fit[g] == best) {
      if (members == 0) first = static_cast<Genotype>(g);
      ++members;
    }
  }
  // BFS within the maximal set; unique optimum iff it is connected.
  std::vector<std::uint8_t> seen(size, 0);
  std::vector<Genotype> stack{first};
  seen[first] = 1;
  std::uint64_t reached = 1;
  while (!stack.empty()) {
    const Genotype g = stack.back();
    stack.pop_back();
    for (std::uint32_t b = 0; b < inst.n(); ++b) {
      const Genotype h = g ^ (Genotype{1} << b);
      if (!seen[h] && fit[h] == best) {
        seen[h] = 1;
        ++reached;
        stack.push_back(h);
      }
    }
  }
  return reached == members;
}

std::uint32_t neutral_degree(const NkInstance& inst, Genotype g) {
  const std::int64_t f = inst.fitness(g).numerator;
  std::uint32_t count = 0;
  for (std::uint32_t b = 0; b < inst.n(); ++b)
    if (inst.fitness(g ^ (Genotype{1} << b)).numerator == f) ++count;
  return count;
}

void write_nn_summary_csv(const NkInstance& inst, const NeutralPartition& part,
                          std::ostream& out) {
  out << "nn_id,fitness,size,is_lonn\n";
  for (std::size_t i = 0; i < part.num_networks(); ++i) {
    out << i << ',' << fmt_double(inst.to_real(FitnessValue{part.nn_fitness[i]}))
        << ',' << part.nn_size[i] << ',' << int(part.is_lonn[i]) << '\n';
  }
}

}  // namespace nklon
