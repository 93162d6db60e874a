#include "nklon/lon.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>

#include "nklon/csvio.hpp"
#include "nklon/errors.hpp"

namespace nklon {

double LocalOptimaNetwork::self_weight(std::size_t i) const {
  const auto id = static_cast<std::int32_t>(i);
  for (const auto& [j, w] : arcs[i])
    if (j == id) return w;
  return 0.0;
}

double LocalOptimaNetwork::strength(std::size_t i) const {
  const auto id = static_cast<std::int32_t>(i);
  double s = 0.0;
  for (const auto& [j, w] : arcs[i])
    if (j != id) s += w;
  return s;
}

std::size_t LocalOptimaNetwork::out_degree(std::size_t i) const {
  const auto id = static_cast<std::int32_t>(i);
  std::size_t k = 0;
  for (const auto& [j, w] : arcs[i])
    if (j != id) ++k;
  return k;
}

std::size_t LocalOptimaNetwork::edge_count() const {
  std::size_t count = 0;
  for (std::size_t i = 0; i < arcs.size(); ++i)
    count += out_degree(i);
  return count;
}

LocalOptimaNetwork build_lon(const NkInstance& inst, const NeutralPartition& part,
                             const BasinDistribution& dist) {
  const std::uint64_t size = inst.space_size();
  const std::size_t count = part.num_lonns();
  if (dist.dist.size() != size || part.nn_of.size() != size ||
      dist.basin_size.size() != count)
    throw ConsistencyError("basin distribution does not match the partition");

  // accum[i][j] = sum over s of p_i(s) * p(s -> b_j), with
  // p(s -> b_j) = (1/n) * sum over neighbors h of p_j(h).
  // Dense rows up to kDenseArcLimit nodes, hash maps beyond; per-pair
  // accumulation order is source-ascending either way, so both paths
  // produce identical arcs.
  constexpr std::size_t kDenseArcLimit = 4096;
  const bool dense = count <= kDenseArcLimit;
  const double inv_n = 1.0 / static_cast<double>(inst.n());
  std::vector<std::vector<double>> accum(
      dense ? count : 0, std::vector<double>(dense ? count : 0, 0.0));
  std::vector<std::unordered_map<std::int32_t, double>> accum_sparse(
      dense ? 0 : count);
  std::vector<double> reach(count, 0.0);
  std::vector<std::int32_t> touched;
  for (std::uint64_t g = 0; g < size; ++g) {
    for (std::uint32_t b = 0; b < inst.n(); ++b) {
      const std::uint64_t h = g ^ (std::uint64_t{1} << b);
      for (const auto& [j, pj] : dist.dist[h]) {
        if (reach[j] == 0.0) touched.push_back(j);
        reach[j] += pj * inv_n;
      }
    }
    std::sort(touched.begin(), touched.end());
    for (const auto& [i, pi] : dist.dist[g]) {
      if (dense) {
        auto& row = accum[i];
        for (const std::int32_t j : touched) row[j] += pi * reach[j];
      } else {
        auto& row = accum_sparse[i];
        for (const std::int32_t j : touched) row[j] += pi * reach[j];
      }
    }
    for (const std::int32_t j : touched) reach[j] = 0.0;
    touched.clear();
  }

  LocalOptimaNetwork lon;
  lon.exact = dist.exact;
  lon.nodes.resize(count);
  lon.arcs.resize(count);
  std::int64_t best = std::numeric_limits<std::int64_t>::min();
  for (std::size_t i = 0; i < count; ++i) {
    auto& node = lon.nodes[i];
    node.id = static_cast<std::int32_t>(i);
    node.fitness_num = part.nn_fitness[part.lonn_network[i]];
    node.fitness = inst.to_real(FitnessValue{node.fitness_num});
    node.basin_size = dist.basin_size[i];
    best = std::max(best, node.fitness_num);

    SparseRow row;
    const double inv_size = 1.0 / dist.basin_size[i];
    if (dense) {
      for (std::size_t j = 0; j < count; ++j) {
        const double w = accum[i][j] * inv_size;
        if (w > 0.0) row.emplace_back(static_cast<std::int32_t>(j), w);
      }
    } else {
      for (const auto& [j, v] : accum_sparse[i]) {
        const double w = v * inv_size;
        if (w > 0.0) row.emplace_back(j, w);
      }
      std::sort(row.begin(), row.end());
    }
    lon.arcs[i] = std::move(row);
  }

  std::int32_t opt = -1;
  for (std::size_t i = 0; i < count; ++i) {
    if (lon.nodes[i].fitness_num == best) {
      if (opt >= 0)
        throw ConsistencyError(
            "two local optima networks share the maximal fitness; the global "
            "optimum is ambiguous");
      opt = static_cast<std::int32_t>(i);
    }
  }
  lon.global_optimum = opt;
  lon.nodes[opt].is_global_optimum = true;
  return lon;
}

void write_edge_csv(const LocalOptimaNetwork& lon, std::ostream& out) {
  out << "src,dst,weight\n";
  for (std::size_t i = 0; i < lon.arcs.size(); ++i)
    for (const auto& [j, w] : lon.arcs[i])
      out << i << ',' << j << ',' << fmt_double_17(w) << '\n';
}

void write_graphml(const LocalOptimaNetwork& lon, std::ostream& out) {
  out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
      << "<graphml xmlns=\"http://graphml.graphdrawing.org/xmlns\">\n"
      << "  <key id=\"fitness\" for=\"node\" attr.name=\"fitness\" attr.type=\"double\"/>\n"
      << "  <key id=\"basin_size\" for=\"node\" attr.name=\"basin_size\" attr.type=\"double\"/>\n"
      << "  <key id=\"is_global_optimum\" for=\"node\" attr.name=\"is_global_optimum\" attr.type=\"boolean\"/>\n"
      << "  <key id=\"weight\" for=\"edge\" attr.name=\"weight\" attr.type=\"double\"/>\n"
      << "  <graph id=\"lon\" edgedefault=\"directed\">\n";
  for (const auto& node : lon.nodes) {
    out << "    <node id=\"n" << node.id << "\">\n"
        << "      <data key=\"fitness\">" << fmt_double(node.fitness) << "</data>\n"
        << "      <data key=\"basin_size\">" << fmt_double(node.basin_size) << "</data>\n"
        << "      <data key=\"is_global_optimum\">"
        << (node.is_global_optimum ? "true" : "false") << "</data>\n"
        << "    </node>\n";
  }
  for (std::size_t i = 0; i < lon.arcs.size(); ++i) {
    for (const auto& [j, w] : lon.arcs[i]) {
      out << "    <edge source=\"n" << i << "\" target=\"n" << j << "\">"
          << "<data key=\"weight\">" << fmt_double(w) << "</data></edge>\n";
    }
  }
  out << "  </graph>\n</graphml>\n";
}

void write_dot(const LocalOptimaNetwork& lon, std::ostream& out) {
  double max_size = 0.0;
  for (const auto& node : lon.nodes) max_size = std::max(max_size, node.basin_size);
  out << "digraph lon {\n"
      << "  node [shape=circle, fixedsize=true];\n";
  for (const auto& node : lon.nodes) {
    const double diameter = 2.0 * node.basin_size / max_size;
    out << "  n" << node.id << " [width=" << fmt_double(diameter)
        << ", label=\"" << fmt_double(node.fitness) << '"';
    if (node.is_global_optimum) out << ", peripheries=2";
    out << "];\n";
  }
  char buf[32];
  for (std::size_t i = 0; i < lon.arcs.size(); ++i) {
    for (const auto& [j, w] : lon.arcs[i]) {
      std::snprintf(buf, sizeof(buf), "%.3g", w);
      out << "  n" << i << " -> n" << j << " [label=\"" << buf << "\"];\n";
    }
  }
  out << "}\n";
}

}  // namespace nklon
