#include "nklon/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "nklon/csvio.hpp"
#include "nklon/stats.hpp"

namespace nklon {

namespace {

// Directed adjacency without self-loops; membership by binary search.
struct Adjacency {
  std::size_t count;
  std::vector<std::vector<std::int32_t>> out;  // sorted targets, no self
  std::vector<std::vector<std::int32_t>> in;   // sorted sources, no self

  explicit Adjacency(const LocalOptimaNetwork& lon)
      : count(lon.num_nodes()), out(count), in(count) {
    for (std::size_t i = 0; i < count; ++i) {
      for (const auto& [j, w] : lon.arcs[i]) {
        if (j == static_cast<std::int32_t>(i)) continue;
        out[i].push_back(j);
        in[j].push_back(static_cast<std::int32_t>(i));
      }
    }
    for (auto& row : in) std::sort(row.begin(), row.end());
  }

  bool has(std::int32_t from, std::int32_t to) const {
    const auto& row = out[static_cast<std::size_t>(from)];
    return std::binary_search(row.begin(), row.end(), to);
  }
};

}  // namespace

ClusteringResult weighted_clustering(const LocalOptimaNetwork& lon) {
  const Adjacency adj(lon);
  ClusteringResult res;
  res.per_node.assign(adj.count, 0.0);
  std::vector<double> w_row(adj.count, 0.0);  // weights out of the focal node
  for (std::size_t i = 0; i < adj.count; ++i) {
    const std::size_t k = adj.out[i].size();
    if (k < 2) {
      ++res.low_degree;
      continue;
    }
    double s = 0.0;
    for (const auto& [j, w] : lon.arcs[i]) {
      if (j == static_cast<std::int32_t>(i)) continue;
      w_row[j] = w;
      s += w;
    }
    // closed triple i -> j -> h -> i; w_ih is 0 when i has no arc to h
    double sum = 0.0;
    for (const std::int32_t j : adj.out[i]) {
      for (const std::int32_t h : adj.in[i]) {
        if (j == h) continue;
        if (adj.has(j, h)) sum += 0.5 * (w_row[j] + w_row[h]);
      }
    }
    res.per_node[i] = sum / (s * static_cast<double>(k - 1));
    for (const std::int32_t j : adj.out[i]) w_row[j] = 0.0;
  }
  double total = 0.0;
  for (double c : res.per_node) total += c;
  res.mean = res.per_node.empty() ? 0.0 : total / static_cast<double>(res.per_node.size());
  return res;
}

DisparityResult disparity(const LocalOptimaNetwork& lon) {
  DisparityResult res;
  res.per_node.assign(lon.num_nodes(), 0.0);
  double total = 0.0;
  std::size_t defined = 0;
  for (std::size_t i = 0; i < lon.num_nodes(); ++i) {
    const double s = lon.strength(i);
    if (s <= 0.0) {
      ++res.excluded;
      continue;
    }
    double y2 = 0.0;
    for (const auto& [j, w] : lon.arcs[i]) {
      if (j == static_cast<std::int32_t>(i)) continue;
      const double frac = w / s;
      y2 += frac * frac;
    }
    res.per_node[i] = y2;
    total += y2;
    ++defined;
  }
  res.mean = defined == 0 ? 0.0 : total / static_cast<double>(defined);
  return res;
}

PathStats shortest_paths(const LocalOptimaNetwork& lon) {
  const std::size_t count = lon.num_nodes();
  PathStats res;
  if (count < 2) return res;

  // Arc length 1/w; dense Dijkstra per source (the LONs here are small
  // and dense, so the O(V^2) scan beats a heap).
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<std::vector<std::pair<std::int32_t, double>>> lengths(count);
  for (std::size_t i = 0; i < count; ++i)
    for (const auto& [j, w] : lon.arcs[i])
      if (j != static_cast<std::int32_t>(i)) lengths[i].emplace_back(j, 1.0 / w);

  double total = 0.0;
  double total_to_opt = 0.0;
  std::vector<double> dist(count);
  std::vector<std::uint8_t> done(count);
  for (std::size_t src = 0; src < count; ++src) {
    std::fill(dist.begin(), dist.end(), inf);
    std::fill(done.begin(), done.end(), 0);
    dist[src] = 0.0;
    for (std::size_t round = 0; round < count; ++round) {
      std::size_t best = count;
      double best_d = inf;
      for (std::size_t v = 0; v < count; ++v)
        if (!done[v] && dist[v] < best_d) {
          best_d = dist[v];
          best = v;
        }
      if (best == count) break;
      done[best] = 1;
      for (const auto& [j, len] : lengths[best])
        dist[j] = std::min(dist[j], best_d + len);
    }
    for (std::size_t v = 0; v < count; ++v) {
      if (v == src) continue;
      if (std::isinf(dist[v])) {
        ++res.unreachable_pairs;
      } else {
        total += dist[v];
        ++res.finite_pairs;
      }
    }
    if (lon.global_optimum >= 0 && src != static_cast<std::size_t>(lon.global_optimum)) {
      const double d = dist[static_cast<std::size_t>(lon.global_optimum)];
      if (std::isinf(d)) {
        ++res.unreachable_to_optimum;
      } else {
        total_to_opt += d;
        ++res.sources_to_optimum;
      }
    }
  }
  if (res.finite_pairs > 0) res.avg_path_length = total / static_cast<double>(res.finite_pairs);
  if (res.sources_to_optimum > 0)
    res.avg_path_to_optimum = total_to_opt / static_cast<double>(res.sources_to_optimum);
  return res;
}

BasinStats basin_statistics(const NkInstance& inst, const LocalOptimaNetwork& lon) {
  BasinStats res;
  const std::size_t count = lon.num_nodes();
  double total = 0.0;
  for (const auto& node : lon.nodes) total += node.basin_size;
  res.mean = total / static_cast<double>(count);
  if (count >= 2) {
    double ss = 0.0;
    for (const auto& node : lon.nodes) {
      const double d = node.basin_size - res.mean;
      ss += d * d;
    }
    res.sd = std::sqrt(ss / static_cast<double>(count - 1));
  }
  res.global_optimum_share =
      lon.nodes[static_cast<std::size_t>(lon.global_optimum)].basin_size /
      static_cast<double>(inst.space_size());

  // Off-diagonal weights on log-spaced bins over [w_min, 1] with
  // w_min = 1/(n * 2^n), the smallest weight one climb step can produce.
  const double w_min = 1.0 / (static_cast<double>(inst.n()) *
                              static_cast<double>(inst.space_size()));
  const double log_min = std::log(w_min);
  const double span = -log_min;  // log(1) - log(w_min)
  for (std::size_t i = 0; i < count; ++i) {
    for (const auto& [j, w] : lon.arcs[i]) {
      if (j == static_cast<std::int32_t>(i)) continue;
      double position = (std::log(w) - log_min) / span;
      int bin = static_cast<int>(position * kWeightHistogramBins);
      bin = std::clamp(bin, 0, static_cast<int>(kWeightHistogramBins) - 1);
      res.weight_histogram[bin] += 1.0;
    }
  }
  return res;
}

std::optional<double> fitness_size_correlation(const LocalOptimaNetwork& lon) {
  if (lon.num_nodes() < 2) return std::nullopt;
  std::vector<double> fitness, log_size;
  fitness.reserve(lon.num_nodes());
  log_size.reserve(lon.num_nodes());
  for (const auto& node : lon.nodes) {
    fitness.push_back(node.fitness);
    log_size.push_back(std::log(node.basin_size));
  }
  return pearson(fitness, log_size);
}

MetricsReport compute_metrics(const NkInstance& inst, const LocalOptimaNetwork& lon) {
  MetricsReport rep;
  rep.model = std::string(variant_name(inst.spec.variant));
  rep.n = inst.spec.n;
  rep.k = inst.spec.k;
  rep.param = inst.spec.param();
  rep.seed = inst.spec.seed;
  rep.exact = lon.exact;

  rep.n_nodes = lon.num_nodes();
  rep.n_edges = lon.edge_count();

  double wii = 0.0, wij = 0.0;
  std::size_t arcs_offdiag = 0;
  for (std::size_t i = 0; i < lon.num_nodes(); ++i) {
    wii += lon.self_weight(i);
    for (const auto& [j, w] : lon.arcs[i]) {
      if (j == static_cast<std::int32_t>(i)) continue;
      wij += w;
      ++arcs_offdiag;
    }
  }
  rep.mean_wii = wii / static_cast<double>(lon.num_nodes());
  rep.mean_wij_offdiag = arcs_offdiag == 0 ? 0.0 : wij / static_cast<double>(arcs_offdiag);

  const BasinStats basins = basin_statistics(inst, lon);
  rep.mean_basin_size = basins.mean;
  rep.sd_basin_size = basins.sd;
  rep.global_optimum_basin_share = basins.global_optimum_share;
  rep.weight_histogram = basins.weight_histogram;

  if (lon.num_nodes() >= 3 && basins.sd > 0.0) {
    std::vector<double> sizes;
    sizes.reserve(lon.num_nodes());
    for (const auto& node : lon.nodes) sizes.push_back(node.basin_size);
    rep.lognormal_pass = lognormal_check(sizes, 0.01);
  }

  if (auto r = fitness_size_correlation(lon)) {
    rep.fitness_size_correlation = r;
    std::vector<double> fitness, log_size;
    for (const auto& node : lon.nodes) {
      fitness.push_back(node.fitness);
      log_size.push_back(std::log(node.basin_size));
    }
    rep.fitness_size_corr_p = pearson_test(fitness, log_size).p_value;
  }

  const ClusteringResult cw = weighted_clustering(lon);
  rep.cw_mean = cw.mean;
  rep.cw_low_degree = cw.low_degree;
  const DisparityResult y2 = disparity(lon);
  rep.disparity_mean = y2.mean;
  rep.disparity_excluded = y2.excluded;
  const PathStats paths = shortest_paths(lon);
  rep.avg_path_length = paths.avg_path_length;
  rep.path_unreachable_pairs = paths.unreachable_pairs;
  rep.avg_path_to_optimum = paths.avg_path_to_optimum;
  rep.unreachable_to_optimum = paths.unreachable_to_optimum;
  return rep;
}

std::string metrics_csv_header() {
  std::string header =
      "model,n,k,param,seed,exact,n_nodes,n_edges,mean_wii,mean_wij,"
      "mean_basin_size,sd_basin_size,global_optimum_basin_share,"
      "lognormal_pass,fitness_size_corr,fitness_size_corr_p,cw_mean,"
      "cw_low_degree,disparity_mean,disparity_excluded,avg_path_length,"
      "path_unreachable_pairs,avg_path_to_optimum,unreachable_to_optimum";
  for (std::size_t b = 0; b < kWeightHistogramBins; ++b) {
    header += ",whist_";
    header += std::to_string(b);
  }
  return header;
}

std::string metrics_csv_row(const MetricsReport& r) {
  std::ostringstream out;
  out << r.model << ',' << r.n << ',' << r.k << ',' << r.param << ',' << r.seed
      << ',' << (r.exact ? 1 : 0) << ',' << r.n_nodes << ',' << r.n_edges << ','
      << fmt_double(r.mean_wii) << ',' << fmt_double(r.mean_wij_offdiag) << ','
      << fmt_double(r.mean_basin_size) << ',' << fmt_double(r.sd_basin_size)
      << ',' << fmt_double(r.global_optimum_basin_share) << ',';
  if (r.lognormal_pass) out << (*r.lognormal_pass ? 1 : 0);
  out << ',';
  if (r.fitness_size_correlation) out << fmt_double(*r.fitness_size_correlation);
  out << ',';
  if (r.fitness_size_corr_p) out << fmt_double(*r.fitness_size_corr_p);
  out << ',' << fmt_double(r.cw_mean) << ',' << r.cw_low_degree << ','
      << fmt_double(r.disparity_mean) << ',' << r.disparity_excluded << ','
      << fmt_double(r.avg_path_length) << ',' << r.path_unreachable_pairs << ','
      << fmt_double(r.avg_path_to_optimum) << ',' << r.unreachable_to_optimum;
  for (double count : r.weight_histogram) out << ',' << fmt_double(count);
  return out.str();
}

void write_per_node_csv(const LocalOptimaNetwork& lon, std::ostream& out) {
  const ClusteringResult cw = weighted_clustering(lon);
  const DisparityResult y2 = disparity(lon);
  out << "lonn_id,fitness,basin_size,cw,y2\n";
  for (std::size_t i = 0; i < lon.num_nodes(); ++i) {
    out << lon.nodes[i].id << ',' << fmt_double(lon.nodes[i].fitness) << ','
        << fmt_double(lon.nodes[i].basin_size) << ',' << fmt_double(cw.per_node[i])
        << ',' << fmt_double(y2.per_node[i]) << '\n';
  }
}

}  // namespace nklon
