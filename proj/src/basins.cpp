#include "nklon/basins.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "nklon/csvio.hpp"
#include "nklon/errors.hpp"

namespace nklon {

namespace {

// Sparse accumulator over LONN ids: dense value array plus a touched
// list, cleared after each extraction.
class SparseAccumulator {
 public:
  explicit SparseAccumulator(std::size_t width) : value_(width, 0.0) {}

  void add(std::int32_t id, double v) {
    if (value_[id] == 0.0 && v != 0.0) touched_.push_back(id);
    value_[id] += v;
  }

  void add_scaled(const SparseRow& row, double s) {
    for (const auto& [id, v] : row) add(id, v * s);
  }

  // Extracts the accumulated row sorted by id and resets the state.
  SparseRow take(double scale = 1.0) {
    std::sort(touched_.begin(), touched_.end());
    SparseRow out;
    out.reserve(touched_.size());
    for (std::int32_t id : touched_) {
      const double v = value_[id] * scale;
      if (v > 0.0) out.emplace_back(id, v);
      value_[id] = 0.0;
    }
    touched_.clear();
    return out;
  }

 private:
  std::vector<double> value_;
  std::vector<std::int32_t> touched_;
};

double max_abs_difference(const SparseRow& a, const SparseRow& b) {
  double worst = 0.0;
  std::size_t i = 0, j = 0;
  while (i < a.size() || j < b.size()) {
    if (j == b.size() || (i < a.size() && a[i].first < b[j].first)) {
      worst = std::max(worst, std::abs(a[i].second));
      ++i;
    } else if (i == a.size() || b[j].first < a[i].first) {
      worst = std::max(worst, std::abs(b[j].second));
      ++j;
    } else {
      worst = std::max(worst, std::abs(a[i].second - b[j].second));
      ++i;
      ++j;
    }
  }
  return worst;
}

// Maximal-fitness neighbors of g and their shared fitness numerator.
struct ArgmaxNeighbors {
  std::int64_t fmax;
  std::vector<Genotype> members;
};

ArgmaxNeighbors argmax_neighbors(Genotype g, std::uint32_t n,
                                 std::span<const std::int64_t> fit) {
  ArgmaxNeighbors out;
  out.fmax = std::numeric_limits<std::int64_t>::min();
  for (std::uint32_t b = 0; b < n; ++b) {
    const Genotype h = g ^ (Genotype{1} << b);
    const std::int64_t fh = fit[h];
    if (fh > out.fmax) {
      out.fmax = fh;
      out.members.clear();
      out.members.push_back(h);
    } else if (fh == out.fmax) {
      out.members.push_back(h);
    }
  }
  return out;
}

// Solves the plateau system for the interior members of one neutral
// network: x_s = mean over neutral neighbors of x, with already-computed
// rows (exits and, transitively, the rest of the landscape above) as
// boundary data. Dense Gaussian elimination.
void solve_plateau_dense(const std::vector<Genotype>& interior,
                         const std::vector<std::vector<Genotype>>& neutral_nbrs,
                         const std::vector<std::uint8_t>& computed,
                         std::vector<SparseRow>& dist) {
  const std::size_t m = interior.size();
  std::vector<std::int32_t> local(dist.size(), -1);  // genotype -> row
  for (std::size_t r = 0; r < m; ++r) local[interior[r]] = static_cast<std::int32_t>(r);

  // Column set: union of LONN ids over all boundary rows.
  std::vector<std::int32_t> cols;
  for (std::size_t r = 0; r < m; ++r)
    for (Genotype h : neutral_nbrs[r])
      if (computed[h])
        for (const auto& [id, v] : dist[h]) cols.push_back(id);
  std::sort(cols.begin(), cols.end());
  cols.erase(std::unique(cols.begin(), cols.end()), cols.end());
  const std::size_t width = cols.size();
  std::vector<std::int32_t> col_of(
      cols.empty() ? 0 : static_cast<std::size_t>(cols.back()) + 1, -1);
  for (std::size_t c = 0; c < width; ++c) col_of[cols[c]] = static_cast<std::int32_t>(c);

  // d_s * x_s - sum_{interior nbrs} x_nbr = sum_{boundary nbrs} dist[nbr]
  std::vector<double> A(m * m, 0.0);
  std::vector<double> C(m * width, 0.0);
  for (std::size_t r = 0; r < m; ++r) {
    A[r * m + r] = static_cast<double>(neutral_nbrs[r].size());
    for (Genotype h : neutral_nbrs[r]) {
      if (computed[h]) {
        for (const auto& [id, v] : dist[h]) C[r * width + col_of[id]] += v;
      } else {
        A[r * m + local[h]] -= 1.0;
      }
    }
  }

  // Gaussian elimination with partial pivoting, multi-column RHS.
  std::vector<std::size_t> perm(m);
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  for (std::size_t col = 0; col < m; ++col) {
    std::size_t pivot = col;
    double best = std::abs(A[perm[col] * m + col]);
    for (std::size_t r = col + 1; r < m; ++r) {
      const double mag = std::abs(A[perm[r] * m + col]);
      if (mag > best) {
        best = mag;
        pivot = r;
      }
    }
    if (best == 0.0)
      throw ConvergenceError("singular plateau system of size " + std::to_string(m));
    std::swap(perm[col], perm[pivot]);
    const std::size_t prow = perm[col];
    const double inv = 1.0 / A[prow * m + col];
    for (std::size_t r = col + 1; r < m; ++r) {
      const std::size_t row = perm[r];
      const double f = A[row * m + col] * inv;
      if (f == 0.0) continue;
      A[row * m + col] = 0.0;
      for (std::size_t c = col + 1; c < m; ++c) A[row * m + c] -= f * A[prow * m + c];
      for (std::size_t c = 0; c < width; ++c) C[row * width + c] -= f * C[prow * width + c];
    }
  }
  for (std::size_t col = m; col-- > 0;) {
    const std::size_t row = perm[col];
    const double inv = 1.0 / A[row * m + col];
    for (std::size_t c = 0; c < width; ++c) {
      double v = C[row * width + c];
      for (std::size_t cc = col + 1; cc < m; ++cc)
        v -= A[row * m + cc] * C[perm[cc] * width + c];
      C[row * width + c] = v * inv;
    }
  }

  for (std::size_t r = 0; r < m; ++r) {
    SparseRow row;
    for (std::size_t c = 0; c < width; ++c) {
      const double v = C[perm[r] * width + c];
      if (v > 0.0) row.emplace_back(cols[c], v);
    }
    dist[interior[r]] = std::move(row);
  }
}

// Sweep iteration for plateaus too large for the dense path. Starting
// from zero the iterates increase monotonically toward the solution, so
// the sweep-to-sweep change bounds the residual.
void solve_plateau_iterative(const std::vector<Genotype>& interior,
                             const std::vector<std::vector<Genotype>>& neutral_nbrs,
                             const std::vector<std::uint8_t>& computed,
                             std::vector<SparseRow>& dist, SparseAccumulator& acc) {
  const std::size_t m = interior.size();
  std::vector<SparseRow> x(m);
  std::vector<std::int32_t> local(dist.size(), -1);
  for (std::size_t r = 0; r < m; ++r) local[interior[r]] = static_cast<std::int32_t>(r);

  for (std::uint64_t iter = 0; iter < kPlateauIterationCap; ++iter) {
    double worst = 0.0;
    for (std::size_t r = 0; r < m; ++r) {
      for (Genotype h : neutral_nbrs[r])
        acc.add_scaled(computed[h] ? dist[h] : x[local[h]],
                       1.0 / static_cast<double>(neutral_nbrs[r].size()));
      SparseRow next = acc.take();
      worst = std::max(worst, max_abs_difference(next, x[r]));
      x[r] = std::move(next);
    }
    if (worst < kPlateauResidual) {
      for (std::size_t r = 0; r < m; ++r) dist[interior[r]] = std::move(x[r]);
      return;
    }
  }
  throw ConvergenceError("plateau solve did not reach residual " +
                         fmt_double(kPlateauResidual) + " on a component of " +
                         std::to_string(m) + " states");
}

}  // namespace

std::int32_t hill_climb(const NeutralPartition& part,
                        std::span<const std::int64_t> fit, Genotype start,
                        SplitMix64& rng, std::uint64_t step_cap) {
  const std::uint32_t n = part.n;
  Genotype s = start;
  for (std::uint64_t step = 0; step <= step_cap; ++step) {
    const std::int32_t li = part.lonn_index[part.nn_of[s]];
    if (li >= 0) return li;
    // Uniform choice among the maximal-fitness neighbors; an equal or
    // fitter pick always moves. A less-fit pick can only arise in a
    // LONN, which the guard above already handled.
    std::int64_t fmax = std::numeric_limits<std::int64_t>::min();
    std::uint32_t count = 0;
    for (std::uint32_t b = 0; b < n; ++b) {
      const std::int64_t fh = fit[s ^ (Genotype{1} << b)];
      if (fh > fmax) {
        fmax = fh;
        count = 1;
      } else if (fh == fmax) {
        ++count;
      }
    }
    std::uint32_t pick = static_cast<std::uint32_t>(rng.bounded(count));
    Genotype chosen = s;
    for (std::uint32_t b = 0; b < n; ++b) {
      const Genotype h = s ^ (Genotype{1} << b);
      if (fit[h] == fmax && pick-- == 0) {
        chosen = h;
        break;
      }
    }
    if (fit[s] <= fit[chosen]) s = chosen;
  }
  throw ConvergenceError("hill climb exceeded the step cap; partition is inconsistent");
}

BasinDistribution exact_basin_distributions(const NkInstance& inst,
                                            const NeutralPartition& part,
                                            std::span<const std::int64_t> fit) {
  const std::uint32_t n = inst.n();
  const std::uint64_t size = inst.space_size();
  if (part.nn_of.size() != size || fit.size() != size)
    throw ConsistencyError("partition/fitness do not match the instance");

  BasinDistribution out;
  out.dist.resize(size);
  out.basin_size.assign(part.num_lonns(), 0.0);

  // Genotypes grouped by fitness level, levels in descending order;
  // within a level genotypes stay in ascending order.
  std::vector<std::uint32_t> order(size);
  std::iota(order.begin(), order.end(), 0u);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::uint32_t a, std::uint32_t b) { return fit[a] > fit[b]; });

  std::vector<std::uint8_t> computed(size, 0);
  SparseAccumulator acc(part.num_lonns());

  std::size_t level_begin = 0;
  while (level_begin < size) {
    std::size_t level_end = level_begin + 1;
    const std::int64_t level_fitness = fit[order[level_begin]];
    while (level_end < size && fit[order[level_end]] == level_fitness) ++level_end;

    // Interior plateau members of this level, grouped by network id in
    // first-seen order (genotype-ascending, hence deterministic).
    std::vector<std::int32_t> plateau_ids;
    std::vector<std::vector<Genotype>> plateau_members(0);
    std::vector<std::int32_t> plateau_slot(part.num_networks(), -1);

    for (std::size_t idx = level_begin; idx < level_end; ++idx) {
      const Genotype g = order[idx];
      const std::int32_t nn = part.nn_of[g];
      const std::int32_t li = part.lonn_index[nn];
      if (li >= 0) {
        out.dist[g] = SparseRow{{li, 1.0}};
        computed[g] = 1;
        continue;
      }
      ArgmaxNeighbors am = argmax_neighbors(g, n, fit);
      if (am.fmax < level_fitness)
        throw ConsistencyError(
            "non-LONN configuration with no equal-or-fitter neighbor; "
            "partition is inconsistent");
      if (am.fmax > level_fitness) {
        // Every maximal neighbor is strictly fitter, hence already done.
        for (Genotype h : am.members)
          acc.add_scaled(out.dist[h], 1.0 / static_cast<double>(am.members.size()));
        out.dist[g] = acc.take();
        computed[g] = 1;
      } else {
        std::int32_t slot = plateau_slot[nn];
        if (slot < 0) {
          slot = static_cast<std::int32_t>(plateau_ids.size());
          plateau_slot[nn] = slot;
          plateau_ids.push_back(nn);
          plateau_members.emplace_back();
        }
        plateau_members[slot].push_back(g);
      }
    }

    for (std::size_t pi = 0; pi < plateau_ids.size(); ++pi) {
      const auto& interior = plateau_members[pi];
      // Neutral neighbors of each interior member; all share the level
      // fitness and the network.
      std::vector<std::vector<Genotype>> nbrs(interior.size());
      bool any_boundary = false;
      for (std::size_t r = 0; r < interior.size(); ++r) {
        for (std::uint32_t b = 0; b < n; ++b) {
          const Genotype h = interior[r] ^ (Genotype{1} << b);
          if (fit[h] == level_fitness) {
            nbrs[r].push_back(h);
            if (computed[h]) any_boundary = true;
          }
        }
      }
      if (!any_boundary)
        throw ConsistencyError(
            "plateau without an exit; a non-LONN network must contain a "
            "member with a strictly fitter neighbor");
      if (interior.size() <= kDensePlateauLimit)
        solve_plateau_dense(interior, nbrs, computed, out.dist);
      else
        solve_plateau_iterative(interior, nbrs, computed, out.dist, acc);
      for (Genotype g : interior) computed[g] = 1;
    }

    level_begin = level_end;
  }

  for (std::uint64_t g = 0; g < size; ++g)
    for (const auto& [id, p] : out.dist[g]) out.basin_size[id] += p;
  out.exact = true;
  return out;
}

BasinDistribution exact_basin_distributions(const NkInstance& inst,
                                            const NeutralPartition& part) {
  const auto fit = inst.all_fitness();
  return exact_basin_distributions(inst, part, fit);
}

BasinDistribution monte_carlo_basins(const NkInstance& inst,
                                     const NeutralPartition& part,
                                     std::span<const std::int64_t> fit,
                                     std::uint32_t samples_per_start,
                                     std::uint64_t seed) {
  if (samples_per_start < 1)
    throw ParameterError("monte_carlo_basins: samples_per_start must be >= 1");
  const std::uint64_t size = inst.space_size();
  if (part.nn_of.size() != size || fit.size() != size)
    throw ConsistencyError("partition/fitness do not match the instance");

  BasinDistribution out;
  out.dist.resize(size);
  out.basin_size.assign(part.num_lonns(), 0.0);
  std::vector<std::uint32_t> counts(part.num_lonns(), 0);
  std::vector<std::int32_t> touched;
  const double inv = 1.0 / static_cast<double>(samples_per_start);

  for (std::uint64_t g = 0; g < size; ++g) {
    for (std::uint32_t rep = 0; rep < samples_per_start; ++rep) {
      SplitMix64 rng = substream(seed, g * samples_per_start + rep);
      const std::int32_t li =
          hill_climb(part, fit, static_cast<Genotype>(g), rng);
      if (counts[li] == 0) touched.push_back(li);
      ++counts[li];
    }
    std::sort(touched.begin(), touched.end());
    SparseRow row;
    row.reserve(touched.size());
    for (std::int32_t id : touched) {
      row.emplace_back(id, counts[id] * inv);
      out.basin_size[id] += counts[id] * inv;
      counts[id] = 0;
    }
    touched.clear();
    out.dist[g] = std::move(row);
  }
  out.exact = false;
  return out;
}

void write_basin_sizes_csv(const NkInstance& inst, const NeutralPartition& part,
                           const BasinDistribution& dist, std::ostream& out) {
  out << "lonn_id,fitness,size\n";
  for (std::size_t i = 0; i < dist.basin_size.size(); ++i) {
    const std::int64_t num = part.nn_fitness[part.lonn_network[i]];
    out << i << ',' << fmt_double(inst.to_real(FitnessValue{num})) << ','
        << fmt_double(dist.basin_size[i]) << '\n';
  }
}

void write_distribution_csv(const BasinDistribution& dist, std::ostream& out) {
  out << "genotype,lonn_id,probability\n";
  for (std::size_t g = 0; g < dist.dist.size(); ++g)
    for (const auto& [id, p] : dist.dist[g])
      out << g << ',' << id << ',' << fmt_double(p) << '\n';
}

}  // namespace nklon
