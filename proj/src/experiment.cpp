#include "nklon/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "nklon/csvio.hpp"
#include "nklon/errors.hpp"

namespace fs = std::filesystem;

namespace nklon {

CsvTable read_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParameterError("cannot open CSV file: " + path);
  CsvTable table;
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> fields;
    std::size_t start = 0;
    while (true) {
      const std::size_t comma = line.find(',', start);
      fields.push_back(line.substr(start, comma - start));
      if (comma == std::string::npos) break;
      start = comma + 1;
    }
    if (first) {
      table.header = std::move(fields);
      first = false;
    } else {
      table.rows.push_back(std::move(fields));
    }
  }
  return table;
}

AnalysisResult analyze_instance(const NkInstance& inst, bool exact,
                                std::uint32_t mc_samples, std::uint64_t mc_seed) {
  AnalysisResult res;
  const auto fit = inst.all_fitness();
  res.partition = neutral_partition(inst, fit);
  res.distribution =
      exact ? exact_basin_distributions(inst, res.partition, fit)
            : monte_carlo_basins(inst, res.partition, fit, mc_samples, mc_seed);
  res.lon = build_lon(inst, res.partition, res.distribution);
  res.metrics = compute_metrics(inst, res.lon);
  return res;
}

void ExperimentPlan::validate() const {
  if (params.empty() || ks.empty())
    throw ParameterError("plan: at least one parameter and one k value required");
  if (instances < 1) throw ParameterError("plan: instances must be >= 1");
  if (outdir.empty()) throw ParameterError("plan: output directory required");
  ModelSpec probe;
  probe.variant = variant;
  probe.n = n;
  probe.neighborhood = neighborhood;
  for (const std::int64_t param : params) {
    switch (variant) {
      case Variant::Standard:
        if (param != 0) throw ParameterError("plan: standard model takes no parameter");
        break;
      case Variant::Probabilistic:
        probe.p = static_cast<double>(param) / static_cast<double>(kPpbScale);
        break;
      case Variant::Quantized:
        if (param < 2) throw ParameterError("plan: q must be >= 2");
        probe.q = static_cast<std::uint32_t>(param);
        break;
    }
    for (const std::uint32_t k : ks) {
      probe.k = k;
      probe.validate();
    }
  }
  if (exact && n > kDeskScaleMaxN && !force)
    throw CapacityError("exact mode at n=" + std::to_string(n) +
                        " exceeds the desk-scale limit of n=" +
                        std::to_string(kDeskScaleMaxN) + "; pass --force to run anyway");
}

namespace {

std::string param_label(Variant variant, std::int64_t param) {
  switch (variant) {
    case Variant::Standard: return "";
    case Variant::Quantized: return "q" + std::to_string(param);
    case Variant::Probabilistic:
      return "p" + fmt_double(static_cast<double>(param) /
                              static_cast<double>(kPpbScale));
  }
  return "";
}

ModelSpec cell_spec(const ExperimentPlan& plan, std::int64_t param, std::uint32_t k) {
  ModelSpec spec;
  spec.variant = plan.variant;
  spec.n = plan.n;
  spec.k = k;
  spec.neighborhood = plan.neighborhood;
  if (plan.variant == Variant::Probabilistic)
    spec.p = static_cast<double>(param) / static_cast<double>(kPpbScale);
  if (plan.variant == Variant::Quantized)
    spec.q = static_cast<std::uint32_t>(param);
  return spec;
}

std::uint32_t worker_count(std::uint32_t requested, std::size_t tasks) {
  std::uint32_t workers = requested;
  if (workers == 0) {
    if (const char* env = std::getenv("NKLON_WORKERS")) {
      const long parsed = std::strtol(env, nullptr, 10);
      if (parsed > 0) workers = static_cast<std::uint32_t>(parsed);
    }
  }
  if (workers == 0) workers = std::max(1u, std::thread::hardware_concurrency());
  return static_cast<std::uint32_t>(std::min<std::size_t>(workers, tasks));
}

// Runs fn(task) for every task index on a bounded pool. Exceptions are
// captured and rethrown on the caller thread.
template <typename Fn>
void parallel_tasks(std::size_t tasks, std::uint32_t requested, Fn&& fn) {
  const std::uint32_t workers = worker_count(requested, tasks);
  if (workers <= 1) {
    for (std::size_t t = 0; t < tasks; ++t) fn(t);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errors(workers);
  for (std::uint32_t w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      try {
        while (true) {
          const std::size_t t = next.fetch_add(1);
          if (t >= tasks) break;
          fn(t);
        }
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (auto& thread : pool) thread.join();
  for (const auto& err : errors)
    if (err) std::rethrow_exception(err);
}

struct Cell {
  std::int64_t param;
  std::uint32_t k;
  std::string name;
};

std::vector<Cell> plan_cells(const ExperimentPlan& plan) {
  std::vector<Cell> cells;
  for (const std::int64_t param : plan.params)
    for (const std::uint32_t k : plan.ks)
      cells.push_back({param, k, plan.cell_name(param, k)});
  return cells;
}

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ParameterError("cannot write " + path.string());
  out << content;
}

}  // namespace

std::string ExperimentPlan::cell_name(std::int64_t param, std::uint32_t k) const {
  std::string name = std::string(variant_name(variant));
  const std::string p = param_label(variant, param);
  if (!p.empty()) name += "_" + p;
  name += "_k" + std::to_string(k);
  return name;
}

std::uint64_t ExperimentPlan::instance_seed(std::int64_t param, std::uint32_t k,
                                            std::uint32_t index) const {
  std::uint64_t cell_seed =
      substream_seed(base_seed, static_cast<std::uint64_t>(variant) + 1);
  cell_seed = substream_seed(cell_seed, static_cast<std::uint64_t>(param));
  cell_seed = substream_seed(cell_seed, k);
  return substream_seed(cell_seed, index);
}

std::vector<std::uint64_t> screened_cell_seeds(const ExperimentPlan& plan,
                                               std::int64_t param,
                                               std::uint32_t k) {
  std::vector<std::uint64_t> seeds;
  seeds.reserve(plan.instances);
  const std::uint32_t cap = 200 * plan.instances;
  for (std::uint32_t attempt = 0; attempt < cap && seeds.size() < plan.instances;
       ++attempt) {
    ModelSpec spec = cell_spec(plan, param, k);
    spec.seed = plan.instance_seed(param, k, attempt);
    const NkInstance inst = generate_instance(spec);
    const auto fit = inst.all_fitness();
    if (has_unique_global_optimum(inst, fit)) seeds.push_back(spec.seed);
  }
  if (seeds.size() < plan.instances)
    throw ParameterError("cell " + plan.cell_name(param, k) +
                         ": could not assemble " + std::to_string(plan.instances) +
                         " instances with a unique global optimum");
  return seeds;
}

void orchestrate(const ExperimentPlan& plan) {
  plan.validate();
  const auto started = std::chrono::steady_clock::now();
  const std::vector<Cell> cells = plan_cells(plan);
  fs::create_directories(fs::path(plan.outdir) / "cells");

  std::vector<double> cell_seconds(cells.size(), 0.0);
  std::vector<bool> skipped(cells.size(), false);
  std::vector<std::vector<std::uint64_t>> cell_seeds(cells.size());

  // Instance-level tasks; each writes the instance document and returns
  // a metrics row. Cell files are then assembled in order.
  for (std::size_t c = 0; c < cells.size(); ++c) {
    const Cell& cell = cells[c];
    const fs::path cell_dir = fs::path(plan.outdir) / "cells" / cell.name;
    const fs::path cell_csv = cell_dir / "metrics.csv";
    if (fs::exists(cell_csv)) {
      // Partial outputs (wrong row count) are recomputed from scratch.
      const CsvTable existing = read_csv(cell_csv.string());
      if (existing.rows.size() == plan.instances) {
        skipped[c] = true;
        for (std::uint32_t idx = 0; idx < plan.instances; ++idx) {
          std::ifstream doc(cell_dir / ("instance_" + std::to_string(idx) + ".json"));
          std::ostringstream buf;
          buf << doc.rdbuf();
          cell_seeds[c].push_back(deserialize_instance(buf.str()).spec.seed);
        }
        continue;
      }
    }
    const auto cell_start = std::chrono::steady_clock::now();
    fs::create_directories(cell_dir);
    const std::vector<std::uint64_t> seeds =
        screened_cell_seeds(plan, cell.param, cell.k);
    cell_seeds[c] = seeds;
    std::vector<std::string> rows(plan.instances);
    parallel_tasks(plan.instances, plan.workers, [&](std::size_t idx) {
      ModelSpec spec = cell_spec(plan, cell.param, cell.k);
      spec.seed = seeds[idx];
      const NkInstance inst = generate_instance(spec);
      write_file(cell_dir / ("instance_" + std::to_string(idx) + ".json"),
                 serialize_instance(inst));
      const AnalysisResult res = analyze_instance(
          inst, plan.exact, plan.mc_samples, substream_seed(spec.seed, 0x3C));
      if (plan.export_lon) {
        std::ofstream edges(cell_dir / ("lon_" + std::to_string(idx) + ".csv"));
        write_edge_csv(res.lon, edges);
        std::ofstream gml(cell_dir / ("lon_" + std::to_string(idx) + ".graphml"));
        write_graphml(res.lon, gml);
        std::ofstream dot(cell_dir / ("lon_" + std::to_string(idx) + ".dot"));
        write_dot(res.lon, dot);
      }
      rows[idx] = metrics_csv_row(res.metrics);
    });
    std::string csv = metrics_csv_header() + "\n";
    for (const auto& row : rows) csv += row + "\n";
    write_file(cell_csv, csv);
    cell_seconds[c] =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - cell_start)
            .count();
  }

  // Combined metrics.csv in cell order.
  std::string combined = metrics_csv_header() + "\n";
  for (const Cell& cell : cells) {
    const fs::path cell_csv = fs::path(plan.outdir) / "cells" / cell.name / "metrics.csv";
    const CsvTable table = read_csv(cell_csv.string());
    for (const auto& row : table.rows) {
      for (std::size_t f = 0; f < row.size(); ++f) {
        if (f) combined += ',';
        combined += row[f];
      }
      combined += '\n';
    }
  }
  write_file(fs::path(plan.outdir) / "metrics.csv", combined);

  const CsvTable all = read_csv((fs::path(plan.outdir) / "metrics.csv").string());
  write_file(fs::path(plan.outdir) / "aggregate.csv", aggregate_metrics(all));

  nlohmann::ordered_json manifest;
  manifest["artifact_version"] = kArtifactVersion;
  manifest["prng"] = kPrngName;
  manifest["model"] = variant_name(plan.variant);
  manifest["n"] = plan.n;
  manifest["ks"] = plan.ks;
  manifest["params"] = plan.params;
  manifest["neighborhood"] = neighborhood_name(plan.neighborhood);
  manifest["instances"] = plan.instances;
  manifest["base_seed"] = plan.base_seed;
  manifest["mode"] = plan.exact ? "exact" : "monte-carlo";
  if (!plan.exact) manifest["mc_samples"] = plan.mc_samples;
  manifest["wall_clock_seconds"] =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  nlohmann::ordered_json cell_log = nlohmann::ordered_json::array();
  for (std::size_t c = 0; c < cells.size(); ++c) {
    nlohmann::ordered_json entry;
    entry["cell"] = cells[c].name;
    entry["skipped"] = static_cast<bool>(skipped[c]);
    entry["seconds"] = cell_seconds[c];
    entry["instance_seeds"] = cell_seeds[c];
    cell_log.push_back(entry);
  }
  manifest["cells"] = cell_log;
  write_file(fs::path(plan.outdir) / "manifest.json", manifest.dump(2) + "\n");
}

std::string aggregate_metrics(const CsvTable& metrics) {
  // Group rows by (model, n, k, param); aggregate every numeric column
  // after the identifiers. Blank entries (undefined statistics) are
  // skipped and reported through the count columns.
  static const char* kAggregated[] = {
      "n_nodes", "n_edges", "mean_wii", "mean_wij", "mean_basin_size",
      "sd_basin_size", "global_optimum_basin_share", "lognormal_pass",
      "fitness_size_corr", "fitness_size_corr_p", "cw_mean", "disparity_mean",
      "avg_path_length", "avg_path_to_optimum"};

  const int model_col = metrics.column("model");
  const int n_col = metrics.column("n");
  const int k_col = metrics.column("k");
  const int param_col = metrics.column("param");
  if (model_col < 0 || n_col < 0 || k_col < 0 || param_col < 0)
    throw ParameterError("metrics CSV is missing identifier columns");

  std::vector<int> value_cols;
  for (const char* name : kAggregated) {
    const int col = metrics.column(name);
    if (col < 0) throw ParameterError(std::string("metrics CSV is missing column ") + name);
    value_cols.push_back(col);
  }

  std::vector<std::string> keys;
  std::vector<std::vector<std::size_t>> groups;
  for (std::size_t r = 0; r < metrics.rows.size(); ++r) {
    const auto& row = metrics.rows[r];
    const std::string key = row[model_col] + "," + row[n_col] + "," + row[k_col] +
                            "," + row[param_col];
    auto it = std::find(keys.begin(), keys.end(), key);
    if (it == keys.end()) {
      keys.push_back(key);
      groups.emplace_back();
      it = keys.end() - 1;
    }
    groups[static_cast<std::size_t>(it - keys.begin())].push_back(r);
  }

  std::string out = "model,n,k,param,instances";
  for (const char* name : kAggregated)
    out += std::string(",mean_") + name + ",sd_" + name + ",count_" + name;
  out += "\n";
  for (std::size_t gi = 0; gi < keys.size(); ++gi) {
    out += keys[gi] + "," + std::to_string(groups[gi].size());
    for (std::size_t vc = 0; vc < value_cols.size(); ++vc) {
      std::vector<double> values;
      for (const std::size_t r : groups[gi]) {
        const std::string& cellv = metrics.rows[r][value_cols[vc]];
        if (!cellv.empty()) values.push_back(std::strtod(cellv.c_str(), nullptr));
      }
      double mean = 0.0, sd = 0.0;
      if (!values.empty()) {
        for (const double v : values) mean += v;
        mean /= static_cast<double>(values.size());
        if (values.size() >= 2) {
          double ss = 0.0;
          for (const double v : values) ss += (v - mean) * (v - mean);
          sd = std::sqrt(ss / static_cast<double>(values.size() - 1));
        }
      }
      out += "," + (values.empty() ? std::string() : fmt_double(mean));
      out += "," + (values.empty() ? std::string() : fmt_double(sd));
      out += "," + std::to_string(values.size());
    }
    out += "\n";
  }
  return out;
}

void run_ea_campaign(const EaCampaign& campaign) {
  const ExperimentPlan& plan = campaign.plan;
  if (plan.params.empty() || plan.ks.empty())
    throw ParameterError("ea campaign: at least one parameter and one k value required");
  if (plan.instances < 1) throw ParameterError("ea campaign: instances must be >= 1");
  if (plan.outdir.empty()) throw ParameterError("ea campaign: output directory required");
  fs::create_directories(plan.outdir);

  const std::vector<Cell> cells = plan_cells(plan);
  std::string csv = "instance_id,model,n,k,param,mutation,crossover,runs,success_rate\n";
  for (const Cell& cell : cells) {
    double mutation_c = campaign.mutation_c;
    double crossover = campaign.crossover_rate;
    if (campaign.tune) {
      ModelSpec family = cell_spec(plan, cell.param, cell.k);
      family.seed = plan.instance_seed(cell.param, cell.k, 0);
      EaConfig base;
      base.pop_size = campaign.pop_size;
      base.eval_budget = campaign.eval_budget;
      base.elitism = campaign.elitism;
      base.seed = substream_seed(family.seed, 0x717E);
      const GridTuneResult tuned =
          grid_tune(family, plan.instances, campaign.tune_runs, base);
      mutation_c = tuned.mutation_c;
      crossover = tuned.crossover_rate;
    }
    // EA batches are unscreened: success is fitness equality, which is
    // well defined even when several networks share the maximal fitness
    std::vector<double> rates(plan.instances, 0.0);
    parallel_tasks(plan.instances, plan.workers, [&](std::size_t idx) {
      ModelSpec spec = cell_spec(plan, cell.param, cell.k);
      spec.seed = plan.instance_seed(cell.param, cell.k, static_cast<std::uint32_t>(idx));
      const NkInstance inst = generate_instance(spec);
      const auto fit = inst.all_fitness();
      const FitnessValue best{*std::max_element(fit.begin(), fit.end())};
      EaConfig cfg;
      cfg.pop_size = campaign.pop_size;
      cfg.eval_budget = campaign.eval_budget;
      cfg.elitism = campaign.elitism;
      cfg.mutation_rate = mutation_c / static_cast<double>(plan.n);
      cfg.crossover_rate = crossover;
      cfg.seed = substream_seed(spec.seed, 0xEA);
      rates[idx] = success_rate(inst, best, cfg, campaign.runs);
    });
    for (std::size_t idx = 0; idx < rates.size(); ++idx) {
      csv += cell.name + "_i" + std::to_string(idx) + "," +
             std::string(variant_name(plan.variant)) + "," + std::to_string(plan.n) +
             "," + std::to_string(cell.k) + "," + std::to_string(cell.param) + "," +
             fmt_double(mutation_c / static_cast<double>(plan.n)) + "," +
             fmt_double(crossover) + "," + std::to_string(campaign.runs) + "," +
             fmt_double(rates[idx]) + "\n";
    }
  }
  write_file(fs::path(plan.outdir) / "ea_results.csv", csv);
}

}  // namespace nklon
