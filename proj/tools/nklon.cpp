// Command-line front end: generate instances, run the analysis pipeline,
// run EA campaigns, aggregate and compare results, export networks.

#include <cmath>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include <CLI11.hpp>

#include "nklon/csvio.hpp"
#include "nklon/errors.hpp"
#include "nklon/experiment.hpp"
#include "nklon/stats.hpp"

namespace {

using namespace nklon;

struct ModelFlags {
  std::string model = "nk";
  std::uint32_t n = 10;
  std::vector<std::uint32_t> ks = {2};
  std::vector<double> ps;
  std::vector<std::uint32_t> qs;
  std::string neighborhood = "random";
  std::uint64_t seed = 1;
};

void add_model_flags(CLI::App* cmd, ModelFlags& flags, bool grid) {
  cmd->add_option("--model", flags.model, "Landscape model: nk, nkp or nkq")
      ->check(CLI::IsMember({"nk", "nkp", "nkq"}));
  cmd->add_option("--n", flags.n, "Genes per genotype (<= 20)");
  cmd->add_option("--k", flags.ks,
                  grid ? "Epistasis degrees (one cell per value)" : "Epistasis degree")
      ->expected(grid ? -1 : 1)
      ->delimiter(',');
  cmd->add_option("--p", flags.ps, "NKp zero probabilities")
      ->expected(grid ? -1 : 1)
      ->delimiter(',');
  cmd->add_option("--q", flags.qs, "NKq quantization levels")
      ->expected(grid ? -1 : 1)
      ->delimiter(',');
  cmd->add_option("--neighborhood", flags.neighborhood, "Partner placement")
      ->check(CLI::IsMember({"adjacent", "random"}));
  cmd->add_option("--seed", flags.seed, "Base seed");
}

Variant parse_variant(const std::string& model) {
  if (model == "nk") return Variant::Standard;
  if (model == "nkp") return Variant::Probabilistic;
  return Variant::Quantized;
}

std::vector<std::int64_t> plan_params(const ModelFlags& flags) {
  const Variant variant = parse_variant(flags.model);
  std::vector<std::int64_t> params;
  switch (variant) {
    case Variant::Standard:
      if (!flags.ps.empty() || !flags.qs.empty())
        throw ParameterError("--p/--q only apply to the nkp/nkq models");
      params = {0};
      break;
    case Variant::Probabilistic:
      if (flags.ps.empty()) throw ParameterError("nkp requires --p");
      if (!flags.qs.empty()) throw ParameterError("--q does not apply to nkp");
      for (double p : flags.ps)
        params.push_back(std::llround(p * static_cast<double>(kPpbScale)));
      break;
    case Variant::Quantized:
      if (flags.qs.empty()) throw ParameterError("nkq requires --q");
      if (!flags.ps.empty()) throw ParameterError("--p does not apply to nkq");
      for (std::uint32_t q : flags.qs) params.push_back(q);
      break;
  }
  return params;
}

ModelSpec single_spec(const ModelFlags& flags) {
  if (flags.ks.size() != 1)
    throw ParameterError("this command takes exactly one --k value");
  ModelSpec spec;
  spec.variant = parse_variant(flags.model);
  spec.n = flags.n;
  spec.k = flags.ks[0];
  spec.neighborhood = flags.neighborhood == "adjacent" ? Neighborhood::Adjacent
                                                       : Neighborhood::Random;
  spec.seed = flags.seed;
  if (spec.variant == Variant::Probabilistic) {
    if (flags.ps.size() != 1) throw ParameterError("nkp requires exactly one --p");
    spec.p = flags.ps[0];
  }
  if (spec.variant == Variant::Quantized) {
    if (flags.qs.size() != 1) throw ParameterError("nkq requires exactly one --q");
    spec.q = flags.qs[0];
  }
  return spec;
}

NkInstance load_instance(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParameterError("cannot open instance file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return deserialize_instance(buf.str());
}

void write_or_print(const std::string& path, const std::string& content) {
  if (path.empty() || path == "-") {
    std::cout << content;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ParameterError("cannot write " + path);
  out << content;
}

ExperimentPlan make_plan(const ModelFlags& flags, std::uint32_t instances,
                         const std::string& outdir, bool exact,
                         std::uint32_t mc_samples, bool force, bool export_lon,
                         std::uint32_t workers) {
  ExperimentPlan plan;
  plan.variant = parse_variant(flags.model);
  plan.params = plan_params(flags);
  plan.ks = flags.ks;
  plan.n = flags.n;
  plan.neighborhood = flags.neighborhood == "adjacent" ? Neighborhood::Adjacent
                                                       : Neighborhood::Random;
  plan.instances = instances;
  plan.base_seed = flags.seed;
  plan.exact = exact;
  plan.mc_samples = mc_samples;
  plan.outdir = outdir;
  plan.force = force;
  plan.export_lon = export_lon;
  plan.workers = workers;
  return plan;
}

int run(int argc, char** argv) {
  CLI::App app{"NK-family fitness landscape analyzer: neutral networks, "
               "probabilistic basins, local optima networks, search-difficulty "
               "experiments"};
  app.require_subcommand(1);

  // ---- gen ----
  auto* gen = app.add_subcommand("gen", "Generate a seeded instance document");
  ModelFlags gen_flags;
  std::string gen_out;
  add_model_flags(gen, gen_flags, false);
  gen->add_option("--out", gen_out, "Output path (default stdout)");

  // ---- analyze ----
  auto* analyze = app.add_subcommand(
      "analyze", "Run the pipeline: partition, basins, network, metrics. "
                 "Single instance to stdout, or a cell grid into --out-dir");
  ModelFlags an_flags;
  std::string an_instance, an_outdir;
  std::uint32_t an_instances = 30;
  bool an_mc = false, an_force = false, an_export = false;
  std::uint32_t an_samples = 1000, an_workers = 0;
  std::string an_nn, an_basins, an_dump, an_pernode, an_edges, an_graphml, an_dot;
  add_model_flags(analyze, an_flags, true);
  analyze->add_option("--instance", an_instance, "Analyze this instance document");
  analyze->add_option("--out-dir", an_outdir, "Run a grid into this directory");
  analyze->add_option("--instances", an_instances, "Instances per cell (grid mode)");
  analyze->add_flag("--mc", an_mc, "Estimate basins by Monte Carlo instead of exactly");
  analyze->add_option("--mc-samples", an_samples, "Climbs per start in --mc mode");
  analyze->add_flag("--force", an_force, "Allow exact mode beyond n=14");
  analyze->add_flag("--export-lon", an_export, "Grid mode: write per-instance LON exports");
  analyze->add_option("--workers", an_workers, "Worker threads (or env NKLON_WORKERS)");
  analyze->add_option("--nn-summary", an_nn, "Write per-network CSV here");
  analyze->add_option("--basin-sizes", an_basins, "Write basin size CSV here");
  analyze->add_option("--dump-distributions", an_dump,
                      "Write the full p_i(s) dump here (up to 2^n rows)");
  analyze->add_option("--per-node", an_pernode, "Write per-node metric CSV here");
  analyze->add_option("--edges", an_edges, "Write the LON edge list here");
  analyze->add_option("--graphml", an_graphml, "Write GraphML here");
  analyze->add_option("--dot", an_dot, "Write DOT here");

  // ---- ea ----
  auto* ea = app.add_subcommand("ea", "Success-rate campaign over a cell grid");
  ModelFlags ea_flags;
  std::string ea_outdir = ".";
  std::uint32_t ea_instances = 30, ea_runs = 100, ea_workers = 0;
  std::uint32_t ea_pop = 100, ea_elitism = 1;
  std::uint64_t ea_budget = 0;
  double ea_mut = 1.0, ea_cx = 0.0;
  bool ea_tune = false;
  std::uint32_t ea_tune_runs = 30;
  add_model_flags(ea, ea_flags, true);
  ea->add_option("--instances", ea_instances, "Instances per cell");
  ea->add_option("--runs", ea_runs, "Runs per instance");
  ea->add_option("--mutation-c", ea_mut, "Per-bit mutation rate numerator c (rate = c/n)");
  ea->add_option("--crossover", ea_cx, "1-point crossover probability");
  ea->add_option("--pop", ea_pop, "Population size");
  ea->add_option("--budget", ea_budget, "Evaluation budget (0 = ceil(0.1 * 2^n))");
  ea->add_option("--elitism", ea_elitism, "Elites copied per generation");
  ea->add_flag("--tune", ea_tune, "Tune rates per cell on the 6x6 grid first");
  ea->add_option("--tune-runs", ea_tune_runs, "Runs per instance while tuning");
  ea->add_option("--out-dir", ea_outdir, "Directory for ea_results.csv");
  ea->add_option("--workers", ea_workers, "Worker threads");

  // ---- tune ----
  auto* tune = app.add_subcommand("tune", "Grid-search mutation and crossover rates");
  ModelFlags tune_flags;
  std::uint32_t tune_instances = 30, tune_runs = 30;
  std::uint32_t tune_pop = 100;
  std::uint64_t tune_budget = 0;
  std::string tune_out;
  add_model_flags(tune, tune_flags, false);
  tune->add_option("--instances", tune_instances, "Seeded instances per pair");
  tune->add_option("--runs", tune_runs, "Runs per instance");
  tune->add_option("--pop", tune_pop, "Population size");
  tune->add_option("--budget", tune_budget, "Evaluation budget (0 = ceil(0.1 * 2^n))");
  tune->add_option("--out", tune_out, "Output path (default stdout)");

  // ---- aggregate ----
  auto* aggregate = app.add_subcommand("aggregate", "Per-cell means/sds of a metrics CSV");
  std::string agg_in, agg_out;
  aggregate->add_option("--metrics", agg_in, "metrics.csv path")->required();
  aggregate->add_option("--out", agg_out, "Output path (default stdout)");

  // ---- compare ----
  auto* compare = app.add_subcommand(
      "compare", "Mann-Whitney U between two result columns");
  std::string cmp_a, cmp_b, cmp_col_a, cmp_col_b, cmp_alt = "two-sided";
  compare->add_option("--csv-a", cmp_a, "First CSV")->required();
  compare->add_option("--col-a", cmp_col_a, "Column in the first CSV")->required();
  compare->add_option("--csv-b", cmp_b, "Second CSV")->required();
  compare->add_option("--col-b", cmp_col_b, "Column in the second CSV")->required();
  compare->add_option("--alternative", cmp_alt, "two-sided, less or greater")
      ->check(CLI::IsMember({"two-sided", "less", "greater"}));

  // ---- export ----
  auto* export_cmd = app.add_subcommand("export", "Export one instance's LON");
  std::string ex_instance, ex_format = "edges", ex_out;
  bool ex_mc = false;
  std::uint32_t ex_samples = 1000;
  export_cmd->add_option("--instance", ex_instance, "Instance document")->required();
  export_cmd->add_option("--format", ex_format, "edges, graphml or dot")
      ->check(CLI::IsMember({"edges", "graphml", "dot"}));
  export_cmd->add_option("--out", ex_out, "Output path (default stdout)");
  export_cmd->add_flag("--mc", ex_mc, "Monte Carlo basins");
  export_cmd->add_option("--mc-samples", ex_samples, "Climbs per start in --mc mode");

  CLI11_PARSE(app, argc, argv);

  if (gen->parsed()) {
    const NkInstance inst = generate_instance(single_spec(gen_flags));
    write_or_print(gen_out, serialize_instance(inst) + "\n");
    return kExitOk;
  }

  if (analyze->parsed()) {
    if (!an_outdir.empty()) {
      orchestrate(make_plan(an_flags, an_instances, an_outdir, !an_mc, an_samples,
                            an_force, an_export, an_workers));
      return kExitOk;
    }
    NkInstance inst;
    if (!an_instance.empty()) {
      inst = load_instance(an_instance);
    } else {
      ModelSpec spec = single_spec(an_flags);
      if (spec.n > kDeskScaleMaxN && !an_mc && !an_force)
        throw CapacityError("exact mode beyond n=14 requires --force");
      inst = generate_instance(spec);
    }
    const AnalysisResult res = analyze_instance(
        inst, !an_mc, an_samples, substream_seed(inst.spec.seed, 0x3C));
    if (!an_nn.empty()) {
      std::ofstream out(an_nn);
      write_nn_summary_csv(inst, res.partition, out);
    }
    if (!an_basins.empty()) {
      std::ofstream out(an_basins);
      write_basin_sizes_csv(inst, res.partition, res.distribution, out);
    }
    if (!an_dump.empty()) {
      std::ofstream out(an_dump);
      write_distribution_csv(res.distribution, out);
    }
    if (!an_pernode.empty()) {
      std::ofstream out(an_pernode);
      write_per_node_csv(res.lon, out);
    }
    if (!an_edges.empty()) {
      std::ofstream out(an_edges);
      write_edge_csv(res.lon, out);
    }
    if (!an_graphml.empty()) {
      std::ofstream out(an_graphml);
      write_graphml(res.lon, out);
    }
    if (!an_dot.empty()) {
      std::ofstream out(an_dot);
      write_dot(res.lon, out);
    }
    std::cout << metrics_csv_header() << "\n" << metrics_csv_row(res.metrics) << "\n";
    return kExitOk;
  }

  if (ea->parsed()) {
    EaCampaign campaign;
    campaign.plan = make_plan(ea_flags, ea_instances, ea_outdir, false, 0, false,
                              false, ea_workers);
    campaign.mutation_c = ea_mut;
    campaign.crossover_rate = ea_cx;
    campaign.runs = ea_runs;
    campaign.tune = ea_tune;
    campaign.tune_runs = ea_tune_runs;
    campaign.pop_size = ea_pop;
    campaign.eval_budget = ea_budget;
    campaign.elitism = ea_elitism;
    run_ea_campaign(campaign);
    std::cout << "wrote " << ea_outdir << "/ea_results.csv\n";
    return kExitOk;
  }

  if (tune->parsed()) {
    const ModelSpec family = single_spec(tune_flags);
    EaConfig base;
    base.pop_size = tune_pop;
    base.eval_budget = tune_budget;
    base.seed = substream_seed(family.seed, 0x717E);
    const GridTuneResult res = grid_tune(family, tune_instances, tune_runs, base);
    std::string csv = "mutation_c,crossover,mean_success_rate,best\n";
    for (std::size_t mi = 0; mi < kMutationGridC.size(); ++mi) {
      for (std::size_t ci = 0; ci < kCrossoverGrid.size(); ++ci) {
        const bool best = kMutationGridC[mi] == res.mutation_c &&
                          kCrossoverGrid[ci] == res.crossover_rate;
        csv += fmt_double(kMutationGridC[mi]) + "," + fmt_double(kCrossoverGrid[ci]) +
               "," + fmt_double(res.mean_rate[mi][ci]) + "," + (best ? "1" : "0") + "\n";
      }
    }
    write_or_print(tune_out, csv);
    return kExitOk;
  }

  if (aggregate->parsed()) {
    const CsvTable metrics = read_csv(agg_in);
    write_or_print(agg_out, aggregate_metrics(metrics));
    return kExitOk;
  }

  if (compare->parsed()) {
    auto column = [](const std::string& path, const std::string& name) {
      const CsvTable table = read_csv(path);
      const int col = table.column(name);
      if (col < 0) throw ParameterError("column '" + name + "' not found in " + path);
      std::vector<double> values;
      for (const auto& row : table.rows) {
        if (row[col].empty()) continue;
        values.push_back(std::strtod(row[col].c_str(), nullptr));
      }
      return values;
    };
    const std::vector<double> a = column(cmp_a, cmp_col_a);
    const std::vector<double> b = column(cmp_b, cmp_col_b);
    Alternative alt = Alternative::TwoSided;
    if (cmp_alt == "less") alt = Alternative::Less;
    if (cmp_alt == "greater") alt = Alternative::Greater;
    const TestResult res = mann_whitney(a, b, alt);
    std::cout << "U=" << fmt_double(res.statistic) << " p=" << fmt_double(res.p_value)
              << " n=" << res.n << " m=" << res.m << " method=" << res.method << "\n";
    return kExitOk;
  }

  if (export_cmd->parsed()) {
    const NkInstance inst = load_instance(ex_instance);
    const AnalysisResult res = analyze_instance(
        inst, !ex_mc, ex_samples, substream_seed(inst.spec.seed, 0x3C));
    std::ostringstream out;
    if (ex_format == "edges") write_edge_csv(res.lon, out);
    else if (ex_format == "graphml") write_graphml(res.lon, out);
    else write_dot(res.lon, out);
    write_or_print(ex_out, out.str());
    return kExitOk;
  }

  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const nklon::ParameterError& e) {
    std::cerr << "parameter error: " << e.what() << "\n";
    return nklon::kExitParameter;
  } catch (const nklon::CapacityError& e) {
    std::cerr << "capacity error: " << e.what() << "\n";
    return nklon::kExitCapacity;
  } catch (const nklon::ConvergenceError& e) {
    std::cerr << "convergence error: " << e.what() << "\n";
    return nklon::kExitConvergence;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
