#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "nklon/csvio.hpp"
#include "nklon/errors.hpp"
#include "nklon/experiment.hpp"

using namespace nklon;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& name) : path(fs::temp_directory_path() / name) {
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

ExperimentPlan small_plan(const std::string& outdir) {
  ExperimentPlan plan;
  plan.variant = Variant::Quantized;
  plan.params = {2, 4};
  plan.ks = {1, 2};
  plan.n = 6;
  plan.instances = 2;
  plan.base_seed = 31;
  plan.exact = true;
  plan.outdir = outdir;
  return plan;
}

}  // namespace

TEST_CASE("plan validation") {
  ExperimentPlan plan = small_plan("x");
  plan.params.clear();
  CHECK_THROWS_AS(plan.validate(), ParameterError);

  plan = small_plan("x");
  plan.n = 16;  // exact beyond the desk-scale cap
  CHECK_THROWS_AS(plan.validate(), CapacityError);
  plan.force = true;
  CHECK_NOTHROW(plan.validate());
  plan.force = false;
  plan.exact = false;
  CHECK_NOTHROW(plan.validate());

  plan = small_plan("x");
  plan.variant = Variant::Standard;
  CHECK_THROWS_AS(plan.validate(), ParameterError);  // params must be {0}
}

TEST_CASE("orchestrate writes instances, metrics, aggregate and manifest") {
  TempDir dir("nklon_test_orchestrate");
  const ExperimentPlan plan = small_plan(dir.path.string());
  orchestrate(plan);

  CHECK(fs::exists(dir.path / "metrics.csv"));
  CHECK(fs::exists(dir.path / "aggregate.csv"));
  CHECK(fs::exists(dir.path / "manifest.json"));
  CHECK(fs::exists(dir.path / "cells" / "nkq_q2_k1" / "instance_0.json"));
  CHECK(fs::exists(dir.path / "cells" / "nkq_q4_k2" / "instance_1.json"));

  const CsvTable metrics = read_csv((dir.path / "metrics.csv").string());
  CHECK(metrics.rows.size() == 8);  // 2 params x 2 ks x 2 instances
  const CsvTable aggregate = read_csv((dir.path / "aggregate.csv").string());
  CHECK(aggregate.rows.size() == 4);

  // the instance documents replay through the deserializer
  const NkInstance inst = deserialize_instance(
      slurp(dir.path / "cells" / "nkq_q2_k1" / "instance_0.json"));
  CHECK(inst.spec.q == 2);
  CHECK(inst.spec.k == 1);
  CHECK(inst.spec.n == 6);

  const std::string manifest = slurp(dir.path / "manifest.json");
  CHECK(manifest.find("splitmix64") != std::string::npos);
  CHECK(manifest.find("artifact_version") != std::string::npos);
}

TEST_CASE("re-running a plan produces byte-identical outputs and skips cells") {
  TempDir dir("nklon_test_rerun");
  const ExperimentPlan plan = small_plan(dir.path.string());
  orchestrate(plan);
  const std::string metrics_first = slurp(dir.path / "metrics.csv");
  const std::string aggregate_first = slurp(dir.path / "aggregate.csv");
  const std::string instance_first =
      slurp(dir.path / "cells" / "nkq_q2_k1" / "instance_0.json");

  orchestrate(plan);
  CHECK(slurp(dir.path / "metrics.csv") == metrics_first);
  CHECK(slurp(dir.path / "aggregate.csv") == aggregate_first);
  CHECK(slurp(dir.path / "cells" / "nkq_q2_k1" / "instance_0.json") == instance_first);

  // partial output: truncate one cell file, the cell is recomputed
  std::ofstream truncate(dir.path / "cells" / "nkq_q2_k1" / "metrics.csv");
  truncate << metrics_csv_header() << "\n";
  truncate.close();
  orchestrate(plan);
  CHECK(slurp(dir.path / "metrics.csv") == metrics_first);
}

TEST_CASE("aggregate means equal a recomputation from the metrics rows") {
  TempDir dir("nklon_test_aggregate");
  const ExperimentPlan plan = small_plan(dir.path.string());
  orchestrate(plan);
  const CsvTable metrics = read_csv((dir.path / "metrics.csv").string());
  const CsvTable aggregate = read_csv((dir.path / "aggregate.csv").string());

  const int nodes_col = metrics.column("n_nodes");
  const int k_col = metrics.column("k");
  const int param_col = metrics.column("param");
  REQUIRE(nodes_col >= 0);
  const int agg_mean_col = aggregate.column("mean_n_nodes");
  REQUIRE(agg_mean_col >= 0);

  for (const auto& arow : aggregate.rows) {
    const std::string k = arow[aggregate.column("k")];
    const std::string param = arow[aggregate.column("param")];
    double total = 0.0;
    std::size_t count = 0;
    for (const auto& mrow : metrics.rows) {
      if (mrow[k_col] == k && mrow[param_col] == param) {
        total += std::strtod(mrow[nodes_col].c_str(), nullptr);
        ++count;
      }
    }
    REQUIRE(count > 0);
    const double mean = total / static_cast<double>(count);
    CHECK(fmt_double(mean) == arow[agg_mean_col]);
  }
}

TEST_CASE("monte carlo plans run end to end") {
  TempDir dir("nklon_test_mc");
  ExperimentPlan plan = small_plan(dir.path.string());
  plan.params = {2};
  plan.ks = {2};
  plan.exact = false;
  plan.mc_samples = 50;
  orchestrate(plan);
  const CsvTable metrics = read_csv((dir.path / "metrics.csv").string());
  REQUIRE(metrics.rows.size() == 2);
  const int exact_col = metrics.column("exact");
  for (const auto& row : metrics.rows) CHECK(row[exact_col] == "0");
}

TEST_CASE("lon exports appear when requested") {
  TempDir dir("nklon_test_export");
  ExperimentPlan plan = small_plan(dir.path.string());
  plan.params = {2};
  plan.ks = {1};
  plan.instances = 1;
  plan.export_lon = true;
  orchestrate(plan);
  CHECK(fs::exists(dir.path / "cells" / "nkq_q2_k1" / "lon_0.csv"));
  CHECK(fs::exists(dir.path / "cells" / "nkq_q2_k1" / "lon_0.graphml"));
  CHECK(fs::exists(dir.path / "cells" / "nkq_q2_k1" / "lon_0.dot"));
}

TEST_CASE("ea campaigns write one row per instance") {
  TempDir dir("nklon_test_ea");
  EaCampaign campaign;
  campaign.plan = small_plan(dir.path.string());
  campaign.plan.params = {2};
  campaign.plan.ks = {1, 2};
  campaign.plan.instances = 2;
  campaign.mutation_c = 1.0;
  campaign.crossover_rate = 0.2;
  campaign.runs = 5;
  campaign.pop_size = 20;
  campaign.eval_budget = 100;
  run_ea_campaign(campaign);
  const CsvTable results = read_csv((dir.path / "ea_results.csv").string());
  CHECK(results.rows.size() == 4);
  const int rate_col = results.column("success_rate");
  REQUIRE(rate_col >= 0);
  for (const auto& row : results.rows) {
    const double rate = std::strtod(row[rate_col].c_str(), nullptr);
    CHECK(rate >= 0.0);
    CHECK(rate <= 1.0);
  }
}

TEST_CASE("csv reader handles headers and missing fields") {
  TempDir dir("nklon_test_csv");
  const fs::path path = dir.path / "t.csv";
  std::ofstream out(path);
  out << "a,b,c\n1,,3\n4,5,\n";
  out.close();
  const CsvTable table = read_csv(path.string());
  REQUIRE(table.header.size() == 3);
  CHECK(table.column("b") == 1);
  CHECK(table.column("zz") == -1);
  REQUIRE(table.rows.size() == 2);
  CHECK(table.rows[0][1].empty());
  CHECK(table.rows[1][2].empty());
  CHECK_THROWS_AS(static_cast<void>(read_csv("/nonexistent/nope.csv")), ParameterError);
}
