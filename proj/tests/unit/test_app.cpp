#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "bvpdisc_app/commands.hpp"
#include "bvpdisc_app/config.hpp"
#include "bvpdisc_app/dataset.hpp"
#include "support.hpp"

using namespace bvpdisc;
using namespace bvpdisc::app;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / "bvpdisc_unit" / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

ExperimentConfig poisson_config(const fs::path& out) {
  ExperimentConfig c;
  c.model = "poisson2";
  c.output_dir = out;
  c.dataset_trials = 6;
  c.trials = 3;
  return c;
}

}  // namespace

TEST_CASE("config defaults and parsing") {
  const auto d = parse_config("");
  CHECK(d.model == "linear-sl");
  CHECK(d.grid_n == 500);
  CHECK(d.trials == 10);
  CHECK_FALSE(d.pipeline_explicit);

  const auto c = parse_config(
      "[experiment]\nmodel = nonlinear-sl\npipeline = noise-sweep\nseed = 7\nnoise = 0.01\n"
      "[sweep]\nnoise_levels = 0, 0.01 0.05\nseeds = 3\ntarget = identify\n"
      "[differentiation]\nwindow = 21\n[regression]\nbeta = 0.5\n");
  CHECK(c.model == "nonlinear-sl");
  CHECK(c.pipeline == Pipeline::NoiseSweep);
  CHECK(c.pipeline_explicit);
  CHECK(c.seed == 7);
  CHECK(c.noise_levels == std::vector<double>{0.0, 0.01, 0.05});
  CHECK(c.seeds_per_point == 3);
  CHECK(c.sweep_target == SweepTarget::Identify);
  CHECK(c.differentiation(0.01, true).window == 21);
  CHECK(c.differentiation(0.0, false).window == 21);
  CHECK(c.regression_params(0.0).beta == 0.5);
  CHECK(c.regression_params(0.05).beta == 0.5);

  CHECK(d.regression_params(0.0).beta == 1e-6);
  CHECK(d.regression_params(0.01).beta == ExperimentConfig::kNoisyBeta);
  CHECK(d.differentiation(0.0, true).adaptive);
  CHECK_FALSE(d.differentiation(0.01, true).adaptive);

  for (auto p : {Pipeline::IdentifyOperator, Pipeline::EstimateParameters, Pipeline::SelectOrder,
                 Pipeline::NoiseSweep, Pipeline::TrialSweep}) {
    CHECK(parse_pipeline(to_string(p)) == p);
  }
}

TEST_CASE("config errors") {
  CHECK_THROWS(parse_config("[experiment]\nbogus = 1\n"));
  CHECK_THROWS(parse_config("[nosuchsection]\nx = 1\n"));
  CHECK_THROWS(parse_config("model = linear-sl\n"));
  CHECK_THROWS(parse_config("[experiment]\nmodel = heat\n"));
  CHECK_THROWS(parse_config("[experiment]\nnoise = -0.1\n"));
  CHECK_THROWS(parse_config("[experiment]\ntrials = 500\n"));
  CHECK_THROWS(parse_config("[grid]\nn = abc\n"));
  CHECK_THROWS(parse_config("[differentiation]\nwindow = 4\n"));
  CHECK_NOTHROW(parse_config("[sweep]\n"));
}

TEST_CASE("resolved config echoes into json") {
  const auto j = to_json(parse_config(""));
  CHECK(j.contains("experiment"));
  CHECK(j.dump().find("noisy_identify") != std::string::npos);
}

TEST_CASE("dataset round trip") {
  const auto dir = scratch("dataset");
  const auto set = testing::model_trials("poisson2", 3);
  write_dataset(set, dir / "d.csv", 11);
  CHECK(fs::exists(sidecar_path(dir / "d.csv")));
  const auto back = read_dataset(dir / "d.csv");
  CHECK(back.grid() == set.grid());
  CHECK(back.model() == set.model());
  REQUIRE(back.size() == 3);
  for (std::size_t j = 0; j < 3; ++j) {
    CHECK(back[j].u == set[j].u);
    CHECK(back[j].f == set[j].f);
    CHECK(back[j].forcing == set[j].forcing);
  }
  CHECK_THROWS(read_dataset(dir / "missing.csv"));
}

TEST_CASE("full linear dataset has one column per trial field") {
  const auto dir = scratch("linear");
  ExperimentConfig c;
  c.output_dir = dir;
  const auto path = dir / "dataset.csv";
  cmd_generate(c, path);
  std::ifstream in(path);
  std::string header;
  std::getline(in, header);
  CHECK(std::count(header.begin(), header.end(), ',') + 1 == 241);
  std::size_t rows = 0;
  for (std::string line; std::getline(in, line);) ++rows;
  CHECK(rows == 500);
}

TEST_CASE("commands are deterministic") {
  const auto dir = scratch("determinism");
  auto c = poisson_config(dir / "a");
  cmd_generate(c, dir / "data.csv");
  const auto first = slurp(dir / "data.csv");
  cmd_generate(c, dir / "data.csv");
  CHECK(slurp(dir / "data.csv") == first);

  c.pipeline = Pipeline::IdentifyOperator;
  const std::vector<std::string> files{"report.json", "coefficients.csv", "parameters.csv",
                                       "sweep.csv"};
  cmd_discover(c, dir / "data.csv");
  std::vector<std::string> before;
  for (const auto& f : files) {
    CHECK(fs::exists(dir / "a" / f));
    before.push_back(slurp(dir / "a" / f));
  }
  cmd_discover(c, dir / "data.csv");
  for (std::size_t i = 0; i < files.size(); ++i) CHECK(slurp(dir / "a" / files[i]) == before[i]);
}

TEST_CASE("clean Poisson runs") {
  auto c = poisson_config("unused");
  const auto data = generate_dataset(c);
  const auto id = run_identify(c, data, 3, 0.0, 1);
  CHECK(id.exact_support());
  CHECK(id.primary_error() < 1e-3);
  CHECK(id.trial_indices.size() == 3);
  const auto est = run_estimate(c, data, 2, 0.0, 1);
  CHECK(est.primary_error() < 1e-3);
  CHECK_THROWS(run_estimate(c, data, 7, 0.0, 1));
}

TEST_CASE("choose_trials") {
  const auto a = choose_trials(20, 5, 3);
  CHECK(a == choose_trials(20, 5, 3));
  CHECK(a.size() == 5);
  CHECK(std::is_sorted(a.begin(), a.end()));
  CHECK(std::adjacent_find(a.begin(), a.end()) == a.end());
  CHECK(choose_trials(4, 4, 9) == std::vector<std::size_t>{0, 1, 2, 3});
}

TEST_CASE("zero-noise sweep point equals a standalone run") {
  auto c = poisson_config("unused");
  c.pipeline = Pipeline::NoiseSweep;
  c.noise_levels = {0.0, 0.01};
  c.seeds_per_point = 2;
  const auto data = generate_dataset(c);
  const auto sweep = run_sweep(c, data);
  CHECK(sweep.axis == "noise");
  REQUIRE(sweep.points.size() == 2);
  REQUIRE(sweep.points[0].runs.size() == 2);
  const auto alone = run_estimate(c, data, c.trials, 0.0, c.seed + 1);
  CHECK(sweep.points[0].runs[1].primary_error() == alone.primary_error());
  CHECK(sweep.points[0].runs[1].trial_indices == alone.trial_indices);
}

TEST_CASE("order selection report") {
  const auto dir = scratch("order");
  ExperimentConfig c;
  c.pipeline = Pipeline::SelectOrder;
  c.output_dir = dir;
  c.dataset_trials = 12;
  c.trials = 12;
  c.orders = {1, 2};
  cmd_generate(c, dir / "data.csv");
  const auto r = run_order(c, read_dataset(dir / "data.csv"));
  CHECK(r.selection.best_order == 2);
  CHECK(r.train_indices.size() + r.test_indices.size() == 12);
  cmd_order(c, dir / "data.csv");
  std::ifstream in(dir / "order.csv");
  std::string header;
  std::getline(in, header);
  CHECK(header == "order,error,active_terms");
  CHECK(fs::exists(dir / "order_report.json"));
}

TEST_CASE("shipped configs parse and validate") {
  std::size_t count = 0;
  for (const auto& entry : fs::directory_iterator(fs::path(BVPDISC_SOURCE_DIR) / "configs")) {
    if (entry.path().extension() != ".ini") continue;
    CAPTURE(entry.path().string());
    CHECK_NOTHROW(load_config(entry.path()));
    ++count;
  }
  CHECK(count > 0);
}
