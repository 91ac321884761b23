#include "helpers.hpp"
#include "qbgraph/aggregate.hpp"
#include "qbgraph/errors.hpp"
#include "qbgraph/io.hpp"
#include "qbgraph/pipeline.hpp"
#include "qbgraph/simulate.hpp"

#include <doctest.h>

#include <sstream>

using namespace qbgraph;

namespace {

fs::path scratch_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("qbgraph_test_pipeline_" + name);
  fs::remove_all(dir);
  return dir;
}

RunConfig small_config(const fs::path& out) {
  RunConfig c;
  c.setting = 'c';
  c.p = 20;
  c.seed = 7;
  c.reps = 2;
  c.chain.n_iterations = 1500;
  c.chain.burn_in = 300;
  c.workers = 2;
  c.out = out;
  return c;
}

std::vector<std::string> data_lines(const fs::path& path) {
  std::istringstream in(read_text(path));
  std::vector<std::string> out;
  for (std::string line; std::getline(in, line);) {
    if (!line.empty() && line[0] != '#') out.push_back(line);
  }
  return out;
}

}  // namespace

TEST_CASE("simulate is reproducible byte for byte") {
  const fs::path dir = scratch_dir("simulate");
  RunConfig c = small_config(dir);
  c.command = "simulate";
  std::ostringstream log;
  run_pipeline(c, log);
  const std::string truth = read_text(dir / "truth.csv");
  const std::string rep1 = read_text(dir / "data" / "rep_001.csv");
  const std::string rep2 = read_text(dir / "data" / "rep_002.csv");
  run_pipeline(c, log);
  CHECK(read_text(dir / "truth.csv") == truth);
  CHECK(read_text(dir / "data" / "rep_001.csv") == rep1);
  CHECK(rep1 != rep2);
  CHECK(read_matrix_csv(dir / "truth.csv") == gen_setting_c(20, 7).entries());
  const auto rows = data_lines(dir / "data" / "rep_001.csv");
  CHECK(rows.size() == 250);
  CHECK(std::count(rows[0].begin(), rows[0].end(), ',') == 19);
  CHECK(truth.find("# run.seed = 7") != std::string::npos);
  fs::remove_all(dir);
}

TEST_CASE("evaluate on a perfect estimate") {
  const fs::path dir = scratch_dir("evaluate");
  RunConfig c = small_config(dir);
  c.reps = 1;
  const PrecisionMatrix truth = gen_setting_c(20, 7);
  write_matrix_csv(dir / "truth.csv", truth.entries());
  GraphEstimate est;
  est.theta_hat = truth;
  est.delta_hat = (truth.entries().array() != 0.0).cast<std::uint8_t>();
  est.intervals.lower = truth.entries();
  est.intervals.upper = truth.entries();
  est.intervals.disjoint = BitMatrix::Zero(20, 20);
  write_text(dir / "fits" / "rep_001_known.json", Json{{"estimate", to_json(est)}}.dump());
  c.command = "evaluate";
  std::ostringstream log;
  run_pipeline(c, log);
  const auto rows = data_lines(dir / "metrics.csv");
  REQUIRE(rows.size() == 3);
  CHECK(rows[0] == "replication,mode,rel_error,sensitivity,precision");
  CHECK(rows[1] == "1,known,0,1,1");
  CHECK(rows[2] == "mean,known,0,1,1");
  fs::remove_all(dir);
}

TEST_CASE("full pipeline writes every artifact") {
  const fs::path dir = scratch_dir("all");
  RunConfig c = small_config(dir);
  c.sigma_modes = {SigmaMode::Known, SigmaMode::EmpiricalCV};
  std::ostringstream log;
  run_pipeline(c, log);
  for (const char* f : {"resolved_config.txt", "truth.csv", "metrics.csv", "theory.json", "geweke.csv",
                        "intervals.svg", "fits/rep_001_known.json", "fits/rep_002_cv.json"}) {
    CHECK_MESSAGE(fs::exists(dir / f), f);
  }
  const auto rows = data_lines(dir / "metrics.csv");
  REQUIRE(rows.size() == 7);
  int known = 0;
  int cv = 0;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    known += rows[i].find(",known,") != std::string::npos;
    cv += rows[i].find(",cv,") != std::string::npos;
  }
  CHECK(known == 3);
  CHECK(cv == 3);
  CHECK(data_lines(dir / "geweke.csv").size() == 1 + 2 * 2 * 20);

  const Json theory = Json::parse(read_text(dir / "theory.json"));
  CHECK(theory.at("config").at("run.seed") == "7");
  CHECK(theory.at("report").at("p") == 20);
  const Json fit = Json::parse(read_text(dir / "fits" / "rep_002_cv.json"));
  CHECK(fit.at("fit").at("config").at("mode") == "cv");
  CHECK(fit.at("fit").at("summaries").size() == 20);
  CHECK(read_text(dir / "intervals.svg").rfind("<!--", 0) == 0);
  CHECK(log.str().find("evaluate known") != std::string::npos);
  fs::remove_all(dir);
}

TEST_CASE("configuration") {
  RunConfig c;
  c.apply(parse_config("[run]\nsetting = b\nsigma = both\n[chain]\nkernel = exact\niters = 900\nburnin = 100\n"));
  c.resolve();
  CHECK(c.setting == 'b');
  CHECK(c.p == 500);
  CHECK(c.sigma_modes.size() == 2);
  CHECK(c.chain.kernel == KernelKind::ExactRJ);
  CHECK(c.chain.n_iterations == 900);

  RunConfig round;
  round.apply(c.to_map());
  round.resolve();
  CHECK(round.to_map() == c.to_map());

  RunConfig fresh;
  fresh.resolve();
  CHECK(fresh.p == 100);
  CHECK(fresh.chain.kernel == KernelKind::MoreauYosida);
  CHECK(fresh.to_map().at("prior.a2") == "auto");

  RunConfig bad;
  CHECK_THROWS_AS(bad.apply({{"run.nonsense", "1"}}), InvalidArgument);
  CHECK_THROWS_AS(bad.apply({{"run.n", "many"}}), InvalidArgument);
  CHECK_THROWS_AS(bad.apply({{"chain.kernel", "gibbs"}}), InvalidArgument);
  RunConfig bad_setting;
  bad_setting.setting = 'z';
  CHECK_THROWS_AS(bad_setting.resolve(), InvalidArgument);
  RunConfig bad_command;
  bad_command.command = "train";
  CHECK_THROWS_AS(bad_command.resolve(), InvalidArgument);
}

TEST_CASE("missing inputs are reported") {
  const fs::path dir = scratch_dir("missing");
  RunConfig c = small_config(dir);
  c.command = "fit";
  std::ostringstream log;
  CHECK_THROWS_AS(run_pipeline(c, log), IoError);
  fs::remove_all(dir);
}
