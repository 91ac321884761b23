#include "qbgraph/errors.hpp"
#include "qbgraph/io.hpp"
#include "qbgraph/pipeline.hpp"

#include <CLI11.hpp>

#include <iostream>
#include <map>
#include <optional>
#include <string>

namespace {

int report_error(const std::string& type, const std::string& message) {
  std::cerr << qbgraph::Json{{"error", {{"type", type}, {"message", message}}}}.dump() << '\n';
  return 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Graph estimation by per-node spike-and-slab regressions"};
  std::string command;
  std::string config_path;
  std::map<std::string, std::string> overrides;
  std::optional<long long> p, n, iters, burnin, workers, reps;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> setting, sigma, kernel, out;

  app.add_option("command", command, "simulate | fit | evaluate | diagnose | plot | all")
      ->required()
      ->check(CLI::IsMember({"simulate", "fit", "evaluate", "diagnose", "plot", "all"}));
  app.add_option("--config", config_path, "key = value configuration file")->check(CLI::ExistingFile);
  app.add_option("--p", p, "number of nodes");
  app.add_option("--n", n, "sample size");
  app.add_option("--seed", seed, "base seed");
  app.add_option("--setting", setting, "a, b or c")->check(CLI::IsMember({"a", "b", "c"}));
  app.add_option("--sigma", sigma, "known, cv or both")->check(CLI::IsMember({"known", "cv", "both"}));
  app.add_option("--kernel", kernel, "exact or my")->check(CLI::IsMember({"exact", "my"}));
  app.add_option("--iters", iters, "MCMC iterations per chain");
  app.add_option("--burnin", burnin, "burn-in iterations");
  app.add_option("--workers", workers, "worker threads (default: QBGRAPH_WORKERS or all cores)");
  app.add_option("--reps", reps, "replications");
  app.add_option("--out", out, "output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    report_error("usage", e.what());
    return 2;
  }

  auto set = [&](const char* key, const auto& value) {
    if (!value) return;
    if constexpr (std::is_same_v<std::decay_t<decltype(*value)>, std::string>) {
      overrides[key] = *value;
    } else {
      overrides[key] = std::to_string(*value);
    }
  };
  set("run.p", p);
  set("run.n", n);
  set("run.seed", seed);
  set("run.setting", setting);
  set("run.sigma", sigma);
  set("chain.kernel", kernel);
  set("chain.iters", iters);
  set("chain.burnin", burnin);
  set("run.workers", workers);
  set("run.reps", reps);
  set("run.out", out);

  try {
    qbgraph::RunConfig config;
    config.command = command;
    if (!config_path.empty()) config.apply(qbgraph::parse_config(qbgraph::read_text(config_path)));
    config.apply(overrides);
    qbgraph::run_pipeline(config, std::cerr);
  } catch (const qbgraph::Error& e) {
    return report_error(e.kind(), e.what());
  } catch (const std::exception& e) {
    return report_error("internal", e.what());
  }
  return 0;
}
