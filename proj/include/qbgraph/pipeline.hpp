#pragma once

#include "qbgraph/samplers.hpp"
#include "qbgraph/sigma.hpp"
#include "qbgraph/simulate.hpp"
#include "qbgraph/types.hpp"

#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

namespace qbgraph {

/// Everything a pipeline run needs. Settings: 'a' and 'c' use the sparse
/// shifted generator (default p 100 and 1000), 'b' the hub network (p 500).
struct RunConfig {
  std::string command = "all";  // simulate | fit | evaluate | diagnose | plot | all
  char setting = 'a';
  Index p = 0;  // 0: the setting's default
  Index n = 250;
  std::uint64_t seed = 1;
  int reps = 20;
  std::vector<SigmaMode> sigma_modes{SigmaMode::Known};
  ChainConfig chain;
  Hyperparameters hyper;
  int folds = 10;
  double signal = 3.0;
  double eps = 1.0;
  HubLayout hub;
  unsigned workers = 1;
  std::filesystem::path out = "qbgraph_out";
  double theory_budget = 1e6;

  RunConfig();

  /// Fills defaults that depend on other fields (p, hub modules) and
  /// validates. Throws InvalidArgument.
  void resolve();

  /// Flat "section.key" -> value view, every field explicit.
  std::map<std::string, std::string> to_map() const;
  /// Applies "section.key" entries; throws InvalidArgument on an unknown key
  /// or a malformed value.
  void apply(const std::map<std::string, std::string>& entries);
};

const char* sigma_mode_name(SigmaMode mode) noexcept;

/// Output layout under config.out:
///   resolved_config.txt, truth.csv, data/rep_NNN.csv,
///   fits/rep_NNN_<mode>.json, metrics.csv, theory.json, geweke.csv, intervals.svg
/// Progress goes to `log`. Throws qbgraph::Error on failure.
void run_pipeline(RunConfig config, std::ostream& log);

}  // namespace qbgraph
