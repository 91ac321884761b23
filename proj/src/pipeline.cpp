#include "qbgraph/pipeline.hpp"

#include "qbgraph/aggregate.hpp"
#include "qbgraph/diagnostics.hpp"
#include "qbgraph/errors.hpp"
#include "qbgraph/io.hpp"
#include "qbgraph/orchestrator.hpp"
#include "qbgraph/rng.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <sstream>
#include <thread>

namespace qbgraph {
namespace {

constexpr std::uint64_t kDataStream = 1'000'000;
constexpr std::uint64_t kChainStream = 2'000'000;
constexpr std::uint64_t kFoldStream = 3'000'000;

long long parse_int(const std::string& key, const std::string& value) {
  std::size_t used = 0;
  long long v = 0;
  try {
    v = std::stoll(value, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != value.size() || value.empty()) throw InvalidArgument(key + ": expected an integer, got '" + value + "'");
  return v;
}

std::uint64_t parse_u64(const std::string& key, const std::string& value) {
  std::size_t used = 0;
  std::uint64_t v = 0;
  try {
    v = std::stoull(value, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != value.size() || value.empty() || value[0] == '-') {
    throw InvalidArgument(key + ": expected a non-negative integer, got '" + value + "'");
  }
  return v;
}

double parse_real(const std::string& key, const std::string& value) {
  try {
    const double v = parse_double(value);
    if (std::isnan(v)) throw InvalidArgument("NA");
    return v;
  } catch (const InvalidArgument&) {
    throw InvalidArgument(key + ": expected a number, got '" + value + "'");
  }
}

bool parse_bool(const std::string& key, const std::string& value) {
  if (value == "true" || value == "1") return true;
  if (value == "false" || value == "0") return false;
  throw InvalidArgument(key + ": expected true or false, got '" + value + "'");
}

std::string rep_tag(int r) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "rep_%03d", r);
  return buf;
}

fs::path data_path(const RunConfig& c, int r) { return c.out / "data" / (rep_tag(r) + ".csv"); }

fs::path fit_path(const RunConfig& c, int r, SigmaMode mode) {
  return c.out / "fits" / (rep_tag(r) + "_" + sigma_mode_name(mode) + ".json");
}

std::vector<std::string> config_comments(const std::map<std::string, std::string>& cfg) {
  std::vector<std::string> out{"qbgraph resolved configuration"};
  for (const auto& [k, v] : cfg) out.push_back(k + " = " + v);
  return out;
}

PrecisionMatrix load_truth(const RunConfig& c) {
  return PrecisionMatrix(read_matrix_csv(c.out / "truth.csv"));
}

DataMatrix load_data(const RunConfig& c, int r, Index p) {
  DataMatrix data(read_data_csv(data_path(c, r)));
  if (data.p() != p) throw InvalidArgument(data_path(c, r).string() + " has the wrong number of columns");
  return data;
}

std::string metric_field(const std::optional<double>& v) { return v ? format_double(*v) : "NA"; }

void run_simulate(const RunConfig& c, const std::map<std::string, std::string>& cfg, std::ostream& log) {
  GeneratorSpec spec;
  spec.kind = c.setting == 'b' ? GeneratorKind::HubNetwork : GeneratorKind::SettingC;
  spec.p = c.p;
  spec.seed = c.seed;
  spec.signal = c.signal;
  spec.eps = c.eps;
  spec.hub = c.hub;
  const PrecisionMatrix truth = generate(spec);
  const auto comments = config_comments(cfg);
  write_matrix_csv(c.out / "truth.csv", truth.entries(), comments);
  for (int r = 1; r <= c.reps; ++r) {
    const DataMatrix data = sample_gaussian(truth, c.n, derive_seed(c.seed, kDataStream + r));
    write_data_csv(data_path(c, r), data.values(), comments);
  }
  log << "simulate: setting " << c.setting << ", p = " << c.p << ", " << c.reps << " data sets of n = " << c.n
      << '\n';
}

void run_fit(const RunConfig& c, const std::map<std::string, std::string>& cfg, std::ostream& log) {
  const PrecisionMatrix truth = load_truth(c);
  const Vector known = truth.entries().diagonal().cwiseInverse();
  for (int r = 1; r <= c.reps; ++r) {
    const DataMatrix data = load_data(c, r, truth.dim());
    for (SigmaMode mode : c.sigma_modes) {
      const std::string tag = "fit " + rep_tag(r) + " " + sigma_mode_name(mode);
      SigmaSpec sspec;
      sspec.mode = mode;
      sspec.known_values = known;
      sspec.folds = c.folds;
      sspec.seed = derive_seed(c.seed, kFoldStream + r);
      Hyperparameters hyper = c.hyper;
      hyper.sigma2 = resolve_sigma2(data, sspec, c.workers);

      ChainConfig chain = c.chain;
      chain.seed = derive_seed(c.seed, kChainStream + r);
      std::atomic<Index> done{0};
      FitResult fit;
      {
        const Index p = data.p();
        std::jthread monitor([&](std::stop_token stop) {
          auto last = std::chrono::steady_clock::now();
          while (!stop.stop_requested()) {
            std::this_thread::sleep_for(std::chrono::milliseconds(200));
            if (std::chrono::steady_clock::now() - last >= std::chrono::seconds(30)) {
              last = std::chrono::steady_clock::now();
              log << tag << ": " << done.load() << "/" << p << " columns\n" << std::flush;
            }
          }
        });
        fit = fit_all(data, hyper, chain, c.workers, &done);
      }
      fit.config_echo = cfg;
      fit.config_echo["replication"] = std::to_string(r);
      fit.config_echo["mode"] = sigma_mode_name(mode);
      const GraphEstimate est = aggregate(fit);
      write_text(fit_path(c, r, mode), Json{{"fit", to_json(fit)}, {"estimate", to_json(est)}}.dump() + "\n");
      char secs[32];
      std::snprintf(secs, sizeof secs, "%.1f", fit.wall_time);
      log << tag << ": done in " << secs << " s\n" << std::flush;
    }
  }
}

void run_evaluate(const RunConfig& c, const std::map<std::string, std::string>& cfg, std::ostream& log) {
  const PrecisionMatrix truth = load_truth(c);
  std::ostringstream csv;
  for (const auto& line : config_comments(cfg)) csv << "# " << line << '\n';
  csv << "replication,mode,rel_error,sensitivity,precision\n";
  for (SigmaMode mode : c.sigma_modes) {
    double sums[3] = {0, 0, 0};
    int counts[3] = {0, 0, 0};
    for (int r = 1; r <= c.reps; ++r) {
      const Json j = Json::parse(read_text(fit_path(c, r, mode)));
      const GraphEstimate est = graph_estimate_from_json(j.at("estimate"));
      const Metrics m = metrics(est.theta_hat, truth);
      csv << r << ',' << sigma_mode_name(mode) << ',' << format_double(m.rel_error) << ','
          << metric_field(m.sensitivity) << ',' << metric_field(m.precision) << '\n';
      const std::optional<double> vals[3] = {m.rel_error, m.sensitivity, m.precision};
      for (int k = 0; k < 3; ++k) {
        if (vals[k]) {
          sums[k] += *vals[k];
          ++counts[k];
        }
      }
    }
    std::optional<double> means[3];
    for (int k = 0; k < 3; ++k) {
      if (counts[k] > 0) means[k] = sums[k] / counts[k];
    }
    csv << "mean," << sigma_mode_name(mode) << ',' << metric_field(means[0]) << ',' << metric_field(means[1])
        << ',' << metric_field(means[2]) << '\n';
    char line[160];
    std::snprintf(line, sizeof line, "evaluate %s: E %.1f%%  SEN %.1f%%  PREC %.1f%%", sigma_mode_name(mode),
                  100 * means[0].value_or(NAN), 100 * means[1].value_or(NAN), 100 * means[2].value_or(NAN));
    log << line << '\n';
  }
  write_text(c.out / "metrics.csv", csv.str());
}

void run_diagnose(const RunConfig& c, const std::map<std::string, std::string>& cfg, std::ostream& log) {
  const PrecisionMatrix truth = load_truth(c);
  const Vector known = truth.entries().diagonal().cwiseInverse();
  const TheoryReport report = theory_quantities(truth, known, c.n, c.hyper.u, true, c.theory_budget);
  write_text(c.out / "theory.json", Json{{"config", cfg}, {"report", to_json(report)}}.dump(2) + "\n");

  std::ostringstream csv;
  for (const auto& line : config_comments(cfg)) csv << "# " << line << '\n';
  csv << "replication,mode,column,z,pass\n";
  int passed = 0;
  int total = 0;
  for (int r = 1; r <= c.reps; ++r) {
    for (SigmaMode mode : c.sigma_modes) {
      const fs::path path = fit_path(c, r, mode);
      if (!fs::exists(path)) continue;
      const FitResult fit = fit_result_from_json(Json::parse(read_text(path)).at("fit"));
      for (std::size_t j = 0; j < fit.summaries.size(); ++j) {
        const auto& z = fit.summaries[j].geweke_z;
        csv << r << ',' << sigma_mode_name(mode) << ',' << j + 1 << ',' << metric_field(z) << ',';
        if (z) {
          const bool pass = std::abs(*z) < 1.96;
          csv << (pass ? 1 : 0);
          passed += pass;
          ++total;
        } else {
          csv << "NA";
        }
        csv << '\n';
      }
    }
  }
  write_text(c.out / "geweke.csv", csv.str());
  log << "diagnose: theory report" << (report.flags.count("partial") ? " (partial)" : "") << ", Geweke |z| < 1.96 in "
      << passed << "/" << total << " chains\n";
}

void run_plot(const RunConfig& c, const std::map<std::string, std::string>& cfg, std::ostream& log) {
  const PrecisionMatrix truth = load_truth(c);
  const fs::path path = fit_path(c, 1, c.sigma_modes.front());
  const GraphEstimate est = graph_estimate_from_json(Json::parse(read_text(path)).at("estimate"));
  std::string header = "<!--\n";
  for (const auto& line : config_comments(cfg)) header += line + "\n";
  header += "-->\n";
  write_text(c.out / "intervals.svg", header + interval_svg(est, truth));
  log << "plot: intervals of " << path.filename().string() << '\n';
}

}  // namespace

const char* sigma_mode_name(SigmaMode mode) noexcept { return mode == SigmaMode::Known ? "known" : "cv"; }

RunConfig::RunConfig() {
  chain.kernel = KernelKind::MoreauYosida;
  workers = default_workers();
}

void RunConfig::resolve() {
  static const char* commands[] = {"simulate", "fit", "evaluate", "diagnose", "plot", "all"};
  if (std::find(std::begin(commands), std::end(commands), command) == std::end(commands)) {
    throw InvalidArgument("unknown command '" + command + "'");
  }
  if (setting != 'a' && setting != 'b' && setting != 'c') throw InvalidArgument("setting must be a, b or c");
  if (p == 0) {
    p = setting == 'a' ? 100 : setting == 'b' ? hub.modules * hub.module_size : 1000;
  } else if (setting == 'b') {
    if (hub.module_size < 1 || p % hub.module_size != 0) {
      throw InvalidArgument("setting b needs p to be a multiple of hub.module_size");
    }
    hub.modules = p / hub.module_size;
  }
  if (p < 4) throw InvalidArgument("p must be at least 4");
  if (n < 2) throw InvalidArgument("n must be at least 2");
  if (reps < 1) throw InvalidArgument("reps must be at least 1");
  if (folds < 2) throw InvalidArgument("sigma.folds must be at least 2");
  if (workers < 1) throw InvalidArgument("workers must be at least 1");
  if (sigma_modes.empty()) throw InvalidArgument("no sigma mode selected");
  if (!(theory_budget >= 1.0)) throw InvalidArgument("diagnose.budget must be at least 1");
  chain.validate();
}

std::map<std::string, std::string> RunConfig::to_map() const {
  std::string sigma = sigma_modes.size() == 2 ? "both" : sigma_mode_name(sigma_modes.front());
  return {
      {"run.setting", std::string(1, setting)},
      {"run.p", std::to_string(p)},
      {"run.n", std::to_string(n)},
      {"run.seed", std::to_string(seed)},
      {"run.reps", std::to_string(reps)},
      {"run.sigma", sigma},
      {"run.workers", std::to_string(workers)},
      {"run.out", out.string()},
      {"chain.kernel", kernel_name(chain.kernel)},
      {"chain.iters", std::to_string(chain.n_iterations)},
      {"chain.burnin", std::to_string(chain.burn_in)},
      {"chain.thin", std::to_string(chain.thin)},
      {"chain.rw_scale", format_double(chain.rw_scale)},
      {"chain.adapt", chain.adapt ? "true" : "false"},
      {"prior.alpha", format_double(hyper.alpha)},
      {"prior.u", format_double(hyper.u)},
      {"prior.a1", format_double(hyper.a1)},
      {"prior.a2", hyper.a2 > 0.0 ? format_double(hyper.a2) : "auto"},
      {"prior.gamma", format_double(hyper.gamma)},
      {"sigma.folds", std::to_string(folds)},
      {"generator.signal", format_double(signal)},
      {"generator.eps", format_double(eps)},
      {"hub.modules", std::to_string(hub.modules)},
      {"hub.module_size", std::to_string(hub.module_size)},
      {"hub.hubs_per_module", std::to_string(hub.hubs_per_module)},
      {"hub.hub_degree", std::to_string(hub.hub_degree)},
      {"hub.max_degree", std::to_string(hub.max_degree)},
      {"hub.nonhub_edges", std::to_string(hub.nonhub_edges)},
      {"hub.min_partial", format_double(hub.min_partial)},
      {"hub.max_partial", format_double(hub.max_partial)},
      {"hub.min_eigen", format_double(hub.min_eigen)},
      {"diagnose.budget", format_double(theory_budget)},
  };
}

void RunConfig::apply(const std::map<std::string, std::string>& entries) {
  for (const auto& [key, value] : entries) {
    if (key == "run.setting") {
      if (value.size() != 1) throw InvalidArgument("run.setting must be a, b or c");
      setting = value[0];
    } else if (key == "run.p") {
      p = parse_int(key, value);
    } else if (key == "run.n") {
      n = parse_int(key, value);
    } else if (key == "run.seed") {
      seed = parse_u64(key, value);
    } else if (key == "run.reps") {
      reps = static_cast<int>(parse_int(key, value));
    } else if (key == "run.sigma") {
      if (value == "known") {
        sigma_modes = {SigmaMode::Known};
      } else if (value == "cv") {
        sigma_modes = {SigmaMode::EmpiricalCV};
      } else if (value == "both") {
        sigma_modes = {SigmaMode::Known, SigmaMode::EmpiricalCV};
      } else {
        throw InvalidArgument("run.sigma must be known, cv or both");
      }
    } else if (key == "run.workers") {
      const long long w = parse_int(key, value);
      if (w < 1) throw InvalidArgument("run.workers must be positive");
      workers = static_cast<unsigned>(w);
    } else if (key == "run.out") {
      out = value;
    } else if (key == "chain.kernel") {
      if (value == "exact") {
        chain.kernel = KernelKind::ExactRJ;
      } else if (value == "my") {
        chain.kernel = KernelKind::MoreauYosida;
      } else {
        throw InvalidArgument("chain.kernel must be exact or my");
      }
    } else if (key == "chain.iters") {
      chain.n_iterations = parse_int(key, value);
    } else if (key == "chain.burnin") {
      chain.burn_in = parse_int(key, value);
    } else if (key == "chain.thin") {
      chain.thin = parse_int(key, value);
    } else if (key == "chain.rw_scale") {
      chain.rw_scale = parse_real(key, value);
    } else if (key == "chain.adapt") {
      chain.adapt = parse_bool(key, value);
    } else if (key == "prior.alpha") {
      hyper.alpha = parse_real(key, value);
    } else if (key == "prior.u") {
      hyper.u = parse_real(key, value);
    } else if (key == "prior.a1") {
      hyper.a1 = parse_real(key, value);
    } else if (key == "prior.a2") {
      hyper.a2 = value == "auto" ? 0.0 : parse_real(key, value);
    } else if (key == "prior.gamma") {
      hyper.gamma = parse_real(key, value);
    } else if (key == "sigma.folds") {
      folds = static_cast<int>(parse_int(key, value));
    } else if (key == "generator.signal") {
      signal = parse_real(key, value);
    } else if (key == "generator.eps") {
      eps = parse_real(key, value);
    } else if (key == "hub.modules") {
      hub.modules = parse_int(key, value);
    } else if (key == "hub.module_size") {
      hub.module_size = parse_int(key, value);
    } else if (key == "hub.hubs_per_module") {
      hub.hubs_per_module = parse_int(key, value);
    } else if (key == "hub.hub_degree") {
      hub.hub_degree = parse_int(key, value);
    } else if (key == "hub.max_degree") {
      hub.max_degree = parse_int(key, value);
    } else if (key == "hub.nonhub_edges") {
      hub.nonhub_edges = parse_int(key, value);
    } else if (key == "hub.min_partial") {
      hub.min_partial = parse_real(key, value);
    } else if (key == "hub.max_partial") {
      hub.max_partial = parse_real(key, value);
    } else if (key == "hub.min_eigen") {
      hub.min_eigen = parse_real(key, value);
    } else if (key == "diagnose.budget") {
      theory_budget = parse_real(key, value);
    } else {
      throw InvalidArgument("unknown configuration key '" + key + "'");
    }
  }
}

void run_pipeline(RunConfig config, std::ostream& log) {
  config.resolve();
  const RunConfig& c = config;
  const auto cfg = c.to_map();
  std::error_code ec;
  fs::create_directories(c.out, ec);
  if (ec) throw IoError("cannot create " + c.out.string() + ": " + ec.message());
  std::string text;
  for (const auto& [k, v] : cfg) text += k + " = " + v + "\n";
  write_text(c.out / "resolved_config.txt", text);

  const bool all = c.command == "all";
  if (all || c.command == "simulate") run_simulate(c, cfg, log);
  if (all || c.command == "fit") run_fit(c, cfg, log);
  if (all || c.command == "evaluate") run_evaluate(c, cfg, log);
  if (all || c.command == "diagnose") run_diagnose(c, cfg, log);
  if (all || c.command == "plot") run_plot(c, cfg, log);
}

}  // namespace qbgraph
