#include <chrono>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <map>
#include <string>

#include <CLI11.hpp>

#include "gwharm/environment.hpp"
#include "gwharm/experiment.hpp"
#include "gwharm/parallel.hpp"
#include "gwharm/walk.hpp"

namespace fs = std::filesystem;

int main(int argc, char** argv) {
  CLI::App app{"Random walks on weighted Galton-Watson trees: harmonic measure experiments"};
  app.set_version_flag("--version", gwharm::version_stamp());

  std::string config_file;
  bool force = false;
  bool list = false;
  std::vector<std::string> overrides;
  // Every option is kept as text and applied through apply_setting so the
  // config file and the command line share one parser.
  std::map<std::string, std::string> flags;
  const std::pair<const char*, const char*> options[] = {
      {"--preset", "preset name (see --list)"},
      {"--pmf", "inline offspring pmf P(N=0),P(N=1),... instead of a preset"},
      {"--weights", "weight family for --pmf: constant:c | lognormal:mu,sigma | twopoint:a,b,q | family:mu,sigma"},
      {"--experiment", "experiment kind (see --list)"},
      {"--replicas", "number of replicas (trees, walks or paths)"},
      {"--horizon", "step budget per walk"},
      {"--n-ray", "ray length n for the ray estimator"},
      {"--depth-d", "truncation depth D for conductances"},
      {"--depth-cap", "depth cap of the auxiliary trees behind kappa"},
      {"--aux-replicas", "auxiliary trees per kappa estimate"},
      {"--ray-replicas", "ray estimator replicas inside dimension_formula"},
      {"--beta-trees", "trees behind the E[beta] reference"},
      {"--safety-margin", "censoring margin in levels"},
      {"--target-depth", "walk depth for slab_iid"},
      {"--n-list", "comma-separated heights for renewal"},
      {"--beta-tol", "Cauchy tolerance of the adaptive conductance"},
      {"--seed", "master seed"},
      {"--workers", "worker threads (default from GWHARM_WORKERS)"},
      {"--out", "output directory"},
  };
  for (const auto& [name, help] : options) {
    std::string key = std::string(name).substr(2);
    app.add_option(name, flags[key], help);
  }
  app.add_option("--config", config_file, "flat key = value config file")->check(CLI::ExistingFile);
  app.add_option("--set", overrides, "extra key=value settings");
  app.add_flag("--force", force, "run even when the transience margin is not positive");
  app.add_flag("--list", list, "list presets and experiments");
  CLI11_PARSE(app, argc, argv);

  if (list) {
    std::cout << "presets:";
    for (const auto& p : gwharm::preset_examples()) std::cout << " " << p;
    std::cout << "\nexperiments:";
    for (const auto& e : gwharm::experiment_names()) std::cout << " " << e;
    std::cout << "\n";
    return 0;
  }

  gwharm::ExperimentConfig config;
  config.workers = gwharm::default_workers();
  try {
    if (!config_file.empty()) gwharm::load_config_file(config, config_file);
    for (const auto& [key, value] : flags) {
      if (app.count("--" + key) > 0) gwharm::apply_setting(config, key, value);
    }
    for (const auto& kv : overrides) {
      const auto eq = kv.find('=');
      if (eq == std::string::npos) throw std::invalid_argument("--set expects key=value");
      gwharm::apply_setting(config, kv.substr(0, eq), kv.substr(eq + 1));
    }
    if (force) config.force = true;
    if (config.out_dir.empty()) throw std::invalid_argument("--out is required");
  } catch (const std::exception& e) {
    std::cerr << "simulate: " << e.what() << "\n";
    return 2;
  }

  try {
    const auto t0 = std::chrono::steady_clock::now();
    const gwharm::ExperimentResult result = gwharm::run_experiment(config);
    gwharm::write_reports(result, config.out_dir);
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::cerr << "simulate: " << gwharm::to_string(config.experiment) << " done in " << secs
              << " s with " << config.workers << " worker(s); reports in " << config.out_dir
              << "\n";
    std::cout << result.summary["results"].dump() << "\n";
    for (const auto& t : result.summary["tests"]) {
      std::cout << (t["passed"].get<bool>() ? "PASS " : "FAIL ") << "test "
                << t["name"].get<std::string>() << "\n";
    }
    for (const auto& c : result.summary["checks"]) {
      std::cout << (c["passed"].get<bool>() ? "PASS " : "FAIL ") << "check "
                << c["name"].get<std::string>() << "\n";
    }
    return result.hard_failure ? 1 : 0;
  } catch (const gwharm::MarginRefused& e) {
    std::cerr << "simulate: refused: " << e.what() << "\n";
    return 3;
  } catch (const gwharm::RejectionBudgetExceeded& e) {
    std::cerr << "simulate: " << e.what() << " (the law looks recurrent)\n";
    return 4;
  } catch (const std::exception& e) {
    std::cerr << "simulate: " << e.what() << "\n";
    return 4;
  }
}
