#pragma once

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "gwharm/dimension.hpp"
#include "gwharm/environment.hpp"

namespace gwharm {

enum class Experiment {
  dimension_ray,
  dimension_formula,
  regen_height,
  renewal,
  slab_iid,
  shannon,
  beta_convergence,
  criterion,
  oracle_check,
  exit_check,
};

std::string to_string(Experiment e);
/// Throws std::invalid_argument on unknown names.
Experiment parse_experiment(std::string_view name);
std::vector<std::string> experiment_names();

struct ExperimentConfig {
  // Law: a preset name, or an inline pmf ("0,0.5,0.5") plus weight family
  // ("constant:1", "lognormal:mu,sigma", "twopoint:a,b,q", "family:mu,sigma").
  std::string preset = "gw12-simple";
  std::string pmf;
  std::string weights = "constant:1";

  Experiment experiment = Experiment::dimension_ray;
  std::size_t replicas = 1000;
  std::size_t ray_replicas = 0;   // dimension_formula's ray comparison; 0 = replicas
  std::size_t beta_trees = 2000;  // trees behind the E[beta] reference
  std::size_t aux_replicas = 20;
  std::int64_t horizon = 10'000'000;
  std::int64_t rejection_budget = 1'000'000;
  int n_ray = 200;
  int depth_D = 30;
  int depth_cap = 8;
  int safety_margin = kDefaultSafetyMargin;
  int target_depth = 400;
  int path_length = 500;
  int max_tree_size = 200;
  int W_depth = 0;  // 0 = default_W_depth(law)
  double beta_tol = 1e-5;
  int depth_step = kDefaultDepthStep;
  int max_depth = 200;
  std::vector<int> n_list = {1, 2, 5, 10, 20, 40};
  std::uint64_t seed = 1;
  unsigned workers = 1;
  bool generic = false;
  bool force = false;
  std::string out_dir;
};

/// Sets one field from its textual form. Keys use '_' or '-' interchangeably
/// ("n-ray" == "n_ray"); "depth_d" is an alias of "depth_D", "out" of
/// "out_dir". Throws std::invalid_argument on bad keys or values.
void apply_setting(ExperimentConfig& config, std::string_view key, std::string_view value);

/// Flat "key = value" file; '#' starts a comment, values may be quoted.
void load_config_file(ExperimentConfig& config, const std::filesystem::path& path);

EnvironmentLaw make_law(const ExperimentConfig& config);

/// The transience margin is not positive and --force was not given.
class MarginRefused : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ExperimentResult {
  nlohmann::ordered_json summary;
  std::vector<ReplicaRecord> records;
  bool hard_failure = false;
};

/// Runs one experiment. The summary echoes the config (without workers and
/// out_dir), the transience margin, results, statistical tests and hard
/// checks; it does not depend on the worker count.
ExperimentResult run_experiment(const ExperimentConfig& config);

/// Writes summary.json, replicas.jsonl and summary.csv into `dir`.
void write_reports(const ExperimentResult& result, const std::filesystem::path& dir);

/// Decimal text with 12 significant digits ("null" for non-finite values).
std::string format_number(double x);

/// Rounds every floating-point number in `j` to 12 significant digits.
void round_numbers(nlohmann::ordered_json& j);

std::string version_stamp();

}  // namespace gwharm
