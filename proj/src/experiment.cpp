#include "gwharm/experiment.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <sstream>

#include "gwharm/conductance.hpp"
#include "gwharm/flow_rules.hpp"
#include "gwharm/parallel.hpp"
#include "gwharm/path_stats.hpp"
#include "gwharm/rng.hpp"
#include "gwharm/tree.hpp"
#include "gwharm/walk.hpp"

#ifndef GWHARM_VERSION
#define GWHARM_VERSION "unknown"
#endif

namespace gwharm {

using nlohmann::ordered_json;

namespace {

constexpr std::pair<Experiment, const char*> kNames[] = {
    {Experiment::dimension_ray, "dimension_ray"},
    {Experiment::dimension_formula, "dimension_formula"},
    {Experiment::regen_height, "regen_height"},
    {Experiment::renewal, "renewal"},
    {Experiment::slab_iid, "slab_iid"},
    {Experiment::shannon, "shannon"},
    {Experiment::beta_convergence, "beta_convergence"},
    {Experiment::criterion, "criterion"},
    {Experiment::oracle_check, "oracle_check"},
    {Experiment::exit_check, "exit_check"},
};

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

template <class T>
T parse_as(std::string_view key, std::string_view text) {
  const std::string s = trim(text);
  T v{};
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size()) {
    throw std::invalid_argument("config '" + std::string(key) + "': bad value '" + s + "'");
  }
  return v;
}

// Integers may be written as 1e6 or 10000000.
template <class T>
T parse_count(std::string_view key, std::string_view text) {
  const double d = parse_as<double>(key, text);
  if (d < 0 || d != std::floor(d) || d > 9.0e18) {
    throw std::invalid_argument("config '" + std::string(key) + "': expected a non-negative integer");
  }
  return static_cast<T>(d);
}

bool parse_bool(std::string_view key, std::string_view text) {
  const std::string s = trim(text);
  if (s == "true" || s == "1" || s == "yes" || s == "on") return true;
  if (s == "false" || s == "0" || s == "no" || s == "off") return false;
  throw std::invalid_argument("config '" + std::string(key) + "': expected true or false");
}

std::vector<double> parse_list(std::string_view key, std::string_view text) {
  std::vector<double> out;
  std::string s = trim(text);
  if (s.size() >= 2 && (s.front() == '[' || s.front() == '{')) s = s.substr(1, s.size() - 2);
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(parse_as<double>(key, item));
  if (out.empty()) throw std::invalid_argument("config '" + std::string(key) + "': empty list");
  return out;
}

WeightFamily parse_weights(std::string_view text) {
  const std::string s = trim(text);
  const auto colon = s.find(':');
  const std::string kind = s.substr(0, colon);
  const std::vector<double> p =
      colon == std::string::npos ? std::vector<double>{} : parse_list("weights", s.substr(colon + 1));
  auto need = [&](std::size_t n) {
    if (p.size() != n) {
      throw std::invalid_argument("config 'weights': " + kind + " takes " + std::to_string(n) +
                                  " parameter(s)");
    }
  };
  if (kind == "constant") {
    need(1);
    return ConstantWeight{p[0]};
  }
  if (kind == "lognormal") {
    need(2);
    return LogNormalWeight{p[0], p[1]};
  }
  if (kind == "twopoint") {
    need(3);
    return TwoPointWeight{p[0], p[1], p[2]};
  }
  if (kind == "family") {
    need(2);
    return FamilyFactorWeight{p[0], p[1]};
  }
  throw std::invalid_argument("config 'weights': unknown family '" + kind + "'");
}

std::string normalize_key(std::string_view key) {
  std::string k = trim(key);
  std::replace(k.begin(), k.end(), '-', '_');
  std::transform(k.begin(), k.end(), k.begin(), [](unsigned char c) { return std::tolower(c); });
  if (k == "out") k = "out_dir";
  return k;
}

ordered_json config_echo(const ExperimentConfig& c) {
  ordered_json j;
  j["preset"] = c.pmf.empty() ? ordered_json(c.preset) : ordered_json(nullptr);
  j["pmf"] = c.pmf;
  j["weights"] = c.pmf.empty() ? std::string() : c.weights;
  j["experiment"] = to_string(c.experiment);
  j["replicas"] = c.replicas;
  j["ray_replicas"] = c.ray_replicas;
  j["beta_trees"] = c.beta_trees;
  j["aux_replicas"] = c.aux_replicas;
  j["horizon"] = c.horizon;
  j["rejection_budget"] = c.rejection_budget;
  j["n_ray"] = c.n_ray;
  j["depth_D"] = c.depth_D;
  j["depth_cap"] = c.depth_cap;
  j["safety_margin"] = c.safety_margin;
  j["target_depth"] = c.target_depth;
  j["path_length"] = c.path_length;
  j["max_tree_size"] = c.max_tree_size;
  j["W_depth"] = c.W_depth;
  j["beta_tol"] = c.beta_tol;
  j["depth_step"] = c.depth_step;
  j["max_depth"] = c.max_depth;
  j["n_list"] = c.n_list;
  j["seed"] = c.seed;
  j["generic"] = c.generic;
  j["force"] = c.force;
  return j;
}

ordered_json law_echo(const EnvironmentLaw& law) {
  ordered_json j;
  j["tag"] = law.tag();
  j["description"] = law.describe();
  j["pmf"] = law.pmf();
  j["mean_offspring"] = law.mean_offspring();
  j["degenerate"] = law.degenerate();
  return j;
}

ordered_json mean_json(const MeanSE& m) {
  return {{"mean", m.mean}, {"std_error", m.se}, {"sd", m.sd}, {"n", m.n}};
}

ordered_json map_json(const std::map<std::string, double>& m) {
  ordered_json j = ordered_json::object();
  for (const auto& [k, v] : m) j[k] = v;
  return j;
}

EstimatorConfig estimator_config(const ExperimentConfig& c) {
  EstimatorConfig e;
  e.seed = c.seed;
  e.horizon = c.horizon;
  e.safety_margin = c.safety_margin;
  e.rejection_budget = c.rejection_budget;
  e.workers = c.workers;
  e.generic = c.generic;
  return e;
}

// Collects soft statistical tests and hard invariant checks.
struct Verdicts {
  ordered_json tests = ordered_json::array();
  ordered_json checks = ordered_json::array();
  bool hard_failure = false;

  static ordered_json entry(const std::string& name, bool passed, const ordered_json& detail) {
    ordered_json j{{"name", name}};
    j.update(detail);
    j["passed"] = passed;
    return j;
  }
  void test(const std::string& name, bool passed, const ordered_json& detail) {
    tests.push_back(entry(name, passed, detail));
  }
  void check(const std::string& name, bool passed, const ordered_json& detail) {
    checks.push_back(entry(name, passed, detail));
    if (!passed) hard_failure = true;
  }
};

// E[beta]: exact for degenerate laws, otherwise a mean over independent trees.
MeanSE reference_beta(const EnvironmentLaw& law, const ExperimentConfig& c) {
  if (law.degenerate() && !c.generic) {
    const ConductanceEstimate e =
        beta_adaptive_lazy(law, tree_root_key(c.seed), 1e-13, c.depth_step, 100'000);
    return {e.value, 0.0, 0.0, 1};
  }
  EstimatorConfig e = estimator_config(c);
  e.seed = derive_seed(c.seed, kAuxStream, 0xbe7a);
  return mean_beta(law, c.beta_trees, c.beta_tol, c.depth_step, c.max_depth, e).beta;
}

// Symmetric fixed point beta = m c beta / (1 + m c beta).
double closed_form_beta(const EnvironmentLaw& law) {
  const double mc = law.mean_offspring() * std::get<ConstantWeight>(law.weights()).value;
  return mc > 1.0 ? 1.0 - 1.0 / mc : 0.0;
}

void run_dimension_ray(const EnvironmentLaw& law, const ExperimentConfig& c, ordered_json& res,
                       Verdicts& v, ExperimentResult& out) {
  DimensionReport r = dim_ray_estimator(law, c.replicas, c.n_ray, c.depth_D, estimator_config(c));
  const double log_m = boundary_dimension(law);
  res["estimate"] = r.estimate;
  res["std_error"] = r.std_error;
  res["replicas_used"] = r.replicas;
  res["log_m"] = log_m;
  res["drop"] = log_m - r.estimate;
  res["diagnostics"] = map_json(r.diagnostics);
  // No drop is expected only for the lambda-biased walk on a regular tree.
  if (law.degenerate()) {
    v.test("consistent_with_log_m", std::abs(r.estimate - log_m) <= 2.0 * r.std_error + 0.01,
           {{"statistic", std::abs(r.estimate - log_m)},
            {"threshold", 2.0 * r.std_error + 0.01}});
  } else {
    v.test("below_log_m", r.estimate <= log_m - 3.0 * r.std_error && r.std_error <= 0.01,
           {{"statistic", (log_m - r.estimate) / r.std_error}, {"threshold", 3.0},
            {"std_error", r.std_error}});
  }
  out.records = std::move(r.records);
}

void run_dimension_formula(const EnvironmentLaw& law, const ExperimentConfig& c,
                           ordered_json& res, Verdicts& v, ExperimentResult& out) {
  const EstimatorConfig e = estimator_config(c);
  DimensionReport f =
      dim_formula_estimator(law, c.replicas, c.aux_replicas, c.depth_D, c.depth_cap, e);
  EstimatorConfig er = e;
  er.seed = derive_seed(c.seed, kReplicaStream, 0x7261);
  const std::size_t nr = c.ray_replicas ? c.ray_replicas : c.replicas;
  const DimensionReport r = dim_ray_estimator(law, nr, c.n_ray, c.depth_D, er);
  res["estimate"] = f.estimate;
  res["std_error"] = f.std_error;
  res["ray_estimate"] = r.estimate;
  res["ray_std_error"] = r.std_error;
  res["log_m"] = boundary_dimension(law);
  res["diagnostics"] = map_json(f.diagnostics);
  res["ray_diagnostics"] = map_json(r.diagnostics);
  const double diff = std::abs(f.estimate - r.estimate);
  const double ci = 1.96 * std::hypot(f.std_error, r.std_error);
  v.test("estimators_agree", diff <= ci + 0.05,
         {{"statistic", diff}, {"threshold", ci + 0.05}});
  out.records = std::move(f.records);
}

void run_regen_height(const EnvironmentLaw& law, const ExperimentConfig& c, ordered_json& res,
                      Verdicts& v, ExperimentResult& out) {
  RegenHeightReport r = mean_regen_height(law, c.replicas, estimator_config(c));
  const MeanSE beta = reference_beta(law, c);
  const RatioEstimate prod = product_of(r.height, beta);
  res["height"] = mean_json(r.height);
  res["record_height"] = mean_json(r.record_height);
  res["beta"] = mean_json(beta);
  res["product"] = prod.ratio;
  res["product_std_error"] = prod.se;
  res["acceptance_rate"] = r.acceptance_rate;
  res["acceptance_std_error"] = r.acceptance_se;
  res["dropped"] = r.dropped;
  v.test("height_times_beta", std::abs(prod.ratio - 1.0) <= 3.0 * prod.se,
         {{"statistic", std::abs(prod.ratio - 1.0)}, {"threshold", 3.0 * prod.se}});
  const RatioEstimate rec = product_of(r.record_height, beta);
  res["record_product"] = rec.ratio;
  res["record_product_std_error"] = rec.se;
  v.test("record_height_times_beta", std::abs(rec.ratio - 1.0) <= 3.0 * rec.se,
         {{"statistic", std::abs(rec.ratio - 1.0)}, {"threshold", 3.0 * rec.se}});
  out.records = std::move(r.records);
}

void run_renewal(const EnvironmentLaw& law, const ExperimentConfig& c, ordered_json& res,
                 Verdicts& v, ExperimentResult& out) {
  RenewalReport r = renewal_probe(law, c.n_list, c.replicas, estimator_config(c));
  const MeanSE beta = reference_beta(law, c);
  res["beta"] = mean_json(beta);
  res["points"] = ordered_json::array();
  for (const auto& p : r.points) {
    res["points"].push_back({{"n", p.n},
                             {"probability", p.probability},
                             {"std_error", p.std_error},
                             {"record_probability", p.record_probability},
                             {"record_std_error", p.record_std_error}});
  }
  res["dropped"] = r.dropped;
  // The renewal density 1 / E*[rho h_1] equals E[beta]; compare at the largest n.
  const auto& last = *std::max_element(r.points.begin(), r.points.end(),
                                       [](const auto& a, const auto& b) { return a.n < b.n; });
  const double se = std::hypot(last.std_error, beta.se);
  v.test("renewal_density", std::abs(last.probability - beta.mean) <= 3.0 * se,
         {{"n", last.n}, {"statistic", std::abs(last.probability - beta.mean)},
          {"threshold", 3.0 * se}});
  const double rse = std::hypot(last.record_std_error, beta.se);
  v.test("record_renewal_density", std::abs(last.record_probability - beta.mean) <= 3.0 * rse,
         {{"n", last.n}, {"statistic", std::abs(last.record_probability - beta.mean)},
          {"threshold", 3.0 * rse}});
  out.records = std::move(r.records);
}

void run_slab_iid(const EnvironmentLaw& law, const ExperimentConfig& c, ordered_json& res,
                  Verdicts& v, ExperimentResult& out) {
  SlabReport r = slab_iid(law, c.replicas, c.target_depth, estimator_config(c));
  auto summarize = [](const std::vector<Slab>& s) {
    std::vector<double> h, t;
    for (const auto& x : s) {
      h.push_back(x.height);
      t.push_back(static_cast<double>(x.duration));
    }
    return ordered_json{{"count", s.size()},
                        {"height", mean_json(mean_se(h))},
                        {"duration", mean_json(mean_se(t))}};
  };
  res["total_slabs"] = r.total;
  res["first_half"] = summarize(r.first_half);
  res["second_half"] = summarize(r.second_half);
  res["ks_height"] = {{"statistic", r.height_test.statistic}, {"p_value", r.height_test.p_value}};
  res["ks_duration"] = {{"statistic", r.duration_test.statistic},
                        {"p_value", r.duration_test.p_value}};
  v.test("ks_height", r.height_test.p_value >= 0.01,
         {{"p_value", r.height_test.p_value}, {"level", 0.01}});
  v.test("ks_duration", r.duration_test.p_value >= 0.01,
         {{"p_value", r.duration_test.p_value}, {"level", 0.01}});
  out.records = std::move(r.records);
}

void run_shannon(const EnvironmentLaw& law, const ExperimentConfig& c, ordered_json& res,
                 Verdicts& v, ExperimentResult& out) {
  const int W = c.W_depth > 0 ? c.W_depth : default_W_depth(law);
  ShannonReport r = shannon_gap(law, c.replicas, c.depth_D, W, estimator_config(c));
  res["gap"] = mean_json(r.gap);
  res["entropy"] = mean_json(r.entropy);
  res["min_gap"] = r.min_gap;
  res["negative"] = r.negative;
  res["W_depth"] = W;
  v.test("gap_positive", r.gap.mean > 3.0 * r.gap.se,
         {{"statistic", r.gap.mean / r.gap.se}, {"threshold", 3.0}});
  v.check("gap_nonnegative", r.negative == 0, {{"negative", r.negative}, {"min_gap", r.min_gap}});
  out.records = std::move(r.records);
}

void run_beta_convergence(const EnvironmentLaw& law, const ExperimentConfig& c,
                          ordered_json& res, Verdicts& v, ExperimentResult& out) {
  if (law.degenerate() && !c.generic) {
    const ConductanceEstimate e =
        beta_adaptive_lazy(law, tree_root_key(c.seed), 1e-13, c.depth_step, 100'000);
    const double exact = closed_form_beta(law);
    res["beta"] = e.value;
    res["depth"] = e.depth;
    res["cauchy_gap"] = e.cauchy_gap;
    res["closed_form"] = exact;
    res["trace"] = e.trace;
    v.check("closed_form", std::abs(e.value - exact) <= 1e-9,
            {{"statistic", std::abs(e.value - exact)}, {"threshold", 1e-9}});
    return;
  }
  BetaMeanReport r = mean_beta(law, c.replicas, c.beta_tol, c.depth_step, c.max_depth,
                               estimator_config(c));
  res["beta"] = mean_json(r.beta);
  res["mean_depth"] = r.mean_depth;
  res["max_depth"] = r.max_depth;
  res["max_gap"] = r.max_gap;
  v.check("gap_below_tol", r.max_gap <= c.beta_tol,
          {{"statistic", r.max_gap}, {"threshold", c.beta_tol}});
  out.records = std::move(r.records);
}

void run_criterion(const EnvironmentLaw& law, const ExperimentConfig& c,
                   const CriterionReport& cr, ordered_json& res, Verdicts& v) {
  res["psi"] = ordered_json::array();
  for (const auto& [a, p] : cr.psi_values) res["psi"].push_back({{"alpha", a}, {"value", p}});
  res["min_alpha"] = cr.min_alpha;
  res["min_value"] = cr.min_value;
  res["margin"] = cr.margin();
  res["transient"] = cr.margin() > 0.0;
  const MeanSE mc = psi_monte_carlo(law, cr.min_alpha, c.replicas, c.seed);
  res["psi_monte_carlo"] = mean_json(mc);
  const double z = mc.se > 0.0 ? std::abs(mc.mean - cr.min_value) / mc.se : 0.0;
  v.test("psi_closed_form", mc.se > 0.0 ? z <= 3.0 : std::abs(mc.mean - cr.min_value) <= 1e-12,
         {{"statistic", z}, {"threshold", 3.0}});
}

// Random tree of at most max_tree_size vertices, realized to its depth limit.
std::pair<WeightedTree, int> small_tree(const EnvironmentLaw& law, std::uint64_t seed,
                                        int max_size) {
  KeyStream ks(seed);
  int depth = 1 + static_cast<int>(ks.uniform() * 10.0);
  for (;; --depth) {
    WeightedTree t = sample_tree(law, depth, derive_seed(seed, kTreeStream, depth));
    if (static_cast<int>(t.size()) <= max_size || depth == 1) return {std::move(t), depth};
  }
}

void run_oracle_check(const EnvironmentLaw& law, const ExperimentConfig& c, ordered_json& res,
                      Verdicts& v, ExperimentResult& out) {
  std::vector<ReplicaRecord> records(c.replicas);
  parallel_for(c.replicas, c.workers, [&](std::size_t i) {
    ReplicaRecord& rec = records[i];
    rec.index = i;
    rec.seed = derive_seed(c.seed, kReplicaStream, i);
    const auto [tree, D] = small_tree(law, rec.seed, c.max_tree_size);
    const double a = beta_truncated(tree, D).value;
    const double b = beta_linear_oracle(tree, D);
    rec.values["size"] = static_cast<double>(tree.size());
    rec.values["depth"] = D;
    rec.values["recursion"] = a;
    rec.values["linear"] = b;
    rec.values["abs_diff"] = std::abs(a - b);
  });
  double worst = 0.0, size = 0.0;
  for (const auto& r : records) {
    worst = std::max(worst, r.values.at("abs_diff"));
    size = std::max(size, r.values.at("size"));
  }
  res["trees"] = records.size();
  res["max_abs_diff"] = worst;
  res["max_size"] = size;
  v.check("recursion_matches_linear_solve", worst <= 1e-12,
          {{"statistic", worst}, {"threshold", 1e-12}});
  out.records = std::move(records);
}

void run_exit_check(const EnvironmentLaw& law, const ExperimentConfig& c, ordered_json& res,
                    Verdicts& v, ExperimentResult& out) {
  std::vector<ReplicaRecord> records(c.replicas);
  parallel_for(c.replicas, c.workers, [&](std::size_t i) {
    ReplicaRecord& rec = records[i];
    rec.index = i;
    rec.seed = derive_seed(c.seed, kReplicaStream, i);
    KeyStream ks(rec.seed);
    const auto steps = 1 + static_cast<std::int64_t>(ks.uniform() * c.path_length);
    Walker w(law, WeightedTree(tree_root_key(derive_seed(rec.seed, kTreeStream, 0))),
             derive_seed(rec.seed, kWalkStream, 0));
    w.run(steps, std::nullopt, false);
    const auto fast = exit_times(w.view(), c.safety_margin).first;
    const auto slow = exit_times_literal(w.view());
    rec.values["steps"] = static_cast<double>(steps);
    rec.values["exit_times"] = static_cast<double>(slow.size());
    rec.values["agree"] = fast == slow ? 1.0 : 0.0;
  });
  std::size_t mismatches = 0;
  for (const auto& r : records) mismatches += r.values.at("agree") == 0.0;
  res["paths"] = records.size();
  res["mismatches"] = mismatches;
  v.check("future_min_depth_matches_literal", mismatches == 0, {{"mismatches", mismatches}});
  out.records = std::move(records);
}

}  // namespace

std::string to_string(Experiment e) {
  for (const auto& [k, n] : kNames) {
    if (k == e) return n;
  }
  return "unknown";
}

Experiment parse_experiment(std::string_view name) {
  for (const auto& [k, n] : kNames) {
    if (name == n) return k;
  }
  throw std::invalid_argument("unknown experiment '" + std::string(name) + "'");
}

std::vector<std::string> experiment_names() {
  std::vector<std::string> out;
  for (const auto& [k, n] : kNames) out.emplace_back(n);
  return out;
}

void apply_setting(ExperimentConfig& c, std::string_view raw_key, std::string_view value) {
  const std::string key = normalize_key(raw_key);
  std::string text = trim(value);
  if (text.size() >= 2 && (text.front() == '"' || text.front() == '\'') &&
      text.back() == text.front()) {
    text = text.substr(1, text.size() - 2);
  }
  if (key == "preset") c.preset = text;
  else if (key == "pmf") c.pmf = text;
  else if (key == "weights") c.weights = text;
  else if (key == "experiment") c.experiment = parse_experiment(text);
  else if (key == "replicas") c.replicas = parse_count<std::size_t>(key, text);
  else if (key == "ray_replicas") c.ray_replicas = parse_count<std::size_t>(key, text);
  else if (key == "beta_trees") c.beta_trees = parse_count<std::size_t>(key, text);
  else if (key == "aux_replicas") c.aux_replicas = parse_count<std::size_t>(key, text);
  else if (key == "horizon") c.horizon = parse_count<std::int64_t>(key, text);
  else if (key == "rejection_budget") c.rejection_budget = parse_count<std::int64_t>(key, text);
  else if (key == "n_ray") c.n_ray = parse_count<int>(key, text);
  else if (key == "depth_d") c.depth_D = parse_count<int>(key, text);
  else if (key == "depth_cap") c.depth_cap = parse_count<int>(key, text);
  else if (key == "safety_margin") c.safety_margin = parse_count<int>(key, text);
  else if (key == "target_depth") c.target_depth = parse_count<int>(key, text);
  else if (key == "path_length") c.path_length = parse_count<int>(key, text);
  else if (key == "max_tree_size") c.max_tree_size = parse_count<int>(key, text);
  else if (key == "w_depth") c.W_depth = parse_count<int>(key, text);
  else if (key == "beta_tol") c.beta_tol = parse_as<double>(key, text);
  else if (key == "depth_step") c.depth_step = parse_count<int>(key, text);
  else if (key == "max_depth") c.max_depth = parse_count<int>(key, text);
  else if (key == "n_list") {
    c.n_list.clear();
    for (double x : parse_list(key, text)) c.n_list.push_back(static_cast<int>(x));
  } else if (key == "seed") c.seed = parse_count<std::uint64_t>(key, text);
  else if (key == "workers") c.workers = std::max(1u, parse_count<unsigned>(key, text));
  else if (key == "generic") c.generic = parse_bool(key, text);
  else if (key == "force") c.force = parse_bool(key, text);
  else if (key == "out_dir") c.out_dir = text;
  else throw std::invalid_argument("config: unknown key '" + std::string(raw_key) + "'");
}

void load_config_file(ExperimentConfig& config, const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("config: cannot open " + path.string());
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    if (trim(line).empty() || trim(line).front() == '[') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw std::invalid_argument(path.string() + ":" + std::to_string(lineno) +
                                  ": expected key = value");
    }
    apply_setting(config, line.substr(0, eq), line.substr(eq + 1));
  }
}

EnvironmentLaw make_law(const ExperimentConfig& c) {
  if (c.pmf.empty()) return preset(c.preset);
  return EnvironmentLaw(parse_list("pmf", c.pmf), parse_weights(c.weights), "custom");
}

std::string format_number(double x) {
  if (!std::isfinite(x)) return std::isnan(x) ? "nan" : (x > 0 ? "inf" : "-inf");
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.12g", x);
  return buf;
}

void round_numbers(ordered_json& j) {
  if (j.is_number_float()) {
    const double x = j.get<double>();
    if (std::isfinite(x)) j = std::strtod(format_number(x).c_str(), nullptr);
  } else if (j.is_structured()) {
    for (auto& child : j) round_numbers(child);
  }
}

std::string version_stamp() { return GWHARM_VERSION; }

ExperimentResult run_experiment(const ExperimentConfig& c) {
  const EnvironmentLaw law = make_law(c);
  const CriterionReport cr = transience_margin(law);
  if (cr.margin() <= 0.0 && !c.force && c.experiment != Experiment::criterion) {
    throw MarginRefused("transience margin min_alpha E[sum A^alpha] - 1 = " +
                        format_number(cr.margin()) + " <= 0 for " + law.describe() +
                        ": the walk is not known to be transient; pass --force to run anyway");
  }

  ExperimentResult out;
  ordered_json res = ordered_json::object();
  Verdicts v;
  switch (c.experiment) {
    case Experiment::dimension_ray: run_dimension_ray(law, c, res, v, out); break;
    case Experiment::dimension_formula: run_dimension_formula(law, c, res, v, out); break;
    case Experiment::regen_height: run_regen_height(law, c, res, v, out); break;
    case Experiment::renewal: run_renewal(law, c, res, v, out); break;
    case Experiment::slab_iid: run_slab_iid(law, c, res, v, out); break;
    case Experiment::shannon: run_shannon(law, c, res, v, out); break;
    case Experiment::beta_convergence: run_beta_convergence(law, c, res, v, out); break;
    case Experiment::criterion: run_criterion(law, c, cr, res, v); break;
    case Experiment::oracle_check: run_oracle_check(law, c, res, v, out); break;
    case Experiment::exit_check: run_exit_check(law, c, res, v, out); break;
  }

  ordered_json& s = out.summary;
  s["version"] = version_stamp();
  s["experiment"] = to_string(c.experiment);
  s["law"] = law_echo(law);
  s["config"] = config_echo(c);
  s["transience"] = {{"margin", cr.margin()},
                     {"min_alpha", cr.min_alpha},
                     {"min_psi", cr.min_value},
                     {"forced", cr.margin() <= 0.0 && c.force}};
  s["results"] = std::move(res);
  s["tests"] = std::move(v.tests);
  s["checks"] = std::move(v.checks);
  s["status"] = v.hard_failure ? "hard_failure" : "ok";
  out.hard_failure = v.hard_failure;
  round_numbers(s);
  return out;
}

namespace {

void flatten(const ordered_json& j, const std::string& prefix, std::ostream& os) {
  if (j.is_object()) {
    for (const auto& [k, x] : j.items()) flatten(x, prefix.empty() ? k : prefix + "." + k, os);
  } else if (j.is_array()) {
    std::size_t i = 0;
    for (const auto& x : j) {
      std::string name = prefix + "." + std::to_string(i++);
      if (x.is_object() && x.contains("name") && x["name"].is_string()) {
        name = prefix + "." + x["name"].get<std::string>();
      }
      flatten(x, name, os);
    }
  } else if (j.is_number_float()) {
    os << prefix << "," << format_number(j.get<double>()) << "\n";
  } else if (j.is_number() || j.is_boolean()) {
    os << prefix << "," << j.dump() << "\n";
  } else if (j.is_null()) {
    os << prefix << ",\n";
  }
}

}  // namespace

void write_reports(const ExperimentResult& result, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  {
    std::ofstream os(dir / "summary.json", std::ios::binary);
    os << result.summary.dump(2) << "\n";
  }
  {
    std::ofstream os(dir / "replicas.jsonl", std::ios::binary);
    for (const auto& r : result.records) {
      ordered_json j{{"index", r.index}, {"seed", r.seed}, {"dropped", r.dropped}};
      if (!r.reason.empty()) j["reason"] = r.reason;
      j["values"] = map_json(r.values);
      round_numbers(j);
      os << j.dump() << "\n";
    }
  }
  {
    std::ofstream os(dir / "summary.csv", std::ios::binary);
    os << "key,value\n";
    flatten(result.summary["results"], "results", os);
    flatten(result.summary["tests"], "tests", os);
    flatten(result.summary["checks"], "checks", os);
    flatten(result.summary["transience"], "transience", os);
  }
}

}  // namespace gwharm
