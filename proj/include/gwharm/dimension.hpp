#pragma once

#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "gwharm/conductance.hpp"
#include "gwharm/environment.hpp"
#include "gwharm/path_stats.hpp"
#include "gwharm/stats.hpp"

namespace gwharm {

// Transience criterion.

/// E[sum_i A_i^alpha]; closed form for every built-in weight family.
double psi(const EnvironmentLaw& law, double alpha);

/// Monte Carlo version of psi from `draws` independent (N, A) samples.
MeanSE psi_monte_carlo(const EnvironmentLaw& law, double alpha, std::size_t draws,
                       std::uint64_t seed);

struct CriterionReport {
  std::vector<std::pair<double, double>> psi_values;  // (alpha, psi) on the bracketing grid
  double min_alpha = 0.0;
  double min_value = 0.0;
  double margin() const { return min_value - 1.0; }
};

/// Minimizes psi on [0, 1]: 33-point grid, then golden section (tol 1e-6 in
/// alpha) inside the bracket around the best grid point.
CriterionReport transience_margin(const EnvironmentLaw& law);

/// log m.
double boundary_dimension(const EnvironmentLaw& law);

// Estimators. Replicas run on config.workers threads; results are reduced
// in replica order.

struct ReplicaRecord {
  std::size_t index = 0;
  std::uint64_t seed = 0;
  bool dropped = false;
  std::string reason;
  std::map<std::string, double> values;
};

struct DimensionReport {
  double estimate = 0.0;
  double std_error = 0.0;
  std::string method;  // "ray_ergodic" or "kappa_formula"
  std::size_t replicas = 0;
  int n_ray = 0;
  int depth_D = 0;
  std::map<std::string, double> diagnostics;
  std::vector<ReplicaRecord> records;
};

/// Too many replicas could not be used (censoring, horizon, ...).
class ReplicaShortfall : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct EstimatorConfig {
  std::uint64_t seed = 1;
  std::int64_t horizon = 10'000'000;
  int safety_margin = kDefaultSafetyMargin;
  std::int64_t rejection_budget = 1'000'000;
  unsigned workers = 1;
  bool generic = false;  // disable the symmetric shortcut for degenerate laws
  double max_drop_fraction = 0.2;
};

/// Per replica: annealed walk to depth n_ray + safety_margin, exit ray
/// (xi_0, ..., xi_{n_ray}), value -log harm(xi_{n_ray}) / n_ray at truncation D.
DimensionReport dim_ray_estimator(const EnvironmentLaw& law, std::size_t replicas, int n_ray,
                                  int D, const EstimatorConfig& config);

struct KappaEstimate {
  double value = 0.0;
  double std_error = 0.0;
  std::vector<double> level_means;  // mean contribution of the y at each depth
  double tail_estimate = 0.0;       // geometric extrapolation beyond depth_cap
  std::size_t censored = 0;         // walks that ran out of horizon
  std::size_t walks = 0;
};

/// kappa(t) for the tree keyed by `tree_key`: aux trees T are sampled to
/// depth_cap, t is glued below each y with |y| <= depth_cap and one walk per
/// (T, y) decides whether the first regeneration point after time 0 lies
/// strictly below y without the walk ever touching the root's parent.
KappaEstimate kappa_estimator(const EnvironmentLaw& law, std::uint64_t tree_key,
                              std::size_t aux_replicas, int depth_cap,
                              const EstimatorConfig& config);

/// E[H(T) kappa(T)] / E[kappa(T)] with H(T) = sum harm(i) (-log harm(i)).
DimensionReport dim_formula_estimator(const EnvironmentLaw& law, std::size_t tree_replicas,
                                      std::size_t aux_replicas, int D, int depth_cap,
                                      const EstimatorConfig& config);

struct RegenHeightReport {
  MeanSE height;                 // rho h_1 under the conditioned law
  MeanSE record_height;          // same with fresh times replaced by depth records
  double acceptance_rate = 0.0;  // replicas / attempts, an estimate of E[beta]
  double acceptance_se = 0.0;
  std::size_t dropped = 0;
  std::vector<ReplicaRecord> records;
};

RegenHeightReport mean_regen_height(const EnvironmentLaw& law, std::size_t replicas,
                                    const EstimatorConfig& config);

struct BetaMeanReport {
  MeanSE beta;
  double mean_depth = 0.0;
  int max_depth = 0;
  double max_gap = 0.0;
  std::vector<ReplicaRecord> records;
};

/// Average of beta_adaptive over independent trees.
BetaMeanReport mean_beta(const EnvironmentLaw& law, std::size_t trees, double tol, int D_step,
                         int max_depth, const EstimatorConfig& config);

struct RenewalPoint {
  int n = 0;
  double probability = 0.0;
  double std_error = 0.0;
  double record_probability = 0.0;  // n among the depth-record regeneration heights
  double record_std_error = 0.0;
};

struct RenewalReport {
  std::vector<RenewalPoint> points;
  std::size_t dropped = 0;
  std::vector<ReplicaRecord> records;
};

/// Fraction of conditioned replicas whose regeneration heights contain n; the
/// depth-record variant is reported alongside.
RenewalReport renewal_probe(const EnvironmentLaw& law, const std::vector<int>& n_list,
                            std::size_t replicas, const EstimatorConfig& config);

struct SlabReport {
  std::vector<Slab> first_half;
  std::vector<Slab> second_half;
  KsResult height_test;
  KsResult duration_test;
  std::size_t total = 0;
  std::vector<ReplicaRecord> records;
};

/// Conditioned walks to `target_depth`; the confirmed slabs k >= 1 of each
/// path are split into first and second halves and compared.
SlabReport slab_iid(const EnvironmentLaw& law, std::size_t replicas, int target_depth,
                    const EstimatorConfig& config);

struct ShannonReport {
  MeanSE gap;       // cross-entropy - entropy
  MeanSE entropy;
  double min_gap = 0.0;
  std::size_t negative = 0;  // samples with gap < -1e-12
  std::vector<ReplicaRecord> records;
};

ShannonReport shannon_gap(const EnvironmentLaw& law, std::size_t trees, int D, int W_depth,
                          const EstimatorConfig& config);

}  // namespace gwharm
