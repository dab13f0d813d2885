#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "gwharm/environment.hpp"
#include "gwharm/tree.hpp"

namespace gwharm {

inline constexpr double kDefaultBetaTol = 1e-6;
inline constexpr int kDefaultDepthStep = 5;

enum class ConductanceMethod { recursion, linear_solve, monte_carlo };
std::string to_string(ConductanceMethod m);

struct ConductanceEstimate {
  double value = 1.0;
  int depth = 0;
  double cauchy_gap = 0.0;  // beta_{D - step} - beta_D, 0 when D < step
  ConductanceMethod method = ConductanceMethod::recursion;
  std::vector<double> trace;  // beta_d for the depths visited
};

/// The depth budget ran out before the Cauchy gap fell under tol.
class ConductanceBudgetExceeded : public std::runtime_error {
 public:
  ConductanceBudgetExceeded(std::vector<double> trace, int step);
  std::vector<double> trace;
};

/// (beta_0, ..., beta_D) of t[v]: probability of reaching d levels below v
/// before the parent of v, with beta_0 = 1. Needs every vertex less than D
/// levels below v expanded, else NotRealizedError.
std::vector<double> beta_profile(const WeightedTree& tree, NodeId v, int D);

/// beta_D of the whole tree via the bottom-up recursion.
ConductanceEstimate beta_truncated(const WeightedTree& tree, int D);

/// Same quantity from the absorbing-chain linear system (sparse LU).
double beta_linear_oracle(const WeightedTree& tree, int D);

/// Grows D by D_step (extending the tree from `law` as needed) until the gap
/// between successive values is below tol.
ConductanceEstimate beta_adaptive(WeightedTree& tree, const EnvironmentLaw& law,
                                  double tol = kDefaultBetaTol,
                                  int D_step = kDefaultDepthStep, int max_depth = 200);

/// harm(i) = w(i) beta_D(t[i]) / sum_j w(j) beta_D(t[j]) over the children of v.
std::vector<double> harm_first_step(const WeightedTree& tree, int D, NodeId v = 0);

/// log harm_t(xi_n) for the root-started chain xi_0, ..., xi_n, each factor at
/// truncation D below the child.
double harm_log_mass(const WeightedTree& tree, std::span<const NodeId> ray, int D);

// Lazy counterparts. The tree below a vertex is regenerated from its stream
// key by an implicit depth-first traversal, so nothing is stored. For
// degenerate laws the symmetric closed form is used unless `generic` is set.

/// Profile (beta_0, ..., beta_D) of the tree rooted at stream key `key`.
std::vector<double> beta_profile_lazy(const EnvironmentLaw& law, std::uint64_t key, int D,
                                      bool generic = false);

/// beta_D only; cheaper than the profile.
double beta_truncated_lazy(const EnvironmentLaw& law, std::uint64_t key, int D,
                           bool generic = false);

ConductanceEstimate beta_adaptive_lazy(const EnvironmentLaw& law, std::uint64_t key,
                                       double tol = kDefaultBetaTol,
                                       int D_step = kDefaultDepthStep, int max_depth = 200,
                                       bool generic = false);

/// First-step harmonic masses at the root of the tree keyed by `key`.
std::vector<double> harm_first_step_lazy(const EnvironmentLaw& law, std::uint64_t key, int D,
                                         bool generic = false);

/// harm_log_mass where `tree` only needs the ray vertices (other than the
/// last) expanded; everything else is regenerated from keys.
double harm_log_mass_lazy(const EnvironmentLaw& law, const WeightedTree& tree,
                          std::span<const NodeId> ray, int D, bool generic = false);

}  // namespace gwharm
