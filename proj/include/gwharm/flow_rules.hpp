#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "gwharm/environment.hpp"
#include "gwharm/tree.hpp"

namespace gwharm {

enum class FlowRule { harm, visw, unif };
std::string to_string(FlowRule r);

struct FlowVector {
  std::vector<double> masses;  // over the children of the root, in order
  FlowRule rule = FlowRule::visw;
  std::vector<int> params;     // truncation / generation depths used
};

/// Non-backtracking walk weighted by child weights: w(i) / sum_j w(j).
FlowVector visw_first_step(const WeightedTree& tree, NodeId v = 0);

/// Harmonic first-step masses at truncation D, wrapped as a FlowVector.
FlowVector harm_flow(const WeightedTree& tree, int D, NodeId v = 0);

/// Z_n(t[v]) / m^n. Needs n generations below v realized.
double W_estimate(const WeightedTree& tree, int n, double m, NodeId v = 0);

/// mass(i) proportional to W_estimate(t[i], n); depends on shape only.
FlowVector unif_first_step(const WeightedTree& tree, int n, NodeId v = 0);

struct EntropyPair {
  double entropy = 0.0;        // sum harm(i) (-log harm(i))
  double cross_entropy = 0.0;  // sum harm(i) (-log unif(i))
  double gap() const { return cross_entropy - entropy; }
};

EntropyPair entropy_compare(const WeightedTree& tree, int D, int n);
EntropyPair entropy_of(const std::vector<double>& harm, const std::vector<double>& unif);

/// sum p_i (-log p_i).
double shannon_entropy(const std::vector<double>& p);

/// Default generation depth for W: 12, reduced so that m^n stays below 1e6.
int default_W_depth(const EnvironmentLaw& law);

// Lazy forms on the tree regenerated from a stream key.

/// Generation sizes Z_0, ..., Z_n.
std::vector<std::uint64_t> generation_sizes_lazy(const EnvironmentLaw& law, std::uint64_t key,
                                                 int n);
double W_estimate_lazy(const EnvironmentLaw& law, std::uint64_t key, int n);
FlowVector unif_first_step_lazy(const EnvironmentLaw& law, std::uint64_t key, int n);
EntropyPair entropy_compare_lazy(const EnvironmentLaw& law, std::uint64_t key, int D, int n,
                                 bool generic = false);

}  // namespace gwharm
