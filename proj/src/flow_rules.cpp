#include "gwharm/flow_rules.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "gwharm/conductance.hpp"
#include "gwharm/rng.hpp"

namespace gwharm {

namespace {

std::uint64_t count_below(const WeightedTree& tree, NodeId v, int n) {
  std::vector<NodeId> level{v}, next;
  for (int l = 0; l < n; ++l) {
    next.clear();
    for (NodeId x : level) {
      if (!tree.expanded(x)) {
        throw NotRealizedError("W_estimate: tree not realized " + std::to_string(n) +
                               " generations down; extend first");
      }
      for (NodeId c : tree.children(x)) next.push_back(c);
    }
    level.swap(next);
  }
  return level.size();
}

void normalize(std::vector<double>& p) {
  double total = 0.0;
  for (double x : p) total += x;
  for (double& x : p) x /= total;
}

}  // namespace

std::string to_string(FlowRule r) {
  switch (r) {
    case FlowRule::harm: return "HARM";
    case FlowRule::visw: return "VISW";
    case FlowRule::unif: return "UNIF";
  }
  return "unknown";
}

FlowVector visw_first_step(const WeightedTree& tree, NodeId v) {
  if (!tree.expanded(v)) throw NotRealizedError("visw_first_step: children not realized");
  FlowVector f{{}, FlowRule::visw, {}};
  for (NodeId c : tree.children(v)) f.masses.push_back(tree.weight(c));
  normalize(f.masses);
  return f;
}

FlowVector harm_flow(const WeightedTree& tree, int D, NodeId v) {
  return {harm_first_step(tree, D, v), FlowRule::harm, {D}};
}

double W_estimate(const WeightedTree& tree, int n, double m, NodeId v) {
  if (n < 0) throw std::invalid_argument("W_estimate: n must be >= 0");
  return static_cast<double>(count_below(tree, v, n)) / std::pow(m, n);
}

FlowVector unif_first_step(const WeightedTree& tree, int n, NodeId v) {
  if (n < 0) throw std::invalid_argument("unif_first_step: n must be >= 0");
  if (!tree.expanded(v)) throw NotRealizedError("unif_first_step: children not realized");
  FlowVector f{{}, FlowRule::unif, {n}};
  for (NodeId c : tree.children(v)) {
    f.masses.push_back(static_cast<double>(count_below(tree, c, n)));
  }
  normalize(f.masses);
  return f;
}

double shannon_entropy(const std::vector<double>& p) {
  double h = 0.0;
  for (double x : p) {
    if (x > 0.0) h -= x * std::log(x);
  }
  return h;
}

EntropyPair entropy_of(const std::vector<double>& harm, const std::vector<double>& unif) {
  if (harm.size() != unif.size()) throw std::invalid_argument("entropy_of: size mismatch");
  EntropyPair e;
  e.entropy = shannon_entropy(harm);
  for (std::size_t i = 0; i < harm.size(); ++i) {
    if (harm[i] > 0.0) e.cross_entropy -= harm[i] * std::log(unif[i]);
  }
  return e;
}

EntropyPair entropy_compare(const WeightedTree& tree, int D, int n) {
  return entropy_of(harm_first_step(tree, D), unif_first_step(tree, n).masses);
}

int default_W_depth(const EnvironmentLaw& law) {
  const double m = law.mean_offspring();
  const int cap = static_cast<int>(std::floor(std::log(1e6) / std::log(m)));
  return std::max(1, std::min(12, cap));
}

std::vector<std::uint64_t> generation_sizes_lazy(const EnvironmentLaw& law, std::uint64_t key,
                                                 int n) {
  if (n < 0) throw std::invalid_argument("generation_sizes_lazy: n must be >= 0");
  std::vector<std::uint64_t> sizes{1};
  std::vector<std::uint64_t> level{key}, next;
  for (int l = 0; l < n; ++l) {
    next.clear();
    for (std::uint64_t k : level) {
      const int c = law.draw_count(k);
      for (int i = 0; i < c; ++i) next.push_back(child_key(k, i));
    }
    level.swap(next);
    sizes.push_back(level.size());
  }
  return sizes;
}

double W_estimate_lazy(const EnvironmentLaw& law, std::uint64_t key, int n) {
  return static_cast<double>(generation_sizes_lazy(law, key, n).back()) /
         std::pow(law.mean_offspring(), n);
}

FlowVector unif_first_step_lazy(const EnvironmentLaw& law, std::uint64_t key, int n) {
  if (n < 0) throw std::invalid_argument("unif_first_step_lazy: n must be >= 0");
  FlowVector f{{}, FlowRule::unif, {n}};
  const int c = law.draw_count(key);
  for (int i = 0; i < c; ++i) {
    f.masses.push_back(static_cast<double>(generation_sizes_lazy(law, child_key(key, i), n).back()));
  }
  normalize(f.masses);
  return f;
}

EntropyPair entropy_compare_lazy(const EnvironmentLaw& law, std::uint64_t key, int D, int n,
                                 bool generic) {
  return entropy_of(harm_first_step_lazy(law, key, D, generic),
                    unif_first_step_lazy(law, key, n).masses);
}

}  // namespace gwharm
