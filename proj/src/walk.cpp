#include "gwharm/walk.hpp"

#include <string>

#include "gwharm/rng.hpp"

namespace gwharm {

Transition transition_distribution(const WeightedTree& tree, NodeId x) {
  Transition t;
  if (x == kParentOfRoot) {
    t.targets = {tree.root()};
    t.probabilities = {1.0};
    return t;
  }
  const Node& n = tree.node(x);
  if (!n.expanded) {
    throw NotRealizedError("transition_distribution: children not realized; extend first");
  }
  const double total = 1.0 + n.child_weight_sum;
  t.targets.reserve(n.child_count + 1);
  t.probabilities.reserve(n.child_count + 1);
  t.targets.push_back(n.parent);
  t.probabilities.push_back(1.0 / total);
  for (NodeId c : tree.children(x)) {
    t.targets.push_back(c);
    t.probabilities.push_back(tree.weight(c) / total);
  }
  return t;
}

RejectionBudgetExceeded::RejectionBudgetExceeded(std::int64_t attempts_, double mean_steps)
    : std::runtime_error("conditioned walk: rejection budget exhausted after " +
                         std::to_string(attempts_) + " attempts (mean " +
                         std::to_string(mean_steps) +
                         " steps before hitting the root's parent); is the law transient?"),
      attempts(attempts_),
      mean_steps_per_attempt(mean_steps) {}

Walker::Walker(const EnvironmentLaw& law, WeightedTree tree, std::uint64_t walk_seed)
    : law_(&law), tree_(std::move(tree)), rng_(walk_seed) {
  vertices_.push_back(tree_.root());
  depths_.push_back(0);
}

void Walker::step() {
  const NodeId x = position();
  NodeId next;
  if (x == kParentOfRoot) {
    next = tree_.root();
  } else {
    if (!tree_.expanded(x)) {
      law_->draw(tree_.node(x).key, scratch_);
      tree_.attach_children(x, scratch_);
    }
    const Node& n = tree_.node(x);
    double u = to_unit(rng_()) * (1.0 + n.child_weight_sum) - 1.0;
    if (u < 0.0) {
      next = n.parent;
    } else {
      next = n.first_child + n.child_count - 1;
      for (std::uint32_t i = 0; i + 1 < n.child_count; ++i) {
        u -= tree_.node(n.first_child + i).weight;
        if (u < 0.0) {
          next = n.first_child + i;
          break;
        }
      }
    }
  }
  const int d = next == kParentOfRoot ? -1 : tree_.depth(next);
  if (next == kParentOfRoot) hit_boundary_ = true;
  vertices_.push_back(next);
  depths_.push_back(d);
  if (d > max_depth_) max_depth_ = d;
}

Walker::Stop Walker::run(std::int64_t max_steps, std::optional<int> stop_depth,
                         bool stop_at_boundary) {
  if (stop_depth && depth() >= *stop_depth) return Stop::depth;
  for (std::int64_t i = 0; i < max_steps; ++i) {
    step();
    if (stop_at_boundary && position() == kParentOfRoot) return Stop::boundary;
    if (stop_depth && depth() >= *stop_depth) return Stop::depth;
  }
  return Stop::horizon;
}

WalkPath Walker::into_path() && {
  WalkPath p{std::move(tree_), std::move(vertices_), std::move(depths_)};
  return p;
}

WalkPath run_walk(const EnvironmentLaw& law, const WalkConfig& config,
                  const ContinueRule& more) {
  if (config.horizon < 1) throw std::invalid_argument("run_walk: horizon must be >= 1");
  std::int64_t rejected = 0;
  double rejected_steps = 0.0;
  for (std::int64_t attempt = 0;; ++attempt) {
    Walker walker(law,
                  WeightedTree(tree_root_key(derive_seed(config.seed, kTreeStream,
                                                         static_cast<std::uint64_t>(attempt)))),
                  derive_seed(config.seed, kWalkStream, static_cast<std::uint64_t>(attempt)));
    std::optional<int> target = config.max_depth;
    Walker::Stop stop;
    for (;;) {
      stop = walker.run(config.horizon - walker.steps(), target, config.condition_nonreturn);
      if (stop != Walker::Stop::depth || !more) break;
      auto next = more(walker);
      if (!next) break;
      target = next;
    }
    if (stop == Walker::Stop::boundary) {
      ++rejected;
      rejected_steps += static_cast<double>(walker.steps());
      if (rejected >= config.rejection_budget) {
        throw RejectionBudgetExceeded(rejected, rejected_steps / static_cast<double>(rejected));
      }
      continue;
    }
    WalkPath path = std::move(walker).into_path();
    path.rejected_count = rejected;
    path.truncated = stop == Walker::Stop::depth;
    path.seed = config.seed;
    return path;
  }
}

}  // namespace gwharm
