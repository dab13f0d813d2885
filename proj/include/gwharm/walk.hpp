#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <span>
#include <stdexcept>
#include <vector>

#include "gwharm/environment.hpp"
#include "gwharm/tree.hpp"

namespace gwharm {

struct WalkConfig {
  std::int64_t horizon = 1'000'000;  // maximum number of steps
  std::uint64_t seed = 0;
  std::optional<int> max_depth;      // the walk stops on first reaching this depth
  bool condition_nonreturn = false;  // reject (tree, walk) pairs that hit the root's parent
  std::int64_t rejection_budget = 1'000'000;
};

/// Nearest-neighbour path X_0 = root, X_1, ... on its realized tree.
/// The root's parent appears as kParentOfRoot with depth -1.
struct WalkPath {
  WeightedTree tree;
  std::vector<NodeId> vertices;
  std::vector<int> depths;
  std::int64_t rejected_count = 0;
  bool truncated = false;  // ended on reaching max_depth
  std::uint64_t seed = 0;

  std::int64_t steps() const noexcept {
    return static_cast<std::int64_t>(vertices.size()) - 1;
  }
};

/// Read-only view of a path prefix, usable while a walk is still running.
struct PathView {
  const WeightedTree& tree;
  std::span<const NodeId> vertices;
  std::span<const int> depths;

  PathView(const WeightedTree& t, std::span<const NodeId> v, std::span<const int> d)
      : tree(t), vertices(v), depths(d) {}
  PathView(const WalkPath& p)  // NOLINT(google-explicit-constructor)
      : tree(p.tree), vertices(p.vertices), depths(p.depths) {}
};

/// One row of the quenched transition matrix.
struct Transition {
  std::vector<NodeId> targets;  // parent first, then children in order
  std::vector<double> probabilities;
};

/// Row x of the transition matrix: parent 1/(1+S), child i w(xi)/(1+S) with S
/// the sum of child weights; the root's parent moves to the root with
/// probability 1. Throws NotRealizedError when x is on the frontier.
Transition transition_distribution(const WeightedTree& tree, NodeId x);

/// Rejection sampling ran out of attempts; usually means a recurrent law.
class RejectionBudgetExceeded : public std::runtime_error {
 public:
  RejectionBudgetExceeded(std::int64_t attempts, double mean_steps);
  std::int64_t attempts;
  double mean_steps_per_attempt;
};

/// Incremental walk on a lazily grown tree.
class Walker {
 public:
  enum class Stop { horizon, depth, boundary };

  Walker(const EnvironmentLaw& law, WeightedTree tree, std::uint64_t walk_seed);

  NodeId position() const noexcept { return vertices_.back(); }
  int depth() const noexcept { return depths_.back(); }
  int max_depth_reached() const noexcept { return max_depth_; }
  bool hit_boundary() const noexcept { return hit_boundary_; }
  std::int64_t steps() const noexcept {
    return static_cast<std::int64_t>(vertices_.size()) - 1;
  }
  const WeightedTree& tree() const noexcept { return tree_; }
  const std::vector<NodeId>& vertices() const noexcept { return vertices_; }
  const std::vector<int>& depths() const noexcept { return depths_; }

  /// One transition; realizes the offspring of the current vertex if needed.
  void step();

  /// Steps until `max_steps` more steps are taken, `stop_depth` is reached, or
  /// (when requested) the root's parent is hit.
  Stop run(std::int64_t max_steps, std::optional<int> stop_depth, bool stop_at_boundary);

  PathView view() const noexcept { return {tree_, vertices_, depths_}; }

  WalkPath into_path() &&;

 private:
  const EnvironmentLaw* law_;
  WeightedTree tree_;
  std::mt19937_64 rng_;
  std::vector<NodeId> vertices_;
  std::vector<int> depths_;
  std::vector<double> scratch_;
  int max_depth_ = 0;
  bool hit_boundary_ = false;
};

/// After the walk stops at a depth target, returns the next target to keep
/// walking, or nullopt to finish.
using ContinueRule = std::function<std::optional<int>(const Walker&)>;

/// Annealed walk: fresh tree keyed from config.seed, grown on demand. Under
/// condition_nonreturn any attempt touching the root's parent is discarded
/// and a new (tree, walk) pair is drawn. An exhausted horizon is not an error.
WalkPath run_walk(const EnvironmentLaw& law, const WalkConfig& config,
                  const ContinueRule& more = {});

}  // namespace gwharm
