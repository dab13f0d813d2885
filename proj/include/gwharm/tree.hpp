#pragma once

#include <cstdint>
#include <iosfwd>
#include <limits>
#include <ranges>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "gwharm/environment.hpp"

namespace gwharm {

using NodeId = std::uint32_t;

/// Artificial parent of the root. Stands for that vertex in walk paths too.
inline constexpr NodeId kParentOfRoot = std::numeric_limits<NodeId>::max();

struct Node {
  NodeId parent = kParentOfRoot;
  NodeId first_child = 0;
  std::uint32_t child_count = 0;
  int depth = 0;
  bool expanded = false;
  double weight = 0.0;            // weight of the edge to the parent; unused at the root
  double child_weight_sum = 0.0;  // sum of the children's weights once expanded
  std::uint64_t key = 0;          // stream key of this vertex's (N, A) draw
};

/// Precondition violation on a tree operation (vertex not on the frontier,
/// structure not realized deep enough, ...).
class TreeUsageError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// Structure requested beyond what has been realized; the caller must extend.
class NotRealizedError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Arena-backed rooted planar tree with positive edge weights.
///
/// Vertices are never removed. Children of a vertex occupy consecutive ids and
/// every child id is larger than its parent's, so reverse id order is a
/// bottom-up order. Unexpanded vertices form the frontier: their offspring
/// has not been drawn yet, they are not leaves.
class WeightedTree {
 public:
  explicit WeightedTree(std::uint64_t root_key = 0);

  NodeId root() const noexcept { return 0; }
  std::size_t size() const noexcept { return nodes_.size(); }
  bool contains(NodeId v) const noexcept { return v < nodes_.size(); }

  const Node& node(NodeId v) const { return nodes_.at(v); }
  NodeId parent(NodeId v) const { return node(v).parent; }
  int depth(NodeId v) const { return node(v).depth; }
  double weight(NodeId v) const { return node(v).weight; }
  bool expanded(NodeId v) const { return node(v).expanded; }
  bool on_frontier(NodeId v) const { return !node(v).expanded; }
  std::uint32_t child_count(NodeId v) const { return node(v).child_count; }
  NodeId child(NodeId v, std::uint32_t i) const;

  auto children(NodeId v) const {
    const Node& n = node(v);
    return std::views::iota(n.first_child, n.first_child + n.child_count);
  }

  std::vector<NodeId> frontier() const;

  /// Largest d such that every vertex of depth < d is expanded (capped at the
  /// deepest vertex present + 1 when nothing is left on the frontier).
  int realized_depth() const;

  /// Word of `v` (1-based child indices from the root).
  std::vector<std::uint32_t> word(NodeId v) const;

  /// True when `ancestor` is a strict prefix of `v`.
  bool is_strict_ancestor(NodeId ancestor, NodeId v) const;

  /// Appends children with the given weights under frontier vertex `v`.
  /// Children get keys derived from v's key.
  std::vector<NodeId> attach_children(NodeId v, std::span<const double> weights);

  /// Replaces the stream key of frontier vertex `v`; used when gluing.
  void set_key(NodeId v, std::uint64_t key);

  /// Structural equality: same shape, weights, depths and frontier, compared
  /// in canonical (planar) order. Stream keys are not compared.
  bool operator==(const WeightedTree& other) const;

  /// One JSON object per line: {"id","parent","weight","depth"}.
  void write_jsonl(std::ostream& os) const;

 private:
  std::vector<Node> nodes_;
};

/// Tree pruned at `cut`: no strict descendant of the cut vertex is present and
/// the cut vertex sits on the frontier.
struct PrunedTree {
  WeightedTree tree;
  NodeId cut = 0;
};

/// Breadth-first sample from `law` down to `depth_limit`, keyed by `seed`.
/// Vertices at depth `depth_limit` stay on the frontier.
WeightedTree sample_tree(const EnvironmentLaw& law, int depth_limit, std::uint64_t seed);

/// Draws the offspring of frontier vertex `v`. Throws TreeUsageError when v
/// has already been expanded.
std::vector<NodeId> extend_node(WeightedTree& tree, NodeId v, const EnvironmentLaw& law);

/// Expands every frontier vertex of depth < `depth`.
void extend_to_depth(WeightedTree& tree, const EnvironmentLaw& law, int depth);

/// Reindexed subtree t[x]; the new root inherits x's stream key.
WeightedTree subtree(const WeightedTree& tree, NodeId x);

/// t pruned at x: every y such that x is not a strict prefix of y.
PrunedTree prune(const WeightedTree& tree, NodeId x);

/// t^{<=x} glued with t2 below x. The weight of x is kept; everything below x,
/// including x's stream key and frontier state, comes from t2.
WeightedTree glue(const PrunedTree& pruned, const WeightedTree& t2);

/// Number of vertices at depth `n`; throws NotRealizedError when some vertex
/// shallower than n is still on the frontier.
std::uint64_t generation_size(const WeightedTree& tree, int n);

}  // namespace gwharm
