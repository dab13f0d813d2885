#include "gwharm/tree.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <ostream>
#include <utility>

#include "gwharm/rng.hpp"

namespace gwharm {

namespace {

// Copies everything below `from` in `src` under `to` in `dst`, breadth-first.
// `stop` is left unexpanded (with its source key) if reached.
void copy_below(const WeightedTree& src, NodeId from, WeightedTree& dst, NodeId to,
                NodeId stop = kParentOfRoot) {
  std::deque<std::pair<NodeId, NodeId>> queue{{from, to}};
  std::vector<double> weights;
  while (!queue.empty()) {
    auto [s, d] = queue.front();
    queue.pop_front();
    dst.set_key(d, src.node(s).key);
    if (s == stop || !src.expanded(s)) continue;
    weights.clear();
    for (NodeId c : src.children(s)) weights.push_back(src.weight(c));
    auto ids = dst.attach_children(d, weights);
    std::uint32_t i = 0;
    for (NodeId c : src.children(s)) queue.emplace_back(c, ids[i++]);
  }
}

}  // namespace

WeightedTree::WeightedTree(std::uint64_t root_key) {
  Node root;
  root.key = root_key;
  nodes_.push_back(root);
}

NodeId WeightedTree::child(NodeId v, std::uint32_t i) const {
  const Node& n = node(v);
  if (!n.expanded) throw NotRealizedError("vertex is on the frontier; extend it first");
  if (i >= n.child_count) throw TreeUsageError("child index out of range");
  return n.first_child + i;
}

std::vector<NodeId> WeightedTree::frontier() const {
  std::vector<NodeId> out;
  for (NodeId v = 0; v < nodes_.size(); ++v) {
    if (!nodes_[v].expanded) out.push_back(v);
  }
  return out;
}

int WeightedTree::realized_depth() const {
  int shallowest = std::numeric_limits<int>::max();
  int deepest = 0;
  for (const Node& n : nodes_) {
    deepest = std::max(deepest, n.depth);
    if (!n.expanded) shallowest = std::min(shallowest, n.depth);
  }
  return shallowest == std::numeric_limits<int>::max() ? deepest + 1 : shallowest;
}

std::vector<std::uint32_t> WeightedTree::word(NodeId v) const {
  std::vector<std::uint32_t> w;
  while (v != root()) {
    const NodeId p = parent(v);
    w.push_back(v - node(p).first_child + 1);
    v = p;
  }
  std::reverse(w.begin(), w.end());
  return w;
}

bool WeightedTree::is_strict_ancestor(NodeId ancestor, NodeId v) const {
  if (ancestor == kParentOfRoot) return v != kParentOfRoot;
  if (v == kParentOfRoot) return false;
  const int target = depth(ancestor);
  while (v != kParentOfRoot && depth(v) > target) {
    v = parent(v);
    if (v == ancestor) return true;
  }
  return false;
}

std::vector<NodeId> WeightedTree::attach_children(NodeId v, std::span<const double> weights) {
  if (!contains(v)) throw TreeUsageError("attach_children: unknown vertex");
  if (nodes_[v].expanded) throw TreeUsageError("attach_children: vertex already expanded");
  if (weights.empty()) throw TreeUsageError("attach_children: trees have no leaves");
  if (nodes_.size() + weights.size() >= kParentOfRoot) {
    throw std::length_error("attach_children: arena exhausted");
  }
  const auto first = static_cast<NodeId>(nodes_.size());
  const std::uint64_t key = nodes_[v].key;
  const int depth = nodes_[v].depth + 1;
  double sum = 0.0;
  std::vector<NodeId> ids;
  ids.reserve(weights.size());
  for (std::uint32_t i = 0; i < weights.size(); ++i) {
    const double w = weights[i];
    if (!(w > 0.0) || !std::isfinite(w)) {
      throw TreeUsageError("attach_children: weights must be positive and finite");
    }
    Node c;
    c.parent = v;
    c.depth = depth;
    c.weight = w;
    c.key = child_key(key, i);
    nodes_.push_back(c);
    ids.push_back(first + i);
    sum += w;
  }
  Node& n = nodes_[v];
  n.expanded = true;
  n.first_child = first;
  n.child_count = static_cast<std::uint32_t>(weights.size());
  n.child_weight_sum = sum;
  return ids;
}

void WeightedTree::set_key(NodeId v, std::uint64_t key) {
  if (!contains(v)) throw TreeUsageError("set_key: unknown vertex");
  if (nodes_[v].expanded) throw TreeUsageError("set_key: vertex already expanded");
  nodes_[v].key = key;
}

bool WeightedTree::operator==(const WeightedTree& other) const {
  std::vector<std::pair<NodeId, NodeId>> stack{{root(), other.root()}};
  while (!stack.empty()) {
    auto [a, b] = stack.back();
    stack.pop_back();
    const Node& x = node(a);
    const Node& y = other.node(b);
    if (x.expanded != y.expanded || x.child_count != y.child_count) return false;
    if (a != root() && x.weight != y.weight) return false;
    for (std::uint32_t i = 0; i < x.child_count; ++i) {
      stack.emplace_back(x.first_child + i, y.first_child + i);
    }
  }
  return true;
}

void WeightedTree::write_jsonl(std::ostream& os) const {
  for (NodeId v = 0; v < nodes_.size(); ++v) {
    const Node& n = nodes_[v];
    os << "{\"id\":" << v << ",\"parent\":";
    if (n.parent == kParentOfRoot) {
      os << "null,\"weight\":null";
    } else {
      os << n.parent << ",\"weight\":" << n.weight;
    }
    os << ",\"depth\":" << n.depth << "}\n";
  }
}

WeightedTree sample_tree(const EnvironmentLaw& law, int depth_limit, std::uint64_t seed) {
  if (depth_limit < 0) throw TreeUsageError("sample_tree: depth_limit must be >= 0");
  WeightedTree tree(tree_root_key(seed));
  extend_to_depth(tree, law, depth_limit);
  return tree;
}

std::vector<NodeId> extend_node(WeightedTree& tree, NodeId v, const EnvironmentLaw& law) {
  if (!tree.contains(v)) throw TreeUsageError("extend_node: unknown vertex");
  if (tree.expanded(v)) throw TreeUsageError("extend_node: vertex is not on the frontier");
  std::vector<double> weights;
  law.draw(tree.node(v).key, weights);
  return tree.attach_children(v, weights);
}

void extend_to_depth(WeightedTree& tree, const EnvironmentLaw& law, int depth) {
  // Ids grow with insertion, so one forward sweep reaches newly attached
  // children as well.
  std::vector<double> weights;
  for (NodeId v = 0; v < tree.size(); ++v) {
    if (tree.depth(v) < depth && !tree.expanded(v)) {
      law.draw(tree.node(v).key, weights);
      tree.attach_children(v, weights);
    }
  }
}

WeightedTree subtree(const WeightedTree& tree, NodeId x) {
  if (!tree.contains(x)) throw TreeUsageError("subtree: unknown vertex");
  WeightedTree out(tree.node(x).key);
  copy_below(tree, x, out, out.root());
  return out;
}

PrunedTree prune(const WeightedTree& tree, NodeId x) {
  if (x == kParentOfRoot || !tree.contains(x)) throw TreeUsageError("prune: invalid vertex");
  PrunedTree out{WeightedTree(tree.node(tree.root()).key), 0};
  // Breadth-first copy that does not descend below x; track x's new id.
  std::deque<std::pair<NodeId, NodeId>> queue{{tree.root(), out.tree.root()}};
  std::vector<double> weights;
  while (!queue.empty()) {
    auto [s, d] = queue.front();
    queue.pop_front();
    out.tree.set_key(d, tree.node(s).key);
    if (s == x) {
      out.cut = d;
      continue;
    }
    if (!tree.expanded(s)) continue;
    weights.clear();
    for (NodeId c : tree.children(s)) weights.push_back(tree.weight(c));
    auto ids = out.tree.attach_children(d, weights);
    std::uint32_t i = 0;
    for (NodeId c : tree.children(s)) queue.emplace_back(c, ids[i++]);
  }
  return out;
}

WeightedTree glue(const PrunedTree& pruned, const WeightedTree& t2) {
  if (!pruned.tree.contains(pruned.cut) || pruned.tree.expanded(pruned.cut)) {
    throw TreeUsageError("glue: cut vertex must be present and unexpanded");
  }
  WeightedTree out = pruned.tree;
  copy_below(t2, t2.root(), out, pruned.cut);
  return out;
}

std::uint64_t generation_size(const WeightedTree& tree, int n) {
  std::uint64_t count = 0;
  for (NodeId v = 0; v < tree.size(); ++v) {
    const int d = tree.depth(v);
    if (d == n) ++count;
    if (d < n && !tree.expanded(v)) {
      throw NotRealizedError("generation_size: tree not realized to depth " +
                             std::to_string(n) + "; extend first");
    }
  }
  return count;
}

}  // namespace gwharm
