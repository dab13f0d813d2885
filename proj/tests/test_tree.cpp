#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <random>
#include <sstream>
#include <vector>

#include "gwharm/environment.hpp"
#include "gwharm/rng.hpp"
#include "gwharm/stats.hpp"
#include "gwharm/tree.hpp"

using namespace gwharm;

namespace {

// Vertex reached by a word of 1-based child indices.
NodeId at(const WeightedTree& t, std::initializer_list<std::uint32_t> w) {
  NodeId v = t.root();
  for (auto i : w) v = t.child(v, i - 1);
  return v;
}

std::size_t count_below(const WeightedTree& t, NodeId x) {
  std::size_t n = 0;
  for (NodeId v = 0; v < t.size(); ++v) n += t.is_strict_ancestor(x, v);
  return n;
}

// Shape code of the first `depth` levels: offspring counts in breadth-first order.
std::vector<std::uint32_t> shape(const WeightedTree& t, int depth) {
  std::vector<std::uint32_t> out;
  std::vector<NodeId> level{t.root()};
  for (int d = 0; d < depth; ++d) {
    std::vector<NodeId> next;
    for (NodeId v : level) {
      out.push_back(t.child_count(v));
      for (NodeId c : t.children(v)) next.push_back(c);
    }
    level = std::move(next);
  }
  return out;
}

}  // namespace

TEST_SUITE("tree_core") {
  TEST_CASE("complete binary tree of depth 2") {
    auto t = sample_tree(preset("binary-simple"), 2, 5);
    CHECK(t.size() == 7);
    for (NodeId v = 1; v < t.size(); ++v) CHECK(t.weight(v) == 1.0);
    CHECK(t.frontier().size() == 4);
    CHECK(t.realized_depth() == 2);
    CHECK(generation_size(t, 2) == 4);
    CHECK_THROWS_AS(generation_size(t, 3), NotRealizedError);
    CHECK(t.word(at(t, {2, 1})) == std::vector<std::uint32_t>{2, 1});
  }

  TEST_CASE("depth limit 0 leaves the root on the frontier") {
    auto t = sample_tree(preset("gw12-simple"), 0, 1);
    CHECK(t.size() == 1);
    CHECK(t.frontier() == std::vector<NodeId>{0});
    CHECK(t.on_frontier(t.root()));
  }

  TEST_CASE("extend_node draws offspring once") {
    auto law = preset("regular-m3-lambda1");
    WeightedTree t(123);
    auto kids = extend_node(t, t.root(), law);
    CHECK(kids.size() == 3);
    CHECK(t.child_count(t.root()) == 3);
    CHECK_THROWS_AS(extend_node(t, t.root(), law), TreeUsageError);
    for (NodeId c : kids) CHECK(t.parent(c) == t.root());
  }

  TEST_CASE("expected generation size") {
    auto law = preset("gw12-simple");
    const int n = 10;
    std::vector<double> z;
    z.reserve(100000);
    for (std::uint64_t s = 0; s < 100000; ++s) {
      z.push_back(static_cast<double>(generation_size(sample_tree(law, n, s), n)));
    }
    const auto r = mean_se(z);
    const double expected = std::pow(1.5, n);  // 57.67
    CHECK(std::abs(r.mean - expected) < 3.0 * r.se);
  }

  TEST_CASE("offspring counts of all vertices follow the pmf") {
    auto law = EnvironmentLaw({0.0, 0.3, 0.3, 0.4}, ConstantWeight{1.0});
    std::vector<std::uint64_t> counts(4, 0);
    for (std::uint64_t s = 0; s < 400; ++s) {
      auto t = sample_tree(law, 4, s);
      for (NodeId v = 0; v < t.size(); ++v) {
        if (t.expanded(v)) ++counts[t.child_count(v)];
      }
    }
    CHECK(chi_square_gof(counts, law.pmf()).p_value > 1e-3);
  }

  TEST_CASE("lazy extension in random order matches the eager sample") {
    auto law = preset("gw12-lognormal0.5");
    std::mt19937_64 rng(9);
    for (std::uint64_t s = 0; s < 50; ++s) {
      auto eager = sample_tree(law, 5, s);
      WeightedTree lazy(tree_root_key(s));
      for (;;) {
        std::vector<NodeId> open;
        for (NodeId v : lazy.frontier()) {
          if (lazy.depth(v) < 5) open.push_back(v);
        }
        if (open.empty()) break;
        extend_node(lazy, open[rng() % open.size()], law);
      }
      CHECK(lazy == eager);
    }
  }

  TEST_CASE("shapes of independent samples agree in law") {
    auto law = preset("gw12-simple");
    std::map<std::vector<std::uint32_t>, std::pair<std::uint64_t, std::uint64_t>> cells;
    for (std::uint64_t s = 0; s < 4000; ++s) {
      ++cells[shape(sample_tree(law, 3, s), 3)].first;
      ++cells[shape(sample_tree(law, 3, s + 1'000'000), 3)].second;
    }
    std::vector<std::uint64_t> a, b;
    for (auto& [k, v] : cells) {
      a.push_back(v.first);
      b.push_back(v.second);
    }
    CHECK(chi_square_two_sample(a, b).p_value > 1e-3);
  }

  TEST_CASE("subtree at the root is the tree itself") {
    auto t = sample_tree(preset("gw12-lognormal0.5"), 6, 3);
    CHECK(subtree(t, t.root()) == t);
  }

  TEST_CASE("subtree reindexes depths and keeps weights below x") {
    auto t = sample_tree(preset("gw12-lognormal0.5"), 6, 4);
    const NodeId x = at(t, {1});
    auto s = subtree(t, x);
    CHECK(s.size() == count_below(t, x) + 1);
    CHECK(s.depth(s.root()) == 0);
    CHECK(s.node(s.root()).key == t.node(x).key);
    REQUIRE(s.child_count(s.root()) == t.child_count(x));
    for (std::uint32_t i = 0; i < s.child_count(s.root()); ++i) {
      CHECK(s.weight(s.child(s.root(), i)) == t.weight(t.child(x, i)));
    }
    CHECK(s.realized_depth() == 5);
  }

  TEST_CASE("prune binary depth 2 at the first child") {
    auto t = sample_tree(preset("binary-simple"), 2, 1);
    auto p = prune(t, at(t, {1}));
    CHECK(p.tree.size() == 5);
    CHECK(p.tree.on_frontier(p.cut));
    CHECK(p.tree.word(p.cut) == std::vector<std::uint32_t>{1});
    auto r = prune(t, t.root());
    CHECK(r.tree.size() == 1);
    CHECK(r.cut == r.tree.root());
  }

  TEST_CASE("glue(prune(t, x), t[x]) == t for every x") {
    auto law = preset("gw12-lognormal0.5");
    for (std::uint64_t s = 0; s < 20; ++s) {
      auto t = sample_tree(law, 5, s);
      for (NodeId x = 0; x < t.size(); ++x) {
        auto p = prune(t, x);
        CHECK(p.tree.size() + count_below(t, x) == t.size());
        CHECK(p.tree.weight(p.cut) == t.weight(x));
        auto g = glue(p, subtree(t, x));
        CHECK(g == t);
        CHECK(g.size() == t.size());
      }
    }
  }

  TEST_CASE("glue keeps the weight of x and takes everything below from t2") {
    auto law = preset("gw12-lognormal0.5");
    auto t = sample_tree(law, 3, 1);
    auto t2 = sample_tree(preset("regular-m3-lambda2"), 2, 8);
    const NodeId x = at(t, {1, 1});
    auto g = glue(prune(t, x), t2);
    const NodeId gx = at(g, {1, 1});
    CHECK(g.weight(gx) == t.weight(x));
    CHECK(g.child_count(gx) == 3);
    CHECK(subtree(g, gx) == t2);
    CHECK(g.node(gx).key == t2.node(t2.root()).key);
    CHECK_THROWS_AS(glue(PrunedTree{t, x}, t2), TreeUsageError);
  }

  TEST_CASE("branching property: T^{<=1} and T[1] are uncorrelated") {
    auto law = preset("gw12-simple");
    std::vector<double> above, below;
    for (std::uint64_t s = 0; s < 20000; ++s) {
      auto t = sample_tree(law, 4, s);
      const NodeId x = at(t, {1});
      above.push_back(static_cast<double>(prune(t, x).tree.size()));
      below.push_back(static_cast<double>(subtree(t, x).size()));
    }
    const auto a = mean_se(above), b = mean_se(below);
    double cov = 0.0;
    for (std::size_t i = 0; i < above.size(); ++i) cov += (above[i] - a.mean) * (below[i] - b.mean);
    cov /= static_cast<double>(above.size() - 1);
    const double corr = cov / (a.sd * b.sd);
    CHECK(std::abs(corr) < 4.0 / std::sqrt(static_cast<double>(above.size())));
  }

  TEST_CASE("attach and word bookkeeping") {
    WeightedTree t(1);
    const double w[] = {2.0, 3.0};
    auto kids = t.attach_children(t.root(), w);
    CHECK(t.node(t.root()).child_weight_sum == 5.0);
    CHECK(t.is_strict_ancestor(t.root(), kids[1]));
    CHECK_FALSE(t.is_strict_ancestor(kids[1], kids[1]));
    CHECK_FALSE(t.is_strict_ancestor(kids[0], kids[1]));
    CHECK_THROWS_AS(t.attach_children(t.root(), w), TreeUsageError);
    CHECK(t.node(kids[0]).key == child_key(1, 0));
    CHECK(t.node(kids[1]).key == child_key(1, 1));
  }

  TEST_CASE("jsonl output") {
    WeightedTree t(1);
    const double w[] = {0.5};
    t.attach_children(t.root(), w);
    std::ostringstream os;
    t.write_jsonl(os);
    CHECK(os.str() ==
          "{\"id\":0,\"parent\":null,\"weight\":null,\"depth\":0}\n"
          "{\"id\":1,\"parent\":0,\"weight\":0.5,\"depth\":1}\n");
  }
}
