#include <doctest.h>

#include <cmath>
#include <vector>

#include "gwharm/environment.hpp"
#include "gwharm/rng.hpp"
#include "gwharm/stats.hpp"
#include "gwharm/walk.hpp"

using namespace gwharm;

TEST_SUITE("walk_engine") {
  TEST_CASE("transition row for child weights (2, 3)") {
    WeightedTree t(1);
    const double w[] = {2.0, 3.0};
    t.attach_children(t.root(), w);
    auto row = transition_distribution(t, t.root());
    REQUIRE(row.targets.size() == 3);
    CHECK(row.targets[0] == kParentOfRoot);
    CHECK(row.probabilities[0] == doctest::Approx(1.0 / 6.0));
    CHECK(row.probabilities[1] == doctest::Approx(2.0 / 6.0));
    CHECK(row.probabilities[2] == doctest::Approx(3.0 / 6.0));

    auto b = transition_distribution(t, kParentOfRoot);
    CHECK(b.targets == std::vector<NodeId>{t.root()});
    CHECK(b.probabilities == std::vector<double>{1.0});
    CHECK_THROWS_AS(transition_distribution(t, 1), NotRealizedError);
  }

  TEST_CASE("binary lambda 1 moves to each neighbour with probability 1/3") {
    auto t = sample_tree(preset("binary-simple"), 1, 0);
    auto row = transition_distribution(t, t.root());
    for (double p : row.probabilities) CHECK(p == doctest::Approx(1.0 / 3.0));
  }

  TEST_CASE("one-step frequencies match the transition row") {
    auto law = preset("gw12-simple");
    WeightedTree t(1);
    const double w[] = {2.0, 3.0};
    t.attach_children(t.root(), w);
    std::vector<std::uint64_t> counts(3, 0);
    for (std::uint64_t s = 0; s < 30000; ++s) {
      Walker walker(law, t, mix64(s));
      walker.step();
      const NodeId x = walker.position();
      ++counts[x == kParentOfRoot ? 0 : x];
    }
    const double p[] = {1.0 / 6.0, 2.0 / 6.0, 3.0 / 6.0};
    CHECK(chi_square_gof(counts, p).p_value > 1e-3);
  }

  TEST_CASE("depth drift on the binary tree is 1/3") {
    WalkConfig cfg;
    cfg.horizon = 1'000'000;
    cfg.seed = 11;
    auto path = run_walk(preset("binary-simple"), cfg);
    std::vector<double> inc;
    inc.reserve(path.vertices.size());
    for (std::size_t s = 0; s + 1 < path.vertices.size(); ++s) {
      if (path.vertices[s] == kParentOfRoot) continue;
      inc.push_back(path.depths[s + 1] - path.depths[s]);
    }
    const auto r = mean_se(inc);
    CHECK(std::abs(r.mean - 1.0 / 3.0) < 3.0 * r.se);
  }

  TEST_CASE("horizon 1 realizes the root and one neighbour") {
    WalkConfig cfg;
    cfg.horizon = 1;
    cfg.seed = 3;
    auto path = run_walk(preset("gw12-simple"), cfg);
    CHECK(path.vertices.size() == 2);
    CHECK(path.steps() == 1);
    CHECK_FALSE(path.truncated);
  }

  TEST_CASE("paths move between neighbours") {
    WalkConfig cfg;
    cfg.horizon = 20000;
    cfg.seed = 5;
    auto path = run_walk(preset("gw12-lognormal0.5"), cfg);
    CHECK(path.vertices.front() == path.tree.root());
    for (std::size_t s = 0; s + 1 < path.vertices.size(); ++s) {
      const NodeId a = path.vertices[s], b = path.vertices[s + 1];
      const bool up = a != kParentOfRoot && path.tree.parent(a) == b;
      const bool down = b != kParentOfRoot && path.tree.parent(b) == a;
      CHECK((up || down));
      CHECK(std::abs(path.depths[s + 1] - path.depths[s]) == 1);
    }
  }

  TEST_CASE("replaying a seed reproduces the path") {
    WalkConfig cfg;
    cfg.horizon = 50000;
    cfg.seed = 77;
    cfg.max_depth = 60;
    cfg.condition_nonreturn = true;
    auto law = preset("gw12-lognormal0.5");
    auto a = run_walk(law, cfg);
    auto b = run_walk(law, cfg);
    CHECK(a.vertices == b.vertices);
    CHECK(a.rejected_count == b.rejected_count);
    CHECK(a.tree == b.tree);
  }

  TEST_CASE("conditioned walks never visit the root's parent") {
    auto law = preset("gw12-simple");
    for (std::uint64_t s = 0; s < 200; ++s) {
      WalkConfig cfg;
      cfg.seed = s;
      cfg.max_depth = 40;
      cfg.condition_nonreturn = true;
      auto path = run_walk(law, cfg);
      CHECK(path.truncated);
      CHECK(path.depths.back() == 40);
      for (NodeId v : path.vertices) CHECK(v != kParentOfRoot);
    }
  }

  TEST_CASE("acceptance rate on the binary tree is about 1/2") {
    auto law = preset("binary-simple");
    double attempts = 0.0;
    const int n = 10000;
    for (int s = 0; s < n; ++s) {
      WalkConfig cfg;
      cfg.seed = static_cast<std::uint64_t>(s);
      cfg.max_depth = 20;
      cfg.condition_nonreturn = true;
      attempts += 1.0 + static_cast<double>(run_walk(law, cfg).rejected_count);
    }
    const double p = n / attempts;
    CHECK(std::abs(p - 0.5) < 3.0 * std::sqrt(0.25 / attempts));
  }

  TEST_CASE("recurrent laws exhaust the rejection budget") {
    WalkConfig cfg;
    cfg.seed = 1;
    cfg.max_depth = 30;
    cfg.condition_nonreturn = true;
    cfg.rejection_budget = 50;
    CHECK_THROWS_AS(run_walk(preset("regular-m2-lambda4"), cfg), RejectionBudgetExceeded);
  }

  TEST_CASE("continue rule extends the depth target") {
    WalkConfig cfg;
    cfg.seed = 2;
    cfg.max_depth = 10;
    int calls = 0;
    auto path = run_walk(preset("binary-simple"), cfg, [&](const Walker& w) -> std::optional<int> {
      ++calls;
      if (w.depth() < 30) return w.depth() + 10;
      return std::nullopt;
    });
    CHECK(path.depths.back() == 30);
    CHECK(calls == 3);
  }
}
