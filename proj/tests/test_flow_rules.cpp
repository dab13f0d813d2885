#include <doctest.h>

#include <cmath>
#include <numeric>
#include <vector>

#include "gwharm/conductance.hpp"
#include "gwharm/environment.hpp"
#include "gwharm/flow_rules.hpp"
#include "gwharm/rng.hpp"
#include "gwharm/stats.hpp"

using namespace gwharm;

TEST_SUITE("flow_rules") {
  TEST_CASE("visw for weights (2, 3)") {
    WeightedTree t(1);
    const double w[] = {2.0, 3.0};
    t.attach_children(0, w);
    auto f = visw_first_step(t);
    CHECK(f.rule == FlowRule::visw);
    CHECK(f.masses[0] == doctest::Approx(0.4));
    CHECK(f.masses[1] == doctest::Approx(0.6));
  }

  TEST_CASE("visw is uniform for equal weights and composes along a path") {
    auto law = preset("gw12-lognormal0.5");
    auto r = sample_tree(preset("regular-m3-lambda2"), 1, 1);
    for (double m : visw_first_step(r).masses) CHECK(m == doctest::Approx(1.0 / 3.0));

    // Mass of a depth-2 vertex is the product of the two first-step masses.
    auto t = sample_tree(law, 2, 4);
    double total = 0.0;
    for (NodeId c : t.children(0)) {
      const double a = visw_first_step(t).masses[c - t.node(0).first_child];
      for (double b : visw_first_step(t, c).masses) total += a * b;
    }
    CHECK(total == doctest::Approx(1.0));
  }

  TEST_CASE("unif follows subtree sizes (4, 2)") {
    WeightedTree t(1);
    const double two[] = {5.0, 0.1}, one[] = {9.0};
    auto top = t.attach_children(0, two);
    for (NodeId v : t.attach_children(top[0], two)) t.attach_children(v, two);
    for (NodeId v : t.attach_children(top[1], two)) t.attach_children(v, one);
    auto f = unif_first_step(t, 2);
    CHECK(f.masses[0] == doctest::Approx(2.0 / 3.0));
    CHECK(f.masses[1] == doctest::Approx(1.0 / 3.0));
  }

  TEST_CASE("W on regular trees is identically one") {
    auto law = preset("regular-m3-lambda1");
    auto t = sample_tree(law, 5, 1);
    CHECK(W_estimate(t, 5, 3.0) == doctest::Approx(1.0));
    CHECK(W_estimate_lazy(law, 77, 8) == doctest::Approx(1.0));
    for (double m : unif_first_step(t, 4).masses) CHECK(m == doctest::Approx(1.0 / 3.0));
  }

  TEST_CASE("W recursion") {
    auto law = preset("gw12-simple");
    for (std::uint64_t s = 0; s < 30; ++s) {
      auto t = sample_tree(law, 9, s);
      double sum = 0.0;
      for (NodeId c : t.children(0)) sum += W_estimate(t, 8, 1.5, c);
      CHECK(W_estimate(t, 9, 1.5) == doctest::Approx(sum / 1.5));
      CHECK(W_estimate_lazy(law, t.node(0).key, 9) == doctest::Approx(W_estimate(t, 9, 1.5)));
      auto z = generation_sizes_lazy(law, t.node(0).key, 9);
      for (int n = 0; n <= 9; ++n) CHECK(z[n] == generation_size(t, n));
    }
  }

  TEST_CASE("mean of W is one") {
    auto law = preset("gw12-simple");
    const int n = default_W_depth(law);
    CHECK(n == 12);
    std::vector<double> w;
    for (std::uint64_t s = 0; s < 10000; ++s) w.push_back(W_estimate_lazy(law, mix64(s), n));
    const auto r = mean_se(w);
    CHECK(std::abs(r.mean - 1.0) < 3.0 * r.se);
  }

  TEST_CASE("default W depth keeps m^n below 1e6") {
    CHECK(default_W_depth(preset("regular-m2-lambda1")) == 12);
    CHECK(default_W_depth(preset("regular-m4-lambda1")) == 9);
  }

  TEST_CASE("entropy on regular trees is log m for both rules") {
    auto law = preset("regular-m3-lambda0.5");
    for (bool generic : {false, true}) {
      auto e = entropy_compare_lazy(law, 9, 10, 4, generic);
      CHECK(e.entropy == doctest::Approx(std::log(3.0)));
      CHECK(e.cross_entropy == doctest::Approx(std::log(3.0)));
    }
    CHECK(shannon_entropy({0.25, 0.25, 0.25, 0.25}) == doctest::Approx(std::log(4.0)));
  }

  TEST_CASE("Gibbs inequality per tree, equality only for equal vectors") {
    auto e = entropy_of({0.3, 0.7}, {0.3, 0.7});
    CHECK(e.gap() == doctest::Approx(0.0));
    CHECK(entropy_of({0.3, 0.7}, {0.5, 0.5}).gap() > 0.0);
    auto law = preset("gw12-lognormal0.5");
    for (std::uint64_t s = 0; s < 200; ++s) {
      auto lazy = entropy_compare_lazy(law, mix64(s), 8, 6);
      CHECK(lazy.gap() >= -1e-12);
      auto t = sample_tree(law, 9, s);
      auto strict = entropy_compare(t, 8, 6);
      auto h = harm_flow(t, 8).masses;
      auto u = unif_first_step(t, 6).masses;
      auto direct = entropy_of(h, u);
      CHECK(strict.entropy == doctest::Approx(direct.entropy));
      CHECK(strict.cross_entropy == doctest::Approx(direct.cross_entropy));
      auto lz = entropy_compare_lazy(law, t.node(0).key, 8, 6);
      CHECK(lz.entropy == doctest::Approx(strict.entropy).epsilon(1e-12));
      CHECK(lz.cross_entropy == doctest::Approx(strict.cross_entropy).epsilon(1e-12));
    }
  }

  TEST_CASE("harm and unif differ on gw12") {
    auto law = preset("gw12-simple");
    std::vector<double> gap;
    for (std::uint64_t s = 0; s < 10000; ++s) {
      gap.push_back(entropy_compare_lazy(law, mix64(s + 3), 20, default_W_depth(law)).gap());
    }
    const auto r = mean_se(gap);
    CHECK(r.mean > 3.0 * r.se);
  }
}
