#include <doctest.h>

#include <cmath>
#include <numbers>
#include <vector>

#include "gwharm/conductance.hpp"
#include "gwharm/dimension.hpp"
#include "gwharm/environment.hpp"
#include "gwharm/flow_rules.hpp"
#include "gwharm/rng.hpp"
#include "gwharm/tree.hpp"

using namespace gwharm;

namespace {

// E[exp(alpha X)], X ~ N(mu, sigma^2), by the trapezoid rule on +-12 sigma.
double lognormal_moment(double mu, double sigma, double alpha) {
  const int n = 20000;
  const double lo = mu - 12 * sigma, hi = mu + 12 * sigma, h = (hi - lo) / n;
  double s = 0.0;
  for (int i = 0; i <= n; ++i) {
    const double x = lo + i * h;
    const double f = std::exp(alpha * x - 0.5 * (x - mu) * (x - mu) / (sigma * sigma));
    s += (i == 0 || i == n) ? 0.5 * f : f;
  }
  return s * h / (sigma * std::sqrt(2.0 * std::numbers::pi));
}

// Binary tree, lambda = 1, started at the root and stopped at the root's
// parent. A given child c is hit with probability p: step to c (1/3), or step
// to the sibling (1/3), return to the root (1 - beta = 1/2) and try again.
// P*(1 is a regeneration height) = expected number of children hit = 2p.
double binary_first_level_renewal() {
  const double a = 1.0 / 3.0, b = (1.0 / 3.0) * 0.5;
  return 2.0 * a / (1.0 - b);
}

EstimatorConfig quick(std::uint64_t seed, unsigned workers = 1) {
  EstimatorConfig c;
  c.seed = seed;
  c.workers = workers;
  return c;
}

}  // namespace

TEST_SUITE("dimension") {
  TEST_CASE("psi closed forms") {
    CHECK(psi(preset("regular-m3-lambda2"), 0.5) == doctest::Approx(3.0 / std::sqrt(2.0)));
    CHECK(psi(preset("regular-m3-lambda2"), 0.0) == doctest::Approx(3.0));
    CHECK(psi(preset("gw12-twopoint0.5,2,0.25"), 0.5) ==
          doctest::Approx(1.5 * (0.25 * std::sqrt(0.5) + 0.75 * std::sqrt(2.0))));
    for (double alpha : {0.1, 0.5, 1.0}) {
      CHECK(psi(preset("gw12-lognormal0.7"), alpha) ==
            doctest::Approx(1.5 * lognormal_moment(0.0, 0.7, alpha)).epsilon(1e-9));
      CHECK(psi(preset("gw12-family0.7"), alpha) ==
            doctest::Approx(1.5 * lognormal_moment(0.0, 0.7, alpha)).epsilon(1e-9));
    }
    CHECK_THROWS_AS(psi(preset("gw12-simple"), 1.5), std::domain_error);
    CHECK_THROWS_AS(psi(preset("gw12-simple"), -0.1), std::domain_error);
  }

  TEST_CASE("psi Monte Carlo agrees with the closed form") {
    for (const char* name : {"gw12-lognormal0.5", "gw12-family0.5", "gw12-twopoint0.5,2,0.5"}) {
      auto law = preset(name);
      auto mc = psi_monte_carlo(law, 0.6, 100000, 3);
      CHECK(std::abs(mc.mean - psi(law, 0.6)) < 3.0 * mc.se);
    }
  }

  TEST_CASE("transience margins") {
    auto m = transience_margin(preset("regular-m2-lambda0.5"));
    CHECK(m.min_alpha == doctest::Approx(0.0).epsilon(1e-6));
    CHECK(m.margin() == doctest::Approx(1.0));
    m = transience_margin(preset("regular-m3-lambda2"));
    CHECK(m.min_alpha == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(m.min_value == doctest::Approx(1.5));
    CHECK(std::abs(transience_margin(preset("regular-m2-lambda2")).margin()) < 1e-9);
    CHECK(transience_margin(preset("regular-m2-lambda4")).margin() < 0.0);
    CHECK(transience_margin(preset("gw12-simple")).margin() == doctest::Approx(0.5));
    auto ln = transience_margin(preset("gw12-lognormal0.5"));
    for (auto [alpha, value] : ln.psi_values) CHECK(ln.min_value <= value + 1e-15);
    // lognormal(-0.5, 1): psi = 1.5 exp(-a/2 + a^2/2) is smallest at a = 1/2.
    auto shifted = transience_margin(
        EnvironmentLaw({0.0, 0.5, 0.5}, LogNormalWeight{-0.5, 1.0}));
    CHECK(shifted.min_alpha == doctest::Approx(0.5).epsilon(1e-5));
    CHECK(shifted.min_value == doctest::Approx(1.5 * std::exp(-0.125)).epsilon(1e-10));
  }

  TEST_CASE("boundary dimension is log m and matches generation growth") {
    CHECK(boundary_dimension(preset("binary-simple")) == doctest::Approx(std::log(2.0)));
    auto law = preset("gw12-simple");
    CHECK(boundary_dimension(law) == doctest::Approx(std::log(1.5)));
    std::vector<double> mean_z(13, 0.0);
    const int trees = 20000;
    for (int s = 0; s < trees; ++s) {
      auto z = generation_sizes_lazy(law, mix64(s), 12);
      for (int n = 0; n <= 12; ++n) mean_z[n] += static_cast<double>(z[n]) / trees;
    }
    std::vector<double> x, y;
    for (int n = 1; n <= 12; ++n) {
      x.push_back(n);
      y.push_back(std::log(mean_z[n]));
    }
    CHECK(least_squares(x, y).slope == doctest::Approx(std::log(1.5)).epsilon(0.02));
  }

  TEST_CASE("ray estimator on the regular tree is log m") {
    auto law = preset("regular-m2-lambda1");
    auto sym = dim_ray_estimator(law, 10, 50, 10, quick(1));
    CHECK(sym.estimate == doctest::Approx(std::log(2.0)).epsilon(1e-12));
    auto cfg = quick(1);
    cfg.generic = true;
    auto gen = dim_ray_estimator(law, 5, 20, 8, cfg);
    CHECK(gen.estimate == doctest::Approx(std::log(2.0)).epsilon(1e-12));
    CHECK(gen.std_error < 1e-12);
  }

  TEST_CASE("ray estimator on gw12 lies below log m") {
    auto law = preset("gw12-simple");
    auto r = dim_ray_estimator(law, 40, 30, 15, quick(2, 2));
    CHECK(r.estimate > 0.0);
    CHECK(r.estimate < std::log(1.5));
    auto one = dim_ray_estimator(law, 40, 1, 15, quick(3));
    for (const auto& rec : one.records) {
      if (rec.dropped) continue;
      CHECK(rec.values.at("value") >= 0.0);
      CHECK(std::isfinite(rec.values.at("value")));
    }
  }

  TEST_CASE("too many dropped replicas is an error") {
    auto cfg = quick(1);
    cfg.horizon = 10;
    CHECK_THROWS_AS(dim_ray_estimator(preset("gw12-simple"), 10, 50, 5, cfg), ReplicaShortfall);
  }

  TEST_CASE("kappa: the root term alone estimates beta") {
    auto law = preset("gw12-simple");
    for (std::uint64_t s : {1u, 2u, 3u}) {
      const std::uint64_t key = tree_root_key(s);
      auto k = kappa_estimator(law, key, 3000, 0, quick(s));
      const double beta = beta_adaptive_lazy(law, key, 1e-5).value;
      CHECK(std::abs(k.level_means[0] - beta) < 3.0 * std::sqrt(beta * (1 - beta) / 3000));
      auto deeper = kappa_estimator(law, key, 200, 4, quick(s));
      CHECK(deeper.value >= deeper.level_means[0]);
      CHECK(deeper.level_means.size() == 5);
    }
  }

  TEST_CASE("kappa on a degenerate law does not depend on the tree") {
    auto law = preset("binary-simple");
    auto a = kappa_estimator(law, 11, 20, 3, quick(5));
    auto b = kappa_estimator(law, 12345, 20, 3, quick(5));
    CHECK(a.value == b.value);
    CHECK(a.level_means == b.level_means);
  }

  TEST_CASE("formula estimator on the regular tree is log m") {
    auto r = dim_formula_estimator(preset("regular-m3-lambda1"), 6, 3, 10, 2, quick(1));
    CHECK(r.estimate == doctest::Approx(std::log(3.0)).epsilon(1e-12));
    CHECK(r.method == "kappa_formula");
  }

  TEST_CASE("regeneration height on the binary tree") {
    auto law = preset("binary-simple");
    auto r = mean_regen_height(law, 4000, quick(7, 2));
    CHECK(std::abs(r.acceptance_rate - 0.5) < 3.0 * r.acceptance_se);
    CHECK(std::abs(r.record_height.mean - 2.0) < 3.0 * r.record_height.se);
    for (const auto& rec : r.records) {
      if (rec.dropped) continue;
      CHECK(rec.values.at("height") >= 1.0);
      CHECK(rec.values.at("record_height") >= rec.values.at("height"));
    }
  }

  TEST_CASE("first-level renewal on the binary tree") {
    const double oracle = binary_first_level_renewal();
    CHECK(oracle == doctest::Approx(0.8));
    auto r = renewal_probe(preset("binary-simple"), {1}, 6000, quick(9, 2));
    REQUIRE(r.points.size() == 1);
    CHECK(std::abs(r.points[0].probability - oracle) < 3.0 * r.points[0].std_error);
    // Depth records: reaching level 1 before the root's parent, beta_1 = 2/3.
    CHECK(std::abs(r.points[0].record_probability - 2.0 / 3.0) < 3.0 * r.points[0].record_std_error);
  }

  TEST_CASE("results do not depend on the worker count") {
    auto law = preset("gw12-simple");
    auto a = mean_regen_height(law, 64, quick(3, 1));
    auto b = mean_regen_height(law, 64, quick(3, 4));
    REQUIRE(a.records.size() == b.records.size());
    for (std::size_t i = 0; i < a.records.size(); ++i) CHECK(a.records[i].values == b.records[i].values);
    CHECK(a.height.mean == b.height.mean);
    auto fa = dim_formula_estimator(law, 6, 4, 8, 2, quick(3, 1));
    auto fb = dim_formula_estimator(law, 6, 4, 8, 2, quick(3, 3));
    CHECK(fa.estimate == fb.estimate);
  }

  TEST_CASE("slabs and Shannon gap") {
    auto law = preset("gw12-simple");
    auto s = slab_iid(law, 6, 100, quick(4, 2));
    CHECK(s.total == s.first_half.size() + s.second_half.size());
    for (const auto& x : s.first_half) {
      CHECK(x.height >= 1);
      CHECK(x.duration >= x.height);
    }
    auto g = shannon_gap(law, 300, 10, 8, quick(4, 2));
    CHECK(g.negative == 0);
    CHECK(g.min_gap >= -1e-12);
    auto reg = shannon_gap(preset("regular-m2-lambda1"), 20, 10, 8, quick(4));
    CHECK(reg.gap.mean == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(reg.entropy.mean == doctest::Approx(std::log(2.0)));
  }
}
