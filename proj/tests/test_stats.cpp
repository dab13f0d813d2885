#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "gwharm/stats.hpp"

using namespace gwharm;

TEST_SUITE("stats") {
  TEST_CASE("mean and standard error") {
    const std::vector<double> x{1, 2, 3, 4};
    auto r = mean_se(x);
    CHECK(r.mean == doctest::Approx(2.5));
    CHECK(r.sd == doctest::Approx(std::sqrt(5.0 / 3.0)));
    CHECK(r.se == doctest::Approx(std::sqrt(5.0 / 3.0) / 2.0));
    CHECK(r.n == 4);
  }

  TEST_CASE("ratio of means") {
    const std::vector<double> num{2, 4, 6}, den{1, 2, 3};
    auto r = ratio_of_means(num, den);
    CHECK(r.ratio == doctest::Approx(2.0));
    CHECK(r.se == doctest::Approx(0.0).epsilon(1e-12));
    // Scaling the denominator scales the ratio.
    const std::vector<double> num2{1, 3, 2, 5}, den2{1, 2, 2, 4}, den3{3, 6, 6, 12};
    CHECK(ratio_of_means(num2, den3).ratio ==
          doctest::Approx(ratio_of_means(num2, den2).ratio / 3.0));
    CHECK(ratio_of_means(num2, den3).se == doctest::Approx(ratio_of_means(num2, den2).se / 3.0));
  }

  TEST_CASE("product of independent estimates") {
    MeanSE a{2.0, 0, 0.1, 10}, b{3.0, 0, 0.2, 10};
    auto p = product_of(a, b);
    CHECK(p.ratio == doctest::Approx(6.0));
    CHECK(p.se == doctest::Approx(std::hypot(3.0 * 0.1, 2.0 * 0.2)));
  }

  TEST_CASE("Kolmogorov distribution") {
    CHECK(kolmogorov_survival(0.0) == doctest::Approx(1.0));
    CHECK(kolmogorov_survival(1.0) == doctest::Approx(0.26999967).epsilon(1e-6));
    CHECK(kolmogorov_survival(1.358) == doctest::Approx(0.05).epsilon(1e-3));
    CHECK(kolmogorov_survival(5.0) < 1e-20);
  }

  TEST_CASE("two-sample KS") {
    std::mt19937_64 rng(1);
    std::normal_distribution<double> n01;
    std::vector<double> a, b, c;
    for (int i = 0; i < 2000; ++i) {
      a.push_back(n01(rng));
      b.push_back(n01(rng));
      c.push_back(n01(rng) + 0.3);
    }
    CHECK(ks_two_sample(a, a).statistic == 0.0);
    CHECK(ks_two_sample(a, a).p_value == doctest::Approx(1.0));
    CHECK(ks_two_sample(a, b).p_value > 0.01);
    CHECK(ks_two_sample(a, c).p_value < 1e-6);
  }

  TEST_CASE("chi-square goodness of fit") {
    const std::uint64_t fair[] = {100, 100, 100, 100, 100, 100};
    const double p[] = {1.0 / 6, 1.0 / 6, 1.0 / 6, 1.0 / 6, 1.0 / 6, 1.0 / 6};
    auto r = chi_square_gof(fair, p);
    CHECK(r.statistic == doctest::Approx(0.0));
    CHECK(r.dof == 5);
    CHECK(r.p_value == doctest::Approx(1.0));
    const std::uint64_t loaded[] = {200, 80, 80, 80, 80, 80};
    CHECK(chi_square_gof(loaded, p).p_value < 1e-6);
    const std::uint64_t a[] = {50, 50}, b[] = {50, 50};
    CHECK(chi_square_two_sample(a, b).p_value == doctest::Approx(1.0));
  }

  TEST_CASE("least squares recovers an exact line") {
    const std::vector<double> x{0, 1, 2, 3}, y{1, 3, 5, 7};
    auto f = least_squares(x, y);
    CHECK(f.slope == doctest::Approx(2.0));
    CHECK(f.intercept == doctest::Approx(1.0));
    CHECK(f.slope_se == doctest::Approx(0.0).epsilon(1e-12));
  }
}
