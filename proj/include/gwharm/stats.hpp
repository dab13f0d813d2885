#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace gwharm {

struct MeanSE {
  double mean = 0.0;
  double sd = 0.0;
  double se = 0.0;
  std::size_t n = 0;
};

/// Sample mean, sample standard deviation and standard error, summed in the
/// given order so results do not depend on how the values were produced.
MeanSE mean_se(std::span<const double> x);

struct RatioEstimate {
  double ratio = 0.0;
  double se = 0.0;
};

/// mean(num) / mean(den) with the delta-method standard error (paired samples).
RatioEstimate ratio_of_means(std::span<const double> num, std::span<const double> den);

/// a*b for independent estimates with first-order error propagation.
RatioEstimate product_of(const MeanSE& a, const MeanSE& b);

struct KsResult {
  double statistic = 0.0;
  double p_value = 1.0;
  std::size_t n1 = 0;
  std::size_t n2 = 0;
};

/// Kolmogorov limiting survival function Q(x) = 2 sum (-1)^{k-1} exp(-2 k^2 x^2).
double kolmogorov_survival(double x);

/// Two-sample Kolmogorov-Smirnov test, asymptotic p-value with the usual
/// finite-sample correction. Conservative for discrete data.
KsResult ks_two_sample(std::vector<double> a, std::vector<double> b);

struct ChiSquareResult {
  double statistic = 0.0;
  int dof = 0;
  double p_value = 1.0;
};

/// Goodness of fit of observed counts to probabilities. Cells with expected
/// count below `min_expected` are merged into their right neighbour.
ChiSquareResult chi_square_gof(std::span<const std::uint64_t> observed,
                               std::span<const double> probabilities, double min_expected = 5.0);

/// Homogeneity of two count vectors over the same cells.
ChiSquareResult chi_square_two_sample(std::span<const std::uint64_t> a,
                                      std::span<const std::uint64_t> b,
                                      double min_expected = 5.0);

struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
  double slope_se = 0.0;
};

LineFit least_squares(std::span<const double> x, std::span<const double> y);

}  // namespace gwharm
