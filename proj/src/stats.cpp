#include "gwharm/stats.hpp"

#include <algorithm>
#include <boost/math/distributions/chi_squared.hpp>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace gwharm {

MeanSE mean_se(std::span<const double> x) {
  MeanSE r;
  r.n = x.size();
  if (x.empty()) {
    r.mean = std::numeric_limits<double>::quiet_NaN();
    return r;
  }
  double sum = 0.0;
  for (double v : x) sum += v;
  r.mean = sum / static_cast<double>(r.n);
  if (r.n > 1) {
    double ss = 0.0;
    for (double v : x) ss += (v - r.mean) * (v - r.mean);
    r.sd = std::sqrt(ss / static_cast<double>(r.n - 1));
    r.se = r.sd / std::sqrt(static_cast<double>(r.n));
  }
  return r;
}

RatioEstimate ratio_of_means(std::span<const double> num, std::span<const double> den) {
  if (num.size() != den.size() || num.size() < 2) {
    throw std::invalid_argument("ratio_of_means: need two paired samples of size >= 2");
  }
  const MeanSE a = mean_se(num);
  const MeanSE b = mean_se(den);
  double cov = 0.0;
  for (std::size_t i = 0; i < num.size(); ++i) cov += (num[i] - a.mean) * (den[i] - b.mean);
  cov /= static_cast<double>(num.size() - 1);
  RatioEstimate r;
  r.ratio = a.mean / b.mean;
  const double var = (a.sd * a.sd - 2.0 * r.ratio * cov + r.ratio * r.ratio * b.sd * b.sd) /
                     (b.mean * b.mean * static_cast<double>(num.size()));
  r.se = std::sqrt(std::max(var, 0.0));
  return r;
}

RatioEstimate product_of(const MeanSE& a, const MeanSE& b) {
  return {a.mean * b.mean, std::hypot(a.se * b.mean, a.mean * b.se)};
}

double kolmogorov_survival(double x) {
  if (x <= 0.0) return 1.0;
  if (x < 0.2) return 1.0;  // the series needs many terms here and Q is 1 to double precision
  double sum = 0.0;
  for (int k = 1; k <= 100; ++k) {
    const double term = std::exp(-2.0 * k * k * x * x);
    sum += (k % 2 == 1 ? term : -term);
    if (term < 1e-17) break;
  }
  return std::clamp(2.0 * sum, 0.0, 1.0);
}

KsResult ks_two_sample(std::vector<double> a, std::vector<double> b) {
  if (a.empty() || b.empty()) throw std::invalid_argument("ks_two_sample: empty sample");
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const double n1 = static_cast<double>(a.size());
  const double n2 = static_cast<double>(b.size());
  std::size_t i = 0, j = 0;
  double d = 0.0;
  while (i < a.size() && j < b.size()) {
    const double x = std::min(a[i], b[j]);
    while (i < a.size() && a[i] == x) ++i;
    while (j < b.size() && b[j] == x) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / n1 - static_cast<double>(j) / n2));
  }
  KsResult r;
  r.statistic = d;
  r.n1 = a.size();
  r.n2 = b.size();
  const double ne = std::sqrt(n1 * n2 / (n1 + n2));
  r.p_value = kolmogorov_survival((ne + 0.12 + 0.11 / ne) * d);
  return r;
}

namespace {

ChiSquareResult finish(double stat, int dof) {
  ChiSquareResult r;
  r.statistic = stat;
  r.dof = dof;
  if (dof > 0) {
    r.p_value = boost::math::cdf(boost::math::complement(boost::math::chi_squared(dof), stat));
  }
  return r;
}

}  // namespace

ChiSquareResult chi_square_gof(std::span<const std::uint64_t> observed,
                               std::span<const double> probabilities, double min_expected) {
  if (observed.size() != probabilities.size() || observed.empty()) {
    throw std::invalid_argument("chi_square_gof: size mismatch");
  }
  double total = 0.0;
  for (auto o : observed) total += static_cast<double>(o);
  std::vector<double> obs, exp;
  double o_acc = 0.0, e_acc = 0.0;
  for (std::size_t k = 0; k < observed.size(); ++k) {
    o_acc += static_cast<double>(observed[k]);
    e_acc += probabilities[k] * total;
    if (e_acc >= min_expected) {
      obs.push_back(o_acc);
      exp.push_back(e_acc);
      o_acc = e_acc = 0.0;
    }
  }
  if (e_acc > 0.0 || o_acc > 0.0) {
    if (exp.empty()) {
      obs.push_back(o_acc);
      exp.push_back(e_acc);
    } else {
      obs.back() += o_acc;
      exp.back() += e_acc;
    }
  }
  double stat = 0.0;
  for (std::size_t k = 0; k < obs.size(); ++k) {
    if (exp[k] > 0.0) stat += (obs[k] - exp[k]) * (obs[k] - exp[k]) / exp[k];
  }
  return finish(stat, static_cast<int>(obs.size()) - 1);
}

ChiSquareResult chi_square_two_sample(std::span<const std::uint64_t> a,
                                      std::span<const std::uint64_t> b, double min_expected) {
  if (a.size() != b.size() || a.empty()) {
    throw std::invalid_argument("chi_square_two_sample: size mismatch");
  }
  double na = 0.0, nb = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    na += static_cast<double>(a[k]);
    nb += static_cast<double>(b[k]);
  }
  const double n = na + nb;
  // Merge sparse cells so every expected count reaches min_expected.
  std::vector<std::pair<double, double>> cells;
  double ca = 0.0, cb = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    ca += static_cast<double>(a[k]);
    cb += static_cast<double>(b[k]);
    const double col = ca + cb;
    if (col * std::min(na, nb) / n >= min_expected) {
      cells.emplace_back(ca, cb);
      ca = cb = 0.0;
    }
  }
  if (ca + cb > 0.0) {
    if (cells.empty()) {
      cells.emplace_back(ca, cb);
    } else {
      cells.back().first += ca;
      cells.back().second += cb;
    }
  }
  double stat = 0.0;
  for (auto [x, y] : cells) {
    const double col = x + y;
    const double ea = col * na / n;
    const double eb = col * nb / n;
    if (ea > 0.0) stat += (x - ea) * (x - ea) / ea;
    if (eb > 0.0) stat += (y - eb) * (y - eb) / eb;
  }
  return finish(stat, static_cast<int>(cells.size()) - 1);
}

LineFit least_squares(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 3) {
    throw std::invalid_argument("least_squares: need at least three points");
  }
  const double n = static_cast<double>(x.size());
  const MeanSE mx = mean_se(x);
  const MeanSE my = mean_se(y);
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx.mean) * (x[i] - mx.mean);
    sxy += (x[i] - mx.mean) * (y[i] - my.mean);
  }
  LineFit f;
  f.slope = sxy / sxx;
  f.intercept = my.mean - f.slope * mx.mean;
  double rss = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double r = y[i] - f.intercept - f.slope * x[i];
    rss += r * r;
  }
  f.slope_se = std::sqrt(rss / (n - 2.0) / sxx);
  return f;
}

}  // namespace gwharm
