#include "gwharm/environment.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <random>
#include <sstream>
#include <stdexcept>

#include "gwharm/rng.hpp"

namespace gwharm {

namespace {

void require_positive(double v, const char* what) {
  if (!(v > 0.0) || !std::isfinite(v)) {
    throw std::invalid_argument(std::string("environment law: ") + what +
                                " must be positive and finite");
  }
}

void validate_weights(const WeightFamily& w) {
  std::visit(
      [](const auto& f) {
        using F = std::decay_t<decltype(f)>;
        if constexpr (std::is_same_v<F, ConstantWeight>) {
          require_positive(f.value, "constant weight");
        } else if constexpr (std::is_same_v<F, TwoPointWeight>) {
          require_positive(f.a, "two-point weight a");
          require_positive(f.b, "two-point weight b");
          if (!(f.q >= 0.0 && f.q <= 1.0)) {
            throw std::invalid_argument("environment law: two-point q must lie in [0, 1]");
          }
        } else {
          if (!std::isfinite(f.mu)) throw std::invalid_argument("environment law: mu not finite");
          require_positive(f.sigma, "lognormal sigma");
        }
      },
      w);
}

double parse_number(std::string_view s, std::string_view name) {
  double v = 0.0;
  const auto* first = s.data();
  const auto* last = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc{} || ptr != last) {
    throw std::invalid_argument("preset '" + std::string(name) + "': bad number '" +
                                std::string(s) + "'");
  }
  return v;
}

std::vector<double> split_numbers(std::string_view s, std::string_view name) {
  std::vector<double> out;
  if (!s.empty() && s.front() == '{' && s.back() == '}') s = s.substr(1, s.size() - 2);
  std::size_t start = 0;
  while (start <= s.size()) {
    std::size_t comma = s.find(',', start);
    if (comma == std::string_view::npos) comma = s.size();
    out.push_back(parse_number(s.substr(start, comma - start), name));
    start = comma + 1;
  }
  return out;
}

const std::vector<double> kGw12{0.0, 0.5, 0.5};

}  // namespace

EnvironmentLaw::EnvironmentLaw(std::vector<double> pmf, WeightFamily weights, std::string tag)
    : pmf_(std::move(pmf)), weights_(weights), tag_(std::move(tag)) {
  if (pmf_.size() < 2) {
    throw std::invalid_argument("environment law: offspring pmf needs at least P(N=1)");
  }
  double total = 0.0;
  for (double p : pmf_) {
    if (!(p >= 0.0) || !std::isfinite(p)) {
      throw std::invalid_argument("environment law: offspring masses must be non-negative");
    }
    total += p;
  }
  if (std::abs(total - 1.0) > 1e-9) {
    throw std::invalid_argument("environment law: offspring masses must sum to 1");
  }
  if (pmf_[0] > 0.0) {
    throw std::invalid_argument("environment law: p0 > 0 (trees must have no leaves)");
  }
  if (pmf_[1] >= 1.0) {
    throw std::invalid_argument("environment law: p1 = 1 (tree would be a single ray)");
  }
  while (pmf_.back() == 0.0) pmf_.pop_back();
  validate_weights(weights_);

  cdf_.resize(pmf_.size());
  double acc = 0.0;
  for (std::size_t k = 0; k < pmf_.size(); ++k) {
    acc += pmf_[k] / total;
    cdf_[k] = acc;
    mean_ += static_cast<double>(k) * pmf_[k] / total;
  }
  cdf_.back() = 1.0;

  const bool single_count =
      std::count_if(pmf_.begin(), pmf_.end(), [](double p) { return p > 0.0; }) == 1;
  degenerate_ = single_count && std::holds_alternative<ConstantWeight>(weights_);
}

int EnvironmentLaw::draw(std::uint64_t key, std::vector<double>& out) const {
  KeyStream stream(key);
  const int n = sample_count(stream.uniform());
  out.resize(static_cast<std::size_t>(n));
  std::visit(
      [&](const auto& f) {
        using F = std::decay_t<decltype(f)>;
        if constexpr (std::is_same_v<F, ConstantWeight>) {
          std::fill(out.begin(), out.end(), f.value);
        } else if constexpr (std::is_same_v<F, TwoPointWeight>) {
          for (auto& w : out) w = stream.uniform() < f.q ? f.a : f.b;
        } else if constexpr (std::is_same_v<F, LogNormalWeight>) {
          std::lognormal_distribution<double> dist(f.mu, f.sigma);
          for (auto& w : out) w = dist(stream);
        } else {
          std::lognormal_distribution<double> dist(f.mu, f.sigma);
          std::fill(out.begin(), out.end(), dist(stream));
        }
      },
      weights_);
  return n;
}

std::string EnvironmentLaw::describe() const {
  std::ostringstream os;
  os << (tag_.empty() ? "custom" : tag_) << ": p=(";
  for (std::size_t k = 1; k < pmf_.size(); ++k) os << (k > 1 ? "," : "") << pmf_[k];
  os << "), m=" << mean_ << ", weights=";
  std::visit(
      [&](const auto& f) {
        using F = std::decay_t<decltype(f)>;
        if constexpr (std::is_same_v<F, ConstantWeight>) {
          os << "constant(" << f.value << ")";
        } else if constexpr (std::is_same_v<F, TwoPointWeight>) {
          os << "twopoint(" << f.a << "," << f.b << "," << f.q << ")";
        } else if constexpr (std::is_same_v<F, LogNormalWeight>) {
          os << "lognormal(" << f.mu << "," << f.sigma << ")";
        } else {
          os << "family-lognormal(" << f.mu << "," << f.sigma << ")";
        }
      },
      weights_);
  return os.str();
}

EnvironmentLaw preset(std::string_view name) {
  const std::string tag(name);
  if (name == "binary-simple") return EnvironmentLaw({0.0, 0.0, 1.0}, ConstantWeight{1.0}, tag);
  if (name == "gw12-simple") return EnvironmentLaw(kGw12, ConstantWeight{1.0}, tag);

  constexpr std::string_view regular = "regular-m";
  if (name.starts_with(regular)) {
    const auto rest = name.substr(regular.size());
    const auto sep = rest.find("-lambda");
    if (sep == std::string_view::npos) {
      throw std::invalid_argument("preset '" + tag + "': expected regular-m{M}-lambda{L}");
    }
    const double m = parse_number(rest.substr(0, sep), name);
    const double lambda = parse_number(rest.substr(sep + 7), name);
    if (m < 2 || m != std::floor(m) || m > 64) {
      throw std::invalid_argument("preset '" + tag + "': M must be an integer in [2, 64]");
    }
    std::vector<double> pmf(static_cast<std::size_t>(m) + 1, 0.0);
    pmf.back() = 1.0;
    require_positive(lambda, "lambda");
    return EnvironmentLaw(std::move(pmf), ConstantWeight{1.0 / lambda}, tag);
  }

  constexpr std::string_view lognormal = "gw12-lognormal";
  if (name.starts_with(lognormal)) {
    const auto p = split_numbers(name.substr(lognormal.size()), name);
    if (p.size() != 1) throw std::invalid_argument("preset '" + tag + "': expected one sigma");
    return EnvironmentLaw(kGw12, LogNormalWeight{0.0, p[0]}, tag);
  }
  constexpr std::string_view family = "gw12-family";
  if (name.starts_with(family)) {
    const auto p = split_numbers(name.substr(family.size()), name);
    if (p.size() != 1) throw std::invalid_argument("preset '" + tag + "': expected one sigma");
    return EnvironmentLaw(kGw12, FamilyFactorWeight{0.0, p[0]}, tag);
  }
  constexpr std::string_view twopoint = "gw12-twopoint";
  if (name.starts_with(twopoint)) {
    const auto p = split_numbers(name.substr(twopoint.size()), name);
    if (p.size() != 3) throw std::invalid_argument("preset '" + tag + "': expected a,b,q");
    return EnvironmentLaw(kGw12, TwoPointWeight{p[0], p[1], p[2]}, tag);
  }
  throw std::invalid_argument("unknown preset '" + tag + "'");
}

std::vector<std::string> preset_examples() {
  return {"regular-m2-lambda1", "regular-m3-lambda0.5", "binary-simple", "gw12-simple",
          "gw12-lognormal0.5", "gw12-twopoint0.5,2,0.5", "gw12-family0.5"};
}

}  // namespace gwharm
