#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "gwharm/rng.hpp"

namespace gwharm {

// Conditional laws of the child-weight vector A given N = k.

/// Every weight equals `value` (the lambda-biased walk uses 1/lambda).
struct ConstantWeight {
  double value = 1.0;
};

/// Weights i.i.d. lognormal(mu, sigma).
struct LogNormalWeight {
  double mu = 0.0;
  double sigma = 1.0;
};

/// Weights i.i.d.: `a` with probability q, `b` otherwise.
struct TwoPointWeight {
  double a = 1.0;
  double b = 1.0;
  double q = 0.5;
};

/// One lognormal(mu, sigma) factor drawn per vertex and shared by all siblings.
struct FamilyFactorWeight {
  double mu = 0.0;
  double sigma = 1.0;
};

using WeightFamily =
    std::variant<ConstantWeight, LogNormalWeight, TwoPointWeight, FamilyFactorWeight>;

/// Joint law of (N, A): offspring count and child weights of one vertex.
///
/// Draws are a pure function of a 64-bit stream key, which is what lets a tree
/// be regenerated lazily in any order.
class EnvironmentLaw {
 public:
  /// `pmf[k]` is P(N = k). Throws std::invalid_argument when p0 > 0, p1 = 1,
  /// the masses do not sum to one, or weight parameters are not positive.
  EnvironmentLaw(std::vector<double> pmf, WeightFamily weights, std::string tag = {});

  const std::vector<double>& pmf() const noexcept { return pmf_; }
  const WeightFamily& weights() const noexcept { return weights_; }
  const std::string& tag() const noexcept { return tag_; }

  double mean_offspring() const noexcept { return mean_; }
  int max_offspring() const noexcept { return static_cast<int>(pmf_.size()) - 1; }

  /// True when N is deterministic and all weights equal one constant: every
  /// subtree is then the same weighted tree.
  bool degenerate() const noexcept { return degenerate_; }

  /// Draws (N, A) for the vertex with stream key `key`; A is written to `out`.
  int draw(std::uint64_t key, std::vector<double>& out) const;

  /// Only N, consistent with draw().
  int draw_count(std::uint64_t key) const noexcept {
    KeyStream stream(key);
    return sample_count(stream.uniform());
  }

  /// Writes a one-line human description.
  std::string describe() const;

 private:
  // First k with cdf(k) > u; cdf_.back() is exactly 1. Counting the entries
  // <= u gives the same index without data-dependent branches.
  int sample_count(double u) const noexcept {
    const std::size_t last = cdf_.size() - 1;
    if (last > 16) {
      int k = 0;
      while (cdf_[k] <= u) ++k;
      return k;
    }
    int k = 0;
    for (std::size_t i = 0; i < last; ++i) k += cdf_[i] <= u;
    return k;
  }

  std::vector<double> pmf_;
  std::vector<double> cdf_;
  WeightFamily weights_;
  std::string tag_;
  double mean_ = 0.0;
  bool degenerate_ = false;
};

/// Named presets: "regular-m{M}-lambda{L}", "binary-simple", "gw12-simple",
/// "gw12-lognormal{sigma}", "gw12-twopoint{a},{b},{q}", "gw12-family{sigma}".
/// Throws std::invalid_argument on unknown names.
EnvironmentLaw preset(std::string_view name);

/// Names accepted by preset(), with example parameters.
std::vector<std::string> preset_examples();

}  // namespace gwharm
