#include "gwharm/conductance.hpp"

#include <Eigen/SparseCore>
#include <Eigen/SparseLU>
#include <algorithm>
#include <cmath>
#include <unordered_map>

#include "gwharm/rng.hpp"

namespace gwharm {

namespace {

void require_depth(int D, const char* who) {
  if (D < 0) throw std::invalid_argument(std::string(who) + ": truncation depth must be >= 0");
}

void fold(std::vector<double>& p, const std::vector<double>& acc) {
  p[0] = 1.0;
  for (std::size_t d = 1; d < p.size(); ++d) p[d] = acc[d] / (1.0 + acc[d]);
}

// Profile of a degenerate law: every vertex sees the same subtree.
std::vector<double> symmetric_profile(const EnvironmentLaw& law, int D) {
  const double mw = law.max_offspring() * std::get<ConstantWeight>(law.weights()).value;
  std::vector<double> p(static_cast<std::size_t>(D) + 1, 1.0);
  for (int d = 1; d <= D; ++d) p[d] = mw * p[d - 1] / (1.0 + mw * p[d - 1]);
  return p;
}

void strict_profile(const WeightedTree& t, NodeId v, int r, std::vector<double>& out) {
  out.assign(static_cast<std::size_t>(r) + 1, 1.0);
  if (r == 0) return;
  if (!t.expanded(v)) {
    throw NotRealizedError("conductance: tree not realized " + std::to_string(r) +
                           " levels below vertex " + std::to_string(v) + "; extend first");
  }
  std::vector<double> acc(out.size(), 0.0);
  std::vector<double> child;
  for (NodeId c : t.children(v)) {
    strict_profile(t, c, r - 1, child);
    const double w = t.weight(c);
    for (int d = 1; d <= r; ++d) acc[d] += w * child[d - 1];
  }
  fold(out, acc);
}

// Regenerates the tree below a key level by level into flat arrays, then
// evaluates truncated conductances bottom-up. Laws with constant weights and
// few children take a path with no data-dependent branches: every vertex
// writes the maximal number of child keys and the cursor advances by its
// actual count.
class LevelSweep {
 public:
  explicit LevelSweep(const EnvironmentLaw& law)
      : law_(law),
        constant_(std::get_if<ConstantWeight>(&law.weights())),
        width_(law.max_offspring()),
        fixed_(constant_ != nullptr && width_ <= kMaxFixed) {}

  void grow(std::uint64_t key, int D) {
    depth_ = D;
    if (keys_.size() < static_cast<std::size_t>(D) + 1) {
      keys_.resize(D + 1);
      first_.resize(D + 1);
      weights_.resize(D + 1);
    }
    sizes_.assign(D + 1, 0);
    sizes_[0] = 1;
    keys_[0].assign(1, key);
    for (int l = 0; l < D; ++l) {
      // The deepest level only needs its size, not its keys.
      const bool last = l + 1 == D;
      const auto& k = keys_[l];
      auto& first = first_[l];
      auto& next = keys_[l + 1];
      first.resize(k.size() + 1);
      first[0] = 0;
      if (fixed_) {
        for (std::size_t j = 0; j < k.size(); ++j) {
          first[j + 1] = first[j] + static_cast<std::uint32_t>(law_.draw_count(k[j]));
        }
        if (!last) {
          next.resize(first.back() + width_);
          for (std::size_t j = 0; j < k.size(); ++j) {
            std::uint64_t* out = next.data() + first[j];
            for (int i = 0; i < width_; ++i) out[i] = child_key(k[j], i);
          }
          next.resize(first.back());
        }
      } else {
        next.clear();
        auto& w = weights_[l + 1];
        w.clear();
        for (std::size_t j = 0; j < k.size(); ++j) {
          const int n = law_.draw(k[j], scratch_);
          for (int i = 0; i < n; ++i) {
            if (!last) next.push_back(child_key(k[j], i));
            w.push_back(scratch_[i]);
          }
          first[j + 1] = static_cast<std::uint32_t>(w.size());
        }
      }
      sizes_[l + 1] = first.back();
    }
  }

  // beta_d of the grown root, d <= D.
  double beta(int d) {
    val_.assign(sizes_[d] + width_, 1.0);
    for (int l = d - 1; l >= 0; --l) {
      const auto& first = first_[l];
      const std::size_t n = sizes_[l];
      up_.resize(n + width_);
      if (fixed_) {
        const double c = constant_->value;
        for (std::size_t j = 0; j < n; ++j) {
          const std::uint32_t a = first[j];
          const std::uint32_t len = first[j + 1] - a;
          double s = 0.0;
          for (std::uint32_t i = 0; i < static_cast<std::uint32_t>(width_); ++i) {
            s += val_[a + i] * static_cast<double>(i < len);
          }
          up_[j] = s * c;
        }
        // Separate loop so the divisions vectorize.
        for (std::size_t j = 0; j < n; ++j) up_[j] = up_[j] / (1.0 + up_[j]);
      } else {
        const auto& w = weights_[l + 1];
        for (std::size_t j = 0; j < n; ++j) {
          double s = 0.0;
          for (std::uint32_t i = first[j]; i < first[j + 1]; ++i) {
            s += w[i] * val_[i];
          }
          up_[j] = s / (1.0 + s);
        }
      }
      std::fill(up_.begin() + static_cast<std::ptrdiff_t>(n), up_.end(), 0.0);
      std::swap(val_, up_);
    }
    return val_[0];
  }

  std::vector<double> profile() {
    std::vector<double> p(static_cast<std::size_t>(depth_) + 1, 1.0);
    for (int d = 1; d <= depth_; ++d) p[d] = beta(d);
    return p;
  }

 private:
  static constexpr int kMaxFixed = 4;

  const EnvironmentLaw& law_;
  const ConstantWeight* constant_;
  int width_;
  bool fixed_;
  int depth_ = 0;
  std::vector<std::vector<std::uint64_t>> keys_;
  std::vector<std::vector<std::uint32_t>> first_;
  std::vector<std::vector<double>> weights_;
  std::vector<std::size_t> sizes_;
  std::vector<double> scratch_, val_, up_;
};

void check_chain(const WeightedTree& tree, std::span<const NodeId> ray) {
  if (ray.empty() || ray[0] != tree.root()) {
    throw TreeUsageError("harm_log_mass: ray must start at the root");
  }
  for (std::size_t k = 1; k < ray.size(); ++k) {
    if (!tree.contains(ray[k]) || tree.parent(ray[k]) != ray[k - 1]) {
      throw TreeUsageError("harm_log_mass: ray is not a parent/child chain");
    }
  }
}

// Walks the ray upwards carrying the profile of t[xi_k]; off-ray children get
// their profiles from `profile_of`.
template <class ProfileOf>
double log_mass_bottom_up(const WeightedTree& tree, std::span<const NodeId> ray, int D,
                          std::vector<double> p, ProfileOf&& profile_of) {
  double log_mass = 0.0;
  std::vector<double> acc(p.size());
  std::vector<double> other;
  for (std::size_t k = ray.size() - 1; k-- > 0;) {
    const NodeId v = ray[k];
    if (!tree.expanded(v)) throw NotRealizedError("harm_log_mass: ray vertex not expanded");
    std::fill(acc.begin(), acc.end(), 0.0);
    double num = 0.0;
    double den = 0.0;
    for (NodeId c : tree.children(v)) {
      const bool on_ray = c == ray[k + 1];
      if (!on_ray) profile_of(c, other);
      const auto& pc = on_ray ? p : other;
      const double w = tree.weight(c);
      den += w * pc[D];
      if (on_ray) num = w * pc[D];
      for (int d = 1; d <= D; ++d) acc[d] += w * pc[d - 1];
    }
    if (tree.child_count(v) > 1) log_mass += std::log(num / den);
    fold(p, acc);
  }
  return log_mass;
}

double gap_at(const std::vector<double>& p, int D, int step) {
  return D >= step ? p[D - step] - p[D] : 0.0;
}

template <class ProfileAt>
ConductanceEstimate adaptive(double tol, int D_step, int max_depth, ProfileAt&& profile_at) {
  if (!(tol > 0.0)) throw std::invalid_argument("beta_adaptive: tol must be positive");
  if (D_step < 1) throw std::invalid_argument("beta_adaptive: D_step must be >= 1");
  ConductanceEstimate est;
  est.trace.push_back(1.0);
  for (int D = D_step;; D += D_step) {
    if (D > max_depth) throw ConductanceBudgetExceeded(est.trace, D_step);
    const std::vector<double> p = profile_at(D);
    for (int d = 1; d <= D; ++d) {
      if (p[d] > p[d - 1] + 1e-12) {
        throw std::logic_error("beta_adaptive: truncated conductance increased with depth");
      }
    }
    est.trace.push_back(p[D]);
    est.value = p[D];
    est.depth = D;
    est.cauchy_gap = p[D - D_step] - p[D];
    if (est.cauchy_gap < tol) return est;
  }
}

}  // namespace

std::string to_string(ConductanceMethod m) {
  switch (m) {
    case ConductanceMethod::recursion: return "recursion";
    case ConductanceMethod::linear_solve: return "linear_solve";
    case ConductanceMethod::monte_carlo: return "monte_carlo";
  }
  return "unknown";
}

ConductanceBudgetExceeded::ConductanceBudgetExceeded(std::vector<double> trace_, int step)
    : std::runtime_error([&] {
        std::string msg = "beta_adaptive: depth budget exhausted; beta_d every " +
                          std::to_string(step) + " levels:";
        for (double b : trace_) msg += " " + std::to_string(b);
        return msg;
      }()),
      trace(std::move(trace_)) {}

std::vector<double> beta_profile(const WeightedTree& tree, NodeId v, int D) {
  require_depth(D, "beta_profile");
  std::vector<double> out;
  strict_profile(tree, v, D, out);
  return out;
}

ConductanceEstimate beta_truncated(const WeightedTree& tree, int D) {
  ConductanceEstimate est;
  est.trace = beta_profile(tree, tree.root(), D);
  est.value = est.trace[D];
  est.depth = D;
  est.cauchy_gap = gap_at(est.trace, D, kDefaultDepthStep);
  return est;
}

double beta_linear_oracle(const WeightedTree& tree, int D) {
  require_depth(D, "beta_linear_oracle");
  if (D == 0) return 1.0;
  std::unordered_map<NodeId, int> index;
  std::vector<NodeId> interior;
  for (NodeId v = 0; v < tree.size(); ++v) {
    if (tree.depth(v) < D) {
      if (!tree.expanded(v)) throw NotRealizedError("beta_linear_oracle: tree too shallow");
      index.emplace(v, static_cast<int>(interior.size()));
      interior.push_back(v);
    }
  }
  const int n = static_cast<int>(interior.size());
  std::vector<Eigen::Triplet<double>> entries;
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n);
  for (int row = 0; row < n; ++row) {
    const NodeId v = interior[row];
    const Node& node = tree.node(v);
    entries.emplace_back(row, row, 1.0 + node.child_weight_sum);
    if (node.parent != kParentOfRoot) entries.emplace_back(row, index.at(node.parent), -1.0);
    for (NodeId c : tree.children(v)) {
      if (tree.depth(c) < D) {
        entries.emplace_back(row, index.at(c), -tree.weight(c));
      } else {
        rhs[row] += tree.weight(c);
      }
    }
  }
  Eigen::SparseMatrix<double> a(n, n);
  a.setFromTriplets(entries.begin(), entries.end());
  Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
  lu.compute(a);
  if (lu.info() != Eigen::Success) throw std::runtime_error("beta_linear_oracle: factorization failed");
  const Eigen::VectorXd h = lu.solve(rhs);
  return h[index.at(tree.root())];
}

ConductanceEstimate beta_adaptive(WeightedTree& tree, const EnvironmentLaw& law, double tol,
                                  int D_step, int max_depth) {
  return adaptive(tol, D_step, max_depth, [&](int D) {
    extend_to_depth(tree, law, D);
    return beta_profile(tree, tree.root(), D);
  });
}

std::vector<double> harm_first_step(const WeightedTree& tree, int D, NodeId v) {
  require_depth(D, "harm_first_step");
  if (!tree.expanded(v)) throw NotRealizedError("harm_first_step: children not realized");
  std::vector<double> h;
  double total = 0.0;
  for (NodeId c : tree.children(v)) {
    h.push_back(tree.weight(c) * beta_profile(tree, c, D)[D]);
    total += h.back();
  }
  for (double& x : h) x /= total;
  return h;
}

double harm_log_mass(const WeightedTree& tree, std::span<const NodeId> ray, int D) {
  require_depth(D, "harm_log_mass");
  check_chain(tree, ray);
  return log_mass_bottom_up(tree, ray, D, beta_profile(tree, ray.back(), D),
                            [&](NodeId c, std::vector<double>& out) { strict_profile(tree, c, D, out); });
}

std::vector<double> beta_profile_lazy(const EnvironmentLaw& law, std::uint64_t key, int D,
                                      bool generic) {
  require_depth(D, "beta_profile_lazy");
  if (law.degenerate() && !generic) return symmetric_profile(law, D);
  LevelSweep sweep(law);
  sweep.grow(key, D);
  return sweep.profile();
}

double beta_truncated_lazy(const EnvironmentLaw& law, std::uint64_t key, int D, bool generic) {
  require_depth(D, "beta_truncated_lazy");
  if (law.degenerate() && !generic) return symmetric_profile(law, D)[D];
  LevelSweep sweep(law);
  sweep.grow(key, D);
  return sweep.beta(D);
}

ConductanceEstimate beta_adaptive_lazy(const EnvironmentLaw& law, std::uint64_t key, double tol,
                                       int D_step, int max_depth, bool generic) {
  if (law.degenerate() && !generic) {
    return adaptive(tol, D_step, max_depth, [&](int D) { return symmetric_profile(law, D); });
  }
  LevelSweep sweep(law);
  return adaptive(tol, D_step, max_depth, [&](int D) {
    sweep.grow(key, D);
    return sweep.profile();
  });
}

std::vector<double> harm_first_step_lazy(const EnvironmentLaw& law, std::uint64_t key, int D,
                                         bool generic) {
  require_depth(D, "harm_first_step_lazy");
  std::vector<double> w;
  const int n = law.draw(key, w);
  if (law.degenerate() && !generic) return std::vector<double>(n, 1.0 / n);
  LevelSweep sweep(law);
  double total = 0.0;
  for (int i = 0; i < n; ++i) {
    sweep.grow(child_key(key, i), D);
    w[i] *= sweep.beta(D);
    total += w[i];
  }
  for (double& x : w) x /= total;
  return w;
}

double harm_log_mass_lazy(const EnvironmentLaw& law, const WeightedTree& tree,
                          std::span<const NodeId> ray, int D, bool generic) {
  require_depth(D, "harm_log_mass_lazy");
  check_chain(tree, ray);
  if (law.degenerate() && !generic) {
    return -static_cast<double>(ray.size() - 1) * std::log(static_cast<double>(law.max_offspring()));
  }
  LevelSweep sweep(law);
  sweep.grow(tree.node(ray.back()).key, D);
  return log_mass_bottom_up(tree, ray, D, sweep.profile(),
                            [&](NodeId c, std::vector<double>& out) {
                              sweep.grow(tree.node(c).key, D);
                              out = sweep.profile();
                            });
}

}  // namespace gwharm
