#include "gwharm/dimension.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>

#include "gwharm/flow_rules.hpp"
#include "gwharm/parallel.hpp"
#include "gwharm/rng.hpp"
#include "gwharm/tree.hpp"
#include "gwharm/walk.hpp"

namespace gwharm {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// First confirmed regeneration time after time 0, if any.
std::optional<std::size_t> first_regen_after_start(const PathEvents& ev) {
  for (std::size_t k = 0; k < ev.regen_times.size(); ++k) {
    if (ev.regen_times[k] > 0) return k;
  }
  return std::nullopt;
}

std::vector<int> record_heights(const PathView& path, const PathEvents& ev) {
  std::vector<int> out;
  for (std::int64_t s : record_regeneration_times(path, ev)) out.push_back(path.depths[s]);
  return out;
}

// Keeps a conditioned walk going until its first depth-record regeneration
// after time 0 (hence also the first regeneration) is confirmed.
ContinueRule until_first_regen(int safety_margin) {
  return [safety_margin](const Walker& w) -> std::optional<int> {
    const PathView view = w.view();
    if (record_regeneration_times(view, regeneration_events(view, safety_margin)).size() > 1) {
      return std::nullopt;
    }
    return w.depth() + std::max(1, safety_margin / 4);
  };
}

std::vector<double> kept_values(const std::vector<ReplicaRecord>& records, const char* key) {
  std::vector<double> out;
  for (const auto& r : records) {
    if (!r.dropped) out.push_back(r.values.at(key));
  }
  return out;
}

std::size_t count_dropped(const std::vector<ReplicaRecord>& records) {
  return static_cast<std::size_t>(
      std::count_if(records.begin(), records.end(), [](const auto& r) { return r.dropped; }));
}

void check_drops(const std::vector<ReplicaRecord>& records, const EstimatorConfig& config,
                 const char* who) {
  const std::size_t dropped = count_dropped(records);
  if (!records.empty() &&
      static_cast<double>(dropped) > config.max_drop_fraction * static_cast<double>(records.size())) {
    throw ReplicaShortfall(std::string(who) + ": " + std::to_string(dropped) + " of " +
                           std::to_string(records.size()) +
                           " replicas dropped (censoring or horizon); raise --horizon");
  }
}

std::vector<ReplicaRecord> make_records(std::size_t n, std::uint64_t seed) {
  std::vector<ReplicaRecord> records(n);
  for (std::size_t i = 0; i < n; ++i) {
    records[i].index = i;
    records[i].seed = derive_seed(seed, kReplicaStream, i);
  }
  return records;
}

double golden_section(const EnvironmentLaw& law, double lo, double hi, double tol) {
  const double g = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = lo, b = hi;
  double c = b - g * (b - a), d = a + g * (b - a);
  double fc = psi(law, c), fd = psi(law, d);
  while (b - a > tol) {
    if (fc <= fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - g * (b - a);
      fc = psi(law, c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + g * (b - a);
      fd = psi(law, d);
    }
  }
  return (a + b) / 2.0;
}

}  // namespace

double psi(const EnvironmentLaw& law, double alpha) {
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw std::domain_error("psi: alpha must lie in [0, 1]");
  const double m = law.mean_offspring();
  return std::visit(
      [&](const auto& f) -> double {
        using F = std::decay_t<decltype(f)>;
        if constexpr (std::is_same_v<F, ConstantWeight>) {
          return m * std::pow(f.value, alpha);
        } else if constexpr (std::is_same_v<F, TwoPointWeight>) {
          return m * (f.q * std::pow(f.a, alpha) + (1.0 - f.q) * std::pow(f.b, alpha));
        } else {
          // lognormal moment; a shared family factor has the same marginal
          return m * std::exp(alpha * f.mu + 0.5 * alpha * alpha * f.sigma * f.sigma);
        }
      },
      law.weights());
}

MeanSE psi_monte_carlo(const EnvironmentLaw& law, double alpha, std::size_t draws,
                       std::uint64_t seed) {
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw std::domain_error("psi: alpha must lie in [0, 1]");
  std::vector<double> samples(draws);
  std::vector<double> w;
  for (std::size_t i = 0; i < draws; ++i) {
    law.draw(derive_seed(seed, kAuxStream, i), w);
    double s = 0.0;
    for (double a : w) s += std::pow(a, alpha);
    samples[i] = s;
  }
  return mean_se(samples);
}

CriterionReport transience_margin(const EnvironmentLaw& law) {
  CriterionReport r;
  constexpr int kGrid = 33;
  int best = 0;
  for (int k = 0; k < kGrid; ++k) {
    const double a = static_cast<double>(k) / (kGrid - 1);
    r.psi_values.emplace_back(a, psi(law, a));
    if (r.psi_values[k].second < r.psi_values[best].second) best = k;
  }
  const double lo = r.psi_values[std::max(best - 1, 0)].first;
  const double hi = r.psi_values[std::min(best + 1, kGrid - 1)].first;
  const double a = golden_section(law, lo, hi, 1e-6);
  const double v = psi(law, a);
  if (v < r.psi_values[best].second) {
    r.min_alpha = a;
    r.min_value = v;
  } else {
    r.min_alpha = r.psi_values[best].first;
    r.min_value = r.psi_values[best].second;
  }
  return r;
}

double boundary_dimension(const EnvironmentLaw& law) { return std::log(law.mean_offspring()); }

DimensionReport dim_ray_estimator(const EnvironmentLaw& law, std::size_t replicas, int n_ray,
                                  int D, const EstimatorConfig& config) {
  if (n_ray < 1) throw std::invalid_argument("dim_ray_estimator: n_ray must be >= 1");
  DimensionReport rep;
  rep.method = "ray_ergodic";
  rep.n_ray = n_ray;
  rep.depth_D = D;
  rep.records = make_records(replicas, config.seed);

  parallel_for(replicas, config.workers, [&](std::size_t i) {
    ReplicaRecord& rec = rep.records[i];
    WalkConfig wc;
    wc.horizon = config.horizon;
    wc.seed = rec.seed;
    wc.max_depth = n_ray + config.safety_margin;
    wc.rejection_budget = config.rejection_budget;
    const WalkPath path = run_walk(law, wc);
    rec.values["steps"] = static_cast<double>(path.steps());
    rec.values["final_depth"] = path.depths.back();
    if (!path.truncated) {
      rec.dropped = true;
      rec.reason = "horizon";
      return;
    }
    const PathEvents ev = regeneration_events(path, config.safety_margin);
    std::vector<NodeId> ray;
    try {
      ray = ray_prefix(ev, static_cast<std::size_t>(n_ray) + 1);
    } catch (const RayShortfall& e) {
      rec.dropped = true;
      rec.reason = "censored";
      rec.values["exit_points"] = static_cast<double>(e.available);
      return;
    }
    const double log_mass = harm_log_mass_lazy(law, path.tree, ray, D, config.generic);
    rec.values["log_mass"] = log_mass;
    rec.values["value"] = -log_mass / n_ray;
  });

  check_drops(rep.records, config, "dim_ray_estimator");
  const std::vector<double> values = kept_values(rep.records, "value");
  const MeanSE m = mean_se(values);
  rep.estimate = m.mean;
  rep.std_error = m.se;
  rep.replicas = values.size();
  rep.diagnostics["replica_sd"] = m.sd;
  rep.diagnostics["dropped"] = static_cast<double>(count_dropped(rep.records));
  rep.diagnostics["log_m"] = boundary_dimension(law);
  rep.diagnostics["drop_vs_log_m"] = boundary_dimension(law) - m.mean;
  std::vector<double> steps;
  for (const auto& r : rep.records) steps.push_back(r.values.at("steps"));
  rep.diagnostics["mean_steps"] = mean_se(steps).mean;
  return rep;
}

KappaEstimate kappa_estimator(const EnvironmentLaw& law, std::uint64_t tree_key,
                              std::size_t aux_replicas, int depth_cap,
                              const EstimatorConfig& config) {
  if (aux_replicas < 2) throw std::invalid_argument("kappa_estimator: need >= 2 aux replicas");
  if (depth_cap < 0) throw std::invalid_argument("kappa_estimator: depth_cap must be >= 0");
  const int margin = config.safety_margin;
  std::vector<double> totals(aux_replicas, 0.0);
  std::vector<std::vector<double>> levels(aux_replicas, std::vector<double>(depth_cap + 1, 0.0));
  std::vector<std::size_t> censored(aux_replicas, 0), walks(aux_replicas, 0);

  parallel_for(aux_replicas, config.workers, [&](std::size_t a) {
    const std::uint64_t base = derive_seed(config.seed, kAuxStream, a);
    const WeightedTree aux = sample_tree(law, depth_cap, derive_seed(base, kTreeStream, 0));
    for (NodeId y = 0; y < aux.size(); ++y) {
      PrunedTree cut = prune(aux, y);
      const NodeId y_new = cut.cut;
      Walker w(law, glue(cut, WeightedTree(tree_key)), derive_seed(base, kWalkStream, y));
      ++walks[a];
      const int hy = aux.depth(y);
      int target = hy + 1 + margin;
      bool hit = false;
      for (;;) {
        const auto stop = w.run(config.horizon - w.steps(), target, true);
        if (stop == Walker::Stop::boundary) break;
        if (stop == Walker::Stop::horizon) {
          ++censored[a];
          break;
        }
        const PathEvents ev = regeneration_events(w.view(), margin);
        if (const auto k = first_regen_after_start(ev)) {
          hit = w.tree().is_strict_ancestor(y_new, ev.regen_points[*k]);
          break;
        }
        target += std::max(1, margin / 4);
      }
      if (hit) {
        totals[a] += 1.0;
        levels[a][hy] += 1.0;
      }
    }
  });

  KappaEstimate k;
  const MeanSE m = mean_se(totals);
  k.value = m.mean;
  k.std_error = m.se;
  k.level_means.assign(depth_cap + 1, 0.0);
  for (std::size_t a = 0; a < aux_replicas; ++a) {
    for (int l = 0; l <= depth_cap; ++l) k.level_means[l] += levels[a][l];
    k.censored += censored[a];
    k.walks += walks[a];
  }
  for (double& v : k.level_means) v /= static_cast<double>(aux_replicas);
  k.tail_estimate = kNaN;
  if (depth_cap >= 1 && k.level_means[depth_cap - 1] > 0.0) {
    const double r = k.level_means[depth_cap] / k.level_means[depth_cap - 1];
    if (r < 1.0) k.tail_estimate = k.level_means[depth_cap] * r / (1.0 - r);
  }
  return k;
}

DimensionReport dim_formula_estimator(const EnvironmentLaw& law, std::size_t tree_replicas,
                                      std::size_t aux_replicas, int D, int depth_cap,
                                      const EstimatorConfig& config) {
  DimensionReport rep;
  rep.method = "kappa_formula";
  rep.depth_D = D;
  rep.records = make_records(tree_replicas, config.seed);

  parallel_for(tree_replicas, config.workers, [&](std::size_t i) {
    ReplicaRecord& rec = rep.records[i];
    const std::uint64_t key = tree_root_key(derive_seed(rec.seed, kTreeStream, 0));
    const double h = shannon_entropy(harm_first_step_lazy(law, key, D, config.generic));
    EstimatorConfig inner = config;
    inner.seed = derive_seed(rec.seed, kAuxStream, 0);
    inner.workers = 1;
    const KappaEstimate k = kappa_estimator(law, key, aux_replicas, depth_cap, inner);
    rec.values["entropy"] = h;
    rec.values["kappa"] = k.value;
    rec.values["kappa_se"] = k.std_error;
    rec.values["kappa_tail"] = k.tail_estimate;
    rec.values["censored"] = static_cast<double>(k.censored);
    for (int l = 0; l <= depth_cap; ++l) rec.values["kappa_level_" + std::to_string(l)] = k.level_means[l];
  });

  std::vector<double> hk, kappa, entropy;
  double censored = 0.0, walks_tail = 0.0;
  std::size_t tails = 0;
  for (const auto& r : rep.records) {
    hk.push_back(r.values.at("entropy") * r.values.at("kappa"));
    kappa.push_back(r.values.at("kappa"));
    entropy.push_back(r.values.at("entropy"));
    censored += r.values.at("censored");
    if (std::isfinite(r.values.at("kappa_tail"))) {
      walks_tail += r.values.at("kappa_tail");
      ++tails;
    }
  }
  const RatioEstimate ratio = ratio_of_means(hk, kappa);
  rep.estimate = ratio.ratio;
  rep.std_error = ratio.se;
  rep.replicas = tree_replicas;
  const MeanSE km = mean_se(kappa);
  rep.diagnostics["kappa_mean"] = km.mean;
  rep.diagnostics["kappa_se"] = km.se;
  rep.diagnostics["entropy_mean"] = mean_se(entropy).mean;
  rep.diagnostics["censored_walks"] = censored;
  rep.diagnostics["kappa_tail_mean"] = tails ? walks_tail / static_cast<double>(tails) : kNaN;
  rep.diagnostics["aux_replicas"] = static_cast<double>(aux_replicas);
  rep.diagnostics["depth_cap"] = depth_cap;
  rep.diagnostics["log_m"] = boundary_dimension(law);
  for (int l = 0; l <= depth_cap; ++l) {
    const std::string key = "kappa_level_" + std::to_string(l);
    double s = 0.0;
    for (const auto& r : rep.records) s += r.values.at(key);
    rep.diagnostics[key] = s / static_cast<double>(tree_replicas);
  }
  return rep;
}

RegenHeightReport mean_regen_height(const EnvironmentLaw& law, std::size_t replicas,
                                    const EstimatorConfig& config) {
  RegenHeightReport rep;
  rep.records = make_records(replicas, config.seed);
  const ContinueRule more = until_first_regen(config.safety_margin);

  parallel_for(replicas, config.workers, [&](std::size_t i) {
    ReplicaRecord& rec = rep.records[i];
    WalkConfig wc;
    wc.horizon = config.horizon;
    wc.seed = rec.seed;
    wc.max_depth = 1 + config.safety_margin;
    wc.condition_nonreturn = true;
    wc.rejection_budget = config.rejection_budget;
    const WalkPath path = run_walk(law, wc, more);
    rec.values["rejected"] = static_cast<double>(path.rejected_count);
    rec.values["steps"] = static_cast<double>(path.steps());
    const PathEvents ev = regeneration_events(path, config.safety_margin);
    const auto k = first_regen_after_start(ev);
    const auto rh = record_heights(path, ev);
    if (!path.truncated || !k || rh.size() < 2) {
      rec.dropped = true;
      rec.reason = path.truncated ? "censored" : "horizon";
      return;
    }
    rec.values["height"] = ev.regen_heights[*k];
    rec.values["time"] = static_cast<double>(ev.regen_times[*k]);
    rec.values["record_height"] = rh[1];
  });

  check_drops(rep.records, config, "mean_regen_height");
  rep.dropped = count_dropped(rep.records);
  rep.height = mean_se(kept_values(rep.records, "height"));
  rep.record_height = mean_se(kept_values(rep.records, "record_height"));
  double attempts = 0.0;
  for (const auto& r : rep.records) attempts += 1.0 + r.values.at("rejected");
  const double n = static_cast<double>(replicas);
  rep.acceptance_rate = n / attempts;
  // attempts per replica are geometric: var(p_hat) ~ p^2 (1 - p) / n
  rep.acceptance_se = rep.acceptance_rate * std::sqrt((1.0 - rep.acceptance_rate) / n);
  return rep;
}

BetaMeanReport mean_beta(const EnvironmentLaw& law, std::size_t trees, double tol, int D_step,
                         int max_depth, const EstimatorConfig& config) {
  BetaMeanReport rep;
  rep.records = make_records(trees, config.seed);
  parallel_for(trees, config.workers, [&](std::size_t i) {
    ReplicaRecord& rec = rep.records[i];
    const std::uint64_t key = tree_root_key(derive_seed(rec.seed, kTreeStream, 0));
    try {
      const ConductanceEstimate est =
          beta_adaptive_lazy(law, key, tol, D_step, max_depth, config.generic);
      rec.values["beta"] = est.value;
      rec.values["depth"] = est.depth;
      rec.values["gap"] = est.cauchy_gap;
    } catch (const ConductanceBudgetExceeded& e) {
      rec.dropped = true;
      rec.reason = "depth budget";
      rec.values["last_beta"] = e.trace.back();
    }
  });
  check_drops(rep.records, config, "mean_beta");
  rep.beta = mean_se(kept_values(rep.records, "beta"));
  const auto depths = kept_values(rep.records, "depth");
  const auto gaps = kept_values(rep.records, "gap");
  rep.mean_depth = mean_se(depths).mean;
  for (double d : depths) rep.max_depth = std::max(rep.max_depth, static_cast<int>(d));
  for (double g : gaps) rep.max_gap = std::max(rep.max_gap, g);
  return rep;
}

RenewalReport renewal_probe(const EnvironmentLaw& law, const std::vector<int>& n_list,
                            std::size_t replicas, const EstimatorConfig& config) {
  if (n_list.empty()) throw std::invalid_argument("renewal_probe: empty n list");
  const int top = *std::max_element(n_list.begin(), n_list.end());
  RenewalReport rep;
  rep.records = make_records(replicas, config.seed);

  parallel_for(replicas, config.workers, [&](std::size_t i) {
    ReplicaRecord& rec = rep.records[i];
    WalkConfig wc;
    wc.horizon = config.horizon;
    wc.seed = rec.seed;
    wc.max_depth = top + config.safety_margin;
    wc.condition_nonreturn = true;
    wc.rejection_budget = config.rejection_budget;
    const WalkPath path = run_walk(law, wc);
    rec.values["rejected"] = static_cast<double>(path.rejected_count);
    if (!path.truncated) {
      rec.dropped = true;
      rec.reason = "horizon";
      return;
    }
    const PathEvents ev = regeneration_events(path, config.safety_margin);
    const auto rh = record_heights(path, ev);
    for (int n : n_list) {
      const bool hit =
          std::binary_search(ev.regen_heights.begin(), ev.regen_heights.end(), n);
      rec.values["hit_" + std::to_string(n)] = hit ? 1.0 : 0.0;
      rec.values["record_hit_" + std::to_string(n)] =
          std::binary_search(rh.begin(), rh.end(), n) ? 1.0 : 0.0;
    }
  });

  check_drops(rep.records, config, "renewal_probe");
  rep.dropped = count_dropped(rep.records);
  for (int n : n_list) {
    const std::string key = "hit_" + std::to_string(n);
    const auto hits = kept_values(rep.records, key.c_str());
    const MeanSE m = mean_se(hits);
    const auto record_hits = kept_values(rep.records, ("record_" + key).c_str());
    const MeanSE r = mean_se(record_hits);
    const auto n_used = static_cast<double>(m.n);
    rep.points.push_back({n, m.mean, std::sqrt(m.mean * (1.0 - m.mean) / n_used), r.mean,
                          std::sqrt(r.mean * (1.0 - r.mean) / n_used)});
  }
  return rep;
}

SlabReport slab_iid(const EnvironmentLaw& law, std::size_t replicas, int target_depth,
                    const EstimatorConfig& config) {
  SlabReport rep;
  rep.records = make_records(replicas, config.seed);
  std::vector<std::vector<Slab>> per(replicas);

  parallel_for(replicas, config.workers, [&](std::size_t i) {
    ReplicaRecord& rec = rep.records[i];
    WalkConfig wc;
    wc.horizon = config.horizon;
    wc.seed = rec.seed;
    wc.max_depth = target_depth + config.safety_margin;
    wc.condition_nonreturn = true;
    wc.rejection_budget = config.rejection_budget;
    const WalkPath path = run_walk(law, wc);
    if (!path.truncated) {
      rec.dropped = true;
      rec.reason = "horizon";
      return;
    }
    per[i] = slabs(regeneration_events(path, config.safety_margin));
    rec.values["slabs"] = static_cast<double>(per[i].size());
    rec.values["rejected"] = static_cast<double>(path.rejected_count);
  });

  check_drops(rep.records, config, "slab_iid");
  std::vector<double> h1, h2, t1, t2;
  for (const auto& s : per) {
    const std::size_t half = s.size() / 2;
    for (std::size_t k = 0; k < s.size(); ++k) {
      auto& dst = k < half ? rep.first_half : rep.second_half;
      dst.push_back(s[k]);
      (k < half ? h1 : h2).push_back(s[k].height);
      (k < half ? t1 : t2).push_back(static_cast<double>(s[k].duration));
    }
  }
  rep.total = rep.first_half.size() + rep.second_half.size();
  if (h1.empty() || h2.empty()) throw ReplicaShortfall("slab_iid: not enough confirmed slabs");
  rep.height_test = ks_two_sample(h1, h2);
  rep.duration_test = ks_two_sample(t1, t2);
  return rep;
}

ShannonReport shannon_gap(const EnvironmentLaw& law, std::size_t trees, int D, int W_depth,
                          const EstimatorConfig& config) {
  ShannonReport rep;
  rep.records = make_records(trees, config.seed);
  parallel_for(trees, config.workers, [&](std::size_t i) {
    ReplicaRecord& rec = rep.records[i];
    const std::uint64_t key = tree_root_key(derive_seed(rec.seed, kTreeStream, 0));
    const EntropyPair e = entropy_compare_lazy(law, key, D, W_depth, config.generic);
    rec.values["entropy"] = e.entropy;
    rec.values["cross_entropy"] = e.cross_entropy;
    rec.values["gap"] = e.gap();
  });
  const auto gaps = kept_values(rep.records, "gap");
  rep.gap = mean_se(gaps);
  rep.entropy = mean_se(kept_values(rep.records, "entropy"));
  rep.min_gap = *std::min_element(gaps.begin(), gaps.end());
  rep.negative = static_cast<std::size_t>(
      std::count_if(gaps.begin(), gaps.end(), [](double g) { return g < -1e-12; }));
  return rep;
}

}  // namespace gwharm
