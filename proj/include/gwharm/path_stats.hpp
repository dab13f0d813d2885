#pragma once

#include <cstdint>
#include <limits>
#include <stdexcept>
#include <utility>
#include <vector>

#include "gwharm/walk.hpp"

namespace gwharm {

inline constexpr std::int64_t kNeverHit = std::numeric_limits<std::int64_t>::max();
inline constexpr int kDefaultSafetyMargin = 20;

struct PathEvents {
  std::vector<std::int64_t> fresh_times;
  std::vector<std::int64_t> exit_times;    // includes provisional ones at or after censor_cutoff
  std::vector<NodeId> exit_points;         // confirmed; exit_points[k] has depth k
  std::vector<std::int64_t> regen_times;   // confirmed only
  std::vector<NodeId> regen_points;
  std::vector<int> regen_heights;
  std::int64_t censor_cutoff = 0;          // exit status of times >= cutoff is unconfirmed
  int confirmed_depth = -1;                // exits deeper than this are provisional
  int safety_margin = kDefaultSafetyMargin;
};

/// Times s with X_s not among X_0..X_{s-1}.
std::vector<std::int64_t> fresh_times(const PathView& path);

/// Exit times over the realized horizon by the future-minimum-depth rule
/// (min_{k>s} |X_k| >= |X_s|), plus the censoring cutoff: the first time whose
/// exit status could still be overturned, i.e. the first provisional exit time
/// deeper than final depth - safety_margin. Visits to the root's parent are
/// never exit times.
std::pair<std::vector<std::int64_t>, std::int64_t> exit_times(
    const PathView& path, int safety_margin = kDefaultSafetyMargin);

/// Literal definition: no k > s with X_k = parent(X_s). Quadratic; used as a
/// reference for exit_times.
std::vector<std::int64_t> exit_times_literal(const PathView& path);

/// Fresh, exit and regeneration structure of a path with censoring applied.
PathEvents regeneration_events(const PathView& path, int safety_margin = kDefaultSafetyMargin);

/// Confirmed exit times that are also strict depth records (|X_s| > |X_k| for
/// every k < s). A subset of the regeneration times; time 0 is included when it
/// is a confirmed exit time.
std::vector<std::int64_t> record_regeneration_times(const PathView& path, const PathEvents& events);

/// Index of the first visit to u, or kNeverHit.
std::int64_t first_hitting_time(const PathView& path, NodeId u);

class RayShortfall : public std::runtime_error {
 public:
  RayShortfall(std::size_t requested, std::size_t available);
  std::size_t requested;
  std::size_t available;
};

/// First n confirmed exit points (epsilon_0, ..., epsilon_{n-1}).
std::vector<NodeId> ray_prefix(const PathEvents& events, std::size_t n);
std::vector<NodeId> ray_prefix(const PathView& path, std::size_t n,
                               int safety_margin = kDefaultSafetyMargin);

struct Slab {
  int height = 0;
  std::int64_t duration = 0;
};

/// Increments between consecutive confirmed regenerations, starting from the
/// one between the first and second regeneration after time 0.
std::vector<Slab> slabs(const PathEvents& events);

}  // namespace gwharm
