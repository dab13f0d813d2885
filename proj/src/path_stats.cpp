#include "gwharm/path_stats.hpp"

#include <algorithm>
#include <string>

namespace gwharm {

namespace {

// Maps a vertex id to a slot in a visited table; the root's parent gets the last slot.
std::size_t slot(const PathView& path, NodeId v) {
  return v == kParentOfRoot ? path.tree.size() : static_cast<std::size_t>(v);
}

}  // namespace

std::vector<std::int64_t> fresh_times(const PathView& path) {
  std::vector<char> seen(path.tree.size() + 1, 0);
  std::vector<std::int64_t> out;
  for (std::size_t s = 0; s < path.vertices.size(); ++s) {
    char& mark = seen[slot(path, path.vertices[s])];
    if (!mark) {
      mark = 1;
      out.push_back(static_cast<std::int64_t>(s));
    }
  }
  return out;
}

std::pair<std::vector<std::int64_t>, std::int64_t> exit_times(const PathView& path,
                                                              int safety_margin) {
  const auto& d = path.depths;
  const auto len = static_cast<std::int64_t>(d.size());
  std::vector<std::int64_t> exits;
  if (len == 0) return {exits, 0};
  // future[s] = min depth over times > s (infinity at the last time).
  std::vector<int> future(d.size());
  int running = std::numeric_limits<int>::max();
  for (std::int64_t s = len - 1; s >= 0; --s) {
    future[s] = running;
    running = std::min(running, d[s]);
  }
  const int confirmed = d.back() - safety_margin;
  std::int64_t cutoff = len;
  for (std::int64_t s = 0; s < len; ++s) {
    if (d[s] < 0 || future[s] < d[s]) continue;
    exits.push_back(s);
    if (cutoff == len && d[s] > confirmed) cutoff = s;
  }
  return {exits, cutoff};
}

std::vector<std::int64_t> exit_times_literal(const PathView& path) {
  std::vector<std::int64_t> out;
  const auto& x = path.vertices;
  for (std::size_t s = 0; s < x.size(); ++s) {
    if (x[s] == kParentOfRoot) continue;
    const NodeId p = path.tree.parent(x[s]);
    bool exit = true;
    for (std::size_t k = s + 1; k < x.size() && exit; ++k) exit = x[k] != p;
    if (exit) out.push_back(static_cast<std::int64_t>(s));
  }
  return out;
}

PathEvents regeneration_events(const PathView& path, int safety_margin) {
  PathEvents ev;
  ev.safety_margin = safety_margin;
  ev.fresh_times = fresh_times(path);
  std::tie(ev.exit_times, ev.censor_cutoff) = exit_times(path, safety_margin);
  ev.confirmed_depth = path.depths.empty() ? -1 : path.depths.back() - safety_margin;

  for (std::int64_t s : ev.exit_times) {
    if (s >= ev.censor_cutoff) break;
    const NodeId v = path.vertices[s];
    // Exit times at one depth all sit at the same vertex.
    if (static_cast<int>(ev.exit_points.size()) == path.depths[s]) ev.exit_points.push_back(v);
  }

  std::size_t i = 0;
  for (std::int64_t s : ev.fresh_times) {
    if (s >= ev.censor_cutoff) break;
    while (i < ev.exit_times.size() && ev.exit_times[i] < s) ++i;
    if (i < ev.exit_times.size() && ev.exit_times[i] == s) {
      ev.regen_times.push_back(s);
      ev.regen_points.push_back(path.vertices[s]);
      ev.regen_heights.push_back(path.depths[s]);
    }
  }
  return ev;
}

std::vector<std::int64_t> record_regeneration_times(const PathView& path,
                                                    const PathEvents& events) {
  std::vector<std::int64_t> out;
  int record = -2;
  std::size_t i = 0;
  for (std::int64_t s = 0; s < events.censor_cutoff; ++s) {
    const int d = path.depths[s];
    if (d <= record) continue;
    record = d;
    while (i < events.exit_times.size() && events.exit_times[i] < s) ++i;
    if (i < events.exit_times.size() && events.exit_times[i] == s) out.push_back(s);
  }
  return out;
}

std::int64_t first_hitting_time(const PathView& path, NodeId u) {
  auto it = std::find(path.vertices.begin(), path.vertices.end(), u);
  return it == path.vertices.end() ? kNeverHit
                                   : static_cast<std::int64_t>(it - path.vertices.begin());
}

RayShortfall::RayShortfall(std::size_t requested_, std::size_t available_)
    : std::runtime_error("ray_prefix: requested " + std::to_string(requested_) +
                         " exit points, only " + std::to_string(available_) + " confirmed"),
      requested(requested_),
      available(available_) {}

std::vector<NodeId> ray_prefix(const PathEvents& events, std::size_t n) {
  if (events.exit_points.size() < n) throw RayShortfall(n, events.exit_points.size());
  return {events.exit_points.begin(), events.exit_points.begin() + static_cast<std::ptrdiff_t>(n)};
}

std::vector<NodeId> ray_prefix(const PathView& path, std::size_t n, int safety_margin) {
  return ray_prefix(regeneration_events(path, safety_margin), n);
}

std::vector<Slab> slabs(const PathEvents& events) {
  std::vector<Slab> out;
  const auto& h = events.regen_heights;
  const auto& t = events.regen_times;
  for (std::size_t k = 1; k + 1 < h.size(); ++k) {
    out.push_back({h[k + 1] - h[k], t[k + 1] - t[k]});
  }
  return out;
}

}  // namespace gwharm
