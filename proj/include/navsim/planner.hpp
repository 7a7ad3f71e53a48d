#pragma once

// Global planners over a CostMap:
//  * the medial-axis planner: straight entry segment from the robot to the
//    skeleton, a cheapest walk along the skeleton, straight exit segment to
//    the goal;
//  * the Fast Marching planner: an Eikonal arrival-time field grown from the
//    goal, followed downhill from the robot.

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <queue>
#include <span>
#include <tuple>
#include <vector>

#include "navsim/errors.hpp"
#include "navsim/grid.hpp"
#include "navsim/skeleton.hpp"

namespace navsim {

/// Cells of the integer segment a -> b, 8-adjacent and ordered from a.
inline std::vector<GridCoord> bresenham_line(GridCoord a, GridCoord b) {
  std::vector<GridCoord> out;
  int dx = std::abs(b.x - a.x), dy = -std::abs(b.y - a.y);
  const int sx = a.x < b.x ? 1 : -1, sy = a.y < b.y ? 1 : -1;
  int err = dx + dy;
  GridCoord c = a;
  for (;;) {
    out.push_back(c);
    if (c == b) break;
    const int e2 = 2 * err;
    if (e2 >= dy) {
      err += dy;
      c.x += sx;
    }
    if (e2 <= dx) {
      err += dx;
      c.y += sy;
    }
  }
  return out;
}

/// Every cell the segment between the centers of a and b touches, including
/// both side cells where it passes exactly through a cell corner.
inline std::vector<GridCoord> supercover_line(GridCoord a, GridCoord b) {
  std::vector<GridCoord> out{a};
  int x = a.x, y = a.y;
  int dx = b.x - a.x, dy = b.y - a.y;
  const int xstep = dx < 0 ? -1 : 1, ystep = dy < 0 ? -1 : 1;
  dx = std::abs(dx);
  dy = std::abs(dy);
  const int ddx = 2 * dx, ddy = 2 * dy;
  if (ddx >= ddy) {
    int errorprev = dx, error = dx;
    for (int i = 0; i < dx; ++i) {
      x += xstep;
      error += ddy;
      if (error > ddx) {
        y += ystep;
        error -= ddx;
        if (error + errorprev < ddx) {
          out.push_back({x, y - ystep});
        } else if (error + errorprev > ddx) {
          out.push_back({x - xstep, y});
        } else {
          out.push_back({x, y - ystep});
          out.push_back({x - xstep, y});
        }
      }
      out.push_back({x, y});
      errorprev = error;
    }
  } else {
    int errorprev = dy, error = dy;
    for (int i = 0; i < dy; ++i) {
      y += ystep;
      error += ddx;
      if (error > ddy) {
        x += xstep;
        error -= ddy;
        if (error + errorprev < ddy) {
          out.push_back({x - xstep, y});
        } else if (error + errorprev > ddy) {
          out.push_back({x, y - ystep});
        } else {
          out.push_back({x - xstep, y});
          out.push_back({x, y - ystep});
        }
      }
      out.push_back({x, y});
      errorprev = error;
    }
  }
  return out;
}

inline bool line_of_sight(GridCoord a, GridCoord b, const Mask& mask) {
  for (const GridCoord c : supercover_line(a, b))
    if (!mask.get_or(c, 0)) return false;
  return true;
}

/// Nearest skeleton cell (Euclidean, ties by (row, col)) reachable from p by
/// a straight segment inside `mask`.
inline GridCoord attach_point(GridCoord p, const SkeletonSet& sk, const Mask& mask) {
  if (sk.contains(p)) return p;
  std::vector<std::pair<long, GridCoord>> order;
  order.reserve(sk.cells.size());
  for (const GridCoord c : sk.cells) {
    const long ddx = c.x - p.x, ddy = c.y - p.y;
    order.push_back({ddx * ddx + ddy * ddy, c});
  }
  std::sort(order.begin(), order.end());
  for (const auto& [d2, c] : order)
    if (line_of_sight(p, c, mask)) return c;
  throw NoVisibleSkeleton("no skeleton cell visible from (" + std::to_string(p.x) + ", " + std::to_string(p.y) + ")");
}

/// Edge weight multiplier for entering a cell.
inline double cost_factor(const CostMap& cm, GridCoord c) { return 1.0 + cm.traversal_cost(c) / 100.0; }

/// True for a diagonal step squeezing between two lethal cells.
inline bool pinched(const CostMap& cm, GridCoord c, GridCoord off) {
  if (off.x == 0 || off.y == 0) return false;
  const GridCoord a{c.x + off.x, c.y}, b{c.x, c.y + off.y};
  return cm.contains(a) && cm.contains(b) && cm.is_lethal(a) && cm.is_lethal(b);
}

/// Cheapest walk between two skeleton cells along 8-adjacent skeleton cells,
/// edge weight = step length * cost_factor(target). Diagonal steps through a
/// zero-width gap between two lethal cells are not edges.
inline std::vector<GridCoord> skeleton_path(GridCoord entry, GridCoord exit, const SkeletonSet& sk, const CostMap& cm) {
  if (!sk.contains(entry) || !sk.contains(exit)) throw SkeletonDisconnected("endpoints must lie on the skeleton");
  if (entry == exit) return {entry};
  const GridMeta& meta = sk.meta;
  constexpr double inf = std::numeric_limits<double>::infinity();
  Grid<double> dist(meta, inf);
  Grid<int> parent(meta, -1);
  using Item = std::tuple<double, GridCoord>;
  auto cmp = [](const Item& a, const Item& b) {
    if (std::get<0>(a) != std::get<0>(b)) return std::get<0>(a) > std::get<0>(b);
    return std::get<1>(b) < std::get<1>(a);
  };
  std::priority_queue<Item, std::vector<Item>, decltype(cmp)> open(cmp);
  dist[entry] = 0.0;
  open.push({0.0, entry});
  while (!open.empty()) {
    const auto [d, c] = open.top();
    open.pop();
    if (d > dist[c]) continue;
    if (c == exit) break;
    for (const auto off : kNeighbors8) {
      const GridCoord n{c.x + off.x, c.y + off.y};
      if (!sk.contains(n) || pinched(cm, c, off)) continue;
      const double step = (off.x != 0 && off.y != 0) ? std::numbers::sqrt2 : 1.0;
      const double nd = d + step * cost_factor(cm, n);
      if (nd < dist[n]) {
        dist[n] = nd;
        parent[n] = static_cast<int>(meta.index(c));
        open.push({nd, n});
      }
    }
  }
  if (dist[exit] == inf) throw SkeletonDisconnected("entry and exit lie on different skeleton components");
  std::vector<GridCoord> path{exit};
  for (GridCoord c = exit; c != entry;) {
    c = meta.coord(static_cast<std::size_t>(parent[c]));
    path.push_back(c);
  }
  std::reverse(path.begin(), path.end());
  return path;
}

/// Three-segment plan. Segments share endpoints: entry.back() == axis.front()
/// and axis.back() == exit.front().
struct PlannedPath {
  GridMeta meta{};
  std::vector<GridCoord> entry;
  std::vector<GridCoord> axis;
  std::vector<GridCoord> exit;
  GridCoord goal_cell{};  // after snapping
  std::size_t total_cells = 0;
  double metric_length = 0.0;
  double min_clearance = 0.0;       // whole path, cells
  double axis_min_clearance = 0.0;  // axis segment only, cells
  bool used_fmm = false;

  /// The full cell sequence with shared endpoints emitted once.
  std::vector<GridCoord> cells() const {
    std::vector<GridCoord> out(entry.begin(), entry.end());
    if (!axis.empty()) out.insert(out.end(), axis.begin() + (out.empty() ? 0 : 1), axis.end());
    if (!exit.empty()) out.insert(out.end(), exit.begin() + (out.empty() ? 0 : 1), exit.end());
    return out;
  }
};

inline double path_length(std::span<const GridCoord> cells, double resolution) {
  double len = 0.0;
  for (std::size_t i = 1; i < cells.size(); ++i) len += cell_distance(cells[i - 1], cells[i]) * resolution;
  return len;
}

inline double min_over(std::span<const GridCoord> cells, const Grid<double>& field) {
  double m = std::numeric_limits<double>::infinity();
  for (const GridCoord c : cells) m = std::min(m, field[c]);
  return m;
}

namespace detail {

inline void finish_path(PlannedPath& p, const Mask& region) {
  const auto all = p.cells();
  p.total_cells = all.size();
  p.metric_length = path_length(all, p.meta.resolution);
  const Grid<double> clearance = clearance_field(region);
  p.min_clearance = min_over(all, clearance);
  p.axis_min_clearance = min_over(p.axis, clearance);
}

/// Nearest cell of `region` within `radius_cells` of c, ties by (row, col).
inline std::optional<GridCoord> nearest_in(const Mask& region, GridCoord c, double radius_cells) {
  const int r = static_cast<int>(std::ceil(radius_cells));
  std::optional<GridCoord> best;
  double best_d = std::numeric_limits<double>::infinity();
  for (int y = c.y - r; y <= c.y + r; ++y) {
    for (int x = c.x - r; x <= c.x + r; ++x) {
      const GridCoord n{x, y};
      if (!region.get_or(n, 0)) continue;
      const double d = cell_distance(c, n);
      if (d <= radius_cells + 1e-9 && (d < best_d || (d == best_d && n < *best))) {
        best_d = d;
        best = n;
      }
    }
  }
  return best;
}

struct PlanningRegion {
  GridCoord robot;
  GridCoord goal;
  Mask traversable;  // M_t: robot's component
};

inline PlanningRegion planning_region(const Pose& robot, Point2 goal, const CostMap& cm, double goal_snap_radius) {
  PlanningRegion r;
  r.robot = world_to_grid(robot.position(), cm.meta());
  const GridCoord goal_cell = world_to_grid(goal, cm.meta());
  const Mask trav = traversable_mask(cm);
  if (!trav[r.robot]) throw SeedNotTraversable("robot cell is not traversable");
  r.traversable = reachable_component(trav, r.robot);
  if (trav[goal_cell]) {
    if (!r.traversable[goal_cell]) throw GoalUnreachable("goal lies outside the robot's traversable region");
    r.goal = goal_cell;
  } else {
    auto snapped = nearest_in(r.traversable, goal_cell, goal_snap_radius / cm.meta().resolution);
    if (!snapped) throw GoalUnreachable("goal cell is blocked and no reachable cell lies within the snap radius");
    r.goal = *snapped;
  }
  return r;
}

}  // namespace detail

struct PlannerOptions {
  /// A blocked goal is replaced by the nearest reachable cell within this radius (m).
  double goal_snap_radius = 1.0;
};

/// Safety-first plan hugging the medial axis of the robot's traversable region.
/// Attach points are first searched through known cells only, then through
/// the whole region including unknown space.
inline PlannedPath plan_medial(const Pose& robot, Point2 goal, const CostMap& cm, const PlannerOptions& opts = {}) {
  auto region = detail::planning_region(robot, goal, cm, opts.goal_snap_radius);
  const SkeletonSet sk = thin(region.traversable);
  if (sk.empty()) throw NoVisibleSkeleton("empty skeleton");

  Mask known = region.traversable;
  for (int y = 0; y < known.height(); ++y)
    for (int x = 0; x < known.width(); ++x)
      if (cm.is_unknown({x, y})) known[{x, y}] = 0;

  auto attach = [&](GridCoord p) {
    if (known[p]) {
      try {
        return attach_point(p, sk, known);
      } catch (const NoVisibleSkeleton&) {
      }
    }
    return attach_point(p, sk, region.traversable);
  };
  const GridCoord entry = attach(region.robot);
  const GridCoord exit = attach(region.goal);

  PlannedPath p;
  p.meta = cm.meta();
  p.goal_cell = region.goal;
  p.entry = bresenham_line(region.robot, entry);
  p.axis = skeleton_path(entry, exit, sk, cm);
  p.exit = bresenham_line(exit, region.goal);
  detail::finish_path(p, region.traversable);
  return p;
}

/// Arrival time (seconds at unit speed = meters on free cells) to the goal.
struct ArrivalField {
  GridMeta meta{};
  Grid<double> time;

  bool reachable(GridCoord c) const { return time.contains(c) && std::isfinite(time[c]); }
  double operator[](GridCoord c) const { return time[c]; }
};

namespace detail {

inline double eikonal_update(double a, double b, double step) {
  if (a > b) std::swap(a, b);
  if (!std::isfinite(a)) return std::numeric_limits<double>::infinity();
  if (!std::isfinite(b) || b - a >= step) return a + step;
  return 0.5 * (a + b + std::sqrt(2.0 * step * step - (a - b) * (a - b)));
}

}  // namespace detail

/// First-order upwind Fast Marching solve of |grad T| = slowness, slowness =
/// 1 + cost/100, from one or more zero-time sources. Each cell takes the
/// better of the axis-aligned and the diagonal (rotated, spacing sqrt 2)
/// stencil. Cells within `exact_radius` cells of a source with a clear line
/// to it start from the straight-line time, removing the point-source error.
inline ArrivalField fmm_field(const CostMap& cm, std::span<const GridCoord> sources, double exact_radius = 0.0) {
  const GridMeta& meta = cm.meta();
  constexpr double inf = std::numeric_limits<double>::infinity();
  ArrivalField field{meta, Grid<double>(meta, inf)};
  Grid<std::uint8_t> frozen(meta, 0);
  const Mask trav = traversable_mask(cm);
  auto ok = [&](GridCoord c) { return trav.get_or(c, 0) != 0; };
  const double h = meta.resolution;

  using Item = std::pair<double, std::size_t>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> heap;
  auto offer = [&](GridCoord c, double t) {
    if (t < field.time[c]) {
      field.time[c] = t;
      heap.push({t, meta.index(c)});
    }
  };

  for (const GridCoord s : sources) {
    if (!meta.contains(s)) throw OutOfBounds("fmm source outside map");
    if (!ok(s)) throw SeedNotTraversable("fmm source is not traversable");
    offer(s, 0.0);
    if (exact_radius > 0.0) {
      const int r = static_cast<int>(std::ceil(exact_radius));
      const double slowness = cost_factor(cm, s);
      for (int y = s.y - r; y <= s.y + r; ++y) {
        for (int x = s.x - r; x <= s.x + r; ++x) {
          const GridCoord c{x, y};
          const double d = cell_distance(s, c);
          if (d > exact_radius || !ok(c) || !line_of_sight(s, c, trav)) continue;
          offer(c, d * h * slowness);
        }
      }
    }
  }

  auto frozen_time = [&](GridCoord c) { return frozen.get_or(c, 0) ? field.time[c] : inf; };
  // Diagonal neighbours only count when neither side cell is blocked.
  auto diag_time = [&](GridCoord c, int dx, int dy) {
    if (!ok({c.x + dx, c.y}) || !ok({c.x, c.y + dy})) return inf;
    return frozen_time({c.x + dx, c.y + dy});
  };

  while (!heap.empty()) {
    const auto [t, idx] = heap.top();
    heap.pop();
    const GridCoord c = meta.coord(idx);
    if (frozen[c] || t > field.time[c]) continue;
    frozen[c] = 1;
    for (const auto off : kNeighbors8) {
      const GridCoord n{c.x + off.x, c.y + off.y};
      if (!ok(n) || frozen[n]) continue;
      const double f = cost_factor(cm, n);
      const double axis = detail::eikonal_update(std::min(frozen_time({n.x - 1, n.y}), frozen_time({n.x + 1, n.y})),
                                                 std::min(frozen_time({n.x, n.y - 1}), frozen_time({n.x, n.y + 1})),
                                                 h * f);
      const double diag = detail::eikonal_update(std::min(diag_time(n, 1, 1), diag_time(n, -1, -1)),
                                                 std::min(diag_time(n, 1, -1), diag_time(n, -1, 1)),
                                                 std::numbers::sqrt2 * h * f);
      offer(n, std::min(axis, diag));
    }
  }
  return field;
}

/// Radius (cells) of exact initialisation around a single goal.
inline constexpr double kFmmExactRadius = 2.5;

inline ArrivalField fmm_field(const CostMap& cm, GridCoord goal) {
  const GridCoord sources[] = {goal};
  return fmm_field(cm, sources, kFmmExactRadius);
}

/// Steepest descent over the 8-neighbourhood: each step moves to the
/// neighbour with the smallest time, which must be strictly smaller than the
/// current one. Diagonal steps between two unreachable side cells are not
/// taken. Stops on a zero-time cell.
inline std::vector<GridCoord> fmm_path(const ArrivalField& field, GridCoord start) {
  if (!field.reachable(start)) throw GoalUnreachable("start has no finite arrival time");
  std::vector<GridCoord> path{start};
  GridCoord cur = start;
  const std::size_t limit = field.meta.size();
  while (field[cur] > 0.0) {
    if (path.size() > limit) throw DescentStuck("descent did not terminate");
    std::optional<GridCoord> best;
    for (const auto off : kNeighbors8) {
      const GridCoord n{cur.x + off.x, cur.y + off.y};
      if (!field.reachable(n)) continue;
      if (off.x != 0 && off.y != 0 &&
          (!field.reachable({cur.x + off.x, cur.y}) || !field.reachable({cur.x, cur.y + off.y})))
        continue;
      if (field[n] < field[cur] && (!best || field[n] < field[*best])) best = n;
    }
    if (!best) throw DescentStuck("no strictly lower neighbour at (" + std::to_string(cur.x) + ", " + std::to_string(cur.y) + ")");
    cur = *best;
    path.push_back(cur);
  }
  return path;
}

/// Shortest-time plan: fmm field from the (snapped) goal, descended from the robot.
inline PlannedPath plan_fmm(const Pose& robot, Point2 goal, const CostMap& cm, const PlannerOptions& opts = {}) {
  auto region = detail::planning_region(robot, goal, cm, opts.goal_snap_radius);
  const ArrivalField field = fmm_field(cm, region.goal);
  PlannedPath p;
  p.meta = cm.meta();
  p.goal_cell = region.goal;
  p.entry = {region.robot};
  p.axis = fmm_path(field, region.robot);
  p.exit = {region.goal};
  p.used_fmm = true;
  detail::finish_path(p, region.traversable);
  return p;
}

enum class PlannerKind { medial, fmm };

/// Medial plan with Fast Marching fallback when the skeleton cannot be used.
inline PlannedPath plan_path(PlannerKind kind, const Pose& robot, Point2 goal, const CostMap& cm,
                             const PlannerOptions& opts = {}) {
  if (kind == PlannerKind::medial) {
    try {
      return plan_medial(robot, goal, cm, opts);
    } catch (const NoVisibleSkeleton&) {
    } catch (const SkeletonDisconnected&) {
    }
  }
  return plan_fmm(robot, goal, cm, opts);
}

}  // namespace navsim
