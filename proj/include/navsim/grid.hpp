#pragma once

// Layered 2D grid world model: integer cost layer, semantic label layer,
// metric <-> grid coordinate mapping and the traversability queries every
// planner builds on.

#include <algorithm>
#include <array>
#include <bitset>
#include <cassert>
#include <cmath>
#include <cstdint>
#include <deque>
#include <limits>
#include <map>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "navsim/detection.hpp"
#include "navsim/errors.hpp"

namespace navsim {

// Cost encoding shared by every module.
inline constexpr std::uint8_t kFreeCost = 0;
inline constexpr std::uint8_t kMaxTraversableCost = 252;
inline constexpr std::uint8_t kInscribedCost = 253;
inline constexpr std::uint8_t kLethalCost = 254;
inline constexpr std::uint8_t kUnknownCost = 255;
/// Cost charged by planners for crossing an unknown (255) cell.
inline constexpr int kUnknownTraversalCost = 200;

/// Grid cell. x is the column, y the row. Ordering is (row, col)
/// lexicographic, which is the tie-break order used everywhere.
struct GridCoord {
  int x = 0;
  int y = 0;

  bool operator==(const GridCoord&) const = default;
  friend auto operator<=>(const GridCoord& a, const GridCoord& b) {
    if (auto c = a.y <=> b.y; c != 0) return c;
    return a.x <=> b.x;
  }
};

struct Point2 {
  double x = 0.0;
  double y = 0.0;
  bool operator==(const Point2&) const = default;
};

inline double distance(Point2 a, Point2 b) { return std::hypot(a.x - b.x, a.y - b.y); }

inline double cell_distance(GridCoord a, GridCoord b) {
  return std::hypot(static_cast<double>(a.x - b.x), static_cast<double>(a.y - b.y));
}

inline bool adjacent8(GridCoord a, GridCoord b) {
  return a != b && std::abs(a.x - b.x) <= 1 && std::abs(a.y - b.y) <= 1;
}

/// All connectivity in the library is 8-connected. Offsets are listed in
/// (row, col) order so neighbour scans inherit the global tie-break.
inline constexpr std::array<GridCoord, 8> kNeighbors8{{
    {-1, -1}, {0, -1}, {1, -1}, {-1, 0}, {1, 0}, {-1, 1}, {0, 1}, {1, 1}}};

struct GridMeta {
  int width = 1;
  int height = 1;
  double resolution = 1.0;  // meters per cell
  Point2 origin{};          // metric position of the (0,0) cell corner

  bool valid() const { return width >= 1 && height >= 1 && resolution > 0.0; }
  bool contains(GridCoord c) const { return c.x >= 0 && c.y >= 0 && c.x < width && c.y < height; }
  std::size_t size() const { return static_cast<std::size_t>(width) * static_cast<std::size_t>(height); }
  std::size_t index(GridCoord c) const {
    return static_cast<std::size_t>(c.y) * static_cast<std::size_t>(width) + static_cast<std::size_t>(c.x);
  }
  GridCoord coord(std::size_t i) const {
    return {static_cast<int>(i % static_cast<std::size_t>(width)),
            static_cast<int>(i / static_cast<std::size_t>(width))};
  }
  bool contains(Point2 p) const {
    return p.x >= origin.x && p.y >= origin.y && p.x < origin.x + width * resolution &&
           p.y < origin.y + height * resolution;
  }
  bool operator==(const GridMeta&) const = default;
};

/// Dense row-major grid of values over a GridMeta.
template <class T>
class Grid {
 public:
  Grid() = default;
  Grid(const GridMeta& meta, T fill) : meta_(meta), data_(meta.size(), fill) {
    if (!meta.valid()) throw MapFormatError("grid needs width, height >= 1 and resolution > 0");
  }

  const GridMeta& meta() const { return meta_; }
  int width() const { return meta_.width; }
  int height() const { return meta_.height; }
  bool contains(GridCoord c) const { return meta_.contains(c); }

  T& operator[](GridCoord c) {
    assert(contains(c));
    return data_[meta_.index(c)];
  }
  const T& operator[](GridCoord c) const {
    assert(contains(c));
    return data_[meta_.index(c)];
  }
  /// Value at c, or `outside` when c lies off the grid.
  T get_or(GridCoord c, T outside) const { return contains(c) ? data_[meta_.index(c)] : outside; }

  std::span<T> data() { return data_; }
  std::span<const T> data() const { return data_; }

  bool operator==(const Grid&) const = default;

 private:
  GridMeta meta_{};
  std::vector<T> data_;
};

/// Binary mask, 1 = true. Stored as bytes rather than vector<bool>.
using Mask = Grid<std::uint8_t>;

inline std::size_t count_true(const Mask& m) {
  return static_cast<std::size_t>(std::count_if(m.data().begin(), m.data().end(), [](auto v) { return v != 0; }));
}

/// Integer-cost occupancy grid: 0 free, 1..252 traversable with cost,
/// values in the lethal set untraversable, 255 unknown (traversable, costly).
class CostMap {
 public:
  using LethalSet = std::bitset<256>;

  static LethalSet lethal_from(int lethal_min) {
    LethalSet s;
    for (int v = std::clamp(lethal_min, 0, 255); v <= 254; ++v) s.set(static_cast<std::size_t>(v));
    return s;
  }

  CostMap() = default;
  explicit CostMap(const GridMeta& meta, std::uint8_t fill = kUnknownCost,
                   LethalSet lethal = lethal_from(kInscribedCost))
      : cost_(meta, fill), lethal_(lethal) {}

  const GridMeta& meta() const { return cost_.meta(); }
  int width() const { return cost_.width(); }
  int height() const { return cost_.height(); }
  bool contains(GridCoord c) const { return cost_.contains(c); }

  std::uint8_t operator[](GridCoord c) const { return cost_[c]; }
  void set(GridCoord c, std::uint8_t v) { cost_[c] = v; }
  const Grid<std::uint8_t>& costs() const { return cost_; }
  Grid<std::uint8_t>& costs() { return cost_; }

  const LethalSet& lethal_set() const { return lethal_; }
  void set_lethal_set(LethalSet s) { lethal_ = s; }

  bool is_lethal_value(std::uint8_t v) const { return lethal_.test(v); }
  bool is_lethal(GridCoord c) const { return is_lethal_value(cost_[c]); }
  bool is_unknown(GridCoord c) const { return cost_[c] == kUnknownCost; }
  /// Known and traversable: neither lethal nor unknown.
  bool is_known_free(GridCoord c) const { return !is_lethal(c) && !is_unknown(c); }

  /// Cost used by planners: unknown cells are charged kUnknownTraversalCost.
  int traversal_cost(GridCoord c) const {
    const auto v = cost_[c];
    return v == kUnknownCost ? kUnknownTraversalCost : static_cast<int>(v);
  }

  std::size_t count_unknown() const {
    return static_cast<std::size_t>(
        std::count(cost_.data().begin(), cost_.data().end(), kUnknownCost));
  }

  bool operator==(const CostMap&) const = default;

 private:
  Grid<std::uint8_t> cost_;
  LethalSet lethal_;
};

/// Wraps an angle into (-pi, pi].
inline double normalize_angle(double a) {
  a = std::remainder(a, 2.0 * std::numbers::pi);
  if (a <= -std::numbers::pi) a += 2.0 * std::numbers::pi;
  return a;
}

struct Pose {
  double x = 0.0;
  double y = 0.0;
  double theta = 0.0;

  Pose() = default;
  Pose(double x_, double y_, double theta_) : x(x_), y(y_), theta(normalize_angle(theta_)) {}
  Point2 position() const { return {x, y}; }
  bool operator==(const Pose&) const = default;
};

inline GridCoord world_to_grid(Point2 p, const GridMeta& meta) {
  if (!meta.contains(p)) {
    throw OutOfBounds("point (" + std::to_string(p.x) + ", " + std::to_string(p.y) +
                      ") outside map extent");
  }
  GridCoord c{static_cast<int>(std::floor((p.x - meta.origin.x) / meta.resolution)),
              static_cast<int>(std::floor((p.y - meta.origin.y) / meta.resolution))};
  // Guard the far edge against rounding in the division.
  c.x = std::min(c.x, meta.width - 1);
  c.y = std::min(c.y, meta.height - 1);
  return c;
}

/// Metric center of a cell.
inline Point2 grid_to_world(GridCoord c, const GridMeta& meta) {
  return {meta.origin.x + (c.x + 0.5) * meta.resolution, meta.origin.y + (c.y + 0.5) * meta.resolution};
}

/// Non-lethal cells, before any connectivity restriction.
inline Mask traversable_mask(const CostMap& cm) {
  Mask m(cm.meta(), 0);
  auto src = cm.costs().data();
  auto dst = m.data();
  for (std::size_t i = 0; i < src.size(); ++i) dst[i] = cm.is_lethal_value(src[i]) ? 0 : 1;
  return m;
}

/// 8-connected component of `mask` containing `seed`.
inline Mask reachable_component(const Mask& mask, GridCoord seed) {
  if (!mask.contains(seed)) throw OutOfBounds("seed outside mask");
  if (!mask[seed]) throw SeedNotTraversable("seed cell is not traversable");
  Mask out(mask.meta(), 0);
  std::deque<GridCoord> open{seed};
  out[seed] = 1;
  while (!open.empty()) {
    const GridCoord c = open.front();
    open.pop_front();
    for (const auto d : kNeighbors8) {
      const GridCoord n{c.x + d.x, c.y + d.y};
      if (mask.get_or(n, 0) && !out[n]) {
        out[n] = 1;
        open.push_back(n);
      }
    }
  }
  return out;
}

/// Labels the 8-connected components of a mask; 0 = background,
/// components numbered from 1 in (row, col) order of their first cell.
inline Grid<int> label_components(const Mask& mask, int* count = nullptr) {
  Grid<int> labels(mask.meta(), 0);
  int next = 0;
  std::vector<GridCoord> stack;
  for (int y = 0; y < mask.height(); ++y) {
    for (int x = 0; x < mask.width(); ++x) {
      const GridCoord s{x, y};
      if (!mask[s] || labels[s]) continue;
      labels[s] = ++next;
      stack.assign(1, s);
      while (!stack.empty()) {
        const GridCoord c = stack.back();
        stack.pop_back();
        for (const auto d : kNeighbors8) {
          const GridCoord n{c.x + d.x, c.y + d.y};
          if (mask.get_or(n, 0) && !labels[n]) {
            labels[n] = next;
            stack.push_back(n);
          }
        }
      }
    }
  }
  if (count) *count = next;
  return labels;
}

/// Walks the cells pierced by a ray in order (Amanatides-Woo traversal).
/// `visit(cell, t_enter, t_exit)` receives metric distances along the ray and
/// returns false to stop. Traversal ends when the ray leaves the grid or
/// t_enter exceeds max_len.
template <class Visit>
void traverse_ray(const GridMeta& meta, Point2 start, double angle, double max_len, Visit&& visit) {
  const double res = meta.resolution;
  const double sx = (start.x - meta.origin.x) / res;
  const double sy = (start.y - meta.origin.y) / res;
  const double dx = std::cos(angle);
  const double dy = std::sin(angle);
  GridCoord cell{static_cast<int>(std::floor(sx)), static_cast<int>(std::floor(sy))};
  if (!meta.contains(cell)) return;
  constexpr double inf = std::numeric_limits<double>::infinity();
  const int step_x = dx > 0 ? 1 : (dx < 0 ? -1 : 0);
  const int step_y = dy > 0 ? 1 : (dy < 0 ? -1 : 0);
  const double delta_x = step_x ? res / std::abs(dx) : inf;
  const double delta_y = step_y ? res / std::abs(dy) : inf;
  double next_x = step_x > 0 ? (cell.x + 1 - sx) * res / dx : (step_x < 0 ? (sx - cell.x) * res / -dx : inf);
  double next_y = step_y > 0 ? (cell.y + 1 - sy) * res / dy : (step_y < 0 ? (sy - cell.y) * res / -dy : inf);
  double t_enter = 0.0;
  while (meta.contains(cell) && t_enter <= max_len) {
    const double t_exit = std::min(next_x, next_y);
    if (!visit(cell, t_enter, t_exit)) return;
    t_enter = t_exit;
    if (next_x < next_y) {
      cell.x += step_x;
      next_x += delta_x;
    } else {
      cell.y += step_y;
      next_y += delta_y;
    }
  }
}

/// One range reading, bearing relative to the sensor heading (left positive).
struct ScanRay {
  double bearing = 0.0;
  double range = 0.0;
};

struct DepthScan {
  double max_range = 5.0;
  double fov = std::numbers::pi / 2.0;
  std::vector<ScanRay> rays;

  bool is_max_range(const ScanRay& r) const { return r.range >= max_range; }
};

/// Per-cell semantic labels with confidences. Sparse: only labeled cells
/// are stored, ordered by cell index so iteration is deterministic.
class SemanticMap {
 public:
  using Labels = std::map<std::string, double>;

  SemanticMap() = default;
  explicit SemanticMap(const GridMeta& meta) : meta_(meta) {}

  const GridMeta& meta() const { return meta_; }

  /// Records `label` at `c`, keeping the larger confidence on repeat writes.
  void write(GridCoord c, const std::string& label, double confidence) {
    if (!meta_.contains(c)) throw OutOfBounds("semantic label outside map");
    confidence = std::clamp(confidence, 0.0, 1.0);
    auto& slot = cells_[meta_.index(c)][label];
    slot = std::max(slot, confidence);
  }

  const Labels* labels_at(GridCoord c) const {
    if (!meta_.contains(c)) return nullptr;
    auto it = cells_.find(meta_.index(c));
    return it == cells_.end() ? nullptr : &it->second;
  }

  double confidence(GridCoord c, const std::string& label) const {
    const auto* l = labels_at(c);
    if (!l) return 0.0;
    auto it = l->find(label);
    return it == l->end() ? 0.0 : it->second;
  }

  template <class F>
  void for_each(F&& f) const {
    for (const auto& [idx, labels] : cells_) f(meta_.coord(idx), labels);
  }

  std::size_t labeled_cells() const { return cells_.size(); }

 private:
  GridMeta meta_{};
  std::map<std::size_t, Labels> cells_;
};

/// Bearing of a detection implied by its box center within the field of view.
inline double detection_bearing(const Detection& d, double fov) { return (0.5 - d.bbox.center_x()) * fov; }

namespace detail {

/// Endpoint cell of a scan ray: the cell holding pose + min(range, max_range).
/// Calls `carve(cell)` for every cell strictly before it.
template <class Carve>
std::optional<GridCoord> walk_scan_ray(const GridMeta& meta, const Pose& pose, const ScanRay& ray,
                                       double max_range, Carve&& carve) {
  const double len = std::min(ray.range, max_range);
  std::optional<GridCoord> last;
  traverse_ray(meta, pose.position(), pose.theta + ray.bearing, len,
               [&](GridCoord c, double, double t_exit) {
                 if (t_exit > len) {
                   last = c;
                   return false;
                 }
                 carve(c);
                 last = c;
                 return true;
               });
  return last;
}

}  // namespace detail

/// Folds one observation into the belief maps. Each ray frees the cells up to
/// its endpoint (lethal cells stay lethal) and marks the endpoint lethal
/// unless the ray is a max-range reading. Each detection's label is written
/// at the endpoint of the ray closest to its bearing.
inline void update_semantic(SemanticMap& sm, CostMap& cm, const DepthScan& scan, const Pose& pose,
                            std::span<const Detection> dets) {
  const GridMeta& meta = cm.meta();
  if (!meta.contains(pose.position())) throw PoseOutOfBounds("pose outside map extent");
  auto free_cell = [&](GridCoord c) {
    if (!cm.is_lethal(c)) cm.set(c, kFreeCost);
  };
  std::vector<std::optional<GridCoord>> endpoints;
  endpoints.reserve(scan.rays.size());
  for (const auto& ray : scan.rays) {
    auto end = detail::walk_scan_ray(meta, pose, ray, scan.max_range, free_cell);
    if (end) {
      // A ray leaving the grid has no endpoint cell of its own; the last
      // in-bounds cell was free space.
      const bool left_grid = !meta.contains(Point2{
          pose.x + std::cos(pose.theta + ray.bearing) * std::min(ray.range, scan.max_range),
          pose.y + std::sin(pose.theta + ray.bearing) * std::min(ray.range, scan.max_range)});
      if (scan.is_max_range(ray) || left_grid) {
        free_cell(*end);
      } else {
        cm.set(*end, kLethalCost);
      }
    }
    endpoints.push_back(end);
  }
  if (scan.rays.empty()) return;
  for (const auto& det : dets) {
    const double bearing = detection_bearing(det, scan.fov);
    std::size_t best = 0;
    for (std::size_t i = 1; i < scan.rays.size(); ++i) {
      if (std::abs(scan.rays[i].bearing - bearing) < std::abs(scan.rays[best].bearing - bearing)) best = i;
    }
    if (endpoints[best]) sm.write(*endpoints[best], det.label, det.confidence);
  }
}

}  // namespace navsim
