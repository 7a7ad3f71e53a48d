#pragma once

// Frontier cells: known traversable cells touching unknown space. Clustered
// into 8-connected groups that become exploration targets.

#include <algorithm>
#include <limits>
#include <vector>

#include "navsim/grid.hpp"

namespace navsim {

inline constexpr std::size_t kDefaultMinClusterSize = 4;

struct Frontier {
  std::vector<GridCoord> cells;  // sorted (row, col)
  Point2 centroid{};
  std::size_t size = 0;
  double score = std::numeric_limits<double>::quiet_NaN();

  bool scored() const { return score == score; }
};

inline bool is_frontier_cell(const CostMap& cm, GridCoord c) {
  if (!cm.is_known_free(c)) return false;
  for (const auto d : kNeighbors8) {
    const GridCoord n{c.x + d.x, c.y + d.y};
    if (cm.contains(n) && cm.is_unknown(n)) return true;
  }
  return false;
}

/// All frontier cells in (row, col) order.
inline std::vector<GridCoord> extract_frontier_cells(const CostMap& cm) {
  std::vector<GridCoord> out;
  for (int y = 0; y < cm.height(); ++y)
    for (int x = 0; x < cm.width(); ++x)
      if (is_frontier_cell(cm, {x, y})) out.push_back({x, y});
  return out;
}

/// 8-connected components of `cells`, dropping those below min_cluster_size,
/// sorted by size (descending) then centroid (x, then y).
inline std::vector<Frontier> cluster(std::span<const GridCoord> cells, const GridMeta& meta,
                                     std::size_t min_cluster_size = kDefaultMinClusterSize) {
  min_cluster_size = std::max<std::size_t>(min_cluster_size, 1);
  Mask m(meta, 0);
  for (const GridCoord c : cells) m[c] = 1;
  int n = 0;
  const Grid<int> labels = label_components(m, &n);
  std::vector<std::vector<GridCoord>> groups(static_cast<std::size_t>(n));
  for (int y = 0; y < meta.height; ++y)
    for (int x = 0; x < meta.width; ++x)
      if (const int id = labels[{x, y}]) groups[static_cast<std::size_t>(id - 1)].push_back({x, y});

  std::vector<Frontier> out;
  for (auto& g : groups) {
    if (g.size() < min_cluster_size) continue;
    Frontier f;
    f.size = g.size();
    for (const GridCoord c : g) {
      const Point2 p = grid_to_world(c, meta);
      f.centroid.x += p.x;
      f.centroid.y += p.y;
    }
    f.centroid.x /= static_cast<double>(g.size());
    f.centroid.y /= static_cast<double>(g.size());
    f.cells = std::move(g);
    out.push_back(std::move(f));
  }
  std::sort(out.begin(), out.end(), [](const Frontier& a, const Frontier& b) {
    if (a.size != b.size) return a.size > b.size;
    if (a.centroid.x != b.centroid.x) return a.centroid.x < b.centroid.x;
    return a.centroid.y < b.centroid.y;
  });
  return out;
}

inline std::vector<Frontier> find_frontiers(const CostMap& cm, std::size_t min_cluster_size = kDefaultMinClusterSize) {
  const auto cells = extract_frontier_cells(cm);
  return cluster(cells, cm.meta(), min_cluster_size);
}

/// Navigation target of a frontier: the member cell nearest its centroid.
inline GridCoord frontier_target(const Frontier& f, const GridMeta& meta) {
  GridCoord best = f.cells.front();
  double best_d = std::numeric_limits<double>::infinity();
  for (const GridCoord c : f.cells) {
    const double d = distance(grid_to_world(c, meta), f.centroid);
    if (d < best_d) {
      best_d = d;
      best = c;
    }
  }
  return best;
}

}  // namespace navsim
