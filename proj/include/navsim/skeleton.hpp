#pragma once

// Medial-axis approximation of a traversable region by Zhang-Suen thinning,
// and the exact Euclidean clearance field used to judge how central a path is.
// The map border counts as obstacle for both.

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "navsim/grid.hpp"

namespace navsim {

struct SkeletonSet {
  GridMeta meta{};
  Mask mask;                     // 1 on skeleton cells
  std::vector<GridCoord> cells;  // sorted (row, col)

  bool empty() const { return cells.empty(); }
  std::size_t size() const { return cells.size(); }
  bool contains(GridCoord c) const { return mask.get_or(c, 0) != 0; }
};

/// Exact Euclidean distance (in cells) from every cell to the nearest false
/// cell, with everything outside the map treated as false. False cells get 0.
inline Grid<double> clearance_field(const Mask& mask) {
  const int w = mask.width() + 2;
  const int h = mask.height() + 2;
  constexpr double inf = 1e20;
  std::vector<double> sq(static_cast<std::size_t>(w) * h, 0.0);
  for (int y = 0; y < mask.height(); ++y)
    for (int x = 0; x < mask.width(); ++x)
      if (mask[{x, y}]) sq[static_cast<std::size_t>(y + 1) * w + (x + 1)] = inf;

  // Felzenszwalb-Huttenlocher lower envelope of parabolas, one dimension at a time.
  std::vector<double> f, d;
  std::vector<int> v;
  std::vector<double> z;
  auto transform_1d = [&](int n) {
    d.assign(static_cast<std::size_t>(n), 0.0);
    v.assign(static_cast<std::size_t>(n), 0);
    z.assign(static_cast<std::size_t>(n) + 1, 0.0);
    int k = 0;
    v[0] = 0;
    z[0] = -inf;
    z[1] = inf;
    for (int q = 1; q < n; ++q) {
      double s;
      for (;;) {
        const int p = v[static_cast<std::size_t>(k)];
        s = ((f[q] + double(q) * q) - (f[p] + double(p) * p)) / (2.0 * q - 2.0 * p);
        if (s <= z[static_cast<std::size_t>(k)] && k > 0) {
          --k;
        } else {
          break;
        }
      }
      ++k;
      v[static_cast<std::size_t>(k)] = q;
      z[static_cast<std::size_t>(k)] = s;
      z[static_cast<std::size_t>(k) + 1] = inf;
    }
    k = 0;
    for (int q = 0; q < n; ++q) {
      while (z[static_cast<std::size_t>(k) + 1] < q) ++k;
      const int p = v[static_cast<std::size_t>(k)];
      d[static_cast<std::size_t>(q)] = double(q - p) * (q - p) + f[static_cast<std::size_t>(p)];
    }
  };

  f.resize(static_cast<std::size_t>(std::max(w, h)));
  for (int x = 0; x < w; ++x) {
    f.assign(static_cast<std::size_t>(h), 0.0);
    for (int y = 0; y < h; ++y) f[static_cast<std::size_t>(y)] = sq[static_cast<std::size_t>(y) * w + x];
    transform_1d(h);
    for (int y = 0; y < h; ++y) sq[static_cast<std::size_t>(y) * w + x] = d[static_cast<std::size_t>(y)];
  }
  for (int y = 0; y < h; ++y) {
    f.assign(sq.begin() + static_cast<std::ptrdiff_t>(y) * w, sq.begin() + static_cast<std::ptrdiff_t>(y + 1) * w);
    transform_1d(w);
    std::copy(d.begin(), d.end(), sq.begin() + static_cast<std::ptrdiff_t>(y) * w);
  }

  Grid<double> out(mask.meta(), 0.0);
  for (int y = 0; y < mask.height(); ++y)
    for (int x = 0; x < mask.width(); ++x)
      out[{x, y}] = std::sqrt(sq[static_cast<std::size_t>(y + 1) * w + (x + 1)]);
  return out;
}

namespace detail {

/// One Zhang-Suen sub-iteration. Neighbours P2..P9 run clockwise from the
/// cell one row up (row - 1), matching the image convention of the original
/// algorithm. Returns the number of deleted cells.
inline std::size_t zhang_suen_pass(Mask& img, std::vector<GridCoord>& live, int sub_iteration,
                                   std::vector<GridCoord>& doomed) {
  doomed.clear();
  for (const GridCoord c : live) {
    auto px = [&](int dx, int dy) -> int { return img.get_or({c.x + dx, c.y + dy}, 0) ? 1 : 0; };
    const int p2 = px(0, -1), p3 = px(1, -1), p4 = px(1, 0), p5 = px(1, 1);
    const int p6 = px(0, 1), p7 = px(-1, 1), p8 = px(-1, 0), p9 = px(-1, -1);
    const int b = p2 + p3 + p4 + p5 + p6 + p7 + p8 + p9;
    if (b < 2 || b > 6) continue;
    const int a = (!p2 && p3) + (!p3 && p4) + (!p4 && p5) + (!p5 && p6) + (!p6 && p7) + (!p7 && p8) +
                  (!p8 && p9) + (!p9 && p2);
    if (a != 1) continue;
    const int m1 = sub_iteration == 0 ? p2 * p4 * p6 : p2 * p4 * p8;
    const int m2 = sub_iteration == 0 ? p4 * p6 * p8 : p2 * p6 * p8;
    if (m1 == 0 && m2 == 0) doomed.push_back(c);
  }
  for (const GridCoord c : doomed) img[c] = 0;
  if (!doomed.empty()) std::erase_if(live, [&](GridCoord c) { return img[c] == 0; });
  return doomed.size();
}

}  // namespace detail

/// Thins a binary region to a one-cell-wide skeleton: Zhang-Suen
/// sub-iterations alternate until neither deletes a cell. Parallel deletion
/// erases components shaped like a 2x2 block entirely; any component of the
/// input left without a skeleton cell gets its most clear cell back so the
/// component count is preserved.
inline SkeletonSet thin(const Mask& mask) {
  Mask img = mask;
  std::vector<GridCoord> live;
  for (int y = 0; y < img.height(); ++y)
    for (int x = 0; x < img.width(); ++x)
      if (img[{x, y}]) live.push_back({x, y});
  const std::size_t input_cells = live.size();

  std::vector<GridCoord> doomed;
  for (;;) {
    std::size_t removed = detail::zhang_suen_pass(img, live, 0, doomed);
    removed += detail::zhang_suen_pass(img, live, 1, doomed);
    if (removed == 0) break;
  }

  if (input_cells > 0) {
    int n_components = 0;
    const Grid<int> comp = label_components(mask, &n_components);
    std::vector<char> has_skeleton(static_cast<std::size_t>(n_components) + 1, 0);
    for (const GridCoord c : live) has_skeleton[static_cast<std::size_t>(comp[c])] = 1;
    if (std::count(has_skeleton.begin() + 1, has_skeleton.end(), 0) > 0) {
      const Grid<double> clearance = clearance_field(mask);
      std::vector<GridCoord> best(static_cast<std::size_t>(n_components) + 1, GridCoord{-1, -1});
      for (int y = 0; y < mask.height(); ++y) {
        for (int x = 0; x < mask.width(); ++x) {
          const int id = comp[{x, y}];
          if (id == 0 || has_skeleton[static_cast<std::size_t>(id)]) continue;
          auto& b = best[static_cast<std::size_t>(id)];
          if (b.x < 0 || clearance[{x, y}] > clearance[b]) b = {x, y};
        }
      }
      for (int id = 1; id <= n_components; ++id) {
        if (has_skeleton[static_cast<std::size_t>(id)]) continue;
        const GridCoord b = best[static_cast<std::size_t>(id)];
        img[b] = 1;
        live.push_back(b);
      }
    }
  }

  std::sort(live.begin(), live.end());
  return SkeletonSet{mask.meta(), std::move(img), std::move(live)};
}

inline Mask skeleton_mask(const SkeletonSet& sk) { return sk.mask; }

}  // namespace navsim
