#include <gtest/gtest.h>

#include <filesystem>
#include <numbers>

#include "navsim/map_io.hpp"
#include "oracles.hpp"

using namespace navsim;

namespace {

GridMeta meta05(int w, int h) { return GridMeta{w, h, 0.05, {0.0, 0.0}}; }

}  // namespace

TEST(WorldToGrid, Examples) {
  const GridMeta m = meta05(40, 40);
  EXPECT_EQ(world_to_grid({0.0, 0.0}, m), (GridCoord{0, 0}));
  EXPECT_EQ(world_to_grid({1.0, 0.5}, m), (GridCoord{20, 10}));
  EXPECT_THROW(world_to_grid({3.0, 0.1}, meta05(10, 10)), OutOfBounds);
  EXPECT_THROW(world_to_grid({-0.01, 0.1}, meta05(10, 10)), OutOfBounds);
}

TEST(WorldToGrid, OffsetOrigin) {
  const GridMeta m{8, 6, 0.5, {-2.0, 1.0}};
  EXPECT_EQ(world_to_grid({-2.0, 1.0}, m), (GridCoord{0, 0}));
  EXPECT_EQ(world_to_grid({-0.75, 2.4}, m), (GridCoord{2, 2}));
  EXPECT_THROW(world_to_grid({2.0, 1.5}, m), OutOfBounds);
}

TEST(WorldToGrid, CenterRoundTripExhaustive) {
  for (const double res : {0.05, 0.1, 0.25, 1.0}) {
    const GridMeta m{13, 9, res, {-0.3, 0.7}};
    for (int y = 0; y < m.height; ++y)
      for (int x = 0; x < m.width; ++x) EXPECT_EQ(world_to_grid(grid_to_world({x, y}, m), m), (GridCoord{x, y}));
  }
}

TEST(Pose, ThetaNormalized) {
  EXPECT_DOUBLE_EQ(Pose(0, 0, 3 * std::numbers::pi).theta, std::numbers::pi);
  EXPECT_DOUBLE_EQ(Pose(0, 0, -std::numbers::pi).theta, std::numbers::pi);
  EXPECT_NEAR(Pose(0, 0, 2 * std::numbers::pi + 0.25).theta, 0.25, 1e-12);
  for (double a = -20.0; a < 20.0; a += 0.37) {
    const double t = normalize_angle(a);
    EXPECT_GT(t, -std::numbers::pi);
    EXPECT_LE(t, std::numbers::pi);
    EXPECT_NEAR(std::remainder(t - a, 2 * std::numbers::pi), 0.0, 1e-9);
  }
}

TEST(TraversableMask, Examples) {
  CostMap zeros(meta05(6, 5), 0);
  EXPECT_EQ(count_true(traversable_mask(zeros)), 30u);

  CostMap one = zeros;
  one.set({2, 3}, kLethalCost);
  const Mask m = traversable_mask(one);
  EXPECT_FALSE((m[{2, 3}]));
  EXPECT_EQ(count_true(m), 29u);

  CostMap unknown(meta05(6, 5), kUnknownCost);
  EXPECT_EQ(count_true(traversable_mask(unknown)), 30u);
  unknown.set({0, 0}, kInscribedCost);
  EXPECT_FALSE((traversable_mask(unknown)[{0, 0}]));
}

TEST(TraversableMask, MonotoneInLethalSet) {
  oracle::Rng rng(5);
  for (int trial = 0; trial < 20; ++trial) {
    CostMap cm = oracle::random_explored_map(32, 32, rng);
    auto lethal = cm.lethal_set();
    Mask before = traversable_mask(cm);
    for (int v = 0; v < 256; ++v) {
      if (!lethal.test(static_cast<std::size_t>(v))) continue;
      lethal.reset(static_cast<std::size_t>(v));
      cm.set_lethal_set(lethal);
      const Mask after = traversable_mask(cm);
      for (std::size_t i = 0; i < before.data().size(); ++i) EXPECT_LE(before.data()[i], after.data()[i]);
      before = after;
    }
  }
}

TEST(ReachableComponent, TwoRooms) {
  CostMap cm(meta05(11, 6), 0);
  for (int y = 0; y < 6; ++y) cm.set({5, y}, kLethalCost);
  const Mask trav = traversable_mask(cm);
  const Mask left = reachable_component(trav, {1, 1});
  EXPECT_EQ(left, oracle::flood_fill(trav, {1, 1}));
  for (int y = 0; y < 6; ++y)
    for (int x = 0; x < 11; ++x) EXPECT_EQ((left[{x, y}]) != 0, x < 5);
}

TEST(ReachableComponent, FreeMapUnchanged) {
  const Mask all(meta05(7, 7), 1);
  EXPECT_EQ(reachable_component(all, {3, 3}), all);
}

TEST(ReachableComponent, SeedOnLethal) {
  CostMap cm(meta05(4, 4), 0);
  cm.set({1, 1}, kLethalCost);
  EXPECT_THROW(reachable_component(traversable_mask(cm), {1, 1}), SeedNotTraversable);
}

TEST(ReachableComponent, DiagonalStepsConnect) {
  Mask m(meta05(3, 3), 0);
  m[{0, 0}] = m[{1, 1}] = m[{2, 2}] = 1;
  EXPECT_EQ(count_true(reachable_component(m, {0, 0})), 3u);
}

TEST(ReachableComponent, MatchesFloodFillSubsetIdempotent) {
  oracle::Rng rng(11);
  for (int trial = 0; trial < 30; ++trial) {
    const Mask m = oracle::random_obstacle_mask(40, 30, rng);
    const auto cells = oracle::true_cells(m);
    if (cells.empty()) continue;
    const GridCoord seed = cells[static_cast<std::size_t>(rng.uniform_int(0, static_cast<int>(cells.size()) - 1))];
    const Mask r = reachable_component(m, seed);
    EXPECT_EQ(r, oracle::flood_fill(m, seed));
    for (std::size_t i = 0; i < r.data().size(); ++i) EXPECT_LE(r.data()[i], m.data()[i]);
    EXPECT_EQ(reachable_component(r, seed), r);
  }
}

TEST(LabelComponents, CountMatchesUnionFind) {
  oracle::Rng rng(3);
  for (int trial = 0; trial < 30; ++trial) {
    const Mask m = oracle::random_obstacle_mask(30, 30, rng);
    int n = 0;
    label_components(m, &n);
    EXPECT_EQ(n, oracle::count_components(m));
  }
}

// Robot at the center of cell 0 facing +x; 0.25 m cells.
TEST(UpdateSemantic, SingleRayCarvesAndMarksHit) {
  const GridMeta m{10, 3, 0.25, {0.0, 0.0}};
  CostMap cm(m, kUnknownCost);
  SemanticMap sm(m);
  DepthScan scan;
  scan.rays = {{0.0, 1.0}};
  const Pose pose(0.125, 0.375, 0.0);
  update_semantic(sm, cm, scan, pose, {});
  for (int x = 0; x < 4; ++x) EXPECT_EQ((cm[{x, 1}]), kFreeCost) << x;
  EXPECT_EQ((cm[{4, 1}]), kLethalCost);
  EXPECT_EQ((cm[{5, 1}]), kUnknownCost);
  EXPECT_EQ(cm.count_unknown(), 30u - 5u);

  const Detection tv{"television", {0.48, 0.4, 0.04, 0.2}, 0.9};
  update_semantic(sm, cm, scan, pose, std::span(&tv, 1));
  EXPECT_DOUBLE_EQ(sm.confidence({4, 1}, "television"), 0.9);
  EXPECT_EQ(sm.labeled_cells(), 1u);
}

TEST(UpdateSemantic, MaxRangeRayLeavesUnknownBeyond) {
  const GridMeta m{40, 3, 0.25, {0.0, 0.0}};
  CostMap cm(m, kUnknownCost);
  SemanticMap sm(m);
  DepthScan scan;
  scan.max_range = 2.0;
  scan.rays = {{0.0, 2.0}};
  update_semantic(sm, cm, scan, Pose(0.125, 0.375, 0.0), {});
  for (int x = 0; x < 40; ++x) {
    if (x <= 8) {
      EXPECT_NE((cm[{x, 1}]), kLethalCost) << x;
    }
    if (x < 8) {
      EXPECT_EQ((cm[{x, 1}]), kFreeCost) << x;
    }
    if (x > 8) {
      EXPECT_EQ((cm[{x, 1}]), kUnknownCost) << x;
    }
  }
}

TEST(UpdateSemantic, KeepsMaxConfidenceAndLethal) {
  const GridMeta m{10, 3, 0.25, {0.0, 0.0}};
  CostMap cm(m, kUnknownCost);
  cm.set({2, 1}, kInscribedCost);
  SemanticMap sm(m);
  DepthScan scan;
  scan.rays = {{0.0, 1.0}};
  const Pose pose(0.125, 0.375, 0.0);
  const Detection hi{"sofa", {0.48, 0.4, 0.04, 0.2}, 0.8}, lo{"sofa", {0.48, 0.4, 0.04, 0.2}, 0.3};
  update_semantic(sm, cm, scan, pose, std::span(&hi, 1));
  update_semantic(sm, cm, scan, pose, std::span(&lo, 1));
  EXPECT_EQ((cm[{2, 1}]), kInscribedCost);
  EXPECT_DOUBLE_EQ(sm.confidence({4, 1}, "sofa"), 0.8);
}

TEST(UpdateSemantic, PoseOutOfBounds) {
  const GridMeta m{4, 4, 0.25, {0.0, 0.0}};
  CostMap cm(m, kUnknownCost);
  SemanticMap sm(m);
  EXPECT_THROW(update_semantic(sm, cm, DepthScan{}, Pose(5.0, 0.1, 0.0), {}), PoseOutOfBounds);
}

TEST(UpdateSemantic, RandomScansNeverFreeLethalAndConfidenceBounded) {
  oracle::Rng rng(21);
  for (int trial = 0; trial < 40; ++trial) {
    CostMap cm = oracle::random_explored_map(48, 48, rng);
    const CostMap before = cm;
    SemanticMap sm(cm.meta());
    DepthScan scan;
    scan.max_range = 1.5;
    for (int i = -45; i <= 45; i += 3) scan.rays.push_back({i * std::numbers::pi / 180, rng.uniform(0.05, 2.0)});
    const Pose pose(rng.uniform(0.1, 2.3), rng.uniform(0.1, 2.3), rng.uniform(-3.0, 3.0));
    std::vector<Detection> dets;
    for (int i = 0; i < 4; ++i) dets.push_back({"x", {rng.uniform(0.0, 0.9), 0.4, 0.05, 0.1}, rng.uniform(0.0, 1.5)});
    update_semantic(sm, cm, scan, pose, dets);
    for (int y = 0; y < 48; ++y)
      for (int x = 0; x < 48; ++x)
        if (before.is_lethal({x, y})) {
          EXPECT_TRUE(cm.is_lethal({x, y}));
        }
    sm.for_each([](GridCoord, const SemanticMap::Labels& l) {
      for (const auto& [k, v] : l) {
        EXPECT_GE(v, 0.0);
        EXPECT_LE(v, 1.0);
      }
    });
  }
}

TEST(SemanticMap, OutOfBoundsWrite) {
  SemanticMap sm(meta05(3, 3));
  EXPECT_THROW(sm.write({3, 0}, "a", 0.5), OutOfBounds);
}

TEST(MapIo, RoundTrip) {
  const auto dir = std::filesystem::temp_directory_path() / "navsim_map_io";
  std::filesystem::create_directories(dir);
  CostMap cm(GridMeta{7, 4, 0.1, {1.5, -2.0}}, 0, CostMap::lethal_from(200));
  cm.set({0, 0}, 254);
  cm.set({6, 3}, 255);
  cm.set({3, 1}, 17);
  save_map(dir / "m.pgm", cm);
  const CostMap back = load_map(dir / "m.pgm");
  EXPECT_EQ(back, cm);
  EXPECT_TRUE(back.is_lethal_value(200));
  EXPECT_FALSE(back.is_lethal_value(255));
  // Image row 0 is the top of the map.
  const GrayImage img = read_pgm(dir / "m.pgm");
  EXPECT_EQ(img.pixels[6], 255);
  EXPECT_EQ(img.pixels[3 * 7], 254);
}

TEST(MapIo, Errors) {
  const auto dir = std::filesystem::temp_directory_path() / "navsim_map_io_err";
  std::filesystem::create_directories(dir);
  EXPECT_THROW(load_map(dir / "missing.pgm"), MapFormatError);
  {
    std::ofstream(dir / "bad.pgm") << "P6\n1 1\n255\nx";
  }
  EXPECT_THROW(read_pgm(dir / "bad.pgm"), MapFormatError);
  {
    std::ofstream(dir / "ok.pgm", std::ios::binary) << "P5\n# comment\n2 1\n255\n" << '\0' << '\0';
    std::ofstream(dir / "ok.meta") << "resolution: 0\n";
  }
  EXPECT_EQ(read_pgm(dir / "ok.pgm").width, 2);
  EXPECT_THROW(load_map(dir / "ok.pgm"), MapFormatError);
  {
    std::ofstream(dir / "ok.meta") << "# defaults\nresolution: 0.2\n";
  }
  const CostMap cm = load_map(dir / "ok.pgm");
  EXPECT_DOUBLE_EQ(cm.meta().resolution, 0.2);
  EXPECT_TRUE(cm.is_lethal_value(253));
  EXPECT_FALSE(cm.is_lethal_value(252));
}
