// navsim: command-line front end for the planners and the episode harness.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "navsim/frontier.hpp"
#include "navsim/harness.hpp"
#include "navsim/map_io.hpp"
#include "navsim/planner.hpp"
#include "navsim/skeleton.hpp"

namespace fs = std::filesystem;
using namespace navsim;

namespace {

constexpr int kConfigError = 2;

Point2 parse_xy(const std::string& s) {
  std::istringstream in(s);
  Point2 p;
  char comma = 0;
  if (!(in >> p.x >> comma >> p.y) || comma != ',') throw ScenarioInvalid("expected x,y but got '" + s + "'");
  return p;
}

// Annotated rendering: black lethal, grey unknown, white free, then skeleton,
// path and endpoints drawn on top.
GrayImage render(const CostMap& cm, const SkeletonSet* sk, const std::vector<GridCoord>& path, GridCoord start,
                 GridCoord goal) {
  CostMap view(cm.meta(), 0);
  for (int y = 0; y < cm.height(); ++y)
    for (int x = 0; x < cm.width(); ++x) {
      const GridCoord c{x, y};
      view.set(c, cm.is_lethal(c) ? 0 : cm.is_unknown(c) ? 205 : static_cast<std::uint8_t>(254 - cm[c] / 4));
    }
  if (sk)
    for (const GridCoord c : sk->cells) view.set(c, 150);
  for (const GridCoord c : path) view.set(c, 90);
  view.set(start, 40);
  view.set(goal, 20);
  return image_from_costmap(view);
}

int cmd_plan(const fs::path& map_path, const std::string& start_s, const std::string& goal_s, const std::string& planner,
             const std::string& out_csv, const std::string& out_pgm) {
  const CostMap cm = load_map(map_path);
  const Point2 start = parse_xy(start_s);
  const Point2 goal = parse_xy(goal_s);
  const PlannerKind kind = parse_planner(planner);
  PlannedPath path;
  try {
    path = plan_path(kind, Pose(start.x, start.y, 0.0), goal, cm);
  } catch (const GoalUnreachable& e) {
    std::cerr << e.what() << '\n';
    return 1;
  } catch (const SeedNotTraversable& e) {
    std::cerr << e.what() << '\n';
    return 1;
  }
  std::ofstream file;
  if (!out_csv.empty()) file.open(out_csv);
  std::ostream& out = out_csv.empty() ? std::cout : file;
  out << "x,y\n";
  for (const GridCoord c : path.cells()) {
    const Point2 p = grid_to_world(c, cm.meta());
    out << format_real(p.x) << ',' << format_real(p.y) << '\n';
  }
  std::cerr << "cells " << path.total_cells << "  length " << format_real(path.metric_length) << " m  min clearance "
            << format_real(path.min_clearance) << " cells" << (path.used_fmm ? "  (fast marching)" : "") << '\n';
  if (!out_pgm.empty()) {
    std::optional<SkeletonSet> sk;
    if (!path.used_fmm) {
      const GridCoord r = world_to_grid(start, cm.meta());
      sk = thin(reachable_component(traversable_mask(cm), r));
    }
    write_pgm(out_pgm, render(cm, sk ? &*sk : nullptr, path.cells(), world_to_grid(start, cm.meta()), path.goal_cell));
  }
  return 0;
}

int cmd_frontiers(const fs::path& map_path, std::size_t min_cluster) {
  const CostMap cm = load_map(map_path);
  const auto frontiers = find_frontiers(cm, min_cluster);
  std::cout << "id,size,centroid_x,centroid_y,target_x,target_y\n";
  for (std::size_t i = 0; i < frontiers.size(); ++i) {
    const auto& f = frontiers[i];
    const Point2 t = grid_to_world(frontier_target(f, cm.meta()), cm.meta());
    std::cout << i << ',' << f.size << ',' << format_real(f.centroid.x) << ',' << format_real(f.centroid.y) << ','
              << format_real(t.x) << ',' << format_real(t.y) << '\n';
  }
  return 0;
}

int cmd_skeleton(const fs::path& map_path, const fs::path& out) {
  const CostMap cm = load_map(map_path);
  const SkeletonSet sk = thin(traversable_mask(cm));
  CostMap view(cm.meta(), 0);
  for (const GridCoord c : sk.cells) view.set(c, 255);
  write_pgm(out, image_from_costmap(view));
  std::cerr << sk.size() << " skeleton cells\n";
  return 0;
}

int cmd_run(const std::vector<std::string>& scenarios, const SuiteOverrides& overrides, const std::string& out) {
  std::vector<fs::path> paths(scenarios.begin(), scenarios.end());
  for (const auto& p : paths)
    if (!fs::exists(p)) throw ScenarioInvalid("no such scenario path: " + p.string());
  const auto report = run_suite(paths, overrides, out);
  for (const auto& r : report.results)
    if (r.termination.rfind("error:", 0) == 0) std::cerr << r.world_name << ": " << r.termination << '\n';
  std::cout << report.summary;
  return 0;
}

int cmd_eval(const fs::path& dir) {
  const fs::path file = fs::is_directory(dir) ? dir / "results.csv" : dir;
  std::ifstream in(file);
  if (!in) throw ScenarioInvalid("cannot open " + file.string());
  const auto results = read_results_csv(in);
  std::cout << summary_table(results);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Object-goal navigation planners and grid-world evaluation harness", "navsim"};
  app.require_subcommand(1);

  std::vector<std::string> scenarios;
  std::string out_dir, planner, perception, validator, endpoint, cooc;
  std::uint64_t seed = 0;
  unsigned threads = 0;
  int max_steps = 0;
  auto* run = app.add_subcommand("run", "Run one or more scenarios (files or directories)");
  run->add_option("--scenario", scenarios, "Scenario JSON file or directory")->required();
  auto* seed_opt = run->add_option("--seed", seed, "Override every scenario seed");
  run->add_option("--planner", planner, "medial | fmm")->check(CLI::IsMember({"medial", "fmm"}));
  run->add_option("--perception", perception, "mock | replay | wire")->check(CLI::IsMember({"mock", "replay", "wire"}));
  run->add_option("--validator", validator, "mock | agree | disagree")->check(CLI::IsMember({"mock", "agree", "none", "disagree"}));
  run->add_option("--endpoint", endpoint, "Perception server URL for --perception wire");
  run->add_option("--cooc", cooc, "Co-occurrence table (goal,context,affinity per line)");
  run->add_option("--max-steps", max_steps, "Override the step budget");
  run->add_option("--threads", threads, "Worker threads (0 = all cores)");
  run->add_option("--out", out_dir, "Directory for results.csv, summary.txt and traces");

  std::string map_file, start_s, goal_s, out_csv, out_pgm;
  std::string plan_planner = "medial";
  auto* plan = app.add_subcommand("plan", "Plan a path on a map file");
  plan->add_option("--map", map_file, "Map graymap (.pgm with .meta sidecar)")->required();
  plan->add_option("--start", start_s, "Start x,y in meters")->required();
  plan->add_option("--goal", goal_s, "Goal x,y in meters")->required();
  plan->add_option("--planner", plan_planner, "medial | fmm")->check(CLI::IsMember({"medial", "fmm"}));
  plan->add_option("--csv", out_csv, "Write the path CSV here instead of stdout");
  plan->add_option("--pgm", out_pgm, "Write an annotated graymap of the plan");

  std::size_t min_cluster = kDefaultMinClusterSize;
  std::string frontier_map;
  auto* frontiers = app.add_subcommand("frontiers", "List frontier clusters of a map as CSV");
  frontiers->add_option("--map", frontier_map, "Map graymap")->required();
  frontiers->add_option("--min-cluster", min_cluster, "Minimum cluster size in cells");

  std::string skel_map, skel_out;
  auto* skeleton = app.add_subcommand("skeleton", "Dump the medial-axis skeleton as a graymap");
  skeleton->add_option("--map", skel_map, "Map graymap")->required();
  skeleton->add_option("--out", skel_out, "Output graymap")->required();

  std::string results_dir;
  auto* eval = app.add_subcommand("eval", "Summarize a results directory");
  eval->add_option("--results", results_dir, "Directory holding results.csv (or the file)")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kConfigError;
  }

  try {
    if (*run) {
      SuiteOverrides o;
      if (*seed_opt) o.seed = seed;
      if (!planner.empty()) o.planner = parse_planner(planner);
      if (!perception.empty()) o.perception = parse_perception_mode(perception);
      if (!validator.empty()) o.validator = parse_validator_mode(validator);
      if (!endpoint.empty()) o.endpoint = endpoint;
      if (!cooc.empty()) o.cooc = cooc;
      if (max_steps > 0) o.max_steps = max_steps;
      o.threads = threads;
      return cmd_run(scenarios, o, out_dir);
    }
    if (*plan) return cmd_plan(map_file, start_s, goal_s, plan_planner, out_csv, out_pgm);
    if (*frontiers) return cmd_frontiers(frontier_map, min_cluster);
    if (*skeleton) return cmd_skeleton(skel_map, skel_out);
    if (*eval) return cmd_eval(results_dir);
  } catch (const ScenarioInvalid& e) {
    std::cerr << e.what() << '\n';
    return kConfigError;
  } catch (const MapFormatError& e) {
    std::cerr << e.what() << '\n';
    return kConfigError;
  } catch (const TableFormatError& e) {
    std::cerr << e.what() << '\n';
    return kConfigError;
  } catch (const OutOfBounds& e) {
    std::cerr << e.what() << '\n';
    return kConfigError;
  } catch (const EmptyResults& e) {
    std::cerr << e.what() << '\n';
    return kConfigError;
  } catch (const Error& e) {
    std::cerr << e.what() << '\n';
    return 1;
  }
  return 0;
}
