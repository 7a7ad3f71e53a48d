#pragma once

// Deterministic grid-world simulator: a fully known ground-truth cost map,
// labeled objects, discrete agent actions and a ray-cast depth sensor, plus
// the episode loop tying mapping, verification, frontier choice and planning
// together.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <memory>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "navsim/commonsense.hpp"
#include "navsim/errors.hpp"
#include "navsim/frontier.hpp"
#include "navsim/grid.hpp"
#include "navsim/perception.hpp"
#include "navsim/planner.hpp"

namespace navsim {

inline constexpr double deg(double d) { return d * std::numbers::pi / 180.0; }

struct WorldObject {
  std::string label;
  Point2 position;
};

struct World {
  std::string name;
  CostMap truth;
  std::vector<WorldObject> objects;

  /// Snaps objects to their cell centers and checks they sit on traversable
  /// ground.
  void validate_objects() {
    for (auto& o : objects) {
      if (!truth.meta().contains(o.position)) throw ScenarioInvalid("object '" + o.label + "' outside the map");
      const GridCoord c = world_to_grid(o.position, truth.meta());
      if (truth.is_lethal(c)) throw ScenarioInvalid("object '" + o.label + "' sits on a lethal cell");
      o.position = grid_to_world(c, truth.meta());
    }
  }
};

enum class ActionKind { forward, rotate_left, rotate_right, stop };

struct Action {
  ActionKind kind = ActionKind::stop;
};

inline const char* to_string(ActionKind k) {
  switch (k) {
    case ActionKind::forward: return "forward";
    case ActionKind::rotate_left: return "rotate_left";
    case ActionKind::rotate_right: return "rotate_right";
    case ActionKind::stop: return "stop";
  }
  return "?";
}

struct AgentState {
  Pose pose;
  double traveled = 0.0;
  int steps = 0;
  bool stopped = false;
  bool blocked = false;  // last forward move hit something
};

struct SimConfig {
  double step_size = 0.25;  // m
  double turn = deg(30.0);
  double fov = deg(90.0);
  double ray_spacing = deg(1.0);
  double max_range = 5.0;  // m
  double success_radius = 1.0;
  int max_steps = 500;
  int reobserve_interval = 4;  // forward steps between perception/replanning cycles
};

/// Cells swept by a straight move from p over `length` meters.
inline std::vector<GridCoord> swept_cells(const GridMeta& meta, Point2 p, double angle, double length) {
  std::vector<GridCoord> out;
  traverse_ray(meta, p, angle, length, [&](GridCoord c, double, double) {
    out.push_back(c);
    return true;
  });
  return out;
}

inline AgentState step(const World& world, const AgentState& st, Action a, const SimConfig& cfg = {}) {
  if (st.stopped) throw EpisodeOver("agent already stopped");
  AgentState next = st;
  next.blocked = false;
  ++next.steps;
  switch (a.kind) {
    case ActionKind::rotate_left: next.pose = Pose(st.pose.x, st.pose.y, st.pose.theta + cfg.turn); break;
    case ActionKind::rotate_right: next.pose = Pose(st.pose.x, st.pose.y, st.pose.theta - cfg.turn); break;
    case ActionKind::stop: next.stopped = true; break;
    case ActionKind::forward: {
      const Point2 target{st.pose.x + cfg.step_size * std::cos(st.pose.theta),
                          st.pose.y + cfg.step_size * std::sin(st.pose.theta)};
      const GridMeta& meta = world.truth.meta();
      bool clear = meta.contains(target);
      if (clear) {
        for (const GridCoord c : swept_cells(meta, st.pose.position(), st.pose.theta, cfg.step_size)) {
          if (world.truth.is_lethal(c)) {
            clear = false;
            break;
          }
        }
      }
      if (clear) {
        next.pose = Pose(target.x, target.y, st.pose.theta);
        next.traveled += distance(st.pose.position(), target);
      } else {
        next.blocked = true;
      }
      break;
    }
  }
  return next;
}

inline std::vector<double> scan_bearings(const SimConfig& cfg) {
  std::vector<double> out;
  const int half = static_cast<int>(std::floor(0.5 * cfg.fov / cfg.ray_spacing + 1e-9));
  for (int i = -half; i <= half; ++i) out.push_back(i * cfg.ray_spacing);
  return out;
}

/// Casts the sensor against ground truth. Rays stop on lethal cells and on
/// object cells (objects are physical). A hit reports the distance to the
/// middle of the ray's chord through the hit cell, so the endpoint lies
/// inside it. An object is visible when it is in range, inside the field of
/// view and the straight line to it crosses no lethal cell.
inline Observation observe(const World& world, const Pose& pose, const SimConfig& cfg = {}, std::int64_t step_index = 0) {
  const GridMeta& meta = world.truth.meta();
  if (!meta.contains(pose.position())) throw PoseOutOfBounds("pose outside map extent");
  const GridCoord own = world_to_grid(pose.position(), meta);
  std::vector<GridCoord> object_cells;
  for (const auto& o : world.objects) {
    const GridCoord c = world_to_grid(o.position, meta);
    if (c != own) object_cells.push_back(c);
  }
  std::sort(object_cells.begin(), object_cells.end());

  Observation obs;
  obs.image_ref = world.name + "/step-" + std::to_string(step_index);
  obs.pose = pose;
  obs.step = step_index;
  obs.depth.max_range = cfg.max_range;
  obs.depth.fov = cfg.fov;
  for (const double bearing : scan_bearings(cfg)) {
    double range = cfg.max_range;
    traverse_ray(meta, pose.position(), pose.theta + bearing, cfg.max_range, [&](GridCoord c, double t_in, double t_out) {
      if (t_in >= cfg.max_range) return false;
      const bool hit = world.truth.is_lethal(c) || std::binary_search(object_cells.begin(), object_cells.end(), c);
      if (!hit) return true;
      range = 0.5 * (t_in + std::min(t_out, cfg.max_range));
      return false;
    });
    obs.depth.rays.push_back({bearing, range});
  }

  for (const auto& o : world.objects) {
    const double d = distance(pose.position(), o.position);
    if (d > cfg.max_range) continue;
    const double angle = std::atan2(o.position.y - pose.y, o.position.x - pose.x);
    const double bearing = normalize_angle(angle - pose.theta);
    if (std::abs(bearing) > 0.5 * cfg.fov + 1e-9) continue;
    const GridCoord target = world_to_grid(o.position, meta);
    bool blocked = false;
    traverse_ray(meta, pose.position(), angle, d, [&](GridCoord c, double, double) {
      if (c == target) return false;
      if (world.truth.is_lethal(c)) {
        blocked = true;
        return false;
      }
      return true;
    });
    if (!blocked) obs.visible.push_back({o.label, bearing, d});
  }
  return obs;
}

/// Perception and decision-making components used by one episode.
struct AgentStack {
  std::unique_ptr<Initiator> initiator;
  std::unique_ptr<Validator> validator;
  std::shared_ptr<const FrontierPolicy> policy;
  VerificationConfig verification{};
  PlannerKind planner = PlannerKind::medial;
  std::size_t min_cluster_size = kDefaultMinClusterSize;
  std::string validation_prompt = "Is there a {goal} in the image? Answer yes or no.";
  /// Extra prompts sent to the initiator each cycle to populate the semantic map.
  std::vector<std::string> context_prompts;
};

struct EpisodeSpec {
  Pose start;
  std::string goal_category;
  SimConfig sim{};
  std::uint64_t seed = 0;
  int initial_spin = 11;          // rotations taken in place before exploring
  double stop_distance = 0.7;     // stop this close to the estimated goal (m)
  double frontier_hysteresis = 0.3;  // score bonus for the frontier already pursued
  /// Called after the initial observation and after every action with the
  /// agent state and belief map. For instrumentation only.
  std::function<void(const AgentState&, const CostMap&)> on_step;
};

struct EpisodeResult {
  bool success = false;
  double traveled = 0.0;
  double shortest = 0.0;
  int steps = 0;
  std::string world_name;
  std::string goal_category;
  std::vector<Pose> trace;
  int false_goal_events = 0;
  std::uint64_t seed = 0;
  std::string termination;  // stop | max_steps | exhausted | error:<what>
};

/// Shortest travel distance on the ground truth from `start` to any cell
/// within `radius` of an object labeled `goal`. Infinite when unreachable.
inline double oracle_shortest(const World& world, Point2 start, const std::string& goal, double radius) {
  const GridMeta& meta = world.truth.meta();
  std::vector<GridCoord> region;
  for (const auto& o : world.objects) {
    if (o.label != goal) continue;
    const int r = static_cast<int>(std::ceil(radius / meta.resolution)) + 1;
    const GridCoord oc = world_to_grid(o.position, meta);
    for (int y = oc.y - r; y <= oc.y + r; ++y)
      for (int x = oc.x - r; x <= oc.x + r; ++x) {
        const GridCoord c{x, y};
        if (meta.contains(c) && !world.truth.is_lethal(c) && distance(grid_to_world(c, meta), o.position) <= radius)
          region.push_back(c);
      }
  }
  if (region.empty()) return std::numeric_limits<double>::infinity();
  std::sort(region.begin(), region.end());
  region.erase(std::unique(region.begin(), region.end()), region.end());
  const GridCoord s = world_to_grid(start, meta);
  if (std::binary_search(region.begin(), region.end(), s)) return 0.0;
  const ArrivalField field = fmm_field(world.truth, region, 0.0);
  return field[s];
}

namespace detail {

/// Drives one episode. Every loop iteration issues exactly one action or ends
/// the episode.
class EpisodeRunner {
 public:
  EpisodeRunner(const World& world, const EpisodeSpec& spec, AgentStack& stack)
      : world_(world), spec_(spec), stack_(stack), belief_(world.truth.meta(), kUnknownCost, world.truth.lethal_set()),
        semantic_(world.truth.meta()) {}

  EpisodeResult run() {
    const auto& cfg = spec_.sim;
    EpisodeResult r;
    r.world_name = world_.name;
    r.goal_category = spec_.goal_category;
    r.seed = spec_.seed;
    r.shortest = oracle_shortest(world_, spec_.start.position(), spec_.goal_category, cfg.success_radius);
    st_.pose = spec_.start;
    r.trace.push_back(st_.pose);
    spin_left_ = spec_.initial_spin;

    sense();
    notify();
    cycle_due_ = true;
    r.termination = "max_steps";
    try {
      while (!st_.stopped && st_.steps < cfg.max_steps) {
        std::optional<Action> a = decide(r);
        if (!a) {
          r.termination = "exhausted";
          break;
        }
        act(*a);
        r.trace.push_back(st_.pose);
        notify();
      }
    } catch (const Error& e) {
      r.termination = std::string("error:") + e.what();
    }
    if (st_.stopped) r.termination = "stop";
    r.steps = st_.steps;
    r.traveled = st_.traveled;
    r.success = st_.stopped && distance_to_goal_object() <= cfg.success_radius;
    return r;
  }

  const CostMap& belief() const { return belief_; }

 private:
  double distance_to_goal_object() const {
    double best = std::numeric_limits<double>::infinity();
    for (const auto& o : world_.objects)
      if (o.label == spec_.goal_category) best = std::min(best, distance(st_.pose.position(), o.position));
    return best;
  }

  void notify() const {
    if (spec_.on_step) spec_.on_step(st_, belief_);
  }

  void sense() {
    obs_ = observe(world_, st_.pose, spec_.sim, st_.steps);
    update_semantic(semantic_, belief_, obs_.depth, st_.pose, {});
  }

  void act(Action a) {
    const Pose before = st_.pose;
    st_ = step(world_, st_, a, spec_.sim);
    if (st_.stopped) return;
    if (a.kind == ActionKind::forward) {
      if (st_.blocked) {
        mark_bump(before);
        cycle_due_ = true;
      } else if (++forward_since_cycle_ >= spec_.sim.reobserve_interval) {
        cycle_due_ = true;
      }
    } else if (spin_left_ >= 0) {
      cycle_due_ = true;
    }
    sense();
  }

  // A blocked move hit a lethal cell the belief does not know about; the
  // first swept cell that is not known free takes the blame.
  void mark_bump(const Pose& from) {
    for (const GridCoord c : swept_cells(belief_.meta(), from.position(), from.theta, spec_.sim.step_size)) {
      if (!belief_.is_known_free(c)) {
        belief_.set(c, kLethalCost);
        return;
      }
    }
  }

  void perceive(EpisodeResult& r) {
    std::vector<std::string> prompts = stack_.context_prompts;
    if (std::find(prompts.begin(), prompts.end(), spec_.goal_category) == prompts.end())
      prompts.push_back(spec_.goal_category);
    const PromptSet context{prompts, stack_.validation_prompt};
    const auto dets = initiate(obs_, context, *stack_.initiator);
    update_semantic(semantic_, belief_, obs_.depth, st_.pose, dets);

    if (goal_estimate_) return;
    std::string vp = stack_.validation_prompt;
    if (auto pos = vp.find("{goal}"); pos != std::string::npos) vp.replace(pos, 6, spec_.goal_category);
    const PromptSet goal_prompts{{spec_.goal_category}, vp};
    const auto outcome = doubly_right(obs_, goal_prompts, *stack_.initiator, *stack_.validator, stack_.verification);
    if (!outcome.goal) return;
    const bool truly_visible = std::any_of(obs_.visible.begin(), obs_.visible.end(),
                                           [&](const VisibleObject& v) { return v.label == spec_.goal_category; });
    if (!truly_visible) ++r.false_goal_events;
    goal_estimate_ = outcome.accepted.empty() ? st_.pose.position() : project(outcome.accepted);
    path_.clear();
  }

  // Metric position of the most confident detection: center of the endpoint
  // cell of the scan ray nearest its bearing.
  Point2 project(const std::vector<Detection>& dets) const {
    const auto& best = *std::max_element(dets.begin(), dets.end(),
                                         [](const Detection& a, const Detection& b) { return a.confidence < b.confidence; });
    const double bearing = detection_bearing(best, obs_.depth.fov);
    const ScanRay* ray = &obs_.depth.rays.front();
    for (const auto& rr : obs_.depth.rays)
      if (std::abs(rr.bearing - bearing) < std::abs(ray->bearing - bearing)) ray = &rr;
    const double len = std::min(ray->range, obs_.depth.max_range);
    const double angle = st_.pose.theta + ray->bearing;
    Point2 end{st_.pose.x + len * std::cos(angle), st_.pose.y + len * std::sin(angle)};
    const GridMeta& meta = belief_.meta();
    end.x = std::clamp(end.x, meta.origin.x, meta.origin.x + meta.width * meta.resolution - 1e-9);
    end.y = std::clamp(end.y, meta.origin.y, meta.origin.y + meta.height * meta.resolution - 1e-9);
    return grid_to_world(world_to_grid(end, meta), meta);
  }

  CostMap planning_map() const {
    CostMap m = belief_;
    const GridCoord robot = world_to_grid(st_.pose.position(), m.meta());
    if (m.is_lethal(robot)) m.set(robot, kFreeCost);
    return m;
  }

  bool blacklisted(Point2 p) const {
    return std::any_of(blacklist_.begin(), blacklist_.end(), [&](Point2 b) { return distance(b, p) < 0.5; });
  }

  bool set_path(const PlannedPath& plan) {
    path_.clear();
    for (const GridCoord c : plan.cells()) path_.push_back(grid_to_world(c, belief_.meta()));
    progress_ = 0;
    return !path_.empty();
  }

  // Plans toward the goal estimate or the best frontier. Returns false when
  // there is nothing left to explore.
  bool replan() {
    const CostMap map = planning_map();
    if (goal_estimate_) {
      try {
        set_path(plan_path(stack_.planner, st_.pose, *goal_estimate_, map));
        target_ = goal_estimate_;
        return true;
      } catch (const Error&) {
        // Fall through to exploration until the goal becomes reachable.
      }
    }
    auto frontiers = find_frontiers(belief_, stack_.min_cluster_size);
    std::erase_if(frontiers, [&](const Frontier& f) { return blacklisted(grid_to_world(frontier_target(f, belief_.meta()), belief_.meta())); });
    while (!frontiers.empty()) {
      std::vector<double> scores;
      for (auto& f : frontiers) {
        f.score = stack_.policy->score(f, semantic_, spec_.goal_category, st_.pose);
        if (target_ && !goal_estimate_) {
          const bool pursued = std::any_of(f.cells.begin(), f.cells.end(), [&](GridCoord c) {
            return distance(grid_to_world(c, belief_.meta()), *target_) < 0.5;
          });
          if (pursued) f.score += spec_.frontier_hysteresis;
        }
        scores.push_back(f.score);
      }
      const std::size_t i = select_frontier_index(frontiers, scores);
      const Point2 goal = grid_to_world(frontier_target(frontiers[i], belief_.meta()), belief_.meta());
      try {
        set_path(plan_path(stack_.planner, st_.pose, goal, map));
        target_ = goal;
        return true;
      } catch (const Error&) {
        blacklist_.push_back(goal);
        frontiers.erase(frontiers.begin() + static_cast<std::ptrdiff_t>(i));
      }
    }
    path_.clear();
    target_.reset();
    return false;
  }

  bool clear_line(Point2 a, Point2 b) const {
    bool clear = true;
    traverse_ray(belief_.meta(), a, std::atan2(b.y - a.y, b.x - a.x), distance(a, b), [&](GridCoord c, double, double) {
      clear = !belief_.is_lethal(c);
      return clear;
    });
    return clear;
  }

  std::optional<Action> follow_path() {
    constexpr double kReached = 0.2, kLookahead = 0.5, kAdvance = 0.3;
    if (path_.empty()) return std::nullopt;
    const Point2 p = st_.pose.position();
    // Progress moves to the closest of the next few waypoints.
    std::size_t best = progress_;
    for (std::size_t j = progress_; j < std::min(path_.size(), progress_ + 12); ++j)
      if (distance(p, path_[j]) < distance(p, path_[best])) best = j;
    progress_ = best;
    while (progress_ + 1 < path_.size() && distance(p, path_[progress_]) < kAdvance) ++progress_;
    if (distance(p, path_.back()) < kReached) return std::nullopt;
    // Aim at the farthest waypoint within the lookahead that is in plain
    // view; around corners that keeps the aim on this side of the wall.
    std::size_t j = progress_;
    while (j + 1 < path_.size() && distance(p, path_[j]) < kLookahead) ++j;
    while (j > progress_ && !clear_line(p, path_[j])) --j;
    const Point2 aim = path_[j];
    // Of the headings reachable by whole turns, take the one whose forward
    // step lands closest to the aim without touching a known lethal cell.
    // The choice does not change while turning, so the agent cannot dither.
    const int turns = static_cast<int>(std::lround(2.0 * std::numbers::pi / spec_.sim.turn));
    int best_k = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (int i = 0; i < turns; ++i) {
      const int k = (i + 1) / 2 * (i % 2 ? 1 : -1);  // 0, 1, -1, 2, -2, ...
      if (std::abs(k) > turns / 2) continue;
      const double heading = st_.pose.theta + k * spec_.sim.turn;
      const Point2 q{p.x + spec_.sim.step_size * std::cos(heading), p.y + spec_.sim.step_size * std::sin(heading)};
      if (!belief_.meta().contains(q)) continue;
      const auto swept = swept_cells(belief_.meta(), p, heading, spec_.sim.step_size);
      if (std::any_of(swept.begin(), swept.end(), [&](GridCoord c) { return belief_.is_lethal(c); })) continue;
      const double d = distance(q, aim);
      if (d < best_d - 1e-9) {
        best_d = d;
        best_k = k;
      }
    }
    if (!std::isfinite(best_d)) {
      cycle_due_ = true;
      return Action{ActionKind::rotate_left};
    }
    if (best_k > 0) return Action{ActionKind::rotate_left};
    if (best_k < 0) return Action{ActionKind::rotate_right};
    return Action{ActionKind::forward};
  }

  std::optional<Action> decide(EpisodeResult& r) {
    if (goal_estimate_ && distance(st_.pose.position(), *goal_estimate_) <= spec_.stop_distance) return Action{ActionKind::stop};
    if (cycle_due_) {
      cycle_due_ = false;
      forward_since_cycle_ = 0;
      perceive(r);
      if (goal_estimate_ && distance(st_.pose.position(), *goal_estimate_) <= spec_.stop_distance)
        return Action{ActionKind::stop};
      if (spin_left_ > 0) {
        --spin_left_;
        return Action{ActionKind::rotate_left};
      }
      spin_left_ = -1;
      if (!replan()) {
        // Nothing to plan for. A full look-around may still reveal frontiers.
        if (idle_turns_ >= 12) return std::nullopt;
        ++idle_turns_;
        cycle_due_ = true;
        return Action{ActionKind::rotate_left};
      }
      idle_turns_ = 0;
    }
    if (auto a = follow_path()) {
      stalls_ = 0;
      return a;
    }
    // Path finished or empty: a reached frontier that persists is not worth revisiting.
    if (target_ && !goal_estimate_ && distance(st_.pose.position(), *target_) < 0.5) blacklist_.push_back(*target_);
    cycle_due_ = true;
    forward_since_cycle_ = 0;
    ++stalls_;
    if (stalls_ > 3) {
      stalls_ = 0;
      return Action{ActionKind::rotate_left};
    }
    return decide(r);
  }

  const World& world_;
  const EpisodeSpec& spec_;
  AgentStack& stack_;
  CostMap belief_;
  SemanticMap semantic_;
  AgentState st_;
  Observation obs_;
  std::vector<Point2> path_;
  std::size_t progress_ = 0;
  std::optional<Point2> goal_estimate_;
  std::optional<Point2> target_;
  std::vector<Point2> blacklist_;
  bool cycle_due_ = false;
  int forward_since_cycle_ = 0;
  int spin_left_ = 0;
  int idle_turns_ = 0;
  int stalls_ = 0;
};

}  // namespace detail

/// Runs one object-goal episode. The agent's belief map starts all unknown.
inline EpisodeResult run_episode(const World& world, const EpisodeSpec& spec, AgentStack& stack) {
  if (!stack.initiator || !stack.validator || !stack.policy) throw ScenarioInvalid("agent stack is incomplete");
  if (spec.goal_category.empty()) throw ScenarioInvalid("goal category is empty");
  const GridMeta& meta = world.truth.meta();
  if (!meta.contains(spec.start.position())) throw ScenarioInvalid("start pose outside the map");
  if (world.truth.is_lethal(world_to_grid(spec.start.position(), meta))) throw ScenarioInvalid("start pose is not traversable");
  if (std::none_of(world.objects.begin(), world.objects.end(), [&](const WorldObject& o) { return o.label == spec.goal_category; }))
    throw ScenarioInvalid("no '" + spec.goal_category + "' object in world " + world.name);
  if (oracle_shortest(world, spec.start.position(), spec.goal_category, spec.sim.success_radius) <= 0.0)
    throw ScenarioInvalid("start already lies within the success radius");
  return detail::EpisodeRunner(world, spec, stack).run();
}

}  // namespace navsim
