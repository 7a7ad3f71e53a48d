#pragma once

// Batch evaluation: SR/SPL metrics, scenario files, result CSVs and the
// parallel suite runner.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <map>
#include <mutex>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "navsim/commonsense.hpp"
#include "navsim/errors.hpp"
#include "navsim/map_io.hpp"
#include "navsim/perception.hpp"
#include "navsim/protocol.hpp"
#include "navsim/sim.hpp"

namespace navsim {

/// Success rate in percent.
inline double compute_sr(std::span<const EpisodeResult> results) {
  if (results.empty()) throw EmptyResults("no episodes");
  const auto n = std::count_if(results.begin(), results.end(), [](const EpisodeResult& r) { return r.success; });
  return 100.0 * static_cast<double>(n) / static_cast<double>(results.size());
}

/// Success weighted by path length in percent:
/// 100 / N * sum S_i * l_i / max(p_i, l_i).
inline double compute_spl(std::span<const EpisodeResult> results) {
  if (results.empty()) throw EmptyResults("no episodes");
  double sum = 0.0;
  for (const auto& r : results) {
    if (!(r.shortest > 0.0) && !std::isnan(r.shortest))
      throw InvalidShortest(r.world_name + ": shortest path length must be > 0");
    if (r.success) sum += r.shortest / std::max(r.traveled, r.shortest);
  }
  return 100.0 * sum / static_cast<double>(results.size());
}

// ---------------------------------------------------------------------------
// Result CSV

inline constexpr const char* kResultsHeader = "world,goal,success,traveled,shortest,steps,false_goal_events,seed";

inline std::string format_real(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

inline void write_results_csv(std::ostream& out, std::span<const EpisodeResult> results) {
  out << kResultsHeader << '\n';
  for (const auto& r : results) {
    out << r.world_name << ',' << r.goal_category << ',' << (r.success ? 1 : 0) << ',' << format_real(r.traveled) << ','
        << format_real(r.shortest) << ',' << r.steps << ',' << r.false_goal_events << ',' << r.seed << '\n';
  }
}

inline std::vector<EpisodeResult> read_results_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != kResultsHeader) throw ScenarioInvalid("results file lacks the expected header");
  std::vector<EpisodeResult> out;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::stringstream ss(line);
    for (std::string cell; std::getline(ss, cell, ',');) f.push_back(cell);
    if (f.size() != 8) throw ScenarioInvalid("malformed results row: " + line);
    EpisodeResult r;
    r.world_name = f[0];
    r.goal_category = f[1];
    r.success = f[2] == "1";
    r.traveled = std::strtod(f[3].c_str(), nullptr);
    r.shortest = std::strtod(f[4].c_str(), nullptr);
    r.steps = std::stoi(f[5]);
    r.false_goal_events = std::stoi(f[6]);
    r.seed = std::stoull(f[7]);
    out.push_back(std::move(r));
  }
  return out;
}

/// SR/SPL per goal category plus an overall row.
inline std::string summary_table(std::span<const EpisodeResult> results) {
  std::map<std::string, std::vector<EpisodeResult>> groups;
  for (const auto& r : results) groups[r.goal_category].push_back(r);
  std::ostringstream os;
  os << std::left << std::setw(18) << "goal" << std::right << std::setw(9) << "episodes" << std::setw(9) << "SR"
     << std::setw(9) << "SPL" << '\n';
  auto row = [&](const std::string& name, std::span<const EpisodeResult> rs) {
    os << std::left << std::setw(18) << name << std::right << std::setw(9) << rs.size() << std::fixed
       << std::setprecision(1) << std::setw(9) << compute_sr(rs) << std::setw(9) << compute_spl(rs) << '\n';
  };
  for (const auto& [goal, rs] : groups) row(goal, rs);
  if (!results.empty()) row("all", results);
  return os.str();
}

// ---------------------------------------------------------------------------
// Scenarios

enum class PerceptionMode { mock, replay, wire };
enum class ValidatorMode { mock, agree, disagree };

struct PerceptionSpec {
  PerceptionMode mode = PerceptionMode::mock;
  MockInitiatorParams initiator{};
  MockValidatorParams validator{};
  ValidatorMode validator_mode = ValidatorMode::mock;
  VerificationConfig verification{};
  std::string endpoint;
  std::filesystem::path transcript;
};

struct Scenario {
  std::filesystem::path source;
  std::string name;
  std::filesystem::path map;
  Pose start;
  std::string goal_category;
  std::vector<WorldObject> objects;
  std::uint64_t seed = 0;
  PerceptionSpec perception;
  PlannerKind planner = PlannerKind::medial;
  int max_steps = 500;
  std::size_t min_cluster_size = kDefaultMinClusterSize;
  PolicyConfig policy{};
  std::filesystem::path cooc;  // empty: built-in table
};

/// Command-line overrides applied on top of every scenario of a suite.
struct SuiteOverrides {
  std::optional<std::uint64_t> seed;
  std::optional<PlannerKind> planner;
  std::optional<PerceptionMode> perception;
  std::optional<ValidatorMode> validator;
  std::optional<std::string> endpoint;
  std::optional<std::filesystem::path> cooc;
  std::optional<int> max_steps;
  unsigned threads = 0;  // 0: hardware concurrency
};

inline PlannerKind parse_planner(const std::string& s) {
  if (s == "medial") return PlannerKind::medial;
  if (s == "fmm") return PlannerKind::fmm;
  throw ScenarioInvalid("unknown planner '" + s + "'");
}

inline PerceptionMode parse_perception_mode(const std::string& s) {
  if (s == "mock") return PerceptionMode::mock;
  if (s == "replay") return PerceptionMode::replay;
  if (s == "wire") return PerceptionMode::wire;
  throw ScenarioInvalid("unknown perception mode '" + s + "'");
}

inline ValidatorMode parse_validator_mode(const std::string& s) {
  if (s == "mock") return ValidatorMode::mock;
  if (s == "agree" || s == "none") return ValidatorMode::agree;
  if (s == "disagree") return ValidatorMode::disagree;
  throw ScenarioInvalid("unknown validator mode '" + s + "'");
}

inline Scenario parse_scenario(const nlohmann::json& j, const std::filesystem::path& source = {}) {
  using nlohmann::json;
  const auto base = source.empty() ? std::filesystem::path{} : source.parent_path();
  auto resolve = [&](const std::string& p) { return std::filesystem::path(p).is_absolute() ? std::filesystem::path(p) : base / p; };
  Scenario s;
  try {
    s.source = source;
    s.map = resolve(j.at("map").get<std::string>());
    s.name = j.value("name", s.map.stem().string());
    const auto& st = j.at("start");
    if (!st.is_array() || st.size() != 3) throw ScenarioInvalid("start must be [x, y, theta]");
    s.start = Pose(st[0].get<double>(), st[1].get<double>(), st[2].get<double>());
    s.goal_category = j.at("goal_category").get<std::string>();
    for (const auto& o : j.value("objects", json::array())) {
      const auto& pos = o.at("position");
      s.objects.push_back({o.at("label").get<std::string>(), {pos.at(0).get<double>(), pos.at(1).get<double>()}});
    }
    if (auto seeds = j.find("seeds"); seeds != j.end()) s.seed = seeds->value("episode", std::uint64_t{0});
    if (auto p = j.find("perception"); p != j.end()) {
      auto& ps = s.perception;
      ps.mode = parse_perception_mode(p->value("mode", std::string("mock")));
      ps.initiator.tpr = p->value("tpr", 1.0);
      ps.initiator.fpr = p->value("fpr", 0.0);
      ps.validator.catch_rate = p->value("catch_rate", 1.0);
      ps.validator.accept_rate = p->value("accept_rate", 1.0);
      ps.validator_mode = parse_validator_mode(p->value("validator", std::string("mock")));
      ps.verification.max_reassessments = p->value("max_reassessments", 2);
      ps.verification.accept_empty = p->value("accept_empty", false);
      ps.endpoint = p->value("endpoint", std::string());
      if (p->contains("transcript")) ps.transcript = resolve(p->at("transcript").get<std::string>());
    }
    s.planner = parse_planner(j.value("planner", std::string("medial")));
    s.max_steps = j.value("max_steps", 500);
    s.min_cluster_size = j.value("min_cluster_size", kDefaultMinClusterSize);
    if (auto p = j.find("policy"); p != j.end()) {
      s.policy.semantic_weight = p->value("semantic_weight", s.policy.semantic_weight);
      s.policy.distance_weight = p->value("distance_weight", s.policy.distance_weight);
      s.policy.influence_radius = p->value("influence_radius", s.policy.influence_radius);
    }
    if (j.contains("cooc")) s.cooc = resolve(j.at("cooc").get<std::string>());
  } catch (const json::exception& e) {
    throw ScenarioInvalid((source.empty() ? std::string("scenario") : source.string()) + ": " + e.what());
  }
  if (s.goal_category.empty()) throw ScenarioInvalid("goal_category is empty");
  if (s.max_steps < 1) throw ScenarioInvalid("max_steps must be >= 1");
  if (!s.policy.valid()) throw ScenarioInvalid("policy weights must be finite and nonnegative");
  return s;
}

inline Scenario load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ScenarioInvalid("cannot open scenario " + path.string());
  try {
    return parse_scenario(nlohmann::json::parse(in), path);
  } catch (const nlohmann::json::exception& e) {
    throw ScenarioInvalid(path.string() + ": " + e.what());
  }
}

inline void apply_overrides(Scenario& s, const SuiteOverrides& o) {
  if (o.seed) s.seed = *o.seed;
  if (o.planner) s.planner = *o.planner;
  if (o.perception) s.perception.mode = *o.perception;
  if (o.validator) s.perception.validator_mode = *o.validator;
  if (o.endpoint) s.perception.endpoint = *o.endpoint;
  if (o.cooc) s.cooc = *o.cooc;
  if (o.max_steps) s.max_steps = *o.max_steps;
}

inline World load_world(const Scenario& s) {
  World w;
  w.name = s.name;
  try {
    w.truth = load_map(s.map);
  } catch (const MapFormatError& e) {
    throw ScenarioInvalid(e.what());
  }
  w.objects = s.objects;
  w.validate_objects();
  return w;
}

inline AgentStack build_stack(const Scenario& s) {
  AgentStack stack;
  const auto& p = s.perception;
  auto rng = std::make_shared<EpisodeRng>(s.seed);
  switch (p.mode) {
    case PerceptionMode::mock:
      stack.initiator = std::make_unique<MockInitiator>(p.initiator, rng);
      stack.validator = std::make_unique<MockValidator>(p.validator, rng);
      break;
    case PerceptionMode::replay: {
      if (p.transcript.empty()) throw ScenarioInvalid("replay perception needs a transcript");
      const protocol::ReplayBackend replay(protocol::load_transcript(p.transcript));
      stack.initiator = replay.initiator();
      stack.validator = replay.validator();
      break;
    }
    case PerceptionMode::wire: {
      if (p.endpoint.empty()) throw ScenarioInvalid("wire perception needs an endpoint");
      auto client = std::make_shared<protocol::WireClient>(p.endpoint);
      stack.initiator = std::make_unique<protocol::WireInitiator>(client);
      stack.validator = std::make_unique<protocol::WireValidator>(client);
      break;
    }
  }
  if (p.validator_mode == ValidatorMode::agree) stack.validator = std::make_unique<FixedValidator>(Decision::agree);
  if (p.validator_mode == ValidatorMode::disagree) stack.validator = std::make_unique<FixedValidator>(Decision::disagree);
  stack.verification = p.verification;
  stack.planner = s.planner;
  stack.min_cluster_size = s.min_cluster_size;
  std::shared_ptr<const CoOccurrenceTable> table;
  try {
    table = std::make_shared<const CoOccurrenceTable>(s.cooc.empty() ? CoOccurrenceTable::defaults()
                                                                      : CoOccurrenceTable::load(s.cooc));
  } catch (const TableFormatError& e) {
    throw ScenarioInvalid(e.what());
  }
  stack.context_prompts = table->contexts_for(s.goal_category);
  stack.policy = std::make_shared<TablePolicy>(table, s.policy);
  return stack;
}

inline EpisodeSpec episode_spec(const Scenario& s) {
  EpisodeSpec e;
  e.start = s.start;
  e.goal_category = s.goal_category;
  e.seed = s.seed;
  e.sim.max_steps = s.max_steps;
  return e;
}

/// Loads and runs one scenario. Failures become a failed result row.
inline EpisodeResult run_scenario(Scenario s) {
  try {
    const World world = load_world(s);
    AgentStack stack = build_stack(s);
    return run_episode(world, episode_spec(s), stack);
  } catch (const Error& e) {
    EpisodeResult r;
    r.world_name = s.name;
    r.goal_category = s.goal_category;
    r.seed = s.seed;
    r.shortest = std::numeric_limits<double>::quiet_NaN();
    r.termination = std::string("error:") + e.what();
    return r;
  }
}

/// Expands directories into their *.json scenario files (sorted).
inline std::vector<std::filesystem::path> expand_scenario_paths(std::span<const std::filesystem::path> inputs) {
  std::vector<std::filesystem::path> out;
  for (const auto& p : inputs) {
    if (std::filesystem::is_directory(p)) {
      std::vector<std::filesystem::path> found;
      for (const auto& e : std::filesystem::directory_iterator(p))
        if (e.is_regular_file() && e.path().extension() == ".json") found.push_back(e.path());
      std::sort(found.begin(), found.end());
      out.insert(out.end(), found.begin(), found.end());
    } else {
      out.push_back(p);
    }
  }
  return out;
}

struct SuiteReport {
  std::vector<EpisodeResult> results;  // in scenario order
  std::string summary;
};

/// Runs every scenario (in parallel), writing results.csv, summary.txt and
/// per-episode traces under out_dir when it is nonempty.
inline SuiteReport run_suite(std::span<const std::filesystem::path> scenario_paths, const SuiteOverrides& overrides,
                             const std::filesystem::path& out_dir = {}) {
  const auto paths = expand_scenario_paths(scenario_paths);
  if (paths.empty()) throw EmptyResults("no scenarios to run");
  std::vector<EpisodeResult> results(paths.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i; (i = next.fetch_add(1)) < paths.size();) {
      Scenario s;
      try {
        s = load_scenario(paths[i]);
      } catch (const Error& e) {
        results[i].world_name = paths[i].stem().string();
        results[i].goal_category = "?";
        results[i].shortest = std::numeric_limits<double>::quiet_NaN();
        results[i].termination = std::string("error:") + e.what();
        continue;
      }
      apply_overrides(s, overrides);
      results[i] = run_scenario(std::move(s));
    }
  };
  unsigned n = overrides.threads ? overrides.threads : std::max(1u, std::thread::hardware_concurrency());
  n = std::min<unsigned>(n, static_cast<unsigned>(paths.size()));
  std::vector<std::thread> pool;
  for (unsigned t = 1; t < n; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();

  SuiteReport report{std::move(results), {}};
  report.summary = summary_table(report.results);
  if (!out_dir.empty()) {
    std::filesystem::create_directories(out_dir / "traces");
    std::ofstream csv(out_dir / "results.csv");
    write_results_csv(csv, report.results);
    std::ofstream(out_dir / "summary.txt") << report.summary;
    for (const auto& r : report.results) {
      std::ofstream tr(out_dir / "traces" / (r.world_name + ".csv"));
      tr << "step,x,y,theta\n";
      for (std::size_t k = 0; k < r.trace.size(); ++k)
        tr << k << ',' << format_real(r.trace[k].x) << ',' << format_real(r.trace[k].y) << ','
           << format_real(r.trace[k].theta) << '\n';
    }
  }
  return report;
}

}  // namespace navsim
