#include <gtest/gtest.h>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <sys/wait.h>

#include "navsim/harness.hpp"
#include "oracles.hpp"

using namespace navsim;
namespace fs = std::filesystem;

namespace {

EpisodeResult result(bool success, double traveled, double shortest, const std::string& goal = "remote") {
  EpisodeResult r;
  r.success = success;
  r.traveled = traveled;
  r.shortest = shortest;
  r.world_name = "w";
  r.goal_category = goal;
  return r;
}

std::vector<EpisodeResult> random_results(oracle::Rng& rng) {
  std::vector<EpisodeResult> rs;
  const int n = rng.uniform_int(1, 40);
  for (int i = 0; i < n; ++i) {
    const double l = rng.uniform(0.1, 20.0);
    const double p = rng.chance(0.2) ? rng.uniform(0.0, l) : l + rng.uniform(0.0, 30.0);
    EpisodeResult r = result(rng.chance(0.6), p, l, rng.chance(0.5) ? "remote" : "mug");
    r.world_name = "world_" + std::to_string(i);
    r.steps = rng.uniform_int(0, 500);
    r.false_goal_events = rng.uniform_int(0, 3);
    r.seed = static_cast<std::uint64_t>(rng.uniform_int(0, 1000000));
    rs.push_back(r);
  }
  return rs;
}

fs::path temp_dir(const std::string& name) {
  const fs::path d = fs::temp_directory_path() / ("navsim_test_" + name + "_" + std::to_string(::getpid()));
  fs::remove_all(d);
  fs::create_directories(d);
  return d;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string(NAVSIM_CLI) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

const nlohmann::json kMinimalScenario = {
    {"map", "living_room_remote.pgm"}, {"start", {1.0, 1.0, 0.0}}, {"goal_category", "remote"}};

}  // namespace

// ---------------------------------------------------------------------------
// Metrics

TEST(Metrics, SuccessRateExamples) {
  const std::vector<EpisodeResult> half{result(true, 1, 1), result(true, 1, 1), result(false, 1, 1), result(false, 1, 1)};
  EXPECT_DOUBLE_EQ(compute_sr(half), 50.0);
  const std::vector<EpisodeResult> all{result(true, 1, 1), result(true, 2, 1)};
  EXPECT_DOUBLE_EQ(compute_sr(all), 100.0);
  const std::vector<EpisodeResult> none{result(false, 1, 1)};
  EXPECT_DOUBLE_EQ(compute_sr(none), 0.0);
  EXPECT_THROW(compute_sr({}), EmptyResults);
}

TEST(Metrics, SplExamples) {
  EXPECT_NEAR(compute_spl(std::vector<EpisodeResult>{result(true, 3.7, 3.7)}), 100.0, 1e-9);
  EXPECT_NEAR(compute_spl(std::vector<EpisodeResult>{result(false, 3.7, 3.7)}), 0.0, 1e-9);
  EXPECT_NEAR(compute_spl(std::vector<EpisodeResult>{result(true, 5.0, 4.0)}), 80.0, 1e-9);
  // A path shorter than the oracle cannot score above 1.
  EXPECT_NEAR(compute_spl(std::vector<EpisodeResult>{result(true, 3.0, 4.0)}), 100.0, 1e-9);
  EXPECT_NEAR(compute_spl(std::vector<EpisodeResult>{result(true, 5.0, 4.0), result(false, 1.0, 1.0)}), 40.0, 1e-9);
}

TEST(Metrics, SplErrors) {
  EXPECT_THROW(compute_spl({}), EmptyResults);
  EXPECT_THROW(compute_spl(std::vector<EpisodeResult>{result(true, 1.0, 0.0)}), InvalidShortest);
  EXPECT_THROW(compute_spl(std::vector<EpisodeResult>{result(false, 1.0, -2.0)}), InvalidShortest);
}

TEST(Metrics, SplBoundedBySuccessRate) {
  oracle::Rng rng(21);
  for (int k = 0; k < 1000; ++k) {
    const auto rs = random_results(rng);
    const double sr = compute_sr(rs), spl = compute_spl(rs);
    ASSERT_GE(spl, 0.0);
    ASSERT_LE(spl, sr + 1e-9);
    ASSERT_LE(sr, 100.0);
  }
}

TEST(Metrics, SplPermutationInvariant) {
  oracle::Rng rng(22);
  std::mt19937 shuffle(22);
  for (int k = 0; k < 200; ++k) {
    auto rs = random_results(rng);
    const double before = compute_spl(rs);
    std::shuffle(rs.begin(), rs.end(), shuffle);
    EXPECT_NEAR(compute_spl(rs), before, 1e-9);
  }
}

// ---------------------------------------------------------------------------
// Result files

TEST(ResultsCsv, RoundTripPreservesMetrics) {
  oracle::Rng rng(23);
  for (int k = 0; k < 100; ++k) {
    const auto rs = random_results(rng);
    std::stringstream buf;
    write_results_csv(buf, rs);
    const auto back = read_results_csv(buf);
    ASSERT_EQ(back.size(), rs.size());
    EXPECT_NEAR(compute_sr(back), compute_sr(rs), 1e-12);
    EXPECT_NEAR(compute_spl(back), compute_spl(rs), 1e-4);
    for (std::size_t i = 0; i < rs.size(); ++i) {
      EXPECT_EQ(back[i].world_name, rs[i].world_name);
      EXPECT_EQ(back[i].success, rs[i].success);
      EXPECT_EQ(back[i].steps, rs[i].steps);
      EXPECT_EQ(back[i].seed, rs[i].seed);
    }
  }
}

TEST(ResultsCsv, HeaderAndRejects) {
  std::stringstream buf;
  write_results_csv(buf, std::vector<EpisodeResult>{result(true, 5.0, 4.0)});
  EXPECT_EQ(buf.str(), std::string(kResultsHeader) + "\nw,remote,1,5.000000,4.000000,0,0,0\n");
  std::stringstream no_header("w,remote,1,5,4,0,0,0\n");
  EXPECT_THROW(read_results_csv(no_header), ScenarioInvalid);
  std::stringstream short_row(std::string(kResultsHeader) + "\nw,remote,1\n");
  EXPECT_THROW(read_results_csv(short_row), ScenarioInvalid);
}

TEST(ResultsCsv, SummaryGroupsByGoal) {
  const std::vector<EpisodeResult> rs{result(true, 5.0, 4.0, "remote"), result(false, 1.0, 1.0, "remote"),
                                      result(true, 2.0, 2.0, "mug")};
  const std::string table = summary_table(rs);
  EXPECT_NE(table.find("mug                       1    100.0    100.0"), std::string::npos) << table;
  EXPECT_NE(table.find("remote                    2     50.0     40.0"), std::string::npos) << table;
  EXPECT_NE(table.find("all                       3     66.7     60.0"), std::string::npos) << table;
}

// ---------------------------------------------------------------------------
// Scenarios

TEST(Scenario, ParsesBundledFile) {
  const Scenario s = load_scenario(fs::path(NAVSIM_WORLDS) / "mug_next_to_start.json");
  EXPECT_EQ(s.name, "mug_next_to_start");
  EXPECT_EQ(s.goal_category, "mug");
  EXPECT_EQ(s.seed, 13u);
  EXPECT_EQ(s.objects.size(), 3u);
  EXPECT_EQ(s.map, fs::path(NAVSIM_WORLDS) / "mug_next_to_start.pgm");
  EXPECT_EQ(s.planner, PlannerKind::medial);
  const World w = load_world(s);
  EXPECT_EQ(w.objects.size(), 3u);
}

TEST(Scenario, Defaults) {
  const Scenario s = parse_scenario(kMinimalScenario);
  EXPECT_EQ(s.max_steps, 500);
  EXPECT_EQ(s.perception.mode, PerceptionMode::mock);
  EXPECT_EQ(s.perception.validator_mode, ValidatorMode::mock);
  EXPECT_EQ(s.name, "living_room_remote");
}

TEST(Scenario, RejectsInvalidInput) {
  auto with = [](const std::string& key, nlohmann::json v) {
    nlohmann::json j = kMinimalScenario;
    j[key] = std::move(v);
    return j;
  };
  EXPECT_THROW(parse_scenario(nlohmann::json::object()), ScenarioInvalid);
  EXPECT_THROW(parse_scenario(with("start", {1.0, 2.0})), ScenarioInvalid);
  EXPECT_THROW(parse_scenario(with("start", "origin")), ScenarioInvalid);
  EXPECT_THROW(parse_scenario(with("goal_category", "")), ScenarioInvalid);
  EXPECT_THROW(parse_scenario(with("max_steps", 0)), ScenarioInvalid);
  EXPECT_THROW(parse_scenario(with("planner", "rrt")), ScenarioInvalid);
  EXPECT_THROW(parse_scenario(with("perception", {{"mode", "psychic"}})), ScenarioInvalid);
  EXPECT_THROW(parse_scenario(with("policy", {{"distance_weight", -1.0}})), ScenarioInvalid);
  EXPECT_THROW(load_scenario("/nonexistent/scenario.json"), ScenarioInvalid);
}

TEST(Scenario, OverridesApply) {
  Scenario s = parse_scenario(kMinimalScenario);
  SuiteOverrides o;
  o.seed = 99;
  o.planner = PlannerKind::fmm;
  o.validator = ValidatorMode::disagree;
  o.max_steps = 12;
  apply_overrides(s, o);
  EXPECT_EQ(s.seed, 99u);
  EXPECT_EQ(s.planner, PlannerKind::fmm);
  EXPECT_EQ(s.perception.validator_mode, ValidatorMode::disagree);
  EXPECT_EQ(s.max_steps, 12);
}

TEST(Scenario, ErrorsBecomeFailedRows) {
  Scenario s = parse_scenario(kMinimalScenario, fs::path(NAVSIM_WORLDS) / "x.json");
  s.goal_category = "unicorn";
  const EpisodeResult r = run_scenario(s);
  EXPECT_FALSE(r.success);
  EXPECT_EQ(r.termination.rfind("error:", 0), 0u) << r.termination;
}

// ---------------------------------------------------------------------------
// Suite

TEST(Suite, BundledWorldsPerfectPerception) {
  const fs::path out = temp_dir("suite");
  const std::vector<fs::path> inputs{NAVSIM_WORLDS};
  const SuiteReport report = run_suite(inputs, {}, out);
  ASSERT_EQ(report.results.size(), 10u);
  EXPECT_DOUBLE_EQ(compute_sr(report.results), 100.0);
  EXPECT_GE(compute_spl(report.results), 50.0);
  for (const auto& r : report.results) EXPECT_TRUE(fs::exists(out / "traces" / (r.world_name + ".csv")));
  EXPECT_EQ(slurp(out / "summary.txt"), report.summary);
  std::ifstream csv(out / "results.csv");
  const auto back = read_results_csv(csv);
  EXPECT_NEAR(compute_spl(back), compute_spl(report.results), 1e-3);

  const fs::path golden = fs::path(NAVSIM_TEST_DATA) / "golden" / "suite_summary.txt";
  if (std::getenv("NAVSIM_REGEN_GOLDEN")) std::ofstream(golden) << report.summary;
  EXPECT_EQ(report.summary, slurp(golden));
  fs::remove_all(out);
}

TEST(Suite, AlwaysDisagreeNeverSucceeds) {
  SuiteOverrides o;
  o.validator = ValidatorMode::disagree;
  const std::vector<fs::path> inputs{NAVSIM_WORLDS};
  const SuiteReport report = run_suite(inputs, o);
  EXPECT_DOUBLE_EQ(compute_sr(report.results), 0.0);
}

TEST(Suite, Empty) {
  const fs::path empty = temp_dir("empty");
  const std::vector<fs::path> inputs{empty};
  EXPECT_THROW(run_suite(inputs, {}), EmptyResults);
  fs::remove_all(empty);
}

TEST(Suite, BrokenScenarioIsRecordedAndSuiteContinues) {
  const fs::path dir = temp_dir("broken");
  std::ofstream(dir / "a_broken.json") << "{ not json";
  nlohmann::json good = nlohmann::json::parse(slurp(fs::path(NAVSIM_WORLDS) / "mug_next_to_start.json"));
  good["map"] = (fs::path(NAVSIM_WORLDS) / "mug_next_to_start.pgm").string();
  good["cooc"] = (fs::path(NAVSIM_WORLDS) / ".." / "data" / "cooccurrence.csv").string();
  std::ofstream(dir / "b_good.json") << good.dump();
  const std::vector<fs::path> inputs{dir};
  const SuiteReport report = run_suite(inputs, {});
  ASSERT_EQ(report.results.size(), 2u);
  EXPECT_FALSE(report.results[0].success);
  EXPECT_EQ(report.results[0].termination.rfind("error:", 0), 0u);
  EXPECT_TRUE(report.results[1].success);
  EXPECT_DOUBLE_EQ(compute_sr(report.results), 50.0);
  fs::remove_all(dir);
}

// ---------------------------------------------------------------------------
// Command line

TEST(Cli, ExitCodes) {
  const fs::path out = temp_dir("cli");
  const std::string worlds = NAVSIM_WORLDS;
  EXPECT_EQ(run_cli("run --scenario " + worlds + "/mug_next_to_start.json --out " + out.string()), 0);
  EXPECT_TRUE(fs::exists(out / "results.csv"));
  EXPECT_EQ(run_cli("eval --results " + out.string()), 0);
  EXPECT_EQ(run_cli("run --scenario /nonexistent.json"), 2);
  EXPECT_EQ(run_cli("run --scenario " + worlds + " --planner rrt"), 2);
  EXPECT_EQ(run_cli("run"), 2);
  EXPECT_EQ(run_cli("bogus"), 2);
  EXPECT_EQ(run_cli("plan --map /nonexistent.pgm --start 1,1 --goal 2,2"), 2);
  EXPECT_EQ(run_cli("plan --map " + worlds + "/office_book.pgm --start 1,1 --goal oops"), 2);
  EXPECT_EQ(run_cli("frontiers --map " + worlds + "/office_book.pgm"), 0);
  EXPECT_EQ(run_cli("eval --results /nonexistent"), 2);
  fs::remove_all(out);
}
