#pragma once

// Commonsense frontier selection. A goal/context co-occurrence table stands
// in for language-model reasoning: frontiers near semantically related labels
// score higher, distant frontiers are penalised.

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <memory>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "navsim/errors.hpp"
#include "navsim/frontier.hpp"
#include "navsim/grid.hpp"

namespace navsim {

class CoOccurrenceTable {
 public:
  void set(const std::string& goal, const std::string& context, double affinity) {
    if (!(affinity >= 0.0 && affinity <= 1.0)) throw TableFormatError("affinity must lie in [0, 1]");
    entries_[{goal, context}] = affinity;
  }

  /// Missing pairs have affinity 0.
  double affinity(const std::string& goal, const std::string& context) const {
    auto it = entries_.find({goal, context});
    return it == entries_.end() ? 0.0 : it->second;
  }

  /// Context labels with a nonzero affinity for any goal, sorted.
  std::vector<std::string> context_labels() const {
    std::vector<std::string> out;
    for (const auto& [key, v] : entries_)
      if (v > 0.0) out.push_back(key.second);
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
  }

  /// Context labels with a nonzero affinity for `goal`, sorted.
  std::vector<std::string> contexts_for(const std::string& goal) const {
    std::vector<std::string> out;
    for (const auto& [key, v] : entries_)
      if (key.first == goal && v > 0.0) out.push_back(key.second);
    return out;
  }

  std::size_t size() const { return entries_.size(); }

  /// One `goal,context,affinity` triple per line; blank lines and lines
  /// starting with '#' are skipped. Fields are trimmed.
  static CoOccurrenceTable parse(std::istream& in) {
    CoOccurrenceTable t;
    std::string line;
    int lineno = 0;
    auto trim = [](std::string s) {
      const auto b = s.find_first_not_of(" \t\r");
      const auto e = s.find_last_not_of(" \t\r");
      return b == std::string::npos ? std::string{} : s.substr(b, e - b + 1);
    };
    while (std::getline(in, line)) {
      ++lineno;
      line = trim(line);
      if (line.empty() || line[0] == '#') continue;
      const auto c1 = line.find(',');
      const auto c2 = c1 == std::string::npos ? c1 : line.find(',', c1 + 1);
      if (c2 == std::string::npos || line.find(',', c2 + 1) != std::string::npos)
        throw TableFormatError("line " + std::to_string(lineno) + ": expected goal,context,affinity");
      const std::string goal = trim(line.substr(0, c1));
      const std::string context = trim(line.substr(c1 + 1, c2 - c1 - 1));
      const std::string value = trim(line.substr(c2 + 1));
      double affinity = 0.0;
      try {
        std::size_t used = 0;
        affinity = std::stod(value, &used);
        if (used != value.size()) throw std::invalid_argument(value);
      } catch (const std::exception&) {
        throw TableFormatError("line " + std::to_string(lineno) + ": bad affinity '" + value + "'");
      }
      if (goal.empty() || context.empty()) throw TableFormatError("line " + std::to_string(lineno) + ": empty label");
      try {
        t.set(goal, context, affinity);
      } catch (const TableFormatError& e) {
        throw TableFormatError("line " + std::to_string(lineno) + ": " + e.what());
      }
    }
    return t;
  }

  static CoOccurrenceTable load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw TableFormatError("cannot open " + path.string());
    return parse(in);
  }

  /// Table shipped with the library; values are editable config, not ground truth.
  static CoOccurrenceTable defaults() {
    static constexpr const char* kDefault =
        "remote,television,0.9\n"
        "remote,sofa,0.8\n"
        "remote,living room,0.8\n"
        "remote,coffee table,0.7\n"
        "trash can,kitchen,0.7\n"
        "trash can,bathroom,0.7\n"
        "trash can,sink,0.5\n"
        "trash can,refrigerator,0.5\n"
        "mug,kitchen,0.8\n"
        "mug,coffee machine,0.9\n"
        "mug,refrigerator,0.5\n"
        "mug,dining table,0.6\n"
        "pillow,bed,0.9\n"
        "pillow,bedroom,0.8\n"
        "pillow,sofa,0.5\n"
        "laptop,desk,0.9\n"
        "laptop,office,0.8\n"
        "towel,bathroom,0.9\n"
        "towel,sink,0.6\n"
        "plant,living room,0.5\n"
        "plant,window,0.6\n"
        "book,bookshelf,0.9\n"
        "book,office,0.6\n"
        "book,bedroom,0.4\n";
    std::istringstream in(kDefault);
    return parse(in);
  }

 private:
  std::map<std::pair<std::string, std::string>, double> entries_;
};

struct PolicyConfig {
  double semantic_weight = 1.0;
  double distance_weight = 0.2;
  double influence_radius = 3.0;  // meters

  bool valid() const {
    return std::isfinite(semantic_weight) && std::isfinite(distance_weight) && std::isfinite(influence_radius) &&
           semantic_weight >= 0.0 && distance_weight >= 0.0 && influence_radius >= 0.0;
  }
};

/// score = w_s * max(affinity(goal, label) * confidence) over labeled cells
/// within the influence radius of the centroid, minus w_d * robot distance.
inline double score_frontier(const Frontier& f, const SemanticMap& sm, const std::string& goal,
                             const CoOccurrenceTable& table, const PolicyConfig& cfg, const Pose& robot) {
  double semantic = 0.0;
  sm.for_each([&](GridCoord c, const SemanticMap::Labels& labels) {
    if (distance(grid_to_world(c, sm.meta()), f.centroid) > cfg.influence_radius) return;
    for (const auto& [label, conf] : labels) semantic = std::max(semantic, table.affinity(goal, label) * conf);
  });
  return cfg.semantic_weight * semantic - cfg.distance_weight * distance(robot.position(), f.centroid);
}

/// Index of the best-scoring frontier; ties go to the larger frontier, then
/// the lexicographically smaller centroid.
inline std::size_t select_frontier_index(std::span<const Frontier> frontiers, std::span<const double> scores) {
  if (frontiers.empty()) throw NoFrontiers("no frontiers left to explore");
  if (frontiers.size() != scores.size()) throw std::invalid_argument("frontiers and scores differ in length");
  std::size_t best = 0;
  for (std::size_t i = 1; i < frontiers.size(); ++i) {
    const auto& a = frontiers[i];
    const auto& b = frontiers[best];
    if (scores[i] != scores[best]) {
      if (scores[i] > scores[best]) best = i;
    } else if (a.size != b.size) {
      if (a.size > b.size) best = i;
    } else if (std::pair{a.centroid.x, a.centroid.y} < std::pair{b.centroid.x, b.centroid.y}) {
      best = i;
    }
  }
  return best;
}

inline const Frontier& select_frontier(std::span<const Frontier> frontiers, std::span<const double> scores) {
  return frontiers[select_frontier_index(frontiers, scores)];
}

/// Frontier-selection policy seam. The table-backed policy is the default; a
/// language-model scorer can be dropped in without touching the simulator.
class FrontierPolicy {
 public:
  virtual ~FrontierPolicy() = default;
  virtual double score(const Frontier& f, const SemanticMap& sm, const std::string& goal, const Pose& robot) const = 0;

  /// Scores every frontier in place and returns the selected index.
  std::size_t choose(std::vector<Frontier>& frontiers, const SemanticMap& sm, const std::string& goal,
                     const Pose& robot) const {
    std::vector<double> scores;
    scores.reserve(frontiers.size());
    for (auto& f : frontiers) {
      f.score = score(f, sm, goal, robot);
      scores.push_back(f.score);
    }
    return select_frontier_index(frontiers, scores);
  }
};

class TablePolicy final : public FrontierPolicy {
 public:
  TablePolicy(std::shared_ptr<const CoOccurrenceTable> table, PolicyConfig cfg) : table_(std::move(table)), cfg_(cfg) {
    if (!cfg_.valid()) throw std::invalid_argument("policy weights must be finite and nonnegative");
  }
  double score(const Frontier& f, const SemanticMap& sm, const std::string& goal, const Pose& robot) const override {
    return score_frontier(f, sm, goal, *table_, cfg_, robot);
  }
  const CoOccurrenceTable& table() const { return *table_; }
  const PolicyConfig& config() const { return cfg_; }

 private:
  std::shared_ptr<const CoOccurrenceTable> table_;
  PolicyConfig cfg_;
};

}  // namespace navsim
