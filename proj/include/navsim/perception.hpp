#pragma once

// "Doubly Right" verification: an initiator proposes detections for the goal
// prompts, a validator agrees or asks for a reassessment, and only an agreed,
// nonempty detection set raises the goal flag.

#include <cmath>
#include <cstdint>
#include <memory>
#include <optional>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "navsim/detection.hpp"
#include "navsim/errors.hpp"
#include "navsim/grid.hpp"

namespace navsim {

/// Ground-truth view of an object from the sensor. Only mock backends read it.
struct VisibleObject {
  std::string label;
  double bearing = 0.0;  // radians, left positive
  double range = 0.0;    // meters
};

struct Observation {
  std::string image_ref;
  DepthScan depth;
  Pose pose;
  std::int64_t step = 0;
  std::vector<VisibleObject> visible;
};

struct PromptSet {
  std::vector<std::string> object_prompts;
  std::string validation_prompt;

  bool valid() const { return !object_prompts.empty(); }
};

enum class Decision { agree, disagree };

struct Verdict {
  Decision decision = Decision::disagree;
  std::optional<std::string> rationale;
};

struct VerificationOutcome {
  bool goal = false;
  std::vector<Detection> accepted;
  int attempts = 0;
  std::optional<Decision> last_decision;
};

class Initiator {
 public:
  virtual ~Initiator() = default;
  virtual std::vector<Detection> detect(const Observation& obs, const PromptSet& prompts) = 0;
};

class Validator {
 public:
  virtual ~Validator() = default;
  virtual Verdict validate(const Observation& obs, std::span<const Detection> dets, const std::string& prompt) = 0;
};

inline std::vector<Detection> initiate(const Observation& obs, const PromptSet& prompts, Initiator& backend) {
  if (!prompts.valid()) throw std::invalid_argument("prompt set needs at least one object prompt");
  return backend.detect(obs, prompts);
}

inline Verdict validate(const Observation& obs, std::span<const Detection> dets, const std::string& prompt,
                        Validator& backend) {
  return backend.validate(obs, dets, prompt);
}

struct VerificationConfig {
  int max_reassessments = 2;
  /// Raise the goal flag on validator agreement even for an empty detection
  /// set, as the original loop does. Off by default.
  bool accept_empty = false;
};

/// Runs initiator -> validator, re-querying the initiator on the same
/// observation after each disagreement, at most max_reassessments times.
inline VerificationOutcome doubly_right(const Observation& obs, const PromptSet& prompts, Initiator& init,
                                        Validator& val, const VerificationConfig& cfg = {}) {
  if (cfg.max_reassessments < 0) throw std::invalid_argument("max_reassessments must be >= 0");
  VerificationOutcome out;
  for (;;) {
    ++out.attempts;
    auto dets = initiate(obs, prompts, init);
    if (dets.empty() && !cfg.accept_empty) return out;
    const Verdict v = validate(obs, dets, prompts.validation_prompt, val);
    out.last_decision = v.decision;
    if (v.decision == Decision::agree) {
      out.goal = true;
      out.accepted = std::move(dets);
      return out;
    }
    if (out.attempts > cfg.max_reassessments) return out;
  }
}

/// The single source of randomness for one episode. Uniform draws are built
/// from raw 64-bit outputs so sequences match across standard libraries.
class EpisodeRng {
 public:
  explicit EpisodeRng(std::uint64_t seed) : gen_(seed) {}
  double uniform() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  bool bernoulli(double p) { return uniform() < p; }

 private:
  std::mt19937_64 gen_;
};

struct MockInitiatorParams {
  double tpr = 1.0;  // chance a visible prompted object is detected
  double fpr = 0.0;  // chance of a spurious detection for a prompt with nothing visible
};

/// Box centered on the bearing of an object, for a camera spanning `fov`.
inline BBox bbox_for_bearing(double bearing, double fov, double width = 0.04, double height = 0.12) {
  double cx = 0.5 - bearing / fov;
  cx = std::clamp(cx, 0.5 * width, 1.0 - 0.5 * width);
  return {cx - 0.5 * width, 0.5 - 0.5 * height, width, height};
}

/// Stochastic detector driven by the observation's visible-object list.
class MockInitiator final : public Initiator {
 public:
  MockInitiator(MockInitiatorParams p, std::shared_ptr<EpisodeRng> rng) : p_(p), rng_(std::move(rng)) {}

  std::vector<Detection> detect(const Observation& obs, const PromptSet& prompts) override {
    std::vector<Detection> out;
    for (const auto& prompt : prompts.object_prompts) {
      bool any = false;
      for (const auto& v : obs.visible) {
        if (v.label != prompt) continue;
        any = true;
        if (rng_->bernoulli(p_.tpr)) out.push_back({v.label, bbox_for_bearing(v.bearing, obs.depth.fov), 0.9});
      }
      if (!any && rng_->bernoulli(p_.fpr)) {
        const double bearing = rng_->uniform(-0.45, 0.45) * obs.depth.fov;
        const double conf = rng_->uniform(0.4, 0.8);
        out.push_back({prompt, bbox_for_bearing(bearing, obs.depth.fov), conf});
      }
    }
    return out;
  }

 private:
  MockInitiatorParams p_;
  std::shared_ptr<EpisodeRng> rng_;
};

struct MockValidatorParams {
  double catch_rate = 1.0;   // chance a false detection is rejected
  double accept_rate = 1.0;  // chance a true detection is accepted
};

/// A detection is true when a visible object with its label projects inside
/// its box (with a small horizontal tolerance).
inline bool detection_is_true(const Detection& d, const Observation& obs, double tolerance = 0.02) {
  for (const auto& v : obs.visible) {
    if (v.label != d.label) continue;
    const double cx = 0.5 - v.bearing / obs.depth.fov;
    if (cx >= d.bbox.x - tolerance && cx <= d.bbox.x + d.bbox.w + tolerance) return true;
  }
  return false;
}

/// Stochastic checker: every detection is judged independently and one
/// rejection turns the verdict into a disagreement.
class MockValidator final : public Validator {
 public:
  MockValidator(MockValidatorParams p, std::shared_ptr<EpisodeRng> rng) : p_(p), rng_(std::move(rng)) {}

  Verdict validate(const Observation& obs, std::span<const Detection> dets, const std::string&) override {
    bool reject = false;
    for (const auto& d : dets) {
      const double u = rng_->uniform();
      reject |= detection_is_true(d, obs) ? u >= p_.accept_rate : u < p_.catch_rate;
    }
    if (reject) return {Decision::disagree, "detections do not match the scene"};
    return {Decision::agree, std::nullopt};
  }

 private:
  MockValidatorParams p_;
  std::shared_ptr<EpisodeRng> rng_;
};

class FixedValidator final : public Validator {
 public:
  explicit FixedValidator(Decision d) : d_(d) {}
  Verdict validate(const Observation&, std::span<const Detection>, const std::string&) override { return {d_, {}}; }

 private:
  Decision d_;
};

/// Returns pre-recorded detection lists in order, then empty lists.
class ScriptedInitiator final : public Initiator {
 public:
  explicit ScriptedInitiator(std::vector<std::vector<Detection>> script) : script_(std::move(script)) {}
  std::vector<Detection> detect(const Observation&, const PromptSet&) override {
    return next_ < script_.size() ? script_[next_++] : std::vector<Detection>{};
  }
  std::size_t calls() const { return next_; }

 private:
  std::vector<std::vector<Detection>> script_;
  std::size_t next_ = 0;
};

/// Returns pre-recorded verdicts in order, then disagrees.
class ScriptedValidator final : public Validator {
 public:
  explicit ScriptedValidator(std::vector<Verdict> script) : script_(std::move(script)) {}
  Verdict validate(const Observation&, std::span<const Detection>, const std::string&) override {
    return next_ < script_.size() ? script_[next_++] : Verdict{Decision::disagree, "script exhausted"};
  }

 private:
  std::vector<Verdict> script_;
  std::size_t next_ = 0;
};

}  // namespace navsim
