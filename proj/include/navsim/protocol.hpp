#pragma once

// Perception wire protocol (JSON over HTTP):
//
//   POST /detect    {"image": str, "prompts": [str]}
//                -> {"detections": [{"label": str, "bbox": [x,y,w,h], "confidence": num}]}
//   POST /validate  {"image": str, "detections": [...], "prompt": str}
//                -> {"decision": "agree"|"disagree", "rationale": str}
//
// Any non-2xx status, transport failure, timeout or malformed body surfaces
// as BackendUnavailable. Replay backends serve recorded response bodies.

#include <chrono>
#include <filesystem>
#include <fstream>
#include <memory>
#include <string>
#include <vector>

#include <httplib.h>
#include <json.hpp>

#include "navsim/errors.hpp"
#include "navsim/perception.hpp"

namespace navsim::protocol {

using nlohmann::json;

inline json to_json(const Detection& d) {
  return {{"label", d.label}, {"bbox", {d.bbox.x, d.bbox.y, d.bbox.w, d.bbox.h}}, {"confidence", d.confidence}};
}

inline Detection detection_from_json(const json& j) {
  const auto& b = j.at("bbox");
  if (!b.is_array() || b.size() != 4) throw json::type_error::create(302, "bbox must hold 4 numbers", &j);
  Detection d{j.at("label").get<std::string>(),
              {b[0].get<double>(), b[1].get<double>(), b[2].get<double>(), b[3].get<double>()},
              j.at("confidence").get<double>()};
  return d;
}

inline json detect_request(const Observation& obs, const PromptSet& prompts) {
  return {{"image", obs.image_ref}, {"prompts", prompts.object_prompts}};
}

inline json validate_request(const Observation& obs, std::span<const Detection> dets, const std::string& prompt) {
  json arr = json::array();
  for (const auto& d : dets) arr.push_back(to_json(d));
  return {{"image", obs.image_ref}, {"detections", std::move(arr)}, {"prompt", prompt}};
}

inline std::vector<Detection> parse_detect_response(const json& j) {
  std::vector<Detection> out;
  for (const auto& d : j.at("detections")) out.push_back(detection_from_json(d));
  return out;
}

inline Verdict parse_validate_response(const json& j) {
  const auto decision = j.at("decision").get<std::string>();
  Verdict v;
  if (decision == "agree") v.decision = Decision::agree;
  else if (decision == "disagree") v.decision = Decision::disagree;
  else throw json::type_error::create(302, "decision must be agree or disagree", &j);
  if (auto it = j.find("rationale"); it != j.end() && it->is_string()) v.rationale = it->get<std::string>();
  return v;
}

inline json to_json(const Verdict& v) {
  return {{"decision", v.decision == Decision::agree ? "agree" : "disagree"}, {"rationale", v.rationale.value_or("")}};
}

/// Blocking JSON-over-HTTP client for one perception server.
class WireClient {
 public:
  explicit WireClient(std::string endpoint, std::chrono::milliseconds timeout = std::chrono::seconds(10))
      : endpoint_(std::move(endpoint)), client_(std::make_unique<httplib::Client>(endpoint_)) {
    if (!client_->is_valid()) throw BackendUnavailable("invalid endpoint " + endpoint_);
    const auto secs = std::chrono::duration_cast<std::chrono::seconds>(timeout);
    const auto usecs = std::chrono::duration_cast<std::chrono::microseconds>(timeout - secs);
    client_->set_connection_timeout(secs.count(), usecs.count());
    client_->set_read_timeout(secs.count(), usecs.count());
    client_->set_write_timeout(secs.count(), usecs.count());
  }

  json post(const std::string& path, const json& body) {
    auto res = client_->Post(path, body.dump(), "application/json");
    if (!res) throw BackendUnavailable(endpoint_ + path + ": " + httplib::to_string(res.error()));
    if (res->status < 200 || res->status >= 300)
      throw BackendUnavailable(endpoint_ + path + ": HTTP " + std::to_string(res->status));
    try {
      return json::parse(res->body);
    } catch (const json::exception& e) {
      throw BackendUnavailable(endpoint_ + path + ": malformed response: " + e.what());
    }
  }

  const std::string& endpoint() const { return endpoint_; }

 private:
  std::string endpoint_;
  std::unique_ptr<httplib::Client> client_;
};

class WireInitiator final : public Initiator {
 public:
  explicit WireInitiator(std::shared_ptr<WireClient> client) : client_(std::move(client)) {}
  std::vector<Detection> detect(const Observation& obs, const PromptSet& prompts) override {
    const json res = client_->post("/detect", detect_request(obs, prompts));
    try {
      return parse_detect_response(res);
    } catch (const json::exception& e) {
      throw BackendUnavailable("/detect: unexpected response shape: " + std::string(e.what()));
    }
  }

 private:
  std::shared_ptr<WireClient> client_;
};

class WireValidator final : public Validator {
 public:
  explicit WireValidator(std::shared_ptr<WireClient> client) : client_(std::move(client)) {}
  Verdict validate(const Observation& obs, std::span<const Detection> dets, const std::string& prompt) override {
    const json res = client_->post("/validate", validate_request(obs, dets, prompt));
    try {
      return parse_validate_response(res);
    } catch (const json::exception& e) {
      throw BackendUnavailable("/validate: unexpected response shape: " + std::string(e.what()));
    }
  }

 private:
  std::shared_ptr<WireClient> client_;
};

/// A recorded exchange. Transcript files are a JSON array of
/// {"endpoint": "/detect"|"/validate", "request": {...}, "response": {...}}.
struct Exchange {
  std::string endpoint;
  json request;
  json response;
};

inline std::vector<Exchange> parse_transcript(const json& j) {
  if (!j.is_array()) throw ScenarioInvalid("transcript must be a JSON array");
  std::vector<Exchange> out;
  for (const auto& e : j)
    out.push_back({e.at("endpoint").get<std::string>(), e.value("request", json::object()), e.at("response")});
  return out;
}

inline std::vector<Exchange> load_transcript(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ScenarioInvalid("cannot open transcript " + path.string());
  try {
    return parse_transcript(json::parse(in));
  } catch (const json::exception& e) {
    throw ScenarioInvalid(path.string() + ": " + e.what());
  }
}

/// Replays the /detect and /validate responses of a transcript in order.
/// Past the end, detection lists are empty and verdicts disagree.
class ReplayBackend {
 public:
  explicit ReplayBackend(const std::vector<Exchange>& transcript) {
    for (const auto& e : transcript) {
      if (e.endpoint == "/detect") detections_.push_back(parse_detect_response(e.response));
      else if (e.endpoint == "/validate") verdicts_.push_back(parse_validate_response(e.response));
    }
  }
  std::unique_ptr<Initiator> initiator() const { return std::make_unique<ScriptedInitiator>(detections_); }
  std::unique_ptr<Validator> validator() const { return std::make_unique<ScriptedValidator>(verdicts_); }

 private:
  std::vector<std::vector<Detection>> detections_;
  std::vector<Verdict> verdicts_;
};

}  // namespace navsim::protocol
