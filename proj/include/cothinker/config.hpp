#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>

#include <json.hpp>

#include "cothinker/common.hpp"

namespace cothinker {

using json = nlohmann::json;

enum class SynthMode { External, InGroup };

inline std::string to_string(SynthMode m) {
  return m == SynthMode::External ? "external" : "ingroup";
}

inline SynthMode synth_mode_from_string(const std::string& s) {
  if (s == "external") return SynthMode::External;
  if (s == "ingroup") return SynthMode::InGroup;
  throw Error(Errc::InvalidConfig, "synthesizer_mode: expected 'external' or 'ingroup', got '" + s + "'");
}

enum class BackendKind { Mock, Http };

struct BackendDescriptor {
  BackendKind kind = BackendKind::Mock;
  std::string base_url;   // e.g. https://api.openai.com/v1
  std::string model;
  std::string api_key;
  int retry_limit = 3;           // retries after the first attempt
  double backoff_base_s = 0.5;   // backoff = base * 2^attempt

  bool operator==(const BackendDescriptor&) const = default;
};

struct Task {
  std::string id;
  std::string description;
  std::map<std::string, std::string> metadata;
};

inline Task make_task(std::string id, std::string description,
                      std::map<std::string, std::string> metadata = {}) {
  if (trim(description).empty())
    throw Error(Errc::EmptyText, "task description must be non-empty");
  return Task{std::move(id), std::move(description), std::move(metadata)};
}

struct EngineConfig {
  int agent_count = 6;                       // M
  int reference_count = 3;                   // N
  double exploration_rate = 0.3;             // beta
  int round_count = 3;                       // T (initial generation counts as round 0)
  double initial_temperature = 0.25;
  double refinement_temperature = 0.0;
  double refinement_frequency_penalty = 0.5;
  SynthMode synthesizer_mode = SynthMode::External;
  std::uint64_t rng_seed = 0;
  int max_output_tokens = 2048;
  bool random_final_selection = false;       // in-group / MAD pick by RNG instead of centroid
  BackendDescriptor chat_backend;
  BackendDescriptor embedding_backend;

  bool operator==(const EngineConfig&) const = default;
};

inline EngineConfig validate_config(const EngineConfig& raw) {
  EngineConfig c = raw;
  if (c.agent_count < 1)
    throw Error(Errc::InvalidConfig, "agent_count: must be a positive integer");
  if (c.reference_count < 1)
    throw Error(Errc::InvalidConfig, "reference_count: must be a positive integer");
  if (c.reference_count > c.agent_count - 1)
    throw Error(Errc::InvalidConfig, "reference_count: N must satisfy N <= M-1 (N=" +
                                         std::to_string(c.reference_count) +
                                         ", M=" + std::to_string(c.agent_count) + ")");
  if (!(c.exploration_rate >= 0.0 && c.exploration_rate <= 1.0))
    throw Error(Errc::InvalidConfig, "exploration_rate: must lie in [0, 1]");
  if (c.round_count < 1)
    throw Error(Errc::InvalidConfig, "round_count: must be >= 1");
  if (c.initial_temperature < 0.0)
    throw Error(Errc::InvalidConfig, "initial_temperature: must be >= 0");
  if (c.refinement_temperature < 0.0)
    throw Error(Errc::InvalidConfig, "refinement_temperature: must be >= 0");
  if (c.max_output_tokens < 1)
    throw Error(Errc::InvalidConfig, "max_output_tokens: must be a positive integer");
  return c;
}

inline json backend_to_json(const BackendDescriptor& b) {
  json j;
  j["kind"] = b.kind == BackendKind::Mock ? "mock" : "http";
  if (b.kind == BackendKind::Http) {
    j["base_url"] = b.base_url;
    j["model"] = b.model;
  }
  j["retry_limit"] = b.retry_limit;
  j["backoff_base_s"] = b.backoff_base_s;
  return j;
}

inline BackendDescriptor backend_from_json(const json& j, const std::string& field) {
  if (!j.is_object())
    throw Error(Errc::InvalidConfig, field + ": expected an object");
  BackendDescriptor b;
  for (auto it = j.begin(); it != j.end(); ++it) {
    const std::string& k = it.key();
    if (k == "kind") {
      std::string v = it.value().get<std::string>();
      if (v == "mock") b.kind = BackendKind::Mock;
      else if (v == "http") b.kind = BackendKind::Http;
      else throw Error(Errc::InvalidConfig, field + ".kind: expected 'mock' or 'http'");
    } else if (k == "base_url") {
      b.base_url = it.value().get<std::string>();
    } else if (k == "model") {
      b.model = it.value().get<std::string>();
    } else if (k == "api_key") {
      b.api_key = it.value().get<std::string>();
    } else if (k == "retry_limit") {
      b.retry_limit = it.value().get<int>();
    } else if (k == "backoff_base_s") {
      b.backoff_base_s = it.value().get<double>();
    } else {
      throw Error(Errc::InvalidConfig, field + ": unknown key '" + k + "'");
    }
  }
  return b;
}

inline json config_to_json(const EngineConfig& c) {
  json j;
  j["agent_count"] = c.agent_count;
  j["reference_count"] = c.reference_count;
  j["exploration_rate"] = c.exploration_rate;
  j["round_count"] = c.round_count;
  j["initial_temperature"] = c.initial_temperature;
  j["refinement_temperature"] = c.refinement_temperature;
  j["refinement_frequency_penalty"] = c.refinement_frequency_penalty;
  j["synthesizer_mode"] = to_string(c.synthesizer_mode);
  j["rng_seed"] = c.rng_seed;
  j["max_output_tokens"] = c.max_output_tokens;
  j["random_final_selection"] = c.random_final_selection;
  j["chat_backend"] = backend_to_json(c.chat_backend);
  j["embedding_backend"] = backend_to_json(c.embedding_backend);
  return j;
}

// Parses a config record. Omitted fields keep their defaults; unknown keys are
// rejected so experiment-sweep typos fail loudly.
inline EngineConfig config_from_json(const json& j) {
  if (!j.is_object())
    throw Error(Errc::InvalidConfig, "config: expected a JSON object");
  EngineConfig c;
  for (auto it = j.begin(); it != j.end(); ++it) {
    const std::string& k = it.key();
    try {
      if (k == "agent_count") c.agent_count = it.value().get<int>();
      else if (k == "reference_count") c.reference_count = it.value().get<int>();
      else if (k == "exploration_rate") c.exploration_rate = it.value().get<double>();
      else if (k == "round_count") c.round_count = it.value().get<int>();
      else if (k == "initial_temperature") c.initial_temperature = it.value().get<double>();
      else if (k == "refinement_temperature") c.refinement_temperature = it.value().get<double>();
      else if (k == "refinement_frequency_penalty") c.refinement_frequency_penalty = it.value().get<double>();
      else if (k == "synthesizer_mode") c.synthesizer_mode = synth_mode_from_string(it.value().get<std::string>());
      else if (k == "rng_seed") c.rng_seed = it.value().get<std::uint64_t>();
      else if (k == "max_output_tokens") c.max_output_tokens = it.value().get<int>();
      else if (k == "random_final_selection") c.random_final_selection = it.value().get<bool>();
      else if (k == "chat_backend") c.chat_backend = backend_from_json(it.value(), k);
      else if (k == "embedding_backend") c.embedding_backend = backend_from_json(it.value(), k);
      else throw Error(Errc::InvalidConfig, "config: unknown key '" + k + "'");
    } catch (const json::exception& e) {
      throw Error(Errc::InvalidConfig, "config." + k + ": " + e.what());
    }
  }
  return validate_config(c);
}

// Applies a "key=value" override (CLI --set). Accepts both the short symbols
// used in sweeps (M, N, beta, T) and the full field names.
inline void apply_override(EngineConfig& c, const std::string& key, const std::string& value) {
  auto as_int = [&] {
    try { return std::stoi(value); }
    catch (...) { throw Error(Errc::InvalidConfig, key + ": expected an integer, got '" + value + "'"); }
  };
  auto as_double = [&] {
    try { return std::stod(value); }
    catch (...) { throw Error(Errc::InvalidConfig, key + ": expected a number, got '" + value + "'"); }
  };
  if (key == "M" || key == "agent_count") c.agent_count = as_int();
  else if (key == "N" || key == "reference_count") c.reference_count = as_int();
  else if (key == "beta" || key == "exploration_rate") c.exploration_rate = as_double();
  else if (key == "T" || key == "round_count") c.round_count = as_int();
  else if (key == "initial_temperature") c.initial_temperature = as_double();
  else if (key == "refinement_temperature") c.refinement_temperature = as_double();
  else if (key == "refinement_frequency_penalty") c.refinement_frequency_penalty = as_double();
  else if (key == "synthesizer_mode") c.synthesizer_mode = synth_mode_from_string(value);
  else if (key == "rng_seed" || key == "seed") c.rng_seed = std::stoull(value);
  else if (key == "max_output_tokens") c.max_output_tokens = as_int();
  else if (key == "random_final_selection") c.random_final_selection = (value == "true" || value == "1");
  else throw Error(Errc::InvalidConfig, "unknown config key '" + key + "'");
}

}  // namespace cothinker
