#pragma once

#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "cothinker/common.hpp"
#include "cothinker/config.hpp"
#include "cothinker/embedding.hpp"
#include "cothinker/gateway.hpp"
#include "cothinker/moderator.hpp"
#include "cothinker/styles.hpp"

namespace cothinker {

// One record per event. Which optional fields are present depends on the
// event type; see README "Transcript format".
struct TranscriptEvent {
  int index = 0;
  std::string type;  // Orchestrate | InitialGen | RefSelect | Refine | TmsUpdate | Synthesize | Baseline
  int round = 0;
  std::optional<int> agent_id;
  std::optional<std::string> system_text;
  std::optional<std::string> prompt_text;
  std::optional<std::string> completion_text;
  std::optional<double> temperature;
  std::optional<double> frequency_penalty;
  std::optional<int> max_tokens;
  std::optional<int> retries;
  std::optional<std::vector<double>> embedding;
  std::optional<std::vector<int>> refs;
  std::optional<std::vector<bool>> rewired;
  std::optional<std::vector<std::pair<int, int>>> edges;  // whole-round graph, on the last RefSelect
  std::optional<GraphStats> stats;
  std::optional<std::string> memory_text;
  std::int64_t ts_ms = 0;  // 0 under the mock backend so transcripts stay byte-stable
};

struct RunTranscript {
  std::string run_id;
  std::string strategy;  // "cothinker" | "io" | "cot" | "self-refine" | "mad" | "dmad"
  EngineConfig config;
  StyleInventory inventory;
  Task task;
  std::vector<TranscriptEvent> events;
  std::optional<std::string> final_answer;  // absent when a run aborted mid-way
  std::string final_source_mode = "external";
};

inline json event_to_json(const TranscriptEvent& e) {
  json j;
  j["record"] = "event";
  j["index"] = e.index;
  j["type"] = e.type;
  j["round"] = e.round;
  if (e.agent_id) j["agent_id"] = *e.agent_id;
  if (e.system_text) j["system"] = *e.system_text;
  if (e.prompt_text) j["prompt"] = *e.prompt_text;
  if (e.completion_text) j["completion"] = *e.completion_text;
  if (e.temperature) j["temperature"] = *e.temperature;
  if (e.frequency_penalty) j["frequency_penalty"] = *e.frequency_penalty;
  if (e.max_tokens) j["max_tokens"] = *e.max_tokens;
  if (e.retries) j["retries"] = *e.retries;
  if (e.embedding) j["embedding"] = *e.embedding;
  if (e.refs) j["refs"] = *e.refs;
  if (e.rewired) j["rewired"] = *e.rewired;
  if (e.edges) {
    json arr = json::array();
    for (auto [u, v] : *e.edges) arr.push_back(json::array({u, v}));
    j["edges"] = std::move(arr);
  }
  if (e.stats)
    j["stats"] = {{"clustering", e.stats->clustering},
                  {"path_length", e.stats->path_length},
                  {"unreachable_fraction", e.stats->unreachable_fraction}};
  if (e.memory_text) j["memory"] = *e.memory_text;
  j["ts_ms"] = e.ts_ms;
  return j;
}

inline TranscriptEvent event_from_json(const json& j) {
  TranscriptEvent e;
  e.index = j.at("index").get<int>();
  e.type = j.at("type").get<std::string>();
  e.round = j.at("round").get<int>();
  if (j.contains("agent_id")) e.agent_id = j["agent_id"].get<int>();
  if (j.contains("system")) e.system_text = j["system"].get<std::string>();
  if (j.contains("prompt")) e.prompt_text = j["prompt"].get<std::string>();
  if (j.contains("completion")) e.completion_text = j["completion"].get<std::string>();
  if (j.contains("temperature")) e.temperature = j["temperature"].get<double>();
  if (j.contains("frequency_penalty")) e.frequency_penalty = j["frequency_penalty"].get<double>();
  if (j.contains("max_tokens")) e.max_tokens = j["max_tokens"].get<int>();
  if (j.contains("retries")) e.retries = j["retries"].get<int>();
  if (j.contains("embedding")) e.embedding = j["embedding"].get<std::vector<double>>();
  if (j.contains("refs")) e.refs = j["refs"].get<std::vector<int>>();
  if (j.contains("rewired")) e.rewired = j["rewired"].get<std::vector<bool>>();
  if (j.contains("edges")) {
    std::vector<std::pair<int, int>> edges;
    for (const auto& pair : j["edges"])
      edges.emplace_back(pair.at(0).get<int>(), pair.at(1).get<int>());
    e.edges = std::move(edges);
  }
  if (j.contains("stats")) {
    GraphStats s;
    s.clustering = j["stats"].at("clustering").get<double>();
    s.path_length = j["stats"].at("path_length").get<double>();
    s.unreachable_fraction = j["stats"].at("unreachable_fraction").get<double>();
    e.stats = s;
  }
  if (j.contains("memory")) e.memory_text = j["memory"].get<std::string>();
  e.ts_ms = j.value("ts_ms", std::int64_t{0});
  return e;
}

inline std::string transcript_to_jsonl(const RunTranscript& t) {
  json head;
  head["record"] = "run";
  head["run_id"] = t.run_id;
  head["strategy"] = t.strategy;
  head["config"] = config_to_json(t.config);
  head["inventory"] = inventory_to_json(t.inventory);
  head["task"] = {{"id", t.task.id}, {"description", t.task.description}};
  std::string out = head.dump();
  out.push_back('\n');
  for (const auto& e : t.events) {
    out += event_to_json(e).dump();
    out.push_back('\n');
  }
  if (t.final_answer) {
    json tail;
    tail["record"] = "final";
    tail["text"] = *t.final_answer;
    tail["source_mode"] = t.final_source_mode;
    out += tail.dump();
    out.push_back('\n');
  }
  return out;
}

inline RunTranscript transcript_from_jsonl(const std::string& content) {
  std::istringstream in(content);
  std::string line;
  RunTranscript t;
  bool saw_head = false;
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::exception&) {
      throw Error(Errc::MalformedTranscript, "transcript line is not valid JSON");
    }
    try {
      const std::string record = j.at("record").get<std::string>();
      if (record == "run") {
        if (saw_head) throw Error(Errc::MalformedTranscript, "duplicate run record");
        saw_head = true;
        t.run_id = j.at("run_id").get<std::string>();
        t.strategy = j.at("strategy").get<std::string>();
        t.config = config_from_json(j.at("config"));
        t.inventory = inventory_from_json(j.at("inventory"));
        t.task = make_task(j.at("task").at("id").get<std::string>(),
                           j.at("task").at("description").get<std::string>());
      } else if (record == "event") {
        if (!saw_head) throw Error(Errc::MalformedTranscript, "event before run record");
        t.events.push_back(event_from_json(j));
      } else if (record == "final") {
        if (!saw_head) throw Error(Errc::MalformedTranscript, "final before run record");
        t.final_answer = j.at("text").get<std::string>();
        t.final_source_mode = j.value("source_mode", "external");
      } else {
        throw Error(Errc::MalformedTranscript, "unknown record type '" + record + "'");
      }
    } catch (const json::exception& e) {
      throw Error(Errc::MalformedTranscript, std::string("bad transcript record: ") + e.what());
    }
  }
  if (!saw_head) throw Error(Errc::MalformedTranscript, "transcript has no run record");
  return t;
}

inline void write_transcript_file(const RunTranscript& t, const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(Errc::FileNotFound, "cannot open for writing: " + path);
  out << transcript_to_jsonl(t);
}

inline RunTranscript read_transcript_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::FileNotFound, "cannot open transcript: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return transcript_from_jsonl(buf.str());
}

}  // namespace cothinker
