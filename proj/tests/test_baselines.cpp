#include <doctest.h>

#include <set>

#include "cothinker/baselines.hpp"

using namespace cothinker;

namespace {

RunTranscript run(Strategy s, EngineConfig cfg = EngineConfig{}) {
  Task task = make_task("t", "summarize a research field");
  RunTranscript transcript;
  run_baseline(s, task, cfg, transcript);
  return transcript;
}

int completion_count(const RunTranscript& t) {
  int n = 0;
  for (const auto& e : t.events)
    if (e.completion_text) ++n;
  return n;
}

}  // namespace

TEST_CASE("strategy names round trip") {
  for (Strategy s : {Strategy::IO, Strategy::CoT, Strategy::SelfRefine, Strategy::MAD,
                     Strategy::DMAD})
    CHECK(strategy_from_string(to_string(s)) == s);
  CHECK_THROWS_AS(strategy_from_string("tree-of-thought"), Error);
}

TEST_CASE("io issues one completion with the bare task plus footer") {
  RunTranscript t = run(Strategy::IO);
  CHECK(completion_count(t) == 1);
  CHECK(t.strategy == "io");
  CHECK(*t.events[0].prompt_text == t.task.description + kAnswerFooter);
  CHECK(*t.events[0].temperature == doctest::Approx(0.25));
  CHECK(t.final_answer.has_value());
}

TEST_CASE("cot issues one completion with the step-by-step cue") {
  RunTranscript t = run(Strategy::CoT);
  CHECK(completion_count(t) == 1);
  CHECK(t.events[0].prompt_text->find("step by step") != std::string::npos);
}

TEST_CASE("self-refine at T=3 issues five completions") {
  RunTranscript t = run(Strategy::SelfRefine);
  CHECK(completion_count(t) == 5);
  // Critique prompts reference the previous output; revise prompts reference
  // the critique.
  CHECK(t.events[1].prompt_text->find("Critique") != std::string::npos);
  CHECK(t.events[1].prompt_text->find(*t.events[0].completion_text) != std::string::npos);
  CHECK(t.events[2].prompt_text->find(*t.events[1].completion_text) != std::string::npos);
  CHECK(*t.events[1].temperature == doctest::Approx(0.0));
  CHECK(*t.events[1].frequency_penalty == doctest::Approx(0.5));
}

TEST_CASE("self-refine scales with T") {
  EngineConfig cfg;
  cfg.round_count = 1;
  CHECK(completion_count(run(Strategy::SelfRefine, cfg)) == 1);
  cfg.round_count = 4;
  CHECK(completion_count(run(Strategy::SelfRefine, cfg)) == 7);
}

TEST_CASE("mad issues M*T completions and broadcasts M-1 peer blocks") {
  RunTranscript t = run(Strategy::MAD);
  CHECK(completion_count(t) == 6 * 3);
  int refinements = 0;
  for (const auto& e : t.events) {
    if (e.round == 0) continue;
    ++refinements;
    int peer_blocks = 0;
    for (int j = 0; j < 6; ++j)
      if (j != *e.agent_id &&
          e.prompt_text->find("Agent " + std::to_string(j) + ": \"") != std::string::npos)
        ++peer_blocks;
    CHECK(peer_blocks == 5);
    CHECK(e.prompt_text->find("Agent " + std::to_string(*e.agent_id) + ": \"") ==
          std::string::npos);
  }
  CHECK(refinements == 12);
  CHECK(t.final_source_mode == "ingroup");
}

TEST_CASE("mad final answer is a verbatim final-round output") {
  RunTranscript t = run(Strategy::MAD);
  std::set<std::string> final_round_outputs;
  for (const auto& e : t.events)
    if (e.round == 2) final_round_outputs.insert(*e.completion_text);
  CHECK(final_round_outputs.count(*t.final_answer) == 1);
}

TEST_CASE("dmad assigns three distinct initial strategies across six agents") {
  RunTranscript t = run(Strategy::DMAD);
  CHECK(completion_count(t) == 6 * 3);
  std::set<std::string> initial_prompts;
  for (const auto& e : t.events)
    if (e.round == 0) initial_prompts.insert(*e.prompt_text);
  CHECK(initial_prompts.size() == 6);  // agent headers differ per prompt

  // Strip the per-agent header; the remaining instruction bodies form exactly
  // three distinct strategies, repeating with period 3.
  auto body = [&](int agent) {
    for (const auto& e : t.events)
      if (e.round == 0 && *e.agent_id == agent) {
        std::string p = *e.prompt_text;
        return p.substr(p.find('\n') + 1);
      }
    return std::string();
  };
  std::set<std::string> bodies;
  for (int i = 0; i < 6; ++i) bodies.insert(body(i));
  CHECK(bodies.size() == 3);
  for (int i = 0; i < 3; ++i) CHECK(body(i) == body(i + 3));
}

TEST_CASE("mad initial prompts are identical across agents up to the header") {
  RunTranscript t = run(Strategy::MAD);
  std::set<std::string> bodies;
  for (const auto& e : t.events)
    if (e.round == 0) {
      std::string p = *e.prompt_text;
      bodies.insert(p.substr(p.find('\n') + 1));
    }
  CHECK(bodies.size() == 1);
}

TEST_CASE("baselines are deterministic per seed") {
  EngineConfig cfg;
  cfg.rng_seed = 21;
  RunTranscript a = run(Strategy::DMAD, cfg);
  RunTranscript b = run(Strategy::DMAD, cfg);
  CHECK(transcript_to_jsonl(a) == transcript_to_jsonl(b));
  cfg.rng_seed = 22;
  RunTranscript c = run(Strategy::DMAD, cfg);
  CHECK(*a.final_answer != *c.final_answer);
}
