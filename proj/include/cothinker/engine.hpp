#pragma once

#include <chrono>
#include <future>
#include <optional>
#include <string>
#include <vector>

#include "cothinker/agent.hpp"
#include "cothinker/common.hpp"
#include "cothinker/config.hpp"
#include "cothinker/embedding.hpp"
#include "cothinker/gateway.hpp"
#include "cothinker/memory.hpp"
#include "cothinker/moderator.hpp"
#include "cothinker/styles.hpp"
#include "cothinker/synthesizer.hpp"
#include "cothinker/transcript.hpp"

namespace cothinker {

namespace detail {

inline std::int64_t wall_ms_or_zero(const EngineConfig& cfg) {
  if (cfg.chat_backend.kind == BackendKind::Mock) return 0;  // byte-stable transcripts
  return std::chrono::duration_cast<std::chrono::milliseconds>(
             std::chrono::system_clock::now().time_since_epoch())
      .count();
}

inline TranscriptEvent make_chat_event(const EngineConfig& cfg, std::string type, int round,
                                       std::optional<int> agent_id, const ChatRequest& req,
                                       const Completion& completion) {
  TranscriptEvent e;
  e.type = std::move(type);
  e.round = round;
  e.agent_id = agent_id;
  e.system_text = req.system_text;
  e.prompt_text = req.user_text;
  e.completion_text = completion.text;
  e.temperature = req.temperature;
  e.frequency_penalty = req.frequency_penalty;
  e.max_tokens = req.max_tokens;
  e.retries = completion.retry_count;
  e.ts_ms = wall_ms_or_zero(cfg);
  return e;
}

}  // namespace detail

inline std::string derive_run_id(const Task& task, const EngineConfig& cfg) {
  std::string basis = task.id;
  basis.push_back('\x1f');
  basis += task.description;
  basis.push_back('\x1f');
  append_u64_le(basis, cfg.rng_seed);
  return to_hex16(fnv1a64(basis));
}

// Executes the full process flow: style orchestration, initial generation,
// memory update, then (T-1) moderated refinement rounds, then synthesis.
// `transcript` is populated as the run progresses so a partial transcript
// survives an aborting error.
inline FinalAnswer engine_run(const Task& task, const EngineConfig& cfg_raw, ChatBackend& backend,
                              EmbeddingProvider& embedder, const StyleInventory& inventory,
                              RunTranscript& transcript) {
  const EngineConfig cfg = validate_config(cfg_raw);
  transcript = RunTranscript{};
  transcript.run_id = derive_run_id(task, cfg);
  transcript.strategy = "cothinker";
  transcript.config = cfg;
  transcript.inventory = inventory;
  transcript.task = task;

  auto push = [&](TranscriptEvent e) {
    e.index = static_cast<int>(transcript.events.size());
    transcript.events.push_back(std::move(e));
  };

  // Initialization: styles, then the round-0 outputs.
  std::vector<StyleGen> style_gens =
      orchestrate_styles(task, inventory, cfg.agent_count, backend, cfg.max_output_tokens);
  std::vector<ThinkingStyle> styles;
  for (auto& sg : style_gens) {
    push(detail::make_chat_event(cfg, "Orchestrate", 0, sg.style.agent_id, sg.request,
                                 sg.completion));
    styles.push_back(sg.style);
  }

  std::vector<std::future<OutputGen>> initial_futures;
  for (int i = 0; i < cfg.agent_count; ++i)
    initial_futures.push_back(std::async(std::launch::async, [&, i] {
      return initial_generation(task, styles[i], backend, embedder, cfg);
    }));
  std::vector<AgentOutput> outputs;
  for (auto& f : initial_futures) {
    OutputGen gen = f.get();
    TranscriptEvent e =
        detail::make_chat_event(cfg, "InitialGen", 0, gen.output.agent_id, gen.request,
                                gen.completion);
    e.embedding = gen.output.embedding.values;
    push(std::move(e));
    outputs.push_back(std::move(gen.output));
  }

  // Round barrier: memory observes all M outputs before the next round starts.
  MemoryGen mem_gen = update_memory(std::nullopt, outputs, styles, backend,
                                    cfg.refinement_temperature, cfg.max_output_tokens);
  {
    TranscriptEvent e =
        detail::make_chat_event(cfg, "TmsUpdate", 0, std::nullopt, mem_gen.request,
                                mem_gen.completion);
    e.memory_text = mem_gen.memory.raw_text;
    push(std::move(e));
  }
  TransactiveMemory memory = mem_gen.memory;

  for (int round = 1; round < cfg.round_count; ++round) {
    // References for the round-t refinement come from round-(t-1) outputs only.
    const DistanceMatrix dmatrix = distance_matrix(outputs);
    std::vector<ReferenceSet> refsets;
    for (int i = 0; i < cfg.agent_count; ++i) {
      Rng rng = agent_round_rng(cfg.rng_seed, static_cast<std::uint64_t>(round),
                                static_cast<std::uint64_t>(i));
      refsets.push_back(select_refs(i, dmatrix, cfg.reference_count, cfg.exploration_rate, rng));
    }
    const CommGraph graph = build_round_graph(refsets, round);
    const GraphStats stats = graph_stats(graph);
    for (int i = 0; i < cfg.agent_count; ++i) {
      TranscriptEvent e;
      e.type = "RefSelect";
      e.round = round;
      e.agent_id = i;
      e.refs = refsets[i].refs;
      e.rewired = std::vector<bool>(refsets[i].rewired_flags.begin(),
                                    refsets[i].rewired_flags.end());
      if (i == cfg.agent_count - 1) {  // whole-round graph rides on the last RefSelect
        e.edges = graph.edges;
        e.stats = stats;
      }
      e.ts_ms = detail::wall_ms_or_zero(cfg);
      push(std::move(e));
    }

    std::vector<std::future<OutputGen>> refine_futures;
    for (int i = 0; i < cfg.agent_count; ++i)
      refine_futures.push_back(std::async(std::launch::async, [&, i] {
        std::vector<AgentOutput> refs;
        for (int peer : refsets[i].refs) refs.push_back(outputs[peer]);
        return refine(task, styles[i], memory, outputs[i], refs, backend, embedder, cfg);
      }));
    std::vector<AgentOutput> next_outputs;
    for (auto& f : refine_futures) {
      OutputGen gen = f.get();
      TranscriptEvent e =
          detail::make_chat_event(cfg, "Refine", round, gen.output.agent_id, gen.request,
                                  gen.completion);
      e.embedding = gen.output.embedding.values;
      push(std::move(e));
      next_outputs.push_back(std::move(gen.output));
    }
    outputs = std::move(next_outputs);

    mem_gen = update_memory(memory, outputs, styles, backend, cfg.refinement_temperature,
                            cfg.max_output_tokens);
    {
      TranscriptEvent e =
          detail::make_chat_event(cfg, "TmsUpdate", round, std::nullopt, mem_gen.request,
                                  mem_gen.completion);
      e.memory_text = mem_gen.memory.raw_text;
      push(std::move(e));
    }
    memory = mem_gen.memory;
  }

  SynthGen synth = synthesize(task, outputs, memory, styles, backend, cfg);
  {
    TranscriptEvent e = detail::make_chat_event(
        cfg, "Synthesize", cfg.round_count - 1,
        synth.ingroup_agent >= 0 ? std::optional<int>(synth.ingroup_agent) : std::nullopt,
        synth.request, synth.completion);
    push(std::move(e));
  }
  transcript.final_answer = synth.answer.text;
  transcript.final_source_mode = to_string(synth.answer.source_mode);
  return synth.answer;
}

// Convenience overload constructing backends from the config.
inline FinalAnswer engine_run(const Task& task, const EngineConfig& cfg,
                              RunTranscript& transcript,
                              const StyleInventory& inventory = default_style_inventory()) {
  auto backend = make_chat_backend(cfg);
  auto embedder = make_embedding_provider(cfg);
  return engine_run(task, cfg, *backend, *embedder, inventory, transcript);
}

namespace detail {

struct ReplayCursor {
  const std::vector<TranscriptEvent>& events;
  size_t pos = 0;

  const TranscriptEvent& next(const std::string& expected_type) {
    if (pos >= events.size())
      throw Error(Errc::ReplayDivergence,
                  "transcript ended early: expected " + expected_type + " at event " +
                      std::to_string(pos));
    const TranscriptEvent& e = events[pos++];
    if (e.type != expected_type)
      throw Error(Errc::ReplayDivergence, "event " + std::to_string(e.index) + ": expected " +
                                              expected_type + ", found " + e.type);
    return e;
  }
};

inline void check_prompt(const TranscriptEvent& e, const ChatRequest& rebuilt) {
  if (!e.prompt_text || *e.prompt_text != rebuilt.user_text ||
      e.system_text != rebuilt.system_text)
    throw Error(Errc::ReplayDivergence,
                "event " + std::to_string(e.index) + " (" + e.type +
                    "): re-assembled prompt differs from the recorded prompt");
  if (!e.completion_text || trim(*e.completion_text).empty())
    throw Error(Errc::ReplayDivergence,
                "event " + std::to_string(e.index) + ": missing completion");
}

inline AgentOutput output_from_event(const TranscriptEvent& e, int agent_id, int round) {
  if (!e.embedding)
    throw Error(Errc::ReplayDivergence,
                "event " + std::to_string(e.index) + ": missing embedding");
  return AgentOutput{agent_id, round, *e.completion_text, Embedding{*e.embedding}};
}

}  // namespace detail

// Re-executes all pure logic against the recorded completions and verifies
// every re-assembled prompt and reference set byte-exactly.
inline FinalAnswer engine_replay(const RunTranscript& transcript) {
  if (transcript.strategy != "cothinker")
    throw Error(Errc::UnknownStrategy,
                "replay supports cothinker transcripts, got '" + transcript.strategy + "'");
  const EngineConfig cfg = validate_config(transcript.config);
  const Task& task = transcript.task;
  detail::ReplayCursor cursor{transcript.events};

  std::vector<ThinkingStyle> styles;
  for (int i = 0; i < cfg.agent_count; ++i) {
    const TranscriptEvent& e = cursor.next("Orchestrate");
    const StyleProfile& profile =
        transcript.inventory.profiles[i % transcript.inventory.profiles.size()];
    ChatRequest req = build_orchestrator_prompt(task, profile);
    req.max_tokens = cfg.max_output_tokens;
    detail::check_prompt(e, req);
    styles.push_back(
        ThinkingStyle{i, profile, truncate_sentences(trim(*e.completion_text), 3)});
  }

  std::vector<AgentOutput> outputs;
  for (int i = 0; i < cfg.agent_count; ++i) {
    const TranscriptEvent& e = cursor.next("InitialGen");
    detail::check_prompt(e, build_initial_prompt(task, styles[i], cfg));
    outputs.push_back(detail::output_from_event(e, i, 0));
  }

  const TranscriptEvent& mem0 = cursor.next("TmsUpdate");
  detail::check_prompt(mem0, build_tms_prompt(std::nullopt, outputs, styles));
  TransactiveMemory memory = parse_tms_response(*mem0.completion_text);
  memory.round = 0;

  for (int round = 1; round < cfg.round_count; ++round) {
    const DistanceMatrix dmatrix = distance_matrix(outputs);
    std::vector<ReferenceSet> refsets;
    for (int i = 0; i < cfg.agent_count; ++i) {
      const TranscriptEvent& e = cursor.next("RefSelect");
      Rng rng = agent_round_rng(cfg.rng_seed, static_cast<std::uint64_t>(round),
                                static_cast<std::uint64_t>(i));
      ReferenceSet rs = select_refs(i, dmatrix, cfg.reference_count, cfg.exploration_rate, rng);
      std::vector<bool> flags(rs.rewired_flags.begin(), rs.rewired_flags.end());
      if (!e.refs || *e.refs != rs.refs || !e.rewired || *e.rewired != flags)
        throw Error(Errc::ReplayDivergence,
                    "event " + std::to_string(e.index) +
                        ": re-selected references differ from the recorded reference set");
      refsets.push_back(std::move(rs));
    }

    std::vector<AgentOutput> next_outputs;
    for (int i = 0; i < cfg.agent_count; ++i) {
      const TranscriptEvent& e = cursor.next("Refine");
      std::vector<AgentOutput> refs;
      for (int peer : refsets[i].refs) refs.push_back(outputs[peer]);
      detail::check_prompt(
          e, assemble_refinement_prompt(task, styles[i], memory, outputs[i], refs, cfg));
      next_outputs.push_back(detail::output_from_event(e, i, round));
    }
    outputs = std::move(next_outputs);

    const TranscriptEvent& mem_event = cursor.next("TmsUpdate");
    detail::check_prompt(mem_event, build_tms_prompt(memory, outputs, styles));
    memory = parse_tms_response(*mem_event.completion_text);
    memory.round = round;
  }

  const TranscriptEvent& synth_event = cursor.next("Synthesize");
  const ThinkingStyle* style = nullptr;
  if (cfg.synthesizer_mode == SynthMode::InGroup) {
    int chosen;
    if (cfg.random_final_selection) {
      Rng rng = agent_round_rng(cfg.rng_seed, static_cast<std::uint64_t>(cfg.round_count - 1),
                                0xfffffffffffffffdull);
      chosen = static_cast<int>(rng.next_below(outputs.size()));
    } else {
      chosen = pick_centroid_agent(distance_matrix(outputs));
    }
    style = &styles[chosen];
  }
  detail::check_prompt(
      synth_event, build_synth_prompt(task, outputs, memory, cfg.synthesizer_mode, style));
  if (cursor.pos != transcript.events.size())
    throw Error(Errc::ReplayDivergence,
                "trailing events after Synthesize at index " + std::to_string(cursor.pos));
  if (transcript.final_answer && *transcript.final_answer != *synth_event.completion_text)
    throw Error(Errc::ReplayDivergence,
                "final answer record differs from the Synthesize completion");
  return FinalAnswer{*synth_event.completion_text, cfg.synthesizer_mode};
}

}  // namespace cothinker
