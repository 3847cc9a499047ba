#pragma once

#include <future>
#include <string>
#include <vector>

#include "cothinker/common.hpp"
#include "cothinker/config.hpp"
#include "cothinker/embedding.hpp"
#include "cothinker/engine.hpp"
#include "cothinker/gateway.hpp"
#include "cothinker/synthesizer.hpp"
#include "cothinker/transcript.hpp"

namespace cothinker {

enum class Strategy { IO, CoT, SelfRefine, MAD, DMAD };

inline std::string to_string(Strategy s) {
  switch (s) {
    case Strategy::IO: return "io";
    case Strategy::CoT: return "cot";
    case Strategy::SelfRefine: return "self-refine";
    case Strategy::MAD: return "mad";
    case Strategy::DMAD: return "dmad";
  }
  return "?";
}

inline Strategy strategy_from_string(const std::string& s) {
  if (s == "io") return Strategy::IO;
  if (s == "cot") return Strategy::CoT;
  if (s == "self-refine" || s == "sr") return Strategy::SelfRefine;
  if (s == "mad") return Strategy::MAD;
  if (s == "dmad") return Strategy::DMAD;
  throw Error(Errc::UnknownStrategy, "unknown strategy '" + s + "'");
}

inline constexpr const char* kAnswerFooter = "\n\nProvide your final answer.";

namespace detail {

inline ChatRequest baseline_request(std::string prompt, double temperature,
                                    double frequency_penalty, const EngineConfig& cfg) {
  ChatRequest req;
  req.user_text = std::move(prompt);
  req.temperature = temperature;
  req.frequency_penalty = frequency_penalty;
  req.max_tokens = cfg.max_output_tokens;
  req.tag = RequestTag::Baseline;
  return req;
}

// Initial prompt per DMAD strategy slot (i mod 3): direct, chain-of-thought,
// step-back.
inline std::string dmad_instruction(int slot) {
  switch (slot % 3) {
    case 1: return "Let's think step by step.\n";
    case 2:
      return "First take a step back and consider the general principles involved, then "
             "solve the task.\n";
    default: return "";
  }
}

}  // namespace detail

// The five comparison strategies, sharing the gateway, temperature schedule
// (0.25 initial; 0.0 with frequency penalty 0.5 thereafter) and transcript
// machinery with the main engine.
inline FinalAnswer run_baseline(Strategy strategy, const Task& task, const EngineConfig& cfg_raw,
                                ChatBackend& backend, EmbeddingProvider& embedder,
                                RunTranscript& transcript) {
  const EngineConfig cfg = validate_config(cfg_raw);
  transcript = RunTranscript{};
  transcript.run_id = derive_run_id(task, cfg);
  transcript.strategy = to_string(strategy);
  transcript.config = cfg;
  transcript.inventory = default_style_inventory();
  transcript.task = task;

  auto push = [&](const ChatRequest& req, const Completion& completion, int round,
                  std::optional<int> agent_id) {
    TranscriptEvent e =
        detail::make_chat_event(cfg, "Baseline", round, agent_id, req, completion);
    e.index = static_cast<int>(transcript.events.size());
    transcript.events.push_back(std::move(e));
  };
  auto call = [&](const ChatRequest& req, int round, std::optional<int> agent_id) {
    std::uint64_t salt =
        fnv1a64_pair(static_cast<std::uint64_t>(round),
                     agent_id ? static_cast<std::uint64_t>(*agent_id) : 0xfffffffffffffffcull) ^
        fnv1a64(to_string(strategy));
    Completion completion = backend.complete(req, salt);
    push(req, completion, round, agent_id);
    return completion.text;
  };
  auto finish = [&](std::string text, SynthMode mode) {
    transcript.final_answer = text;
    transcript.final_source_mode = to_string(mode);
    return FinalAnswer{std::move(text), mode};
  };

  switch (strategy) {
    case Strategy::IO: {
      ChatRequest req = detail::baseline_request(task.description + kAnswerFooter,
                                                 cfg.initial_temperature, 0.0, cfg);
      return finish(call(req, 0, std::nullopt), SynthMode::External);
    }
    case Strategy::CoT: {
      ChatRequest req = detail::baseline_request(
          task.description + "\n\nLet's think step by step." + kAnswerFooter,
          cfg.initial_temperature, 0.0, cfg);
      return finish(call(req, 0, std::nullopt), SynthMode::External);
    }
    case Strategy::SelfRefine: {
      ChatRequest initial = detail::baseline_request(task.description + kAnswerFooter,
                                                     cfg.initial_temperature, 0.0, cfg);
      std::string current = call(initial, 0, std::nullopt);
      // T total generations: the initial one plus (T-1) critique+revise cycles.
      for (int round = 1; round < cfg.round_count; ++round) {
        ChatRequest critique = detail::baseline_request(
            "The task was: \"" + task.description + "\"\nYour previous output was:\n\"" +
                current + "\"\n\nCritique your previous output: identify errors, gaps and "
                "weaknesses.",
            cfg.refinement_temperature, cfg.refinement_frequency_penalty, cfg);
        std::string critique_text = call(critique, round, std::nullopt);
        ChatRequest revise = detail::baseline_request(
            "The task was: \"" + task.description + "\"\nYour previous output was:\n\"" +
                current + "\"\nYour critique of it was:\n\"" + critique_text +
                "\"\n\nBased on your critique, generate an improved version." + kAnswerFooter,
            cfg.refinement_temperature, cfg.refinement_frequency_penalty, cfg);
        current = call(revise, round, std::nullopt);
      }
      return finish(std::move(current), SynthMode::External);
    }
    case Strategy::MAD:
    case Strategy::DMAD: {
      const int m = cfg.agent_count;
      std::vector<std::string> solutions(m);
      for (int i = 0; i < m; ++i) {
        std::string instruction =
            strategy == Strategy::DMAD ? detail::dmad_instruction(i) : std::string();
        ChatRequest req = detail::baseline_request(
            "You are Agent " + std::to_string(i) + ".\n" + instruction + task.description +
                kAnswerFooter,
            cfg.initial_temperature, 0.0, cfg);
        solutions[i] = call(req, 0, i);
      }
      for (int round = 1; round < cfg.round_count; ++round) {
        std::vector<std::string> next(m);
        for (int i = 0; i < m; ++i) {
          std::string prompt = "You are Agent " + std::to_string(i) + ".\nThe task is: \"" +
                               task.description + "\"\nYour previous solution:\n\"" +
                               solutions[i] + "\"\n\nSolutions from all other agents:\n";
          for (int j = 0; j < m; ++j)
            if (j != i)
              prompt +=
                  "Agent " + std::to_string(j) + ": \"" + solutions[j] + "\"\n";
          prompt +=
              "\nConsider these peer solutions, critique them if necessary, and refine your "
              "own solution." + std::string(kAnswerFooter);
          ChatRequest req = detail::baseline_request(std::move(prompt),
                                                     cfg.refinement_temperature,
                                                     cfg.refinement_frequency_penalty, cfg);
          next[i] = call(req, round, i);
        }
        solutions = std::move(next);
      }
      // Answer selection mirrors the in-group synthesizer's centroid rule.
      std::vector<AgentOutput> finals;
      for (int i = 0; i < m; ++i)
        finals.push_back(
            AgentOutput{i, cfg.round_count - 1, solutions[i], embedder.embed(solutions[i])});
      int chosen;
      if (cfg.random_final_selection) {
        Rng rng = agent_round_rng(cfg.rng_seed, static_cast<std::uint64_t>(cfg.round_count - 1),
                                  0xfffffffffffffffdull);
        chosen = static_cast<int>(rng.next_below(static_cast<std::uint64_t>(m)));
      } else {
        chosen = pick_centroid_agent(distance_matrix(finals));
      }
      return finish(solutions[chosen], SynthMode::InGroup);
    }
  }
  throw Error(Errc::UnknownStrategy, "unreachable strategy");
}

inline FinalAnswer run_baseline(Strategy strategy, const Task& task, const EngineConfig& cfg,
                                RunTranscript& transcript) {
  auto backend = make_chat_backend(cfg);
  auto embedder = make_embedding_provider(cfg);
  return run_baseline(strategy, task, cfg, *backend, *embedder, transcript);
}

}  // namespace cothinker
