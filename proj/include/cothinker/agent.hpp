#pragma once

#include <string>
#include <vector>

#include "cothinker/common.hpp"
#include "cothinker/config.hpp"
#include "cothinker/embedding.hpp"
#include "cothinker/gateway.hpp"
#include "cothinker/memory.hpp"
#include "cothinker/moderator.hpp"
#include "cothinker/styles.hpp"

namespace cothinker {

struct OutputGen {
  AgentOutput output;
  ChatRequest request;
  Completion completion;
};

inline ChatRequest build_initial_prompt(const Task& task, const ThinkingStyle& style,
                                        const EngineConfig& cfg) {
  std::string prompt =
      "You are Agent " + std::to_string(style.agent_id) +
      ". Your assigned thinking style for this task is: \"" + style.adapted_text + "\".\n"
      "The overall task is: \"" + task.description + "\".\n\n"
      "Keeping your assigned thinking style in mind, please provide your thoughts/solution:\n";
  ChatRequest req;
  req.user_text = std::move(prompt);
  req.temperature = cfg.initial_temperature;
  req.max_tokens = cfg.max_output_tokens;
  req.tag = RequestTag::InitialGen;
  return req;
}

inline OutputGen initial_generation(const Task& task, const ThinkingStyle& style,
                                    ChatBackend& backend, EmbeddingProvider& embedder,
                                    const EngineConfig& cfg) {
  ChatRequest req = build_initial_prompt(task, style, cfg);
  std::uint64_t salt = fnv1a64_pair(0, static_cast<std::uint64_t>(style.agent_id)) ^
                       fnv1a64(to_string(RequestTag::InitialGen));
  Completion completion = backend.complete(req, salt);
  AgentOutput out;
  out.agent_id = style.agent_id;
  out.round = 0;
  out.text = completion.text;
  out.embedding = embedder.embed(out.text);
  return OutputGen{std::move(out), std::move(req), std::move(completion)};
}

// Prompt layout: style, task, rendered memory, own previous output, then
// exactly N reference blocks in ReferenceSet order, then the instruction.
inline ChatRequest assemble_refinement_prompt(const Task& task, const ThinkingStyle& style,
                                              const TransactiveMemory& memory,
                                              const AgentOutput& own_prev,
                                              const std::vector<AgentOutput>& refs,
                                              const EngineConfig& cfg) {
  if (own_prev.agent_id != style.agent_id)
    throw Error(Errc::SelfReference, "own_prev belongs to a different agent");
  if (static_cast<int>(refs.size()) != cfg.reference_count)
    throw Error(Errc::RefCountMismatch,
                "expected " + std::to_string(cfg.reference_count) + " references, got " +
                    std::to_string(refs.size()));
  for (const auto& r : refs)
    if (r.agent_id == style.agent_id)
      throw Error(Errc::SelfReference,
                  "agent " + std::to_string(style.agent_id) + " references itself");

  std::string prompt =
      "You are Agent " + std::to_string(style.agent_id) +
      ". Your assigned thinking style for this task is: \"" + style.adapted_text + "\".\n"
      "The overall task is: \"" + task.description + "\".\n\n";
  prompt += render_memory(memory);
  prompt += "\n\nYour Previous Output:\n\"" + own_prev.text + "\"\n\n";
  prompt += "Reference Outputs from Peers:\n";
  for (size_t i = 0; i < refs.size(); ++i)
    prompt += "Reference " + std::to_string(i + 1) + " (from Agent " +
              std::to_string(refs[i].agent_id) + "): \"" + refs[i].text + "\"\n";
  prompt +=
      "\nBased on all the above, and keeping your thinking style in mind, provide your "
      "refined thoughts/contribution for the current round:\n";

  ChatRequest req;
  req.user_text = std::move(prompt);
  req.temperature = cfg.refinement_temperature;
  req.frequency_penalty = cfg.refinement_frequency_penalty;
  req.max_tokens = cfg.max_output_tokens;
  req.tag = RequestTag::Refine;
  return req;
}

inline OutputGen refine(const Task& task, const ThinkingStyle& style,
                        const TransactiveMemory& memory, const AgentOutput& own_prev,
                        const std::vector<AgentOutput>& refs, ChatBackend& backend,
                        EmbeddingProvider& embedder, const EngineConfig& cfg) {
  ChatRequest req = assemble_refinement_prompt(task, style, memory, own_prev, refs, cfg);
  std::uint64_t salt = fnv1a64_pair(static_cast<std::uint64_t>(own_prev.round) + 1,
                                    static_cast<std::uint64_t>(style.agent_id)) ^
                       fnv1a64(to_string(RequestTag::Refine));
  Completion completion = backend.complete(req, salt);
  AgentOutput out;
  out.agent_id = style.agent_id;
  out.round = own_prev.round + 1;
  out.text = completion.text;
  out.embedding = embedder.embed(out.text);
  return OutputGen{std::move(out), std::move(req), std::move(completion)};
}

}  // namespace cothinker
