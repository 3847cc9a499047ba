#pragma once

#include <string>
#include <vector>

#include "cothinker/common.hpp"
#include "cothinker/config.hpp"
#include "cothinker/embedding.hpp"
#include "cothinker/gateway.hpp"
#include "cothinker/memory.hpp"
#include "cothinker/styles.hpp"

namespace cothinker {

struct FinalAnswer {
  std::string text;
  SynthMode source_mode = SynthMode::External;
};

// Agent whose output has minimal mean cognitive distance to all peers
// (ties by lowest id). Used for in-group synthesis and MAD answer selection.
inline int pick_centroid_agent(const DistanceMatrix& dmatrix) {
  const int m = static_cast<int>(dmatrix.size());
  if (m == 1) return 0;
  int best = 0;
  double best_mean = 0.0;
  for (int i = 0; i < m; ++i) {
    double sum = 0.0;
    for (int j = 0; j < m; ++j)
      if (j != i) sum += dmatrix[i][j];
    double mean = sum / (m - 1);
    if (i == 0 || mean < best_mean) {
      best = i;
      best_mean = mean;
    }
  }
  return best;
}

inline ChatRequest build_synth_prompt(const Task& task, const std::vector<AgentOutput>& outputs,
                                      const TransactiveMemory& memory, SynthMode mode,
                                      const ThinkingStyle* ingroup_style = nullptr) {
  if (outputs.empty())
    throw Error(Errc::MixedRounds, "build_synth_prompt: no outputs");
  for (const auto& o : outputs)
    if (o.round != outputs.front().round)
      throw Error(Errc::MixedRounds, "build_synth_prompt: outputs span multiple rounds");

  std::string prompt;
  if (mode == SynthMode::InGroup && ingroup_style != nullptr)
    prompt += "You are Agent " + std::to_string(ingroup_style->agent_id) +
              ". Your assigned thinking style for this task is: \"" +
              ingroup_style->adapted_text + "\".\n\n";
  prompt += "Original Task: \"" + task.description + "\"\n";
  prompt += "After collaborative thinking, the final individual perspectives from M=" +
            std::to_string(outputs.size()) + " agents are:\n";
  for (const auto& o : outputs)
    prompt += "Agent " + std::to_string(o.agent_id) + ": \"" + o.text + "\"\n";
  prompt += "The final collective understanding synthesized during their collaboration is:\n\"" +
            memory.raw_text + "\"\n";
  prompt +=
      "Based on all this information, please generate a comprehensive, high-quality, and "
      "coherent final solution to the original task.\n";

  ChatRequest req;
  req.user_text = std::move(prompt);
  req.temperature = 0.0;
  req.tag = RequestTag::Synthesize;
  return req;
}

struct SynthGen {
  FinalAnswer answer;
  ChatRequest request;
  Completion completion;
  int ingroup_agent = -1;  // chosen synthesizing agent (InGroup mode only)
};

inline SynthGen synthesize(const Task& task, const std::vector<AgentOutput>& outputs,
                           const TransactiveMemory& memory,
                           const std::vector<ThinkingStyle>& styles, ChatBackend& backend,
                           const EngineConfig& cfg) {
  const ThinkingStyle* style = nullptr;
  int chosen = -1;
  if (cfg.synthesizer_mode == SynthMode::InGroup) {
    if (cfg.random_final_selection) {
      Rng rng = agent_round_rng(cfg.rng_seed, static_cast<std::uint64_t>(outputs.front().round),
                                0xfffffffffffffffdull);
      chosen = static_cast<int>(rng.next_below(outputs.size()));
    } else {
      chosen = pick_centroid_agent(distance_matrix(outputs));
    }
    for (const auto& s : styles)
      if (s.agent_id == chosen) style = &s;
  }
  ChatRequest req = build_synth_prompt(task, outputs, memory, cfg.synthesizer_mode, style);
  req.temperature = cfg.refinement_temperature;
  req.frequency_penalty = cfg.refinement_frequency_penalty;
  req.max_tokens = cfg.max_output_tokens;
  std::uint64_t salt = fnv1a64_pair(static_cast<std::uint64_t>(outputs.front().round),
                                    0xffffffffffffffffull) ^
                       fnv1a64(to_string(RequestTag::Synthesize));
  Completion completion = backend.complete(req, salt);
  return SynthGen{FinalAnswer{completion.text, cfg.synthesizer_mode}, std::move(req),
                  std::move(completion), chosen};
}

}  // namespace cothinker
