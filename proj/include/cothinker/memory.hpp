#pragma once

#include <algorithm>
#include <optional>
#include <string>
#include <vector>

#include "cothinker/common.hpp"
#include "cothinker/embedding.hpp"
#include "cothinker/gateway.hpp"
#include "cothinker/styles.hpp"

namespace cothinker {

inline constexpr const char* kTmsExpertiseHeader = "EXPERTISE DIRECTORY:";
inline constexpr const char* kTmsKnowledgeHeader = "SHARED KNOWLEDGE:";
inline constexpr const char* kTmsIssuesHeader = "UNRESOLVED ISSUES:";
inline constexpr const char* kFirstRoundMarker = "(none - first round)";
inline constexpr const char* kMemoryBlockHeader = "Collective Summary from Previous Round:";

struct TransactiveMemory {
  int round = 0;
  std::string expertise_directory;
  std::string shared_knowledge;
  std::string unresolved_issues;
  std::string raw_text;  // full completion as emitted by the TMS manager
};

inline ChatRequest build_tms_prompt(const std::optional<TransactiveMemory>& prev,
                                    const std::vector<AgentOutput>& outputs,
                                    const std::vector<ThinkingStyle>& styles) {
  if (outputs.empty())
    throw Error(Errc::MixedRounds, "build_tms_prompt: no outputs");
  for (const auto& o : outputs)
    if (o.round != outputs.front().round)
      throw Error(Errc::MixedRounds, "build_tms_prompt: outputs span multiple rounds");

  std::string prompt =
      "You are the TMS Manager maintaining the group's collective memory.\n\n"
      "Previous collective memory:\n";
  prompt += prev ? prev->raw_text : kFirstRoundMarker;
  prompt += "\n\nAgent outputs from round " + std::to_string(outputs.front().round) + ":\n";
  for (const auto& o : outputs) {
    std::string style_text = "unknown";
    auto it = std::find_if(styles.begin(), styles.end(),
                           [&](const ThinkingStyle& s) { return s.agent_id == o.agent_id; });
    if (it != styles.end()) style_text = it->adapted_text;
    prompt += "Agent " + std::to_string(o.agent_id) + " (style: " + style_text + "): \"" +
              o.text + "\"\n";
  }
  prompt +=
      "\nUpdate the collective memory: list each agent's key contributions, the points of "
      "consensus and established facts, and the discrepancies or open questions the group "
      "should address next. Respond with exactly these three headed sections:\n";
  prompt += std::string(kTmsExpertiseHeader) + "\n" + kTmsKnowledgeHeader + "\n" +
            kTmsIssuesHeader + "\n";

  ChatRequest req;
  req.user_text = std::move(prompt);
  req.temperature = 0.0;
  req.tag = RequestTag::TmsUpdate;
  return req;
}

namespace detail {
inline size_t find_ci(const std::string& haystack, const std::string& needle) {
  auto it = std::search(haystack.begin(), haystack.end(), needle.begin(), needle.end(),
                        [](char a, char b) {
                          return std::tolower(static_cast<unsigned char>(a)) ==
                                 std::tolower(static_cast<unsigned char>(b));
                        });
  return it == haystack.end() ? std::string::npos
                              : static_cast<size_t>(it - haystack.begin());
}
}  // namespace detail

// Splits on the three headers, case-insensitively and order-independently.
inline TransactiveMemory parse_tms_response(const std::string& text) {
  const std::string headers[3] = {kTmsExpertiseHeader, kTmsKnowledgeHeader, kTmsIssuesHeader};
  size_t pos[3];
  for (int i = 0; i < 3; ++i) {
    pos[i] = detail::find_ci(text, headers[i]);
    if (pos[i] == std::string::npos) {
      std::string name = headers[i];
      name.pop_back();  // drop the colon
      throw Error(Errc::MissingSection, "missing section: " + name);
    }
  }
  std::string sections[3];
  for (int i = 0; i < 3; ++i) {
    size_t begin = pos[i] + headers[i].size();
    size_t end = text.size();
    for (int j = 0; j < 3; ++j)
      if (j != i && pos[j] > pos[i]) end = std::min(end, pos[j]);
    sections[i] = trim(text.substr(begin, end - begin));
    if (sections[i].empty()) {
      std::string name = headers[i];
      name.pop_back();
      throw Error(Errc::MissingSection, "empty section: " + name);
    }
  }
  TransactiveMemory mem;
  mem.expertise_directory = std::move(sections[0]);
  mem.shared_knowledge = std::move(sections[1]);
  mem.unresolved_issues = std::move(sections[2]);
  mem.raw_text = text;
  return mem;
}

struct MemoryGen {
  TransactiveMemory memory;
  ChatRequest request;
  Completion completion;
};

// One TmsUpdate completion per round; acts as the round barrier.
inline MemoryGen update_memory(const std::optional<TransactiveMemory>& prev,
                               const std::vector<AgentOutput>& outputs,
                               const std::vector<ThinkingStyle>& styles, ChatBackend& backend,
                               double temperature = 0.0, int max_output_tokens = 2048) {
  ChatRequest req = build_tms_prompt(prev, outputs, styles);
  req.temperature = temperature;
  req.max_tokens = max_output_tokens;
  std::uint64_t salt = fnv1a64_pair(static_cast<std::uint64_t>(outputs.front().round),
                                    0xfffffffffffffffeull) ^
                       fnv1a64(to_string(RequestTag::TmsUpdate));
  Completion completion = backend.complete(req, salt);
  TransactiveMemory mem = parse_tms_response(completion.text);
  mem.round = outputs.front().round;
  return MemoryGen{std::move(mem), std::move(req), std::move(completion)};
}

// The block inserted verbatim into agent prompts.
inline std::string render_memory(const TransactiveMemory& mem) {
  return std::string(kMemoryBlockHeader) + "\n" + mem.raw_text;
}

}  // namespace cothinker
