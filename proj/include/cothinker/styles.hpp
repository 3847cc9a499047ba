#pragma once

#include <future>
#include <string>
#include <vector>

#include <json.hpp>

#include "cothinker/common.hpp"
#include "cothinker/config.hpp"
#include "cothinker/gateway.hpp"

namespace cothinker {

struct StyleProfile {
  std::string label;        // e.g. "Legislative-Global"
  std::string description;  // one-line rendering of the dimension combination

  bool operator==(const StyleProfile&) const = default;
};

struct StyleInventory {
  std::vector<StyleProfile> profiles;
};

// Base inventory built from Sternberg's mental self-government dimensions:
// Functions x Levels, Forms x Scope, Leanings x Levels, 18 combinations.
inline StyleInventory default_style_inventory() {
  StyleInventory inv;
  const char* functions[] = {"Legislative", "Executive", "Judicial"};
  const char* function_desc[] = {
      "prefers creating and formulating its own approaches",
      "prefers implementing and carrying out well-defined procedures",
      "prefers evaluating, comparing and judging existing ideas"};
  const char* levels[] = {"Global", "Local"};
  const char* level_desc[] = {"working on the big picture and abstractions",
                              "working on concrete details and specifics"};
  for (int f = 0; f < 3; ++f)
    for (int l = 0; l < 2; ++l)
      inv.profiles.push_back({std::string(functions[f]) + "-" + levels[l],
                              std::string(functions[f]) + " function with a " + levels[l] +
                                  " level preference: " + function_desc[f] + ", " +
                                  level_desc[l] + "."});
  const char* forms[] = {"Monarchic", "Hierarchic", "Oligarchic", "Anarchic"};
  const char* form_desc[] = {
      "pursues one goal at a time with full focus",
      "ranks multiple goals and allocates effort by priority",
      "pursues several equally weighted goals in parallel",
      "approaches problems flexibly without a fixed system"};
  const char* scopes[] = {"Internal", "External"};
  const char* scope_desc[] = {"working independently on the problem itself",
                              "working through interaction and exchange with others"};
  for (int f = 0; f < 4; ++f)
    for (int s = 0; s < 2; ++s)
      inv.profiles.push_back({std::string(forms[f]) + "-" + scopes[s],
                              std::string(forms[f]) + " form with an " + scopes[s] +
                                  " scope: " + form_desc[f] + ", " + scope_desc[s] + "."});
  const char* leanings[] = {"Liberal", "Conservative"};
  const char* leaning_desc[] = {"favors novelty and unconventional approaches",
                                "favors established procedures and proven methods"};
  for (int le = 0; le < 2; ++le)
    for (int l = 0; l < 2; ++l)
      inv.profiles.push_back({std::string(leanings[le]) + "-" + levels[l],
                              std::string(leanings[le]) + " leaning with a " + levels[l] +
                                  " level preference: " + leaning_desc[le] + ", " +
                                  level_desc[l] + "."});
  return inv;
}

inline json inventory_to_json(const StyleInventory& inv) {
  json arr = json::array();
  for (const auto& p : inv.profiles)
    arr.push_back({{"label", p.label}, {"description", p.description}});
  return arr;
}

inline StyleInventory inventory_from_json(const json& j) {
  if (!j.is_array() || j.empty())
    throw Error(Errc::InvalidConfig, "style inventory: expected a non-empty JSON array");
  StyleInventory inv;
  for (const auto& e : j) {
    StyleProfile p{e.at("label").get<std::string>(), e.at("description").get<std::string>()};
    if (p.label.empty() || p.description.empty())
      throw Error(Errc::InvalidConfig, "style inventory: label/description must be non-empty");
    inv.profiles.push_back(std::move(p));
  }
  return inv;
}

struct ThinkingStyle {
  int agent_id = 0;
  StyleProfile base_profile;  // psi
  std::string adapted_text;   // phi, at most 3 sentences
};

inline constexpr const char* kStyleCueLine = "Task-Specific Style for an agent:";

inline ChatRequest build_orchestrator_prompt(const Task& task, const StyleProfile& profile) {
  std::string prompt =
      "Given the primary task: \"" + task.description + "\"\n"
      "And the base thinking style profile (from Sternberg's Theory of Mental "
      "Self-Government): \"" + profile.label + ": " + profile.description + "\"\n\n"
      "Generate a concise (1-2 sentences) task-specific adaptation of this thinking style "
      "profile that would be most beneficial for an agent contributing to this primary task. "
      "The agent should focus its reasoning and output according to this adapted style.\n" +
      kStyleCueLine + "\n";
  ChatRequest req;
  req.user_text = std::move(prompt);
  req.temperature = 0.25;
  req.tag = RequestTag::Orchestrate;
  return req;
}

struct StyleGen {
  ThinkingStyle style;
  ChatRequest request;
  Completion completion;
};

// One orchestrator call per agent, base profiles assigned round-robin.
// Per-agent call salts keep mock outputs distinct even when profiles wrap.
inline std::vector<StyleGen> orchestrate_styles(const Task& task, const StyleInventory& inventory,
                                                int agent_count, ChatBackend& backend,
                                                int max_output_tokens = 2048) {
  if (agent_count < 1)
    throw Error(Errc::InvalidConfig, "orchestrate_styles: M must be >= 1");
  if (inventory.profiles.empty())
    throw Error(Errc::InvalidConfig, "orchestrate_styles: inventory is empty");
  std::vector<std::future<StyleGen>> futures;
  futures.reserve(agent_count);
  for (int i = 0; i < agent_count; ++i) {
    futures.push_back(std::async(std::launch::async, [&, i] {
      const StyleProfile& profile = inventory.profiles[i % inventory.profiles.size()];
      ChatRequest req = build_orchestrator_prompt(task, profile);
      req.max_tokens = max_output_tokens;
      std::uint64_t salt = fnv1a64_pair(0, static_cast<std::uint64_t>(i)) ^
                           fnv1a64(to_string(RequestTag::Orchestrate));
      Completion completion = backend.complete(req, salt);
      std::string adapted = truncate_sentences(trim(completion.text), 3);
      if (adapted.empty())
        throw Error(Errc::EmptyStyle, "agent " + std::to_string(i) + ": blank style completion");
      return StyleGen{ThinkingStyle{i, profile, std::move(adapted)}, std::move(req),
                      std::move(completion)};
    }));
  }
  std::vector<StyleGen> result;
  result.reserve(agent_count);
  for (auto& f : futures) result.push_back(f.get());
  return result;
}

}  // namespace cothinker
