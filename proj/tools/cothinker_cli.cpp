#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "cothinker/baselines.hpp"
#include "cothinker/engine.hpp"

namespace {

// Exit codes: 0 ok, 1 generic, 2 file not found, 3 config, 4 backend,
// 5 replay divergence, 6 malformed transcript.
int exit_code_for(const cothinker::Error& e) {
  switch (e.code()) {
    case cothinker::Errc::FileNotFound: return 2;
    case cothinker::Errc::InvalidConfig:
    case cothinker::Errc::UnknownStrategy: return 3;
    case cothinker::Errc::BackendUnavailable:
    case cothinker::Errc::MalformedResponse: return 4;
    case cothinker::Errc::ReplayDivergence: return 5;
    case cothinker::Errc::MalformedTranscript: return 6;
    default: return 1;
  }
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw cothinker::Error(cothinker::Errc::FileNotFound, "cannot open: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

std::string file_stem(const std::string& path) {
  auto slash = path.find_last_of("/\\");
  std::string name = slash == std::string::npos ? path : path.substr(slash + 1);
  auto dot = name.find_last_of('.');
  return dot == std::string::npos ? name : name.substr(0, dot);
}

struct RunOptions {
  std::string task_path;
  std::string config_path;
  std::string out_path;
  std::string inventory_path;
  std::string synth_mode;
  std::vector<std::string> overrides;
  std::uint64_t seed = 0;
  bool seed_set = false;
  bool mock = false;
};

void add_run_flags(CLI::App* cmd, RunOptions& opt) {
  cmd->add_option("--task", opt.task_path, "Task description file")->required();
  cmd->add_option("--config", opt.config_path, "Engine config JSON file");
  cmd->add_option("--out", opt.out_path, "Transcript output path (JSONL)");
  cmd->add_option("--inventory", opt.inventory_path, "Thinking style inventory JSON file");
  cmd->add_option("--seed", opt.seed, "RNG seed")->each([&](const std::string&) {
    opt.seed_set = true;
  });
  cmd->add_flag("--mock", opt.mock, "Use the deterministic offline backend");
  cmd->add_option("--set", opt.overrides, "Config override key=value (repeatable)");
  cmd->add_option("--synth-mode", opt.synth_mode, "Synthesizer mode: external or ingroup")
      ->check(CLI::IsMember({"external", "ingroup"}));
}

cothinker::EngineConfig resolve_config(const RunOptions& opt) {
  cothinker::EngineConfig cfg;
  if (!opt.config_path.empty())
    cfg = cothinker::config_from_json(cothinker::json::parse(read_file(opt.config_path)));
  for (const auto& kv : opt.overrides) {
    auto eq = kv.find('=');
    if (eq == std::string::npos)
      throw cothinker::Error(cothinker::Errc::InvalidConfig,
                             "--set expects key=value, got '" + kv + "'");
    cothinker::apply_override(cfg, kv.substr(0, eq), kv.substr(eq + 1));
  }
  if (opt.seed_set) cfg.rng_seed = opt.seed;
  if (!opt.synth_mode.empty())
    cfg.synthesizer_mode = cothinker::synth_mode_from_string(opt.synth_mode);
  if (opt.mock) {
    cfg.chat_backend.kind = cothinker::BackendKind::Mock;
    cfg.embedding_backend.kind = cothinker::BackendKind::Mock;
  } else if (cfg.chat_backend.kind == cothinker::BackendKind::Mock) {
    const char* base = std::getenv("COTHINKER_API_BASE");
    if (base != nullptr) {
      cothinker::BackendDescriptor b;
      b.kind = cothinker::BackendKind::Http;
      b.base_url = base;
      if (const char* key = std::getenv("COTHINKER_API_KEY")) b.api_key = key;
      if (const char* model = std::getenv("COTHINKER_MODEL")) b.model = model;
      cfg.chat_backend = b;
      cfg.embedding_backend = b;
    }
  }
  return cothinker::validate_config(cfg);
}

cothinker::Task load_task(const std::string& path) {
  return cothinker::make_task(file_stem(path), cothinker::trim(read_file(path)));
}

void emit(const RunOptions& opt, const cothinker::RunTranscript& transcript,
          const cothinker::FinalAnswer& answer) {
  if (!opt.out_path.empty()) cothinker::write_transcript_file(transcript, opt.out_path);
  std::cout << answer.text << "\n";
}

int cmd_run(const RunOptions& opt) {
  const cothinker::EngineConfig cfg = resolve_config(opt);
  const cothinker::Task task = load_task(opt.task_path);
  cothinker::StyleInventory inventory = cothinker::default_style_inventory();
  if (!opt.inventory_path.empty())
    inventory =
        cothinker::inventory_from_json(cothinker::json::parse(read_file(opt.inventory_path)));
  cothinker::RunTranscript transcript;
  auto backend = cothinker::make_chat_backend(cfg);
  auto embedder = cothinker::make_embedding_provider(cfg);
  try {
    cothinker::FinalAnswer answer =
        cothinker::engine_run(task, cfg, *backend, *embedder, inventory, transcript);
    emit(opt, transcript, answer);
  } catch (...) {
    // Flush the partial transcript before propagating the error.
    if (!opt.out_path.empty() && !transcript.events.empty())
      cothinker::write_transcript_file(transcript, opt.out_path);
    throw;
  }
  return 0;
}

int cmd_baseline(const RunOptions& opt, const std::string& strategy_name) {
  const cothinker::Strategy strategy = cothinker::strategy_from_string(strategy_name);
  const cothinker::EngineConfig cfg = resolve_config(opt);
  const cothinker::Task task = load_task(opt.task_path);
  cothinker::RunTranscript transcript;
  cothinker::FinalAnswer answer = cothinker::run_baseline(strategy, task, cfg, transcript);
  emit(opt, transcript, answer);
  return 0;
}

int cmd_replay(const std::string& path) {
  const cothinker::RunTranscript transcript = cothinker::read_transcript_file(path);
  cothinker::FinalAnswer answer = cothinker::engine_replay(transcript);
  std::cout << "replay ok: " << transcript.events.size() << " events, zero divergences\n"
            << answer.text << "\n";
  return 0;
}

int cmd_netstats(const std::string& path) {
  const cothinker::RunTranscript transcript = cothinker::read_transcript_file(path);
  std::map<int, std::vector<cothinker::ReferenceSet>> rounds;
  std::map<int, std::pair<long long, long long>> rewired;  // round -> (rewired, total)
  for (const auto& e : transcript.events) {
    if (e.type != "RefSelect") continue;
    if (!e.agent_id || !e.refs || !e.rewired)
      throw cothinker::Error(cothinker::Errc::MalformedTranscript,
                             "RefSelect event " + std::to_string(e.index) + " lacks refs");
    cothinker::ReferenceSet rs;
    rs.agent_id = *e.agent_id;
    rs.refs = *e.refs;
    rs.rewired_flags = *e.rewired;
    rounds[e.round].push_back(std::move(rs));
    auto& [hit, total] = rewired[e.round];
    for (bool f : *e.rewired) hit += f ? 1 : 0;
    total += static_cast<long long>(e.rewired->size());
  }
  if (rounds.empty()) {
    std::cout << "no reference-selection events in " << path << "\n";
    return 0;
  }
  for (auto& [round, refsets] : rounds) {
    std::sort(refsets.begin(), refsets.end(),
              [](const auto& a, const auto& b) { return a.agent_id < b.agent_id; });
    const cothinker::CommGraph graph = cothinker::build_round_graph(refsets, round);
    const cothinker::GraphStats stats = cothinker::graph_stats(graph);
    std::map<int, int> histogram;  // in-degree -> node count
    {
      std::vector<int> indeg(graph.node_count, 0);
      for (auto [u, v] : graph.edges) ++indeg[v];
      for (int d : indeg) ++histogram[d];
    }
    std::cout << "round " << round << ": nodes=" << graph.node_count
              << " edges=" << graph.edges.size() << "\n  in-degree histogram:";
    for (auto [deg, count] : histogram) std::cout << " " << deg << "x" << count;
    const auto& [hit, total] = rewired[round];
    std::cout << "\n  clustering=" << stats.clustering
              << " path_length=" << stats.path_length
              << " unreachable_fraction=" << stats.unreachable_fraction
              << "\n  rewired_fraction=" << (total > 0 ? double(hit) / double(total) : 0.0)
              << "\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"CoThinker: multi-agent LLM collaboration engine"};
  app.require_subcommand(1);

  RunOptions run_opt;
  CLI::App* run = app.add_subcommand("run", "Execute a full collaboration run");
  add_run_flags(run, run_opt);

  RunOptions base_opt;
  std::string strategy;
  CLI::App* baseline = app.add_subcommand("baseline", "Execute a single-strategy baseline");
  add_run_flags(baseline, base_opt);
  baseline->add_option("--strategy", strategy, "io | cot | self-refine | mad | dmad")
      ->required();

  std::string netstats_path;
  CLI::App* netstats = app.add_subcommand("netstats", "Per-round communication graph metrics");
  netstats->add_option("transcript", netstats_path, "Transcript JSONL file")->required();

  std::string replay_path;
  CLI::App* replay = app.add_subcommand("replay", "Verify a transcript by deterministic replay");
  replay->add_option("transcript", replay_path, "Transcript JSONL file")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) return cmd_run(run_opt);
    if (baseline->parsed()) return cmd_baseline(base_opt, strategy);
    if (netstats->parsed()) return cmd_netstats(netstats_path);
    if (replay->parsed()) return cmd_replay(replay_path);
  } catch (const cothinker::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_code_for(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
