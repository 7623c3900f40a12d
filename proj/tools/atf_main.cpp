// atf: one binary for the whole formalization workflow. Subcommands cover
// generation (formalize), the two tools standalone (precheck, syntax-check,
// consistency-check), trajectory QA (validate, stats), training-data
// preparation (upsample, filter-ei, mine-dpo, mask, dedup, decontaminate)
// and evaluation (eval). Every run writes a manifest with content digests.

#include <atomic>
#include <chrono>
#include <cstdlib>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "atf/backends/http.hpp"
#include "atf/backends/mocks.hpp"
#include "atf/errors.hpp"
#include "atf/eval/metrics.hpp"
#include "atf/hash.hpp"
#include "atf/json_io.hpp"
#include "atf/judge/consistency.hpp"
#include "atf/orch/loop.hpp"
#include "atf/pipeline/ops.hpp"
#include "atf/syntax/precheck.hpp"
#include "atf/syntax/runner.hpp"
#include "atf/types.hpp"

namespace {

using atf::json;

constexpr int kExitOk = 0;
constexpr int kExitItemFailure = 1;
constexpr int kExitConfig = 2;

void log_line(const std::string& command, const std::string& message) {
  std::cerr << "[atf] command=" << command << " " << message << "\n";
}

// ---------------------------------------------------------------------------
// Configuration file
//
// {
//   "run": { ... engine defaults, all fields optional ... },
//   "workers": 0,
//   "model":     {"script": {"default": [...], "per_run": {"id/0": [...]}}}
//              | {"http": {"base_url": ..., "model_name": ..., ...}},
//   "lean":      {"script": [entry, ...]} | {"http": {...}},
//   "judges":    [{"id": ..., "script": [...] | "http": {...}}, ...],
//   "embedding": {"hash": {"dim": 256, "ngram": 3}}
//              | {"table": {"text": [floats], ...}} | {"http": {...}}
// }
//
// Script entries: {"match": {"kind": "contains", "value": "..."},
//                  "response": "..."} for chat,
//                 {"match": ..., "diagnostics": [...]} for the compiler;
// either may carry {"fault": "timeout", "fault_message": "..."} instead.
// ---------------------------------------------------------------------------

atf::backends::RequestMatch parse_match(const json& j) {
  if (!j.contains("match")) return atf::backends::RequestMatch::any();
  const json& m = j.at("match");
  std::string kind = m.value("kind", "any");
  std::string value = m.value("value", "");
  if (kind == "any") return atf::backends::RequestMatch::any();
  if (kind == "contains") return atf::backends::RequestMatch::contains(value);
  if (kind == "equals") return atf::backends::RequestMatch::equals(value);
  throw atf::ConfigError("unknown match kind: " + kind);
}

std::optional<atf::FaultKind> parse_fault(const json& j) {
  if (!j.contains("fault")) return std::nullopt;
  return atf::fault_kind_from_string(j.at("fault").get<std::string>());
}

std::vector<atf::backends::ChatScriptEntry> parse_chat_script(const json& j) {
  std::vector<atf::backends::ChatScriptEntry> script;
  for (const json& e : j) {
    atf::backends::ChatScriptEntry entry;
    entry.match = parse_match(e);
    entry.response = e.value("response", "");
    entry.fault = parse_fault(e);
    entry.fault_message = e.value("fault_message", "");
    script.push_back(std::move(entry));
  }
  return script;
}

std::vector<atf::backends::LeanScriptEntry> parse_lean_script(const json& j) {
  std::vector<atf::backends::LeanScriptEntry> script;
  for (const json& e : j) {
    atf::backends::LeanScriptEntry entry;
    entry.match = parse_match(e);
    if (e.contains("diagnostics")) {
      for (const json& d : e.at("diagnostics")) {
        entry.diagnostics.push_back(atf::diagnostic_from_json(d));
      }
    }
    entry.fault = parse_fault(e);
    entry.fault_message = e.value("fault_message", "");
    script.push_back(std::move(entry));
  }
  return script;
}

atf::backends::EndpointConfig parse_endpoint(const json& j) {
  atf::backends::EndpointConfig cfg;
  cfg.base_url = j.value("base_url", "");
  cfg.model_name = j.value("model_name", "");
  cfg.timeout_s = j.value("timeout_s", cfg.timeout_s);
  cfg.max_retries = j.value("max_retries", cfg.max_retries);
  cfg.auth_env = j.value("auth_env", "");
  if (cfg.base_url.empty()) {
    throw atf::ConfigError("http backend needs a base_url");
  }
  return cfg;
}

struct AppConfig {
  atf::RunConfig run;
  int workers = 0;
  json raw = json::object();  // snapshot for the manifest

  json model = json::object();
  json lean = json::object();
  json judges = json::array();
  json embedding = json::object();
};

AppConfig load_config(const std::string& path) {
  AppConfig cfg;
  if (path.empty()) return cfg;
  json j = json::parse(atf::read_file(path), nullptr, false);
  if (j.is_discarded()) throw atf::ConfigError("bad JSON in " + path);
  cfg.raw = j;
  if (j.contains("run")) {
    const json& r = j.at("run");
    cfg.run.max_revisions = r.value("max_revisions", cfg.run.max_revisions);
    cfg.run.samples_per_query =
        r.value("samples_per_query", cfg.run.samples_per_query);
    cfg.run.temperature = r.value("temperature", cfg.run.temperature);
    cfg.run.batch_size = r.value("batch_size", cfg.run.batch_size);
    cfg.run.compile_timeout_s =
        r.value("compile_timeout_s", cfg.run.compile_timeout_s);
    if (r.contains("judge_order")) {
      cfg.run.judge_order =
          r.at("judge_order").get<std::vector<std::string>>();
    }
    cfg.run.decontamination_threshold = r.value(
        "decontamination_threshold", cfg.run.decontamination_threshold);
  }
  cfg.workers = j.value("workers", 0);
  if (j.contains("model")) cfg.model = j.at("model");
  if (j.contains("lean")) cfg.lean = j.at("lean");
  if (j.contains("judges")) cfg.judges = j.at("judges");
  if (j.contains("embedding")) cfg.embedding = j.at("embedding");
  atf::validate(cfg.run);
  return cfg;
}

std::unique_ptr<atf::backends::LeanClient> make_lean_client(
    const AppConfig& cfg) {
  if (cfg.lean.contains("script")) {
    return std::make_unique<atf::backends::ScriptedLeanClient>(
        parse_lean_script(cfg.lean.at("script")));
  }
  if (cfg.lean.contains("http")) {
    return std::make_unique<atf::backends::HttpLeanClient>(
        parse_endpoint(cfg.lean.at("http")));
  }
  throw atf::ConfigError("config has no usable \"lean\" backend");
}

// Chat script for one (query, sample) slot: "per_run" entries keyed
// "<query_id>/<sample_index>" win over "default".
std::unique_ptr<atf::backends::ChatClient> make_model_client(
    const AppConfig& cfg, const std::string& query_id, int sample_index) {
  if (cfg.model.contains("script")) {
    const json& s = cfg.model.at("script");
    std::string key = query_id + "/" + std::to_string(sample_index);
    if (s.contains("per_run") && s.at("per_run").contains(key)) {
      return std::make_unique<atf::backends::ScriptedChatClient>(
          parse_chat_script(s.at("per_run").at(key)));
    }
    if (s.contains("default")) {
      return std::make_unique<atf::backends::ScriptedChatClient>(
          parse_chat_script(s.at("default")));
    }
    throw atf::ConfigError("model script has no entry for " + key +
                           " and no default");
  }
  if (cfg.model.contains("http")) {
    return std::make_unique<atf::backends::HttpChatClient>(
        parse_endpoint(cfg.model.at("http")));
  }
  throw atf::ConfigError("config has no usable \"model\" backend");
}

std::vector<atf::judge::Judge> make_judges(const AppConfig& cfg) {
  std::vector<atf::judge::Judge> judges;
  for (const json& j : cfg.judges) {
    atf::judge::Judge judge;
    judge.id = j.value("id", "judge-" + std::to_string(judges.size()));
    judge.params.temperature = j.value("temperature", 0.6);
    if (j.contains("script")) {
      judge.client = std::make_shared<atf::backends::ScriptedChatClient>(
          parse_chat_script(j.at("script")));
    } else if (j.contains("http")) {
      judge.client = std::make_shared<atf::backends::HttpChatClient>(
          parse_endpoint(j.at("http")));
    } else {
      throw atf::ConfigError("judge " + judge.id + " has no backend");
    }
    judges.push_back(std::move(judge));
  }
  if (judges.empty()) throw atf::ConfigError("config defines no judges");
  return judges;
}

std::unique_ptr<atf::backends::EmbeddingClient> make_embedding_client(
    const AppConfig& cfg) {
  if (cfg.embedding.contains("hash")) {
    const json& h = cfg.embedding.at("hash");
    return std::make_unique<atf::backends::HashEmbeddingClient>(
        h.value("dim", 256), h.value("ngram", 3));
  }
  if (cfg.embedding.contains("table")) {
    std::map<std::string, std::vector<float>> table;
    for (const auto& [text, vec] : cfg.embedding.at("table").items()) {
      table[text] = vec.get<std::vector<float>>();
    }
    return std::make_unique<atf::backends::TableEmbeddingClient>(
        std::move(table));
  }
  if (cfg.embedding.contains("http")) {
    return std::make_unique<atf::backends::HttpEmbeddingClient>(
        parse_endpoint(cfg.embedding.at("http")));
  }
  // Offline default keeps dedup/decontaminate usable without a config.
  return std::make_unique<atf::backends::HashEmbeddingClient>();
}

// ---------------------------------------------------------------------------
// Manifest
// ---------------------------------------------------------------------------

std::string new_run_id() {
  std::random_device rd;
  std::mt19937_64 gen(rd() ^ static_cast<uint64_t>(
      std::chrono::steady_clock::now().time_since_epoch().count()));
  return atf::to_hex(gen());
}

struct ManifestWriter {
  std::string command;
  std::string path;
  json config_snapshot = json::object();
  json inputs = json::object();
  json outputs = json::object();
  json counters = json::object();
  std::chrono::steady_clock::time_point started =
      std::chrono::steady_clock::now();

  void add_input(const std::string& file) {
    inputs[file] = atf::fnv1a64_hex(atf::read_file(file));
  }
  void add_output(const std::string& file) {
    outputs[file] = atf::fnv1a64_hex(atf::read_file(file));
  }
  void write() const {
    if (path.empty()) return;
    double elapsed = std::chrono::duration<double>(
                         std::chrono::steady_clock::now() - started)
                         .count();
    json m{{"run_id", new_run_id()},
           {"command", command},
           {"config", config_snapshot},
           {"inputs", inputs},
           {"outputs", outputs},
           {"wall_clock_s", elapsed},
           {"counters", counters}};
    atf::write_file_atomic(path, m.dump(2) + "\n");
  }
};

std::string default_manifest_path(const std::string& out,
                                  const std::string& command) {
  if (!out.empty()) return out + ".manifest.json";
  return "atf-" + command + ".manifest.json";
}

std::vector<atf::FormalStatement> read_statements(const std::string& path) {
  std::vector<atf::FormalStatement> statements;
  for (const json& row : atf::read_jsonl(path)) {
    statements.push_back(atf::formal_statement_from_json(row));
  }
  return statements;
}

std::vector<int> parse_k_list(const std::string& spec) {
  std::vector<int> ks;
  std::stringstream ss(spec);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    ks.push_back(std::stoi(item));
  }
  if (ks.empty()) throw atf::ConfigError("--k lists no values");
  return ks;
}

// ---------------------------------------------------------------------------
// Subcommand bodies. Each returns the process exit code.
// ---------------------------------------------------------------------------

struct CommonArgs {
  std::string config_path;
  std::string out;
  std::string manifest;
  int workers = -1;  // -1: take the config value
  bool strict = true;
};

int effective_workers(const CommonArgs& args, const AppConfig& cfg) {
  return args.workers >= 0 ? args.workers : cfg.workers;
}

int cmd_formalize(const CommonArgs& args, const std::string& queries_path,
                  int samples_override) {
  AppConfig cfg = load_config(args.config_path);
  int workers = effective_workers(args, cfg);
  atf::RunConfig run = cfg.run;
  if (samples_override > 0) run.samples_per_query = samples_override;

  std::vector<atf::MathQuery> queries = atf::read_queries(queries_path);
  auto lean = make_lean_client(cfg);
  std::vector<atf::judge::Judge> judges = make_judges(cfg);
  atf::syntax::RunCounters counters;
  std::atomic<long> judge_calls{0};

  atf::orch::ToolSet tools;
  atf::syntax::SyntaxRunOptions syntax_options;
  syntax_options.workers = workers;
  tools.syntax = [&](const atf::FormalStatement& statement) {
    return atf::syntax::check_statement(statement, *lean, run, syntax_options,
                                        &counters);
  };
  atf::judge::ConsistencyOptions judge_options;
  judge_options.workers = workers;
  tools.consistency = [&](const atf::MathQuery& query,
                          const atf::FormalStatement& statement) {
    return atf::judge::run_consistency_check(query, statement, judges, true,
                                             judge_options, &judge_calls);
  };

  // Samples run in a fixed order so scripted runs replay byte-identically;
  // parallelism lives inside the tools (compile groups, judge fan-out).
  std::vector<atf::Trajectory> trajectories;
  long aborted = 0;
  for (const atf::MathQuery& query : queries) {
    for (int sample = 0; sample < run.samples_per_query; ++sample) {
      auto model = make_model_client(cfg, query.id, sample);
      atf::Trajectory t = atf::orch::formalize(query, *model, tools, run);
      if (t.status == atf::TrajectoryStatus::aborted) ++aborted;
      trajectories.push_back(std::move(t));
    }
  }
  atf::write_trajectories(args.out, trajectories);
  log_line("formalize", "queries=" + std::to_string(queries.size()) +
                            " trajectories=" +
                            std::to_string(trajectories.size()) +
                            " aborted=" + std::to_string(aborted));

  ManifestWriter manifest{
      "formalize",
      args.manifest.empty() ? default_manifest_path(args.out, "formalize")
                            : args.manifest};
  manifest.config_snapshot = cfg.raw;
  manifest.add_input(queries_path);
  manifest.add_output(args.out);
  manifest.counters = json{
      {"trajectories", trajectories.size()},
      {"aborted", aborted},
      {"groups_compiled", counters.groups_compiled.load()},
      {"fallback_groups", counters.fallback_groups.load()},
      {"individual_calls", counters.individual_calls.load()},
      {"precheck_rejects", counters.precheck_rejects.load()},
      {"judge_calls", judge_calls.load()}};
  manifest.write();
  return args.strict && aborted > 0 ? kExitItemFailure : kExitOk;
}

int cmd_precheck(const CommonArgs& args, const std::string& statements_path) {
  std::vector<atf::FormalStatement> statements =
      read_statements(statements_path);
  std::vector<json> rows;
  long failures = 0;
  for (const atf::FormalStatement& s : statements) {
    atf::syntax::PrecheckResult result = atf::syntax::precheck(s);
    json names = json::array();
    for (atf::syntax::PrecheckFailure f : result.failures) {
      names.push_back(atf::syntax::to_string(f));
    }
    if (!result.pass()) ++failures;
    rows.push_back(json{{"pass", result.pass()}, {"failures", names}});
  }
  if (!args.out.empty()) atf::write_jsonl(args.out, rows);
  log_line("precheck", "statements=" + std::to_string(statements.size()) +
                           " failures=" + std::to_string(failures));

  ManifestWriter manifest{
      "precheck",
      args.manifest.empty() ? default_manifest_path(args.out, "precheck")
                            : args.manifest};
  manifest.add_input(statements_path);
  if (!args.out.empty()) manifest.add_output(args.out);
  manifest.counters =
      json{{"statements", statements.size()}, {"failures", failures}};
  manifest.write();
  return args.strict && failures > 0 ? kExitItemFailure : kExitOk;
}

int cmd_syntax_check(const CommonArgs& args,
                     const std::string& statements_path, int batch_override) {
  AppConfig cfg = load_config(args.config_path);
  atf::RunConfig run = cfg.run;
  if (batch_override > 0) run.batch_size = batch_override;
  std::vector<atf::FormalStatement> statements =
      read_statements(statements_path);
  auto lean = make_lean_client(cfg);
  atf::syntax::RunCounters counters;
  atf::syntax::SyntaxRunOptions options;
  options.workers = effective_workers(args, cfg);
  std::vector<atf::SyntaxReport> reports =
      atf::syntax::run_syntax_check(statements, *lean, run, options,
                                    &counters);

  std::vector<json> rows;
  long failures = 0;
  for (const atf::SyntaxReport& r : reports) {
    if (!r.pass) ++failures;
    rows.push_back(atf::to_json(r));
  }
  atf::write_jsonl(args.out, rows);
  log_line("syntax-check", "statements=" + std::to_string(statements.size()) +
                               " failures=" + std::to_string(failures));

  ManifestWriter manifest{
      "syntax-check",
      args.manifest.empty() ? default_manifest_path(args.out, "syntax-check")
                            : args.manifest};
  manifest.config_snapshot = cfg.raw;
  manifest.add_input(statements_path);
  manifest.add_output(args.out);
  manifest.counters = json{
      {"statements", statements.size()},
      {"failures", failures},
      {"groups_compiled", counters.groups_compiled.load()},
      {"fallback_groups", counters.fallback_groups.load()},
      {"individual_calls", counters.individual_calls.load()},
      {"precheck_rejects", counters.precheck_rejects.load()}};
  manifest.write();
  return args.strict && failures > 0 ? kExitItemFailure : kExitOk;
}

int cmd_consistency_check(const CommonArgs& args,
                          const std::string& pairs_path) {
  AppConfig cfg = load_config(args.config_path);
  std::vector<atf::judge::Judge> judges = make_judges(cfg);
  atf::judge::ConsistencyOptions options;
  options.workers = effective_workers(args, cfg);
  std::atomic<long> judge_calls{0};

  std::vector<json> rows;
  long failures = 0;
  for (const json& row : atf::read_jsonl(pairs_path)) {
    atf::MathQuery query = atf::math_query_from_json(row.at("query"));
    atf::FormalStatement statement =
        atf::formal_statement_from_json(row.at("statement"));
    bool syntax_pass = row.value("syntax_pass", true);
    atf::ConsistencyReport report = atf::judge::run_consistency_check(
        query, statement, judges, syntax_pass, options, &judge_calls);
    if (!report.pass) ++failures;
    rows.push_back(atf::to_json(report));
  }
  atf::write_jsonl(args.out, rows);
  log_line("consistency-check",
           "pairs=" + std::to_string(rows.size()) +
               " failures=" + std::to_string(failures) +
               " judge_calls=" + std::to_string(judge_calls.load()));

  ManifestWriter manifest{"consistency-check",
                          args.manifest.empty()
                              ? default_manifest_path(args.out,
                                                      "consistency-check")
                              : args.manifest};
  manifest.config_snapshot = cfg.raw;
  manifest.add_input(pairs_path);
  manifest.add_output(args.out);
  manifest.counters = json{{"pairs", rows.size()},
                           {"failures", failures},
                           {"judge_calls", judge_calls.load()}};
  manifest.write();
  return args.strict && failures > 0 ? kExitItemFailure : kExitOk;
}

int cmd_validate(const CommonArgs& args, const std::string& trajectories_path) {
  std::vector<atf::Trajectory> trajectories =
      atf::read_trajectories(trajectories_path);
  std::vector<json> rows;
  long violations = 0;
  for (size_t i = 0; i < trajectories.size(); ++i) {
    atf::orch::ValidationRuling ruling =
        atf::orch::validate_trajectory(trajectories[i]);
    if (!ruling.compliant) {
      ++violations;
      log_line("validate", "index=" + std::to_string(i) +
                               " violation=" + ruling.violation);
    }
    rows.push_back(json{{"index", i},
                        {"compliant", ruling.compliant},
                        {"violation", ruling.violation}});
  }
  if (!args.out.empty()) atf::write_jsonl(args.out, rows);
  log_line("validate", "trajectories=" + std::to_string(trajectories.size()) +
                           " violations=" + std::to_string(violations));

  ManifestWriter manifest{
      "validate",
      args.manifest.empty() ? default_manifest_path(args.out, "validate")
                            : args.manifest};
  manifest.add_input(trajectories_path);
  if (!args.out.empty()) manifest.add_output(args.out);
  manifest.counters = json{{"trajectories", trajectories.size()},
                           {"violations", violations}};
  manifest.write();
  return args.strict && violations > 0 ? kExitItemFailure : kExitOk;
}

int cmd_upsample(const CommonArgs& args, const std::string& trajectories_path,
                 int factor) {
  std::vector<atf::Trajectory> trajectories =
      atf::read_trajectories(trajectories_path);
  std::vector<atf::Trajectory> out =
      atf::pipeline::upsample_cold_start(trajectories, factor);
  atf::write_trajectories(args.out, out);
  log_line("upsample", "in=" + std::to_string(trajectories.size()) +
                           " out=" + std::to_string(out.size()));

  ManifestWriter manifest{
      "upsample",
      args.manifest.empty() ? default_manifest_path(args.out, "upsample")
                            : args.manifest};
  manifest.add_input(trajectories_path);
  manifest.add_output(args.out);
  manifest.counters =
      json{{"in", trajectories.size()}, {"out", out.size()}};
  manifest.write();
  return kExitOk;
}

int cmd_filter_ei(const CommonArgs& args, const std::string& trajectories_path,
                  const std::string& retry_pool_path, int max_revisions) {
  std::vector<atf::Trajectory> trajectories =
      atf::read_trajectories(trajectories_path);
  atf::pipeline::ExpertIterationSplit split =
      atf::pipeline::filter_expert_iteration(trajectories, max_revisions);
  atf::write_trajectories(args.out, split.kept);
  if (!retry_pool_path.empty()) {
    std::vector<json> rows;
    for (const std::string& id : split.retry_pool) {
      rows.push_back(json{{"query_id", id}});
    }
    atf::write_jsonl(retry_pool_path, rows);
  }
  log_line("filter-ei", "in=" + std::to_string(trajectories.size()) +
                            " kept=" + std::to_string(split.kept.size()) +
                            " retry=" +
                            std::to_string(split.retry_pool.size()));

  ManifestWriter manifest{
      "filter-ei",
      args.manifest.empty() ? default_manifest_path(args.out, "filter-ei")
                            : args.manifest};
  manifest.add_input(trajectories_path);
  manifest.add_output(args.out);
  if (!retry_pool_path.empty()) manifest.add_output(retry_pool_path);
  manifest.counters = json{{"in", trajectories.size()},
                           {"kept", split.kept.size()},
                           {"retry_pool", split.retry_pool.size()}};
  manifest.write();
  return kExitOk;
}

int cmd_mine_dpo(const CommonArgs& args, const std::string& trajectories_path,
                 int min_gap) {
  std::vector<atf::Trajectory> trajectories =
      atf::read_trajectories(trajectories_path);
  std::vector<atf::pipeline::DpoPair> pairs = atf::pipeline::mine_dpo_pairs(
      atf::pipeline::group_by_query(trajectories), min_gap);
  std::vector<json> rows;
  for (const atf::pipeline::DpoPair& p : pairs) {
    rows.push_back(json{{"query_id", p.query_id},
                        {"attempt_gap", p.attempt_gap},
                        {"chosen", atf::to_json(p.chosen)},
                        {"rejected", atf::to_json(p.rejected)}});
  }
  atf::write_jsonl(args.out, rows);
  log_line("mine-dpo", "in=" + std::to_string(trajectories.size()) +
                           " pairs=" + std::to_string(pairs.size()));

  ManifestWriter manifest{
      "mine-dpo",
      args.manifest.empty() ? default_manifest_path(args.out, "mine-dpo")
                            : args.manifest};
  manifest.add_input(trajectories_path);
  manifest.add_output(args.out);
  manifest.counters =
      json{{"in", trajectories.size()}, {"pairs", pairs.size()}};
  manifest.write();
  return kExitOk;
}

int cmd_mask(const CommonArgs& args, const std::string& trajectories_path,
             const std::string& mode_name) {
  atf::pipeline::MaskMode mode;
  if (mode_name == "sft") {
    mode = atf::pipeline::MaskMode::sft;
  } else if (mode_name == "dpo") {
    mode = atf::pipeline::MaskMode::dpo;
  } else {
    throw atf::ConfigError("--mode must be sft or dpo");
  }
  std::vector<atf::Trajectory> trajectories =
      atf::read_trajectories(trajectories_path);
  std::vector<json> rows;
  for (const atf::Trajectory& t : trajectories) {
    std::string text = atf::pipeline::serialize_for_training(t);
    json spans = json::array();
    for (const atf::pipeline::MaskSpan& s :
         atf::pipeline::annotate_loss_masks(t, mode)) {
      spans.push_back(json{{"start", s.start},
                           {"end", s.end},
                           {"kind", atf::pipeline::to_string(s.kind)}});
    }
    rows.push_back(json{{"query_id", t.query.id},
                        {"mode", mode_name},
                        {"text", text},
                        {"mask_spans", spans}});
  }
  atf::write_jsonl(args.out, rows);
  log_line("mask", "trajectories=" + std::to_string(trajectories.size()) +
                       " mode=" + mode_name);

  ManifestWriter manifest{
      "mask", args.manifest.empty()
                  ? default_manifest_path(args.out, "mask")
                  : args.manifest};
  manifest.add_input(trajectories_path);
  manifest.add_output(args.out);
  manifest.counters = json{{"trajectories", trajectories.size()}};
  manifest.write();
  return kExitOk;
}

int cmd_dedup(const CommonArgs& args, const std::string& queries_path) {
  std::vector<atf::MathQuery> queries = atf::read_queries(queries_path);
  std::vector<atf::MathQuery> kept = atf::eval::dedup_queries(queries);
  atf::write_queries(args.out, kept);
  log_line("dedup", "in=" + std::to_string(queries.size()) +
                        " kept=" + std::to_string(kept.size()));

  ManifestWriter manifest{
      "dedup", args.manifest.empty()
                   ? default_manifest_path(args.out, "dedup")
                   : args.manifest};
  manifest.add_input(queries_path);
  manifest.add_output(args.out);
  manifest.counters =
      json{{"in", queries.size()}, {"kept", kept.size()}};
  manifest.write();
  return kExitOk;
}

int cmd_decontaminate(const CommonArgs& args, const std::string& train_path,
                      const std::string& bench_path,
                      const std::string& removed_path, double threshold) {
  AppConfig cfg = load_config(args.config_path);
  std::vector<atf::MathQuery> train = atf::read_queries(train_path);
  std::vector<atf::MathQuery> bench = atf::read_queries(bench_path);
  auto provider = make_embedding_client(cfg);
  double cutoff =
      threshold >= 0 ? threshold : cfg.run.decontamination_threshold;
  atf::eval::DecontaminationResult result = atf::eval::decontaminate(
      train, bench, *provider, cutoff, effective_workers(args, cfg));
  atf::write_queries(args.out, result.kept);
  if (!removed_path.empty()) atf::write_queries(removed_path, result.removed);
  log_line("decontaminate",
           "train=" + std::to_string(train.size()) +
               " bench=" + std::to_string(bench.size()) +
               " removed=" + std::to_string(result.removed.size()));

  ManifestWriter manifest{"decontaminate",
                          args.manifest.empty()
                              ? default_manifest_path(args.out,
                                                      "decontaminate")
                              : args.manifest};
  manifest.config_snapshot = cfg.raw;
  manifest.add_input(train_path);
  manifest.add_input(bench_path);
  manifest.add_output(args.out);
  if (!removed_path.empty()) manifest.add_output(removed_path);
  manifest.counters = json{{"train", train.size()},
                           {"bench", bench.size()},
                           {"kept", result.kept.size()},
                           {"removed", result.removed.size()}};
  manifest.write();
  return kExitOk;
}

json outcome_to_json(const atf::eval::SampleOutcome& o) {
  return json{{"query_id", o.query_id},
              {"sample_index", o.sample_index},
              {"syntax_pass", o.syntax_pass},
              {"consistency_pass", o.consistency_pass},
              {"tool_calls", o.tool_calls},
              {"revisions", o.revisions}};
}

atf::eval::SampleOutcome outcome_from_json(const json& j) {
  atf::eval::SampleOutcome o;
  o.query_id = j.value("query_id", "");
  o.sample_index = j.value("sample_index", 0);
  o.syntax_pass = j.value("syntax_pass", false);
  o.consistency_pass = j.value("consistency_pass", false);
  o.tool_calls = j.value("tool_calls", 0);
  o.revisions = j.value("revisions", 0);
  return o;
}

int cmd_eval(const CommonArgs& args, const std::string& trajectories_path,
             const std::string& outcomes_path, const std::string& k_spec,
             const std::string& outcomes_out) {
  std::vector<atf::eval::SampleOutcome> outcomes;
  std::string input_path;
  if (!trajectories_path.empty()) {
    input_path = trajectories_path;
    outcomes = atf::eval::outcomes_from_trajectories(
        atf::read_trajectories(trajectories_path));
  } else if (!outcomes_path.empty()) {
    input_path = outcomes_path;
    for (const json& row : atf::read_jsonl(outcomes_path)) {
      outcomes.push_back(outcome_from_json(row));
    }
  } else {
    throw atf::ConfigError("eval needs --trajectories or --outcomes");
  }
  std::vector<atf::eval::RateRow> rows =
      atf::eval::aggregate_rates(outcomes, parse_k_list(k_spec));
  std::string table = atf::eval::render_rate_table(rows);
  std::cout << table;
  if (!args.out.empty()) atf::write_file_atomic(args.out, table);
  if (!outcomes_out.empty()) {
    std::vector<json> out_rows;
    for (const atf::eval::SampleOutcome& o : outcomes) {
      out_rows.push_back(outcome_to_json(o));
    }
    atf::write_jsonl(outcomes_out, out_rows);
  }
  log_line("eval", "outcomes=" + std::to_string(outcomes.size()));

  ManifestWriter manifest{
      "eval", args.manifest.empty()
                  ? default_manifest_path(args.out, "eval")
                  : args.manifest};
  manifest.add_input(input_path);
  if (!args.out.empty()) manifest.add_output(args.out);
  if (!outcomes_out.empty()) manifest.add_output(outcomes_out);
  manifest.counters = json{{"outcomes", outcomes.size()}};
  manifest.write();
  return kExitOk;
}

int cmd_stats(const CommonArgs& args, const std::string& trajectories_path) {
  std::vector<atf::Trajectory> trajectories =
      atf::read_trajectories(trajectories_path);
  atf::eval::ToolUsageStats stats = atf::eval::tool_usage_stats(trajectories);
  json by_attempt = json::object();
  for (const auto& [attempt, rate] : stats.consistency_success_by_attempt) {
    by_attempt[std::to_string(attempt)] = rate;
  }
  json out{{"trajectory_count", stats.trajectory_count},
           {"avg_tool_calls", stats.avg_tool_calls},
           {"syntax_success_rate",
            stats.syntax_success_rate ? json(*stats.syntax_success_rate)
                                      : json(nullptr)},
           {"consistency_success_rate",
            stats.consistency_success_rate
                ? json(*stats.consistency_success_rate)
                : json(nullptr)},
           {"consistency_success_by_attempt", by_attempt}};
  std::string text = out.dump(2) + "\n";
  std::cout << text;
  if (!args.out.empty()) atf::write_file_atomic(args.out, text);
  log_line("stats",
           "trajectories=" + std::to_string(stats.trajectory_count));

  ManifestWriter manifest{
      "stats", args.manifest.empty()
                   ? default_manifest_path(args.out, "stats")
                   : args.manifest};
  manifest.add_input(trajectories_path);
  if (!args.out.empty()) manifest.add_output(args.out);
  manifest.counters = json{{"trajectories", stats.trajectory_count}};
  manifest.write();
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"autoformalization tool-loop engine"};
  app.require_subcommand(1);

  CommonArgs args;
  std::string queries_path, statements_path, pairs_path, trajectories_path;
  std::string train_path, bench_path, removed_path, retry_pool_path;
  std::string outcomes_path, outcomes_out, mode_name = "sft";
  std::string k_spec = "1,8,16";
  int samples_override = 0, factor = 2, max_revisions = 8, min_gap = 3;
  int batch_override = 0;
  double threshold = -1.0;

  auto add_common = [&](CLI::App* sub, bool needs_out, bool strict_default) {
    sub->add_option("--config", args.config_path, "JSON configuration file");
    auto* out = sub->add_option("--out", args.out, "output file");
    if (needs_out) out->required();
    sub->add_option("--manifest", args.manifest,
                    "manifest path (default: <out>.manifest.json)");
    sub->add_option("--workers", args.workers,
                    "worker threads for parallel stages (0 = all cores)");
    args.strict = strict_default;
    sub->add_flag("--strict,!--no-strict", args.strict,
                  "exit 1 when any item fails");
  };

  auto* formalize = app.add_subcommand(
      "formalize", "run the tool-feedback loop over a query file");
  add_common(formalize, true, false);
  formalize->add_option("--queries", queries_path, "JSONL query file")
      ->required();
  formalize->add_option("--samples", samples_override,
                        "samples per query (overrides config)");

  auto* precheck = app.add_subcommand(
      "precheck", "static filters: imports, terminal sorry, brackets");
  add_common(precheck, false, true);
  precheck->add_option("--statements", statements_path, "JSONL statement file")
      ->required();

  auto* syntax = app.add_subcommand(
      "syntax-check", "grouped compiler verification with line mapping");
  add_common(syntax, true, true);
  syntax->add_option("--statements", statements_path, "JSONL statement file")
      ->required();
  syntax->add_option("--batch-size", batch_override,
                     "statements per compile group (overrides config)");

  auto* consistency = app.add_subcommand(
      "consistency-check", "judge-panel semantic check of query/statement "
                           "pairs");
  add_common(consistency, true, true);
  consistency
      ->add_option("--pairs", pairs_path,
                   "JSONL rows {\"query\": ..., \"statement\": ...}")
      ->required();

  auto* validate = app.add_subcommand(
      "validate", "replay trajectories through the rule machine");
  add_common(validate, false, true);
  validate
      ->add_option("--trajectories", trajectories_path, "JSONL trajectories")
      ->required();

  auto* upsample = app.add_subcommand(
      "upsample", "repeat multi-revision trajectories for cold-start data");
  add_common(upsample, true, true);
  upsample
      ->add_option("--trajectories", trajectories_path, "JSONL trajectories")
      ->required();
  upsample->add_option("--factor", factor, "copies per qualifying trajectory");

  auto* filter_ei = app.add_subcommand(
      "filter-ei", "keep successful, compliant, low-revision trajectories");
  add_common(filter_ei, true, true);
  filter_ei
      ->add_option("--trajectories", trajectories_path, "JSONL trajectories")
      ->required();
  filter_ei->add_option("--retry-pool", retry_pool_path,
                        "write unsolved query ids here");
  filter_ei->add_option("--max-revisions", max_revisions,
                        "strict revision cap for kept trajectories");

  auto* mine_dpo = app.add_subcommand(
      "mine-dpo", "pair low- and high-revision successes per query");
  add_common(mine_dpo, true, true);
  mine_dpo
      ->add_option("--trajectories", trajectories_path, "JSONL trajectories")
      ->required();
  mine_dpo->add_option("--min-gap", min_gap, "minimum revision-count gap");

  auto* mask = app.add_subcommand(
      "mask", "serialize trajectories with loss-mask spans");
  add_common(mask, true, true);
  mask->add_option("--trajectories", trajectories_path, "JSONL trajectories")
      ->required();
  mask->add_option("--mode", mode_name, "sft or dpo");

  auto* dedup = app.add_subcommand(
      "dedup", "drop queries identical modulo whitespace");
  add_common(dedup, true, true);
  dedup->add_option("--queries", queries_path, "JSONL query file")
      ->required();

  auto* decontaminate = app.add_subcommand(
      "decontaminate", "remove training queries too close to a benchmark");
  add_common(decontaminate, true, true);
  decontaminate->add_option("--train", train_path, "training queries JSONL")
      ->required();
  decontaminate->add_option("--bench", bench_path, "benchmark queries JSONL")
      ->required();
  decontaminate->add_option("--removed", removed_path,
                            "write removed queries here");
  decontaminate->add_option("--threshold", threshold,
                            "max allowed cosine (overrides config)");

  auto* eval = app.add_subcommand(
      "eval", "pass@k rate table from trajectories or recorded outcomes");
  add_common(eval, false, true);
  eval->add_option("--trajectories", trajectories_path, "JSONL trajectories");
  eval->add_option("--outcomes", outcomes_path, "JSONL per-sample outcomes");
  eval->add_option("--k", k_spec, "comma-separated k values");
  eval->add_option("--outcomes-out", outcomes_out,
                   "write per-sample outcomes here");

  auto* stats = app.add_subcommand(
      "stats", "tool usage and success-by-attempt summary");
  add_common(stats, false, true);
  stats->add_option("--trajectories", trajectories_path, "JSONL trajectories")
      ->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (formalize->parsed()) {
      return cmd_formalize(args, queries_path, samples_override);
    }
    if (precheck->parsed()) return cmd_precheck(args, statements_path);
    if (syntax->parsed()) {
      return cmd_syntax_check(args, statements_path, batch_override);
    }
    if (consistency->parsed()) return cmd_consistency_check(args, pairs_path);
    if (validate->parsed()) return cmd_validate(args, trajectories_path);
    if (upsample->parsed()) {
      return cmd_upsample(args, trajectories_path, factor);
    }
    if (filter_ei->parsed()) {
      return cmd_filter_ei(args, trajectories_path, retry_pool_path,
                           max_revisions);
    }
    if (mine_dpo->parsed()) {
      return cmd_mine_dpo(args, trajectories_path, min_gap);
    }
    if (mask->parsed()) return cmd_mask(args, trajectories_path, mode_name);
    if (dedup->parsed()) return cmd_dedup(args, queries_path);
    if (decontaminate->parsed()) {
      return cmd_decontaminate(args, train_path, bench_path, removed_path,
                               threshold);
    }
    if (eval->parsed()) {
      return cmd_eval(args, trajectories_path, outcomes_path, k_spec,
                      outcomes_out);
    }
    if (stats->parsed()) return cmd_stats(args, trajectories_path);
  } catch (const atf::ConfigError& e) {
    std::cerr << "[atf] config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const atf::Error& e) {
    std::cerr << "[atf] error: " << e.what() << "\n";
    return kExitItemFailure;
  } catch (const std::exception& e) {
    std::cerr << "[atf] error: " << e.what() << "\n";
    return kExitItemFailure;
  }
  return kExitConfig;
}
