#include "cli.hpp"

#include <atomic>
#include <csignal>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <thread>

#include <CLI11.hpp>

#include "cpo/analytics/stats.hpp"
#include "cpo/arena/engine.hpp"
#include "cpo/core/config.hpp"
#include "cpo/core/json.hpp"
#include "cpo/core/validate.hpp"
#include "cpo/gateway/chat.hpp"
#include "cpo/policy/objective.hpp"
#include "cpo/reward/pipeline.hpp"
#include "cpo/service/server.hpp"

namespace fs = std::filesystem;

namespace cpo::cli {

namespace {

class ExitError : public std::runtime_error {
 public:
  ExitError(int code, const std::string& what) : std::runtime_error(what), code_(code) {}
  int code() const { return code_; }

 private:
  int code_;
};

fs::path dir_of(const fs::path& p) {
  const auto parent = p.parent_path();
  return parent.empty() ? fs::path(".") : parent;
}

gateway::PromptLibrary load_prompts(const std::string& dir) {
  gateway::PromptLibrary lib;
  if (!dir.empty()) lib.load_directory(dir);
  return lib;
}

// ---- judge config -------------------------------------------------------

struct JudgeSetup {
  gateway::ChatEndpointConfig endpoint;
  reward::ScoringOptions scoring;
  policy::ObjectiveConfig objective;
  fs::path base_dir;
};

json endpoint_with_defaults(const json& patch, const gateway::ChatEndpointConfig& defaults) {
  json ep = defaults;
  ep.merge_patch(patch);
  return ep;
}

JudgeSetup load_judge(const fs::path& path) {
  json file = load_config_file(path);
  overlay_env(file, "CPO_JUDGE_",
              {"base_url", "model_name", "api_key_env", "temperature", "top_p", "max_tokens", "timeout_ms",
               "max_retries"});
  JudgeSetup s;
  s.base_dir = dir_of(path);
  json ep = endpoint_with_defaults(file, gateway::judge_defaults("", ""));
  for (const char* section : {"length", "objective"}) ep.erase(section);
  s.endpoint = parse_as<gateway::ChatEndpointConfig>(ep, path.string());
  if (file.contains("length")) s.scoring.length = parse_as<reward::LengthPenaltyConfig>(file["length"], path.string());
  if (file.contains("objective")) s.objective = parse_as<policy::ObjectiveConfig>(file["objective"], path.string());
  s.scoring.max_attempts = file.value("judge_attempts", s.scoring.max_attempts);
  s.scoring.shuffle_candidates = file.value("shuffle_candidates", false);
  s.scoring.shuffle_seed = file.value("shuffle_seed", std::uint64_t{0});
  return s;
}

// ---- arena ----------------------------------------------------------------

struct LoadedPlan {
  arena::TournamentPlan plan;
  std::vector<ChatCircumstance> corpus;
  fs::path base_dir;
};

LoadedPlan load_plan(const fs::path& path, std::optional<std::uint64_t> seed_override) {
  LoadedPlan lp;
  lp.base_dir = dir_of(path);
  lp.plan = parse_as<arena::TournamentPlan>(read_json_file(path), path.string());
  if (const char* env = std::getenv("CPO_SEED"); env && !seed_override) lp.plan.master_seed = std::stoull(env);
  if (seed_override) lp.plan.master_seed = *seed_override;
  lp.plan.validate();
  fs::path corpus(lp.plan.corpus);
  if (corpus.is_relative()) corpus = lp.base_dir / corpus;
  lp.corpus = load_corpus(corpus);
  return lp;
}

std::size_t resolve_parallelism(const std::optional<std::size_t>& flag) {
  if (flag) return *flag;
  if (const char* env = std::getenv("CPO_PARALLELISM")) return std::stoul(env);
  return 4;
}

int arena_run(const std::string& plan_path, const std::string& out_dir, std::optional<std::size_t> parallelism,
              std::optional<std::uint64_t> seed, const std::string& prompt_dir, std::ostream& out,
              std::ostream& err) {
  const auto lp = load_plan(plan_path, seed);
  const auto prompts = load_prompts(prompt_dir);
  gateway::Gateway gw(lp.base_dir);
  arena::TournamentOptions opts;
  opts.parallelism = resolve_parallelism(parallelism);
  opts.out_dir = fs::path(out_dir);
  err << "running " << arena::plan_matchups(lp.plan, lp.corpus).size() << " matchups with parallelism "
      << opts.parallelism << "\n";
  const auto outcome = arena::run_tournament(gw, prompts, lp.plan, lp.corpus, opts);
  for (const auto& f : outcome.failures) {
    err << "matchup " << f.entry.pair_id << " (" << f.entry.model_a << " vs " << f.entry.model_b << ", "
        << f.entry.circumstance_id << ") failed at " << f.stage << ": " << f.error << "\n";
  }
  json summary = {{"run_dir", out_dir},
                  {"master_seed", lp.plan.master_seed},
                  {"matchups_planned", outcome.manifest["matchups_planned"]},
                  {"matchups_completed", outcome.results.size()},
                  {"failures", outcome.failures.size()},
                  {"pairs_without_data", outcome.manifest["pairs_without_data"]}};
  out << summary.dump() << "\n";
  return outcome.every_pair_has_data ? kOk : kPartialFailure;
}

int arena_plan(const std::string& plan_path, std::optional<std::uint64_t> seed, std::ostream& out) {
  const auto lp = load_plan(plan_path, seed);
  for (const auto& e : arena::plan_matchups(lp.plan, lp.corpus)) out << json(e).dump() << "\n";
  return kOk;
}

// ---- reward ---------------------------------------------------------------

json score_samplewise_record(gateway::Gateway& gw, const gateway::PromptLibrary& prompts, const ResponseGroup& group,
                             const JudgeSetup& judge) {
  validate(group, 1);
  std::vector<double> scores;
  for (const auto& c : group.candidates) {
    scores.push_back(reward::score_samplewise(gw, prompts, group.context, c, judge.endpoint, judge.scoring.max_attempts));
  }
  bool approximate = false;
  const auto lengths = reward::candidate_lengths(group, approximate);
  auto rewards = reward::finalize_rewards(scores, lengths, judge.scoring.length);
  rewards.approximate = approximate;
  const auto adv = policy::compute_advantages(rewards.final_reward, judge.objective.std_floor);
  return {{"schema_version", kSchemaVersion},
          {"group_id", group.id},
          {"mode", "sample"},
          {"scores", scores},
          {"rewards", rewards},
          {"advantages", adv}};
}

int reward_score(const std::string& groups_path, const std::string& judge_path, const std::string& out_path,
                 const std::string& mode, const std::string& prompt_dir, std::ostream& out, std::ostream& err) {
  if (mode != "group" && mode != "sample") throw ExitError(kConfigOrIoFailure, "--mode must be group or sample");
  const auto judge = load_judge(judge_path);
  const auto prompts = load_prompts(prompt_dir);
  gateway::Gateway gw(judge.base_dir);
  if (!fs::exists(groups_path)) throw IoError("cannot open " + groups_path);

  std::vector<json> records;
  std::size_t failed = 0;
  for_each_jsonl_line(groups_path, [&](std::size_t line, const std::string& text) {
    std::string group_id;
    try {
      const auto group = parse_as<ResponseGroup>(json::parse(text), groups_path + ":" + std::to_string(line));
      group_id = group.id;
      if (mode == "group") {
        json rec = reward::to_json(reward::run_score_pipeline(gw, prompts, group, judge.endpoint, judge.scoring,
                                                              judge.objective),
                                   group.id);
        rec["mode"] = "group";
        records.push_back(std::move(rec));
      } else {
        records.push_back(score_samplewise_record(gw, prompts, group, judge));
      }
    } catch (const std::exception& e) {
      ++failed;
      err << groups_path << ":" << line << ": " << e.what() << "\n";
      records.push_back(
          {{"schema_version", kSchemaVersion}, {"group_id", group_id}, {"line", line}, {"error", e.what()}});
    }
  });
  write_jsonl(out_path, records);
  out << json{{"out", out_path}, {"groups", records.size()}, {"failed", failed}, {"mode", mode}}.dump() << "\n";
  return failed ? kPartialFailure : kOk;
}

// ---- policy ---------------------------------------------------------------

int policy_objective(const std::string& batch_path, const std::string& out_path, std::ostream& out, std::ostream& err) {
  if (!fs::exists(batch_path)) throw IoError("cannot open " + batch_path);
  std::vector<json> records;
  std::size_t failed = 0;
  for_each_jsonl_line(batch_path, [&](std::size_t line, const std::string& text) {
    const std::string where = batch_path + ":" + std::to_string(line);
    try {
      const json j = json::parse(text);
      const auto group = parse_as<ResponseGroup>(j.at("group"), where);
      RewardVector rewards;
      const auto& r = j.at("rewards");
      if (r.is_array()) {
        rewards.final_reward = r.get<std::vector<double>>();
        rewards.raw = rewards.final_reward;
        rewards.length_penalty.assign(rewards.raw.size(), 0.0);
      } else {
        rewards = parse_as<RewardVector>(r, where);
      }
      const auto cfg = j.contains("config") ? parse_as<policy::ObjectiveConfig>(j["config"], where) : policy::ObjectiveConfig{};
      json rec = policy::grpo_objective(group, rewards, cfg);
      rec["schema_version"] = kSchemaVersion;
      rec["group_id"] = group.id;
      records.push_back(std::move(rec));
    } catch (const std::exception& e) {
      ++failed;
      err << where << ": " << e.what() << "\n";
      records.push_back({{"schema_version", kSchemaVersion}, {"line", line}, {"error", e.what()}});
    }
  });
  if (out_path.empty()) {
    for (const auto& r : records) out << r.dump() << "\n";
  } else {
    write_jsonl(out_path, records);
  }
  return failed ? kPartialFailure : kOk;
}

// ---- annotations ----------------------------------------------------------

int annotations_export(const std::string& store_path, const std::string& out_path, std::ostream& out) {
  // Opening a missing file would create an empty store.
  if (!fs::exists(store_path)) throw IoError("cannot open " + store_path);
  const service::AnnotationStore store(store_path, 1);
  store.export_jsonl(out_path);
  out << json{{"annotations", store.annotations().size()}, {"out", out_path}}.dump() << "\n";
  return kOk;
}

// ---- stats ----------------------------------------------------------------

std::vector<AnnotationRecord> load_annotations(const std::string& path) {
  return read_jsonl_as<AnnotationRecord>(path);
}

int stats_kappa(const std::string& path, std::ostream& out) {
  const auto records = load_annotations(path);
  out << analytics::to_json(analytics::summarize_agreement(records)).dump() << "\n";
  return kOk;
}

// Numbers from a JSONL file: bare numbers, {"value": x}, {"score": x}, or
// reward records (rewards.raw, or scores for sample mode). A JSON pointer
// selects the field explicitly.
std::vector<double> load_values(const std::string& path, const std::string& pointer) {
  std::vector<double> values;
  std::size_t n = 0;
  auto push = [&](const json& v, const std::string& where) {
    if (v.is_number()) {
      values.push_back(v.get<double>());
    } else if (v.is_array()) {
      for (const auto& x : v) {
        if (!x.is_number()) throw SchemaError(where + ": non-numeric value");
        values.push_back(x.get<double>());
      }
    } else {
      throw SchemaError(where + ": no numeric value");
    }
  };
  for (const auto& j : read_jsonl(path)) {
    ++n;
    const std::string where = path + ": record " + std::to_string(n);
    if (!pointer.empty()) {
      const json::json_pointer ptr(pointer);
      if (!j.contains(ptr)) throw SchemaError(where + ": missing " + pointer);
      push(j.at(ptr), where);
    } else if (j.is_number() || j.is_array()) {
      push(j, where);
    } else if (j.contains("error")) {
      throw SchemaError(where + ": record carries an error");
    } else if (j.contains("value")) {
      push(j["value"], where);
    } else if (j.contains("score")) {
      push(j["score"], where);
    } else if (j.contains("scores")) {
      push(j["scores"], where);
    } else if (j.contains("rewards") && j["rewards"].is_object()) {
      push(j["rewards"].at("raw"), where);
    } else {
      throw SchemaError(where + ": no numeric value");
    }
  }
  return values;
}

int stats_pearson(const std::string& x_path, const std::string& y_path, const std::string& pointer, std::ostream& out) {
  const auto x = load_values(x_path, pointer);
  const auto y = load_values(y_path, pointer);
  out << json{{"n", x.size()}, {"pearson", analytics::pearson(x, y)}}.dump() << "\n";
  return kOk;
}

int stats_confidence(const std::string& judge_path, const std::string& ann_path, std::ostream& out) {
  std::map<std::string, Outcome> judge;
  std::size_t n = 0;
  for (const auto& j : read_jsonl(judge_path)) {
    ++n;
    const auto v = parse_as<JudgeVerdict>(j.contains("verdict") ? j["verdict"] : j,
                                          judge_path + ": record " + std::to_string(n));
    judge[v.pair_id] = v.winner;
  }
  const auto records = load_annotations(ann_path);
  const auto summary = analytics::summarize_agreement(records, &judge);
  json bins = json::array();
  for (const auto& b : summary.bins) bins.push_back(analytics::to_json(b));
  out << json{{"bins", bins}, {"invalid_count", summary.invalid_count}}.dump() << "\n";
  return kOk;
}

// ---- report ---------------------------------------------------------------

std::string fmt(std::optional<double> v, int precision = 3) {
  if (!v) return "-";
  std::ostringstream ss;
  ss << std::fixed << std::setprecision(precision) << *v;
  return ss.str();
}

int report(const std::string& run_dir, bool as_json, std::ostream& out) {
  const fs::path dir(run_dir);
  const auto plan = parse_as<arena::TournamentPlan>(read_json_file(dir / "plan.json"), (dir / "plan.json").string());
  const auto manifest = read_json_file(dir / "manifest.json");
  const auto results = arena::load_run_results(dir);
  const auto matrix =
      analytics::build_win_rate_matrix(std::span<const arena::MatchupResult>(results), plan.model_ids());
  const auto ranking = analytics::rank_models(matrix);

  if (as_json) {
    out << json{{"ranking", analytics::to_json(ranking)},
                {"matrix", arena::matrix_document(matrix)},
                {"failures", manifest.value("failures", json::array())}}
               .dump(2)
        << "\n";
    return kOk;
  }

  std::size_t width = 5;
  for (const auto& id : matrix.model_ids) width = std::max(width, id.size());
  out << "Tournament " << dir.string() << "\n";
  out << "matchups planned " << manifest.value("matchups_planned", 0) << ", completed "
      << manifest.value("matchups_completed", 0) << ", failed " << manifest.value("failures", json::array()).size()
      << "\n\n";
  out << "Ranking by mean win rate (ties count half)\n";
  out << std::left << std::setw(6) << "rank" << std::setw(static_cast<int>(width) + 2) << "model" << std::setw(16)
      << "mean_win_rate" << std::setw(16) << "bradley_terry" << "opponents\n";
  std::size_t rank = 1;
  for (const auto& m : ranking) {
    out << std::left << std::setw(6) << rank++ << std::setw(static_cast<int>(width) + 2) << m.model_id << std::setw(16)
        << fmt(m.mean_win_rate, 4) << std::setw(16) << fmt(m.bradley_terry, 4) << m.opponents_with_data << "\n";
  }
  out << "\nWin rate of row model against column model\n";
  out << std::left << std::setw(static_cast<int>(width) + 2) << "";
  for (const auto& id : matrix.model_ids) out << std::setw(static_cast<int>(width) + 2) << id;
  out << "\n";
  for (std::size_t i = 0; i < matrix.size(); ++i) {
    out << std::setw(static_cast<int>(width) + 2) << matrix.model_ids[i];
    for (std::size_t j = 0; j < matrix.size(); ++j) out << std::setw(static_cast<int>(width) + 2) << fmt(matrix.rates[i][j]);
    out << "\n";
  }
  const auto failures = manifest.value("failures", json::array());
  if (!failures.empty()) {
    out << "\nFailed matchups\n";
    for (const auto& f : failures) {
      out << "  " << f.value("pair_id", "") << " " << f.value("model_a", "") << " vs " << f.value("model_b", "")
          << " (" << f.value("circumstance_id", "") << ") " << f.value("stage", "") << ": " << f.value("error", "")
          << "\n";
    }
  }
  return kOk;
}

// ---- serve ----------------------------------------------------------------

std::atomic<bool> g_stop{false};

extern "C" void on_signal(int) { g_stop = true; }

struct ServeFlags {
  std::string config;
  std::optional<std::string> host;
  std::optional<int> port;
  std::optional<std::string> run_dir;
  std::optional<std::string> store;
  std::string prompt_dir;
};

int serve(const ServeFlags& flags, std::ostream& err) {
  json cfg = json::object();
  fs::path base = ".";
  if (!flags.config.empty()) {
    cfg = load_config_file(flags.config);
    base = dir_of(flags.config);
  }
  overlay_env(cfg, "CPO_SERVICE_",
              {"host", "port", "store_path", "run_dir", "bearer_token_env", "max_group_size", "annotators_per_pair",
               "judge.base_url", "judge.model_name", "judge.api_key_env"});
  if (flags.host) set_dotted(cfg, "host", *flags.host);
  if (flags.port) set_dotted(cfg, "port", *flags.port);
  if (flags.run_dir) set_dotted(cfg, "run_dir", fs::absolute(*flags.run_dir).string());
  if (flags.store) set_dotted(cfg, "store_path", fs::absolute(*flags.store).string());
  if (cfg.contains("judge")) cfg["judge"] = endpoint_with_defaults(cfg["judge"], gateway::judge_defaults("", ""));

  auto config = service::service_config_from_json(cfg, base);
  gateway::Gateway gw(base);
  service::Service svc(std::move(config), gw, load_prompts(flags.prompt_dir));
  std::signal(SIGINT, on_signal);
  std::signal(SIGTERM, on_signal);
  const int port = svc.start();
  err << "listening on " << svc.config().host << ":" << port << "\n";
  while (!g_stop) std::this_thread::sleep_for(std::chrono::milliseconds(200));
  svc.stop();
  return kOk;
}

void print_error(std::ostream& err, const std::string& kind, const std::string& message) {
  err << json{{"error", message}, {"kind", kind}}.dump() << "\n";
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Comparative policy optimization rewards and CharacterArena evaluation", "cpo"};
  app.require_subcommand(1);
  std::string prompt_dir;
  app.add_option("--prompts", prompt_dir, "Directory of <id>.txt prompt templates overriding the built-ins");

  // arena
  auto* arena_cmd = app.add_subcommand("arena", "Run pairwise dialogue tournaments");
  arena_cmd->require_subcommand(1);
  std::string plan_path, out_dir;
  std::optional<std::size_t> parallelism;
  std::optional<std::uint64_t> seed;
  auto* arena_run_cmd = arena_cmd->add_subcommand("run", "Simulate, judge and aggregate every planned matchup");
  arena_run_cmd->add_option("--plan", plan_path, "Tournament plan JSON")->required();
  arena_run_cmd->add_option("--out", out_dir, "Run directory")->required();
  arena_run_cmd->add_option("--parallelism", parallelism, "Concurrent matchups (env CPO_PARALLELISM, default 4)");
  arena_run_cmd->add_option("--seed", seed, "Override the plan's master seed (env CPO_SEED)");
  auto* arena_plan_cmd = arena_cmd->add_subcommand("plan", "Print the planned matchups as JSONL");
  arena_plan_cmd->add_option("--plan", plan_path, "Tournament plan JSON")->required();
  arena_plan_cmd->add_option("--seed", seed, "Override the plan's master seed");

  // reward
  auto* reward_cmd = app.add_subcommand("reward", "Judge-backed reward scoring");
  reward_cmd->require_subcommand(1);
  std::string groups_path, judge_path, rewards_out, mode = "group";
  auto* score_cmd = reward_cmd->add_subcommand("score", "Score response groups from JSONL");
  score_cmd->add_option("--groups", groups_path, "JSONL of response groups")->required();
  score_cmd->add_option("--judge", judge_path, "Judge config (TOML or JSON)")->required();
  score_cmd->add_option("--out", rewards_out, "Output JSONL")->required();
  score_cmd->add_option("--mode", mode, "group or sample")->check(CLI::IsMember({"group", "sample"}));

  // policy
  auto* policy_cmd = app.add_subcommand("policy", "Objective evaluation over token traces");
  policy_cmd->require_subcommand(1);
  std::string batch_path, policy_out;
  auto* objective_cmd = policy_cmd->add_subcommand("objective", "Evaluate {group, rewards, config} records");
  objective_cmd->add_option("--batch", batch_path, "Input JSONL")->required();
  objective_cmd->add_option("--out", policy_out, "Output JSONL (stdout when omitted)");

  // stats
  auto* stats_cmd = app.add_subcommand("stats", "Agreement and correlation statistics");
  stats_cmd->require_subcommand(1);
  std::string ann_path, x_path, y_path, field, verdicts_path;
  auto* kappa_cmd = stats_cmd->add_subcommand("kappa", "Fleiss' kappa and invalid-vote count");
  kappa_cmd->add_option("--annotations", ann_path, "Annotation JSONL")->required();
  auto* pearson_cmd = stats_cmd->add_subcommand("pearson", "Pearson correlation of two value files");
  pearson_cmd->add_option("--x", x_path)->required();
  pearson_cmd->add_option("--y", y_path)->required();
  pearson_cmd->add_option("--field", field, "JSON pointer selecting the value in each record");
  auto* conf_cmd = stats_cmd->add_subcommand("confidence", "Judge accuracy by annotator agreement");
  conf_cmd->add_option("--judge", verdicts_path, "Verdict JSONL")->required();
  conf_cmd->add_option("--annotations", ann_path, "Annotation JSONL")->required();

  // annotations
  auto* annotations_cmd = app.add_subcommand("annotations", "Annotation store utilities");
  annotations_cmd->require_subcommand(1);
  std::string store_path, export_out;
  auto* export_cmd = annotations_cmd->add_subcommand("export", "Write stored annotations as JSONL");
  export_cmd->add_option("--store", store_path, "Annotation store file")->required();
  export_cmd->add_option("--out", export_out, "Output JSONL")->required();

  // report
  std::string report_run;
  bool report_json = false;
  auto* report_cmd = app.add_subcommand("report", "Summarize a tournament run");
  report_cmd->add_option("--run", report_run, "Run directory")->required();
  report_cmd->add_flag("--json", report_json, "Emit JSON instead of text");

  // serve
  ServeFlags serve_flags;
  auto* serve_cmd = app.add_subcommand("serve", "Start the HTTP service");
  serve_cmd->add_option("--config", serve_flags.config, "Service config (TOML or JSON)");
  serve_cmd->add_option("--host", serve_flags.host);
  serve_cmd->add_option("--port", serve_flags.port);
  serve_cmd->add_option("--run", serve_flags.run_dir, "Run directory to import for annotation");
  serve_cmd->add_option("--store", serve_flags.store, "Annotation store file");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kOk;
  } catch (const CLI::ParseError& e) {
    print_error(err, "usage", e.what());
    return kConfigOrIoFailure;
  }

  try {
    if (arena_run_cmd->parsed()) return arena_run(plan_path, out_dir, parallelism, seed, prompt_dir, out, err);
    if (arena_plan_cmd->parsed()) return arena_plan(plan_path, seed, out);
    if (score_cmd->parsed()) return reward_score(groups_path, judge_path, rewards_out, mode, prompt_dir, out, err);
    if (objective_cmd->parsed()) return policy_objective(batch_path, policy_out, out, err);
    if (kappa_cmd->parsed()) return stats_kappa(ann_path, out);
    if (pearson_cmd->parsed()) return stats_pearson(x_path, y_path, field, out);
    if (conf_cmd->parsed()) return stats_confidence(verdicts_path, ann_path, out);
    if (export_cmd->parsed()) return annotations_export(store_path, export_out, out);
    if (report_cmd->parsed()) return report(report_run, report_json, out);
    if (serve_cmd->parsed()) {
      serve_flags.prompt_dir = prompt_dir;
      return serve(serve_flags, err);
    }
  } catch (const ExitError& e) {
    print_error(err, "usage", e.what());
    return e.code();
  } catch (const IoError& e) {
    print_error(err, "io", e.what());
    return kConfigOrIoFailure;
  } catch (const SchemaError& e) {
    print_error(err, "schema", e.what());
    return kConfigOrIoFailure;
  } catch (const ValidationError& e) {
    print_error(err, "invalid", e.what());
    return kConfigOrIoFailure;
  } catch (const json::exception& e) {
    print_error(err, "schema", e.what());
    return kConfigOrIoFailure;
  } catch (const std::exception& e) {
    print_error(err, "runtime", e.what());
    return kPartialFailure;
  }
  print_error(err, "usage", "no command given");
  return kConfigOrIoFailure;
}

}  // namespace cpo::cli
