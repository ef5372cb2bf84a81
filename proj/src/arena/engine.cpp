#include "cpo/arena/engine.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <numeric>
#include <set>
#include <thread>

#include "cpo/analytics/stats.hpp"
#include "cpo/core/json.hpp"
#include "cpo/core/random.hpp"
#include "cpo/core/validate.hpp"
#include "cpo/gateway/judge.hpp"

namespace cpo::arena {

namespace {

std::string format_pair_id(std::size_t ordinal) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "m%04zu", ordinal);
  return buf;
}

bool blank(const std::string& s) {
  return std::all_of(s.begin(), s.end(), [](unsigned char c) { return std::isspace(c); });
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

// One reply for the given role; a blank reply is re-asked once.
std::string ask(gateway::Gateway& gw, const gateway::ChatEndpointConfig& ep, const gateway::Messages& messages,
                std::uint64_t seed, std::uint64_t role, std::size_t round, const char* who) {
  for (std::uint64_t attempt = 0; attempt < 2; ++attempt) {
    const auto reply = gw.chat(ep, messages, derive_seed(seed, {role, round, attempt}));
    if (!blank(reply.text)) return trim(reply.text);
  }
  throw Error(std::string(who) + " returned an empty reply twice in round " + std::to_string(round));
}

}  // namespace

std::vector<MatchupEntry> plan_matchups(const TournamentPlan& plan, const std::vector<ChatCircumstance>& corpus) {
  plan.validate();
  if (corpus.empty()) throw ValidationError("corpus is empty");
  const auto ids = plan.model_ids();
  std::vector<MatchupEntry> out;
  std::size_t pair_index = 0;
  for (std::size_t i = 0; i < ids.size(); ++i) {
    for (std::size_t j = i + 1; j < ids.size(); ++j, ++pair_index) {
      SplitMixRng rng(derive_seed(plan.master_seed, {fnv1a64("circumstances"), pair_index}));
      std::vector<std::size_t> perm(corpus.size());
      std::iota(perm.begin(), perm.end(), std::size_t{0});
      for (std::size_t n = perm.size(); n > 1; --n) std::swap(perm[n - 1], perm[rng.below(n)]);
      for (std::size_t k = 0; k < plan.k_matchups; ++k) {
        const std::size_t c = k < perm.size() ? perm[k] : rng.below(corpus.size());
        MatchupEntry e;
        e.pair_id = format_pair_id(out.size() + 1);
        e.model_a = ids[i];
        e.model_b = ids[j];
        e.circumstance_id = corpus[c].id;
        e.seed = derive_seed(plan.master_seed, {fnv1a64("matchup"), pair_index, k});
        out.push_back(std::move(e));
      }
    }
  }
  return out;
}

gateway::Messages bot_messages(const gateway::PromptLibrary& prompts, const ChatCircumstance& c,
                               const std::vector<Turn>& turns) {
  const gateway::Bindings b{{"char_name", c.profile.name},
                            {"char_profile", c.profile.profile_text},
                            {"chat_scenario", c.scenario_text}};
  gateway::Messages m{{"system", gateway::render(prompts.get(gateway::prompt_ids::kCharacterBot), b)}};
  for (const auto& t : turns) m.push_back({t.role == Role::bot ? "assistant" : "user", t.text});
  return m;
}

gateway::Messages user_sim_messages(const gateway::PromptLibrary& prompts, const ChatCircumstance& c,
                                    const std::vector<Turn>& turns) {
  const gateway::Bindings b{{"char_name", c.profile.name}, {"chat_scene", c.scenario_text}};
  gateway::Messages m{{"system", gateway::render(prompts.get(gateway::prompt_ids::kUserSimulator), b)}};
  for (const auto& t : turns) m.push_back({t.role == Role::bot ? "user" : "assistant", t.text});
  return m;
}

std::uint64_t side_seed(std::uint64_t matchup_seed, Side side) {
  return derive_seed(matchup_seed, {fnv1a64(side == Side::A ? "side-a" : "side-b")});
}

Trajectory simulate_dialogue(gateway::Gateway& gateway, const gateway::PromptLibrary& prompts,
                             const gateway::ChatEndpointConfig& bot, const gateway::ChatEndpointConfig& user_sim,
                             const ChatCircumstance& circumstance, std::size_t n_turns, std::uint64_t seed,
                             const std::string& model_id, const Clock& clock) {
  if (n_turns < 1) throw ValidationError("n_turns must be >= 1");
  validate(circumstance);
  Trajectory t;
  t.circumstance_id = circumstance.id;
  t.model_id = model_id;
  t.seed = seed;
  t.created_at = clock ? clock() : utc_now_iso8601();
  t.turns.push_back({Role::bot, circumstance.opening_line, 0});
  for (std::size_t round = 1; round <= n_turns; ++round) {
    std::string u = ask(gateway, user_sim, user_sim_messages(prompts, circumstance, t.turns), seed,
                        fnv1a64("user"), round, "user simulator");
    t.turns.push_back({Role::user, std::move(u), t.turns.size()});
    std::string b = ask(gateway, bot, bot_messages(prompts, circumstance, t.turns), seed, fnv1a64("bot"), round,
                        "bot");
    t.turns.push_back({Role::bot, std::move(b), t.turns.size()});
  }
  const auto check = validate_trajectory(t, n_turns);
  if (!check.ok) throw Error("simulated trajectory is malformed: " + check.message);
  return t;
}

RunWriter::RunWriter(std::filesystem::path dir) : dir_(std::move(dir)) {
  std::filesystem::create_directories(dir_ / "trajectories");
  std::filesystem::create_directories(dir_ / "verdicts");
}

void RunWriter::write_matchup(const MatchupResult& r) const {
  write_jsonl(dir_ / "trajectories" / (r.entry.pair_id + ".jsonl"), {json(r.trajectory_a), json(r.trajectory_b)});
  write_text_file(dir_ / "verdicts" / (r.entry.pair_id + ".json"), canonical_dump(verdict_record(r)) + "\n");
}

MatchupResult run_matchup(const MatchupEntry& entry, const MatchupContext& ctx) {
  if (entry.circumstance_id != ctx.circumstance.id) throw ValidationError("matchup/circumstance mismatch");
  MatchupResult r;
  r.entry = entry;
  const char* stage = "simulate_a";
  try {
    r.trajectory_a = simulate_dialogue(ctx.gateway, ctx.prompts, ctx.plan.models.at(entry.model_a),
                                       ctx.plan.user_simulator, ctx.circumstance, ctx.plan.n_turns,
                                       side_seed(entry.seed, Side::A), entry.model_a, ctx.clock);
    stage = "simulate_b";
    r.trajectory_b = simulate_dialogue(ctx.gateway, ctx.prompts, ctx.plan.models.at(entry.model_b),
                                       ctx.plan.user_simulator, ctx.circumstance, ctx.plan.n_turns,
                                       side_seed(entry.seed, Side::B), entry.model_b, ctx.clock);
    stage = "judge";
    r.verdict = gateway::judge_pairwise(ctx.gateway, ctx.prompts, r.trajectory_a, r.trajectory_b, ctx.circumstance,
                                        ctx.plan.judge, entry.seed, entry.pair_id);
    stage = "persist";
    if (ctx.writer) ctx.writer->write_matchup(r);
  } catch (const std::exception& e) {
    throw MatchupError(MatchupFailure{entry, stage, e.what()});
  }
  return r;
}

nlohmann::json matrix_document(const WinRateMatrix& matrix) {
  nlohmann::json j = matrix;
  return j;
}

TournamentOutcome run_tournament(gateway::Gateway& gateway, const gateway::PromptLibrary& prompts,
                                 const TournamentPlan& plan, const std::vector<ChatCircumstance>& corpus,
                                 const TournamentOptions& options) {
  const auto entries = plan_matchups(plan, corpus);
  std::map<std::string, const ChatCircumstance*> by_id;
  for (const auto& c : corpus) by_id[c.id] = &c;

  std::optional<RunWriter> writer;
  if (options.out_dir) {
    writer.emplace(*options.out_dir);
    write_text_file(*options.out_dir / "plan.json", canonical_dump(json(plan), 2) + "\n");
  }

  std::vector<std::optional<MatchupResult>> slots(entries.size());
  std::vector<std::optional<MatchupFailure>> failed(entries.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < entries.size(); i = next++) {
      const MatchupContext ctx{gateway, prompts, plan, *by_id.at(entries[i].circumstance_id),
                               writer ? &*writer : nullptr, options.clock};
      try {
        slots[i] = run_matchup(entries[i], ctx);
      } catch (const MatchupError& e) {
        failed[i] = e.failure();
      }
    }
  };
  const std::size_t threads = std::clamp<std::size_t>(options.parallelism, 1, std::max<std::size_t>(entries.size(), 1));
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
  }

  TournamentOutcome out;
  for (std::size_t i = 0; i < entries.size(); ++i) {
    if (slots[i]) out.results.push_back(std::move(*slots[i]));
    if (failed[i]) out.failures.push_back(std::move(*failed[i]));
  }
  out.matrix = analytics::build_win_rate_matrix(std::span<const MatchupResult>(out.results), plan.model_ids());

  nlohmann::json no_data = nlohmann::json::array();
  for (std::size_t i = 0; i < out.matrix.size(); ++i) {
    for (std::size_t j = i + 1; j < out.matrix.size(); ++j) {
      if (!out.matrix.rates[i][j]) no_data.push_back({out.matrix.model_ids[i], out.matrix.model_ids[j]});
    }
  }
  out.every_pair_has_data = no_data.empty();

  nlohmann::json seeds = nlohmann::json::array();
  for (const auto& e : entries) seeds.push_back(e);
  nlohmann::json failures = nlohmann::json::array();
  for (const auto& f : out.failures) failures.push_back(f);
  out.manifest = {{"schema_version", kSchemaVersion},
                  {"plan_sha256", sha256_hex(canonical_dump(json(plan)))},
                  {"master_seed", plan.master_seed},
                  {"matchups_planned", entries.size()},
                  {"matchups_completed", out.results.size()},
                  {"matchups", std::move(seeds)},
                  {"failures", std::move(failures)},
                  {"pairs_without_data", std::move(no_data)}};

  if (options.out_dir) {
    std::vector<json> records;
    for (const auto& r : out.results) records.push_back(verdict_record(r));
    write_jsonl(*options.out_dir / "verdicts.jsonl", records);
    std::set<std::string> used;
    for (const auto& e : entries) used.insert(e.circumstance_id);
    std::vector<json> circ;
    for (const auto& id : used) circ.push_back(*by_id.at(id));
    write_jsonl(*options.out_dir / "circumstances.jsonl", circ);
    write_text_file(*options.out_dir / "matrix.json", canonical_dump(matrix_document(out.matrix), 2) + "\n");
    write_text_file(*options.out_dir / "manifest.json", canonical_dump(out.manifest, 2) + "\n");
  }
  return out;
}

std::vector<MatchupResult> load_run_results(const std::filesystem::path& run_dir) {
  std::vector<MatchupResult> out;
  const auto path = run_dir / "verdicts.jsonl";
  std::size_t n = 0;
  for (const auto& j : read_jsonl(path)) {
    ++n;
    const std::string where = path.string() + ": record " + std::to_string(n);
    MatchupResult r;
    r.entry = parse_as<MatchupEntry>(j, where);
    r.verdict = parse_as<JudgeVerdict>(j.at("verdict"), where);
    const auto trajectories =
        read_jsonl_as<Trajectory>(run_dir / "trajectories" / (r.entry.pair_id + ".jsonl"));
    if (trajectories.size() != 2) throw SchemaError(where + ": expected two trajectories");
    r.trajectory_a = trajectories[0];
    r.trajectory_b = trajectories[1];
    out.push_back(std::move(r));
  }
  return out;
}

}  // namespace cpo::arena
