#include <doctest.h>

#include <fstream>
#include <sstream>

#include "cli/cli.hpp"
#include "cpo/core/json.hpp"
#include "helpers.hpp"

using namespace cpo;

namespace {

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result run(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace

TEST_CASE("arena run is reproducible and report ranks the fixture") {
  test::TempDir dir;
  const auto plan = (test::fixture_dir() / "toy" / "plan.json").string();
  const auto r1 = run({"arena", "run", "--plan", plan, "--out", (dir.path() / "r1").string()});
  REQUIRE(r1.code == cli::kOk);
  const auto r2 =
      run({"arena", "run", "--plan", plan, "--out", (dir.path() / "r2").string(), "--parallelism", "1"});
  REQUIRE(r2.code == cli::kOk);
  CHECK(slurp(dir.path() / "r1" / "matrix.json") == slurp(dir.path() / "r2" / "matrix.json"));

  const auto rep = run({"report", "--run", (dir.path() / "r1").string()});
  REQUIRE(rep.code == cli::kOk);
  const auto a = rep.out.find("1     alpha");
  const auto b = rep.out.find("2     beta");
  const auto g = rep.out.find("3     gamma");
  CHECK(a != std::string::npos);
  CHECK(b != std::string::npos);
  CHECK(g != std::string::npos);

  const auto js = run({"report", "--run", (dir.path() / "r1").string(), "--json"});
  const auto doc = nlohmann::json::parse(js.out);
  CHECK(doc["ranking"][0]["model_id"] == "alpha");
}

TEST_CASE("seed override is recorded") {
  test::TempDir dir;
  const auto plan = (test::fixture_dir() / "toy" / "plan.json").string();
  const auto r = run({"arena", "run", "--plan", plan, "--out", dir.path().string(), "--seed", "99"});
  REQUIRE(r.code == cli::kOk);
  CHECK(read_json_file(dir.path() / "manifest.json")["master_seed"] == 99);
}

TEST_CASE("missing corpus is a config failure naming the path") {
  test::TempDir dir;
  const auto r = run({"arena", "run", "--plan", (test::fixture_dir() / "toy" / "plan_missing_corpus.json").string(),
                      "--out", dir.path().string()});
  CHECK(r.code == cli::kConfigOrIoFailure);
  CHECK(r.err.find("does_not_exist.jsonl") != std::string::npos);
}

TEST_CASE("usage errors") {
  CHECK(run({}).code == cli::kConfigOrIoFailure);
  CHECK(run({"arena", "run"}).code == cli::kConfigOrIoFailure);
  CHECK(run({"bogus"}).code == cli::kConfigOrIoFailure);
  CHECK(run({"--help"}).code == cli::kOk);
}

TEST_CASE("reward score in both modes, then pearson") {
  test::TempDir dir;
  const auto groups = (test::sample_dir() / "groups.jsonl").string();
  const auto group_out = (dir.path() / "g.jsonl").string();
  const auto sample_out = (dir.path() / "s.jsonl").string();
  auto r = run({"reward", "score", "--groups", groups, "--judge", (test::sample_dir() / "judge.toml").string(), "--out",
                group_out});
  REQUIRE(r.code == cli::kOk);
  r = run({"reward", "score", "--groups", groups, "--judge", (test::sample_dir() / "judge_sample.toml").string(),
           "--out", sample_out, "--mode", "sample"});
  REQUIRE(r.code == cli::kOk);
  const auto recs = read_jsonl(group_out);
  REQUIRE(recs.size() == 2);
  CHECK(recs[0]["advantages"].size() == 4);
  CHECK(read_jsonl(sample_out)[0]["mode"] == "sample");
  r = run({"stats", "pearson", "--x", sample_out, "--y", group_out});
  REQUIRE(r.code == cli::kOk);
  CHECK(nlohmann::json::parse(r.out)["n"] == 8);
}

TEST_CASE("malformed group lines are reported inline") {
  test::TempDir dir;
  const auto groups = dir.path() / "groups.jsonl";
  {
    std::ofstream out(groups);
    std::ifstream in(test::sample_dir() / "groups.jsonl");
    std::string first;
    std::getline(in, first);
    out << first << "\n{broken\n";
  }
  const auto out_path = dir.path() / "out.jsonl";
  std::ifstream judge_in(test::sample_dir() / "judge.toml");
  std::string judge((std::istreambuf_iterator<char>(judge_in)), std::istreambuf_iterator<char>());
  const auto judge_path = dir.path() / "judge.toml";
  std::ofstream(judge_path) << judge;
  std::filesystem::copy(test::sample_dir() / "mocks", dir.path() / "mocks");
  const auto r = run({"reward", "score", "--groups", groups.string(), "--judge", judge_path.string(), "--out",
                      out_path.string()});
  CHECK(r.code == cli::kPartialFailure);
  const auto recs = read_jsonl(out_path);
  REQUIRE(recs.size() == 2);
  CHECK(recs[1].contains("error"));
  CHECK(recs[1]["line"] == 2);
}

TEST_CASE("judge settings come from env over file") {
  test::TempDir dir;
  setenv("CPO_JUDGE_MODEL_NAME", "", 1);
  unsetenv("CPO_JUDGE_MODEL_NAME");
  setenv("CPO_JUDGE_BASE_URL", "mock://nowhere", 1);
  const auto r = run({"reward", "score", "--groups", (test::sample_dir() / "groups.jsonl").string(), "--judge",
                      (test::sample_dir() / "judge.toml").string(), "--out", (dir.path() / "o.jsonl").string()});
  unsetenv("CPO_JUDGE_BASE_URL");
  CHECK(r.code == cli::kPartialFailure);
  CHECK(r.err.find("mock://nowhere") != std::string::npos);
}

TEST_CASE("stats kappa and confidence from files") {
  test::TempDir dir;
  const auto ann = dir.path() / "ann.jsonl";
  {
    std::ofstream out(ann);
    for (const char* ann_id : {"a", "b", "c"}) {
      out << json(AnnotationRecord{"p1", ann_id, Outcome::A, ""}).dump() << "\n";
      out << json(AnnotationRecord{"p2", ann_id, Outcome::B, ""}).dump() << "\n";
    }
  }
  auto r = run({"stats", "kappa", "--annotations", ann.string()});
  REQUIRE(r.code == cli::kOk);
  CHECK(nlohmann::json::parse(r.out)["kappa"] == 1.0);

  const auto verdicts = dir.path() / "v.jsonl";
  {
    std::ofstream out(verdicts);
    JudgeVerdict v;
    v.pair_id = "p1";
    v.winner = Outcome::A;
    out << nlohmann::json{{"verdict", v}}.dump() << "\n";
    v.pair_id = "p2";
    out << json(v).dump() << "\n";
  }
  r = run({"stats", "confidence", "--judge", verdicts.string(), "--annotations", ann.string()});
  REQUIRE(r.code == cli::kOk);
  const auto bins = nlohmann::json::parse(r.out)["bins"];
  CHECK(bins.back()["agreement"] == "3/3");
  CHECK(bins.back()["judge_accuracy"] == 0.5);
}

TEST_CASE("policy objective over a batch") {
  test::TempDir dir;
  auto g = test::make_group({"a", "b"});
  for (auto& c : g.candidates) {
    c.token_trace = TokenTrace{{-1.0, -1.0}, {-1.0, -1.0}, std::vector<double>{-1.0, -1.0}};
  }
  const auto batch = dir.path() / "b.jsonl";
  std::ofstream(batch) << nlohmann::json{{"group", g}, {"rewards", {1.0, 0.0}}}.dump() << "\n";
  const auto r = run({"policy", "objective", "--batch", batch.string()});
  REQUIRE(r.code == cli::kOk);
  CHECK(nlohmann::json::parse(r.out)["objective"] == 0.0);
}
