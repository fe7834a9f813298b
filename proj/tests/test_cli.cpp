#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <nlohmann/json.hpp>
#include <sstream>

#include "cli.hpp"
#include "test_support.hpp"

using namespace flowsift;
using flowsift::testing::TempDir;
using nlohmann::json;

namespace {

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run run(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

json read_json(const std::filesystem::path& p) { return json::parse(testing::read_file(p)); }

std::vector<std::string> lines_of(const std::string& text) {
  std::vector<std::string> lines;
  std::istringstream in(text);
  for (std::string line; std::getline(in, line);) lines.push_back(line);
  return lines;
}

struct Fixture {
  TempDir dir{"cli"};
  std::string data = (dir / "flows.binetflow").string();
  Fixture() {
    const auto r = run({"synth", "--n", "4000", "--prevalence", "0.05", "--seed", "3", "--out", data});
    REQUIRE(r.code == 0);
  }
  std::string path(const std::string& name) const { return (dir / name).string(); }
};

}  // namespace

TEST_CASE("train, eval, importance and score") {
  Fixture f;
  auto r = run({"train", "--model", "dt", "--in", f.data, "--out", f.path("dt"), "--seed", "5"});
  REQUIRE_MESSAGE(r.code == 0, r.err);
  CHECK(std::filesystem::exists(f.path("dt/model.json")));
  CHECK(std::filesystem::exists(f.path("dt/split.csv")));
  const auto summary = read_json(f.path("dt/summary.json"));
  CHECK(summary["model_kind"] == "dt");
  CHECK(summary["standardized"] == false);
  CHECK(summary["rows"] == 4000);
  CHECK(r.err.find("rows_read=4000") != std::string::npos);

  r = run({"eval", "--model", f.path("dt/model.json"), "--in", f.data, "--split",
           f.path("dt/split.csv"), "--out", f.path("dt/eval"), "--plots"});
  REQUIRE_MESSAGE(r.code == 0, r.err);
  const auto report = read_json(f.path("dt/eval/report.json"));
  CHECK(report["report"]["examples"] == summary["split"]["test_rows"]);
  CHECK(report["threshold_source"] == "test");
  CHECK(report["table_row"]["default"]["T"] == 0.5);
  for (const char* name : {"pr.csv", "roc.csv", "sweep.csv", "pr.svg", "roc.svg"})
    CHECK(std::filesystem::exists(f.path("dt/eval/") + name));

  r = run({"importance", "--model", f.path("dt/model.json"), "--in", f.data, "--split",
           f.path("dt/split.csv"), "--out", f.path("dt/imp"), "--repeats", "2"});
  REQUIRE_MESSAGE(r.code == 0, r.err);
  const auto imp = read_json(f.path("dt/imp/importance.json"));
  CHECK(imp["features"].size() == 10);
  CHECK(imp["repeats"] == 2);

  r = run({"score", "--model", f.path("dt/model.json"), "--in", f.data});
  REQUIRE_MESSAGE(r.code == 0, r.err);
  const auto lines = lines_of(r.out);
  REQUIRE(lines.size() == 4001);
  CHECK(lines[0].ends_with(",Label,score,predicted"));
  const auto input = lines_of(testing::read_file(f.data));
  CHECK(lines[1].rfind(input[1] + ",", 0) == 0);

  r = run({"score", "--model", f.path("dt/model.json"), "--in", f.data, "--threshold", "0",
           "--out", f.path("scored.csv")});
  REQUIRE(r.code == 0);
  const auto all_bot = lines_of(testing::read_file(f.path("scored.csv")));
  REQUIRE(all_bot.size() == lines.size());
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const auto cut = lines[i].rfind(',');
    CHECK(all_bot[i].substr(0, cut) == lines[i].substr(0, cut));
    CHECK(all_bot[i].ends_with(",botnet"));
  }
}

TEST_CASE("logistic summary records standardization and validation tuning") {
  Fixture f;
  auto r = run({"train", "--model", "lr", "--in", f.data, "--out", f.path("lr"), "--epochs", "3",
                "--tune-on", "validation"});
  REQUIRE_MESSAGE(r.code == 0, r.err);
  const auto summary = read_json(f.path("lr/summary.json"));
  CHECK(summary["standardized"] == true);
  CHECK(summary["tuned_threshold"].is_number());
  r = run({"eval", "--model", f.path("lr/model.json"), "--in", f.data, "--split",
           f.path("lr/split.csv"), "--out", f.path("lr/eval")});
  REQUIRE(r.code == 0);
  const auto report = read_json(f.path("lr/eval/report.json"));
  CHECK(report["threshold_source"] == "validation");
  CHECK(report["report"]["at_tuned"]["threshold"] == summary["tuned_threshold"]);
}

TEST_CASE("repeated runs write identical artifacts") {
  Fixture f;
  for (const char* out : {"a", "b"}) {
    auto r = run({"train", "--model", "rf", "--trees", "5", "--in", f.data, "--out", f.path(out)});
    REQUIRE(r.code == 0);
  }
  CHECK(testing::read_file(f.path("a/model.json")) == testing::read_file(f.path("b/model.json")));
  CHECK(testing::read_file(f.path("a/split.csv")) == testing::read_file(f.path("b/split.csv")));
}

TEST_CASE("config file and environment seed") {
  Fixture f;
  testing::write_file(f.path("run.conf"),
                      "# forest settings\nmodel = rf\ntrees = 3\nmax-depth = 4\nclass-weighting = false\n");
  auto r = run({"train", "--config", f.path("run.conf"), "--in", f.data, "--out", f.path("c"),
                "--max-depth", "2"});
  REQUIRE_MESSAGE(r.code == 0, r.err);
  const auto model = read_json(f.path("c/model.json"));
  CHECK(model["kind"] == "rf");
  CHECK(model["model"]["trees"].size() == 3);
  CHECK(read_json(f.path("c/summary.json"))["trees"] == 3);

  ::setenv("FLOWSIFT_SEED", "77", 1);
  r = run({"train", "--model", "dt", "--in", f.data, "--out", f.path("env")});
  ::unsetenv("FLOWSIFT_SEED");
  REQUIRE(r.code == 0);
  CHECK(read_json(f.path("env/summary.json"))["seed"] == 77);
}

TEST_CASE("exit codes") {
  Fixture f;
  auto r = run({"train", "--in", f.path("missing.csv"), "--out", f.path("x")});
  CHECK(r.code == 2);
  CHECK(r.err.find("input file not found: " + f.path("missing.csv")) != std::string::npos);

  CHECK(run({"train", "--model", "svm", "--in", f.data, "--out", f.path("x")}).code == 2);
  CHECK(run({"bogus"}).code == 2);
  CHECK(run({}).code == 2);

  testing::write_file(f.path("nocol.csv"), "Dur,Proto,TotPkts\n1,tcp,3\n");
  CHECK(run({"train", "--in", f.path("nocol.csv"), "--out", f.path("x")}).code == 3);

  testing::write_file(f.path("bad_model.json"), "{\"magic\":\"nope\"}");
  CHECK(run({"score", "--model", f.path("bad_model.json"), "--in", f.data}).code == 3);

  r = run({"train", "--model", "lr", "--in", f.data, "--out", f.path("div"), "--learning-rate",
           "1e308", "--epochs", "5"});
  CHECK(r.code == 4);
  CHECK(r.err.find("epoch") != std::string::npos);

  CHECK(run({"synth", "--n", "10", "--out", f.path("tiny.csv")}).code == 2);
}

TEST_CASE("scoring an input with only a header writes only a header") {
  Fixture f;
  REQUIRE(run({"train", "--model", "dt", "--in", f.data, "--out", f.path("m")}).code == 0);
  const auto header = lines_of(testing::read_file(f.data))[0];
  testing::write_file(f.path("empty.csv"), header + "\n");
  const auto r = run({"score", "--model", f.path("m/model.json"), "--in", f.path("empty.csv")});
  REQUIRE(r.code == 0);
  CHECK(r.out == header + ",score,predicted\n");
}
