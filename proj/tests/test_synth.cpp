#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <sstream>

#include "flowsift/error.hpp"
#include "flowsift/ingest.hpp"
#include "flowsift/pipeline.hpp"
#include "flowsift/synth.hpp"
#include "test_support.hpp"

using namespace flowsift;
using flowsift::testing::TempDir;

namespace {

std::string render(const SynthConfig& config) {
  std::ostringstream out;
  write_binetflow(out, generate(config));
  return out.str();
}

}  // namespace

TEST_CASE("exact botnet count") {
  SynthConfig config;
  config.n = 10000;
  config.prevalence = 0.0248;
  const auto flows = generate(config);
  REQUIRE(flows.size() == 10000);
  CHECK(std::count_if(flows.begin(), flows.end(),
                      [](const SynthFlow& f) { return f.label == ClassLabel::Botnet; }) == 248);
}

TEST_CASE("output is byte-identical per seed") {
  SynthConfig config;
  config.n = 2000;
  config.seed = 17;
  const auto a = render(config);
  CHECK(a == render(config));
  config.seed = 18;
  CHECK(a != render(config));
}

TEST_CASE("generated flows satisfy the ingestion invariants") {
  SynthConfig config;
  config.n = 20000;
  config.separation = 2.0;
  for (const auto& f : generate(config)) {
    CHECK(f.flow.src_bytes <= f.flow.tot_bytes);
    CHECK(f.flow.duration >= 0.0);
    CHECK((f.flow.tot_pkts > 0 || f.flow.tot_bytes == 0));
  }
}

TEST_CASE("written CSV reads back without drops") {
  TempDir dir("synth");
  SynthConfig config;
  config.n = 3000;
  config.seed = 2;
  const auto flows = generate(config);
  write_binetflow(dir / "s.binetflow", flows);
  IngestStats stats;
  const auto read = read_flows(dir / "s.binetflow", &stats);
  CHECK(stats.rows_dropped == 0);
  REQUIRE(read.size() == flows.size());
  for (std::size_t i = 0; i < flows.size(); ++i) {
    CHECK(read[i].label == flows[i].label);
    CHECK(read[i].flow.tot_bytes == flows[i].flow.tot_bytes);
    CHECK(read[i].flow.src_port == flows[i].flow.src_port);
    CHECK(read[i].flow.dst_port == flows[i].flow.dst_port);
    CHECK(read[i].flow.protocol == flows[i].flow.protocol);
    CHECK(read[i].flow.duration == doctest::Approx(flows[i].flow.duration));
  }
}

TEST_CASE("without separation a model learns nothing") {
  SynthConfig config;
  config.n = 40000;
  config.prevalence = 0.05;
  config.separation = 0.0;
  config.seed = 3;
  const auto data = dataset_from(generate(config));
  PipelineConfig pc;
  pc.kind = ModelKind::Tree;
  const auto result = train_pipeline(data, pc);
  const auto flows = gather<RawFlow>(data.flows, result.split.test);
  const auto labels = gather<ClassLabel>(data.labels, result.split.test);
  const auto ev = evaluate_model(result.model, flows, labels);
  CHECK(ev.report.pr_auc <= ev.report.prevalence + 0.02);
}

TEST_CASE("with separation a model does learn") {
  SynthConfig config;
  config.n = 20000;
  config.prevalence = 0.05;
  config.seed = 3;
  const auto data = dataset_from(generate(config));
  PipelineConfig pc;
  pc.kind = ModelKind::Tree;
  const auto result = train_pipeline(data, pc);
  const auto flows = gather<RawFlow>(data.flows, result.split.test);
  const auto labels = gather<ClassLabel>(data.labels, result.split.test);
  CHECK(evaluate_model(result.model, flows, labels).report.pr_auc > 0.2);
}

TEST_CASE("invalid configurations") {
  SynthConfig config;
  config.n = 10;
  CHECK_THROWS_AS(generate(config), ConfigError);
  config.n = 1000;
  config.prevalence = 0.0;
  CHECK_THROWS_AS(generate(config), ConfigError);
  config.prevalence = 0.1;
  config.separation = -1;
  CHECK_THROWS_AS(generate(config), ConfigError);
}
