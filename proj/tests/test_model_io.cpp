#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <nlohmann/json.hpp>

#include "flowsift/error.hpp"
#include "flowsift/model.hpp"
#include "flowsift/pipeline.hpp"
#include "test_support.hpp"

using namespace flowsift;
using flowsift::testing::TempDir;

namespace {

const Dataset& small_data() {
  static const Dataset data = [] {
    SynthConfig synth;
    synth.n = 3000;
    synth.prevalence = 0.05;
    synth.seed = 8;
    return dataset_from(generate(synth));
  }();
  return data;
}

TrainedModel train_kind(ModelKind kind) {
  PipelineConfig config;
  config.kind = kind;
  config.forest.n_trees = 15;
  config.logistic.epochs = 3;
  return train_pipeline(small_data(), config).model;
}

}  // namespace

TEST_CASE("model kinds have short names") {
  CHECK(to_string(ModelKind::Logistic) == "lr");
  CHECK(to_string(ModelKind::Tree) == "dt");
  CHECK(to_string(ModelKind::Forest) == "rf");
  CHECK(parse_model_kind("rf") == ModelKind::Forest);
  CHECK_THROWS_AS(parse_model_kind("svm"), ConfigError);
  CHECK(classify(0.5, 0.5) == ClassLabel::Botnet);
  CHECK(classify(0.49, 0.5) == ClassLabel::Benign);
}

TEST_CASE("save and load reproduce every score exactly") {
  Rng rng(21);
  for (auto kind : {ModelKind::Logistic, ModelKind::Tree, ModelKind::Forest}) {
    CAPTURE(to_string(kind));
    auto model = train_kind(kind);
    model.tuned_threshold = 0.37;
    const auto bytes = save_model(model);
    const auto loaded = load_model(bytes);
    CHECK(loaded.kind() == kind);
    CHECK(loaded.schema == model.schema);
    CHECK(loaded.standardizer == model.standardizer);
    CHECK(loaded.tuned_threshold == model.tuned_threshold);
    CHECK(save_model(loaded) == bytes);
    for (int i = 0; i < 1000; ++i) {
      std::vector<double> v(kFeatureCount);
      for (auto& x : v) x = rng.normal() * 5;
      CHECK(loaded.score(v) == model.score(v));
    }
  }
}

TEST_CASE("files round-trip") {
  TempDir dir("model");
  const auto model = train_kind(ModelKind::Tree);
  save_model_file(dir / "m.json", model);
  CHECK(save_model(load_model_file(dir / "m.json")) == save_model(model));
  CHECK_THROWS_AS(load_model_file(dir / "missing.json"), IoError);
}

TEST_CASE("bad documents are rejected") {
  const auto good = nlohmann::json::parse(save_model(train_kind(ModelKind::Tree)));
  auto with = [&](auto&& edit) {
    auto doc = good;
    edit(doc);
    return doc.dump();
  };
  CHECK_THROWS_AS(load_model("not json"), ModelFormatError);
  CHECK_THROWS_AS(load_model(""), ModelFormatError);
  CHECK_THROWS_AS(load_model(with([](auto& d) { d["magic"] = "other"; })), ModelFormatError);
  CHECK_THROWS_AS(load_model(with([](auto& d) { d["version"] = 2; })), ModelFormatError);
  CHECK_THROWS_AS(load_model(with([](auto& d) { d["kind"] = "svm"; })), ModelFormatError);
  CHECK_THROWS_AS(load_model(with([](auto& d) { d.erase("model"); })), ModelFormatError);
  CHECK_THROWS_AS(load_model(with([](auto& d) { d["schema"]["feature_names"][0] = "x"; })),
                  ModelFormatError);
  const auto text = good.dump();
  CHECK_THROWS_AS(load_model(text.substr(0, text.size() / 2)), ModelFormatError);
}

TEST_CASE("LR standardizes and tree models do not") {
  CHECK(train_kind(ModelKind::Logistic).standardizer.has_value());
  CHECK_FALSE(train_kind(ModelKind::Tree).standardizer.has_value());
  CHECK_FALSE(train_kind(ModelKind::Forest).standardizer.has_value());
  CHECK(uses_standardizer(ModelKind::Logistic));
  CHECK_FALSE(uses_standardizer(ModelKind::Forest));
}
