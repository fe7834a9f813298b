#include "flowsift/model.hpp"

#include <fstream>
#include <json.hpp>
#include <sstream>

#include "flowsift/error.hpp"

namespace flowsift {
namespace {

using nlohmann::json;

json schema_to_json(const FeatureSchema& schema) {
  json codes = json::object();
  for (const auto& [protocol, code] : schema.protocol_codes) codes[protocol] = code;
  return {{"feature_names", schema.feature_names},
          {"protocol_codes", codes},
          {"unknown_protocol_code", schema.unknown_protocol_code}};
}

FeatureSchema schema_from_json(const json& j) {
  FeatureSchema schema;
  schema.feature_names = j.at("feature_names").get<std::vector<std::string>>();
  for (const auto& [protocol, code] : j.at("protocol_codes").items())
    schema.protocol_codes.emplace(protocol, code.get<int>());
  schema.unknown_protocol_code = j.at("unknown_protocol_code").get<int>();
  return schema;
}

json tree_to_json(const TreeModel& tree) {
  std::vector<std::int32_t> feature;
  std::vector<double> threshold, fraction;
  std::vector<std::uint32_t> left, right;
  std::vector<std::uint64_t> count;
  for (const auto& n : tree.nodes) {
    feature.push_back(n.feature);
    threshold.push_back(n.threshold);
    left.push_back(n.left);
    right.push_back(n.right);
    fraction.push_back(n.positive_fraction);
    count.push_back(n.sample_count);
  }
  return {{"n_features", tree.n_features}, {"feature", feature},
          {"threshold", threshold},       {"left", left},
          {"right", right},               {"positive_fraction", fraction},
          {"sample_count", count}};
}

TreeModel tree_from_json(const json& j) {
  TreeModel tree;
  tree.n_features = j.at("n_features").get<std::size_t>();
  const auto& feature = j.at("feature");
  const auto& threshold = j.at("threshold");
  const auto& left = j.at("left");
  const auto& right = j.at("right");
  const auto& fraction = j.at("positive_fraction");
  const auto& count = j.at("sample_count");
  const std::size_t n = feature.size();
  if (n == 0 || threshold.size() != n || left.size() != n || right.size() != n ||
      fraction.size() != n || count.size() != n)
    throw ModelFormatError("inconsistent tree node arrays");
  tree.nodes.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    auto& node = tree.nodes[i];
    node.feature = feature[i].get<std::int32_t>();
    node.threshold = threshold[i].get<double>();
    node.left = left[i].get<std::uint32_t>();
    node.right = right[i].get<std::uint32_t>();
    node.positive_fraction = fraction[i].get<double>();
    node.sample_count = count[i].get<std::uint64_t>();
    if (!node.is_leaf()) {
      // Preorder layout: children always come after their parent.
      if (node.feature < 0 || static_cast<std::size_t>(node.feature) >= tree.n_features ||
          node.left <= i || node.right <= i || node.left >= n || node.right >= n)
        throw ModelFormatError("tree node " + std::to_string(i) + " is malformed");
    } else if (!(node.positive_fraction >= 0.0 && node.positive_fraction <= 1.0)) {
      throw ModelFormatError("leaf fraction outside [0,1]");
    }
  }
  return tree;
}

struct ClassifierToJson {
  json operator()(const LogisticModel& m) const {
    return {{"weights", m.weights}, {"bias", m.bias}};
  }
  json operator()(const TreeModel& m) const { return tree_to_json(m); }
  json operator()(const ForestModel& m) const {
    json trees = json::array();
    for (const auto& t : m.trees) trees.push_back(tree_to_json(t));
    return {{"feature_subsample", m.feature_subsample}, {"seed", m.seed}, {"trees", trees}};
  }
};

std::size_t classifier_width(const Classifier& c) {
  return std::visit(
      [](const auto& m) -> std::size_t {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, LogisticModel>) {
          return m.weights.size();
        } else if constexpr (std::is_same_v<T, TreeModel>) {
          return m.n_features;
        } else {
          return m.trees.front().n_features;
        }
      },
      c);
}

}  // namespace

std::string_view to_string(ModelKind kind) {
  switch (kind) {
    case ModelKind::Logistic: return "lr";
    case ModelKind::Tree: return "dt";
    case ModelKind::Forest: return "rf";
  }
  return "?";
}

ModelKind parse_model_kind(std::string_view token) {
  if (token == "lr") return ModelKind::Logistic;
  if (token == "dt") return ModelKind::Tree;
  if (token == "rf") return ModelKind::Forest;
  throw ConfigError("unknown model kind '" + std::string(token) + "' (expected lr, dt or rf)");
}

ModelKind TrainedModel::kind() const { return static_cast<ModelKind>(classifier.index()); }

double TrainedModel::score(std::span<const double> features) const {
  if (features.size() != schema.size()) throw SchemaError("feature vector length mismatch");
  if (standardizer) {
    const auto scaled = standardizer->apply(features);
    return std::visit([&](const auto& m) { return m.predict_proba(scaled); }, classifier);
  }
  return std::visit([&](const auto& m) { return m.predict_proba(features); }, classifier);
}

std::vector<double> TrainedModel::score_all(const FeatureMatrix& features) const {
  std::vector<double> out(features.rows);
  for (std::size_t i = 0; i < features.rows; ++i) out[i] = score(features.row(i));
  return out;
}

double TrainedModel::score_flow(const RawFlow& flow) const { return score(extract(flow, schema)); }

std::string save_model(const TrainedModel& model) {
  json doc;
  doc["magic"] = kModelMagic;
  doc["version"] = kModelFormatVersion;
  doc["kind"] = to_string(model.kind());
  doc["schema"] = schema_to_json(model.schema);
  if (model.standardizer) {
    doc["standardizer"] = {{"means", model.standardizer->means}, {"stds", model.standardizer->stds}};
  } else {
    doc["standardizer"] = nullptr;
  }
  doc["model"] = std::visit(ClassifierToJson{}, model.classifier);
  if (model.tuned_threshold) {
    doc["tuned_threshold"] = *model.tuned_threshold;
  } else {
    doc["tuned_threshold"] = nullptr;
  }
  return doc.dump();
}

TrainedModel load_model(std::string_view bytes) {
  try {
    const json doc = json::parse(bytes);
    if (!doc.is_object() || doc.value("magic", std::string{}) != kModelMagic)
      throw ModelFormatError("not a flowsift model (bad magic)");
    const int version = doc.at("version").get<int>();
    if (version != kModelFormatVersion)
      throw ModelFormatError("unsupported model version " + std::to_string(version));

    TrainedModel model;
    model.schema = schema_from_json(doc.at("schema"));
    require_standard_features(model.schema);
    if (const auto& s = doc.at("standardizer"); !s.is_null()) {
      Standardizer st;
      st.means = s.at("means").get<std::vector<double>>();
      st.stds = s.at("stds").get<std::vector<double>>();
      if (st.means.size() != model.schema.size() || st.stds.size() != model.schema.size())
        throw ModelFormatError("standardizer width does not match schema");
      model.standardizer = std::move(st);
    }
    const auto kind = parse_model_kind(doc.at("kind").get<std::string>());
    const auto& body = doc.at("model");
    switch (kind) {
      case ModelKind::Logistic: {
        LogisticModel m;
        m.weights = body.at("weights").get<std::vector<double>>();
        m.bias = body.at("bias").get<double>();
        model.classifier = std::move(m);
        break;
      }
      case ModelKind::Tree:
        model.classifier = tree_from_json(body);
        break;
      case ModelKind::Forest: {
        ForestModel m;
        m.feature_subsample = body.at("feature_subsample").get<std::size_t>();
        m.seed = body.at("seed").get<std::uint64_t>();
        for (const auto& t : body.at("trees")) m.trees.push_back(tree_from_json(t));
        if (m.trees.empty()) throw ModelFormatError("forest has no trees");
        model.classifier = std::move(m);
        break;
      }
    }
    if (auto it = doc.find("tuned_threshold"); it != doc.end() && !it->is_null())
      model.tuned_threshold = it->get<double>();
    if (classifier_width(model.classifier) != model.schema.size())
      throw ModelFormatError("model width does not match schema");
    return model;
  } catch (const json::exception& e) {
    throw ModelFormatError(std::string("corrupt model payload: ") + e.what());
  } catch (const ConfigError& e) {
    throw ModelFormatError(e.what());
  } catch (const SchemaError& e) {
    throw ModelFormatError(e.what());
  }
}

void save_model_file(const std::filesystem::path& path, const TrainedModel& model) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << save_model(model) << '\n';
  if (!out) throw IoError("write failed for " + path.string());
}

TrainedModel load_model_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return load_model(buffer.str());
}

}  // namespace flowsift
