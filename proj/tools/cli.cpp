#include "cli.hpp"

#include <CLI11.hpp>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <optional>
#include <set>

#include "flowsift/error.hpp"
#include "flowsift/importance.hpp"
#include "flowsift/pipeline.hpp"
#include "flowsift/report.hpp"

namespace flowsift::cli {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

struct TrainArgs {
  std::string model = "rf";
  std::vector<fs::path> inputs;
  fs::path out_dir;
  std::uint64_t seed = 0;
  std::optional<std::uint64_t> split_seed;
  std::size_t trees = 300;
  std::size_t max_depth = 20;
  std::size_t min_samples_split = 20;
  std::size_t min_samples_leaf = 10;
  std::optional<std::size_t> max_features;
  std::size_t threads = 0;
  std::size_t epochs = 20;
  double learning_rate = 0.1;
  double l2 = 1e-4;
  std::size_t batch_size = 4096;
  bool class_weighting = false;
  double train_fraction = 0.7;
  std::string tune_on = "test";
  double validation_fraction = 0.2;
};

struct EvalArgs {
  fs::path model;
  std::vector<fs::path> inputs;
  std::optional<fs::path> split;
  fs::path out_dir;
  bool plots = false;
  std::optional<double> threshold;
  std::string tune_on = "auto";
};

struct ImportanceArgs {
  fs::path model;
  std::vector<fs::path> inputs;
  std::optional<fs::path> split;
  fs::path out_dir;
  std::size_t repeats = 5;
  std::uint64_t seed = 0;
  std::size_t threads = 0;
};

struct ScoreArgs {
  fs::path model;
  fs::path input;
  std::optional<fs::path> output;
  double threshold = kDefaultThreshold;
};

struct SynthArgs {
  SynthConfig config;
  fs::path output;
};

void require_exists(const fs::path& path) {
  if (!fs::exists(path)) throw IoError("input file not found: " + path.string());
}

void write_json(const fs::path& path, const json& doc) { write_text(path, doc.dump(2) + "\n"); }

// Rows of `data` selected by a split file's "test" tag, or every row.
std::pair<std::vector<RawFlow>, std::vector<ClassLabel>> select_rows(
    Dataset&& data, const std::optional<fs::path>& split_path) {
  if (!split_path) return {std::move(data.flows), std::move(data.labels)};
  require_exists(*split_path);
  const auto split = read_split_csv(*split_path);
  for (const auto i : split.test)
    if (i >= data.flows.size())
      throw SchemaError("split index " + std::to_string(i) + " exceeds the " +
                        std::to_string(data.flows.size()) + " rows of the input");
  return {gather<RawFlow>(data.flows, split.test), gather<ClassLabel>(data.labels, split.test)};
}

TrainedModel load_checked_model(const fs::path& path) {
  require_exists(path);
  auto model = load_model_file(path);
  require_standard_features(model.schema);
  return model;
}

int cmd_train(const TrainArgs& a, std::ostream& err) {
  for (const auto& p : a.inputs) require_exists(p);
  PipelineConfig config;
  config.kind = parse_model_kind(a.model);
  config.seed = a.seed;
  config.split = {a.train_fraction, a.split_seed.value_or(a.seed)};
  config.tree = {a.max_depth, a.min_samples_split, a.min_samples_leaf};
  config.forest.n_trees = a.trees;
  config.forest.max_features = a.max_features;
  config.forest.threads = a.threads;
  config.logistic = {a.learning_rate, a.epochs, a.l2, a.batch_size, a.class_weighting};
  config.tune_on = a.tune_on == "validation" ? TuneOn::Validation : TuneOn::Test;
  config.validation_fraction = a.validation_fraction;

  const auto data = load_dataset(a.inputs);
  err << "ingest: " << data.stats.to_text() << '\n';
  const auto result = train_pipeline(data, config);

  fs::create_directories(a.out_dir);
  save_model_file(a.out_dir / "model.json", result.model);
  write_split_csv(a.out_dir / "split.csv", result.split);

  const auto train_labels = gather<ClassLabel>(data.labels, result.split.train);
  const auto test_labels = gather<ClassLabel>(data.labels, result.split.test);
  json summary = {
      {"model_kind", to_string(config.kind)},
      {"inputs", json::array()},
      {"ingest", to_json(data.stats)},
      {"rows", data.flows.size()},
      {"prevalence", prevalence(data.labels)},
      {"split",
       {{"train_fraction", config.split.train_fraction},
        {"seed", config.split.seed},
        {"train_rows", result.split.train.size()},
        {"test_rows", result.split.test.size()},
        {"train_prevalence", prevalence(train_labels)},
        {"test_prevalence", prevalence(test_labels)}}},
      {"seed", config.seed},
      {"standardized", result.model.standardizer.has_value()},
      {"tune_on", a.tune_on},
      {"tuned_threshold", result.validation_threshold ? json(*result.validation_threshold) : json()},
      {"train_seconds", result.train_seconds}};
  for (const auto& p : a.inputs) summary["inputs"].push_back(p.string());
  if (config.kind == ModelKind::Forest) {
    summary["trees"] = config.forest.n_trees;
  }
  write_json(a.out_dir / "summary.json", summary);
  err << "trained " << to_string(config.kind) << " on " << result.split.train.size()
      << " flows in " << result.train_seconds << " s; wrote " << (a.out_dir / "model.json").string()
      << '\n';
  return kOk;
}

int cmd_eval(const EvalArgs& a, std::ostream& err) {
  for (const auto& p : a.inputs) require_exists(p);
  const auto model = load_checked_model(a.model);
  auto data = load_dataset(a.inputs);
  err << "ingest: " << data.stats.to_text() << '\n';
  const auto [flows, labels] = select_rows(std::move(data), a.split);

  std::optional<double> tuned = a.threshold;
  if (!tuned && a.tune_on != "test") {
    if (a.tune_on == "validation" && !model.tuned_threshold)
      throw ConfigError("model carries no validation threshold (train with --tune-on validation)");
    tuned = model.tuned_threshold;
  }

  const auto start = std::chrono::steady_clock::now();
  const auto ev = evaluate_model(model, flows, labels, tuned);
  const double seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  fs::create_directories(a.out_dir);
  write_curve_csv(a.out_dir / "pr.csv", ev.pr);
  write_curve_csv(a.out_dir / "roc.csv", ev.roc);
  write_sweep_csv(a.out_dir / "sweep.csv", ev.sweep);
  if (a.plots) {
    write_text(a.out_dir / "pr.svg", curve_svg(ev.pr, "Precision-Recall", "recall", "precision"));
    write_text(a.out_dir / "roc.svg", curve_svg(ev.roc, "ROC", "false positive rate",
                                                "true positive rate"));
  }
  const auto& r = ev.report;
  json doc = {{"model_kind", to_string(model.kind())},
              {"threshold_source", a.threshold ? "flag" : tuned ? "validation" : "test"},
              {"report", to_json(r)},
              {"table_row",
               {{"roc_auc", r.roc_auc},
                {"pr_auc", r.pr_auc},
                {"default", {{"T", r.at_default.threshold}, {"P", r.at_default.precision},
                             {"R", r.at_default.recall}, {"F1", r.at_default.f1}}},
                {"tuned", {{"T", r.at_tuned.threshold}, {"P", r.at_tuned.precision},
                           {"R", r.at_tuned.recall}, {"F1", r.at_tuned.f1}}}}},
              {"eval_seconds", seconds}};
  write_json(a.out_dir / "report.json", doc);
  err << "roc_auc=" << r.roc_auc << " pr_auc=" << r.pr_auc << " prevalence=" << r.prevalence
      << " tuned_T=" << r.at_tuned.threshold << " tuned_F1=" << r.at_tuned.f1 << '\n';
  return kOk;
}

int cmd_importance(const ImportanceArgs& a, std::ostream& err) {
  for (const auto& p : a.inputs) require_exists(p);
  const auto model = load_checked_model(a.model);
  auto data = load_dataset(a.inputs);
  const auto [flows, labels] = select_rows(std::move(data), a.split);
  const auto x = extract_matrix(flows, model.schema);
  const auto report = permutation_importance(model, x, labels, a.repeats, a.seed, a.threads);
  fs::create_directories(a.out_dir);
  write_json(a.out_dir / "importance.json", to_json(report));
  write_importance_csv(a.out_dir / "importance.csv", report);
  err << "baseline pr_auc=" << report.baseline_pr_auc << "; top feature "
      << report.features.front().feature << " (drop " << report.features.front().mean_drop
      << ")\n";
  return kOk;
}

int cmd_score(const ScoreArgs& a, std::ostream& out, std::ostream& err) {
  require_exists(a.input);
  const auto model = load_checked_model(a.model);
  ColumnMapping mapping;
  mapping.label_required = false;
  auto reader = FlowReader::open(a.input, mapping, /*keep_lines=*/true);

  std::ofstream file;
  if (a.output) {
    file.open(*a.output, std::ios::binary);
    if (!file) throw IoError("cannot write " + a.output->string());
  }
  std::ostream& sink = a.output ? file : out;
  sink << reader.header_line() << ",score,predicted\n";
  FeatureVector features(kFeatureCount);
  while (auto record = reader.next()) {
    extract_into(record->flow, model.schema, features);
    const double s = model.score(features);
    sink << record->line << ',' << format_double(s) << ','
         << (classify(s, a.threshold) == ClassLabel::Botnet ? "botnet" : "benign") << '\n';
  }
  sink.flush();
  err << "ingest: " << reader.stats().to_text() << '\n';
  return kOk;
}

int cmd_synth(const SynthArgs& a, std::ostream& err) {
  const auto flows = generate(a.config);
  if (a.output.has_parent_path()) fs::create_directories(a.output.parent_path());
  write_binetflow(a.output, flows);
  err << "wrote " << flows.size() << " flows to " << a.output.string() << '\n';
  return kOk;
}

// Applies a flat key=value config file: each key becomes --key value unless
// the flag was already given on the command line.
std::vector<std::string> expand_config(std::vector<std::string> args) {
  auto it = std::find(args.begin(), args.end(), "--config");
  if (it == args.end()) return args;
  if (std::next(it) == args.end()) throw ConfigError("--config needs a path");
  const fs::path path = *std::next(it);
  args.erase(it, it + 2);
  require_exists(path);
  std::ifstream in(path);
  std::set<std::string> given;
  for (const auto& a : args)
    if (a.rfind("--", 0) == 0) given.insert(a.substr(0, a.find('=')));
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const auto first = line.find_first_not_of(" \t");
    if (first == std::string::npos || line[first] == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError("config line without '=': " + line);
    auto trim = [](std::string s) {
      const auto b = s.find_first_not_of(" \t");
      const auto e = s.find_last_not_of(" \t");
      return b == std::string::npos ? std::string{} : s.substr(b, e - b + 1);
    };
    const std::string key = "--" + trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (given.contains(key)) continue;
    if (value == "true") {
      args.push_back(key);
    } else if (value != "false") {
      args.push_back(key);
      args.push_back(value);
    }
  }
  return args;
}

}  // namespace

int run(const std::vector<std::string>& raw_args, std::ostream& out, std::ostream& err) {
  CLI::App app{"flowsift: lightweight botnet detection on NetFlow records"};
  app.require_subcommand(1);

  TrainArgs train;
  auto* t = app.add_subcommand("train", "Ingest, split, fit a model and write run artifacts");
  t->add_option("--model", train.model, "Model kind")->check(CLI::IsMember({"lr", "dt", "rf"}));
  t->add_option("--in", train.inputs, "Labeled binetflow CSV file(s)")->required();
  t->add_option("--out", train.out_dir, "Output directory")->required();
  t->add_option("--seed", train.seed, "Root seed")->envname("FLOWSIFT_SEED");
  t->add_option("--split-seed", train.split_seed, "Seed of the stratified split (defaults to --seed)");
  t->add_option("--trees", train.trees, "Forest size")->check(CLI::PositiveNumber);
  t->add_option("--max-depth", train.max_depth)->check(CLI::PositiveNumber);
  t->add_option("--min-samples-split", train.min_samples_split)->check(CLI::PositiveNumber);
  t->add_option("--min-samples-leaf", train.min_samples_leaf)->check(CLI::PositiveNumber);
  t->add_option("--max-features", train.max_features, "Features per node (default floor(sqrt(d)))")
      ->check(CLI::PositiveNumber);
  t->add_option("--threads", train.threads, "Forest worker threads (0 = all cores)");
  t->add_option("--epochs", train.epochs)->check(CLI::PositiveNumber);
  t->add_option("--learning-rate", train.learning_rate);
  t->add_option("--l2", train.l2);
  t->add_option("--batch-size", train.batch_size)->check(CLI::PositiveNumber);
  t->add_flag("--class-weighting", train.class_weighting, "Weight positives by neg/pos (lr)");
  t->add_option("--train-fraction", train.train_fraction)->check(CLI::Range(0.0, 1.0));
  t->add_option("--tune-on", train.tune_on, "Where the tuned threshold is chosen")
      ->check(CLI::IsMember({"test", "validation"}));
  t->add_option("--validation-fraction", train.validation_fraction)->check(CLI::Range(0.0, 1.0));

  EvalArgs eval;
  auto* e = app.add_subcommand("eval", "Evaluate a model: report.json, curves and sweep table");
  e->add_option("--model", eval.model, "Model file")->required();
  e->add_option("--in", eval.inputs, "Labeled binetflow CSV file(s)")->required();
  e->add_option("--split", eval.split, "split.csv from train; evaluates the test rows only");
  e->add_option("--out", eval.out_dir, "Output directory")->required();
  e->add_flag("--plots", eval.plots, "Also write pr.svg and roc.svg");
  e->add_option("--threshold", eval.threshold, "Fixed tuned threshold");
  e->add_option("--tune-on", eval.tune_on, "auto: validation threshold if the model has one")
      ->check(CLI::IsMember({"auto", "test", "validation"}));

  ImportanceArgs imp;
  auto* im = app.add_subcommand("importance", "Permutation importance by PR-AUC drop");
  im->add_option("--model", imp.model, "Model file")->required();
  im->add_option("--in", imp.inputs, "Labeled binetflow CSV file(s)")->required();
  im->add_option("--split", imp.split, "split.csv from train; uses the test rows only");
  im->add_option("--out", imp.out_dir, "Output directory")->required();
  im->add_option("--repeats", imp.repeats)->check(CLI::PositiveNumber);
  im->add_option("--seed", imp.seed)->envname("FLOWSIFT_SEED");
  im->add_option("--threads", imp.threads);

  ScoreArgs score;
  auto* sc = app.add_subcommand("score", "Append score and predicted label to each input row");
  sc->add_option("--model", score.model, "Model file")->required();
  sc->add_option("--in", score.input, "binetflow CSV (label column optional)")->required();
  sc->add_option("--out", score.output, "Output CSV (default stdout)");
  sc->add_option("--threshold", score.threshold);

  SynthArgs synth;
  auto* sy = app.add_subcommand("synth", "Generate a synthetic binetflow CSV");
  sy->add_option("--n", synth.config.n)->check(CLI::Range(std::size_t{100}, std::size_t{1} << 40));
  sy->add_option("--prevalence", synth.config.prevalence);
  sy->add_option("--separation", synth.config.separation);
  sy->add_option("--seed", synth.config.seed)->envname("FLOWSIFT_SEED");
  sy->add_option("--out", synth.output, "Output CSV")->required();

  try {
    auto args = expand_config(raw_args);
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& ex) {
    const int code = app.exit(ex, out, err);
    return code == 0 ? kOk : kInputError;
  } catch (const Error& ex) {
    err << "error: " << ex.what() << '\n';
    return kInputError;
  }

  try {
    if (t->parsed()) return cmd_train(train, err);
    if (e->parsed()) return cmd_eval(eval, err);
    if (im->parsed()) return cmd_importance(imp, err);
    if (sc->parsed()) return cmd_score(score, out, err);
    if (sy->parsed()) return cmd_synth(synth, err);
  } catch (const DivergenceError& ex) {
    err << "error: " << ex.what() << '\n';
    return kDivergence;
  } catch (const MissingColumnError& ex) {
    err << "error: " << ex.what() << '\n';
    return kSchemaError;
  } catch (const SchemaError& ex) {
    err << "error: " << ex.what() << '\n';
    return kSchemaError;
  } catch (const ModelFormatError& ex) {
    err << "error: " << ex.what() << '\n';
    return kSchemaError;
  } catch (const std::exception& ex) {
    err << "error: " << ex.what() << '\n';
    return kInputError;
  }
  return kInputError;
}

}  // namespace flowsift::cli
