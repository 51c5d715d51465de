#include "zsl/cli.hpp"

#include <omp.h>

#include <CLI11.hpp>
#include <algorithm>
#include <fstream>
#include <iomanip>
#include <json.hpp>
#include <ostream>
#include <sstream>

#include "zsl/config.hpp"
#include "zsl/dataset_io.hpp"
#include "zsl/error.hpp"
#include "zsl/eval.hpp"
#include "zsl/train.hpp"

namespace zsl {
namespace {

using nlohmann::json;

struct CommonOptions {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::vector<std::string> overrides;
  int threads = 0;
};

struct Options {
  CommonOptions common;
  std::string out;
  std::string checkpoint;
  std::string report;
  std::string split = "zsl_test";
  std::string grid = "all";
};

void add_common(CLI::App* cmd, CommonOptions& o) {
  cmd->add_option("-c,--config", o.config, "Experiment config file (key=value)")->required();
  cmd->add_option("--seed", o.seed, "Override the config seed");
  cmd->add_option("--set", o.overrides, "Override a config entry, key=value (repeatable)");
  cmd->add_option("--threads", o.threads, "OpenMP threads (0 = runtime default)");
}

ExperimentConfig load(const CommonOptions& o) {
  ExperimentConfig config = load_config(o.config);
  for (const std::string& kv : o.overrides) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw Error(ErrorKind::InvalidConfig, "--set expects key=value, got '" + kv + "'");
    config.set(kv.substr(0, eq), kv.substr(eq + 1));
  }
  if (o.seed) config.train.seed = *o.seed;
  if (o.threads > 0) omp_set_num_threads(o.threads);
  return config;
}

ClassSplits checked_splits(const ExperimentConfig& config) {
  if (!config.splits) throw Error(ErrorKind::InvalidConfig, "config is missing 'splits'");
  ClassSplits splits = load_splits(config.resolve(*config.splits));
  splits.require_disjoint();
  return splits;
}

std::vector<std::string> split_classes(const ClassSplits& splits) {
  std::vector<std::string> out = splits.seen;
  out.insert(out.end(), splits.zsl_validation.begin(), splits.zsl_validation.end());
  out.insert(out.end(), splits.zsl_test.begin(), splits.zsl_test.end());
  return out;
}

std::string fmt(double v) {
  std::ostringstream s;
  s << std::fixed << std::setprecision(6) << v;
  return s.str();
}

std::filesystem::path pick(const std::string& flag, const std::optional<std::filesystem::path>& configured,
                           const ExperimentConfig& config, const char* what) {
  if (!flag.empty()) return flag;
  if (configured) return config.resolve(*configured);
  throw Error(ErrorKind::InvalidConfig, std::string("no ") + what + " path given (flag or config)");
}

json train_config_json(const TrainConfig& t) {
  return {{"batch_size", t.batch_size},
          {"max_iterations", t.max_iterations},
          {"eval_every", t.eval_every},
          {"seed", t.seed},
          {"init", std::string(to_string(t.init))},
          {"oversample", t.oversample},
          {"optimizer", std::string(to_string(t.optimizer))},
          {"learning_rate", t.adam.alpha},
          {"beta1", t.adam.beta1},
          {"beta2", t.adam.beta2},
          {"epsilon", t.adam.epsilon},
          {"use_wx", t.mask.use_wx},
          {"use_wy", t.mask.use_wy}};
}

json eval_json(const EvalResult& r) {
  json per_class = json::object();
  for (const auto& [c, a] : r.per_class_accuracy) per_class[c] = a;
  return {{"normalized_accuracy", r.normalized_accuracy}, {"per_class_accuracy", per_class}};
}

void write_json(const std::filesystem::path& path, const json& j) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error(ErrorKind::Io, "cannot write report '" + path.string() + "'");
  out << j.dump(2) << '\n';
}

int cmd_embed(const Options& o, std::ostream& out) {
  const ExperimentConfig config = load(o.common);
  const ClassSplits splits = checked_splits(config);
  const auto sources = load_embedding_sources(config);
  const auto embeddings =
      build_class_embeddings(sources, split_classes(splits), config.embedding_sources, config.embedding);
  if (o.out.empty()) {
    write_class_embeddings(out, embeddings);
  } else {
    save_class_embeddings(o.out, embeddings);
    out << "wrote " << embeddings.size() << " class embeddings (m=" << embeddings.front().vector.size() << ") to "
        << o.out << '\n';
  }
  return 0;
}

int cmd_train(const Options& o, std::ostream& out) {
  const ExperimentConfig config = load(o.common);
  config.train.validate();
  const ClassSplits splits = checked_splits(config);
  const SplitDataset dataset = load_dataset(config);
  const auto embeddings = load_or_build_class_embeddings(config, splits);
  const TrainReport report = train(dataset, embeddings, config.train);

  out << "iteration\ttrain_nll\tvalidation_accuracy\n";
  for (const auto& r : report.records) out << r.iteration << '\t' << fmt(r.train_nll) << '\t' << fmt(r.validation_accuracy) << '\n';
  out << "best_iteration\t" << report.best_iteration << "\nbest_validation_accuracy\t"
      << fmt(report.best_validation_accuracy) << '\n';

  const ClassSet classes = ClassSet::from_embeddings(embeddings).subset(split_classes(splits));
  if (!o.checkpoint.empty() || config.checkpoint) {
    const auto path = pick(o.checkpoint, config.checkpoint, config, "checkpoint");
    save_checkpoint(path, {report.model, classes.names(), classes.layout(), report.optimizer_state});
  }
  if (!o.report.empty() || config.report) {
    json records = json::array();
    for (const auto& r : report.records)
      records.push_back({{"iteration", r.iteration}, {"train_nll", r.train_nll}, {"validation_accuracy", r.validation_accuracy}});
    write_json(pick(o.report, config.report, config, "report"),
               {{"command", "train"},
                {"config", train_config_json(config.train)},
                {"image_dim", report.model.image_dim()},
                {"class_dim", report.model.class_dim()},
                {"layout", format_layout(classes.layout())},
                {"seen_classes", report.seen_classes},
                {"validation_classes", report.validation_classes},
                {"records", records},
                {"best_iteration", report.best_iteration},
                {"best_validation_accuracy", report.best_validation_accuracy}});
  }
  return 0;
}

Checkpoint checkpoint_for(const Options& o, const ExperimentConfig& config) {
  return load_checkpoint(pick(o.checkpoint, config.checkpoint, config, "checkpoint"));
}

int cmd_eval(const Options& o, std::ostream& out) {
  const ExperimentConfig config = load(o.common);
  const ClassSplits splits = checked_splits(config);
  const Split target = parse_split(o.split);
  const SplitDataset dataset = load_dataset(config);
  const auto embeddings = load_or_build_class_embeddings(config, splits);
  const Checkpoint cp = checkpoint_for(o, config);
  const EvalResult result = evaluate_zsl(cp.model, dataset, embeddings, target);

  out << "class\taccuracy\n";
  for (const auto& [c, a] : result.per_class_accuracy) out << c << '\t' << fmt(a) << '\n';
  out << "normalized_accuracy\t" << fmt(result.normalized_accuracy) << '\n';
  if (!o.report.empty()) {
    json j = eval_json(result);
    j["command"] = "eval";
    j["split"] = std::string(to_string(target));
    write_json(o.report, j);
  }
  return 0;
}

int cmd_predict(const Options& o, std::ostream& out) {
  const ExperimentConfig config = load(o.common);
  const ClassSplits splits = checked_splits(config);
  const Split target = parse_split(o.split);
  if (!config.features) throw Error(ErrorKind::InvalidConfig, "config is missing 'features'");
  const auto features = load_features(config.resolve(*config.features), config.l2_normalize_features);
  const auto embeddings = load_or_build_class_embeddings(config, splits);
  const ClassSet candidates = ClassSet::from_embeddings(embeddings).subset(splits.classes(target));
  const Checkpoint cp = checkpoint_for(o, config);

  out << "id\tpredicted\n";
  for (std::size_t i = 0; i < features.ids.size(); ++i) {
    const std::size_t k = predict(cp.model, features.values.row(static_cast<Eigen::Index>(i)).transpose(), candidates);
    out << features.ids[i] << '\t' << candidates.name(k) << '\n';
  }
  return 0;
}

int cmd_ablate(const Options& o, std::ostream& out) {
  const ExperimentConfig config = load(o.common);
  config.train.validate();
  if (o.grid != "embeddings" && o.grid != "linear" && o.grid != "all")
    throw Error(ErrorKind::InvalidConfig, "--grid must be embeddings, linear or all");
  const ClassSplits splits = checked_splits(config);
  const SplitDataset dataset = load_dataset(config);
  json report = {{"command", "ablate"}, {"config", train_config_json(config.train)}, {"repeats", config.repeats}};

  if (o.grid == "embeddings" || o.grid == "all") {
    if (config.class_embeddings)
      throw Error(ErrorKind::InvalidConfig, "the embeddings grid needs raw sources, not a prebuilt class_embeddings file");
    const auto sources = load_embedding_sources(config);
    const auto rows = ablate_embeddings(dataset, sources, config.train, {config.repeats, config.embedding});
    out << "attribute\ttaxonomy\tword\tnormalized_accuracy\tstddev\n";
    json table = json::array();
    for (const auto& r : rows) {
      auto has = [&](EmbeddingSource s) { return std::find(r.sources.begin(), r.sources.end(), s) != r.sources.end(); };
      out << has(EmbeddingSource::Attribute) << '\t' << has(EmbeddingSource::Taxonomy) << '\t'
          << has(EmbeddingSource::Word) << '\t' << fmt(r.test_accuracy.mean) << '\t' << fmt(r.test_accuracy.stddev)
          << '\n';
      table.push_back({{"sources", subset_label(r.sources)},
                       {"normalized_accuracy", r.test_accuracy.mean},
                       {"stddev", r.test_accuracy.stddev},
                       {"runs", r.test_accuracy.runs}});
    }
    report["embeddings"] = table;
  }
  if (o.grid == "linear" || o.grid == "all") {
    const auto embeddings = load_or_build_class_embeddings(config, splits);
    const auto rows = ablate_linear_terms(dataset, embeddings, config.train, config.repeats);
    out << "use_wx\tuse_wy\tnormalized_accuracy\tstddev\n";
    json table = json::array();
    for (const auto& r : rows) {
      out << r.mask.use_wx << '\t' << r.mask.use_wy << '\t' << fmt(r.test_accuracy.mean) << '\t'
          << fmt(r.test_accuracy.stddev) << '\n';
      table.push_back({{"use_wx", r.mask.use_wx},
                       {"use_wy", r.mask.use_wy},
                       {"normalized_accuracy", r.test_accuracy.mean},
                       {"stddev", r.test_accuracy.stddev},
                       {"runs", r.test_accuracy.runs}});
    }
    report["linear_terms"] = table;
  }
  if (!o.report.empty() || config.report) write_json(pick(o.report, config.report, config, "report"), report);
  return 0;
}

int cmd_validate(const Options& o, std::ostream& out) {
  const ExperimentConfig config = load(o.common);
  std::optional<std::filesystem::path> checkpoint;
  if (!o.checkpoint.empty()) checkpoint = o.checkpoint;
  const ValidationReport report = validate_experiment(config, checkpoint);
  for (const auto& v : report.violations) out << v.category << '\t' << v.message << '\n';
  if (report.ok()) out << "ok\n";
  return report.ok() ? 0 : 1;
}

}  // namespace

int run_cli(std::span<const std::string> args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Zero-shot classification with a bilinear compatibility model", "zsl"};
  app.require_subcommand(1);
  Options o;

  auto* embed = app.add_subcommand("embed", "Build class embeddings from attributes, taxonomy and word vectors");
  add_common(embed, o.common);
  embed->add_option("-o,--out", o.out, "Output embedding file (default: stdout)");

  auto* train_cmd = app.add_subcommand("train", "Train on the seen split with early stopping on zsl_validation");
  add_common(train_cmd, o.common);
  train_cmd->add_option("--checkpoint", o.checkpoint, "Checkpoint path (overrides config)");
  train_cmd->add_option("--report", o.report, "JSON report path (overrides config)");

  auto* eval_cmd = app.add_subcommand("eval", "Zero-shot evaluation of a checkpoint on one split");
  add_common(eval_cmd, o.common);
  eval_cmd->add_option("--checkpoint", o.checkpoint, "Checkpoint path (overrides config)");
  eval_cmd->add_option("--split", o.split, "zsl_validation or zsl_test")->capture_default_str();
  eval_cmd->add_option("--report", o.report, "JSON report path");

  auto* predict_cmd = app.add_subcommand("predict", "Predict a class for every feature row");
  add_common(predict_cmd, o.common);
  predict_cmd->add_option("--checkpoint", o.checkpoint, "Checkpoint path (overrides config)");
  predict_cmd->add_option("--split", o.split, "Split whose classes are the candidates")->capture_default_str();

  auto* ablate = app.add_subcommand("ablate", "Class-embedding and linear-term ablation tables");
  add_common(ablate, o.common);
  ablate->add_option("--grid", o.grid, "embeddings, linear or all")->capture_default_str();
  ablate->add_option("--report", o.report, "JSON report path (overrides config)");

  auto* validate = app.add_subcommand("validate", "Check splits, coverage and dimensions of an experiment");
  add_common(validate, o.common);
  validate->add_option("--checkpoint", o.checkpoint, "Also check against this checkpoint");

  std::vector<const char*> argv;
  argv.reserve(args.size() + 1);
  argv.push_back("zsl");
  for (const auto& a : args) argv.push_back(a.c_str());

  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err) == 0 ? 0 : 2;
  }

  try {
    if (embed->parsed()) return cmd_embed(o, out);
    if (train_cmd->parsed()) return cmd_train(o, out);
    if (eval_cmd->parsed()) return cmd_eval(o, out);
    if (predict_cmd->parsed()) return cmd_predict(o, out);
    if (ablate->parsed()) return cmd_ablate(o, out);
    if (validate->parsed()) return cmd_validate(o, out);
  } catch (const Error& e) {
    err << "zsl: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    err << "zsl: " << e.what() << '\n';
    return 1;
  }
  return 2;
}

}  // namespace zsl
