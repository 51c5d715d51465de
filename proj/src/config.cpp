#include "zsl/config.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <istream>
#include <map>
#include <set>

#include "zsl/dataset_io.hpp"
#include "zsl/error.hpp"

namespace zsl {
namespace {

std::string_view trim(std::string_view s) {
  const char* ws = " \t\r\n";
  const auto b = s.find_first_not_of(ws);
  if (b == std::string_view::npos) return {};
  return s.substr(b, s.find_last_not_of(ws) - b + 1);
}

Error bad_value(std::string_view key, std::string_view value) {
  return Error(ErrorKind::InvalidConfig, "bad value '" + std::string(value) + "' for '" + std::string(key) + "'");
}

bool to_bool(std::string_view key, std::string_view v) {
  if (v == "1" || v == "true" || v == "yes") return true;
  if (v == "0" || v == "false" || v == "no") return false;
  throw bad_value(key, v);
}

template <typename Int>
Int to_int(std::string_view key, std::string_view v) {
  Int out{};
  auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size()) throw bad_value(key, v);
  return out;
}

double to_double(std::string_view key, std::string_view v) {
  double out = 0.0;
  auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size()) throw bad_value(key, v);
  return out;
}

std::vector<EmbeddingSource> to_sources(std::string_view v) {
  std::vector<EmbeddingSource> out;
  std::size_t start = 0;
  while (start <= v.size()) {
    auto end = v.find(',', start);
    if (end == std::string_view::npos) end = v.size();
    const auto item = trim(v.substr(start, end - start));
    if (!item.empty()) out.push_back(parse_embedding_source(item));
    start = end + 1;
  }
  return canonical_sources(out);
}

using Setter = void (*)(ExperimentConfig&, std::string_view, std::string_view);

const std::map<std::string, Setter, std::less<>>& setters() {
  static const std::map<std::string, Setter, std::less<>> table = {
      {"features", [](ExperimentConfig& c, std::string_view, std::string_view v) { c.features = std::string(v); }},
      {"labels", [](ExperimentConfig& c, std::string_view, std::string_view v) { c.labels = std::string(v); }},
      {"splits", [](ExperimentConfig& c, std::string_view, std::string_view v) { c.splits = std::string(v); }},
      {"class_embeddings",
       [](ExperimentConfig& c, std::string_view, std::string_view v) { c.class_embeddings = std::string(v); }},
      {"attribute_schema",
       [](ExperimentConfig& c, std::string_view, std::string_view v) { c.attribute_schema = std::string(v); }},
      {"attribute_assignments",
       [](ExperimentConfig& c, std::string_view, std::string_view v) { c.attribute_assignments = std::string(v); }},
      {"taxonomy", [](ExperimentConfig& c, std::string_view, std::string_view v) { c.taxonomy = std::string(v); }},
      {"taxonomy_leaves",
       [](ExperimentConfig& c, std::string_view, std::string_view v) { c.taxonomy_leaves = std::string(v); }},
      {"word_vectors", [](ExperimentConfig& c, std::string_view, std::string_view v) { c.word_vectors = std::string(v); }},
      {"common_names", [](ExperimentConfig& c, std::string_view, std::string_view v) { c.common_names = std::string(v); }},
      {"embedding_sources",
       [](ExperimentConfig& c, std::string_view, std::string_view v) { c.embedding_sources = to_sources(v); }},
      {"word_policy",
       [](ExperimentConfig& c, std::string_view, std::string_view v) {
         c.embedding.word_policy = parse_missing_token_policy(v);
       }},
      {"block_l2_normalize",
       [](ExperimentConfig& c, std::string_view k, std::string_view v) { c.embedding.l2_normalize_blocks = to_bool(k, v); }},
      {"l2_normalize_features",
       [](ExperimentConfig& c, std::string_view k, std::string_view v) { c.l2_normalize_features = to_bool(k, v); }},
      {"optimizer",
       [](ExperimentConfig& c, std::string_view, std::string_view v) { c.train.optimizer = parse_optimizer_kind(v); }},
      {"learning_rate",
       [](ExperimentConfig& c, std::string_view k, std::string_view v) { c.train.adam.alpha = to_double(k, v); }},
      {"beta1", [](ExperimentConfig& c, std::string_view k, std::string_view v) { c.train.adam.beta1 = to_double(k, v); }},
      {"beta2", [](ExperimentConfig& c, std::string_view k, std::string_view v) { c.train.adam.beta2 = to_double(k, v); }},
      {"epsilon",
       [](ExperimentConfig& c, std::string_view k, std::string_view v) { c.train.adam.epsilon = to_double(k, v); }},
      {"batch_size",
       [](ExperimentConfig& c, std::string_view k, std::string_view v) { c.train.batch_size = to_int<std::size_t>(k, v); }},
      {"max_iterations",
       [](ExperimentConfig& c, std::string_view k, std::string_view v) {
         c.train.max_iterations = to_int<std::size_t>(k, v);
       }},
      {"eval_every",
       [](ExperimentConfig& c, std::string_view k, std::string_view v) { c.train.eval_every = to_int<std::size_t>(k, v); }},
      {"seed", [](ExperimentConfig& c, std::string_view k, std::string_view v) { c.train.seed = to_int<std::uint64_t>(k, v); }},
      {"init", [](ExperimentConfig& c, std::string_view, std::string_view v) { c.train.init = parse_init_scheme(v); }},
      {"oversample",
       [](ExperimentConfig& c, std::string_view k, std::string_view v) { c.train.oversample = to_bool(k, v); }},
      {"use_wx", [](ExperimentConfig& c, std::string_view k, std::string_view v) { c.train.mask.use_wx = to_bool(k, v); }},
      {"use_wy", [](ExperimentConfig& c, std::string_view k, std::string_view v) { c.train.mask.use_wy = to_bool(k, v); }},
      {"repeats", [](ExperimentConfig& c, std::string_view k, std::string_view v) { c.repeats = to_int<std::size_t>(k, v); }},
      {"checkpoint", [](ExperimentConfig& c, std::string_view, std::string_view v) { c.checkpoint = std::string(v); }},
      {"report", [](ExperimentConfig& c, std::string_view, std::string_view v) { c.report = std::string(v); }},
  };
  return table;
}

const std::filesystem::path& require(const std::optional<std::filesystem::path>& p, const char* key) {
  if (!p) throw Error(ErrorKind::InvalidConfig, std::string("config is missing '") + key + "'");
  return *p;
}

std::vector<std::string> all_classes(const ClassSplits& splits) {
  std::vector<std::string> out = splits.seen;
  out.insert(out.end(), splits.zsl_validation.begin(), splits.zsl_validation.end());
  out.insert(out.end(), splits.zsl_test.begin(), splits.zsl_test.end());
  return out;
}

}  // namespace

void ExperimentConfig::set(std::string_view key, std::string_view value) {
  auto it = setters().find(key);
  if (it == setters().end()) throw Error(ErrorKind::InvalidConfig, "unknown config key '" + std::string(key) + "'");
  it->second(*this, key, value);
}

std::filesystem::path ExperimentConfig::resolve(const std::filesystem::path& p) const {
  return p.is_absolute() ? p : base_dir / p;
}

const std::vector<std::string>& config_keys() {
  static const std::vector<std::string> keys = [] {
    std::vector<std::string> k;
    for (const auto& [name, _] : setters()) k.push_back(name);
    return k;
  }();
  return keys;
}

ExperimentConfig read_config(std::istream& in, const std::filesystem::path& base_dir, const std::string& source) {
  ExperimentConfig config;
  config.base_dir = base_dir;
  std::set<std::string> given;
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    const auto t = trim(line);
    if (t.empty() || t.front() == '#') continue;
    const auto eq = t.find('=');
    if (eq == std::string_view::npos)
      throw Error(ErrorKind::InvalidConfig, source + ":" + std::to_string(number) + ": expected key=value");
    const std::string key(trim(t.substr(0, eq)));
    if (!given.insert(key).second)
      throw Error(ErrorKind::InvalidConfig, source + ":" + std::to_string(number) + ": key '" + key + "' repeated");
    try {
      config.set(key, trim(t.substr(eq + 1)));
    } catch (const Error& e) {
      throw Error(e.kind(), source + ":" + std::to_string(number) + ": " + e.what());
    }
  }
  return config;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Io, "cannot open config '" + path.string() + "'");
  return read_config(in, path.parent_path(), path.string());
}

SplitDataset load_dataset(const ExperimentConfig& config) {
  const auto features = load_features(config.resolve(require(config.features, "features")), config.l2_normalize_features);
  const auto labels = load_pairs(config.resolve(require(config.labels, "labels")));
  const auto splits = load_splits(config.resolve(require(config.splits, "splits")));
  return make_dataset(features, labels, splits);
}

EmbeddingSources load_embedding_sources(const ExperimentConfig& config) {
  EmbeddingSources sources;
  if (config.attribute_schema) sources.attribute_schema = load_attribute_schema(config.resolve(*config.attribute_schema));
  if (config.attribute_assignments)
    sources.attributes = load_attribute_assignments(config.resolve(*config.attribute_assignments));
  if (config.taxonomy) sources.taxonomy = load_taxonomy(config.resolve(*config.taxonomy));
  if (config.taxonomy_leaves) sources.taxonomy_leaves = load_mapping(config.resolve(*config.taxonomy_leaves));
  if (config.word_vectors) sources.word_vectors = load_word_vectors(config.resolve(*config.word_vectors));
  if (config.common_names) sources.common_names = load_mapping(config.resolve(*config.common_names));
  return sources;
}

std::vector<ClassEmbedding> load_or_build_class_embeddings(const ExperimentConfig& config, const ClassSplits& splits) {
  if (config.class_embeddings) return load_class_embeddings(config.resolve(*config.class_embeddings));
  const auto sources = load_embedding_sources(config);
  return build_class_embeddings(sources, all_classes(splits), config.embedding_sources, config.embedding);
}

ValidationReport validate_experiment(const ExperimentConfig& config,
                                     const std::optional<std::filesystem::path>& checkpoint) {
  ValidationReport report;
  auto add = [&](std::string category, std::string message) {
    report.violations.push_back({std::move(category), std::move(message)});
  };
  // Runs `f`, recording any library error as a violation.
  auto attempt = [&](const char* category, auto&& f) -> bool {
    try {
      f();
      return true;
    } catch (const Error& e) {
      add(category, e.what());
      return false;
    }
  };

  attempt("config", [&] { config.train.validate(); });
  if (config.repeats < 1) add("config", "repeats must be at least 1");

  std::optional<ClassSplits> splits;
  if (!config.splits) {
    add("config", "config is missing 'splits'");
  } else if (attempt("file", [&] { splits = load_splits(config.resolve(*config.splits)); })) {
    if (splits->seen.empty()) add("split", "the seen split has no classes");
    if (splits->zsl_validation.empty()) add("split", "the zsl_validation split has no classes");
    for (const auto& o : splits->overlaps())
      add("split", "class '" + o.class_name + "' appears in both " + std::string(to_string(o.first)) + " and " +
                       std::string(to_string(o.second)));
    for (Split s : {Split::Seen, Split::ZslValidation, Split::ZslTest}) {
      std::set<std::string> members;
      for (const auto& c : splits->classes(s))
        if (!members.insert(c).second) add("split", "class '" + c + "' listed twice in " + std::string(to_string(s)));
    }
  }

  std::optional<FeatureSet> features;
  if (!config.features) {
    add("config", "config is missing 'features'");
  } else {
    attempt("file", [&] { features = load_features(config.resolve(*config.features), config.l2_normalize_features); });
  }

  if (!config.labels) {
    add("config", "config is missing 'labels'");
  } else {
    std::vector<std::pair<std::string, std::string>> labels;
    if (attempt("file", [&] { labels = load_pairs(config.resolve(*config.labels)); })) {
      std::map<std::string, std::string> by_id(labels.begin(), labels.end());
      if (features) {
        for (const auto& id : features->ids)
          if (!by_id.count(id)) add("coverage", "instance '" + id + "' has no label");
      }
      if (splits) {
        const auto classes = all_classes(*splits);
        const std::set<std::string> known(classes.begin(), classes.end());
        std::set<std::string> reported;
        for (const auto& [id, label] : labels)
          if (!known.count(label) && reported.insert(label).second)
            add("split", "label '" + label + "' belongs to no split");
      }
    }
  }

  std::optional<std::size_t> class_dim;
  std::optional<BlockLayout> layout;
  if (splits) {
    const auto classes = all_classes(*splits);
    if (config.class_embeddings) {
      std::vector<ClassEmbedding> embeddings;
      if (attempt("file", [&] { embeddings = load_class_embeddings(config.resolve(*config.class_embeddings)); })) {
        std::map<std::string, const ClassEmbedding*> by_name;
        for (const auto& e : embeddings) by_name.emplace(e.class_name, &e);
        for (const auto& c : classes)
          if (!by_name.count(c)) add("coverage", "no class embedding for '" + c + "'");
        if (!embeddings.empty()) {
          class_dim = static_cast<std::size_t>(embeddings.front().vector.size());
          layout = embeddings.front().layout;
        }
      }
    } else {
      EmbeddingSources sources;
      if (attempt("file", [&] { sources = load_embedding_sources(config); })) {
        for (const auto& c : classes) {
          attempt("coverage", [&] {
            const auto e = build_class_embedding(sources, c, config.embedding_sources, config.embedding);
            if (!class_dim) {
              class_dim = static_cast<std::size_t>(e.vector.size());
              layout = e.layout;
            } else if (*class_dim != static_cast<std::size_t>(e.vector.size())) {
              add("dimension", "class '" + c + "' embedding length differs from the first class");
            }
          });
        }
      }
    }
  }

  if (checkpoint) {
    Checkpoint cp;
    if (attempt("file", [&] { cp = load_checkpoint(*checkpoint); })) {
      if (features && static_cast<std::size_t>(features->values.cols()) != cp.model.image_dim())
        add("dimension", "features have d=" + std::to_string(features->values.cols()) + " but the checkpoint has d=" +
                             std::to_string(cp.model.image_dim()));
      if (class_dim && *class_dim != cp.model.class_dim())
        add("dimension", "class embeddings have m=" + std::to_string(*class_dim) + " but the checkpoint has m=" +
                             std::to_string(cp.model.class_dim()));
      if (layout && !cp.layout.empty() && *layout != cp.layout)
        add("dimension", "class embedding layout " + format_layout(*layout) + " differs from the checkpoint's " +
                             format_layout(cp.layout));
    }
  }
  return report;
}

}  // namespace zsl
