#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "zsl/class_embedding.hpp"
#include "zsl/split_dataset.hpp"
#include "zsl/train.hpp"

namespace zsl {

/// Flat `key=value` experiment description. Relative paths resolve against
/// `base_dir` (the config file's directory).
struct ExperimentConfig {
  std::filesystem::path base_dir;

  std::optional<std::filesystem::path> features;
  std::optional<std::filesystem::path> labels;
  std::optional<std::filesystem::path> splits;

  // Either a prebuilt embedding matrix or the raw sources.
  std::optional<std::filesystem::path> class_embeddings;
  std::optional<std::filesystem::path> attribute_schema;
  std::optional<std::filesystem::path> attribute_assignments;
  std::optional<std::filesystem::path> taxonomy;
  std::optional<std::filesystem::path> taxonomy_leaves;
  std::optional<std::filesystem::path> word_vectors;
  std::optional<std::filesystem::path> common_names;

  std::vector<EmbeddingSource> embedding_sources{EmbeddingSource::Attribute, EmbeddingSource::Taxonomy,
                                                 EmbeddingSource::Word};
  EmbeddingOptions embedding;
  bool l2_normalize_features = true;

  TrainConfig train;
  std::size_t repeats = 1;

  std::optional<std::filesystem::path> checkpoint;
  std::optional<std::filesystem::path> report;

  /// Applies one `key=value` setting. Throws InvalidConfig on unknown keys
  /// or bad values.
  void set(std::string_view key, std::string_view value);

  std::filesystem::path resolve(const std::filesystem::path& p) const;
};

ExperimentConfig read_config(std::istream& in, const std::filesystem::path& base_dir,
                             const std::string& source = "<stream>");
ExperimentConfig load_config(const std::filesystem::path& path);

/// Keys accepted by ExperimentConfig::set.
const std::vector<std::string>& config_keys();

// Loaders driven by a config. Each throws if the needed key is unset.
SplitDataset load_dataset(const ExperimentConfig& config);
EmbeddingSources load_embedding_sources(const ExperimentConfig& config);
/// Prebuilt matrix if configured, otherwise built from the sources for
/// every class in the splits.
std::vector<ClassEmbedding> load_or_build_class_embeddings(const ExperimentConfig& config,
                                                           const ClassSplits& splits);

struct Violation {
  std::string category;  // "split", "coverage", "dimension", "file", "config"
  std::string message;
};

struct ValidationReport {
  std::vector<Violation> violations;
  bool ok() const noexcept { return violations.empty(); }
};

/// Loads every artifact the config names and collects all problems instead
/// of stopping at the first one.
ValidationReport validate_experiment(const ExperimentConfig& config,
                                     const std::optional<std::filesystem::path>& checkpoint = std::nullopt);

}  // namespace zsl
