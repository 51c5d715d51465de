#pragma once

#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "zsl/class_embedding.hpp"
#include "zsl/compat_model.hpp"
#include "zsl/optim.hpp"
#include "zsl/split_dataset.hpp"

namespace zsl {

// Feature file:
//   d=<int> n=<int> normalized=<0|1>
//   <id> v1 ... vd
struct FeatureSet {
  std::vector<std::string> ids;
  Matrix values;  // one row per instance
  bool normalized = false;

  ImageEmbedding embedding(std::size_t i) const { return {values.row(i).transpose(), normalized}; }
};

FeatureSet read_features(std::istream& in, bool l2_normalize, const std::string& source = "<stream>");
FeatureSet load_features(const std::filesystem::path& path, bool l2_normalize);
void write_features(std::ostream& out, const FeatureSet& features);
void save_features(const std::filesystem::path& path, const FeatureSet& features);

// Two tab-separated columns per line: `key<TAB>value`. Used for labels
// (id -> class), taxonomy leaves (class -> leaf) and common names.
std::vector<std::pair<std::string, std::string>> read_pairs(std::istream& in,
                                                            const std::string& source = "<stream>");
std::vector<std::pair<std::string, std::string>> load_pairs(const std::filesystem::path& path);
void write_pairs(std::ostream& out, const std::vector<std::pair<std::string, std::string>>& pairs);

/// Like load_pairs but rejects duplicate keys.
std::map<std::string, std::string> load_mapping(const std::filesystem::path& path);

// Split file: `[seen]`, `[zsl_validation]`, `[zsl_test]` sections, one class per line.
ClassSplits read_splits(std::istream& in, const std::string& source = "<stream>");
ClassSplits load_splits(const std::filesystem::path& path);
void write_splits(std::ostream& out, const ClassSplits& splits);

/// Joins features with their labels. Throws IncompleteCoverage when a
/// feature id has no label.
SplitDataset make_dataset(const FeatureSet& features,
                          const std::vector<std::pair<std::string, std::string>>& labels,
                          const ClassSplits& splits);

// Attribute schema: `name<TAB>v1|v2|...` per attribute.
// Assignments: `class<TAB>attr=v1|v2<TAB>attr=v...` per class.
AttributeSchema read_attribute_schema(std::istream& in, const std::string& source = "<stream>");
std::map<std::string, AttributeAssignment> read_attribute_assignments(
    std::istream& in, const std::string& source = "<stream>");
AttributeSchema load_attribute_schema(const std::filesystem::path& path);
std::map<std::string, AttributeAssignment> load_attribute_assignments(const std::filesystem::path& path);

// Taxonomy: `child<TAB>parent` per edge.
TaxonomyTree load_taxonomy(const std::filesystem::path& path);

// Word vectors: `token v1 ... vD` per line; an optional leading
// `<count> <dim>` line is accepted.
WordVectorTable read_word_vectors(std::istream& in, const std::string& source = "<stream>");
WordVectorTable load_word_vectors(const std::filesystem::path& path);

// Class embedding matrix:
//   zsl-class-embeddings m=<int> n=<int> layout=<source:offset:length,...>
//   <class><TAB>v1 ... vm
std::vector<ClassEmbedding> read_class_embeddings(std::istream& in, const std::string& source = "<stream>");
std::vector<ClassEmbedding> load_class_embeddings(const std::filesystem::path& path);
void write_class_embeddings(std::ostream& out, const std::vector<ClassEmbedding>& embeddings);
void save_class_embeddings(const std::filesystem::path& path, const std::vector<ClassEmbedding>& embeddings);

/// Binary model checkpoint: W_e row-major with its dimensions, the class
/// ordering and block layout used at training time, and optionally the
/// Adam state.
struct Checkpoint {
  CompatModel model;
  std::vector<std::string> classes;
  BlockLayout layout;
  std::optional<AdamState> optimizer;
};

void write_checkpoint(std::ostream& out, const Checkpoint& checkpoint);
Checkpoint read_checkpoint(std::istream& in, const std::string& source = "<stream>");
void save_checkpoint(const std::filesystem::path& path, const Checkpoint& checkpoint);
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace zsl
