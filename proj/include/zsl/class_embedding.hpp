#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "zsl/types.hpp"

namespace zsl {

// Sources of auxiliary class information. The enumerator order is the fixed
// concatenation order of the blocks in a class embedding.
enum class EmbeddingSource { Attribute = 0, Taxonomy = 1, Word = 2 };

std::string_view to_string(EmbeddingSource source) noexcept;

/// Accepts "attribute", "taxonomy" (or "hierarchy") and "word" (or "word2vec").
EmbeddingSource parse_embedding_source(std::string_view text);

/// Sorted, de-duplicated copy of `sources`. Throws InvalidConfig when empty.
std::vector<EmbeddingSource> canonical_sources(std::span<const EmbeddingSource> sources);

/// The seven non-empty subsets of {attribute, taxonomy, word}: the three
/// singletons, the three pairs, then all three.
std::vector<std::vector<EmbeddingSource>> all_source_subsets();

/// "attribute+word" style label for a subset.
std::string subset_label(std::span<const EmbeddingSource> sources);

// ---------------------------------------------------------------------------
// Attributes

struct Attribute {
  std::string name;
  std::vector<std::string> values;
};

class AttributeSchema {
 public:
  AttributeSchema() = default;
  /// Throws SchemaMismatch if names repeat, the schema is empty, or an
  /// attribute has fewer than two values.
  explicit AttributeSchema(std::vector<Attribute> attributes);

  const std::vector<Attribute>& attributes() const noexcept { return attributes_; }

  /// Total number of (attribute, value) pairs.
  std::size_t encoded_length() const noexcept { return encoded_length_; }

 private:
  std::vector<Attribute> attributes_;
  std::size_t encoded_length_ = 0;
};

struct AttributeAssignment {
  std::string class_name;
  std::map<std::string, std::set<std::string>> chosen;
};

/// Multi-hot vector over the schema's (attribute, value) pairs in schema order.
Vector encode_attributes(const AttributeSchema& schema, const AttributeAssignment& assignment);

// ---------------------------------------------------------------------------
// Taxonomy

struct TaxonomyNode {
  std::string id;
  std::string label;
  std::optional<std::string> parent;
};

/// Rooted tree with a canonical node order: pre-order traversal with
/// children visited in lexicographic label order (ties on id).
class TaxonomyTree {
 public:
  /// Throws InvalidTree unless the nodes form a single connected rooted tree.
  explicit TaxonomyTree(std::vector<TaxonomyNode> nodes);

  /// Builds a tree from (child, parent) label pairs; labels double as ids.
  static TaxonomyTree from_edges(std::span<const std::pair<std::string, std::string>> child_parent);

  std::size_t size() const noexcept { return nodes_.size(); }
  const std::vector<TaxonomyNode>& nodes() const noexcept { return nodes_; }
  const TaxonomyNode& root() const { return nodes_[root_]; }

  bool contains(std::string_view id) const;
  bool is_leaf(std::string_view id) const;
  std::size_t depth(std::string_view id) const;

  /// Node indices (into nodes()) in canonical order.
  std::span<const std::size_t> canonical_order() const noexcept { return canonical_; }
  /// Position of a node within the canonical order.
  std::size_t canonical_position(std::string_view id) const;

  /// Index into nodes(); throws MissingNode.
  std::size_t index_of(std::string_view id) const;
  std::optional<std::size_t> parent_index(std::size_t node) const;
  std::span<const std::size_t> children(std::size_t node) const { return children_[node]; }

 private:
  std::vector<TaxonomyNode> nodes_;
  std::unordered_map<std::string, std::size_t> index_;
  std::vector<std::optional<std::size_t>> parent_;
  std::vector<std::vector<std::size_t>> children_;
  std::vector<std::size_t> canonical_;
  std::vector<std::size_t> position_;
  std::vector<std::size_t> depth_;
  std::size_t root_ = 0;
};

/// Binary vector over the canonical node order with ones on the root-to-leaf path.
Vector encode_taxonomy(const TaxonomyTree& tree, std::string_view leaf_id);

// ---------------------------------------------------------------------------
// Word vectors

enum class MissingTokenPolicy { Strict, SkipMissing };

MissingTokenPolicy parse_missing_token_policy(std::string_view text);

class WordVectorTable {
 public:
  explicit WordVectorTable(std::size_t dimension);

  /// Replaces an existing entry. Throws Shape on dimension mismatch.
  void add(std::string token, Vector vector);

  std::size_t dimension() const noexcept { return dimension_; }
  std::size_t size() const noexcept { return entries_.size(); }
  const Vector* find(std::string_view token) const;

  /// Tokens in lexicographic order.
  std::vector<std::string> tokens() const;

 private:
  std::size_t dimension_;
  std::unordered_map<std::string, Vector> entries_;
};

/// Lowercases and splits on whitespace and '/'.
std::vector<std::string> tokenize_common_name(std::string_view common_name);

/// Mean of the per-token vectors found in the table.
Vector encode_words(const WordVectorTable& table, std::string_view common_name,
                    MissingTokenPolicy policy = MissingTokenPolicy::Strict);

// ---------------------------------------------------------------------------
// Concatenated class embeddings

struct BlockLayoutEntry {
  EmbeddingSource source;
  std::size_t offset;
  std::size_t length;

  bool operator==(const BlockLayoutEntry&) const = default;
};

using BlockLayout = std::vector<BlockLayoutEntry>;

std::string format_layout(const BlockLayout& layout);
BlockLayout parse_layout(std::string_view text);

struct ClassEmbedding {
  std::string class_name;
  Vector vector;
  BlockLayout layout;
};

/// Everything the encoders need, keyed by class name.
struct EmbeddingSources {
  std::optional<AttributeSchema> attribute_schema;
  std::map<std::string, AttributeAssignment> attributes;
  std::optional<TaxonomyTree> taxonomy;
  std::map<std::string, std::string> taxonomy_leaves;
  std::optional<WordVectorTable> word_vectors;
  // Optional; a class without an entry uses its own name.
  std::map<std::string, std::string> common_names;
};

struct EmbeddingOptions {
  MissingTokenPolicy word_policy = MissingTokenPolicy::Strict;
  // Rescale each block to unit Euclidean norm (all-zero blocks unchanged).
  bool l2_normalize_blocks = false;
};

ClassEmbedding build_class_embedding(const EmbeddingSources& sources, std::string_view class_name,
                                     std::span<const EmbeddingSource> requested,
                                     const EmbeddingOptions& options = {});

/// Builds embeddings for every class; all results share one layout.
std::vector<ClassEmbedding> build_class_embeddings(const EmbeddingSources& sources,
                                                   std::span<const std::string> classes,
                                                   std::span<const EmbeddingSource> requested,
                                                   const EmbeddingOptions& options = {});

}  // namespace zsl
