#include "zsl/class_embedding.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <unordered_set>

#include "zsl/error.hpp"

namespace zsl {

std::string_view to_string(EmbeddingSource source) noexcept {
  switch (source) {
    case EmbeddingSource::Attribute: return "attribute";
    case EmbeddingSource::Taxonomy: return "taxonomy";
    case EmbeddingSource::Word: return "word";
  }
  return "unknown";
}

EmbeddingSource parse_embedding_source(std::string_view text) {
  if (text == "attribute" || text == "attributes") return EmbeddingSource::Attribute;
  if (text == "taxonomy" || text == "hierarchy") return EmbeddingSource::Taxonomy;
  if (text == "word" || text == "words" || text == "word2vec") return EmbeddingSource::Word;
  throw Error(ErrorKind::InvalidConfig, "unknown embedding source '" + std::string(text) + "'");
}

std::vector<EmbeddingSource> canonical_sources(std::span<const EmbeddingSource> sources) {
  std::vector<EmbeddingSource> out(sources.begin(), sources.end());
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  if (out.empty()) throw Error(ErrorKind::InvalidConfig, "at least one embedding source is required");
  return out;
}

std::vector<std::vector<EmbeddingSource>> all_source_subsets() {
  using S = EmbeddingSource;
  return {{S::Attribute},
          {S::Taxonomy},
          {S::Word},
          {S::Attribute, S::Taxonomy},
          {S::Attribute, S::Word},
          {S::Taxonomy, S::Word},
          {S::Attribute, S::Taxonomy, S::Word}};
}

std::string subset_label(std::span<const EmbeddingSource> sources) {
  std::string label;
  for (EmbeddingSource s : sources) {
    if (!label.empty()) label += '+';
    label += to_string(s);
  }
  return label;
}

// ---------------------------------------------------------------------------

AttributeSchema::AttributeSchema(std::vector<Attribute> attributes) : attributes_(std::move(attributes)) {
  if (attributes_.empty()) throw Error(ErrorKind::SchemaMismatch, "attribute schema is empty");
  std::unordered_set<std::string> names;
  for (const Attribute& a : attributes_) {
    if (!names.insert(a.name).second)
      throw Error(ErrorKind::SchemaMismatch, "duplicate attribute '" + a.name + "'");
    if (a.values.size() < 2)
      throw Error(ErrorKind::SchemaMismatch, "attribute '" + a.name + "' needs at least two values");
    std::unordered_set<std::string> values;
    for (const std::string& v : a.values) {
      if (!values.insert(v).second)
        throw Error(ErrorKind::SchemaMismatch, "duplicate value '" + v + "' for attribute '" + a.name + "'");
    }
    encoded_length_ += a.values.size();
  }
}

Vector encode_attributes(const AttributeSchema& schema, const AttributeAssignment& assignment) {
  for (const auto& [name, chosen] : assignment.chosen) {
    auto it = std::find_if(schema.attributes().begin(), schema.attributes().end(),
                           [&](const Attribute& a) { return a.name == name; });
    if (it == schema.attributes().end())
      throw Error(ErrorKind::SchemaMismatch,
                  "class '" + assignment.class_name + "': unknown attribute '" + name + "'");
    for (const std::string& v : chosen) {
      if (std::find(it->values.begin(), it->values.end(), v) == it->values.end())
        throw Error(ErrorKind::SchemaMismatch, "class '" + assignment.class_name + "': value '" + v +
                                                   "' is not legal for attribute '" + name + "'");
    }
  }

  Vector out = Vector::Zero(static_cast<Eigen::Index>(schema.encoded_length()));
  Eigen::Index pos = 0;
  for (const Attribute& a : schema.attributes()) {
    auto it = assignment.chosen.find(a.name);
    if (it == assignment.chosen.end() || it->second.empty())
      throw Error(ErrorKind::IncompleteAssignment,
                  "class '" + assignment.class_name + "' has no value for attribute '" + a.name + "'");
    for (const std::string& v : a.values) {
      if (it->second.count(v)) out[pos] = 1.0;
      ++pos;
    }
  }
  return out;
}

// ---------------------------------------------------------------------------

TaxonomyTree::TaxonomyTree(std::vector<TaxonomyNode> nodes) : nodes_(std::move(nodes)) {
  if (nodes_.empty()) throw Error(ErrorKind::InvalidTree, "taxonomy has no nodes");
  const std::size_t n = nodes_.size();
  for (std::size_t i = 0; i < n; ++i) {
    if (!index_.emplace(nodes_[i].id, i).second)
      throw Error(ErrorKind::InvalidTree, "duplicate node id '" + nodes_[i].id + "'");
  }

  parent_.assign(n, std::nullopt);
  children_.assign(n, {});
  std::vector<std::size_t> roots;
  for (std::size_t i = 0; i < n; ++i) {
    if (!nodes_[i].parent) {
      roots.push_back(i);
      continue;
    }
    auto it = index_.find(*nodes_[i].parent);
    if (it == index_.end())
      throw Error(ErrorKind::InvalidTree,
                  "node '" + nodes_[i].id + "' has unknown parent '" + *nodes_[i].parent + "'");
    parent_[i] = it->second;
    children_[it->second].push_back(i);
  }
  if (roots.size() != 1)
    throw Error(ErrorKind::InvalidTree, "taxonomy must have exactly one root, found " + std::to_string(roots.size()));
  root_ = roots.front();

  for (auto& c : children_) {
    std::sort(c.begin(), c.end(), [&](std::size_t a, std::size_t b) {
      if (nodes_[a].label != nodes_[b].label) return nodes_[a].label < nodes_[b].label;
      return nodes_[a].id < nodes_[b].id;
    });
  }

  // Pre-order walk from the root. With one root and one parent per node,
  // reaching every node also rules out cycles.
  depth_.assign(n, 0);
  position_.assign(n, n);
  canonical_.reserve(n);
  std::vector<std::size_t> stack{root_};
  while (!stack.empty()) {
    const std::size_t node = stack.back();
    stack.pop_back();
    position_[node] = canonical_.size();
    canonical_.push_back(node);
    const auto& c = children_[node];
    for (auto it = c.rbegin(); it != c.rend(); ++it) {
      depth_[*it] = depth_[node] + 1;
      stack.push_back(*it);
    }
  }
  if (canonical_.size() != n) {
    for (std::size_t i = 0; i < n; ++i) {
      if (position_[i] == n)
        throw Error(ErrorKind::InvalidTree, "node '" + nodes_[i].id + "' is not reachable from the root (cycle)");
    }
  }
}

TaxonomyTree TaxonomyTree::from_edges(std::span<const std::pair<std::string, std::string>> child_parent) {
  std::vector<TaxonomyNode> nodes;
  std::unordered_map<std::string, std::size_t> seen;
  auto touch = [&](const std::string& label) -> std::size_t {
    auto [it, inserted] = seen.emplace(label, nodes.size());
    if (inserted) nodes.push_back({label, label, std::nullopt});
    return it->second;
  };
  for (const auto& [child, parent] : child_parent) {
    if (child == parent) throw Error(ErrorKind::InvalidTree, "node '" + child + "' is its own parent");
    touch(parent);
    TaxonomyNode& c = nodes[touch(child)];
    if (c.parent && *c.parent != parent)
      throw Error(ErrorKind::InvalidTree, "node '" + child + "' has two parents");
    c.parent = parent;
  }
  return TaxonomyTree(std::move(nodes));
}

std::size_t TaxonomyTree::index_of(std::string_view id) const {
  auto it = index_.find(std::string(id));
  if (it == index_.end()) throw Error(ErrorKind::MissingNode, "taxonomy has no node '" + std::string(id) + "'");
  return it->second;
}

bool TaxonomyTree::contains(std::string_view id) const { return index_.count(std::string(id)) != 0; }

bool TaxonomyTree::is_leaf(std::string_view id) const { return children_[index_of(id)].empty(); }

std::size_t TaxonomyTree::depth(std::string_view id) const { return depth_[index_of(id)]; }

std::size_t TaxonomyTree::canonical_position(std::string_view id) const { return position_[index_of(id)]; }

std::optional<std::size_t> TaxonomyTree::parent_index(std::size_t node) const { return parent_[node]; }

Vector encode_taxonomy(const TaxonomyTree& tree, std::string_view leaf_id) {
  std::size_t node = tree.index_of(leaf_id);
  if (!tree.children(node).empty())
    throw Error(ErrorKind::NonLeaf, "taxonomy node '" + std::string(leaf_id) + "' is not a leaf");
  Vector out = Vector::Zero(static_cast<Eigen::Index>(tree.size()));
  while (true) {
    out[static_cast<Eigen::Index>(tree.canonical_position(tree.nodes()[node].id))] = 1.0;
    auto parent = tree.parent_index(node);
    if (!parent) break;
    node = *parent;
  }
  return out;
}

// ---------------------------------------------------------------------------

MissingTokenPolicy parse_missing_token_policy(std::string_view text) {
  if (text == "strict") return MissingTokenPolicy::Strict;
  if (text == "skip-missing" || text == "skip_missing") return MissingTokenPolicy::SkipMissing;
  throw Error(ErrorKind::InvalidConfig, "unknown missing-token policy '" + std::string(text) + "'");
}

WordVectorTable::WordVectorTable(std::size_t dimension) : dimension_(dimension) {
  if (dimension == 0) throw Error(ErrorKind::Shape, "word vector dimension must be positive");
}

void WordVectorTable::add(std::string token, Vector vector) {
  if (static_cast<std::size_t>(vector.size()) != dimension_)
    throw Error(ErrorKind::Shape, "word vector for '" + token + "' has dimension " + std::to_string(vector.size()) +
                                      ", expected " + std::to_string(dimension_));
  entries_.insert_or_assign(std::move(token), std::move(vector));
}

const Vector* WordVectorTable::find(std::string_view token) const {
  auto it = entries_.find(std::string(token));
  return it == entries_.end() ? nullptr : &it->second;
}

std::vector<std::string> WordVectorTable::tokens() const {
  std::vector<std::string> out;
  out.reserve(entries_.size());
  for (const auto& [token, _] : entries_) out.push_back(token);
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<std::string> tokenize_common_name(std::string_view common_name) {
  std::vector<std::string> tokens;
  std::string current;
  for (char ch : common_name) {
    const auto c = static_cast<unsigned char>(ch);
    if (std::isspace(c) || ch == '/') {
      if (!current.empty()) tokens.push_back(std::move(current));
      current.clear();
    } else {
      current.push_back(static_cast<char>(std::tolower(c)));
    }
  }
  if (!current.empty()) tokens.push_back(std::move(current));
  return tokens;
}

Vector encode_words(const WordVectorTable& table, std::string_view common_name, MissingTokenPolicy policy) {
  const auto tokens = tokenize_common_name(common_name);
  if (tokens.empty()) throw Error(ErrorKind::OutOfVocabulary, "common name '" + std::string(common_name) + "' has no tokens");

  Vector sum = Vector::Zero(static_cast<Eigen::Index>(table.dimension()));
  std::size_t found = 0;
  std::vector<std::string> missing;
  for (const std::string& t : tokens) {
    if (const Vector* v = table.find(t)) {
      sum += *v;
      ++found;
    } else {
      missing.push_back(t);
    }
  }
  if (found == 0 || (policy == MissingTokenPolicy::Strict && !missing.empty())) {
    std::string list;
    for (const auto& t : missing) list += (list.empty() ? "" : ", ") + t;
    throw Error(ErrorKind::OutOfVocabulary, "'" + std::string(common_name) + "': missing tokens: " + list);
  }
  return sum / static_cast<double>(found);
}

// ---------------------------------------------------------------------------

std::string format_layout(const BlockLayout& layout) {
  std::string out;
  for (const auto& b : layout) {
    if (!out.empty()) out += ',';
    out += std::string(to_string(b.source)) + ':' + std::to_string(b.offset) + ':' + std::to_string(b.length);
  }
  return out;
}

BlockLayout parse_layout(std::string_view text) {
  BlockLayout layout;
  if (text.empty()) return layout;
  auto parse_size = [&](std::string_view s) {
    std::size_t value = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
    if (ec != std::errc() || ptr != s.data() + s.size())
      throw Error(ErrorKind::Parse, "bad layout number '" + std::string(s) + "'");
    return value;
  };
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t end = text.find(',', start);
    if (end == std::string_view::npos) end = text.size();
    std::string_view item = text.substr(start, end - start);
    const auto c1 = item.find(':');
    const auto c2 = item.rfind(':');
    if (c1 == std::string_view::npos || c1 == c2)
      throw Error(ErrorKind::Parse, "bad layout entry '" + std::string(item) + "'");
    layout.push_back({parse_embedding_source(item.substr(0, c1)), parse_size(item.substr(c1 + 1, c2 - c1 - 1)),
                      parse_size(item.substr(c2 + 1))});
    start = end + 1;
  }
  std::size_t expected = 0;
  for (const auto& b : layout) {
    if (b.offset != expected) throw Error(ErrorKind::Parse, "layout blocks must be contiguous");
    expected += b.length;
  }
  return layout;
}

namespace {

Vector encode_block(const EmbeddingSources& sources, const std::string& class_name, EmbeddingSource source,
                    const EmbeddingOptions& options) {
  auto uncovered = [&](const std::string& what) {
    return Error(ErrorKind::IncompleteCoverage, "class '" + class_name + "' missing from " +
                                                    std::string(to_string(source)) + " source: " + what);
  };
  switch (source) {
    case EmbeddingSource::Attribute: {
      if (!sources.attribute_schema) throw uncovered("no attribute schema loaded");
      auto it = sources.attributes.find(class_name);
      if (it == sources.attributes.end()) throw uncovered("no attribute assignment");
      return encode_attributes(*sources.attribute_schema, it->second);
    }
    case EmbeddingSource::Taxonomy: {
      if (!sources.taxonomy) throw uncovered("no taxonomy loaded");
      auto it = sources.taxonomy_leaves.find(class_name);
      if (it == sources.taxonomy_leaves.end()) throw uncovered("no taxonomy leaf mapping");
      return encode_taxonomy(*sources.taxonomy, it->second);
    }
    case EmbeddingSource::Word: {
      if (!sources.word_vectors) throw uncovered("no word vectors loaded");
      auto it = sources.common_names.find(class_name);
      const std::string& name = it == sources.common_names.end() ? class_name : it->second;
      return encode_words(*sources.word_vectors, name, options.word_policy);
    }
  }
  throw uncovered("unknown source");
}

}  // namespace

ClassEmbedding build_class_embedding(const EmbeddingSources& sources, std::string_view class_name,
                                     std::span<const EmbeddingSource> requested, const EmbeddingOptions& options) {
  const auto order = canonical_sources(requested);
  const std::string name(class_name);
  std::vector<Vector> blocks;
  ClassEmbedding out{name, {}, {}};
  std::size_t offset = 0;
  for (EmbeddingSource s : order) {
    Vector block = encode_block(sources, name, s, options);
    if (options.l2_normalize_blocks) {
      const double norm = block.norm();
      if (norm > 0.0) block /= norm;
    }
    out.layout.push_back({s, offset, static_cast<std::size_t>(block.size())});
    offset += static_cast<std::size_t>(block.size());
    blocks.push_back(std::move(block));
  }
  out.vector.resize(static_cast<Eigen::Index>(offset));
  for (std::size_t i = 0; i < blocks.size(); ++i) {
    out.vector.segment(static_cast<Eigen::Index>(out.layout[i].offset), blocks[i].size()) = blocks[i];
  }
  return out;
}

std::vector<ClassEmbedding> build_class_embeddings(const EmbeddingSources& sources,
                                                   std::span<const std::string> classes,
                                                   std::span<const EmbeddingSource> requested,
                                                   const EmbeddingOptions& options) {
  std::vector<ClassEmbedding> out;
  out.reserve(classes.size());
  for (const std::string& c : classes) {
    out.push_back(build_class_embedding(sources, c, requested, options));
    if (out.front().layout != out.back().layout)
      throw Error(ErrorKind::Shape, "class '" + c + "' produced a different block layout");
  }
  return out;
}

}  // namespace zsl
