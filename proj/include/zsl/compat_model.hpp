#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "zsl/class_embedding.hpp"
#include "zsl/types.hpp"

namespace zsl {

/// Feature vector phi(x) of one image.
struct ImageEmbedding {
  Vector values;
  bool normalized = false;

  /// Divides by the Euclidean norm. Throws DegenerateFeature for a zero vector.
  static ImageEmbedding normalize(const Vector& raw);
};

/// Returns v with a trailing constant 1.
Vector extend_embedding(const Vector& v);

/// Ordered set of classes with their stacked embeddings (one row per class).
/// The row order is the canonical class order used for tie-breaking.
class ClassSet {
 public:
  ClassSet() = default;
  ClassSet(std::vector<std::string> names, Matrix embeddings, BlockLayout layout = {});

  /// Throws Shape if the embeddings disagree on length or layout.
  static ClassSet from_embeddings(std::span<const ClassEmbedding> embeddings);

  /// Classes named in `names`, in that order. Throws IncompleteCoverage.
  ClassSet subset(std::span<const std::string> names) const;

  std::size_t size() const noexcept { return names_.size(); }
  bool empty() const noexcept { return names_.empty(); }
  std::size_t dim() const noexcept { return static_cast<std::size_t>(embeddings_.cols()); }

  const std::vector<std::string>& names() const noexcept { return names_; }
  const std::string& name(std::size_t i) const { return names_[i]; }
  const Matrix& embeddings() const noexcept { return embeddings_; }
  /// Embeddings with an appended column of ones.
  const Matrix& extended() const noexcept { return extended_; }
  const BlockLayout& layout() const noexcept { return layout_; }

  std::optional<std::size_t> index_of(std::string_view name) const;
  /// Throws UnseenLabel when the class is not a member.
  std::size_t require_index(std::string_view name) const;

 private:
  std::vector<std::string> names_;
  Matrix embeddings_;
  Matrix extended_;
  BlockLayout layout_;
  std::unordered_map<std::string, std::size_t> index_;
};

/// Which embedding-specific linear terms the model may use. The bias is
/// always kept; it does not change the posterior.
struct LinearTermMask {
  bool use_wx = true;
  bool use_wy = true;

  bool operator==(const LinearTermMask&) const = default;
};

/// Zeroes the disabled blocks of an extended-shape matrix in place.
void apply_mask(Matrix& extended, const LinearTermMask& mask);

/// Extended compatibility matrix W_e of shape (d+1) x (m+1):
///
///     [ W    w_x ]
///     [ w_y  b   ]
///
/// so that phi_e^T W_e psi_e = phi^T W psi + w_x^T phi + w_y^T psi + b.
class CompatModel {
 public:
  CompatModel() = default;
  CompatModel(std::size_t image_dim, std::size_t class_dim);
  explicit CompatModel(Matrix extended);

  static CompatModel from_parts(const Matrix& bilinear, const Vector& image_linear,
                                const Vector& class_linear, double bias);

  std::size_t image_dim() const noexcept { return static_cast<std::size_t>(extended_.rows()) - 1; }
  std::size_t class_dim() const noexcept { return static_cast<std::size_t>(extended_.cols()) - 1; }

  const Matrix& extended() const noexcept { return extended_; }
  Matrix& extended() noexcept { return extended_; }

  Matrix bilinear() const;
  Vector image_linear() const;
  Vector class_linear() const;
  double bias() const;

  bool operator==(const CompatModel& other) const { return extended_ == other.extended_; }

 private:
  Matrix extended_;
};

/// Expanded form phi^T W psi + w_x^T phi + w_y^T psi + b.
double score(const CompatModel& model, const Vector& phi, const Vector& psi);

/// Augmented form extend(phi)^T W_e extend(psi).
double score_extended(const CompatModel& model, const Vector& phi, const Vector& psi);

/// Scores of phi against every class, in class order.
Vector score_all(const CompatModel& model, const Vector& phi, const ClassSet& classes);

/// Max-shifted softmax.
Vector posterior(const Vector& scores);

/// Index of the largest score; the lowest index wins ties.
std::size_t argmax_first(const Vector& scores);

/// A batch is a matrix with one feature vector per row plus class indices
/// into the training ClassSet.
struct BatchView {
  const Matrix& features;
  std::span<const std::size_t> labels;
};

/// Maps class names to indices into `classes`. Throws UnseenLabel.
std::vector<std::size_t> label_indices(std::span<const std::string> labels, const ClassSet& classes);

/// Sum over the batch of -log p(y_i | x_i), posterior over `train_classes`.
double nll(const CompatModel& model, const BatchView& batch, const ClassSet& train_classes);

/// Gradient of nll with respect to W_e, shape (d+1) x (m+1).
Matrix gradient(const CompatModel& model, const BatchView& batch, const ClassSet& train_classes);

/// Index into `candidates` of the highest-scoring class.
std::size_t predict(const CompatModel& model, const Vector& phi, const ClassSet& candidates);

}  // namespace zsl
