#include "zsl/compat_model.hpp"

#include <cmath>

#include "zsl/error.hpp"
#include "zsl/kernels.hpp"

namespace zsl {

ImageEmbedding ImageEmbedding::normalize(const Vector& raw) {
  const double norm = raw.norm();
  if (!(norm > 0.0) || !std::isfinite(norm))
    throw Error(ErrorKind::DegenerateFeature, "cannot l2-normalize a zero or non-finite vector");
  return {raw / norm, true};
}

Vector extend_embedding(const Vector& v) {
  Vector out(v.size() + 1);
  out.head(v.size()) = v;
  out[v.size()] = 1.0;
  return out;
}

// ---------------------------------------------------------------------------

ClassSet::ClassSet(std::vector<std::string> names, Matrix embeddings, BlockLayout layout)
    : names_(std::move(names)), embeddings_(std::move(embeddings)), layout_(std::move(layout)) {
  if (static_cast<Eigen::Index>(names_.size()) != embeddings_.rows())
    throw Error(ErrorKind::Alignment, "class names and embedding rows differ in count");
  for (std::size_t i = 0; i < names_.size(); ++i) {
    if (!index_.emplace(names_[i], i).second)
      throw Error(ErrorKind::Shape, "class '" + names_[i] + "' listed twice");
  }
  extended_.resize(embeddings_.rows(), embeddings_.cols() + 1);
  extended_.leftCols(embeddings_.cols()) = embeddings_;
  extended_.col(embeddings_.cols()).setOnes();
}

ClassSet ClassSet::from_embeddings(std::span<const ClassEmbedding> embeddings) {
  if (embeddings.empty()) return ClassSet({}, Matrix(0, 0));
  const Eigen::Index m = embeddings.front().vector.size();
  Matrix stacked(static_cast<Eigen::Index>(embeddings.size()), m);
  std::vector<std::string> names;
  names.reserve(embeddings.size());
  for (std::size_t i = 0; i < embeddings.size(); ++i) {
    const ClassEmbedding& e = embeddings[i];
    if (e.vector.size() != m)
      throw Error(ErrorKind::Shape, "class '" + e.class_name + "' embedding has length " +
                                        std::to_string(e.vector.size()) + ", expected " + std::to_string(m));
    if (e.layout != embeddings.front().layout)
      throw Error(ErrorKind::Shape, "class '" + e.class_name + "' has a different block layout");
    stacked.row(static_cast<Eigen::Index>(i)) = e.vector.transpose();
    names.push_back(e.class_name);
  }
  return ClassSet(std::move(names), std::move(stacked), embeddings.front().layout);
}

ClassSet ClassSet::subset(std::span<const std::string> names) const {
  Matrix rows(static_cast<Eigen::Index>(names.size()), embeddings_.cols());
  for (std::size_t i = 0; i < names.size(); ++i) {
    auto idx = index_of(names[i]);
    if (!idx) throw Error(ErrorKind::IncompleteCoverage, "no class embedding for '" + names[i] + "'");
    rows.row(static_cast<Eigen::Index>(i)) = embeddings_.row(static_cast<Eigen::Index>(*idx));
  }
  return ClassSet(std::vector<std::string>(names.begin(), names.end()), std::move(rows), layout_);
}

std::optional<std::size_t> ClassSet::index_of(std::string_view name) const {
  auto it = index_.find(std::string(name));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

std::size_t ClassSet::require_index(std::string_view name) const {
  auto idx = index_of(name);
  if (!idx) throw Error(ErrorKind::UnseenLabel, "label '" + std::string(name) + "' is not a training class");
  return *idx;
}

// ---------------------------------------------------------------------------

void apply_mask(Matrix& extended, const LinearTermMask& mask) {
  const Eigen::Index d = extended.rows() - 1;
  const Eigen::Index m = extended.cols() - 1;
  // The corner b belongs to both blocks. It shifts every score equally, so
  // its gradient is zero and clearing it never changes predictions.
  if (!mask.use_wx) extended.col(m).setZero();
  if (!mask.use_wy) extended.row(d).setZero();
}

CompatModel::CompatModel(std::size_t image_dim, std::size_t class_dim)
    : extended_(Matrix::Zero(static_cast<Eigen::Index>(image_dim) + 1, static_cast<Eigen::Index>(class_dim) + 1)) {}

CompatModel::CompatModel(Matrix extended) : extended_(std::move(extended)) {
  if (extended_.rows() < 1 || extended_.cols() < 1)
    throw Error(ErrorKind::Shape, "extended compatibility matrix must be at least 1x1");
  if (!extended_.allFinite()) throw Error(ErrorKind::Shape, "compatibility matrix has non-finite entries");
}

CompatModel CompatModel::from_parts(const Matrix& bilinear, const Vector& image_linear, const Vector& class_linear,
                                    double bias) {
  const Eigen::Index d = bilinear.rows();
  const Eigen::Index m = bilinear.cols();
  if (image_linear.size() != d || class_linear.size() != m)
    throw Error(ErrorKind::Shape, "linear terms do not match the bilinear block");
  Matrix e(d + 1, m + 1);
  e.topLeftCorner(d, m) = bilinear;
  e.col(m).head(d) = image_linear;
  e.row(d).head(m) = class_linear.transpose();
  e(d, m) = bias;
  return CompatModel(std::move(e));
}

Matrix CompatModel::bilinear() const { return extended_.topLeftCorner(extended_.rows() - 1, extended_.cols() - 1); }
Vector CompatModel::image_linear() const { return extended_.col(extended_.cols() - 1).head(extended_.rows() - 1); }
Vector CompatModel::class_linear() const {
  return extended_.row(extended_.rows() - 1).head(extended_.cols() - 1).transpose();
}
double CompatModel::bias() const { return extended_(extended_.rows() - 1, extended_.cols() - 1); }

namespace {

void check_dims(const CompatModel& model, Eigen::Index phi, Eigen::Index psi) {
  if (phi != static_cast<Eigen::Index>(model.image_dim()) || psi != static_cast<Eigen::Index>(model.class_dim()))
    throw Error(ErrorKind::Shape, "embedding sizes (" + std::to_string(phi) + ", " + std::to_string(psi) +
                                      ") do not match model (" + std::to_string(model.image_dim()) + ", " +
                                      std::to_string(model.class_dim()) + ")");
}

void check_batch(const CompatModel& model, const BatchView& batch, const ClassSet& classes) {
  if (classes.empty()) throw Error(ErrorKind::EmptyClassSet, "no training classes");
  check_dims(model, batch.features.cols(), static_cast<Eigen::Index>(classes.dim()));
  if (static_cast<std::size_t>(batch.features.rows()) != batch.labels.size())
    throw Error(ErrorKind::Alignment, "batch has " + std::to_string(batch.features.rows()) + " rows but " +
                                          std::to_string(batch.labels.size()) + " labels");
  for (std::size_t label : batch.labels) {
    if (label >= classes.size())
      throw Error(ErrorKind::UnseenLabel, "label index " + std::to_string(label) + " is outside the training classes");
  }
}

}  // namespace

double score(const CompatModel& model, const Vector& phi, const Vector& psi) {
  check_dims(model, phi.size(), psi.size());
  const Matrix& e = model.extended();
  const Eigen::Index d = phi.size();
  const Eigen::Index m = psi.size();
  const double bilinear = phi.dot(e.topLeftCorner(d, m) * psi);
  const double image_term = e.col(m).head(d).dot(phi);
  const double class_term = e.row(d).head(m).dot(psi.transpose());
  return bilinear + image_term + class_term + e(d, m);
}

double score_extended(const CompatModel& model, const Vector& phi, const Vector& psi) {
  check_dims(model, phi.size(), psi.size());
  return extend_embedding(phi).dot(model.extended() * extend_embedding(psi));
}

Vector score_all(const CompatModel& model, const Vector& phi, const ClassSet& classes) {
  if (classes.empty()) throw Error(ErrorKind::EmptyClassSet, "no classes to score");
  check_dims(model, phi.size(), static_cast<Eigen::Index>(classes.dim()));
  Vector out(static_cast<Eigen::Index>(classes.size()));
  for (std::size_t i = 0; i < classes.size(); ++i)
    out[static_cast<Eigen::Index>(i)] = score(model, phi, classes.embeddings().row(static_cast<Eigen::Index>(i)).transpose());
  return out;
}

Vector posterior(const Vector& scores) {
  if (scores.size() == 0) return scores;
  const Vector shifted = (scores.array() - scores.maxCoeff()).exp().matrix();
  return shifted / shifted.sum();
}

std::size_t argmax_first(const Vector& scores) {
  if (scores.size() == 0) throw Error(ErrorKind::EmptyClassSet, "argmax of an empty score vector");
  Eigen::Index best = 0;
  for (Eigen::Index i = 1; i < scores.size(); ++i) {
    if (scores[i] > scores[best]) best = i;
  }
  return static_cast<std::size_t>(best);
}

std::vector<std::size_t> label_indices(std::span<const std::string> labels, const ClassSet& classes) {
  std::vector<std::size_t> out;
  out.reserve(labels.size());
  for (const std::string& l : labels) out.push_back(classes.require_index(l));
  return out;
}

double nll(const CompatModel& model, const BatchView& batch, const ClassSet& train_classes) {
  check_batch(model, batch, train_classes);
  return kernels::batch_nll(model, batch, train_classes);
}

Matrix gradient(const CompatModel& model, const BatchView& batch, const ClassSet& train_classes) {
  check_batch(model, batch, train_classes);
  return kernels::batch_gradient(model, batch, train_classes);
}

std::size_t predict(const CompatModel& model, const Vector& phi, const ClassSet& candidates) {
  if (candidates.empty()) throw Error(ErrorKind::EmptyClassSet, "no candidate classes");
  return argmax_first(score_all(model, phi, candidates));
}

}  // namespace zsl
