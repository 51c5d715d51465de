#include "zsl/kernels.hpp"

#include <cmath>

namespace zsl::kernels {
namespace {

// Scores of one feature row against all classes:
// (phi^T W_top + w_y_row) Psi_e^T, with W_top the first d rows of W_e.
template <typename Row>
RowVector row_scores(const Matrix& extended, const Row& phi, const Matrix& classes_ext) {
  const Eigen::Index d = extended.rows() - 1;
  RowVector projected = phi * extended.topRows(d);
  projected += extended.row(d);
  return projected * classes_ext.transpose();
}

double log_sum_exp(const RowVector& s) {
  const double top = s.maxCoeff();
  return top + std::log((s.array() - top).exp().sum());
}

}  // namespace

Matrix score_matrix(const CompatModel& model, const Matrix& features, const ClassSet& classes) {
  const Eigen::Index rows = features.rows();
  Matrix out(rows, static_cast<Eigen::Index>(classes.size()));
  const Matrix& e = model.extended();
#pragma omp parallel for schedule(static) if (rows > 16)
  for (Eigen::Index i = 0; i < rows; ++i) {
    out.row(i) = row_scores(e, features.row(i), classes.extended());
  }
  return out;
}

Vector sample_nll(const CompatModel& model, const BatchView& batch, const ClassSet& classes) {
  const Eigen::Index rows = batch.features.rows();
  Vector out(rows);
  const Matrix& e = model.extended();
#pragma omp parallel for schedule(static) if (rows > 16)
  for (Eigen::Index i = 0; i < rows; ++i) {
    const RowVector s = row_scores(e, batch.features.row(i), classes.extended());
    out[i] = log_sum_exp(s) - s[static_cast<Eigen::Index>(batch.labels[static_cast<std::size_t>(i)])];
  }
  return out;
}

double batch_nll(const CompatModel& model, const BatchView& batch, const ClassSet& classes) {
  const Vector per_sample = sample_nll(model, batch, classes);
  double total = 0.0;
  for (Eigen::Index i = 0; i < per_sample.size(); ++i) total += per_sample[i];
  return total;
}

Matrix batch_gradient(const CompatModel& model, const BatchView& batch, const ClassSet& classes) {
  const Matrix& e = model.extended();
  const Matrix& psi_e = classes.extended();
  const Eigen::Index rows = batch.features.rows();
  const Eigen::Index d = e.rows() - 1;

  // residual.row(i) = psi_e(y_i)^T - sum_y p(y|x_i) psi_e(y)^T
  Matrix residual(rows, psi_e.cols());
#pragma omp parallel for schedule(static) if (rows > 16)
  for (Eigen::Index i = 0; i < rows; ++i) {
    const RowVector s = row_scores(e, batch.features.row(i), psi_e);
    RowVector p = (s.array() - s.maxCoeff()).exp().matrix();
    p /= p.sum();
    residual.row(i) = psi_e.row(static_cast<Eigen::Index>(batch.labels[static_cast<std::size_t>(i)])) - p * psi_e;
  }

  // G = -sum_i phi_e(x_i) residual_i^T, one output row per thread-task so
  // every entry sums over samples in the same order.
  Matrix grad(e.rows(), e.cols());
#pragma omp parallel for schedule(static) if (d > 16)
  for (Eigen::Index u = 0; u < d; ++u) {
    grad.row(u).noalias() = -(batch.features.col(u).transpose() * residual);
  }
  grad.row(d) = -residual.colwise().sum();
  return grad;
}

std::vector<std::size_t> predict_rows(const CompatModel& model, const Matrix& features, const ClassSet& classes) {
  const Eigen::Index rows = features.rows();
  std::vector<std::size_t> out(static_cast<std::size_t>(rows));
  const Matrix& e = model.extended();
#pragma omp parallel for schedule(static) if (rows > 16)
  for (Eigen::Index i = 0; i < rows; ++i) {
    const RowVector s = row_scores(e, features.row(i), classes.extended());
    Eigen::Index best = 0;
    for (Eigen::Index k = 1; k < s.size(); ++k) {
      if (s[k] > s[best]) best = k;
    }
    out[static_cast<std::size_t>(i)] = static_cast<std::size_t>(best);
  }
  return out;
}

}  // namespace zsl::kernels
