#include "zsl/reference.hpp"

#include <cmath>

namespace zsl::reference {

double score(const Matrix& extended, const double* phi, std::size_t d, const double* psi, std::size_t m) {
  const auto D = static_cast<Eigen::Index>(d);
  const auto M = static_cast<Eigen::Index>(m);
  double total = 0.0;
  for (Eigen::Index u = 0; u < D; ++u)
    for (Eigen::Index v = 0; v < M; ++v) total += extended(u, v) * phi[u] * psi[v];
  for (Eigen::Index u = 0; u < D; ++u) total += extended(u, M) * phi[u];
  for (Eigen::Index v = 0; v < M; ++v) total += extended(D, v) * psi[v];
  return total + extended(D, M);
}

namespace {

std::vector<double> class_scores(const CompatModel& model, const Matrix& features, Eigen::Index row,
                                 const ClassSet& classes) {
  const std::size_t d = model.image_dim();
  const std::size_t m = model.class_dim();
  std::vector<double> phi(d);
  std::vector<double> psi(m);
  for (std::size_t u = 0; u < d; ++u) phi[u] = features(row, static_cast<Eigen::Index>(u));
  std::vector<double> out(classes.size());
  for (std::size_t k = 0; k < classes.size(); ++k) {
    for (std::size_t v = 0; v < m; ++v)
      psi[v] = classes.embeddings()(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(v));
    out[k] = score(model.extended(), phi.data(), d, psi.data(), m);
  }
  return out;
}

std::vector<double> softmax(const std::vector<double>& s) {
  double top = s[0];
  for (double x : s) top = x > top ? x : top;
  std::vector<double> p(s.size());
  double z = 0.0;
  for (std::size_t k = 0; k < s.size(); ++k) {
    p[k] = std::exp(s[k] - top);
    z += p[k];
  }
  for (double& x : p) x /= z;
  return p;
}

}  // namespace

Matrix score_matrix(const CompatModel& model, const Matrix& features, const ClassSet& classes) {
  Matrix out(features.rows(), static_cast<Eigen::Index>(classes.size()));
  for (Eigen::Index i = 0; i < features.rows(); ++i) {
    const auto s = class_scores(model, features, i, classes);
    for (std::size_t k = 0; k < s.size(); ++k) out(i, static_cast<Eigen::Index>(k)) = s[k];
  }
  return out;
}

double batch_nll(const CompatModel& model, const BatchView& batch, const ClassSet& classes) {
  double total = 0.0;
  for (Eigen::Index i = 0; i < batch.features.rows(); ++i) {
    const auto p = softmax(class_scores(model, batch.features, i, classes));
    total -= std::log(p[batch.labels[static_cast<std::size_t>(i)]]);
  }
  return total;
}

Matrix batch_gradient(const CompatModel& model, const BatchView& batch, const ClassSet& classes) {
  const auto D = static_cast<Eigen::Index>(model.image_dim());
  const auto M = static_cast<Eigen::Index>(model.class_dim());
  Matrix grad = Matrix::Zero(D + 1, M + 1);
  std::vector<double> phi_e(static_cast<std::size_t>(D + 1));
  std::vector<double> psi_e(static_cast<std::size_t>(M + 1));

  auto fill_psi = [&](std::size_t k) {
    for (Eigen::Index v = 0; v < M; ++v) psi_e[static_cast<std::size_t>(v)] = classes.embeddings()(static_cast<Eigen::Index>(k), v);
    psi_e[static_cast<std::size_t>(M)] = 1.0;
  };

  for (Eigen::Index i = 0; i < batch.features.rows(); ++i) {
    for (Eigen::Index u = 0; u < D; ++u) phi_e[static_cast<std::size_t>(u)] = batch.features(i, u);
    phi_e[static_cast<std::size_t>(D)] = 1.0;
    const auto p = softmax(class_scores(model, batch.features, i, classes));

    // -(phi_e psi_e(y_i)^T - sum_y p(y|x_i) phi_e psi_e(y)^T)
    fill_psi(batch.labels[static_cast<std::size_t>(i)]);
    for (Eigen::Index u = 0; u <= D; ++u)
      for (Eigen::Index v = 0; v <= M; ++v)
        grad(u, v) -= phi_e[static_cast<std::size_t>(u)] * psi_e[static_cast<std::size_t>(v)];
    for (std::size_t k = 0; k < classes.size(); ++k) {
      fill_psi(k);
      for (Eigen::Index u = 0; u <= D; ++u)
        for (Eigen::Index v = 0; v <= M; ++v)
          grad(u, v) += p[k] * phi_e[static_cast<std::size_t>(u)] * psi_e[static_cast<std::size_t>(v)];
    }
  }
  return grad;
}

std::vector<std::size_t> predict_rows(const CompatModel& model, const Matrix& features, const ClassSet& classes) {
  std::vector<std::size_t> out(static_cast<std::size_t>(features.rows()));
  for (Eigen::Index i = 0; i < features.rows(); ++i) {
    const auto s = class_scores(model, features, i, classes);
    std::size_t best = 0;
    for (std::size_t k = 1; k < s.size(); ++k)
      if (s[k] > s[best]) best = k;
    out[static_cast<std::size_t>(i)] = best;
  }
  return out;
}

}  // namespace zsl::reference
