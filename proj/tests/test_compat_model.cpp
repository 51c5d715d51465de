#include <doctest.h>

#include <cmath>
#include <functional>
#include <random>

#include "test_support.hpp"
#include "zsl/compat_model.hpp"
#include "zsl/error.hpp"

using namespace zsl;
using zsl::testing::gaussian_matrix;
using zsl::testing::gaussian_vector;

namespace {

ErrorKind kind_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("expected zsl::Error");
  return ErrorKind::Io;
}

ClassSet classes_of(const Matrix& rows) {
  std::vector<std::string> names;
  for (Eigen::Index i = 0; i < rows.rows(); ++i) names.push_back("c" + std::to_string(i));
  return ClassSet(names, rows);
}

// Expanded form (bilinear + linear terms + bias) as scalar loops.
double expanded_oracle(const Matrix& W, const Vector& wx, const Vector& wy, double b, const Vector& phi, const Vector& psi) {
  double s = b;
  for (Eigen::Index i = 0; i < phi.size(); ++i) {
    s += wx[i] * phi[i];
    for (Eigen::Index j = 0; j < psi.size(); ++j) s += phi[i] * W(i, j) * psi[j];
  }
  for (Eigen::Index j = 0; j < psi.size(); ++j) s += wy[j] * psi[j];
  return s;
}

// Negative log-likelihood by naive log-sum-exp over scalar loops.
double nll_oracle(const Matrix& We, const Matrix& X, const std::vector<std::size_t>& y, const Matrix& Psi) {
  double total = 0.0;
  for (Eigen::Index i = 0; i < X.rows(); ++i) {
    std::vector<double> s(static_cast<std::size_t>(Psi.rows()));
    for (Eigen::Index k = 0; k < Psi.rows(); ++k) {
      double v = 0.0;
      for (Eigen::Index u = 0; u <= X.cols(); ++u)
        for (Eigen::Index w = 0; w <= Psi.cols(); ++w)
          v += (u < X.cols() ? X(i, u) : 1.0) * We(u, w) * (w < Psi.cols() ? Psi(k, w) : 1.0);
      s[static_cast<std::size_t>(k)] = v;
    }
    double mx = s[0];
    for (double v : s) mx = std::max(mx, v);
    double z = 0.0;
    for (double v : s) z += std::exp(v - mx);
    total += -(s[y[static_cast<std::size_t>(i)]] - mx - std::log(z));
  }
  return total;
}

}  // namespace

TEST_CASE("extend_embedding appends a one") {
  CHECK(extend_embedding(Vector::Zero(2)) == (Vector(3) << 0, 0, 1).finished());
  CHECK(extend_embedding((Vector(3) << 3, -1, 2).finished()) == (Vector(4) << 3, -1, 2, 1).finished());
  for (Eigen::Index d = 1; d <= 10; ++d) CHECK(extend_embedding(Vector::Ones(d)).size() == d + 1);
}

TEST_CASE("image embedding normalization") {
  const auto e = ImageEmbedding::normalize((Vector(2) << 3, 4).finished());
  CHECK(e.normalized);
  CHECK(e.values.norm() == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(kind_of([] { ImageEmbedding::normalize(Vector::Zero(3)); }) == ErrorKind::DegenerateFeature);
}

TEST_CASE("score examples") {
  const auto id = CompatModel::from_parts(Matrix::Identity(2, 2), Vector::Zero(2), Vector::Zero(2), 0.0);
  CHECK(score(id, (Vector(2) << 1, 0).finished(), (Vector(2) << 0, 1).finished()) == 0.0);
  const auto bias = CompatModel::from_parts(Matrix::Zero(2, 3), Vector::Zero(2), Vector::Zero(3), 5.0);
  std::mt19937_64 rng(1);
  for (int i = 0; i < 5; ++i) CHECK(score(bias, gaussian_vector(rng, 2), gaussian_vector(rng, 3)) == 5.0);
  CHECK(kind_of([&] { score(bias, Vector::Zero(3), Vector::Zero(3)); }) == ErrorKind::Shape);
  CHECK(kind_of([&] { score(bias, Vector::Zero(2), Vector::Zero(2)); }) == ErrorKind::Shape);
}

TEST_CASE("parts land in the documented blocks") {
  std::mt19937_64 rng(2);
  const Matrix W = gaussian_matrix(rng, 3, 4);
  const Vector wx = gaussian_vector(rng, 3), wy = gaussian_vector(rng, 4);
  const auto model = CompatModel::from_parts(W, wx, wy, 0.25);
  CHECK(model.extended().topLeftCorner(3, 4) == W);
  CHECK(model.extended().col(4).head(3) == wx);
  CHECK(model.extended().row(3).head(4).transpose() == wy);
  CHECK(model.extended()(3, 4) == 0.25);
  CHECK(model.bilinear() == W);
  CHECK(model.image_linear() == wx);
  CHECK(model.class_linear() == wy);
  CHECK(model.bias() == 0.25);
  Matrix bad = Matrix::Zero(2, 2);
  bad(0, 0) = std::nan("");
  CHECK(kind_of([&] { CompatModel{bad}; }) == ErrorKind::Shape);
}

TEST_CASE("expanded and augmented forms agree on 1000 random instances") {
  std::mt19937_64 rng(3);
  std::uniform_int_distribution<int> dim(1, 8);
  for (int trial = 0; trial < 1000; ++trial) {
    const int d = dim(rng), m = dim(rng);
    const Matrix W = gaussian_matrix(rng, d, m);
    const Vector wx = gaussian_vector(rng, d), wy = gaussian_vector(rng, m);
    const double b = gaussian_vector(rng, 1)[0];
    const auto model = CompatModel::from_parts(W, wx, wy, b);
    const Vector phi = gaussian_vector(rng, d), psi = gaussian_vector(rng, m);
    const double oracle = expanded_oracle(W, wx, wy, b, phi, psi);
    CHECK(std::abs(score(model, phi, psi) - oracle) < 1e-12);
    CHECK(std::abs(score_extended(model, phi, psi) - oracle) < 1e-12);
  }
}

TEST_CASE("zeroing the linear terms leaves the plain bilinear form") {
  std::mt19937_64 rng(4);
  CompatModel model(gaussian_matrix(rng, 4, 6));
  apply_mask(model.extended(), {false, false});
  const Vector phi = gaussian_vector(rng, 3), psi = gaussian_vector(rng, 5);
  CHECK(score(model, phi, psi) == doctest::Approx(phi.dot(model.bilinear() * psi)).epsilon(1e-14));
  CHECK(model.image_linear().isZero(0));
  CHECK(model.class_linear().isZero(0));
  CHECK(model.bias() == 0.0);
}

TEST_CASE("score_all") {
  std::mt19937_64 rng(5);
  CompatModel model(gaussian_matrix(rng, 4, 4));
  const Vector phi = gaussian_vector(rng, 3);
  const Matrix one = gaussian_matrix(rng, 1, 3);
  const Vector s1 = score_all(model, phi, classes_of(one));
  CHECK(s1.size() == 1);
  CHECK(std::abs(s1[0] - score(model, phi, one.row(0).transpose())) < 1e-12);

  Matrix dup(2, 3);
  dup.row(0) = one.row(0);
  dup.row(1) = one.row(0);
  const Vector s2 = score_all(model, phi, classes_of(dup));
  CHECK(s2[0] == s2[1]);

  const Matrix four = gaussian_matrix(rng, 4, 3);
  const Vector s4 = score_all(model, phi, classes_of(four));
  for (Eigen::Index k = 0; k < 4; ++k) CHECK(std::abs(s4[k] - score(model, phi, four.row(k).transpose())) < 1e-12);

  CHECK(kind_of([&] { score_all(model, phi, ClassSet{}); }) == ErrorKind::EmptyClassSet);
}

TEST_CASE("posterior examples and properties") {
  for (double c : {-7.0, 0.0, 3.5, 1e6}) {
    const Vector p = posterior(Vector::Constant(3, c));
    for (Eigen::Index i = 0; i < 3; ++i) CHECK(std::abs(p[i] - 1.0 / 3.0) < 1e-15);
  }
  const Vector big = posterior((Vector(2) << 1000, 0).finished());
  CHECK(big.allFinite());
  CHECK(big[0] == doctest::Approx(1.0));
  CHECK(big[1] < 1e-300);
  const Vector q = posterior((Vector(2) << std::log(1.0), std::log(3.0)).finished());
  CHECK(std::abs(q[0] - 0.25) < 1e-15);
  CHECK(std::abs(q[1] - 0.75) < 1e-15);

  std::mt19937_64 rng(6);
  for (int trial = 0; trial < 500; ++trial) {
    const Vector s = gaussian_vector(rng, 1 + static_cast<Eigen::Index>(rng() % 20), 10.0);
    const Vector p = posterior(s);
    CHECK((p.array() >= 0.0).all());
    CHECK(std::abs(p.sum() - 1.0) < 1e-12);
    const Vector shifted = posterior((s.array() + 123.0).matrix());
    CHECK((p - shifted).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("nll examples") {
  const ClassSet two = classes_of(Matrix::Identity(2, 2));
  const Matrix x = (Matrix(1, 2) << 0.6, 0.8).finished();
  const std::vector<std::size_t> y0{0};
  CHECK(std::abs(nll(CompatModel(2, 2), {x, y0}, two) - std::log(2.0)) < 1e-15);

  // Margin of 50 in favor of the true class.
  const auto margin = CompatModel::from_parts((Matrix(2, 2) << 50, 0, 0, 0).finished() / 0.6, Vector::Zero(2),
                                              Vector::Zero(2), 0.0);
  CHECK(nll(margin, {x, y0}, two) < 1e-20);

  std::mt19937_64 rng(7);
  CompatModel model(gaussian_matrix(rng, 4, 3));
  const ClassSet three = classes_of(gaussian_matrix(rng, 3, 2));
  const Matrix X = gaussian_matrix(rng, 3, 3);
  const std::vector<std::size_t> y{2, 0, 1};
  double sum = 0.0;
  for (Eigen::Index i = 0; i < 3; ++i) {
    const Matrix xi = X.row(i);
    const std::vector<std::size_t> yi{y[static_cast<std::size_t>(i)]};
    sum += nll(model, {xi, yi}, three);
  }
  CHECK(std::abs(nll(model, {X, y}, three) - sum) < 1e-12);
  CHECK(std::abs(nll(model, {X, y}, three) - nll_oracle(model.extended(), X, y, three.embeddings())) < 1e-12);

  const std::vector<std::size_t> unseen{5, 0, 1};
  CHECK(kind_of([&] { nll(model, {X, unseen}, three); }) == ErrorKind::UnseenLabel);
  const std::vector<std::string> names{"c0", "nope"};
  CHECK(kind_of([&] { label_indices(names, three); }) == ErrorKind::UnseenLabel);
}

TEST_CASE("nll at zero weights is B ln K") {
  std::mt19937_64 rng(8);
  for (std::size_t K : {2, 5, 18}) {
    const ClassSet cs = classes_of(gaussian_matrix(rng, static_cast<Eigen::Index>(K), 4));
    const Matrix X = gaussian_matrix(rng, 7, 3);
    std::vector<std::size_t> y(7);
    for (auto& v : y) v = rng() % K;
    CHECK(std::abs(nll(CompatModel(3, 4), {X, y}, cs) - 7.0 * std::log(static_cast<double>(K))) < 1e-9);
  }
}

TEST_CASE("gradient at uniform posterior") {
  const ClassSet two = classes_of(Matrix::Identity(2, 2));
  const Vector phi = (Vector(3) << 0.2, -0.4, 0.9).finished();
  const Matrix x = phi.transpose();
  const std::vector<std::size_t> y{0};
  const Matrix G = gradient(CompatModel(3, 2), {x, y}, two);
  const Vector diff = (Vector(2) << 1, -1).finished();
  CHECK((G.topLeftCorner(3, 2) - (-0.5 * phi * diff.transpose())).cwiseAbs().maxCoeff() < 1e-15);
  // Extended constant columns of psi cancel: psi_e(y) - E[psi_e] has a zero last entry.
  CHECK(G.col(2).cwiseAbs().maxCoeff() < 1e-15);
  CHECK(std::abs(G(3, 0) + 0.5) < 1e-15);
  CHECK(std::abs(G(3, 1) - 0.5) < 1e-15);
}

TEST_CASE("gradient matches central finite differences") {
  std::mt19937_64 rng(9);
  for (int trial = 0; trial < 10; ++trial) {
    CompatModel model(gaussian_matrix(rng, 6, 5, 0.5));
    const ClassSet cs = classes_of(gaussian_matrix(rng, 3, 4));
    const Matrix X = gaussian_matrix(rng, 6, 5);
    std::vector<std::size_t> y(6);
    for (auto& v : y) v = rng() % 3;
    const Matrix G = gradient(model, {X, y}, cs);
    const double h = 1e-5;
    double worst = 0.0;
    for (Eigen::Index r = 0; r < 6; ++r) {
      for (Eigen::Index c = 0; c < 5; ++c) {
        Matrix plus = model.extended(), minus = model.extended();
        plus(r, c) += h;
        minus(r, c) -= h;
        const double fd = (nll_oracle(plus, X, y, cs.embeddings()) - nll_oracle(minus, X, y, cs.embeddings())) / (2 * h);
        const double a = G(r, c);
        if (std::abs(a) < 1e-8 && std::abs(fd) < 1e-8) continue;
        worst = std::max(worst, std::abs(a - fd) / std::max(std::abs(a), std::abs(fd)));
      }
    }
    CHECK(worst < 1e-5);
  }
}

TEST_CASE("batch gradient is the sum of per-sample gradients") {
  std::mt19937_64 rng(10);
  CompatModel model(gaussian_matrix(rng, 5, 4));
  const ClassSet cs = classes_of(gaussian_matrix(rng, 4, 3));
  const Matrix X = gaussian_matrix(rng, 5, 4);
  const std::vector<std::size_t> y{0, 3, 1, 1, 2};
  Matrix sum = Matrix::Zero(5, 4);
  for (Eigen::Index i = 0; i < 5; ++i) {
    const Matrix xi = X.row(i);
    const std::vector<std::size_t> yi{y[static_cast<std::size_t>(i)]};
    sum += gradient(model, {xi, yi}, cs);
  }
  CHECK((gradient(model, {X, y}, cs) - sum).cwiseAbs().maxCoeff() < 1e-12);
  const Matrix wrong = Matrix::Zero(5, 3);
  CHECK(kind_of([&] { gradient(model, {wrong, y}, cs); }) == ErrorKind::Shape);
}

TEST_CASE("predict tie rule and invariances") {
  CHECK(argmax_first((Vector(3) << 2, 7, 7).finished()) == 1);
  std::mt19937_64 rng(11);
  CompatModel model(gaussian_matrix(rng, 4, 3));
  const ClassSet one = classes_of(gaussian_matrix(rng, 1, 2));
  CHECK(predict(model, gaussian_vector(rng, 3), one) == 0);
  CHECK(kind_of([&] { predict(model, gaussian_vector(rng, 3), ClassSet{}); }) == ErrorKind::EmptyClassSet);

  const ClassSet cs = classes_of(gaussian_matrix(rng, 6, 2));
  for (int trial = 0; trial < 200; ++trial) {
    const Vector phi = gaussian_vector(rng, 3);
    const std::size_t base = predict(model, phi, cs);
    CompatModel shifted = model;
    shifted.extended()(3, 2) += 17.0;
    CHECK(predict(shifted, phi, cs) == base);
    CompatModel scaled = model;
    scaled.extended() *= 3.0;
    CHECK(predict(scaled, phi, cs) == base);
    const Vector s = score_all(model, phi, cs);
    CHECK(argmax_first((2.0 * s.array() + 5.0).matrix()) == base);
  }
}

TEST_CASE("class set construction") {
  CHECK(kind_of([] { ClassSet({"a", "a"}, Matrix::Zero(2, 2)); }) == ErrorKind::Shape);
  CHECK(kind_of([] { ClassSet({"a"}, Matrix::Zero(2, 2)); }) == ErrorKind::Alignment);
  const ClassSet cs({"a", "b", "c"}, (Matrix(3, 1) << 1, 2, 3).finished());
  CHECK(cs.extended().col(1).isOnes());
  const std::vector<std::string> pick{"c", "a"};
  const ClassSet sub = cs.subset(pick);
  CHECK(sub.names() == pick);
  CHECK(sub.embeddings()(0, 0) == 3.0);
  const std::vector<std::string> missing{"z"};
  CHECK(kind_of([&] { cs.subset(missing); }) == ErrorKind::IncompleteCoverage);
  CHECK(kind_of([&] { cs.require_index("z"); }) == ErrorKind::UnseenLabel);
}
