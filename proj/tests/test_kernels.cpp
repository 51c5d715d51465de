#include <doctest.h>
#include <omp.h>

#include <random>

#include "test_support.hpp"
#include "zsl/kernels.hpp"
#include "zsl/reference.hpp"

using namespace zsl;
using zsl::testing::gaussian_matrix;

namespace {

struct Instance {
  CompatModel model;
  ClassSet classes;
  Matrix features;
  std::vector<std::size_t> labels;
};

Instance random_instance(std::uint64_t seed, Eigen::Index n, Eigen::Index d, Eigen::Index m, std::size_t k) {
  std::mt19937_64 rng(seed);
  Instance in{CompatModel(gaussian_matrix(rng, d + 1, m + 1, 0.3)), zsl::testing::random_class_set(rng, k, m),
              gaussian_matrix(rng, n, d), {}};
  for (Eigen::Index i = 0; i < n; ++i) in.labels.push_back(rng() % k);
  return in;
}

double max_abs(const Matrix& a) { return a.cwiseAbs().maxCoeff(); }

}  // namespace

TEST_CASE("parallel kernels agree with the serial reference") {
  for (int threads : {1, 4}) {
    omp_set_num_threads(threads);
    for (std::uint64_t seed = 1; seed <= 6; ++seed) {
      const Instance in = random_instance(seed, 10 + 20 * static_cast<Eigen::Index>(seed), 7, 5, 2 + seed);
      const BatchView batch{in.features, in.labels};
      const Matrix ks = kernels::score_matrix(in.model, in.features, in.classes);
      const Matrix rs = reference::score_matrix(in.model, in.features, in.classes);
      CHECK(max_abs(ks - rs) < 1e-12);
      const double kn = kernels::batch_nll(in.model, batch, in.classes);
      CHECK(std::abs(kn - reference::batch_nll(in.model, batch, in.classes)) < 1e-10 * std::max(1.0, kn));
      CHECK(std::abs(kernels::sample_nll(in.model, batch, in.classes).sum() - kn) < 1e-10 * std::max(1.0, kn));
      const Matrix kg = kernels::batch_gradient(in.model, batch, in.classes);
      const Matrix rg = reference::batch_gradient(in.model, batch, in.classes);
      CHECK(max_abs(kg - rg) < 1e-10);
      CHECK(kernels::predict_rows(in.model, in.features, in.classes) ==
            reference::predict_rows(in.model, in.features, in.classes));
    }
  }
}

TEST_CASE("kernel results do not depend on the thread count") {
  const Instance in = random_instance(42, 300, 16, 9, 12);
  const BatchView batch{in.features, in.labels};
  omp_set_num_threads(1);
  const Matrix g1 = kernels::batch_gradient(in.model, batch, in.classes);
  const double n1 = kernels::batch_nll(in.model, batch, in.classes);
  omp_set_num_threads(4);
  const Matrix g4 = kernels::batch_gradient(in.model, batch, in.classes);
  const double n4 = kernels::batch_nll(in.model, batch, in.classes);
  CHECK(g1 == g4);
  CHECK(n1 == n4);
}

TEST_CASE("reference score is the augmented product") {
  std::mt19937_64 rng(3);
  const Matrix We = gaussian_matrix(rng, 4, 3);
  const Vector phi = zsl::testing::gaussian_vector(rng, 3), psi = zsl::testing::gaussian_vector(rng, 2);
  const double expected = extend_embedding(phi).dot(We * extend_embedding(psi));
  CHECK(std::abs(reference::score(We, phi.data(), 3, psi.data(), 2) - expected) < 1e-12);
}
