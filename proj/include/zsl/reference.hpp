#pragma once

// Serial per-sample implementations written directly from the scalar
// formulas. They share no code with the kernels and exist so the kernels
// can be checked against them.

#include <cstddef>
#include <vector>

#include "zsl/compat_model.hpp"
#include "zsl/types.hpp"

namespace zsl::reference {

double score(const Matrix& extended, const double* phi, std::size_t d, const double* psi,
             std::size_t m);

Matrix score_matrix(const CompatModel& model, const Matrix& features, const ClassSet& classes);

double batch_nll(const CompatModel& model, const BatchView& batch, const ClassSet& classes);

Matrix batch_gradient(const CompatModel& model, const BatchView& batch, const ClassSet& classes);

std::vector<std::size_t> predict_rows(const CompatModel& model, const Matrix& features,
                                      const ClassSet& classes);

}  // namespace zsl::reference
