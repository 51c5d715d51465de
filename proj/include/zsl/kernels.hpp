#pragma once

// OpenMP batch kernels. Every reduction runs in a fixed order, so results
// are bitwise identical for any thread count.

#include <cstddef>
#include <span>
#include <vector>

#include "zsl/compat_model.hpp"
#include "zsl/types.hpp"

namespace zsl::kernels {

/// Rows of `features` scored against every class: result is rows x classes.
Matrix score_matrix(const CompatModel& model, const Matrix& features, const ClassSet& classes);

/// Per-sample negative log-likelihood.
Vector sample_nll(const CompatModel& model, const BatchView& batch, const ClassSet& classes);

double batch_nll(const CompatModel& model, const BatchView& batch, const ClassSet& classes);

Matrix batch_gradient(const CompatModel& model, const BatchView& batch, const ClassSet& classes);

/// Argmax class index for each row of `features`, lowest index on ties.
std::vector<std::size_t> predict_rows(const CompatModel& model, const Matrix& features,
                                      const ClassSet& classes);

}  // namespace zsl::kernels
