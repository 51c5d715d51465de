#pragma once

#include <Eigen/Dense>

namespace zsl {

using Vector = Eigen::VectorXd;
using RowVector = Eigen::RowVectorXd;
using Matrix = Eigen::MatrixXd;

}  // namespace zsl
