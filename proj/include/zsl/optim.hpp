#pragma once

#include <cstdint>
#include <string_view>
#include <variant>

#include "zsl/types.hpp"

namespace zsl {

struct SgdState {
  double alpha = 1e-3;
};

/// params <- params - alpha * grad
void sgd_step(const SgdState& state, Matrix& params, const Matrix& grad);

struct AdamSettings {
  double alpha = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

struct AdamState {
  Matrix first_moment;
  Matrix second_moment;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double alpha = 1e-3;
  double epsilon = 1e-8;
  // Number of completed steps.
  std::uint64_t step = 0;

  static AdamState zeros(Eigen::Index rows, Eigen::Index cols, const AdamSettings& settings = {});

  bool operator==(const AdamState& other) const;
};

/// One bias-corrected Adam update:
///   M <- b1 M + (1-b1) G,  V <- b2 V + (1-b2) G^2,
///   params <- params - alpha * (M / (1-b1^t)) / (sqrt(V / (1-b2^t)) + eps)
void adam_step(AdamState& state, Matrix& params, const Matrix& grad);

enum class OptimizerKind { Sgd, Adam };

OptimizerKind parse_optimizer_kind(std::string_view text);
std::string_view to_string(OptimizerKind kind) noexcept;

/// Either optimizer behind one step() call.
class Optimizer {
 public:
  Optimizer(OptimizerKind kind, const AdamSettings& settings, Eigen::Index rows, Eigen::Index cols);

  void step(Matrix& params, const Matrix& grad);

  OptimizerKind kind() const noexcept;
  /// Null for SGD.
  const AdamState* adam_state() const noexcept { return std::get_if<AdamState>(&state_); }

 private:
  std::variant<SgdState, AdamState> state_;
};

}  // namespace zsl
