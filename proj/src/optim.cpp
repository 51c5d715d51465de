#include "zsl/optim.hpp"

#include <cmath>

#include "zsl/error.hpp"

namespace zsl {
namespace {

void check_shapes(const Matrix& params, const Matrix& grad) {
  if (params.rows() != grad.rows() || params.cols() != grad.cols())
    throw Error(ErrorKind::Shape, "gradient is " + std::to_string(grad.rows()) + "x" + std::to_string(grad.cols()) +
                                      " but parameters are " + std::to_string(params.rows()) + "x" +
                                      std::to_string(params.cols()));
}

}  // namespace

void sgd_step(const SgdState& state, Matrix& params, const Matrix& grad) {
  check_shapes(params, grad);
  params -= state.alpha * grad;
}

AdamState AdamState::zeros(Eigen::Index rows, Eigen::Index cols, const AdamSettings& settings) {
  AdamState s;
  s.first_moment = Matrix::Zero(rows, cols);
  s.second_moment = Matrix::Zero(rows, cols);
  s.beta1 = settings.beta1;
  s.beta2 = settings.beta2;
  s.alpha = settings.alpha;
  s.epsilon = settings.epsilon;
  return s;
}

bool AdamState::operator==(const AdamState& o) const {
  return first_moment == o.first_moment && second_moment == o.second_moment && beta1 == o.beta1 &&
         beta2 == o.beta2 && alpha == o.alpha && epsilon == o.epsilon && step == o.step;
}

void adam_step(AdamState& state, Matrix& params, const Matrix& grad) {
  check_shapes(params, grad);
  check_shapes(state.first_moment, grad);
  check_shapes(state.second_moment, grad);

  state.step += 1;
  const double t = static_cast<double>(state.step);
  state.first_moment = state.beta1 * state.first_moment + (1.0 - state.beta1) * grad;
  state.second_moment = state.beta2 * state.second_moment + (1.0 - state.beta2) * grad.cwiseAbs2();

  const double correction1 = 1.0 - std::pow(state.beta1, t);
  const double correction2 = 1.0 - std::pow(state.beta2, t);
  const auto m_hat = state.first_moment.array() / correction1;
  const auto v_hat = state.second_moment.array() / correction2;
  params.array() -= state.alpha * m_hat / (v_hat.sqrt() + state.epsilon);
}

OptimizerKind parse_optimizer_kind(std::string_view text) {
  if (text == "adam") return OptimizerKind::Adam;
  if (text == "sgd") return OptimizerKind::Sgd;
  throw Error(ErrorKind::InvalidConfig, "unknown optimizer '" + std::string(text) + "'");
}

std::string_view to_string(OptimizerKind kind) noexcept { return kind == OptimizerKind::Adam ? "adam" : "sgd"; }

Optimizer::Optimizer(OptimizerKind kind, const AdamSettings& settings, Eigen::Index rows, Eigen::Index cols) {
  if (kind == OptimizerKind::Adam)
    state_ = AdamState::zeros(rows, cols, settings);
  else
    state_ = SgdState{settings.alpha};
}

void Optimizer::step(Matrix& params, const Matrix& grad) {
  std::visit(
      [&](auto& s) {
        if constexpr (std::is_same_v<std::decay_t<decltype(s)>, AdamState>)
          adam_step(s, params, grad);
        else
          sgd_step(s, params, grad);
      },
      state_);
}

OptimizerKind Optimizer::kind() const noexcept {
  return std::holds_alternative<AdamState>(state_) ? OptimizerKind::Adam : OptimizerKind::Sgd;
}

}  // namespace zsl
