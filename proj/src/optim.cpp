#include "tgode/optim.hpp"

#include "tgode/errors.hpp"

#include <cmath>

namespace tgode {

AdamState AdamState::zeros_like(const std::vector<Matrix*>& params) {
  AdamState s;
  s.m.reserve(params.size());
  s.v.reserve(params.size());
  for (const Matrix* p : params) {
    s.m.push_back(Matrix::Zero(p->rows(), p->cols()));
    s.v.push_back(Matrix::Zero(p->rows(), p->cols()));
  }
  return s;
}

void adam_step(const std::vector<Matrix*>& params,
               const std::vector<Matrix>& grads, AdamState& state,
               const AdamConfig& config) {
  if (params.size() != grads.size() || params.size() != state.m.size())
    throw ShapeMismatchError("adam_step: parameter/gradient count mismatch");
  ++state.t;
  const Scalar bc1 =
      1.0 - std::pow(config.beta1, static_cast<Scalar>(state.t));
  const Scalar bc2 =
      1.0 - std::pow(config.beta2, static_cast<Scalar>(state.t));
  for (std::size_t i = 0; i < params.size(); ++i) {
    Matrix& p = *params[i];
    if (grads[i].rows() != p.rows() || grads[i].cols() != p.cols())
      throw ShapeMismatchError("adam_step: gradient shape mismatch");
    const Matrix g = grads[i] + config.weight_decay * p;
    state.m[i] = config.beta1 * state.m[i] + (1.0 - config.beta1) * g;
    state.v[i] = config.beta2 * state.v[i] +
                 (1.0 - config.beta2) * g.cwiseProduct(g);
    const Matrix m_hat = state.m[i] / bc1;
    const Matrix v_hat = state.v[i] / bc2;
    p.array() -=
        config.lr * m_hat.array() / (v_hat.array().sqrt() + config.eps);
  }
}

}  // namespace tgode
