#include "gptpinn/adam.hpp"

#include <cmath>

#include "gptpinn/error.hpp"

namespace gptpinn {

void adam_step(AdamState& state, Vector& params, const Vector& grad, double lr,
               double direction) {
  if (lr < 0.0) throw Error("learning rate must be non-negative");
  if (grad.size() != params.size() || state.m.size() != params.size()) {
    throw Error("adam: shape mismatch");
  }
  const auto& h = state.hyper;
  ++state.step;
  const double c1 = 1.0 - std::pow(h.beta1, static_cast<double>(state.step));
  const double c2 = 1.0 - std::pow(h.beta2, static_cast<double>(state.step));
  for (Eigen::Index i = 0; i < params.size(); ++i) {
    const double g = grad(i);
    state.m(i) = h.beta1 * state.m(i) + (1.0 - h.beta1) * g;
    state.v(i) = h.beta2 * state.v(i) + (1.0 - h.beta2) * g * g;
    const double m_hat = state.m(i) / c1;
    const double v_hat = state.v(i) / c2;
    params(i) -= direction * lr * m_hat / (std::sqrt(v_hat) + h.eps);
  }
}

}  // namespace gptpinn
