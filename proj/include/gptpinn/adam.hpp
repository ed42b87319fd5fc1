#pragma once

#include "gptpinn/mlp.hpp"

namespace gptpinn {

struct AdamHyper {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

/// Moment accumulators for a flat parameter vector.
struct AdamState {
  Vector m;
  Vector v;
  long step = 0;
  AdamHyper hyper;

  explicit AdamState(Eigen::Index size, AdamHyper h = {})
      : m(Vector::Zero(size)), v(Vector::Zero(size)), hyper(h) {}
};

/// One bias-corrected Adam update, params <- params - lr * m_hat / (sqrt(v_hat) + eps).
/// Pass a negative `direction` to ascend instead of descend.
void adam_step(AdamState& state, Vector& params, const Vector& grad, double lr,
               double direction = 1.0);

}  // namespace gptpinn
