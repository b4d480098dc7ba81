#include "specshift/adam.hpp"

#include <cmath>

#include "specshift/error.hpp"

namespace specshift {

AdamState adam_init(const std::vector<ParamRef>& params) {
  AdamState s;
  for (const auto& p : params) {
    s.m.push_back(Matrix::Zero(p.value->rows(), p.value->cols()));
    s.v.push_back(Matrix::Zero(p.value->rows(), p.value->cols()));
  }
  return s;
}

bool adam_step(const std::vector<ParamRef>& params, const std::vector<ParamRef>& grads,
               AdamState& state, double lr) {
  require(params.size() == grads.size() && params.size() == state.m.size(),
          "optimizer state does not match the parameter list");
  for (std::size_t i = 0; i < params.size(); ++i) {
    require(params[i].value->rows() == grads[i].value->rows() &&
                params[i].value->cols() == grads[i].value->cols(),
            "gradient shape mismatch for " + params[i].name);
    if (!grads[i].value->allFinite()) {
      ++state.rejected;
      return false;
    }
  }
  ++state.step;
  const double t = static_cast<double>(state.step);
  const double c1 = 1.0 - std::pow(state.beta1, t);
  const double c2 = 1.0 - std::pow(state.beta2, t);
  for (std::size_t i = 0; i < params.size(); ++i) {
    const Matrix& g = *grads[i].value;
    state.m[i] = state.beta1 * state.m[i] + (1.0 - state.beta1) * g;
    state.v[i] = state.beta2 * state.v[i] + (1.0 - state.beta2) * g.cwiseAbs2();
    *params[i].value -=
        (lr * (state.m[i].array() / c1) /
         ((state.v[i].array() / c2).sqrt() + state.epsilon))
            .matrix();
  }
  return true;
}

}  // namespace specshift
