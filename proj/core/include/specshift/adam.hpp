#pragma once

#include <cstdint>
#include <vector>

#include "specshift/linalg.hpp"
#include "specshift/params.hpp"

namespace specshift {

struct AdamState {
  std::vector<Matrix> m;
  std::vector<Matrix> v;
  std::uint64_t step = 0;
  std::uint64_t rejected = 0;  // steps skipped for non-finite gradients
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

AdamState adam_init(const std::vector<ParamRef>& params);

/// Bias-corrected Adam update. Returns false, leaving parameters and moments
/// untouched, when any gradient entry is non-finite.
bool adam_step(const std::vector<ParamRef>& params, const std::vector<ParamRef>& grads,
               AdamState& state, double lr);

}  // namespace specshift
