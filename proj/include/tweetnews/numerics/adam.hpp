#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "tweetnews/numerics/tensor.hpp"

namespace tweetnews::numerics {

struct AdamConfig {
  double learning_rate = 1e-5;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

/// Moment estimates for one parameter list. m and v are parallel to the
/// parameter list passed to make_adam_state.
struct AdamState {
  AdamConfig config;
  std::uint64_t step_count = 0;
  std::vector<std::vector<double>> m;
  std::vector<std::vector<double>> v;
};

AdamState make_adam_state(std::span<const Tensor> params, AdamConfig config);

/// One bias-corrected Adam update of every parameter from its accumulated
/// gradient (missing gradients count as zero); zeroes the gradients after.
void adam_step(std::span<Tensor> params, AdamState& state);

}  // namespace tweetnews::numerics
