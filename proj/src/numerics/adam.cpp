#include "tweetnews/numerics/adam.hpp"

#include <cmath>

#include "tweetnews/error.hpp"

namespace tweetnews::numerics {

AdamState make_adam_state(std::span<const Tensor> params, AdamConfig config) {
  AdamState state;
  state.config = config;
  for (const auto& p : params) {
    state.m.emplace_back(p.numel(), 0.0);
    state.v.emplace_back(p.numel(), 0.0);
  }
  return state;
}

void adam_step(std::span<Tensor> params, AdamState& state) {
  if (params.size() != state.m.size()) {
    throw ShapeError("adam_step: " + std::to_string(params.size()) + " params but state for " +
                     std::to_string(state.m.size()));
  }
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (params[i].numel() != state.m[i].size()) {
      throw ShapeError("adam_step: parameter " + std::to_string(i) + " has shape " +
                       shape_str(params[i].shape()) + " but state holds " +
                       std::to_string(state.m[i].size()) + " moments");
    }
  }
  const auto& c = state.config;
  state.step_count += 1;
  const double t = static_cast<double>(state.step_count);
  const double correction1 = 1.0 - std::pow(c.beta1, t);
  const double correction2 = 1.0 - std::pow(c.beta2, t);
  for (std::size_t i = 0; i < params.size(); ++i) {
    Tensor& p = params[i];
    // A parameter the loss never reached has an implicit zero gradient.
    double* g = p.has_grad() ? p.mutable_grad().data() : nullptr;
    auto data = p.mutable_data();
    auto& m = state.m[i];
    auto& v = state.v[i];
    for (std::size_t j = 0; j < m.size(); ++j) {
      const double gj = g ? g[j] : 0.0;
      m[j] = c.beta1 * m[j] + (1.0 - c.beta1) * gj;
      v[j] = c.beta2 * v[j] + (1.0 - c.beta2) * gj * gj;
      const double mhat = m[j] / correction1;
      const double vhat = v[j] / correction2;
      data[j] -= c.learning_rate * mhat / (std::sqrt(vhat) + c.epsilon);
      if (g) g[j] = 0.0;
    }
  }
}

}  // namespace tweetnews::numerics
