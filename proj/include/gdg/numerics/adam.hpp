#pragma once

#include <cstdint>

#include "gdg/numerics/mlp.hpp"

namespace gdg::nn {

struct AdamConfig {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

template <typename T>
struct OptimizerState {
  AdamConfig config;
  ParamSet<T> first_moment;
  ParamSet<T> second_moment;
  std::uint64_t step_count = 0;

  static OptimizerState for_network(const Mlp<T>& net, AdamConfig config = {});
};

/// Bias-corrected Adam step that descends `grads`.
/// Throws NumericalError and leaves both net and state untouched when any
/// gradient entry is non-finite.
template <typename T>
void opt_step(Mlp<T>& net, const ParamSet<T>& grads, OptimizerState<T>& state);

extern template struct OptimizerState<float>;
extern template struct OptimizerState<double>;

}  // namespace gdg::nn
