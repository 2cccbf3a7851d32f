#include "gdg/numerics/adam.hpp"

#include <cmath>

#include "gdg/errors.hpp"

namespace gdg::nn {

template <typename T>
OptimizerState<T> OptimizerState<T>::for_network(const Mlp<T>& net, AdamConfig config) {
  OptimizerState s;
  s.config = config;
  s.first_moment = net.zero_like();
  s.second_moment = net.zero_like();
  return s;
}

template <typename T>
void opt_step(Mlp<T>& net, const ParamSet<T>& grads, OptimizerState<T>& state) {
  auto& layers = net.params().layers;
  if (grads.layers.size() != layers.size() || state.first_moment.layers.size() != layers.size()) {
    throw ContractError("opt_step: gradient or optimizer shape mismatch");
  }
  for (std::size_t i = 0; i < layers.size(); ++i) {
    if (grads.layers[i].weight.rows() != layers[i].weight.rows() ||
        grads.layers[i].weight.cols() != layers[i].weight.cols() ||
        grads.layers[i].bias.size() != layers[i].bias.size()) {
      throw ContractError("opt_step: gradient shape mismatch in layer " + std::to_string(i));
    }
  }
  if (!grads.all_finite()) throw NumericalError("opt_step: non-finite gradient rejected");

  const auto& c = state.config;
  state.step_count += 1;
  const T b1 = static_cast<T>(c.beta1);
  const T b2 = static_cast<T>(c.beta2);
  const double t = static_cast<double>(state.step_count);
  const T corr1 = static_cast<T>(1.0 - std::pow(c.beta1, t));
  const T corr2 = static_cast<T>(1.0 - std::pow(c.beta2, t));
  const T lr = static_cast<T>(c.learning_rate);
  const T eps = static_cast<T>(c.epsilon);

  auto update = [&](auto& param, const auto& g, auto& m, auto& v) {
    m = b1 * m + (T(1) - b1) * g;
    v = b2 * v + (T(1) - b2) * g.cwiseProduct(g);
    param.array() -= lr * (m.array() / corr1) / ((v.array() / corr2).sqrt() + eps);
  };
  for (std::size_t i = 0; i < layers.size(); ++i) {
    update(layers[i].weight, grads.layers[i].weight, state.first_moment.layers[i].weight,
           state.second_moment.layers[i].weight);
    update(layers[i].bias, grads.layers[i].bias, state.first_moment.layers[i].bias,
           state.second_moment.layers[i].bias);
  }
}

template struct OptimizerState<float>;
template struct OptimizerState<double>;
template void opt_step<float>(Mlp<float>&, const ParamSet<float>&, OptimizerState<float>&);
template void opt_step<double>(Mlp<double>&, const ParamSet<double>&, OptimizerState<double>&);

}  // namespace gdg::nn
