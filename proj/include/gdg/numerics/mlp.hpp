#pragma once

#include <cstdint>
#include <iosfwd>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace gdg::nn {

template <typename T>
using Matrix = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic>;
template <typename T>
using Vector = Eigen::Matrix<T, Eigen::Dynamic, 1>;

enum class Activation {
  identity,
  relu,
  softplus,  // nonnegative-smooth
  tanh,      // bounded-symmetric
};

std::string to_string(Activation a);
Activation activation_from_string(const std::string& name);

template <typename T>
struct Layer {
  Matrix<T> weight;  // fan_out x fan_in
  Vector<T> bias;
};

/// Parameter-shaped container. Used for gradients and optimizer moments.
template <typename T>
struct ParamSet {
  std::vector<Layer<T>> layers;

  void set_zero();
  std::size_t size() const;
  bool all_finite() const;
  void add_scaled(const ParamSet& other, T scale);
  T squared_norm() const;
};

/// Per-sample intermediate values recorded by a batched forward pass.
template <typename T>
struct Tape {
  std::vector<Matrix<T>> inputs;  // input to each layer (columns are samples)
  std::vector<Matrix<T>> pre;     // pre-activation of each layer
  Matrix<T> output;
};

/// Feed-forward network with ReLU hidden layers and a configurable output head.
///
/// Batched calls take matrices whose columns are samples. The single-sample
/// calls are thin wrappers over the batched ones.
template <typename T>
class Mlp {
 public:
  Mlp() = default;

  /// Uniform(-1/sqrt(fan_in), 1/sqrt(fan_in)) initialization for weights and biases.
  Mlp(std::vector<int> layer_sizes, Activation output, std::mt19937_64& rng);

  static Mlp zeros(std::vector<int> layer_sizes, Activation output);

  int input_size() const { return sizes_.front(); }
  int output_size() const { return sizes_.back(); }
  const std::vector<int>& layer_sizes() const { return sizes_; }
  Activation output_activation() const { return output_; }
  std::size_t parameter_count() const { return params_.size(); }

  ParamSet<T>& params() { return params_; }
  const ParamSet<T>& params() const { return params_; }
  ParamSet<T> zero_like() const;

  Vector<T> forward(const Vector<T>& x) const;
  Matrix<T> forward(const Matrix<T>& x) const;
  Matrix<T> forward(const Matrix<T>& x, Tape<T>& tape) const;

  /// Backpropagates `upstream` (d loss / d output, one column per sample).
  /// Accumulates into `grads` when non-null and returns d loss / d input.
  Matrix<T> backward(const Tape<T>& tape, const Matrix<T>& upstream, ParamSet<T>* grads) const;

  ParamSet<T> grad_params(const Vector<T>& x, const Vector<T>& upstream) const;
  Vector<T> grad_input(const Vector<T>& x, const Vector<T>& upstream) const;

  bool same_architecture(const Mlp& other) const;

  template <typename U>
  Mlp<U> cast() const {
    Mlp<U> out = Mlp<U>::zeros(sizes_, output_);
    for (std::size_t i = 0; i < params_.layers.size(); ++i) {
      out.params().layers[i].weight = params_.layers[i].weight.template cast<U>();
      out.params().layers[i].bias = params_.layers[i].bias.template cast<U>();
    }
    return out;
  }

  void save(std::ostream& os) const;
  static Mlp load(std::istream& is);

 private:
  void check_input(Eigen::Index rows) const;

  std::vector<int> sizes_;
  Activation output_ = Activation::identity;
  ParamSet<T> params_;
};

/// θ_target ← τ·θ_online + (1−τ)·θ_target
template <typename T>
void soft_update(Mlp<T>& target, const Mlp<T>& online, double tau);

extern template class Mlp<float>;
extern template class Mlp<double>;
extern template struct ParamSet<float>;
extern template struct ParamSet<double>;

}  // namespace gdg::nn
