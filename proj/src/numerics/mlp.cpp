#include "gdg/numerics/mlp.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <istream>
#include <ostream>
#include <sstream>

#include "gdg/errors.hpp"

namespace gdg::nn {

std::string to_string(Activation a) {
  switch (a) {
    case Activation::identity: return "identity";
    case Activation::relu: return "relu";
    case Activation::softplus: return "softplus";
    case Activation::tanh: return "tanh";
  }
  return "identity";
}

Activation activation_from_string(const std::string& name) {
  if (name == "identity") return Activation::identity;
  if (name == "relu") return Activation::relu;
  if (name == "softplus") return Activation::softplus;
  if (name == "tanh") return Activation::tanh;
  throw ContractError("unknown activation: " + name);
}

namespace {

template <typename T>
T softplus(T z) {
  // log(1 + e^z) without overflow for large |z|
  return z > T(0) ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z));
}

template <typename T>
T sigmoid(T z) {
  if (z >= T(0)) return T(1) / (T(1) + std::exp(-z));
  const T e = std::exp(z);
  return e / (T(1) + e);
}

template <typename T>
void apply(Activation a, const Matrix<T>& pre, Matrix<T>& out) {
  switch (a) {
    case Activation::identity: out = pre; break;
    case Activation::relu: out = pre.cwiseMax(T(0)); break;
    case Activation::softplus: out = pre.unaryExpr([](T z) { return softplus(z); }); break;
    case Activation::tanh: out = pre.array().tanh().matrix(); break;
  }
}

// d activation / d pre, multiplied elementwise into `g`
template <typename T>
void apply_derivative(Activation a, const Matrix<T>& pre, Matrix<T>& g) {
  switch (a) {
    case Activation::identity: break;
    case Activation::relu:
      g = g.cwiseProduct(pre.unaryExpr([](T z) { return z > T(0) ? T(1) : T(0); }));
      break;
    case Activation::softplus:
      g = g.cwiseProduct(pre.unaryExpr([](T z) { return sigmoid(z); }));
      break;
    case Activation::tanh:
      g = g.cwiseProduct(pre.unaryExpr([](T z) {
        const T t = std::tanh(z);
        return T(1) - t * t;
      }));
      break;
  }
}

void check_sizes(const std::vector<int>& sizes) {
  if (sizes.size() < 2) throw ContractError("Mlp needs at least input and output sizes");
  for (int s : sizes) {
    if (s <= 0) throw ContractError("Mlp layer sizes must be positive");
  }
}

std::string hex(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%a", v);
  return buf;
}

double parse_real(std::istream& is) {
  std::string tok;
  if (!(is >> tok)) throw ContractError("truncated Mlp checkpoint");
  char* end = nullptr;
  const double v = std::strtod(tok.c_str(), &end);
  if (end == tok.c_str() || *end != '\0') throw ContractError("bad real in Mlp checkpoint: " + tok);
  return v;
}

void expect(std::istream& is, const std::string& word) {
  std::string tok;
  if (!(is >> tok) || tok != word) {
    throw ContractError("Mlp checkpoint: expected '" + word + "', got '" + tok + "'");
  }
}

}  // namespace

// ---- ParamSet ----

template <typename T>
void ParamSet<T>::set_zero() {
  for (auto& l : layers) {
    l.weight.setZero();
    l.bias.setZero();
  }
}

template <typename T>
std::size_t ParamSet<T>::size() const {
  std::size_t n = 0;
  for (const auto& l : layers) n += static_cast<std::size_t>(l.weight.size() + l.bias.size());
  return n;
}

template <typename T>
bool ParamSet<T>::all_finite() const {
  for (const auto& l : layers) {
    if (!l.weight.allFinite() || !l.bias.allFinite()) return false;
  }
  return true;
}

template <typename T>
void ParamSet<T>::add_scaled(const ParamSet& other, T scale) {
  if (other.layers.size() != layers.size()) throw ContractError("ParamSet shape mismatch");
  for (std::size_t i = 0; i < layers.size(); ++i) {
    layers[i].weight += scale * other.layers[i].weight;
    layers[i].bias += scale * other.layers[i].bias;
  }
}

template <typename T>
T ParamSet<T>::squared_norm() const {
  T s = 0;
  for (const auto& l : layers) s += l.weight.squaredNorm() + l.bias.squaredNorm();
  return s;
}

// ---- Mlp ----

template <typename T>
Mlp<T>::Mlp(std::vector<int> layer_sizes, Activation output, std::mt19937_64& rng)
    : sizes_(std::move(layer_sizes)), output_(output) {
  check_sizes(sizes_);
  for (std::size_t i = 0; i + 1 < sizes_.size(); ++i) {
    const int fan_in = sizes_[i];
    const int fan_out = sizes_[i + 1];
    const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
    std::uniform_real_distribution<double> dist(-bound, bound);
    Layer<T> layer{Matrix<T>(fan_out, fan_in), Vector<T>(fan_out)};
    // Fill order is fixed (row-major) so a seed reproduces the same network.
    for (int r = 0; r < fan_out; ++r) {
      for (int c = 0; c < fan_in; ++c) layer.weight(r, c) = static_cast<T>(dist(rng));
    }
    for (int r = 0; r < fan_out; ++r) layer.bias(r) = static_cast<T>(dist(rng));
    params_.layers.push_back(std::move(layer));
  }
}

template <typename T>
Mlp<T> Mlp<T>::zeros(std::vector<int> layer_sizes, Activation output) {
  check_sizes(layer_sizes);
  Mlp net;
  net.sizes_ = std::move(layer_sizes);
  net.output_ = output;
  for (std::size_t i = 0; i + 1 < net.sizes_.size(); ++i) {
    net.params_.layers.push_back(
        {Matrix<T>::Zero(net.sizes_[i + 1], net.sizes_[i]), Vector<T>::Zero(net.sizes_[i + 1])});
  }
  return net;
}

template <typename T>
ParamSet<T> Mlp<T>::zero_like() const {
  ParamSet<T> out = params_;
  out.set_zero();
  return out;
}

template <typename T>
void Mlp<T>::check_input(Eigen::Index rows) const {
  if (sizes_.empty()) throw ContractError("Mlp is uninitialized");
  if (rows != sizes_.front()) {
    throw ContractError("Mlp input has " + std::to_string(rows) + " rows, expected " +
                        std::to_string(sizes_.front()));
  }
}

template <typename T>
Vector<T> Mlp<T>::forward(const Vector<T>& x) const {
  Matrix<T> in = x;
  return forward(in).col(0);
}

template <typename T>
Matrix<T> Mlp<T>::forward(const Matrix<T>& x) const {
  check_input(x.rows());
  Matrix<T> h = x;
  Matrix<T> pre;
  const std::size_t n = params_.layers.size();
  for (std::size_t i = 0; i < n; ++i) {
    const auto& l = params_.layers[i];
    pre.noalias() = l.weight * h;
    pre.colwise() += l.bias;
    apply(i + 1 == n ? output_ : Activation::relu, pre, h);
  }
  return h;
}

template <typename T>
Matrix<T> Mlp<T>::forward(const Matrix<T>& x, Tape<T>& tape) const {
  check_input(x.rows());
  const std::size_t n = params_.layers.size();
  tape.inputs.resize(n);
  tape.pre.resize(n);
  Matrix<T> h = x;
  for (std::size_t i = 0; i < n; ++i) {
    const auto& l = params_.layers[i];
    tape.inputs[i] = h;
    tape.pre[i].noalias() = l.weight * h;
    tape.pre[i].colwise() += l.bias;
    apply(i + 1 == n ? output_ : Activation::relu, tape.pre[i], h);
  }
  tape.output = h;
  return h;
}

template <typename T>
Matrix<T> Mlp<T>::backward(const Tape<T>& tape, const Matrix<T>& upstream,
                           ParamSet<T>* grads) const {
  const std::size_t n = params_.layers.size();
  if (tape.pre.size() != n) throw ContractError("tape does not belong to this network");
  if (upstream.rows() != sizes_.back() || upstream.cols() != tape.output.cols()) {
    throw ContractError("upstream gradient shape does not match network output");
  }
  if (grads && grads->layers.size() != n) throw ContractError("gradient container shape mismatch");
  Matrix<T> g = upstream;
  for (std::size_t k = n; k-- > 0;) {
    apply_derivative(k + 1 == n ? output_ : Activation::relu, tape.pre[k], g);
    if (grads) {
      grads->layers[k].weight.noalias() += g * tape.inputs[k].transpose();
      grads->layers[k].bias += g.rowwise().sum();
    }
    Matrix<T> next;
    next.noalias() = params_.layers[k].weight.transpose() * g;
    g = std::move(next);
  }
  return g;
}

template <typename T>
ParamSet<T> Mlp<T>::grad_params(const Vector<T>& x, const Vector<T>& upstream) const {
  Tape<T> tape;
  Matrix<T> in = x;
  forward(in, tape);
  ParamSet<T> grads = zero_like();
  Matrix<T> up = upstream;
  backward(tape, up, &grads);
  return grads;
}

template <typename T>
Vector<T> Mlp<T>::grad_input(const Vector<T>& x, const Vector<T>& upstream) const {
  Tape<T> tape;
  Matrix<T> in = x;
  forward(in, tape);
  Matrix<T> up = upstream;
  return backward(tape, up, nullptr).col(0);
}

template <typename T>
bool Mlp<T>::same_architecture(const Mlp& other) const {
  return sizes_ == other.sizes_ && output_ == other.output_;
}

template <typename T>
void Mlp<T>::save(std::ostream& os) const {
  os << "gdg-mlp 1\n";
  os << "sizes " << sizes_.size();
  for (int s : sizes_) os << ' ' << s;
  os << "\noutput " << to_string(output_) << '\n';
  for (std::size_t i = 0; i < params_.layers.size(); ++i) {
    const auto& l = params_.layers[i];
    os << "layer " << i << '\n';
    for (Eigen::Index r = 0; r < l.weight.rows(); ++r) {
      for (Eigen::Index c = 0; c < l.weight.cols(); ++c) {
        os << (c ? " " : "") << hex(static_cast<double>(l.weight(r, c)));
      }
      os << '\n';
    }
    for (Eigen::Index r = 0; r < l.bias.size(); ++r) {
      os << (r ? " " : "") << hex(static_cast<double>(l.bias(r)));
    }
    os << '\n';
  }
}

template <typename T>
Mlp<T> Mlp<T>::load(std::istream& is) {
  expect(is, "gdg-mlp");
  int version = 0;
  is >> version;
  if (version != 1) throw ContractError("unsupported Mlp checkpoint version");
  expect(is, "sizes");
  std::size_t count = 0;
  is >> count;
  std::vector<int> sizes(count);
  for (auto& s : sizes) is >> s;
  expect(is, "output");
  std::string act;
  is >> act;
  if (!is) throw ContractError("truncated Mlp checkpoint header");
  Mlp net = zeros(sizes, activation_from_string(act));
  for (std::size_t i = 0; i < net.params_.layers.size(); ++i) {
    expect(is, "layer");
    std::size_t idx = 0;
    is >> idx;
    if (idx != i) throw ContractError("Mlp checkpoint layers out of order");
    auto& l = net.params_.layers[i];
    for (Eigen::Index r = 0; r < l.weight.rows(); ++r) {
      for (Eigen::Index c = 0; c < l.weight.cols(); ++c) l.weight(r, c) = static_cast<T>(parse_real(is));
    }
    for (Eigen::Index r = 0; r < l.bias.size(); ++r) l.bias(r) = static_cast<T>(parse_real(is));
  }
  return net;
}

template <typename T>
void soft_update(Mlp<T>& target, const Mlp<T>& online, double tau) {
  if (!target.same_architecture(online)) throw ContractError("soft_update: architecture mismatch");
  if (!(tau >= 0.0 && tau <= 1.0)) throw ContractError("soft_update: tau must lie in [0, 1]");
  const T t = static_cast<T>(tau);
  auto& dst = target.params().layers;
  const auto& src = online.params().layers;
  for (std::size_t i = 0; i < dst.size(); ++i) {
    if (tau == 1.0) {
      dst[i] = src[i];
    } else {
      dst[i].weight = t * src[i].weight + (T(1) - t) * dst[i].weight;
      dst[i].bias = t * src[i].bias + (T(1) - t) * dst[i].bias;
    }
  }
}

template class Mlp<float>;
template class Mlp<double>;
template struct ParamSet<float>;
template struct ParamSet<double>;
template void soft_update<float>(Mlp<float>&, const Mlp<float>&, double);
template void soft_update<double>(Mlp<double>&, const Mlp<double>&, double);

}  // namespace gdg::nn
