#include "gdg/numerics/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "gdg/errors.hpp"

namespace gdg::nn {

std::string GradCheckReport::summary() const {
  char buf[256];
  std::snprintf(buf, sizeof buf,
                "params: max err %.3e (layer %zu, index %zu); input: max err %.3e (coord %zu); "
                "tol %.1e -> %s",
                max_param_error, worst_param_layer, worst_param_index, max_input_error,
                worst_input_index, tolerance, passed ? "PASS" : "FAIL");
  return buf;
}

double gradient_error(double analytic, double numeric, double floor) {
  const double scale = std::max(std::abs(analytic), std::abs(numeric));
  const double diff = std::abs(analytic - numeric);
  return scale < floor ? diff : diff / scale;
}

std::vector<double> central_differences(const std::function<double(const std::vector<double>&)>& f,
                                        std::vector<double> at, double step) {
  std::vector<double> out(at.size());
  for (std::size_t i = 0; i < at.size(); ++i) {
    const double orig = at[i];
    at[i] = orig + step;
    const double hi = f(at);
    at[i] = orig - step;
    const double lo = f(at);
    at[i] = orig;
    out[i] = (hi - lo) / (2.0 * step);
  }
  return out;
}

template <typename T>
GradCheckReport finite_diff_check(const Mlp<T>& net, const Vector<double>& x,
                                  const Vector<double>& upstream, double tolerance, double step) {
  if (x.size() != net.input_size() || upstream.size() != net.output_size()) {
    throw ContractError("finite_diff_check: dimension mismatch");
  }
  GradCheckReport rep;
  rep.tolerance = tolerance;

  const Vector<T> xt = x.cast<T>();
  const Vector<T> ut = upstream.cast<T>();
  const ParamSet<T> analytic = net.grad_params(xt, ut);
  const Vector<T> analytic_in = net.grad_input(xt, ut);

  Mlp<double> probe = net.template cast<double>();
  auto objective = [&](const Mlp<double>& m, const Vector<double>& in) {
    return upstream.dot(m.forward(in));
  };

  auto& layers = probe.params().layers;
  for (std::size_t li = 0; li < layers.size(); ++li) {
    auto& w = layers[li].weight;
    auto& b = layers[li].bias;
    std::size_t flat = 0;
    auto check = [&](double& slot, double analytic_value) {
      const double orig = slot;
      slot = orig + step;
      const double hi = objective(probe, x);
      slot = orig - step;
      const double lo = objective(probe, x);
      slot = orig;
      const double err = gradient_error(analytic_value, (hi - lo) / (2.0 * step));
      if (err > rep.max_param_error) {
        rep.max_param_error = err;
        rep.worst_param_layer = li;
        rep.worst_param_index = flat;
      }
      ++flat;
    };
    for (Eigen::Index r = 0; r < w.rows(); ++r) {
      for (Eigen::Index c = 0; c < w.cols(); ++c) {
        check(w(r, c), static_cast<double>(analytic.layers[li].weight(r, c)));
      }
    }
    for (Eigen::Index r = 0; r < b.size(); ++r) {
      check(b(r), static_cast<double>(analytic.layers[li].bias(r)));
    }
  }

  Vector<double> xi = x;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double orig = xi(i);
    xi(i) = orig + step;
    const double hi = objective(probe, xi);
    xi(i) = orig - step;
    const double lo = objective(probe, xi);
    xi(i) = orig;
    const double err = gradient_error(static_cast<double>(analytic_in(i)), (hi - lo) / (2.0 * step));
    if (err > rep.max_input_error) {
      rep.max_input_error = err;
      rep.worst_input_index = static_cast<std::size_t>(i);
    }
  }
  rep.passed = rep.max_param_error < tolerance && rep.max_input_error < tolerance;
  return rep;
}

template GradCheckReport finite_diff_check<float>(const Mlp<float>&, const Vector<double>&,
                                                  const Vector<double>&, double, double);
template GradCheckReport finite_diff_check<double>(const Mlp<double>&, const Vector<double>&,
                                                   const Vector<double>&, double, double);

}  // namespace gdg::nn
