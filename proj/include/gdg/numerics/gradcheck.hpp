#pragma once

#include <cstddef>
#include <functional>
#include <string>
#include <vector>

#include "gdg/numerics/mlp.hpp"

namespace gdg::nn {

struct GradCheckReport {
  double max_param_error = 0.0;
  std::size_t worst_param_layer = 0;
  std::size_t worst_param_index = 0;  // flat index: weights row-major, then biases
  double max_input_error = 0.0;
  std::size_t worst_input_index = 0;
  double tolerance = 0.0;
  bool passed = false;

  std::string summary() const;
};

/// Relative error |a−n|/max(|a|,|n|); absolute when both magnitudes are below `floor`.
double gradient_error(double analytic, double numeric, double floor = 1e-8);

/// Central difference of a scalar function at double precision.
std::vector<double> central_differences(const std::function<double(const std::vector<double>&)>& f,
                                        std::vector<double> at, double step = 1e-5);

/// Compares analytic grad_params / grad_input of `net` against central finite
/// differences of upstream·forward(x), evaluated on a double-precision copy.
template <typename T>
GradCheckReport finite_diff_check(const Mlp<T>& net, const Vector<double>& x,
                                  const Vector<double>& upstream, double tolerance,
                                  double step = 1e-5);

}  // namespace gdg::nn
