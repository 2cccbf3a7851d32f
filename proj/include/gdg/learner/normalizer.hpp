#pragma once

#include <vector>

#include "gdg/envs/environment.hpp"
#include "gdg/numerics/mlp.hpp"
#include "gdg/types.hpp"

namespace gdg {

/// Fixed affine map of world coordinates onto [-1, 1] per axis, and of the
/// action box onto [-1, 1]. Networks only ever see normalized values.
struct Normalizer {
  RealVec state_center;
  RealVec state_half;
  RealVec action_center;
  RealVec action_half;

  static Normalizer for_env(const envs::Environment& env);

  int state_dim() const { return static_cast<int>(state_center.size()); }
  int action_dim() const { return static_cast<int>(action_center.size()); }

  /// Writes normalized states of `states` into rows [row, row + state_dim) of `out`.
  template <typename T>
  void states_into(const std::vector<const RealVec*>& states, nn::Matrix<T>& out, int row) const {
    for (std::size_t c = 0; c < states.size(); ++c) {
      const RealVec& s = *states[c];
      for (int i = 0; i < state_dim(); ++i) {
        out(row + i, static_cast<Eigen::Index>(c)) = static_cast<T>((s(i) - state_center(i)) / state_half(i));
      }
    }
  }

  template <typename T>
  void actions_into(const std::vector<const RealVec*>& actions, nn::Matrix<T>& out, int row) const {
    for (std::size_t c = 0; c < actions.size(); ++c) {
      const RealVec& a = *actions[c];
      for (int i = 0; i < action_dim(); ++i) {
        out(row + i, static_cast<Eigen::Index>(c)) = static_cast<T>((a(i) - action_center(i)) / action_half(i));
      }
    }
  }

  /// Map a bounded-symmetric network output in [-1, 1] onto the action box.
  RealVec action_from_unit(const RealVec& u) const;
};

}  // namespace gdg
