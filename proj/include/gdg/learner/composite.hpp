#pragma once

#include <cmath>

#include "gdg/numerics/mlp.hpp"

namespace gdg {

/// Inputs of the goal-distance objective J = mean_i D(f(s_i, μ(s_i, g_i)), g_i),
/// column per sample. All state blocks are raw world units except where noted.
template <typename T>
struct CompositeBatch {
  nn::Matrix<T> actor_input;  // [n(s); n(g)]
  nn::Matrix<T> state_norm;   // n(s)
  nn::Matrix<T> state_raw;    // s
  nn::Matrix<T> goal_norm;    // n(g)
  nn::Matrix<T> goal_raw;     // g
  nn::Vector<T> state_center;
  nn::Vector<T> state_half;
};

template <typename T>
struct CompositeResult {
  T objective = 0;
  nn::ParamSet<T> actor_grad;
};

/// How the frozen distance is evaluated at the predicted next state.
enum class DistanceHead {
  learned,    // D = scale · critic(n(s′) ‖ n(g))
  euclidean,  // D = ‖s′ − g‖₂
};

/// Forward pass and gradient of J with respect to the actor parameters only.
/// Chain: critic input-gradient at s′, then the model's input-gradient with
/// respect to the action block, then the actor's parameter-gradient. The model
/// predicts a displacement, s′ = s + model(n(s) ‖ u), where u is the actor's
/// output in normalized action units.
template <typename T>
CompositeResult<T> goal_distance_gradient(const nn::Mlp<T>& actor, const nn::Mlp<T>& model,
                                          const nn::Mlp<T>* critic, DistanceHead head, T distance_scale,
                                          const CompositeBatch<T>& batch) {
  const Eigen::Index n = batch.actor_input.cols();
  const Eigen::Index sd = batch.state_raw.rows();
  const T inv_n = T(1) / static_cast<T>(n);

  nn::Tape<T> actor_tape;
  const nn::Matrix<T> u = actor.forward(batch.actor_input, actor_tape);
  const Eigen::Index ad = u.rows();

  nn::Matrix<T> model_in(sd + ad, n);
  model_in.topRows(sd) = batch.state_norm;
  model_in.bottomRows(ad) = u;
  nn::Tape<T> model_tape;
  const nn::Matrix<T> next = batch.state_raw + model.forward(model_in, model_tape);

  CompositeResult<T> out;
  nn::Matrix<T> d_next(sd, n);  // dJ/ds′
  if (head == DistanceHead::learned) {
    nn::Matrix<T> critic_in(2 * sd, n);
    for (Eigen::Index r = 0; r < sd; ++r) {
      critic_in.row(r) = (next.row(r).array() - batch.state_center(r)) / batch.state_half(r);
    }
    critic_in.bottomRows(sd) = batch.goal_norm;
    nn::Tape<T> critic_tape;
    const nn::Matrix<T> dist = critic->forward(critic_in, critic_tape);
    out.objective = distance_scale * dist.sum() * inv_n;
    const nn::Matrix<T> up = nn::Matrix<T>::Constant(1, n, distance_scale * inv_n);
    const nn::Matrix<T> d_in = critic->backward(critic_tape, up, nullptr);
    for (Eigen::Index r = 0; r < sd; ++r) d_next.row(r) = d_in.row(r) / batch.state_half(r);
  } else {
    const nn::Matrix<T> diff = next - batch.goal_raw;
    T total = 0;
    for (Eigen::Index c = 0; c < n; ++c) {
      const T norm = diff.col(c).norm();
      total += norm;
      d_next.col(c) = norm > T(0) ? nn::Vector<T>(diff.col(c) * (inv_n / norm)) : nn::Vector<T>::Zero(sd);
    }
    out.objective = total * inv_n;
  }

  const nn::Matrix<T> d_model_in = model.backward(model_tape, d_next, nullptr);
  const nn::Matrix<T> d_u = d_model_in.bottomRows(ad);
  out.actor_grad = actor.zero_like();
  actor.backward(actor_tape, d_u, &out.actor_grad);
  return out;
}

}  // namespace gdg
