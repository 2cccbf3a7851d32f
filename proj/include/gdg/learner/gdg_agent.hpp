#pragma once

#include <iosfwd>
#include <vector>

#include "gdg/envs/environment.hpp"
#include "gdg/learner/composite.hpp"
#include "gdg/learner/normalizer.hpp"
#include "gdg/learner/replay.hpp"
#include "gdg/numerics/adam.hpp"
#include "gdg/numerics/mlp.hpp"

namespace gdg {

struct GdgConfig {
  std::vector<int> hidden = {64, 64};
  double critic_lr = 1e-3;
  double actor_lr = 1e-3;
  double model_lr = 1e-3;
  double tau = 0.05;
  double gamma_d = 1.0;
  double d_max = 500.0;
  /// D = distance_scale · softplus(z); lets the head reach hop counts in the hundreds.
  double distance_scale = 1.0;
  /// Replace the critic with ‖s − g‖₂ (critic and anchor updates become no-ops).
  bool analytic_distance = false;
};

struct GdgLosses {
  double critic = 0.0;
  double anchor = 0.0;
  double model = 0.0;
  double actor = 0.0;
};

/// Distance critic D(s, g), target critic D′, forward model f(s, a) and
/// goal-conditioned actor μ(s, g). Single writer; const methods are safe to
/// call concurrently.
class GdgAgent {
 public:
  GdgAgent(const envs::Environment& env, GdgConfig config, Rng& rng);
  GdgAgent(Normalizer norm, GdgConfig config, Rng& rng);

  const GdgConfig& config() const { return config_; }
  const Normalizer& normalizer() const { return norm_; }
  int state_dim() const { return norm_.state_dim(); }
  int action_dim() const { return norm_.action_dim(); }

  /// μ(s, g) in action-box units.
  RealVec policy(const RealVec& s, const RealVec& g) const;
  /// With probability explore_prob a uniform in-box action, else μ(s, g) plus
  /// N(0, noise_scale²) per coordinate clamped to the box.
  RealVec act(const RealVec& s, const RealVec& g, double noise_scale, double explore_prob, Rng& rng) const;

  /// Learned distance, capped at d_max like the TD targets it regresses onto.
  double distance(const RealVec& s, const RealVec& g) const;
  std::vector<double> distances(const std::vector<RealVec>& s, const std::vector<RealVec>& g) const;
  double target_distance(const RealVec& s, const RealVec& g) const;
  RealVec predict(const RealVec& s, const RealVec& a) const;

  /// x_i = d_i when reached, else d_i + γ_D·D′(s′_i, g_i); clamped to [0, D_max].
  std::vector<double> td_distance_target(const std::vector<Transition>& batch) const;

  /// Each performs one optimizer step and returns the pre-step loss. A
  /// non-finite loss or gradient throws NumericalError without updating.
  double critic_update(const std::vector<Transition>& batch);
  double anchor_update(const std::vector<RealVec>& states);
  double model_update(const std::vector<Transition>& batch);
  double actor_update(const std::vector<Transition>& batch);

  /// critic → anchor → model → actor → soft target update on one minibatch.
  GdgLosses train_step(const ReplayBuffer& buffer, std::size_t batch_size, Rng& rng);

  /// Objective and actor gradient without applying them.
  CompositeResult<float> actor_objective(const std::vector<Transition>& batch) const;

  nn::Mlp<float>& critic() { return critic_; }
  nn::Mlp<float>& target_critic() { return target_critic_; }
  nn::Mlp<float>& model() { return model_; }
  nn::Mlp<float>& actor() { return actor_; }
  const nn::Mlp<float>& critic() const { return critic_; }
  const nn::Mlp<float>& target_critic() const { return target_critic_; }
  const nn::Mlp<float>& model() const { return model_; }
  const nn::Mlp<float>& actor() const { return actor_; }

  /// Fresh optimizer moments (e.g. before a frozen-batch descent check).
  void reset_optimizers();

  void save(std::ostream& os) const;
  static GdgAgent load(std::istream& is);

 private:
  nn::Matrix<float> pair_input(const std::vector<const RealVec*>& s, const std::vector<const RealVec*>& g) const;
  CompositeBatch<float> composite_batch(const std::vector<Transition>& batch) const;
  double scaled_distance_regression(const nn::Matrix<float>& input, const std::vector<double>& target);

  Normalizer norm_;
  GdgConfig config_;
  nn::Mlp<float> critic_;
  nn::Mlp<float> target_critic_;
  nn::Mlp<float> model_;
  nn::Mlp<float> actor_;
  nn::OptimizerState<float> critic_opt_;
  nn::OptimizerState<float> model_opt_;
  nn::OptimizerState<float> actor_opt_;
};

}  // namespace gdg
