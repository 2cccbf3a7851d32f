#pragma once

#include <iosfwd>
#include <vector>

#include "gdg/envs/environment.hpp"
#include "gdg/learner/normalizer.hpp"
#include "gdg/learner/replay.hpp"
#include "gdg/numerics/adam.hpp"
#include "gdg/numerics/mlp.hpp"

namespace gdg::baselines {

enum class RewardMode {
  sparse,                   // −1 per step, 0 on reaching the goal
  dense_negative_distance,  // −‖s′ − g‖₂
};

struct RewardSpec {
  RewardMode mode = RewardMode::sparse;

  double reward(const Transition& t) const;
};

struct DdpgConfig {
  std::vector<int> hidden = {64, 64};
  double critic_lr = 1e-3;
  double actor_lr = 1e-3;
  double tau = 0.05;
  double gamma = 0.98;
  /// Sparse targets are clipped to [−1/(1−γ), 0].
  bool clip_sparse_targets = true;
};

struct DdpgLosses {
  double critic = 0.0;
  double actor = 0.0;  // mean Q(s‖g, μ(s‖g)) before the step
};

/// Goal-conditioned DDPG: Q(s‖g, a) and μ(s‖g) with target copies of both.
class DdpgAgent {
 public:
  DdpgAgent(const envs::Environment& env, DdpgConfig config, Rng& rng);
  DdpgAgent(Normalizer norm, DdpgConfig config, Rng& rng);

  const DdpgConfig& config() const { return config_; }
  const Normalizer& normalizer() const { return norm_; }
  int state_dim() const { return norm_.state_dim(); }
  int action_dim() const { return norm_.action_dim(); }

  RealVec policy(const RealVec& s, const RealVec& g) const;
  RealVec act(const RealVec& s, const RealVec& g, double noise_scale, double explore_prob, Rng& rng) const;
  double q_value(const RealVec& s, const RealVec& g, const RealVec& a) const;

  /// r + γ·Q′(s′‖g, μ′(s′‖g)); bootstrap dropped when the transition reached its goal.
  std::vector<double> critic_targets(const std::vector<Transition>& batch, const RewardSpec& reward) const;

  double critic_update(const std::vector<Transition>& batch, const RewardSpec& reward);
  /// Ascends Q along ∂Q/∂a chained into the actor parameters.
  double actor_update(const std::vector<Transition>& batch);

  DdpgLosses train_step(const ReplayBuffer& buffer, std::size_t batch_size, const RewardSpec& reward, Rng& rng);

  nn::Mlp<float>& critic() { return critic_; }
  nn::Mlp<float>& actor() { return actor_; }
  const nn::Mlp<float>& critic() const { return critic_; }
  const nn::Mlp<float>& actor() const { return actor_; }
  const nn::Mlp<float>& target_critic() const { return target_critic_; }
  const nn::Mlp<float>& target_actor() const { return target_actor_; }

  void reset_optimizers();
  /// Copy online networks into the targets.
  void sync_targets();
  void save(std::ostream& os) const;
  static DdpgAgent load(std::istream& is);

 private:
  nn::Matrix<float> pair_input(const std::vector<const RealVec*>& s, const std::vector<const RealVec*>& g) const;

  Normalizer norm_;
  DdpgConfig config_;
  nn::Mlp<float> critic_;
  nn::Mlp<float> target_critic_;
  nn::Mlp<float> actor_;
  nn::Mlp<float> target_actor_;
  nn::OptimizerState<float> critic_opt_;
  nn::OptimizerState<float> actor_opt_;
};

/// Original-goal transition for every step plus k_future copies whose goal is
/// an achieved state s_j with j drawn uniformly from (t, T]. Reached flags are
/// recomputed against each relabeled goal.
std::vector<Transition> her_relabel(const Trace& trace, const RealVec& goal, int k_future,
                                    const GoalPredicate& reached, Rng& rng);

/// Uniform in the action box.
RealVec random_policy(const envs::EnvSpec& spec, Rng& rng);

}  // namespace gdg::baselines
