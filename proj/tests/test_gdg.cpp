#include <cmath>
#include <random>
#include <sstream>

#include <gtest/gtest.h>

#include "gdg/envs/environment.hpp"
#include "gdg/errors.hpp"
#include "gdg/learner/composite.hpp"
#include "gdg/learner/gdg_agent.hpp"
#include "gdg/learner/replay.hpp"
#include "gdg_test_support.hpp"

using namespace gdg;
using namespace gdg::testing;

namespace {

RealVec v2(double x, double y) {
  RealVec v(2);
  v << x, y;
  return v;
}

// Zero weights everywhere and a bias that makes the critic output `value` for every input.
void set_constant(nn::Mlp<float>& critic, double value, double scale) {
  for (auto& layer : critic.params().layers) {
    layer.weight.setZero();
    layer.bias.setZero();
  }
  critic.params().layers.back().bias(0) = static_cast<float>(std::log(std::expm1(value / scale)));
}

std::vector<Transition> random_batch(int n, int sd, int ad, Rng& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<Transition> out;
  for (int i = 0; i < n; ++i) {
    Transition t;
    t.s = RealVec(sd);
    t.s_next = RealVec(sd);
    t.g = RealVec(sd);
    t.a = RealVec(ad);
    for (int k = 0; k < sd; ++k) {
      t.s(k) = u(rng);
      t.s_next(k) = u(rng);
      t.g(k) = u(rng);
    }
    for (int k = 0; k < ad; ++k) t.a(k) = u(rng);
    out.push_back(t);
  }
  return out;
}

Normalizer unit_normalizer(int sd, int ad) {
  return {RealVec::Zero(sd), RealVec::Ones(sd), RealVec::Zero(ad), RealVec::Ones(ad)};
}

}  // namespace

TEST(Act, NoNoiseIsPolicy) {
  Rng rng(1);
  const envs::Environment env = envs::make_four_rooms();
  const GdgAgent agent(env, {}, rng);
  const RealVec s = v2(5, 5), g = v2(40, 50);
  EXPECT_EQ(agent.act(s, g, 0.0, 0.0, rng), agent.policy(s, g));
}

TEST(Act, FullExplorationIsUniformInBox) {
  Rng rng(2);
  const envs::Environment env = envs::make_four_rooms();
  const GdgAgent agent(env, {}, rng);
  double sum = 0.0, sq = 0.0;
  const int n = 10000;
  for (int i = 0; i < n; ++i) {
    const RealVec a = agent.act(v2(5, 5), v2(6, 6), 0.0, 1.0, rng);
    ASSERT_LE(a.cwiseAbs().maxCoeff(), 1.0);
    sum += a(0);
    sq += a(0) * a(0);
  }
  EXPECT_NEAR(sum / n, 0.0, 0.03);
  EXPECT_NEAR(sq / n, 1.0 / 3.0, 0.02);
}

TEST(Act, NoisyActionsStayInBox) {
  Rng rng(3);
  const envs::Environment env = envs::make_four_rooms();
  const GdgAgent agent(env, {}, rng);
  for (int i = 0; i < 10000; ++i) {
    const RealVec a = agent.act(v2(5, 5), v2(50, 50), 0.2, 0.0, rng);
    ASSERT_LE(a.cwiseAbs().maxCoeff(), 1.0);
  }
}

TEST(Agent, ActorOutputWithinBoxAndDistanceNonNegative) {
  Rng rng(4);
  const envs::Environment env = envs::make_city();
  GdgConfig cfg;
  cfg.distance_scale = 10.0;
  const GdgAgent agent(env, cfg, rng);
  for (int i = 0; i < 1000; ++i) {
    const RealVec s = env.sample_free(rng), g = env.sample_free(rng);
    ASSERT_GE(agent.distance(s, g), 0.0);
    ASSERT_LE(agent.policy(s, g).cwiseAbs().maxCoeff(), 1.0);
  }
}

TEST(TdTarget, ReachedTransitionIsItsCost) {
  Rng rng(5);
  GdgAgent agent(unit_normalizer(2, 2), {}, rng);
  set_constant(agent.target_critic(), 4.0, 1.0);
  Transition t{v2(0, 0), v2(0, 0), v2(0.1, 0), v2(0.1, 0), 1.0, true};
  EXPECT_DOUBLE_EQ(agent.td_distance_target({t})[0], 1.0);
}

TEST(TdTarget, SelfAnchorIsZero) {
  Rng rng(6);
  GdgAgent agent(unit_normalizer(2, 2), {}, rng);
  const RealVec s = v2(0.3, 0.3);
  EXPECT_DOUBLE_EQ(agent.td_distance_target({{s, v2(0, 0), s, s, 0.0, true}})[0], 0.0);
}

TEST(TdTarget, BootstrapAddsTargetDistance) {
  Rng rng(7);
  GdgAgent agent(unit_normalizer(2, 2), {}, rng);
  set_constant(agent.target_critic(), 4.0, 1.0);
  Transition t{v2(0, 0), v2(0, 0), v2(0.1, 0), v2(0.9, 0.9), 1.0, false};
  EXPECT_NEAR(agent.td_distance_target({t})[0], 5.0, 1e-5);
}

TEST(TdTarget, ClampedToMaximum) {
  Rng rng(8);
  GdgConfig cfg;
  cfg.d_max = 3.0;
  GdgAgent agent(unit_normalizer(2, 2), cfg, rng);
  set_constant(agent.target_critic(), 4.0, 1.0);
  Transition t{v2(0, 0), v2(0, 0), v2(0.1, 0), v2(0.9, 0.9), 1.0, false};
  EXPECT_DOUBLE_EQ(agent.td_distance_target({t})[0], 3.0);
}

TEST(TdTarget, EmptyBatchThrows) {
  Rng rng(9);
  const GdgAgent agent(unit_normalizer(2, 2), {}, rng);
  EXPECT_THROW(agent.td_distance_target({}), ContractError);
}

TEST(CriticUpdate, ZeroLossWhenAlreadyAtTargets) {
  Rng rng(10);
  GdgAgent agent(unit_normalizer(2, 2), {}, rng);
  set_constant(agent.critic(), 2.0, 1.0);
  // Reached transitions regress onto d; choose d equal to the current output.
  const double d = agent.distance(v2(0, 0), v2(1, 1));
  std::vector<Transition> batch;
  for (int i = 0; i < 8; ++i) batch.push_back({v2(0.1 * i, 0), v2(0, 0), v2(0, 0), v2(1, 1), d, true});
  const nn::Mlp<float> before = agent.critic();
  EXPECT_EQ(agent.critic_update(batch), 0.0);
  for (std::size_t l = 0; l < before.params().layers.size(); ++l) {
    EXPECT_EQ(agent.critic().params().layers[l].weight, before.params().layers[l].weight);
    EXPECT_EQ(agent.critic().params().layers[l].bias, before.params().layers[l].bias);
  }
}

TEST(CriticUpdate, LossDecreasesOnFrozenBatch) {
  Rng rng(11);
  GdgConfig cfg;
  cfg.critic_lr = 1e-4;
  GdgAgent agent(unit_normalizer(2, 2), cfg, rng);
  const auto batch = random_batch(64, 2, 2, rng);
  double prev = std::numeric_limits<double>::infinity();
  for (int i = 0; i < 100; ++i) {
    const double loss = agent.critic_update(batch);
    EXPECT_LT(loss, prev) << "update " << i;
    prev = loss;
  }
}

TEST(CriticUpdate, TabularChainLearnsHopCounts) {
  const ChainResult r = train_chain_critic(10, 10000, 0);
  EXPECT_LE(r.max_error_to_end, 0.1);
}

TEST(CriticUpdate, TabularChainTriangleConsistency) {
  const ChainResult r = train_chain_critic(10, 10000, 1);
  EXPECT_LE(r.max_error_all_pairs, 0.3);
  EXPECT_LE(r.max_triangle_violation, 0.3);
}

TEST(AnchorUpdate, SingleStateLossIsSquaredDistance) {
  Rng rng(12);
  GdgAgent agent(unit_normalizer(2, 2), {}, rng);
  const RealVec s = v2(0.2, -0.4);
  const double d = agent.distance(s, s);
  EXPECT_NEAR(agent.anchor_update({s, s, s}), d * d, 1e-6);
}

TEST(AnchorUpdate, ZeroCriticStartsAtLn2AndDecreases) {
  Rng rng(13);
  GdgAgent agent(unit_normalizer(2, 2), {}, rng);
  set_constant(agent.critic(), std::log(2.0), 1.0);
  agent.critic().params().layers.back().bias.setZero();
  const RealVec s = v2(0.5, 0.5);
  EXPECT_NEAR(agent.distance(s, s), std::log(2.0), 1e-6);
  double prev = agent.distance(s, s);
  for (int i = 0; i < 50; ++i) {
    agent.anchor_update({s});
    const double now = agent.distance(s, s);
    EXPECT_LT(now, prev);
    prev = now;
  }
}

TEST(AnchorUpdate, ConvergesBelowThreshold) {
  Rng rng(14);
  GdgConfig cfg;
  cfg.critic_lr = 3e-3;
  GdgAgent agent(unit_normalizer(2, 2), cfg, rng);
  std::vector<RealVec> states;
  std::uniform_real_distribution<double> u(-1, 1);
  for (int i = 0; i < 200; ++i) states.push_back(v2(u(rng), u(rng)));
  for (int i = 0; i < 2000; ++i) agent.anchor_update(states);
  for (const auto& s : states) EXPECT_LT(agent.distance(s, s), 0.1);
}

TEST(ModelUpdate, LossArithmeticOnTwoItems) {
  Rng rng(15);
  GdgConfig cfg;
  cfg.hidden = {};
  GdgAgent agent(unit_normalizer(2, 1), cfg, rng);
  for (auto& layer : agent.model().params().layers) {
    layer.weight.setZero();
    layer.bias.setZero();
  }
  RealVec a(1);
  a << 0.0;
  // Zero model predicts s' = s, so the errors are s - s'.
  const std::vector<Transition> batch{{v2(0, 0), a, v2(1, 2), v2(0, 0), 1, false},
                                      {v2(1, 1), a, v2(1, -2), v2(0, 0), 1, false}};
  EXPECT_NEAR(agent.model_update(batch), (1.0 + 4.0 + 0.0 + 9.0) / 2.0, 1e-12);
}

TEST(ModelUpdate, SelfTransitionsLearnIdentity) {
  Rng rng(16);
  GdgAgent agent(unit_normalizer(2, 2), {}, rng);
  auto batch = random_batch(32, 2, 2, rng);
  for (auto& t : batch) t.s_next = t.s;
  double loss = 0.0;
  for (int i = 0; i < 3000; ++i) loss = agent.model_update(batch);
  EXPECT_LT(loss, 1e-4);
}

TEST(ModelUpdate, LearnsPointDynamics) {
  Rng rng(17);
  const envs::Environment env = envs::make_reach3d();
  GdgAgent agent(env, {}, rng);
  std::uniform_real_distribution<double> u(-1, 1);
  auto draw = [&](double inset) {
    Transition t;
    t.s = RealVec(3);
    t.a = RealVec(3);
    for (int k = 0; k < 3; ++k) {
      t.s(k) = u(rng) * inset;
      t.a(k) = u(rng);
    }
    envs::EnvState st{t.s, 0, t.s};
    t.s_next = env.step(st, t.a).state.position;
    t.g = t.s_next;
    return t;
  };
  for (int i = 0; i < 20000; ++i) {
    std::vector<Transition> batch;
    for (int k = 0; k < 64; ++k) batch.push_back(draw(1.0));
    agent.model_update(batch);
  }
  double worst = 0.0;
  for (int i = 0; i < 500; ++i) {
    const Transition t = draw(0.85);
    worst = std::max(worst, (agent.predict(t.s, t.a) - t.s_next).cwiseAbs().maxCoeff());
  }
  EXPECT_LT(worst, 0.01);
}

TEST(ActorUpdate, CompositeGradientMatchesFiniteDifferences) {
  std::mt19937_64 rng(18);
  for (int trial = 0; trial < 5; ++trial) {
    const CompositeFixture f = CompositeFixture::random(rng, 2, 2, 5);
    const double err = composite_fd_error(f, trial % 2 == 0 ? DistanceHead::learned : DistanceHead::euclidean);
    EXPECT_LT(err, 1e-3) << "trial " << trial;
  }
}

TEST(ActorUpdate, AnalyticStandInsMatchClosedForm) {
  // D(s', g) = ||s' - g||, f(s, a) = s + a and a one-layer tanh actor.
  std::mt19937_64 rng(19);
  const CompositeFixture f = CompositeFixture::additive_model(rng, 2, 4);
  const auto r = goal_distance_gradient<double>(f.actor, f.model, nullptr, DistanceHead::euclidean, 1.0, f.batch);
  nn::ParamSet<double> expected = f.actor.zero_like();
  const Eigen::Index n = f.batch.actor_input.cols();
  for (Eigen::Index c = 0; c < n; ++c) {
    const nn::Vector<double> x = f.batch.actor_input.col(c);
    const nn::Vector<double> mu = f.actor.forward(x);
    const nn::Vector<double> diff = f.batch.state_raw.col(c) + mu - f.batch.goal_raw.col(c);
    expected.add_scaled(f.actor.grad_params(x, diff / diff.norm()), 1.0 / static_cast<double>(n));
  }
  for (std::size_t l = 0; l < expected.layers.size(); ++l) {
    EXPECT_LT((expected.layers[l].weight - r.actor_grad.layers[l].weight).norm(), 1e-12);
    EXPECT_LT((expected.layers[l].bias - r.actor_grad.layers[l].bias).norm(), 1e-12);
  }
  EXPECT_LT(composite_fd_error(f, DistanceHead::euclidean), 1e-4);
}

TEST(ActorUpdate, ReachableGoalGivesZeroFloorGradient) {
  std::mt19937_64 rng(20);
  CompositeFixture f = CompositeFixture::additive_model(rng, 2, 3);
  for (Eigen::Index c = 0; c < f.batch.goal_raw.cols(); ++c) {
    f.batch.goal_raw.col(c) = f.batch.state_raw.col(c) + f.actor.forward(nn::Vector<double>(f.batch.actor_input.col(c)));
  }
  const auto r = goal_distance_gradient<double>(f.actor, f.model, nullptr, DistanceHead::euclidean, 1.0, f.batch);
  EXPECT_LT(r.objective, 1e-12);
  EXPECT_LT(r.actor_grad.squared_norm(), 1e-20);
}

TEST(ActorUpdate, ObjectiveDecreasesWithFrozenCriticAndModel) {
  Rng rng(21);
  GdgConfig cfg;
  cfg.actor_lr = 1e-4;
  GdgAgent agent(unit_normalizer(2, 2), cfg, rng);
  const auto batch = random_batch(64, 2, 2, rng);
  const nn::Mlp<float> critic = agent.critic();
  const nn::Mlp<float> model = agent.model();
  double prev = std::numeric_limits<double>::infinity();
  for (int i = 0; i < 100; ++i) {
    const double j = agent.actor_update(batch);
    EXPECT_LT(j, prev) << "update " << i;
    prev = j;
  }
  EXPECT_EQ(agent.critic().params().layers[0].weight, critic.params().layers[0].weight);
  EXPECT_EQ(agent.model().params().layers[0].weight, model.params().layers[0].weight);
}

TEST(TrainStep, EmptyBufferIsPreconditionError) {
  Rng rng(22);
  GdgAgent agent(unit_normalizer(2, 2), {}, rng);
  ReplayBuffer buffer(100);
  EXPECT_THROW(agent.train_step(buffer, 8, rng), ContractError);
}

TEST(TrainStep, ZeroTauLeavesTargetCritic) {
  Rng rng(23);
  GdgConfig cfg;
  cfg.tau = 0.0;
  GdgAgent agent(unit_normalizer(2, 2), cfg, rng);
  ReplayBuffer buffer(100);
  for (auto& t : random_batch(50, 2, 2, rng)) buffer.push(t);
  const nn::Mlp<float> before = agent.target_critic();
  for (int i = 0; i < 5; ++i) agent.train_step(buffer, 16, rng);
  EXPECT_EQ(agent.target_critic().params().layers[0].weight, before.params().layers[0].weight);
  EXPECT_NE(agent.critic().params().layers[0].weight, before.params().layers[0].weight);
}

TEST(TrainStep, DeterministicLossSequence) {
  auto run = [] {
    Rng rng(24);
    GdgAgent agent(unit_normalizer(2, 2), {}, rng);
    ReplayBuffer buffer(100);
    for (auto& t : random_batch(60, 2, 2, rng)) buffer.push(t);
    std::vector<double> seq;
    for (int i = 0; i < 20; ++i) {
      const GdgLosses l = agent.train_step(buffer, 16, rng);
      seq.insert(seq.end(), {l.critic, l.anchor, l.model, l.actor});
    }
    return seq;
  };
  EXPECT_EQ(run(), run());
}

TEST(TrainStep, SoakOnFourRoomsStaysFiniteAndBounded) {
  const SoakResult r = four_rooms_soak(100000, 16, 25);
  EXPECT_TRUE(r.all_finite);
  EXPECT_LE(r.max_distance, r.d_max);
  EXPECT_LT(r.mean_self_distance, 0.25);
}

TEST(SoftUpdate, TargetGapContracts) {
  Rng rng(26);
  GdgAgent agent(unit_normalizer(2, 2), {}, rng);
  const nn::Mlp<float> online(agent.critic().layer_sizes(), nn::Activation::softplus, rng);
  nn::Mlp<float> target = agent.target_critic();
  auto gap = [&] {
    nn::ParamSet<float> d = target.params();
    d.add_scaled(online.params(), -1.0f);
    return d.squared_norm();
  };
  float prev = gap();
  for (int i = 0; i < 200; ++i) {
    nn::soft_update(target, online, 0.05);
    const float now = gap();
    EXPECT_LE(now, prev);
    prev = now;
  }
}

TEST(Checkpoint, RoundTripPreservesOutputs) {
  Rng rng(27);
  const envs::Environment env = envs::make_city_desk();
  GdgConfig cfg;
  cfg.distance_scale = 10.0;
  cfg.d_max = 150;
  const GdgAgent agent(env, cfg, rng);
  std::stringstream ss;
  agent.save(ss);
  const GdgAgent back = GdgAgent::load(ss);
  EXPECT_DOUBLE_EQ(back.config().distance_scale, 10.0);
  EXPECT_DOUBLE_EQ(back.config().d_max, 150.0);
  for (int i = 0; i < 50; ++i) {
    const RealVec s = env.sample_free(rng), g = env.sample_free(rng);
    EXPECT_EQ(agent.distance(s, g), back.distance(s, g));
    EXPECT_EQ(agent.policy(s, g), back.policy(s, g));
    EXPECT_EQ(agent.target_distance(s, g), back.target_distance(s, g));
    EXPECT_EQ(agent.predict(s, g - s), back.predict(s, g - s));
  }
}

TEST(Replay, EpisodeStoresStepsPlusAnchor) {
  ReplayBuffer buffer(1000);
  Trace trace;
  trace.states.push_back(v2(0, 0));
  for (int t = 0; t < 50; ++t) {
    trace.actions.push_back(v2(1, 0));
    trace.states.push_back(v2(t + 1.0, 0));
  }
  const RealVec goal = v2(49, 0);
  const auto pred = [](const RealVec& p, const RealVec& g) { return (p - g).norm() <= 1.5; };
  EXPECT_EQ(store_episode(buffer, trace, goal, pred), 51u);
  EXPECT_EQ(buffer.size(), 51u);
  EXPECT_FALSE(buffer.at(10).reached);
  EXPECT_TRUE(buffer.at(48).reached);
  const Transition& anchor = buffer.at(50);
  EXPECT_EQ(anchor.d, 0.0);
  EXPECT_TRUE(anchor.reached);
  EXPECT_EQ(anchor.s, anchor.s_next);
  EXPECT_EQ(anchor.g, anchor.s);
  EXPECT_EQ(anchor.a, v2(0, 0));
  for (std::size_t i = 0; i < 50; ++i) EXPECT_EQ(buffer.at(i).d, 1.0);
}

TEST(Replay, EvictsOldestAtCapacity) {
  ReplayBuffer buffer(5);
  for (int i = 0; i < 8; ++i) buffer.push({v2(i, 0), v2(0, 0), v2(i, 0), v2(0, 0), 1.0, false});
  EXPECT_EQ(buffer.size(), 5u);
  EXPECT_EQ(buffer.at(0).s(0), 3.0);
  EXPECT_EQ(buffer.at(4).s(0), 7.0);
}

TEST(Replay, SeededSamplingIsReproducible) {
  ReplayBuffer buffer(50);
  for (int i = 0; i < 50; ++i) buffer.push({v2(i, 0), v2(0, 0), v2(i, 0), v2(0, 0), 1.0, false});
  Rng a(3), b(3);
  const auto x = buffer.sample(20, a), y = buffer.sample(20, b);
  for (int i = 0; i < 20; ++i) EXPECT_EQ(x[i].s, y[i].s);
  EXPECT_THROW(ReplayBuffer(0), ContractError);
  EXPECT_THROW(ReplayBuffer(3).sample(1, a), ContractError);
}
