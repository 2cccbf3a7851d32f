#include "gdg/baselines/ddpg.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>

#include "gdg/errors.hpp"

namespace gdg::baselines {

namespace {

std::vector<int> with_ends(int in, const std::vector<int>& hidden, int out) {
  std::vector<int> sizes{in};
  sizes.insert(sizes.end(), hidden.begin(), hidden.end());
  sizes.push_back(out);
  return sizes;
}

void check_batch(const std::vector<Transition>& batch, int sd, int ad) {
  if (batch.empty()) throw ContractError("empty minibatch");
  for (const auto& t : batch) {
    if (t.s.size() != sd || t.s_next.size() != sd || t.g.size() != sd || t.a.size() != ad) {
      throw ContractError("transition dimension mismatch");
    }
  }
}

template <typename F>
std::vector<const RealVec*> column(const std::vector<Transition>& batch, F field) {
  std::vector<const RealVec*> out;
  out.reserve(batch.size());
  for (const auto& t : batch) out.push_back(&field(t));
  return out;
}

}  // namespace

double RewardSpec::reward(const Transition& t) const {
  if (mode == RewardMode::sparse) return t.reached ? 0.0 : -1.0;
  return -(t.s_next - t.g).norm();
}

DdpgAgent::DdpgAgent(const envs::Environment& env, DdpgConfig config, Rng& rng)
    : DdpgAgent(Normalizer::for_env(env), std::move(config), rng) {}

DdpgAgent::DdpgAgent(Normalizer norm, DdpgConfig config, Rng& rng)
    : norm_(std::move(norm)), config_(std::move(config)) {
  const int sd = norm_.state_dim();
  const int ad = norm_.action_dim();
  if (!(config_.gamma >= 0.0 && config_.gamma < 1.0)) throw ContractError("DDPG gamma must lie in [0, 1)");
  critic_ = nn::Mlp<float>(with_ends(2 * sd + ad, config_.hidden, 1), nn::Activation::identity, rng);
  actor_ = nn::Mlp<float>(with_ends(2 * sd, config_.hidden, ad), nn::Activation::tanh, rng);
  target_critic_ = critic_;
  target_actor_ = actor_;
  reset_optimizers();
}

void DdpgAgent::reset_optimizers() {
  critic_opt_ = nn::OptimizerState<float>::for_network(critic_, {config_.critic_lr});
  actor_opt_ = nn::OptimizerState<float>::for_network(actor_, {config_.actor_lr});
}

void DdpgAgent::sync_targets() {
  target_critic_ = critic_;
  target_actor_ = actor_;
}

nn::Matrix<float> DdpgAgent::pair_input(const std::vector<const RealVec*>& s,
                                        const std::vector<const RealVec*>& g) const {
  const int sd = state_dim();
  nn::Matrix<float> x(2 * sd, static_cast<Eigen::Index>(s.size()));
  norm_.states_into(s, x, 0);
  norm_.states_into(g, x, sd);
  return x;
}

RealVec DdpgAgent::policy(const RealVec& s, const RealVec& g) const {
  if (s.size() != state_dim() || g.size() != state_dim()) throw ContractError("policy: dimension mismatch");
  const RealVec u = actor_.forward(pair_input({&s}, {&g})).col(0).cast<double>();
  return norm_.action_from_unit(u);
}

RealVec DdpgAgent::act(const RealVec& s, const RealVec& g, double noise_scale, double explore_prob,
                       Rng& rng) const {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const int ad = action_dim();
  RealVec a(ad);
  if (explore_prob > 0.0 && unit(rng) < explore_prob) {
    for (int i = 0; i < ad; ++i) a(i) = norm_.action_center(i) + norm_.action_half(i) * (2.0 * unit(rng) - 1.0);
    return a;
  }
  a = policy(s, g);
  if (noise_scale > 0.0) {
    std::normal_distribution<double> noise(0.0, noise_scale);
    for (int i = 0; i < ad; ++i) a(i) += noise(rng);
  }
  for (int i = 0; i < ad; ++i) {
    a(i) = std::clamp(a(i), norm_.action_center(i) - norm_.action_half(i),
                      norm_.action_center(i) + norm_.action_half(i));
  }
  return a;
}

double DdpgAgent::q_value(const RealVec& s, const RealVec& g, const RealVec& a) const {
  const int sd = state_dim();
  nn::Matrix<float> x(2 * sd + action_dim(), 1);
  norm_.states_into({&s}, x, 0);
  norm_.states_into({&g}, x, sd);
  norm_.actions_into({&a}, x, 2 * sd);
  return static_cast<double>(critic_.forward(x)(0, 0));
}

std::vector<double> DdpgAgent::critic_targets(const std::vector<Transition>& batch, const RewardSpec& reward) const {
  check_batch(batch, state_dim(), action_dim());
  const int sd = state_dim();
  const int ad = action_dim();
  const Eigen::Index n = static_cast<Eigen::Index>(batch.size());
  const auto sn = column(batch, [](const Transition& t) -> const RealVec& { return t.s_next; });
  const auto g = column(batch, [](const Transition& t) -> const RealVec& { return t.g; });
  const nn::Matrix<float> next_in = pair_input(sn, g);
  const nn::Matrix<float> u = target_actor_.forward(next_in);
  nn::Matrix<float> q_in(2 * sd + ad, n);
  q_in.topRows(2 * sd) = next_in;
  q_in.bottomRows(ad) = u;
  const nn::Matrix<float> q_next = target_critic_.forward(q_in);
  const double floor = -1.0 / (1.0 - config_.gamma);
  std::vector<double> y(batch.size());
  for (std::size_t i = 0; i < batch.size(); ++i) {
    const double r = reward.reward(batch[i]);
    double target = r;
    if (!batch[i].reached) target += config_.gamma * static_cast<double>(q_next(0, static_cast<Eigen::Index>(i)));
    if (reward.mode == RewardMode::sparse && config_.clip_sparse_targets) target = std::clamp(target, floor, 0.0);
    y[i] = target;
  }
  return y;
}

double DdpgAgent::critic_update(const std::vector<Transition>& batch, const RewardSpec& reward) {
  const std::vector<double> y = critic_targets(batch, reward);
  const int sd = state_dim();
  const Eigen::Index n = static_cast<Eigen::Index>(batch.size());
  nn::Matrix<float> x(2 * sd + action_dim(), n);
  norm_.states_into(column(batch, [](const Transition& t) -> const RealVec& { return t.s; }), x, 0);
  norm_.states_into(column(batch, [](const Transition& t) -> const RealVec& { return t.g; }), x, sd);
  norm_.actions_into(column(batch, [](const Transition& t) -> const RealVec& { return t.a; }), x, 2 * sd);
  nn::Tape<float> tape;
  const nn::Matrix<float> q = critic_.forward(x, tape);
  nn::Matrix<float> up(1, n);
  double loss = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double err = static_cast<double>(q(0, i)) - y[static_cast<std::size_t>(i)];
    loss += err * err;
    up(0, i) = static_cast<float>(2.0 * err / static_cast<double>(n));
  }
  loss /= static_cast<double>(n);
  if (!std::isfinite(loss)) throw NumericalError("ddpg critic: non-finite loss, update skipped");
  nn::ParamSet<float> grads = critic_.zero_like();
  critic_.backward(tape, up, &grads);
  nn::opt_step(critic_, grads, critic_opt_);
  return loss;
}

double DdpgAgent::actor_update(const std::vector<Transition>& batch) {
  check_batch(batch, state_dim(), action_dim());
  const int sd = state_dim();
  const int ad = action_dim();
  const Eigen::Index n = static_cast<Eigen::Index>(batch.size());
  const auto s = column(batch, [](const Transition& t) -> const RealVec& { return t.s; });
  const auto g = column(batch, [](const Transition& t) -> const RealVec& { return t.g; });
  const nn::Matrix<float> in = pair_input(s, g);
  nn::Tape<float> actor_tape;
  const nn::Matrix<float> u = actor_.forward(in, actor_tape);
  nn::Matrix<float> q_in(2 * sd + ad, n);
  q_in.topRows(2 * sd) = in;
  q_in.bottomRows(ad) = u;
  nn::Tape<float> critic_tape;
  const nn::Matrix<float> q = critic_.forward(q_in, critic_tape);
  const double objective = static_cast<double>(q.sum()) / static_cast<double>(n);
  if (!std::isfinite(objective)) throw NumericalError("ddpg actor: non-finite objective, update skipped");
  // descend −Q
  const nn::Matrix<float> up = nn::Matrix<float>::Constant(1, n, -1.0f / static_cast<float>(n));
  const nn::Matrix<float> dq_in = critic_.backward(critic_tape, up, nullptr);
  nn::ParamSet<float> grads = actor_.zero_like();
  actor_.backward(actor_tape, dq_in.bottomRows(ad), &grads);
  nn::opt_step(actor_, grads, actor_opt_);
  return objective;
}

DdpgLosses DdpgAgent::train_step(const ReplayBuffer& buffer, std::size_t batch_size, const RewardSpec& reward,
                                 Rng& rng) {
  if (batch_size == 0 || buffer.size() < batch_size) {
    throw ContractError("train_step: replay buffer holds fewer items than the batch size");
  }
  const std::vector<Transition> batch = buffer.sample(batch_size, rng);
  DdpgLosses l;
  l.critic = critic_update(batch, reward);
  l.actor = actor_update(batch);
  nn::soft_update(target_critic_, critic_, config_.tau);
  nn::soft_update(target_actor_, actor_, config_.tau);
  return l;
}

void DdpgAgent::save(std::ostream& os) const {
  os << "ddpg-agent 1\n";
  os.precision(17);
  os << "dims " << state_dim() << ' ' << action_dim() << '\n';
  os << "tau " << config_.tau << "\ngamma " << config_.gamma << "\nclip " << (config_.clip_sparse_targets ? 1 : 0)
     << "\nlr " << config_.critic_lr << ' ' << config_.actor_lr << '\n';
  os << "hidden " << config_.hidden.size();
  for (int h : config_.hidden) os << ' ' << h;
  os << '\n';
  auto vec = [&](const char* tag, const RealVec& v) {
    os << tag;
    for (Eigen::Index i = 0; i < v.size(); ++i) os << ' ' << v(i);
    os << '\n';
  };
  vec("state_center", norm_.state_center);
  vec("state_half", norm_.state_half);
  vec("action_center", norm_.action_center);
  vec("action_half", norm_.action_half);
  critic_.save(os);
  target_critic_.save(os);
  actor_.save(os);
  target_actor_.save(os);
}

DdpgAgent DdpgAgent::load(std::istream& is) {
  auto expect = [&](const std::string& word) {
    std::string tok;
    if (!(is >> tok) || tok != word) throw ContractError("ddpg checkpoint: expected " + word);
  };
  expect("ddpg-agent");
  int version = 0;
  is >> version;
  if (version != 1) throw ContractError("ddpg checkpoint: unsupported version");
  int sd = 0, ad = 0, clip = 1;
  DdpgConfig cfg;
  expect("dims");
  is >> sd >> ad;
  expect("tau");
  is >> cfg.tau;
  expect("gamma");
  is >> cfg.gamma;
  expect("clip");
  is >> clip;
  cfg.clip_sparse_targets = clip != 0;
  expect("lr");
  is >> cfg.critic_lr >> cfg.actor_lr;
  expect("hidden");
  std::size_t nh = 0;
  is >> nh;
  cfg.hidden.assign(nh, 0);
  for (auto& h : cfg.hidden) is >> h;
  auto vec = [&](const char* tag, int n) {
    expect(tag);
    RealVec v(n);
    for (int i = 0; i < n; ++i) is >> v(i);
    return v;
  };
  Normalizer norm;
  norm.state_center = vec("state_center", sd);
  norm.state_half = vec("state_half", sd);
  norm.action_center = vec("action_center", ad);
  norm.action_half = vec("action_half", ad);
  if (!is) throw ContractError("ddpg checkpoint: truncated header");
  Rng rng(0);
  DdpgAgent agent(norm, cfg, rng);
  agent.critic_ = nn::Mlp<float>::load(is);
  agent.target_critic_ = nn::Mlp<float>::load(is);
  agent.actor_ = nn::Mlp<float>::load(is);
  agent.target_actor_ = nn::Mlp<float>::load(is);
  agent.reset_optimizers();
  return agent;
}

std::vector<Transition> her_relabel(const Trace& trace, const RealVec& goal, int k_future,
                                    const GoalPredicate& reached, Rng& rng) {
  if (k_future < 0) throw ContractError("her_relabel: k_future must be non-negative");
  const std::size_t T = trace.steps();
  std::vector<Transition> out = episode_transitions(trace, goal, reached);
  if (k_future == 0) return out;
  std::vector<Transition> all;
  all.reserve(T * (1 + static_cast<std::size_t>(k_future)));
  for (std::size_t t = 0; t < T; ++t) {
    all.push_back(out[t]);
    std::uniform_int_distribution<std::size_t> future(t + 1, T);
    for (int k = 0; k < k_future; ++k) {
      const RealVec& achieved = trace.states[future(rng)];
      all.push_back({trace.states[t], trace.actions[t], trace.states[t + 1], achieved, 1.0,
                     reached(trace.states[t + 1], achieved)});
    }
  }
  return all;
}

RealVec random_policy(const envs::EnvSpec& spec, Rng& rng) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  RealVec a(spec.action_dim);
  for (int i = 0; i < spec.action_dim; ++i) {
    const auto& b = spec.action_box[static_cast<std::size_t>(i)];
    a(i) = b.lo + (b.hi - b.lo) * unit(rng);
  }
  return a;
}

}  // namespace gdg::baselines
