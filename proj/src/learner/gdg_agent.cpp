#include "gdg/learner/gdg_agent.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>

#include "gdg/errors.hpp"

namespace gdg {

Normalizer Normalizer::for_env(const envs::Environment& env) {
  Normalizer n;
  n.state_center = (env.lower() + env.upper()) / 2.0;
  n.state_half = (env.upper() - env.lower()) / 2.0;
  const auto& box = env.spec().action_box;
  n.action_center.resize(static_cast<Eigen::Index>(box.size()));
  n.action_half.resize(static_cast<Eigen::Index>(box.size()));
  for (std::size_t i = 0; i < box.size(); ++i) {
    n.action_center(i) = (box[i].lo + box[i].hi) / 2.0;
    n.action_half(i) = (box[i].hi - box[i].lo) / 2.0;
  }
  return n;
}

RealVec Normalizer::action_from_unit(const RealVec& u) const {
  return action_center + action_half.cwiseProduct(u);
}

namespace {

std::vector<int> with_ends(int in, const std::vector<int>& hidden, int out) {
  std::vector<int> sizes{in};
  sizes.insert(sizes.end(), hidden.begin(), hidden.end());
  sizes.push_back(out);
  return sizes;
}

void check_finite(double loss, const char* what) {
  if (!std::isfinite(loss)) throw NumericalError(std::string(what) + ": non-finite loss, update skipped");
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

nn::Vector<float> to_float(const RealVec& v) { return v.cast<float>(); }

}  // namespace

GdgAgent::GdgAgent(const envs::Environment& env, GdgConfig config, Rng& rng)
    : GdgAgent(Normalizer::for_env(env), std::move(config), rng) {}

GdgAgent::GdgAgent(Normalizer norm, GdgConfig config, Rng& rng)
    : norm_(std::move(norm)), config_(std::move(config)) {
  const int sd = norm_.state_dim();
  const int ad = norm_.action_dim();
  if (!(config_.d_max > 0.0) || !(config_.distance_scale > 0.0)) {
    throw ContractError("GdgConfig: d_max and distance_scale must be positive");
  }
  critic_ = nn::Mlp<float>(with_ends(2 * sd, config_.hidden, 1), nn::Activation::softplus, rng);
  target_critic_ = critic_;
  model_ = nn::Mlp<float>(with_ends(sd + ad, config_.hidden, sd), nn::Activation::identity, rng);
  actor_ = nn::Mlp<float>(with_ends(2 * sd, config_.hidden, ad), nn::Activation::tanh, rng);
  reset_optimizers();
}

void GdgAgent::reset_optimizers() {
  critic_opt_ = nn::OptimizerState<float>::for_network(critic_, {config_.critic_lr});
  model_opt_ = nn::OptimizerState<float>::for_network(model_, {config_.model_lr});
  actor_opt_ = nn::OptimizerState<float>::for_network(actor_, {config_.actor_lr});
}

nn::Matrix<float> GdgAgent::pair_input(const std::vector<const RealVec*>& s,
                                       const std::vector<const RealVec*>& g) const {
  const int sd = state_dim();
  nn::Matrix<float> x(2 * sd, static_cast<Eigen::Index>(s.size()));
  norm_.states_into(s, x, 0);
  norm_.states_into(g, x, sd);
  return x;
}

RealVec GdgAgent::policy(const RealVec& s, const RealVec& g) const {
  if (s.size() != state_dim() || g.size() != state_dim()) throw ContractError("policy: dimension mismatch");
  const nn::Matrix<float> x = pair_input({&s}, {&g});
  const RealVec u = actor_.forward(x).col(0).cast<double>();
  return norm_.action_from_unit(u);
}

RealVec GdgAgent::act(const RealVec& s, const RealVec& g, double noise_scale, double explore_prob,
                      Rng& rng) const {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const int ad = action_dim();
  RealVec a(ad);
  if (explore_prob > 0.0 && unit(rng) < explore_prob) {
    for (int i = 0; i < ad; ++i) {
      a(i) = norm_.action_center(i) + norm_.action_half(i) * (2.0 * unit(rng) - 1.0);
    }
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

std::vector<double> GdgAgent::distances(const std::vector<RealVec>& s, const std::vector<RealVec>& g) const {
  if (s.size() != g.size()) throw ContractError("distances: batch size mismatch");
  std::vector<double> out(s.size());
  if (s.empty()) return out;
  if (config_.analytic_distance) {
    for (std::size_t i = 0; i < s.size(); ++i) out[i] = (s[i] - g[i]).norm();
    return out;
  }
  std::vector<const RealVec*> sp, gp;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i].size() != state_dim() || g[i].size() != state_dim()) throw ContractError("distances: dimension mismatch");
    sp.push_back(&s[i]);
    gp.push_back(&g[i]);
  }
  const nn::Matrix<float> y = critic_.forward(pair_input(sp, gp));
  for (std::size_t i = 0; i < s.size(); ++i) {
    out[i] = std::min(config_.distance_scale * static_cast<double>(y(0, static_cast<Eigen::Index>(i))), config_.d_max);
  }
  return out;
}

double GdgAgent::distance(const RealVec& s, const RealVec& g) const { return distances({s}, {g}).front(); }

double GdgAgent::target_distance(const RealVec& s, const RealVec& g) const {
  if (config_.analytic_distance) return (s - g).norm();
  const nn::Matrix<float> y = target_critic_.forward(pair_input({&s}, {&g}));
  return std::min(config_.distance_scale * static_cast<double>(y(0, 0)), config_.d_max);
}

RealVec GdgAgent::predict(const RealVec& s, const RealVec& a) const {
  const int sd = state_dim();
  nn::Matrix<float> x(sd + action_dim(), 1);
  norm_.states_into({&s}, x, 0);
  norm_.actions_into({&a}, x, sd);
  return s + model_.forward(x).col(0).cast<double>();
}

std::vector<double> GdgAgent::td_distance_target(const std::vector<Transition>& batch) const {
  check_batch(batch, state_dim(), action_dim());
  std::vector<double> x(batch.size());
  std::vector<double> boot(batch.size(), 0.0);
  if (config_.analytic_distance) {
    for (std::size_t i = 0; i < batch.size(); ++i) boot[i] = (batch[i].s_next - batch[i].g).norm();
  } else {
    const auto sn = column(batch, [](const Transition& t) -> const RealVec& { return t.s_next; });
    const auto g = column(batch, [](const Transition& t) -> const RealVec& { return t.g; });
    const nn::Matrix<float> y = target_critic_.forward(pair_input(sn, g));
    for (std::size_t i = 0; i < batch.size(); ++i) {
      boot[i] = config_.distance_scale * static_cast<double>(y(0, static_cast<Eigen::Index>(i)));
    }
  }
  for (std::size_t i = 0; i < batch.size(); ++i) {
    const double raw = batch[i].reached ? batch[i].d : batch[i].d + config_.gamma_d * boot[i];
    x[i] = std::clamp(raw, 0.0, config_.d_max);
  }
  return x;
}

double GdgAgent::scaled_distance_regression(const nn::Matrix<float>& input, const std::vector<double>& target) {
  const Eigen::Index n = input.cols();
  const float scale = static_cast<float>(config_.distance_scale);
  nn::Tape<float> tape;
  const nn::Matrix<float> y = critic_.forward(input, tape);
  nn::Matrix<float> up(1, n);
  double loss = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double err = static_cast<double>(scale * y(0, i)) - target[static_cast<std::size_t>(i)];
    loss += err * err;
    up(0, i) = static_cast<float>(2.0 * err * config_.distance_scale / static_cast<double>(n));
  }
  loss /= static_cast<double>(n);
  check_finite(loss, "critic");
  nn::ParamSet<float> grads = critic_.zero_like();
  critic_.backward(tape, up, &grads);
  nn::opt_step(critic_, grads, critic_opt_);
  return loss;
}

double GdgAgent::critic_update(const std::vector<Transition>& batch) {
  const std::vector<double> x = td_distance_target(batch);
  if (config_.analytic_distance) return 0.0;
  const auto s = column(batch, [](const Transition& t) -> const RealVec& { return t.s; });
  const auto g = column(batch, [](const Transition& t) -> const RealVec& { return t.g; });
  return scaled_distance_regression(pair_input(s, g), x);
}

double GdgAgent::anchor_update(const std::vector<RealVec>& states) {
  if (states.empty()) throw ContractError("anchor_update: empty batch");
  if (config_.analytic_distance) return 0.0;
  std::vector<const RealVec*> s;
  for (const auto& v : states) {
    if (v.size() != state_dim()) throw ContractError("anchor_update: dimension mismatch");
    s.push_back(&v);
  }
  return scaled_distance_regression(pair_input(s, s), std::vector<double>(states.size(), 0.0));
}

double GdgAgent::model_update(const std::vector<Transition>& batch) {
  check_batch(batch, state_dim(), action_dim());
  const int sd = state_dim();
  const Eigen::Index n = static_cast<Eigen::Index>(batch.size());
  nn::Matrix<float> x(sd + action_dim(), n);
  norm_.states_into(column(batch, [](const Transition& t) -> const RealVec& { return t.s; }), x, 0);
  norm_.actions_into(column(batch, [](const Transition& t) -> const RealVec& { return t.a; }), x, sd);
  nn::Tape<float> tape;
  const nn::Matrix<float> delta = model_.forward(x, tape);
  nn::Matrix<float> up(sd, n);
  double loss = 0.0;
  for (Eigen::Index c = 0; c < n; ++c) {
    const auto& t = batch[static_cast<std::size_t>(c)];
    for (int r = 0; r < sd; ++r) {
      const double err = t.s(r) + static_cast<double>(delta(r, c)) - t.s_next(r);
      loss += err * err;
      up(r, c) = static_cast<float>(2.0 * err / static_cast<double>(n));
    }
  }
  loss /= static_cast<double>(n);
  check_finite(loss, "model");
  nn::ParamSet<float> grads = model_.zero_like();
  model_.backward(tape, up, &grads);
  nn::opt_step(model_, grads, model_opt_);
  return loss;
}

CompositeBatch<float> GdgAgent::composite_batch(const std::vector<Transition>& batch) const {
  check_batch(batch, state_dim(), action_dim());
  const int sd = state_dim();
  const Eigen::Index n = static_cast<Eigen::Index>(batch.size());
  const auto s = column(batch, [](const Transition& t) -> const RealVec& { return t.s; });
  const auto g = column(batch, [](const Transition& t) -> const RealVec& { return t.g; });
  CompositeBatch<float> cb;
  cb.actor_input = pair_input(s, g);
  cb.state_norm = cb.actor_input.topRows(sd);
  cb.goal_norm = cb.actor_input.bottomRows(sd);
  cb.state_raw.resize(sd, n);
  cb.goal_raw.resize(sd, n);
  for (Eigen::Index c = 0; c < n; ++c) {
    cb.state_raw.col(c) = to_float(*s[static_cast<std::size_t>(c)]);
    cb.goal_raw.col(c) = to_float(*g[static_cast<std::size_t>(c)]);
  }
  cb.state_center = to_float(norm_.state_center);
  cb.state_half = to_float(norm_.state_half);
  return cb;
}

CompositeResult<float> GdgAgent::actor_objective(const std::vector<Transition>& batch) const {
  const DistanceHead head = config_.analytic_distance ? DistanceHead::euclidean : DistanceHead::learned;
  return goal_distance_gradient<float>(actor_, model_, &critic_, head,
                                       static_cast<float>(config_.distance_scale), composite_batch(batch));
}

double GdgAgent::actor_update(const std::vector<Transition>& batch) {
  CompositeResult<float> r = actor_objective(batch);
  check_finite(r.objective, "actor");
  nn::opt_step(actor_, r.actor_grad, actor_opt_);
  return r.objective;
}

GdgLosses GdgAgent::train_step(const ReplayBuffer& buffer, std::size_t batch_size, Rng& rng) {
  if (batch_size == 0 || buffer.size() < batch_size) {
    throw ContractError("train_step: replay buffer holds fewer items than the batch size");
  }
  const std::vector<Transition> batch = buffer.sample(batch_size, rng);
  std::vector<RealVec> states;
  states.reserve(batch.size());
  for (const auto& t : batch) states.push_back(t.s);
  GdgLosses l;
  l.critic = critic_update(batch);
  l.anchor = anchor_update(states);
  l.model = model_update(batch);
  l.actor = actor_update(batch);
  nn::soft_update(target_critic_, critic_, config_.tau);
  return l;
}

void GdgAgent::save(std::ostream& os) const {
  os << "gdg-agent 1\n";
  os.precision(17);
  os << "dims " << state_dim() << ' ' << action_dim() << '\n';
  os << "tau " << config_.tau << "\ngamma_d " << config_.gamma_d << "\nd_max " << config_.d_max
     << "\ndistance_scale " << config_.distance_scale << "\nanalytic " << (config_.analytic_distance ? 1 : 0)
     << "\nlr " << config_.critic_lr << ' ' << config_.actor_lr << ' ' << config_.model_lr << '\n';
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
  model_.save(os);
  actor_.save(os);
}

GdgAgent GdgAgent::load(std::istream& is) {
  auto expect = [&](const std::string& word) {
    std::string tok;
    if (!(is >> tok) || tok != word) throw ContractError("agent checkpoint: expected " + word);
  };
  expect("gdg-agent");
  int version = 0;
  is >> version;
  if (version != 1) throw ContractError("agent checkpoint: unsupported version");
  int sd = 0, ad = 0;
  expect("dims");
  is >> sd >> ad;
  GdgConfig cfg;
  int analytic = 0;
  expect("tau");
  is >> cfg.tau;
  expect("gamma_d");
  is >> cfg.gamma_d;
  expect("d_max");
  is >> cfg.d_max;
  expect("distance_scale");
  is >> cfg.distance_scale;
  expect("analytic");
  is >> analytic;
  cfg.analytic_distance = analytic != 0;
  expect("lr");
  is >> cfg.critic_lr >> cfg.actor_lr >> cfg.model_lr;
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
  if (!is) throw ContractError("agent checkpoint: truncated header");
  Rng rng(0);
  GdgAgent agent(norm, cfg, rng);
  agent.critic_ = nn::Mlp<float>::load(is);
  agent.target_critic_ = nn::Mlp<float>::load(is);
  agent.model_ = nn::Mlp<float>::load(is);
  agent.actor_ = nn::Mlp<float>::load(is);
  agent.reset_optimizers();
  return agent;
}

}  // namespace gdg
