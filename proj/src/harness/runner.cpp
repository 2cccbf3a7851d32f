#include "gdg/harness/runner.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <string>

#include "gdg/baselines/ddpg.hpp"
#include "gdg/errors.hpp"
#include "gdg/harness/seeding.hpp"
#include "gdg/learner/gdg_agent.hpp"

namespace gdg::harness {

namespace {

GoalPredicate predicate_of(const envs::Environment& env) {
  return [&env](const RealVec& p, const RealVec& g) { return env.goal_reached(p, g); };
}

class GdgRunner final : public Agent {
 public:
  GdgRunner(const RunConfig& cfg, GdgAgent agent)
      : method_(cfg.method), batch_(static_cast<std::size_t>(cfg.batch_size)),
        agent_(std::move(agent)), buffer_(cfg.buffer_capacity) {}

  Method method() const override { return method_; }

  RealVec explore(const RealVec& s, const RealVec& g, double noise, double p, Rng& rng) const override {
    return agent_.act(s, g, noise, p, rng);
  }
  RealVec greedy(const RealVec& s, const RealVec& g, Rng&) const override { return agent_.policy(s, g); }

  std::size_t observe(const Trace& trace, const RealVec& goal, const envs::Environment& env, Rng&) override {
    return store_episode(buffer_, trace, goal, predicate_of(env));
  }

  int train(int steps, Rng& rng) override {
    if (buffer_.size() < batch_) return 0;
    for (int i = 0; i < steps; ++i) agent_.train_step(buffer_, batch_, rng);
    return steps;
  }

  std::optional<planner::DistanceFn> distance_fn() const override {
    return [this](const std::vector<RealVec>& a, const std::vector<RealVec>& b) { return agent_.distances(a, b); };
  }
  const ReplayBuffer* buffer() const override { return &buffer_; }

  void save(std::ostream& os) const override { agent_.save(os); }

 private:
  Method method_;
  std::size_t batch_;
  GdgAgent agent_;
  ReplayBuffer buffer_;
};

class DdpgRunner final : public Agent {
 public:
  DdpgRunner(const RunConfig& cfg, baselines::DdpgAgent agent)
      : method_(cfg.method), batch_(static_cast<std::size_t>(cfg.batch_size)),
        her_k_(cfg.method == Method::her ? cfg.her_k : 0), agent_(std::move(agent)),
        buffer_(cfg.buffer_capacity) {
    reward_.mode = cfg.method == Method::ddpg_dense ? baselines::RewardMode::dense_negative_distance
                                                    : baselines::RewardMode::sparse;
  }

  Method method() const override { return method_; }

  RealVec explore(const RealVec& s, const RealVec& g, double noise, double p, Rng& rng) const override {
    return agent_.act(s, g, noise, p, rng);
  }
  RealVec greedy(const RealVec& s, const RealVec& g, Rng&) const override { return agent_.policy(s, g); }

  std::size_t observe(const Trace& trace, const RealVec& goal, const envs::Environment& env, Rng& rng) override {
    auto items = her_k_ > 0 ? baselines::her_relabel(trace, goal, her_k_, predicate_of(env), rng)
                            : episode_transitions(trace, goal, predicate_of(env));
    const std::size_t n = items.size();
    for (auto& t : items) buffer_.push(std::move(t));
    return n;
  }

  int train(int steps, Rng& rng) override {
    if (buffer_.size() < batch_) return 0;
    for (int i = 0; i < steps; ++i) agent_.train_step(buffer_, batch_, reward_, rng);
    return steps;
  }

  const ReplayBuffer* buffer() const override { return &buffer_; }
  void save(std::ostream& os) const override { agent_.save(os); }

 private:
  Method method_;
  std::size_t batch_;
  int her_k_;
  baselines::DdpgAgent agent_;
  ReplayBuffer buffer_;
  baselines::RewardSpec reward_;
};

class RandomRunner final : public Agent {
 public:
  explicit RandomRunner(envs::EnvSpec spec) : spec_(std::move(spec)) {}

  Method method() const override { return Method::random; }
  RealVec explore(const RealVec&, const RealVec&, double, double, Rng& rng) const override {
    return baselines::random_policy(spec_, rng);
  }
  RealVec greedy(const RealVec&, const RealVec&, Rng& rng) const override {
    return baselines::random_policy(spec_, rng);
  }
  std::size_t observe(const Trace&, const RealVec&, const envs::Environment&, Rng&) override { return 0; }
  int train(int, Rng&) override { return 0; }
  void save(std::ostream& os) const override { os << "random-agent 1\n" << spec_.action_dim << '\n'; }

 private:
  envs::EnvSpec spec_;
};

bool is_gdg(Method m) { return m == Method::gdg || m == Method::gdg_bridge; }

}  // namespace

std::unique_ptr<Agent> make_agent(const RunConfig& cfg, const envs::Environment& env, Rng& rng) {
  if (is_gdg(cfg.method)) return std::make_unique<GdgRunner>(cfg, GdgAgent(env, cfg.gdg, rng));
  if (cfg.method == Method::random) return std::make_unique<RandomRunner>(env.spec());
  return std::make_unique<DdpgRunner>(cfg, baselines::DdpgAgent(env, cfg.ddpg, rng));
}

std::unique_ptr<Agent> load_agent(const RunConfig& cfg, std::istream& is) {
  if (is_gdg(cfg.method)) return std::make_unique<GdgRunner>(cfg, GdgAgent::load(is));
  if (cfg.method == Method::random) {
    const envs::Environment env = envs::make_env(cfg.env);
    return std::make_unique<RandomRunner>(env.spec());
  }
  return std::make_unique<DdpgRunner>(cfg, baselines::DdpgAgent::load(is));
}

std::vector<envs::Task> sample_tasks(const envs::Environment& env, int count, std::uint64_t seed) {
  Rng rng = derive_rng(seed, "eval-tasks");
  std::vector<envs::Task> tasks;
  tasks.reserve(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) {
    const envs::EnvState s = env.reset(rng);
    tasks.push_back({s.position, s.goal});
  }
  return tasks;
}

namespace {

planner::BridgePlan plan_for(const Agent& agent, const envs::Environment& env, const RealVec& start,
                             const RealVec& goal, const BridgeConfig& bridge, Rng& rng) {
  const auto distance = agent.distance_fn();
  if (!distance) return {};
  const ReplayBuffer* buffer = agent.buffer();
  const planner::CandidateSource source = buffer && !buffer->empty()
                                              ? planner::CandidateSource::from_replay(*buffer, bridge.candidates)
                                              : planner::CandidateSource::from_free_space(env, bridge.candidates);
  return planner::plan_waypoints(*distance, start, goal, bridge.depth, source, rng, {bridge.margin});
}

}  // namespace

EvalSlice evaluate(const Agent& agent, const envs::Environment& env, const std::vector<envs::Task>& tasks,
                   const EvalOptions& options) {
  if (options.budget < 1) throw ContractError("evaluate: budget must be at least 1");
  EvalSlice out;
  double distance_sum = 0.0;
  for (std::size_t i = 0; i < tasks.size(); ++i) {
    Rng rng = derive_rng(options.seed, "eval", i);
    envs::EnvState state = env.reset(rng, tasks[i]);
    planner::BridgePlan plan;
    if (options.use_bridge) plan = plan_for(agent, env, state.position, state.goal, options.bridge, rng);
    planner::WaypointSelector selector(plan, state.goal, env.spec().goal_radius);
    std::vector<RealVec> path{state.position};
    TaskOutcome o;
    o.task = static_cast<int>(i);
    o.waypoints = plan.waypoints.size();
    bool reached = env.goal_reached(state.position, state.goal);
    while (!reached && state.steps_taken < options.budget) {
      const RealVec& cmd = selector.commanded_goal(state.position);
      const RealVec a = agent.greedy(state.position, cmd, rng);
      envs::StepResult r = env.step(state, a);
      state = std::move(r.state);
      reached = r.reached;
      if (options.record_trajectories) path.push_back(state.position);
    }
    o.success = reached;
    o.steps = state.steps_taken;
    o.final_distance = (state.position - state.goal).norm();
    distance_sum += o.final_distance;
    out.successes += reached ? 1 : 0;
    out.outcomes.push_back(o);
    if (options.record_trajectories) {
      out.trajectories.push_back(std::move(path));
      out.plans.push_back(std::move(plan));
    }
  }
  out.tasks = static_cast<int>(tasks.size());
  if (out.tasks > 0) {
    out.success_rate = static_cast<double>(out.successes) / out.tasks;
    out.mean_final_distance = distance_sum / out.tasks;
  }
  return out;
}

std::vector<BucketRow> distance_bucket_eval(const Agent& agent, const envs::Environment& env,
                                            const std::vector<int>& distances, int tasks_per_bucket,
                                            const std::vector<std::uint64_t>& seeds, const EvalOptions& options) {
  if (!env.has_grid()) throw ContractError("distance buckets need a grid environment");
  const auto& grid = env.grid();
  const auto cells = grid.free_cells();
  std::vector<BucketRow> rows;
  for (std::uint64_t seed : seeds) {
    for (std::size_t b = 0; b < distances.size(); ++b) {
      const int target = distances[b];
      const int slack = static_cast<int>(std::floor(0.05 * target));
      Rng rng = derive_rng(seed, "buckets", b);
      std::uniform_int_distribution<std::size_t> pick(0, cells.size() - 1);
      std::vector<envs::Task> tasks;
      int failures = 0;
      while (static_cast<int>(tasks.size()) < tasks_per_bucket && failures < 1000) {
        const envs::Cell from = cells[pick(rng)];
        const auto dist = grid.bfs_from(from);
        std::vector<envs::Cell> matches;
        for (const auto& c : cells) {
          const int d = dist[grid.index(c)];
          if (d != envs::kUnreachable && std::abs(d - target) <= slack) matches.push_back(c);
        }
        if (matches.empty()) {
          ++failures;
          continue;
        }
        std::uniform_int_distribution<std::size_t> choose(0, matches.size() - 1);
        tasks.push_back({env.cell_center(from), env.cell_center(matches[choose(rng)])});
      }
      BucketRow row;
      row.distance = target;
      row.seed = seed;
      if (static_cast<int>(tasks.size()) < tasks_per_bucket) {
        row.satisfiable = false;
        rows.push_back(row);
        continue;
      }
      EvalOptions opt = options;
      opt.seed = derive_seed(seed, "bucket-eval", b);
      opt.record_trajectories = false;
      const EvalSlice slice = evaluate(agent, env, tasks, opt);
      row.success_rate = slice.success_rate;
      row.tasks = slice.tasks;
      rows.push_back(row);
    }
  }
  return rows;
}

std::vector<BucketBand> bucket_bands(const std::vector<BucketRow>& rows) {
  std::vector<BucketBand> bands;
  for (const auto& r : rows) {
    if (!r.satisfiable) continue;
    auto it = std::find_if(bands.begin(), bands.end(), [&](const BucketBand& b) { return b.distance == r.distance; });
    if (it == bands.end()) {
      bands.push_back({r.distance, r.success_rate, r.success_rate, r.success_rate, 1});
    } else {
      it->mean += r.success_rate;
      it->min = std::min(it->min, r.success_rate);
      it->max = std::max(it->max, r.success_rate);
      it->seeds += 1;
    }
  }
  for (auto& b : bands) b.mean /= b.seeds;
  return bands;
}

TrainingResult run_training(const RunConfig& cfg) {
  validate(cfg);
  const envs::Environment env = envs::make_env(cfg.env);
  Rng init_rng = derive_rng(cfg.seed, "init");
  Rng env_rng = derive_rng(cfg.seed, "env");
  Rng act_rng = derive_rng(cfg.seed, "act");
  Rng train_rng = derive_rng(cfg.seed, "train");
  Rng plan_rng = derive_rng(cfg.seed, "plan");

  TrainingResult result;
  result.agent = make_agent(cfg, env, init_rng);
  Agent& agent = *result.agent;
  EvalReport& report = result.report;
  report.method = to_string(cfg.method);
  report.seed = cfg.seed;

  const std::vector<envs::Task> tasks = sample_tasks(env, cfg.eval_tasks, cfg.eval_seed);
  EvalOptions eval_opt;
  eval_opt.budget = cfg.eval_budget;
  eval_opt.use_bridge = cfg.method == Method::gdg_bridge && cfg.bridge.at_eval;
  eval_opt.bridge = cfg.bridge;
  eval_opt.seed = cfg.eval_seed;

  auto record_eval = [&](int episodes, bool last) {
    EvalOptions opt = eval_opt;
    opt.record_trajectories = last && cfg.render_tasks > 0;
    const EvalSlice slice = evaluate(agent, env, tasks, opt);
    report.curve.push_back({episodes, slice.success_rate, slice.mean_final_distance, slice.successes, slice.tasks});
    if (last) {
      report.final_outcomes = slice.outcomes;
      const std::size_t keep = std::min<std::size_t>(static_cast<std::size_t>(cfg.render_tasks), slice.trajectories.size());
      report.trajectories.assign(slice.trajectories.begin(), slice.trajectories.begin() + static_cast<long>(keep));
      report.plans.assign(slice.plans.begin(), slice.plans.begin() + static_cast<long>(keep));
    }
  };

  std::uniform_real_distribution<double> unit(0.0, 1.0);
  try {
    record_eval(0, cfg.episodes == 0);
    double train_debt = 0.0;
    for (int ep = 1; ep <= cfg.episodes; ++ep) {
      envs::EnvState state = env.reset(env_rng);
      const RealVec goal = state.goal;

      planner::BridgePlan plan;
      if (cfg.method == Method::gdg_bridge && unit(plan_rng) < cfg.eps_bridge) {
        report.telemetry.bridge_searches += 1;
        plan = plan_for(agent, env, state.position, goal, cfg.bridge, plan_rng);
        if (plan.source == planner::PlanSource::found) report.telemetry.bridges_found += 1;
      }
      planner::WaypointSelector selector(plan, goal, env.spec().goal_radius);

      Trace trace;
      trace.states.push_back(state.position);
      bool reached = false;
      for (int t = 0; t < cfg.horizon; ++t) {
        const RealVec& cmd = selector.commanded_goal(state.position);
        const RealVec a = agent.explore(state.position, cmd, cfg.noise_scale, cfg.explore_prob, act_rng);
        envs::StepResult r = env.step(state, a);
        state = std::move(r.state);
        trace.actions.push_back(a);
        trace.states.push_back(state.position);
        reached = r.reached;
        if (reached && cfg.stop_at_goal) break;
      }
      report.telemetry.training_successes += reached ? 1 : 0;
      report.telemetry.env_steps += static_cast<long long>(trace.steps());
      agent.observe(trace, goal, env, act_rng);

      train_debt += cfg.train_ratio * static_cast<double>(trace.steps());
      const int steps = static_cast<int>(train_debt);
      train_debt -= steps;
      report.telemetry.train_steps += agent.train(steps, train_rng);
      report.telemetry.episodes = ep;

      const bool last = ep == cfg.episodes;
      if (ep % cfg.eval_every == 0 || last) record_eval(ep, last);
    }
    if (!cfg.bucket_distances.empty() && env.has_grid()) {
      report.buckets = distance_bucket_eval(agent, env, cfg.bucket_distances, cfg.bucket_tasks,
                                            {cfg.seed}, eval_opt);
    }
  } catch (const std::exception& e) {
    report.aborted = e.what();
  }
  return result;
}

}  // namespace gdg::harness
