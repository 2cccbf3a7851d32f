#pragma once

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "gdg/envs/environment.hpp"
#include "gdg/harness/config.hpp"
#include "gdg/planner/bridge.hpp"

namespace gdg::harness {

/// Type-erased learner owned by one run.
class Agent {
 public:
  virtual ~Agent() = default;

  virtual Method method() const = 0;
  /// Exploratory action used while collecting experience.
  virtual RealVec explore(const RealVec& s, const RealVec& g, double noise_scale, double explore_prob, Rng& rng) const = 0;
  /// Evaluation action. Learned agents ignore `rng`.
  virtual RealVec greedy(const RealVec& s, const RealVec& g, Rng& rng) const = 0;

  /// Stores one finished rollout; returns the number of transitions added.
  virtual std::size_t observe(const Trace& trace, const RealVec& goal, const envs::Environment& env, Rng& rng) = 0;
  /// Runs `steps` gradient steps when the buffer holds a full batch; returns steps run.
  virtual int train(int steps, Rng& rng) = 0;

  /// Learned distance, when the method has one (GDG variants).
  virtual std::optional<planner::DistanceFn> distance_fn() const { return std::nullopt; }
  /// Replay buffer backing candidate sampling, when the method keeps one.
  virtual const ReplayBuffer* buffer() const { return nullptr; }

  virtual void save(std::ostream& os) const = 0;
};

std::unique_ptr<Agent> make_agent(const RunConfig& cfg, const envs::Environment& env, Rng& rng);
std::unique_ptr<Agent> load_agent(const RunConfig& cfg, std::istream& is);

struct TaskOutcome {
  int task = 0;
  bool success = false;
  int steps = 0;
  double final_distance = 0.0;
  std::size_t waypoints = 0;
};

struct EvalSlice {
  double success_rate = 0.0;
  double mean_final_distance = 0.0;
  int successes = 0;
  int tasks = 0;
  std::vector<TaskOutcome> outcomes;
  std::vector<std::vector<RealVec>> trajectories;  // filled when requested
  std::vector<planner::BridgePlan> plans;
};

struct EvalOptions {
  int budget = 500;
  /// Plan waypoints with the agent's distance before each task.
  bool use_bridge = false;
  BridgeConfig bridge;
  std::uint64_t seed = 0;
  bool record_trajectories = false;
};

/// Greedy rollouts, success iff the goal is reached within the budget. Never
/// mutates the agent.
EvalSlice evaluate(const Agent& agent, const envs::Environment& env, const std::vector<envs::Task>& tasks,
                   const EvalOptions& options);

/// Fixed evaluation task list drawn from `seed` (or the environment's fixed task).
std::vector<envs::Task> sample_tasks(const envs::Environment& env, int count, std::uint64_t seed);

struct EvalPoint {
  int episodes = 0;
  double success_rate = 0.0;
  double mean_final_distance = 0.0;
  int successes = 0;
  int tasks = 0;
};

struct BucketRow {
  int distance = 0;
  std::uint64_t seed = 0;
  double success_rate = 0.0;
  int tasks = 0;
  bool satisfiable = true;
};

struct BucketBand {
  int distance = 0;
  double mean = 0.0;
  double min = 0.0;
  double max = 0.0;
  int seeds = 0;
};

struct Telemetry {
  int episodes = 0;
  int bridge_searches = 0;
  int bridges_found = 0;
  long long env_steps = 0;
  long long train_steps = 0;
  int training_successes = 0;
};

struct EvalReport {
  std::string method;
  std::uint64_t seed = 0;
  std::vector<EvalPoint> curve;
  std::vector<BucketRow> buckets;
  std::vector<TaskOutcome> final_outcomes;
  Telemetry telemetry;
  std::vector<std::vector<RealVec>> trajectories;
  std::vector<planner::BridgePlan> plans;
  std::string aborted;  // non-empty when a sub-module error stopped the run
};

/// Start/goal pairs at cell centres whose BFS distance lies within ±5% of each
/// target; success per bucket and seed. Buckets with no such pair are flagged.
std::vector<BucketRow> distance_bucket_eval(const Agent& agent, const envs::Environment& env,
                                            const std::vector<int>& distances, int tasks_per_bucket,
                                            const std::vector<std::uint64_t>& seeds, const EvalOptions& options);

std::vector<BucketBand> bucket_bands(const std::vector<BucketRow>& rows);

struct TrainingResult {
  std::unique_ptr<Agent> agent;
  EvalReport report;
};

/// Seeded training loop with periodic evaluation. Sub-module errors end the run
/// early with `report.aborted` set.
TrainingResult run_training(const RunConfig& cfg);

}  // namespace gdg::harness
