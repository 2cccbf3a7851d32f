#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "gdg/baselines/ddpg.hpp"
#include "gdg/learner/gdg_agent.hpp"

namespace gdg::harness {

enum class Method { gdg, gdg_bridge, ddpg_sparse, ddpg_dense, her, random };

std::string to_string(Method m);
Method method_from_string(const std::string& name);
std::vector<Method> all_methods();

struct BridgeConfig {
  int candidates = 64;  // K per search
  double margin = 2.0;
  int depth = 2;
  /// Plan waypoints for every evaluation task (training uses eps_bridge).
  bool at_eval = true;
};

/// Declarative description of one training run. Every field has a default;
/// the JSON form round-trips losslessly.
struct RunConfig {
  std::string preset = "city-desk";
  Method method = Method::gdg;
  std::string env = "city_desk";
  int episodes = 1000;
  int horizon = 150;          // train-time episode length T
  int eval_budget = 500;      // steps per evaluation task
  std::uint64_t seed = 0;
  double eps_bridge = 0.4;
  double noise_scale = 0.2;
  double explore_prob = 0.2;
  int eval_every = 100;
  int eval_tasks = 100;
  std::uint64_t eval_seed = 20240601;
  int batch_size = 128;
  std::size_t buffer_capacity = 1000000;
  /// Gradient steps per environment step collected (Alg. 1 runs T per episode of T steps).
  double train_ratio = 1.0;
  /// Stop the episode as soon as the goal is reached.
  bool stop_at_goal = true;
  int her_k = 4;
  BridgeConfig bridge;
  GdgConfig gdg;
  baselines::DdpgConfig ddpg;
  std::vector<int> bucket_distances;
  int bucket_tasks = 100;
  int render_tasks = 4;
};

/// Named defaults: reach3d, city-desk, city, fourrooms-desk, trap.
RunConfig preset(const std::string& name);
std::vector<std::string> preset_names();

nlohmann::json to_json(const RunConfig& cfg);
/// Missing keys take the preset's defaults (the preset named in the JSON, or city-desk).
RunConfig from_json(const nlohmann::json& j);

RunConfig load_config(const std::string& path);
void save_config(const RunConfig& cfg, const std::string& path);

/// Applies "a.b.c=value" style overrides; value is parsed as JSON, falling back to a string.
RunConfig apply_overrides(const RunConfig& cfg, const std::vector<std::string>& overrides);

/// Throws ContractError on out-of-range fields.
void validate(const RunConfig& cfg);

}  // namespace gdg::harness
