#include "gdg/harness/config.hpp"

#include <fstream>

#include "gdg/errors.hpp"

namespace gdg::harness {

using nlohmann::json;

std::string to_string(Method m) {
  switch (m) {
    case Method::gdg: return "gdg";
    case Method::gdg_bridge: return "gdg_bridge";
    case Method::ddpg_sparse: return "ddpg_sparse";
    case Method::ddpg_dense: return "ddpg_dense";
    case Method::her: return "her";
    case Method::random: return "random";
  }
  return "gdg";
}

Method method_from_string(const std::string& name) {
  for (Method m : all_methods()) {
    if (to_string(m) == name) return m;
  }
  throw ContractError("unknown method: " + name);
}

std::vector<Method> all_methods() {
  return {Method::gdg, Method::gdg_bridge, Method::ddpg_sparse, Method::ddpg_dense, Method::her, Method::random};
}

std::vector<std::string> preset_names() { return {"reach3d", "city-desk", "city", "fourrooms-desk", "trap"}; }

RunConfig preset(const std::string& name) {
  RunConfig c;
  c.preset = name;
  if (name == "city-desk") {
    c.env = "city_desk";
    c.episodes = 1000;
    c.horizon = 150;
    c.eval_every = 100;
    c.train_ratio = 0.5;
    c.eval_tasks = 100;
    c.gdg.d_max = 150;
    c.gdg.distance_scale = 10.0;
    c.bucket_distances = {45, 60, 75, 90, 105, 120};
  } else if (name == "city") {
    c.env = "city";
    c.episodes = 200000;
    c.horizon = 300;
    c.eval_every = 20000;
    c.eval_tasks = 200;
    c.gdg.d_max = 500;
    c.gdg.distance_scale = 10.0;
    c.bucket_distances = {90, 120, 150, 180, 210, 240};
  } else if (name == "fourrooms-desk") {
    c.env = "four_rooms";
    c.episodes = 3000;
    c.horizon = 200;
    c.eval_every = 300;
    c.eval_tasks = 100;
    c.gdg.d_max = 200;
    c.gdg.distance_scale = 10.0;
    c.bucket_distances = {20, 40, 60, 80, 100, 120};
  } else if (name == "trap") {
    c.env = "trap";
    c.episodes = 1000;
    c.horizon = 200;
    c.eval_every = 50;
    c.train_ratio = 0.25;
    c.eval_tasks = 1;
    c.gdg.d_max = 200;
    c.gdg.distance_scale = 10.0;
  } else if (name == "reach3d") {
    c.env = "reach3d";
    c.episodes = 4000;
    c.horizon = 50;
    c.eval_budget = 50;
    c.eval_every = 250;
    c.train_ratio = 0.5;
    c.eval_tasks = 100;
    c.noise_scale = 0.2;
    c.explore_prob = 0.1;
    c.gdg.d_max = 50;
    c.gdg.analytic_distance = true;
  } else {
    throw ContractError("unknown preset: " + name);
  }
  return c;
}

json to_json(const RunConfig& c) {
  json j;
  j["preset"] = c.preset;
  j["method"] = to_string(c.method);
  j["env"] = c.env;
  j["episodes"] = c.episodes;
  j["horizon"] = c.horizon;
  j["eval_budget"] = c.eval_budget;
  j["seed"] = c.seed;
  j["eps_bridge"] = c.eps_bridge;
  j["noise_scale"] = c.noise_scale;
  j["explore_prob"] = c.explore_prob;
  j["eval_every"] = c.eval_every;
  j["eval_tasks"] = c.eval_tasks;
  j["eval_seed"] = c.eval_seed;
  j["batch_size"] = c.batch_size;
  j["buffer_capacity"] = c.buffer_capacity;
  j["train_ratio"] = c.train_ratio;
  j["stop_at_goal"] = c.stop_at_goal;
  j["her_k"] = c.her_k;
  j["bridge"] = {{"candidates", c.bridge.candidates},
                 {"margin", c.bridge.margin},
                 {"depth", c.bridge.depth},
                 {"at_eval", c.bridge.at_eval}};
  j["gdg"] = {{"hidden", c.gdg.hidden},
              {"critic_lr", c.gdg.critic_lr},
              {"actor_lr", c.gdg.actor_lr},
              {"model_lr", c.gdg.model_lr},
              {"tau", c.gdg.tau},
              {"gamma_d", c.gdg.gamma_d},
              {"d_max", c.gdg.d_max},
              {"distance_scale", c.gdg.distance_scale},
              {"analytic_distance", c.gdg.analytic_distance}};
  j["ddpg"] = {{"hidden", c.ddpg.hidden},
               {"critic_lr", c.ddpg.critic_lr},
               {"actor_lr", c.ddpg.actor_lr},
               {"tau", c.ddpg.tau},
               {"gamma", c.ddpg.gamma},
               {"clip_sparse_targets", c.ddpg.clip_sparse_targets}};
  j["bucket_distances"] = c.bucket_distances;
  j["bucket_tasks"] = c.bucket_tasks;
  j["render_tasks"] = c.render_tasks;
  return j;
}

namespace {

template <typename T>
void read(const json& j, const char* key, T& out) {
  if (auto it = j.find(key); it != j.end()) out = it->template get<T>();
}

}  // namespace

RunConfig from_json(const json& j) {
  RunConfig c = preset(j.value("preset", std::string("city-desk")));
  if (auto it = j.find("method"); it != j.end()) c.method = method_from_string(it->get<std::string>());
  read(j, "env", c.env);
  read(j, "episodes", c.episodes);
  read(j, "horizon", c.horizon);
  read(j, "eval_budget", c.eval_budget);
  read(j, "seed", c.seed);
  read(j, "eps_bridge", c.eps_bridge);
  read(j, "noise_scale", c.noise_scale);
  read(j, "explore_prob", c.explore_prob);
  read(j, "eval_every", c.eval_every);
  read(j, "eval_tasks", c.eval_tasks);
  read(j, "eval_seed", c.eval_seed);
  read(j, "batch_size", c.batch_size);
  read(j, "buffer_capacity", c.buffer_capacity);
  read(j, "train_ratio", c.train_ratio);
  read(j, "stop_at_goal", c.stop_at_goal);
  read(j, "her_k", c.her_k);
  if (auto b = j.find("bridge"); b != j.end()) {
    read(*b, "candidates", c.bridge.candidates);
    read(*b, "margin", c.bridge.margin);
    read(*b, "depth", c.bridge.depth);
    read(*b, "at_eval", c.bridge.at_eval);
  }
  if (auto g = j.find("gdg"); g != j.end()) {
    read(*g, "hidden", c.gdg.hidden);
    read(*g, "critic_lr", c.gdg.critic_lr);
    read(*g, "actor_lr", c.gdg.actor_lr);
    read(*g, "model_lr", c.gdg.model_lr);
    read(*g, "tau", c.gdg.tau);
    read(*g, "gamma_d", c.gdg.gamma_d);
    read(*g, "d_max", c.gdg.d_max);
    read(*g, "distance_scale", c.gdg.distance_scale);
    read(*g, "analytic_distance", c.gdg.analytic_distance);
  }
  if (auto d = j.find("ddpg"); d != j.end()) {
    read(*d, "hidden", c.ddpg.hidden);
    read(*d, "critic_lr", c.ddpg.critic_lr);
    read(*d, "actor_lr", c.ddpg.actor_lr);
    read(*d, "tau", c.ddpg.tau);
    read(*d, "gamma", c.ddpg.gamma);
    read(*d, "clip_sparse_targets", c.ddpg.clip_sparse_targets);
  }
  read(j, "bucket_distances", c.bucket_distances);
  read(j, "bucket_tasks", c.bucket_tasks);
  read(j, "render_tasks", c.render_tasks);
  validate(c);
  return c;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ConfigError("config file " + path + ": " + e.what());
  }
  return from_json(j);
}

void save_config(const RunConfig& cfg, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write config file: " + path);
  out << to_json(cfg).dump(2) << '\n';
}

RunConfig apply_overrides(const RunConfig& cfg, const std::vector<std::string>& overrides) {
  json j = to_json(cfg);
  // A preset override re-bases every field on the new preset; method and seed carry over.
  for (const auto& ov : overrides) {
    if (ov.rfind("preset=", 0) == 0) {
      RunConfig base = preset(ov.substr(7));
      base.method = cfg.method;
      base.seed = cfg.seed;
      j = to_json(base);
    }
  }
  for (const auto& ov : overrides) {
    const auto eq = ov.find('=');
    if (eq == std::string::npos || eq == 0) throw ContractError("override must look like key=value: " + ov);
    std::string key = ov.substr(0, eq);
    const std::string raw = ov.substr(eq + 1);
    json value;
    try {
      value = json::parse(raw);
    } catch (const json::exception&) {
      value = raw;
    }
    for (auto& ch : key) {
      if (ch == '.') ch = '/';
    }
    const json::json_pointer ptr("/" + key);
    if (!j.contains(ptr)) throw ContractError("unknown config key: " + ov.substr(0, eq));
    j[ptr] = value;
  }
  return from_json(j);
}

void validate(const RunConfig& c) {
  auto require = [](bool ok, const char* what) {
    if (!ok) throw ContractError(std::string("invalid config: ") + what);
  };
  require(c.episodes >= 0, "episodes must be non-negative");
  require(c.horizon >= 1, "horizon must be at least 1");
  require(c.eval_budget >= 1, "eval_budget must be at least 1");
  require(c.eps_bridge >= 0.0 && c.eps_bridge <= 1.0, "eps_bridge must lie in [0, 1]");
  require(c.explore_prob >= 0.0 && c.explore_prob <= 1.0, "explore_prob must lie in [0, 1]");
  require(c.noise_scale >= 0.0, "noise_scale must be non-negative");
  require(c.eval_every >= 1, "eval_every must be at least 1");
  require(c.eval_tasks >= 1, "eval_tasks must be at least 1");
  require(c.batch_size >= 1, "batch_size must be at least 1");
  require(c.buffer_capacity >= static_cast<std::size_t>(c.batch_size), "buffer_capacity below batch_size");
  require(c.train_ratio >= 0.0, "train_ratio must be non-negative");
  require(c.her_k >= 0, "her_k must be non-negative");
  require(c.bridge.candidates >= 0, "bridge.candidates must be non-negative");
  require(c.bridge.depth >= 1, "bridge.depth must be at least 1");
  require(c.gdg.tau >= 0.0 && c.gdg.tau <= 1.0, "gdg.tau must lie in [0, 1]");
  require(c.ddpg.tau >= 0.0 && c.ddpg.tau <= 1.0, "ddpg.tau must lie in [0, 1]");
  require(c.ddpg.gamma >= 0.0 && c.ddpg.gamma < 1.0, "ddpg.gamma must lie in [0, 1)");
  require(c.gdg.d_max > 0.0, "gdg.d_max must be positive");
  require(c.bucket_tasks >= 1, "bucket_tasks must be at least 1");
}

}  // namespace gdg::harness
