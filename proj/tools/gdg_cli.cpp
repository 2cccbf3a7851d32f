#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "gdg/envs/environment.hpp"
#include "gdg/errors.hpp"
#include "gdg/harness/config.hpp"
#include "gdg/harness/metrics.hpp"
#include "gdg/harness/runner.hpp"
#include "gdg/numerics/gradcheck.hpp"

namespace fs = std::filesystem;
using namespace gdg;
using namespace gdg::harness;

namespace {

struct ConfigArgs {
  std::string config_file;
  std::string preset;
  std::vector<std::string> overrides;

  void attach(CLI::App* cmd) {
    cmd->add_option("-c,--config", config_file, "JSON run configuration");
    cmd->add_option("-p,--preset", preset, "Named preset");
    cmd->add_option("-s,--set", overrides, "Override key=value (dotted keys for nested fields)");
  }

  RunConfig resolve() const {
    RunConfig cfg = config_file.empty() ? harness::preset(preset.empty() ? "city-desk" : preset)
                                        : load_config(config_file);
    if (!config_file.empty() && !preset.empty()) {
      cfg = apply_overrides(cfg, {"preset=" + preset});
    }
    return apply_overrides(cfg, overrides);
  }
};

std::unique_ptr<Agent> read_checkpoint(const RunConfig& cfg, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open checkpoint: " + path);
  return load_agent(cfg, in);
}

EvalOptions eval_options(const RunConfig& cfg) {
  EvalOptions opt;
  opt.budget = cfg.eval_budget;
  opt.use_bridge = cfg.method == Method::gdg_bridge && cfg.bridge.at_eval;
  opt.bridge = cfg.bridge;
  opt.seed = cfg.eval_seed;
  return opt;
}

int cmd_train(const ConfigArgs& args, const std::string& out_dir) {
  const RunConfig cfg = args.resolve();
  TrainingResult result = run_training(cfg);
  fs::create_directories(out_dir);
  emit_metrics(out_dir, cfg, {result.report});
  save_config(cfg, (fs::path(out_dir) / "config.json").string());
  {
    std::ofstream ck(fs::path(out_dir) / "agent.ckpt");
    result.agent->save(ck);
  }
  for (const auto& p : result.report.curve) {
    fmt::print("episodes {:>7}  success {:.3f}  final distance {:.3f}\n", p.episodes, p.success_rate,
               p.mean_final_distance);
  }
  if (!result.report.aborted.empty()) {
    fmt::print(stderr, "run aborted: {}\n", result.report.aborted);
    return 1;
  }
  return 0;
}

int cmd_eval(const ConfigArgs& args, const std::string& checkpoint) {
  const RunConfig cfg = args.resolve();
  const auto agent = read_checkpoint(cfg, checkpoint);
  const envs::Environment env = envs::make_env(cfg.env);
  const EvalSlice slice = evaluate(*agent, env, sample_tasks(env, cfg.eval_tasks, cfg.eval_seed), eval_options(cfg));
  fmt::print("success {:.3f} ({}/{})  mean final distance {:.3f}\n", slice.success_rate, slice.successes,
             slice.tasks, slice.mean_final_distance);
  return 0;
}

int cmd_buckets(const ConfigArgs& args, const std::string& checkpoint, const std::string& out_dir) {
  const RunConfig cfg = args.resolve();
  const auto agent = read_checkpoint(cfg, checkpoint);
  const envs::Environment env = envs::make_env(cfg.env);
  EvalReport report;
  report.method = to_string(cfg.method);
  report.seed = cfg.seed;
  report.buckets = distance_bucket_eval(*agent, env, cfg.bucket_distances, cfg.bucket_tasks, {cfg.seed},
                                        eval_options(cfg));
  const std::string csv = buckets_csv({report});
  if (out_dir.empty()) {
    fmt::print("{}", csv);
  } else {
    fs::create_directories(out_dir);
    std::ofstream(fs::path(out_dir) / "buckets.csv") << csv;
  }
  return 0;
}

int cmd_render(const ConfigArgs& args, const std::string& checkpoint, const std::string& out_dir) {
  const RunConfig cfg = args.resolve();
  const auto agent = read_checkpoint(cfg, checkpoint);
  const envs::Environment env = envs::make_env(cfg.env);
  EvalOptions opt = eval_options(cfg);
  opt.record_trajectories = true;
  const auto tasks = sample_tasks(env, cfg.render_tasks, cfg.eval_seed);
  const EvalSlice slice = evaluate(*agent, env, tasks, opt);
  fs::create_directories(out_dir);
  for (std::size_t i = 0; i < slice.trajectories.size(); ++i) {
    std::ofstream(fs::path(out_dir) / fmt::format("task{}.txt", i)) << trajectory_text(slice.trajectories[i]);
    fmt::print("task {}: {} in {} steps\n", i, slice.outcomes[i].success ? "reached" : "missed",
               slice.outcomes[i].steps);
  }
  return 0;
}

int cmd_verify_gradients(std::uint64_t seed) {
  Rng rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  bool all = true;
  for (nn::Activation head : {nn::Activation::identity, nn::Activation::softplus, nn::Activation::tanh}) {
    const nn::Mlp<double> net({6, 16, 16, 3}, head, rng);
    nn::Vector<double> x(6), up(3);
    for (auto& v : x) v = normal(rng);
    for (auto& v : up) v = normal(rng);
    const nn::GradCheckReport r = nn::finite_diff_check(net, x, up, 1e-4);
    fmt::print("{:<9} {}\n", nn::to_string(head), r.summary());
    all = all && r.passed;
  }
  return all ? 0 : 1;
}

int cmd_calibrate_maps() {
  for (const auto& name : envs::env_names()) {
    const envs::Environment env = envs::make_env(name);
    if (!env.has_grid()) {
      fmt::print("{:<10} open box, no grid\n", name);
      continue;
    }
    const envs::GridDiameter d = envs::grid_diameter(env.grid());
    fmt::print("{:<10} free cells {:>5}  diameter {:>4}  connected {}\n", name, env.grid().free_cells().size(),
               d.distance, d.connected ? "yes" : "no");
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Goal distance gradient experiments"};
  app.require_subcommand(1);

  ConfigArgs train_args, eval_args, bucket_args, render_args;
  std::string out_dir = "runs/latest";
  std::string checkpoint;
  std::uint64_t grad_seed = 0;

  auto* train = app.add_subcommand("train", "Train one method and write metrics");
  train_args.attach(train);
  train->add_option("-o,--out", out_dir, "Output directory");

  auto* eval = app.add_subcommand("eval", "Evaluate a checkpoint on the fixed task list");
  eval_args.attach(eval);
  eval->add_option("--checkpoint", checkpoint)->required();

  auto* buckets = app.add_subcommand("buckets", "Success per shortest-path distance bucket");
  bucket_args.attach(buckets);
  buckets->add_option("--checkpoint", checkpoint)->required();
  std::string bucket_out;
  buckets->add_option("-o,--out", bucket_out, "Directory for buckets.csv (stdout when omitted)");

  auto* render = app.add_subcommand("render", "Write evaluation trajectories as text");
  render_args.attach(render);
  render->add_option("--checkpoint", checkpoint)->required();
  render->add_option("-o,--out", out_dir, "Output directory");

  auto* grads = app.add_subcommand("verify-gradients", "Finite-difference check of the network gradients");
  grads->add_option("--seed", grad_seed);

  auto* maps = app.add_subcommand("calibrate-maps", "Print free-cell counts and BFS diameters");

  CLI11_PARSE(app, argc, argv);
  try {
    if (*train) return cmd_train(train_args, out_dir);
    if (*eval) return cmd_eval(eval_args, checkpoint);
    if (*buckets) return cmd_buckets(bucket_args, checkpoint, bucket_out);
    if (*render) return cmd_render(render_args, checkpoint, out_dir);
    if (*grads) return cmd_verify_gradients(grad_seed);
    if (*maps) return cmd_calibrate_maps();
  } catch (const std::exception& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return 2;
  }
  return 0;
}
