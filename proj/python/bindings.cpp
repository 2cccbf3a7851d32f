#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>
#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "gdg/baselines/ddpg.hpp"
#include "gdg/envs/environment.hpp"
#include "gdg/envs/grid.hpp"
#include "gdg/errors.hpp"
#include "gdg/harness/config.hpp"
#include "gdg/harness/metrics.hpp"
#include "gdg/harness/runner.hpp"
#include "gdg/harness/seeding.hpp"

namespace py = pybind11;
using namespace gdg;
using namespace gdg::harness;

namespace {

nlohmann::json report_json(const EvalReport& r) {
  nlohmann::json curve = nlohmann::json::array();
  for (const auto& p : r.curve) {
    curve.push_back({{"episodes", p.episodes},
                     {"success_rate", p.success_rate},
                     {"mean_final_distance", p.mean_final_distance},
                     {"successes", p.successes},
                     {"tasks", p.tasks}});
  }
  nlohmann::json buckets = nlohmann::json::array();
  for (const auto& b : r.buckets) {
    buckets.push_back({{"distance", b.distance},
                       {"seed", b.seed},
                       {"success_rate", b.success_rate},
                       {"tasks", b.tasks},
                       {"satisfiable", b.satisfiable}});
  }
  const auto& t = r.telemetry;
  return {{"method", r.method},
          {"seed", r.seed},
          {"curve", curve},
          {"buckets", buckets},
          {"aborted", r.aborted},
          {"telemetry",
           {{"episodes", t.episodes},
            {"bridge_searches", t.bridge_searches},
            {"bridges_found", t.bridges_found},
            {"env_steps", t.env_steps},
            {"train_steps", t.train_steps},
            {"training_successes", t.training_successes}}}};
}

RunConfig config_from(const std::string& text) { return from_json(nlohmann::json::parse(text)); }

/// A trained (or freshly initialised) agent together with its config and environment.
class Session {
 public:
  Session(RunConfig cfg, std::unique_ptr<Agent> agent, EvalReport report)
      : cfg_(std::move(cfg)), env_(envs::make_env(cfg_.env)), agent_(std::move(agent)), report_(std::move(report)) {}

  std::string report() const { return report_json(report_).dump(); }
  std::string curves_csv() const { return harness::curves_csv({report_}); }

  py::dict evaluate(const std::vector<std::pair<RealVec, RealVec>>& tasks, int budget, bool use_bridge,
                    std::uint64_t seed) const {
    std::vector<envs::Task> list;
    for (const auto& [s, g] : tasks) list.push_back({s, g});
    EvalOptions opt;
    opt.budget = budget;
    opt.use_bridge = use_bridge;
    opt.bridge = cfg_.bridge;
    opt.seed = seed;
    const EvalSlice slice = harness::evaluate(*agent_, env_, list, opt);
    py::list outcomes;
    for (const auto& o : slice.outcomes) {
      py::dict d;
      d["success"] = o.success;
      d["steps"] = o.steps;
      d["final_distance"] = o.final_distance;
      d["waypoints"] = o.waypoints;
      outcomes.append(d);
    }
    py::dict out;
    out["success_rate"] = slice.success_rate;
    out["mean_final_distance"] = slice.mean_final_distance;
    out["outcomes"] = outcomes;
    return out;
  }

  std::vector<double> distances(const std::vector<RealVec>& s, const std::vector<RealVec>& g) const {
    const auto fn = agent_->distance_fn();
    if (!fn) throw ContractError(to_string(agent_->method()) + " has no distance function");
    if (s.size() != g.size()) throw ContractError("distances: state and goal lists differ in length");
    return (*fn)(s, g);
  }

  RealVec act(const RealVec& s, const RealVec& g) const {
    Rng rng(0);
    return agent_->greedy(s, g, rng);
  }

  py::bytes checkpoint() const {
    std::ostringstream os;
    agent_->save(os);
    return py::bytes(os.str());
  }

  std::string checkpoint_sha1() const {
    std::ostringstream os;
    agent_->save(os);
    return git_blob_sha1(os.str());
  }

 private:
  RunConfig cfg_;
  envs::Environment env_;
  std::unique_ptr<Agent> agent_;
  EvalReport report_;
};

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Goal distance gradient core";

  py::register_exception<ContractError>(m, "ContractError", PyExc_ValueError);
  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<NumericalError>(m, "NumericalError", PyExc_ArithmeticError);

  m.def("preset_names", &preset_names);
  m.def("preset_json", [](const std::string& name) { return to_json(preset(name)).dump(); });
  m.def("normalize_config", [](const std::string& text) { return to_json(config_from(text)).dump(); },
        "Fill defaults and validate a JSON config; returns the canonical JSON.");
  m.def("git_blob_sha1", [](const py::bytes& b) { return git_blob_sha1(std::string(b)); });
  m.def("derive_seed", &derive_seed, py::arg("seed"), py::arg("tag"), py::arg("index") = 0);

  py::class_<envs::Environment>(m, "Environment")
      .def_property_readonly("name", &envs::Environment::name)
      .def_property_readonly("state_dim", [](const envs::Environment& e) { return e.spec().state_dim; })
      .def_property_readonly("goal_radius", [](const envs::Environment& e) { return e.spec().goal_radius; })
      .def_property_readonly("lower", &envs::Environment::lower)
      .def_property_readonly("upper", &envs::Environment::upper)
      .def_property_readonly("has_grid", &envs::Environment::has_grid)
      .def(
          "reset",
          [](const envs::Environment& e, std::uint64_t seed) {
            Rng rng(seed);
            const envs::EnvState s = e.reset(rng);
            return std::make_pair(s.position, s.goal);
          },
          py::arg("seed"), "Sample a task; returns (start, goal).")
      .def(
          "step",
          [](const envs::Environment& e, const RealVec& position, const RealVec& goal, const RealVec& action) {
            const envs::StepResult r = e.step({position, 0, goal}, action);
            return std::make_pair(r.state.position, r.reached);
          },
          py::arg("position"), py::arg("goal"), py::arg("action"), "Returns (next_position, reached).")
      .def("is_free", &envs::Environment::is_free)
      .def("goal_reached", &envs::Environment::goal_reached)
      .def("bfs_distance",
           [](const envs::Environment& e, const RealVec& a, const RealVec& b) {
             return e.bfs_distance(e.cell_of(a), e.cell_of(b));
           })
      .def("diameter", [](const envs::Environment& e) { return envs::grid_diameter(e.grid()).distance; })
      .def("free_cell_count", [](const envs::Environment& e) { return e.grid().free_cells().size(); })
      .def_property_readonly("fixed_task",
                             [](const envs::Environment& e) -> std::optional<std::pair<RealVec, RealVec>> {
                               if (const auto t = e.fixed_task()) return std::make_pair(t->start, t->goal);
                               return std::nullopt;
                             })
      .def_property_readonly("trap_point", &envs::Environment::trap_point);

  m.def("make_env", &envs::make_env, py::arg("name"));
  m.def("env_names", &envs::env_names);

  m.def(
      "her_relabel",
      [](const envs::Environment& env, const std::vector<RealVec>& states, const std::vector<RealVec>& actions,
         const RealVec& goal, int k_future, std::uint64_t seed) {
        if (states.size() != actions.size() + 1) throw ContractError("her_relabel: need one more state than actions");
        Rng rng(seed);
        const Trace trace{states, actions};
        const GoalPredicate pred = [&env](const RealVec& p, const RealVec& g) { return env.goal_reached(p, g); };
        py::list out;
        for (const auto& t : baselines::her_relabel(trace, goal, k_future, pred, rng)) {
          py::dict d;
          d["s"] = t.s;
          d["a"] = t.a;
          d["s_next"] = t.s_next;
          d["g"] = t.g;
          d["reached"] = t.reached;
          out.append(d);
        }
        return out;
      },
      py::arg("env"), py::arg("states"), py::arg("actions"), py::arg("goal"), py::arg("k_future"), py::arg("seed"));

  py::class_<Session>(m, "Session")
      .def("report_json", &Session::report)
      .def("curves_csv", &Session::curves_csv)
      .def("evaluate", &Session::evaluate, py::arg("tasks"), py::arg("budget") = 500, py::arg("use_bridge") = false,
           py::arg("seed") = 0)
      .def("distances", &Session::distances)
      .def("act", &Session::act)
      .def("checkpoint", &Session::checkpoint)
      .def("checkpoint_sha1", &Session::checkpoint_sha1);

  m.def(
      "train",
      [](const std::string& config_json) {
        const RunConfig cfg = config_from(config_json);
        TrainingResult r;
        {
          py::gil_scoped_release release;
          r = run_training(cfg);
        }
        return std::make_unique<Session>(cfg, std::move(r.agent), std::move(r.report));
      },
      py::arg("config_json"), "Run the seeded training loop described by a JSON config.");

  m.def(
      "untrained",
      [](const std::string& config_json) {
        const RunConfig cfg = config_from(config_json);
        const envs::Environment env = envs::make_env(cfg.env);
        Rng rng = derive_rng(cfg.seed, "init");
        EvalReport report;
        report.method = to_string(cfg.method);
        report.seed = cfg.seed;
        return std::make_unique<Session>(cfg, make_agent(cfg, env, rng), std::move(report));
      },
      py::arg("config_json"), "Freshly initialised agent for a config, without training.");
}
