#include "gdg/planner/bridge.hpp"

#include <istream>
#include <ostream>
#include <sstream>

#include "gdg/errors.hpp"

namespace gdg::planner {

std::string to_string(PlanSource s) {
  switch (s) {
    case PlanSource::none_found: return "none_found";
    case PlanSource::found: return "found";
    case PlanSource::search_exhausted: return "search_exhausted";
  }
  return "none_found";
}

CandidateSource::CandidateSource(CandidateMode mode, int budget, Sampler sampler)
    : mode_(mode), budget_(budget), sampler_(std::move(sampler)) {
  if (budget < 0) throw ContractError("candidate budget must be non-negative");
}

CandidateSource CandidateSource::from_replay(const ReplayBuffer& buffer, int budget) {
  return CandidateSource(CandidateMode::replay_states, budget,
                         [&buffer](Rng& rng) { return buffer.sample_one(rng).s; });
}

CandidateSource CandidateSource::from_free_space(const envs::Environment& env, int budget) {
  return CandidateSource(CandidateMode::uniform_free_space, budget,
                         [&env](Rng& rng) { return env.sample_free(rng); });
}

BridgePlan search_bridge(const DistanceFn& distance, const RealVec& start, const RealVec& goal,
                         const CandidateSource& candidates, Rng& rng, SearchSettings settings) {
  BridgePlan plan;
  plan.source = PlanSource::search_exhausted;
  const int k = candidates.budget();
  if (k == 0) return plan;

  std::vector<RealVec> bridges;
  bridges.reserve(static_cast<std::size_t>(k));
  for (int i = 0; i < k; ++i) bridges.push_back(candidates.draw(rng));

  // One batched evaluation: [start→goal, start→b_0.., b_0→goal..]
  std::vector<RealVec> from{start};
  std::vector<RealVec> to{goal};
  for (const auto& b : bridges) {
    from.push_back(start);
    to.push_back(b);
  }
  for (const auto& b : bridges) {
    from.push_back(b);
    to.push_back(goal);
  }
  const std::vector<double> d = distance(from, to);
  if (d.size() != from.size()) throw ContractError("distance function returned the wrong batch size");
  const double d_sg = d[0];
  for (int i = 0; i < k; ++i) {
    const double d_sb = d[1 + static_cast<std::size_t>(i)];
    const double d_bg = d[1 + static_cast<std::size_t>(k + i)];
    if (d_sg > d_sb + d_bg + settings.margin) {
      plan.waypoints.push_back(bridges[static_cast<std::size_t>(i)]);
      plan.source = PlanSource::found;
      return plan;
    }
  }
  return plan;
}

BridgePlan plan_waypoints(const DistanceFn& distance, const RealVec& start, const RealVec& goal, int depth,
                          const CandidateSource& candidates, Rng& rng, SearchSettings settings) {
  if (depth < 1) throw ContractError("plan_waypoints: depth must be at least 1");
  BridgePlan top = search_bridge(distance, start, goal, candidates, rng, settings);
  if (top.source != PlanSource::found || depth == 1) return top;
  const RealVec bridge = top.waypoints.front();
  const BridgePlan left = plan_waypoints(distance, start, bridge, depth - 1, candidates, rng, settings);
  const BridgePlan right = plan_waypoints(distance, bridge, goal, depth - 1, candidates, rng, settings);
  BridgePlan out;
  out.source = PlanSource::found;
  out.waypoints = left.waypoints;
  out.waypoints.push_back(bridge);
  out.waypoints.insert(out.waypoints.end(), right.waypoints.begin(), right.waypoints.end());
  return out;
}

WaypointSelector::WaypointSelector(BridgePlan plan, RealVec final_goal, double reach_radius)
    : plan_(std::move(plan)), final_goal_(std::move(final_goal)), reach_radius_(reach_radius) {
  if (!(reach_radius > 0.0)) throw ContractError("reach_radius must be positive");
}

const RealVec& WaypointSelector::commanded_goal(const RealVec& position) {
  while (index_ < plan_.waypoints.size() && (position - plan_.waypoints[index_]).norm() <= reach_radius_) {
    ++index_;
  }
  return index_ < plan_.waypoints.size() ? plan_.waypoints[index_] : final_goal_;
}

WaypointSelector waypoint_policy(const BridgePlan& plan, const RealVec& final_goal, double reach_radius) {
  return WaypointSelector(plan, final_goal, reach_radius);
}

void write_plan(std::ostream& os, const BridgePlan& plan) {
  os << "# " << to_string(plan.source) << '\n';
  os.precision(17);
  for (const auto& w : plan.waypoints) {
    for (Eigen::Index i = 0; i < w.size(); ++i) os << (i ? " " : "") << w(i);
    os << '\n';
  }
}

BridgePlan read_plan(std::istream& is) {
  BridgePlan plan;
  std::string line;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    if (line[0] == '#') {
      const std::string tag = line.substr(line.find_first_not_of("# "));
      if (tag == "found") plan.source = PlanSource::found;
      else if (tag == "search_exhausted") plan.source = PlanSource::search_exhausted;
      else plan.source = PlanSource::none_found;
      continue;
    }
    std::istringstream fields(line);
    std::vector<double> v;
    double x;
    while (fields >> x) v.push_back(x);
    plan.waypoints.push_back(Eigen::Map<RealVec>(v.data(), static_cast<Eigen::Index>(v.size())));
  }
  return plan;
}

}  // namespace gdg::planner
