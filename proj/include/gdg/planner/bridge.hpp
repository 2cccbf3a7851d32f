#pragma once

#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "gdg/envs/environment.hpp"
#include "gdg/learner/replay.hpp"
#include "gdg/types.hpp"

namespace gdg::planner {

/// Batched distance evaluator: element i of the result is D(from[i], to[i]).
using DistanceFn =
    std::function<std::vector<double>(const std::vector<RealVec>& from, const std::vector<RealVec>& to)>;

enum class PlanSource { none_found, found, search_exhausted };

std::string to_string(PlanSource s);

struct BridgePlan {
  std::vector<RealVec> waypoints;
  PlanSource source = PlanSource::none_found;
};

enum class CandidateMode { replay_states, uniform_free_space };

/// Where bridge candidates come from, and how many to draw per search.
class CandidateSource {
 public:
  using Sampler = std::function<RealVec(Rng&)>;

  CandidateSource(CandidateMode mode, int budget, Sampler sampler);

  /// Uniform over the `s` of stored transitions.
  static CandidateSource from_replay(const ReplayBuffer& buffer, int budget);
  static CandidateSource from_free_space(const envs::Environment& env, int budget);

  CandidateMode mode() const { return mode_; }
  int budget() const { return budget_; }
  RealVec draw(Rng& rng) const { return sampler_(rng); }

 private:
  CandidateMode mode_;
  int budget_;
  Sampler sampler_;
};

struct SearchSettings {
  double margin = 2.0;
};

/// Draws up to K candidates and accepts the first b with
/// D(start, goal) > D(start, b) + D(b, goal) + margin.
BridgePlan search_bridge(const DistanceFn& distance, const RealVec& start, const RealVec& goal,
                         const CandidateSource& candidates, Rng& rng, SearchSettings settings = {});

/// Recursive refinement: after a top-level bridge is accepted, each leg is
/// searched again until `depth` levels have been applied. Waypoints come back
/// in traversal order.
BridgePlan plan_waypoints(const DistanceFn& distance, const RealVec& start, const RealVec& goal, int depth,
                          const CandidateSource& candidates, Rng& rng, SearchSettings settings = {});

/// Commands the first unvisited waypoint, then the final goal. A waypoint is
/// visited once the agent comes within reach_radius of it; the index only
/// moves forward.
class WaypointSelector {
 public:
  WaypointSelector(BridgePlan plan, RealVec final_goal, double reach_radius);

  /// Marks waypoints visited from `position`, then returns the commanded goal.
  const RealVec& commanded_goal(const RealVec& position);
  std::size_t index() const { return index_; }
  bool on_final_goal() const { return index_ >= plan_.waypoints.size(); }
  const BridgePlan& plan() const { return plan_; }

 private:
  BridgePlan plan_;
  RealVec final_goal_;
  double reach_radius_;
  std::size_t index_ = 0;
};

/// Returns a selector whose commanded goal feeds the actor as μ(s, commanded).
WaypointSelector waypoint_policy(const BridgePlan& plan, const RealVec& final_goal, double reach_radius);

/// One waypoint per line, coordinates separated by spaces.
void write_plan(std::ostream& os, const BridgePlan& plan);
BridgePlan read_plan(std::istream& is);

}  // namespace gdg::planner
