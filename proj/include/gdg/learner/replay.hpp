#pragma once

#include <cstddef>
#include <functional>
#include <vector>

#include "gdg/types.hpp"

namespace gdg {

/// One stored experience. d = 1 for environment steps, 0 for self-anchors.
struct Transition {
  RealVec s;
  RealVec a;
  RealVec s_next;
  RealVec g;
  double d = 1.0;
  bool reached = false;
};

/// A contiguous rollout: states s_0..s_T and actions a_0..a_{T-1}.
struct Trace {
  std::vector<RealVec> states;
  std::vector<RealVec> actions;

  std::size_t steps() const { return actions.size(); }
};

using GoalPredicate = std::function<bool(const RealVec& position, const RealVec& goal)>;

/// Fixed-capacity ring of transitions; the oldest entry is overwritten first.
class ReplayBuffer {
 public:
  explicit ReplayBuffer(std::size_t capacity);

  void push(Transition t);
  std::size_t size() const { return items_.size(); }
  std::size_t capacity() const { return capacity_; }
  bool empty() const { return items_.empty(); }

  /// Uniform sampling with replacement.
  std::vector<Transition> sample(std::size_t n, Rng& rng) const;
  const Transition& sample_one(Rng& rng) const;

  /// Entry `i` counted from the oldest retained transition.
  const Transition& at(std::size_t i) const;

 private:
  std::size_t capacity_;
  std::size_t next_ = 0;
  std::vector<Transition> items_;
};

/// One transition per step (d = 1, reached from the predicate), no anchor.
std::vector<Transition> episode_transitions(const Trace& trace, const RealVec& goal,
                                            const GoalPredicate& reached);

/// Stores every step of `trace` plus one self-anchor (s_T, 0, s_T, s_T, d = 0,
/// reached). Returns the number of items stored.
std::size_t store_episode(ReplayBuffer& buffer, const Trace& trace, const RealVec& goal,
                          const GoalPredicate& reached);

}  // namespace gdg
