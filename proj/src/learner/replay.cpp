#include "gdg/learner/replay.hpp"

#include "gdg/errors.hpp"

namespace gdg {

ReplayBuffer::ReplayBuffer(std::size_t capacity) : capacity_(capacity) {
  if (capacity == 0) throw ContractError("ReplayBuffer capacity must be positive");
}

void ReplayBuffer::push(Transition t) {
  if (items_.size() < capacity_) {
    items_.push_back(std::move(t));
  } else {
    items_[next_] = std::move(t);
  }
  next_ = (next_ + 1) % capacity_;
}

const Transition& ReplayBuffer::at(std::size_t i) const {
  if (i >= items_.size()) throw ContractError("ReplayBuffer index out of range");
  if (items_.size() < capacity_) return items_[i];
  return items_[(next_ + i) % capacity_];
}

const Transition& ReplayBuffer::sample_one(Rng& rng) const {
  if (items_.empty()) throw ContractError("cannot sample from an empty replay buffer");
  std::uniform_int_distribution<std::size_t> pick(0, items_.size() - 1);
  return items_[pick(rng)];
}

std::vector<Transition> ReplayBuffer::sample(std::size_t n, Rng& rng) const {
  if (items_.empty()) throw ContractError("cannot sample from an empty replay buffer");
  std::uniform_int_distribution<std::size_t> pick(0, items_.size() - 1);
  std::vector<Transition> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) out.push_back(items_[pick(rng)]);
  return out;
}

std::vector<Transition> episode_transitions(const Trace& trace, const RealVec& goal,
                                            const GoalPredicate& reached) {
  if (trace.states.size() != trace.actions.size() + 1) {
    throw ContractError("trace must hold one more state than actions");
  }
  std::vector<Transition> out;
  out.reserve(trace.steps());
  for (std::size_t t = 0; t < trace.steps(); ++t) {
    out.push_back({trace.states[t], trace.actions[t], trace.states[t + 1], goal, 1.0,
                   reached(trace.states[t + 1], goal)});
  }
  return out;
}

std::size_t store_episode(ReplayBuffer& buffer, const Trace& trace, const RealVec& goal,
                          const GoalPredicate& reached) {
  auto items = episode_transitions(trace, goal, reached);
  const RealVec& last = trace.states.back();
  const RealVec zero = RealVec::Zero(trace.actions.empty() ? last.size() : trace.actions.front().size());
  items.push_back({last, zero, last, last, 0.0, true});
  for (auto& t : items) buffer.push(std::move(t));
  return items.size();
}

}  // namespace gdg
