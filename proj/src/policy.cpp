#include "reuse/policy.hpp"

#include <cstdio>
#include <stdexcept>

namespace reuse {

std::vector<int> SystemState::available_set() const {
  std::vector<int> out;
  for (int i = 0; i < size(); ++i) {
    if (available(i)) out.push_back(i);
  }
  return out;
}

Action greedy_decide(int /*step*/, std::span<const int> incident, const SystemState& state,
                     const Instance& /*instance*/) {
  int best = kNoMatch;
  for (int i : incident) {
    if (state.available(i) && i > best) best = i;
  }
  return Action{best};
}

Action alpha_threshold_decide(double alpha, int step, std::span<const int> incident,
                              const SystemState& state, const Instance& instance) {
  if (!(alpha >= 0.0 && alpha <= 1.0)) {
    throw std::invalid_argument("alpha must lie in [0, 1]");
  }
  const Action greedy = greedy_decide(step, incident, state, instance);
  if (!greedy.is_match()) return greedy;
  const double threshold = alpha * instance.reward(greedy.resource);
  int pick = greedy.resource;
  for (int i : incident) {
    if (state.available(i) && instance.reward(i) >= threshold && i < pick) pick = i;
  }
  return Action{pick};
}

Policy greedy_policy() { return Policy{"greedy", true, &greedy_decide}; }

Policy alpha_threshold_policy(double alpha) {
  if (!(alpha >= 0.0 && alpha <= 1.0)) {
    throw std::invalid_argument("alpha must lie in [0, 1]");
  }
  char name[48];
  std::snprintf(name, sizeof(name), "alpha-threshold(%g)", alpha);
  return Policy{name, true,
                [alpha](int step, std::span<const int> incident, const SystemState& state,
                        const Instance& instance) {
                  return alpha_threshold_decide(alpha, step, incident, state, instance);
                }};
}

Policy null_policy() {
  return Policy{"no-match", true,
                [](int, std::span<const int>, const SystemState&, const Instance&) {
                  return Action::none();
                }};
}

double best_available_reward(const SystemState& state, const Instance& instance) {
  double best = 0.0;
  for (int i = 0; i < state.size(); ++i) {
    if (state.available(i) && instance.reward(i) > best) best = instance.reward(i);
  }
  return best;
}

}  // namespace reuse
