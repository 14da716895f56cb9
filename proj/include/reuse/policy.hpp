#pragma once

#include <functional>
#include <span>
#include <string>
#include <vector>

#include "reuse/instance.hpp"

namespace reuse {

// Per-resource status at a decision point: age 0 means available, age e > 0
// means busy for e steps since the match (matched at step t - e).
class SystemState {
 public:
  SystemState() = default;
  explicit SystemState(int n) : ages_(static_cast<std::size_t>(n), 0) {}

  int size() const { return static_cast<int>(ages_.size()); }
  bool available(int i) const { return ages_[static_cast<std::size_t>(i)] == 0; }
  int age(int i) const { return ages_[static_cast<std::size_t>(i)]; }
  void set_available(int i) { ages_[static_cast<std::size_t>(i)] = 0; }
  void set_age(int i, int age) { ages_[static_cast<std::size_t>(i)] = age; }
  std::span<const int> ages() const { return ages_; }

  std::vector<int> available_set() const;

  friend bool operator==(const SystemState&, const SystemState&) = default;

 private:
  std::vector<int> ages_;
};

inline constexpr int kNoMatch = -1;

// Either a match to resource `resource` or the no-match action.
struct Action {
  int resource = kNoMatch;

  static constexpr Action none() { return Action{}; }
  static constexpr Action match(int i) { return Action{i}; }
  constexpr bool is_match() const { return resource != kNoMatch; }

  friend constexpr bool operator==(Action, Action) = default;
};

using DecideFn = std::function<Action(int step, std::span<const int> incident,
                                      const SystemState& state, const Instance& instance)>;

// Uniform decision interface over Greedy, the alpha family and DP tables.
struct Policy {
  std::string name;
  bool deterministic = true;
  DecideFn decide;

  Action operator()(int step, std::span<const int> incident, const SystemState& state,
                    const Instance& instance) const {
    return decide(step, incident, state, instance);
  }
};

// Highest index in (incident ∩ available); in canonical form that is the
// highest reward, with ties going to the larger index.
Action greedy_decide(int step, std::span<const int> incident, const SystemState& state,
                     const Instance& instance);

// Lowest index in (incident ∩ available) whose reward is at least alpha times
// the reward Greedy would collect. Throws std::invalid_argument if alpha is
// outside [0, 1].
Action alpha_threshold_decide(double alpha, int step, std::span<const int> incident,
                              const SystemState& state, const Instance& instance);

Policy greedy_policy();
Policy alpha_threshold_policy(double alpha);
Policy null_policy();

// max reward over an availability set; 0 for the empty set.
double best_available_reward(const SystemState& state, const Instance& instance);

}  // namespace reuse
