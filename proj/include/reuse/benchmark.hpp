#pragma once

#include <cstdint>
#include <memory>
#include <vector>

#include "reuse/instance.hpp"
#include "reuse/policy.hpp"
#include "reuse/state_space.hpp"

namespace reuse {

// Finite-horizon value function of the clairvoyant benchmark, stored for the
// states reachable from "all available" at step 0. Step T is terminal (V = 0).
class ValueTable {
 public:
  int horizon() const { return static_cast<int>(steps_.size()); }
  const Instance& instance() const { return instance_; }
  const StateSpace& space() const { return space_; }

  // V_0(all available): the expected reward of the clairvoyant optimum.
  double opt_value() const;

  std::size_t reachable_states(int step) const;
  bool reachable(int step, const SystemState& state) const;

  // Both throw InvariantViolation for a state the table never reached.
  double value(int step, const SystemState& state) const;
  Action best_action(int step, const SystemState& state) const;

  // Entry lookup by code; returns false if unreachable.
  bool find(int step, std::uint64_t code, double& value, Action& action) const;

 private:
  friend ValueTable solve_opt(const Instance& instance, const GuardLimits& limits);

  struct Step {
    std::vector<std::uint64_t> codes;  // ascending
    std::vector<double> values;
    std::vector<int> actions;
  };

  ValueTable(Instance instance, StateSpace space)
      : instance_(std::move(instance)), space_(std::move(space)) {}

  Instance instance_;
  StateSpace space_;
  std::vector<Step> steps_;
};

// Backward induction over reachable states. Ties among optimal actions go to
// the largest resource index; no-match only when strictly better.
// Throws GuardError, or std::invalid_argument for a non-canonical instance.
ValueTable solve_opt(const Instance& instance, const GuardLimits& limits = {});

struct PolicyEvaluation {
  double expected_reward = 0.0;
  // E[sum_t max reward over the policy's available set].
  double expected_best_available = 0.0;

  double measured_alpha() const {
    return expected_best_available > 0.0 ? expected_reward / expected_best_available : 1.0;
  }
};

// Exact forward propagation of the state distribution under a deterministic
// policy. Throws InvariantViolation if the policy picks an infeasible action.
PolicyEvaluation evaluate_policy_detailed(const Instance& instance, const Policy& policy,
                                          const GuardLimits& limits = {});

double evaluate_policy(const Instance& instance, const Policy& policy,
                       const GuardLimits& limits = {});

// Table-lookup policy over the DP argmax.
Policy opt_policy(const ValueTable& table);
Policy opt_policy(std::shared_ptr<const ValueTable> table);

}  // namespace reuse
