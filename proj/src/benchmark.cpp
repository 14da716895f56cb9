#include "reuse/benchmark.hpp"

#include <algorithm>
#include <limits>
#include <stdexcept>
#include <string>

#include "reuse/errors.hpp"
#include "reuse/summation.hpp"

namespace reuse {

namespace {

using Direction = StateSpace::Direction;

void require_canonical(const Instance& instance) {
  if (!is_canonical(instance)) {
    throw std::invalid_argument("instance is not canonical (rewards must be ascending)");
  }
  const auto report = validate(instance);
  if (!report.ok()) throw std::invalid_argument("invalid instance: " + report.violations.front());
}

// Forward reachability over all actions; mask[t][code] != 0 iff reachable.
std::vector<std::vector<char>> reachable_masks(const Instance& instance, const StateSpace& space) {
  const std::uint64_t size = space.size();
  const int horizon = instance.horizon();
  std::vector<std::vector<char>> masks(static_cast<std::size_t>(horizon));
  std::vector<double> current(size, 0.0);
  current[0] = 1.0;
  std::vector<double> post(size);
  std::vector<double> matched(size);
  for (int t = 0; t < horizon; ++t) {
    auto& mask = masks[static_cast<std::size_t>(t)];
    mask.assign(size, 0);
    for (std::uint64_t c = 0; c < size; ++c) mask[c] = current[c] > 0.0 ? 1 : 0;
    if (t + 1 == horizon) break;

    const auto incident = instance.incident(t);
    std::fill(post.begin(), post.end(), 0.0);
    for (std::uint64_t c = 0; c < size; ++c) {
      if (!mask[c]) continue;
      post[c] = 1.0;
      for (int j : incident) {
        if (space.geometric(j) && space.available(c, j)) post[c + space.stride(j)] = 1.0;
      }
    }
    space.apply_support(post);
    for (int j : incident) {
      if (space.geometric(j)) continue;
      std::fill(matched.begin(), matched.end(), 0.0);
      bool any = false;
      for (std::uint64_t c = 0; c < size; ++c) {
        if (mask[c] && space.available(c, j)) {
          matched[c] = 1.0;
          any = true;
        }
      }
      if (!any) continue;
      space.apply_support(matched, j);
      for (std::uint64_t c = 0; c < size; ++c) {
        if (matched[c] > 0.0) post[c] = 1.0;
      }
    }
    current.swap(post);
  }
  return masks;
}

}  // namespace

double ValueTable::opt_value() const {
  if (steps_.empty()) return 0.0;
  return steps_.front().values.front();
}

std::size_t ValueTable::reachable_states(int step) const {
  return steps_.at(static_cast<std::size_t>(step)).codes.size();
}

bool ValueTable::find(int step, std::uint64_t code, double& value, Action& action) const {
  if (step < 0 || step >= horizon()) return false;
  const auto& s = steps_[static_cast<std::size_t>(step)];
  const auto it = std::lower_bound(s.codes.begin(), s.codes.end(), code);
  if (it == s.codes.end() || *it != code) return false;
  const auto k = static_cast<std::size_t>(it - s.codes.begin());
  value = s.values[k];
  action = Action{s.actions[k]};
  return true;
}

bool ValueTable::reachable(int step, const SystemState& state) const {
  double v = 0.0;
  Action a;
  return find(step, space_.encode(state), v, a);
}

double ValueTable::value(int step, const SystemState& state) const {
  if (step == horizon()) return 0.0;
  double v = 0.0;
  Action a;
  if (!find(step, space_.encode(state), v, a)) {
    throw InvariantViolation("value table has no entry for this state at step " +
                             std::to_string(step));
  }
  return v;
}

Action ValueTable::best_action(int step, const SystemState& state) const {
  double v = 0.0;
  Action a;
  if (!find(step, space_.encode(state), v, a)) {
    throw InvariantViolation("value table has no entry for this state at step " +
                             std::to_string(step) + " (simulation/DP mismatch)");
  }
  return a;
}

ValueTable solve_opt(const Instance& instance, const GuardLimits& limits) {
  require_canonical(instance);
  check_guard(instance, limits);

  ValueTable table(instance, StateSpace(instance));
  const StateSpace& space = table.space_;
  const std::uint64_t size = space.size();
  const int horizon = instance.horizon();
  const auto masks = reachable_masks(instance, space);
  table.steps_.resize(static_cast<std::size_t>(horizon));

  std::vector<double> next(size, 0.0);  // V_{t+1}, dense
  std::vector<double> stay(size);
  std::vector<double> after_match(size);
  std::vector<double> best(size);
  std::vector<int> choice(size);

  for (int t = horizon - 1; t >= 0; --t) {
    const auto& mask = masks[static_cast<std::size_t>(t)];
    const auto incident = instance.incident(t);

    stay = next;
    space.apply(stay, Direction::kPull);

    std::fill(best.begin(), best.end(), -std::numeric_limits<double>::infinity());
    std::fill(choice.begin(), choice.end(), kNoMatch);
    for (auto it = incident.rbegin(); it != incident.rend(); ++it) {
      const int j = *it;
      const double r = instance.reward(j);
      const std::vector<double>* cont = &stay;
      if (!space.geometric(j)) {
        after_match = next;
        space.apply(after_match, Direction::kPull, j);
        cont = &after_match;
      }
      const std::uint64_t shift = space.geometric(j) ? space.stride(j) : 0;
      for (std::uint64_t c = 0; c < size; ++c) {
        if (!mask[c] || !space.available(c, j)) continue;
        const double cand = r + (*cont)[c + shift];
        if (cand > best[c]) {
          best[c] = cand;
          choice[c] = j;
        }
      }
    }

    auto& entry = table.steps_[static_cast<std::size_t>(t)];
    std::fill(next.begin(), next.end(), 0.0);
    for (std::uint64_t c = 0; c < size; ++c) {
      if (!mask[c]) continue;
      if (stay[c] > best[c]) {
        best[c] = stay[c];
        choice[c] = kNoMatch;
      }
      entry.codes.push_back(c);
      entry.values.push_back(best[c]);
      entry.actions.push_back(choice[c]);
      next[c] = best[c];
    }
  }
  return table;
}

PolicyEvaluation evaluate_policy_detailed(const Instance& instance, const Policy& policy,
                                          const GuardLimits& limits) {
  require_canonical(instance);
  if (!policy.deterministic) {
    throw std::invalid_argument("evaluate_policy requires a deterministic policy");
  }
  check_guard(instance, limits);

  const StateSpace space(instance);
  const std::uint64_t size = space.size();
  const int n = instance.size();
  std::vector<double> mass(size, 0.0);
  mass[0] = 1.0;
  std::vector<double> post(size);
  std::vector<std::vector<double>> matched(static_cast<std::size_t>(n));
  std::vector<bool> used(static_cast<std::size_t>(n));

  CompensatedSum reward;
  CompensatedSum best_available;
  SystemState state(n);
  for (int t = 0; t < instance.horizon(); ++t) {
    const auto incident = instance.incident(t);
    std::fill(post.begin(), post.end(), 0.0);
    std::fill(used.begin(), used.end(), false);
    for (std::uint64_t c = 0; c < size; ++c) {
      const double q = mass[c];
      if (q == 0.0) continue;
      space.decode(c, state);
      best_available += q * best_available_reward(state, instance);
      const Action a = policy(t, incident, state, instance);
      if (!a.is_match()) {
        post[c] += q;
        continue;
      }
      const int j = a.resource;
      if (j < 0 || j >= n || !state.available(j) ||
          std::find(incident.begin(), incident.end(), j) == incident.end()) {
        throw InvariantViolation("policy '" + policy.name + "' chose infeasible resource " +
                                 std::to_string(j) + " at step " + std::to_string(t));
      }
      reward += q * instance.reward(j);
      if (space.geometric(j)) {
        post[c + space.stride(j)] += q;
      } else {
        auto& z = matched[static_cast<std::size_t>(j)];
        if (!used[static_cast<std::size_t>(j)]) {
          z.assign(size, 0.0);
          used[static_cast<std::size_t>(j)] = true;
        }
        z[c] += q;
      }
    }
    space.apply(post, Direction::kPush);
    for (int j = 0; j < n; ++j) {
      if (!used[static_cast<std::size_t>(j)]) continue;
      auto& z = matched[static_cast<std::size_t>(j)];
      space.apply(z, Direction::kPush, j);
      for (std::uint64_t c = 0; c < size; ++c) post[c] += z[c];
    }
    mass.swap(post);
  }
  return PolicyEvaluation{reward.value(), best_available.value()};
}

double evaluate_policy(const Instance& instance, const Policy& policy,
                       const GuardLimits& limits) {
  return evaluate_policy_detailed(instance, policy, limits).expected_reward;
}

Policy opt_policy(std::shared_ptr<const ValueTable> table) {
  return Policy{"opt", true,
                [table = std::move(table)](int step, std::span<const int>,
                                           const SystemState& state, const Instance&) {
                  return table->best_action(step, state);
                }};
}

Policy opt_policy(const ValueTable& table) {
  return opt_policy(std::make_shared<const ValueTable>(table));
}

}  // namespace reuse
