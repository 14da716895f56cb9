#include <gtest/gtest.h>

#include <memory>

#include "brute_force.hpp"
#include "fixtures.hpp"
#include "reuse/benchmark.hpp"
#include "reuse/errors.hpp"
#include "reuse/random.hpp"
#include "reuse/state_space.hpp"

namespace reuse {
namespace {

using testing::brute_opt;
using testing::brute_policy;

// Reference values from an exact-fraction expectimax written independently.
struct Frozen {
  const char* name;
  Instance (*make)();
  double opt;
  double greedy;
  double greedy_best;
  double alpha_half;
  double alpha_half_best;
};

const Frozen kFrozen[] = {
    {"geometric_three", testing::geometric_three, 10.907966, 10.907966, 11.336966, 9.165596,
     12.655448},
    {"finite_two", testing::finite_two, 4.22, 4.144, 4.944, 4.15, 4.8},
    {"mixed_three", testing::mixed_three, 5.618, 5.618, 5.935, 4.63985152, 5.96772672},
};

TEST(Benchmark, FrozenReferenceValues) {
  for (const auto& f : kFrozen) {
    SCOPED_TRACE(f.name);
    const auto inst = f.make();
    const auto table = solve_opt(inst);
    EXPECT_NEAR(table.opt_value(), f.opt, 1e-12);
    const auto g = evaluate_policy_detailed(inst, greedy_policy());
    EXPECT_NEAR(g.expected_reward, f.greedy, 1e-12);
    EXPECT_NEAR(g.expected_best_available, f.greedy_best, 1e-12);
    const auto a = evaluate_policy_detailed(inst, alpha_threshold_policy(0.5));
    EXPECT_NEAR(a.expected_reward, f.alpha_half, 1e-12);
    EXPECT_NEAR(a.expected_best_available, f.alpha_half_best, 1e-12);
  }
}

TEST(Benchmark, TightExampleClosedForm) {
  for (double p : {0.0, 0.1, 0.5, 0.9}) {
    for (double delta : {0.1, 0.001}) {
      const auto inst = tight_example(p, delta);
      EXPECT_NEAR(solve_opt(inst).opt_value(), 2.0 + delta, 1e-12);
      EXPECT_NEAR(evaluate_policy(inst, greedy_policy()), (1.0 + p) * (1.0 + delta), 1e-12);
    }
  }
  // With immediate return the high resource serves both steps.
  const auto inst = tight_example(1.0, 0.1);
  EXPECT_NEAR(solve_opt(inst).opt_value(), 2.2, 1e-12);
  EXPECT_NEAR(evaluate_policy(inst, greedy_policy()), 2.2, 1e-12);
}

TEST(Benchmark, OptPrefersWaitingInTightExample) {
  const auto inst = tight_example(0.5, 0.1);
  const auto table = solve_opt(inst);
  SystemState s(2);
  EXPECT_EQ(table.best_action(0, s), Action::match(0));
  EXPECT_NEAR(table.value(0, s), 2.1, 1e-12);
  EXPECT_EQ(table.reachable_states(0), 1u);
  EXPECT_NEAR(table.value(2, s), 0.0, 0.0);
}

TEST(Benchmark, UnreachableStateIsAnError) {
  const auto inst = tight_example(0.5, 0.1);
  const auto table = solve_opt(inst);
  SystemState s(2);
  s.set_age(0, 1);
  s.set_age(1, 1);
  EXPECT_FALSE(table.reachable(0, s));
  EXPECT_THROW(table.best_action(0, s), InvariantViolation);
}

TEST(Benchmark, MatchesBruteForceOnRandomInstances) {
  for (auto family : {DistributionFamily::kGeometric, DistributionFamily::kFinite,
                      DistributionFamily::kMixed, DistributionFamily::kNonReusable}) {
    for (std::uint64_t seed = 0; seed < 40; ++seed) {
      GeneratorParams gp;
      gp.family = family;
      gp.n_resources = 1 + static_cast<int>(seed % 4);
      gp.horizon = 1 + static_cast<int>(seed % 6);
      gp.max_duration = 3;
      gp.p_lo = 0.05;
      gp.p_hi = 1.0;
      const auto inst = random_instance(gp, seed);
      const auto table = solve_opt(inst);
      EXPECT_NEAR(table.opt_value(), brute_opt(inst), 1e-12) << "seed " << seed;
      for (const auto& pol : {greedy_policy(), alpha_threshold_policy(0.6)}) {
        const auto dp = evaluate_policy_detailed(inst, pol);
        const auto bf = brute_policy(inst, pol);
        EXPECT_NEAR(dp.expected_reward, bf.first, 1e-12);
        EXPECT_NEAR(dp.expected_best_available, bf.second, 1e-12);
      }
      EXPECT_NEAR(evaluate_policy(inst, opt_policy(table)), table.opt_value(), 1e-12);
    }
  }
}

// A deterministic policy that picks among feasible actions by hashing the
// step and availability pattern.
Policy table_policy(std::uint64_t salt) {
  return Policy{"random-table", true,
                [salt](int step, std::span<const int> incident, const SystemState& state,
                       const Instance&) {
                  std::uint64_t mask = 0;
                  for (int i = 0; i < state.size(); ++i) {
                    if (state.available(i)) mask |= 1ULL << i;
                  }
                  std::vector<int> feasible;
                  for (int i : incident) {
                    if (state.available(i)) feasible.push_back(i);
                  }
                  const auto h = splitmix64(salt ^ splitmix64(mask ^ (std::uint64_t(step) << 32)));
                  const auto k = h % (feasible.size() + 1);
                  return k == feasible.size() ? Action::none() : Action::match(feasible[k]);
                }};
}

TEST(Benchmark, NoPolicyBeatsOpt) {
  for (std::uint64_t seed = 0; seed < 25; ++seed) {
    GeneratorParams gp;
    gp.family = seed % 2 ? DistributionFamily::kMixed : DistributionFamily::kGeometric;
    gp.n_resources = 3;
    gp.horizon = 5;
    const auto inst = random_instance(gp, 100 + seed);
    const double opt = solve_opt(inst).opt_value();
    for (std::uint64_t salt = 0; salt < 8; ++salt) {
      const auto pol = table_policy(salt);
      const double v = evaluate_policy(inst, pol);
      EXPECT_LE(v, opt + 1e-12);
      EXPECT_NEAR(v, brute_policy(inst, pol).first, 1e-12);
    }
  }
}

TEST(Benchmark, OptMonotoneInReusability) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    GeneratorParams gp;
    gp.n_resources = 3;
    gp.horizon = 5;
    auto inst = random_instance(gp, seed);
    const double base = solve_opt(inst).opt_value();
    auto faster = inst;
    for (auto& r : faster.resources) {
      r.dist = UsageDistribution::geometric(std::min(1.0, r.dist.prob_one() + 0.2));
    }
    EXPECT_GE(solve_opt(faster).opt_value(), base - 1e-12);
  }
}

TEST(Benchmark, ImmediateReturnMakesGreedyOptimal) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    GeneratorParams gp;
    gp.family = DistributionFamily::kImmediate;
    gp.n_resources = 4;
    gp.horizon = 6;
    const auto inst = random_instance(gp, seed);
    EXPECT_NEAR(evaluate_policy(inst, greedy_policy()), solve_opt(inst).opt_value(), 1e-12);
  }
}

TEST(Benchmark, RejectsNonCanonicalAndInvalid) {
  Instance inst;
  inst.resources = {{2.0, UsageDistribution::geometric(0.5)},
                    {1.0, UsageDistribution::geometric(0.5)}};
  inst.arrivals = {{0, 1}};
  EXPECT_THROW(solve_opt(inst), std::invalid_argument);
  inst = canonicalize(inst);
  inst.resources[0].dist = UsageDistribution::geometric(0.0);
  EXPECT_THROW(solve_opt(inst), std::invalid_argument);
}

TEST(Benchmark, NonDeterministicPolicyRejected) {
  auto pol = greedy_policy();
  pol.deterministic = false;
  EXPECT_THROW(evaluate_policy(testing::geometric_three(), pol), std::invalid_argument);
}

TEST(Benchmark, InfeasibleActionRejected) {
  Policy bad{"bad", true, [](int, std::span<const int>, const SystemState&, const Instance&) {
               return Action::match(0);
             }};
  auto inst = testing::finite_two();
  EXPECT_THROW(evaluate_policy(inst, bad), InvariantViolation);
}

TEST(StateSpace, GuardTrips) {
  GeneratorParams gp;
  gp.n_resources = 14;
  gp.horizon = 2;
  const auto inst = random_instance(gp, 1);
  EXPECT_NO_THROW(check_guard(inst, {}));
  GuardLimits tight;
  tight.max_geometric_resources = 13;
  try {
    check_guard(inst, tight);
    FAIL() << "expected GuardError";
  } catch (const GuardError& e) {
    EXPECT_EQ(e.size(), 16384.0);
    EXPECT_EQ(e.limit(), 8192.0);
    EXPECT_NE(e.guard().find("geometric"), std::string::npos);
  }
  tight.force = true;
  EXPECT_NO_THROW(check_guard(inst, tight));
  GuardLimits few;
  few.max_states = 4;
  EXPECT_THROW(solve_opt(testing::geometric_three(), few), GuardError);
  EXPECT_DOUBLE_EQ(state_space_size(testing::mixed_three()), 8.0);
  EXPECT_GT(estimated_dp_bytes(testing::mixed_three()), 0.0);
}

TEST(StateSpace, EncodeDecodeRoundTrip) {
  const StateSpace space(testing::mixed_three());
  EXPECT_EQ(space.size(), 8u);
  EXPECT_EQ(space.radix(1), 2);
  SystemState s(3), back;
  for (std::uint64_t code = 0; code < space.size(); ++code) {
    space.decode(code, back);
    EXPECT_EQ(space.encode(back), code);
  }
  s.set_age(1, 2);
  EXPECT_THROW(space.encode(s), InvariantViolation);
}

TEST(StateSpace, PushConservesMass) {
  const StateSpace space(testing::finite_two());
  std::vector<double> mass(space.size(), 0.0);
  mass[0] = 1.0;
  space.apply(mass, StateSpace::Direction::kPush, 1);
  double total = 0.0;
  for (double m : mass) total += m;
  EXPECT_NEAR(total, 1.0, 1e-15);
}

}  // namespace
}  // namespace reuse
