#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "reuse/instance.hpp"
#include "reuse/policy.hpp"
#include "reuse/random.hpp"

namespace reuse {

enum class CouplingScheme {
  // Per-resource LIFO stacks: the benchmark reuses the durations the primary
  // policy drew, most recent first.
  kStack,
  // Geometric only: both systems share the return indicators P_it.
  kBernoulli,
};

const char* to_string(CouplingScheme scheme);

inline constexpr int kNever = -1;

struct StepRecord {
  int step = 0;
  std::vector<int> available;        // I_t, primary
  std::vector<int> bench_available;  // I*_t
  std::vector<int> returned;         // resources that came back at the start of t
  std::vector<int> bench_returned;
  Action action;
  Action bench_action;
  // Durations assigned at this step (stack coupling only, 0 otherwise).
  int duration = 0;
  int bench_duration = 0;
  std::vector<char> out_of_stock;  // O_it: every j >= i unavailable to the primary
  double best_available = 0.0;     // r*(I_t)
  bool lost = false;               // bench matched i while O_it
  int tau = kNever;                // last primary match of the lost resource before t
  bool coincide = false;           // both matched the same resource
};

struct CoupledTrace {
  CouplingScheme scheme = CouplingScheme::kStack;
  std::uint64_t seed = 0;
  std::uint64_t stream = 0;
  std::vector<StepRecord> steps;
  double primary_reward = 0.0;
  double benchmark_reward = 0.0;
  double lost = 0.0;
  double best_available = 0.0;      // sum_t r*(I_t)
  double coincidence_reward = 0.0;  // sum_t r_i 1(A_t = A*_t = i)
};

// Per-run totals, the same quantities as CoupledTrace without the step log.
struct RunTotals {
  double primary_reward = 0.0;
  double benchmark_reward = 0.0;
  double lost = 0.0;
  double best_available = 0.0;
  double coincidence_reward = 0.0;
};

// Runs the primary policy and the benchmark on shared randomness. Each step:
// returns, decisions, duration assignment, recording. Throws
// std::invalid_argument for a non-geometric instance under kBernoulli or a
// non-deterministic policy, and InvariantViolation (carrying the JSONL trace)
// if a lost match breaks tau injectivity or is attributed to a coincidence.
CoupledTrace coupled_run(const Instance& instance, const Policy& primary, const Policy& benchmark,
                         CouplingScheme scheme, std::uint64_t seed, std::uint64_t stream = 0);

// Claim violations found in a finished trace; empty when clean.
std::vector<std::string> check_coupling_claims(const CoupledTrace& trace, int resources);

// One JSON object per line: a header record, one record per step, a totals
// record. Resources and steps are 1-based; action 0 and tau 0 mean "none".
std::string trace_to_jsonl(const CoupledTrace& trace, const Instance& instance);

// E[sum r_{A_t}] / E[sum r*(I_t)] over the given runs; 1 if the denominator
// vanishes.
double measured_alpha(std::span<const CoupledTrace> traces);

struct Estimate {
  double mean = 0.0;
  double std_error = 0.0;
  double ci_lo = 0.0;
  double ci_hi = 0.0;
};

struct EstimateReport {
  int runs = 0;
  std::uint64_t seed = 0;
  CouplingScheme scheme = CouplingScheme::kStack;
  Estimate primary_reward;
  Estimate benchmark_reward;
  Estimate lost;
  Estimate best_available;
  Estimate coincidence_reward;
};

// Sample means with 95% normal-approximation intervals. Run k uses stream k,
// so the report is a pure function of the arguments regardless of threading.
// Throws std::invalid_argument for runs < 2.
EstimateReport monte_carlo(const Instance& instance, const Policy& primary,
                           const Policy& benchmark, CouplingScheme scheme, int runs,
                           std::uint64_t seed, int threads = 0);

}  // namespace reuse
