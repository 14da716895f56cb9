#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "reuse/instance.hpp"
#include "reuse/oracle.hpp"
#include "reuse/policy.hpp"
#include "reuse/state_space.hpp"

namespace reuse {

enum class Bound {
  kTheorem1,           // 1/(2 - p), any durations
  kTheorem2,           // (1 + p)/2, geometric
  kTheorem3General,    // 1/(1 - p + 1/alpha)
  kTheorem3Geometric,  // 1/((1 - p)/(1 + p) + 1/alpha), geometric
};

const char* to_string(Bound bound);

inline constexpr double kReportTolerance = 1e-9;

// Bound value at reusability p; alpha is only used by the Theorem 3 forms.
double bound_value(Bound bound, double p, double alpha = 1.0);

struct BoundReport {
  std::string id;
  std::uint64_t hash = 0;
  std::string policy;
  Bound bound = Bound::kTheorem1;
  double p_min = 0.0;
  double policy_value = 0.0;
  double opt_value = 0.0;
  double ratio = 1.0;
  double bound_value = 0.0;
  double margin = 0.0;
  bool pass = false;
  std::optional<double> alpha;  // measured, Theorem 3 only
  std::string error;            // guard or applicability failure
};

BoundReport evaluate_bound(const Instance& instance, const Policy& policy, Bound bound,
                           const GuardLimits& limits = {}, std::string id = {});

// One report per instance; per-instance failures are reported, not thrown.
std::vector<BoundReport> verify_bounds(std::span<const Instance> corpus, const Policy& policy,
                                       Bound bound, const GuardLimits& limits = {});

bool all_pass(std::span<const BoundReport> reports);

struct CorpusSpec {
  DistributionFamily family = DistributionFamily::kGeometric;
  int max_resources = 4;
  int max_horizon = 6;
  int max_cells = 0;  // cap on N * T, 0 for none
  double p_lo = 0.05;
  double p_hi = 1.0;
  int max_duration = 3;
  double density_lo = 0.3;
  double density_hi = 1.0;
};

// Instance k draws its size and density from (seed, k) and is then produced
// by random_instance.
std::vector<Instance> make_corpus(const CorpusSpec& spec, int count, std::uint64_t seed);

struct SweepRow {
  double p = 0.0;
  double delta = 0.0;
  double opt = 0.0;
  double greedy = 0.0;
  double ratio = 0.0;
  double closed_form = 0.0;  // (1 + p)(1 + delta)/(2 + delta)
  double difference = 0.0;   // |ratio - closed_form|
  double gap = 0.0;          // ratio - (1 + p)/2
};

std::vector<SweepRow> sweep_tight_example(std::span<const double> ps,
                                          std::span<const double> deltas);

struct SearchParams {
  DistributionFamily family = DistributionFamily::kGeometric;  // or kNonReusable
  int n_resources = 2;
  int horizon = 2;
  double p_min = 0.5;
  int population = 8;
  int keep = 3;
  double edge_density = 0.7;
};

struct SearchResult {
  std::vector<Instance> instances;    // worst first
  std::vector<BoundReport> reports;
  std::uint64_t evaluations = 0;
  bool counterexample = false;        // some ratio fell below its bound
};

// Randomized hill climbing on exact Greedy/OPT with p_min held fixed: single
// edge toggles, +-10% reward perturbations and single p_i moves; a move is
// accepted on strict ratio decrease. Deterministic in seed.
SearchResult ratio_search(const SearchParams& params, std::uint64_t seed, std::uint64_t budget);

struct RetainedRow {
  std::uint64_t hash = 0;
  double retained = 0.0;  // E[sum r_i 1(A*_t = i, not O_it)]
  double greedy = 0.0;
  double opt = 0.0;
  double lost = 0.0;
  bool holds = true;      // retained <= greedy + 1e-12
  std::optional<PathWitness> witness;
};

// Exact probe of the first-term bound of the OPT decomposition, Greedy
// against the DP optimum under the Bernoulli coupling.
std::vector<RetainedRow> retained_monitor(std::span<const Instance> corpus);

}  // namespace reuse
