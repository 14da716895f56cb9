#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "reuse/instance.hpp"
#include "reuse/policy.hpp"

namespace reuse {

// A step where the benchmark matched i although the primary had some j >= i
// available, yet the primary collected less than r_i.
struct PathWitness {
  std::uint64_t atom = 0;
  int step = 0;
  int resource = 0;
};

// E[X^2] of the per-run totals, for exact standard errors.
struct SecondMoments {
  double primary_reward = 0.0;
  double benchmark_reward = 0.0;
  double lost = 0.0;
  double best_available = 0.0;
  double coincidence_reward = 0.0;
};

// Exact expectations and per-(resource, step) event probabilities of a
// coupled primary/benchmark pair, obtained by enumerating every realization
// of the coupling's randomness. Cell (i, t) lives at index i * horizon + t.
struct ExactEventTable {
  int resources = 0;
  int horizon = 0;
  std::uint64_t atoms = 0;
  double atom_mass = 0.0;

  double primary_reward = 0.0;
  double benchmark_reward = 0.0;
  double lost = 0.0;                // E[sum r_i 1(A*_t = i, O_it)]
  double retained = 0.0;            // E[sum r_i 1(A*_t = i, not O_it)]
  double best_available = 0.0;      // E[sum r*(I_t)] under the primary
  double coincidence_reward = 0.0;  // sum r_i Pr(A*_t = A_t = i)
  SecondMoments second_moments;

  std::vector<double> lost_prob;        // Pr(A*_t = i, O_it)
  std::vector<double> coincide_prob;    // Pr(A*_t = A_t = i)
  std::vector<double> bench_match_prob; // Pr(A*_t = i)
  std::vector<double> below_prob;       // Pr(A*_t = i, A_t < i), no-match counting as < i
  // Pr(F_{i,t-1} and not F*_{i,t-1}); zero at t = 0. F_it: i unavailable or
  // matched at t under the primary, F*_it the same under the benchmark.
  std::vector<double> f_not_fstar_prob;

  // Mass of {A*_t = i, A_t < i} outside {F_{i,t-1}, not F*_{i,t-1}}.
  double history_claim_violation = 0.0;
  // Pathwise violations of tau injectivity / coincidence attribution.
  std::uint64_t claim1_violations = 0;
  std::uint64_t claim2_violations = 0;
  std::optional<PathWitness> retained_witness;

  std::size_t cell(int i, int t) const {
    return static_cast<std::size_t>(i) * static_cast<std::size_t>(horizon) +
           static_cast<std::size_t>(t);
  }
};

inline constexpr int kMaxBernoulliBits = 20;
inline constexpr std::uint64_t kMaxStackBranches = 1'000'000;

// Every P in {0,1}^{N x T}. Geometric-only, N * T <= 20.
// Throws GuardError / std::invalid_argument.
ExactEventTable enumerate_bernoulli(const Instance& instance, const Policy& primary,
                                    const Policy& benchmark);

// Depth-first over every duration draw of the stack coupling, weighted by the
// pmf. Finite-support only, at most 1e6 leaves.
ExactEventTable enumerate_stack(const Instance& instance, const Policy& primary,
                                const Policy& benchmark);

struct CellCheck {
  int resource = 0;
  int step = 0;
  double lhs = 0.0;
  double rhs = 0.0;
  double margin = 0.0;
  bool pass = true;
};

struct CheckReport {
  double p = 0.0;
  std::vector<CellCheck> cells;
  bool pass = true;

  const CellCheck* find(int resource, int step) const;
};

inline constexpr double kExactTolerance = 1e-12;

// Pr(A*_t = A_t = i) >= p/(1-p) Pr(A*_t = i, O_it) for every (i, t), with
// p = p_min. At p = 1 the right-hand probability must vanish instead.
CheckReport lemma1_check(const ExactEventTable& table, const Instance& instance);

struct BoundCheck {
  double lhs = 0.0;
  double rhs = 0.0;
  bool applicable = true;
  bool pass = true;
  double margin() const { return rhs - lhs; }
};

// LOST bounds on an exact table at p = p_min.
struct LostBounds {
  BoundCheck decomposition;  // benchmark <= primary + LOST
  BoundCheck weak;           // LOST <= (1-p) primary
  BoundCheck geometric;      // LOST <= (1-p)/(1+p) primary
  BoundCheck coincidence;    // LOST <= (1-p)(primary - sum r_i Pr(A*_t = A_t = i))
};

LostBounds check_lost_bounds(const ExactEventTable& table, const Instance& instance,
                             double tolerance = kExactTolerance);

}  // namespace reuse
