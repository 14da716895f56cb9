#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "reuse/distribution.hpp"

namespace reuse {

struct Resource {
  double reward = 0.0;
  UsageDistribution dist;

  friend bool operator==(const Resource&, const Resource&) = default;
};

// A problem instance: N resources with rewards and usage distributions, and
// one arrival per step listing the incident resources (0-based indices).
//
// In canonical form rewards are ascending, so a larger index never has a
// smaller reward, and every arrival set is sorted without duplicates.
// `original_index[k]` is the input index of canonical resource k.
struct Instance {
  std::vector<Resource> resources;
  std::vector<std::vector<int>> arrivals;
  std::vector<int> original_index;

  int size() const { return static_cast<int>(resources.size()); }
  int horizon() const { return static_cast<int>(arrivals.size()); }
  double reward(int i) const { return resources[static_cast<std::size_t>(i)].reward; }
  const UsageDistribution& dist(int i) const {
    return resources[static_cast<std::size_t>(i)].dist;
  }
  std::span<const int> incident(int t) const {
    return arrivals[static_cast<std::size_t>(t)];
  }

  bool all_geometric() const;
  bool all_finite() const;

  friend bool operator==(const Instance&, const Instance&) = default;
};

struct ValidationReport {
  std::vector<std::string> violations;
  // Informational, e.g. that a canonicalizing permutation was applied.
  std::vector<std::string> notes;

  bool ok() const { return violations.empty(); }
};

ValidationReport validate(const Instance& instance);

bool is_canonical(const Instance& instance);

// Stable sort of resources by reward; remaps and normalizes arrival sets and
// composes `original_index`. Idempotent.
Instance canonicalize(const Instance& instance);

// min over resources of Pr(D = 1).
double p_min(const Instance& instance);

// T = 2, N = 2, rewards (1, 1 + delta), arrivals {1, 2} then {2} (1-based),
// both resources Geometric(p); p = 0 is encoded as the fixed duration T + 1.
Instance tight_example(double p, double delta);

enum class DistributionFamily {
  kGeometric,
  kFinite,
  kMixed,        // each resource geometric or finite with equal odds
  kNonReusable,  // fixed duration T + 1
  kImmediate,    // every resource returns next step (p = 1)
};

struct GeneratorParams {
  int n_resources = 3;
  int horizon = 4;
  DistributionFamily family = DistributionFamily::kGeometric;
  double p_lo = 0.2;
  double p_hi = 0.8;
  int max_duration = 3;
  double edge_density = 0.7;
  double reward_lo = 0.0;
  double reward_hi = 1.0;
};

inline constexpr int kMaxGeneratedResources = 14;
inline constexpr int kMaxGeneratedHorizon = 20;

// Deterministic in (params, seed); the result is canonical and valid.
// Throws std::invalid_argument when params fall outside the generator bounds.
Instance random_instance(const GeneratorParams& params, std::uint64_t seed);

// 64-bit FNV-1a over a canonical byte rendering (rewards, pmfs, arrivals).
std::uint64_t instance_hash(const Instance& instance);

}  // namespace reuse
