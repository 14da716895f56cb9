#include "reuse/instance.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <stdexcept>

#include "reuse/random.hpp"

namespace reuse {

bool Instance::all_geometric() const {
  return std::all_of(resources.begin(), resources.end(),
                     [](const Resource& r) { return r.dist.is_geometric(); });
}

bool Instance::all_finite() const {
  return std::none_of(resources.begin(), resources.end(),
                      [](const Resource& r) { return r.dist.is_geometric(); });
}

ValidationReport validate(const Instance& instance) {
  ValidationReport report;
  const int n = instance.size();
  if (n < 1) report.violations.emplace_back("instance has no resources (N must be >= 1)");
  if (instance.horizon() < 1) report.violations.emplace_back("horizon T must be >= 1");

  for (int i = 0; i < n; ++i) {
    const double r = instance.reward(i);
    if (!std::isfinite(r) || r < 0.0) {
      report.violations.push_back("resource " + std::to_string(i) +
                                  ": reward must be finite and nonnegative");
    }
    for (const auto& v : instance.dist(i).violations()) {
      report.violations.push_back("resource " + std::to_string(i) + ": " + v);
    }
  }

  for (int t = 0; t < instance.horizon(); ++t) {
    const auto inc = instance.incident(t);
    for (int idx : inc) {
      if (idx < 0 || idx >= n) {
        report.violations.push_back("arrival " + std::to_string(t) + ": resource index " +
                                    std::to_string(idx) + " out of range [0, " +
                                    std::to_string(n) + ")");
      }
    }
    std::vector<int> sorted(inc.begin(), inc.end());
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
      report.notes.push_back("arrival " + std::to_string(t) +
                             ": duplicate resource indices collapsed");
    }
  }

  bool ascending = true;
  for (int i = 1; i < n; ++i) {
    if (instance.reward(i) < instance.reward(i - 1)) ascending = false;
  }
  if (!ascending && report.ok()) {
    const Instance canon = canonicalize(instance);
    std::string perm;
    for (int k = 0; k < n; ++k) {
      if (k) perm += ' ';
      perm += std::to_string(canon.original_index[static_cast<std::size_t>(k)]);
    }
    report.notes.push_back("rewards not ascending; canonical permutation applied [" + perm +
                           "]");
  }
  return report;
}

bool is_canonical(const Instance& instance) {
  for (int i = 1; i < instance.size(); ++i) {
    if (instance.reward(i) < instance.reward(i - 1)) return false;
  }
  for (const auto& a : instance.arrivals) {
    for (std::size_t k = 1; k < a.size(); ++k) {
      if (a[k] <= a[k - 1]) return false;
    }
  }
  return true;
}

Instance canonicalize(const Instance& instance) {
  const int n = instance.size();
  std::vector<int> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    return instance.reward(a) < instance.reward(b);
  });
  std::vector<int> new_of_old(static_cast<std::size_t>(n));
  for (int k = 0; k < n; ++k) new_of_old[static_cast<std::size_t>(order[k])] = k;

  Instance out;
  out.resources.reserve(static_cast<std::size_t>(n));
  out.original_index.reserve(static_cast<std::size_t>(n));
  const bool has_orig = static_cast<int>(instance.original_index.size()) == n;
  for (int k = 0; k < n; ++k) {
    const int old = order[static_cast<std::size_t>(k)];
    out.resources.push_back(instance.resources[static_cast<std::size_t>(old)]);
    out.original_index.push_back(has_orig ? instance.original_index[static_cast<std::size_t>(old)]
                                          : old);
  }
  out.arrivals.reserve(instance.arrivals.size());
  for (const auto& a : instance.arrivals) {
    std::vector<int> mapped;
    mapped.reserve(a.size());
    for (int idx : a) {
      if (idx >= 0 && idx < n) mapped.push_back(new_of_old[static_cast<std::size_t>(idx)]);
    }
    std::sort(mapped.begin(), mapped.end());
    mapped.erase(std::unique(mapped.begin(), mapped.end()), mapped.end());
    out.arrivals.push_back(std::move(mapped));
  }
  return out;
}

double p_min(const Instance& instance) {
  double p = 1.0;
  for (const auto& r : instance.resources) p = std::min(p, r.dist.prob_one());
  return p;
}

Instance tight_example(double p, double delta) {
  if (!(delta > 0.0)) throw std::invalid_argument("tight_example: delta must be > 0");
  if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("tight_example: p must lie in [0, 1]");
  constexpr int kHorizon = 2;
  const UsageDistribution dist =
      p > 0.0 ? UsageDistribution::geometric(p) : UsageDistribution::fixed(kHorizon + 1);
  Instance inst;
  inst.resources = {{1.0, dist}, {1.0 + delta, dist}};
  inst.arrivals = {{0, 1}, {1}};
  inst.original_index = {0, 1};
  return inst;
}

namespace {

UsageDistribution random_finite(SplitMix64& rng, int max_duration) {
  const int dmax = std::max(1, max_duration);
  std::vector<DurationMass> pmf;
  for (int d = 1; d <= dmax; ++d) {
    if (d == 1 || rng.bernoulli(0.6)) pmf.push_back({d, 0.05 + rng.uniform()});
  }
  double total = 0.0;
  for (const auto& m : pmf) total += m.prob;
  double head = 0.0;
  for (std::size_t k = 0; k + 1 < pmf.size(); ++k) {
    pmf[k].prob /= total;
    head += pmf[k].prob;
  }
  pmf.back().prob = 1.0 - head;
  return UsageDistribution::finite(std::move(pmf));
}

}  // namespace

Instance random_instance(const GeneratorParams& params, std::uint64_t seed) {
  if (params.n_resources < 1 || params.n_resources > kMaxGeneratedResources) {
    throw std::invalid_argument("random_instance: n_resources must lie in [1, 14]");
  }
  if (params.horizon < 1 || params.horizon > kMaxGeneratedHorizon) {
    throw std::invalid_argument("random_instance: horizon must lie in [1, 20]");
  }
  if (!(params.p_lo > 0.0 && params.p_lo <= params.p_hi && params.p_hi <= 1.0)) {
    throw std::invalid_argument("random_instance: need 0 < p_lo <= p_hi <= 1");
  }
  if (!(params.edge_density >= 0.0 && params.edge_density <= 1.0)) {
    throw std::invalid_argument("random_instance: edge_density must lie in [0, 1]");
  }
  if (params.max_duration < 1) {
    throw std::invalid_argument("random_instance: max_duration must be >= 1");
  }
  if (!(params.reward_lo >= 0.0 && params.reward_lo <= params.reward_hi)) {
    throw std::invalid_argument("random_instance: need 0 <= reward_lo <= reward_hi");
  }

  SplitMix64 rng(splitmix64(seed ^ static_cast<std::uint64_t>(DrawKind::kGenerator)));
  Instance inst;
  for (int i = 0; i < params.n_resources; ++i) {
    Resource r;
    r.reward = rng.uniform(params.reward_lo, params.reward_hi);
    bool geometric = false;
    switch (params.family) {
      case DistributionFamily::kGeometric: geometric = true; break;
      case DistributionFamily::kFinite: geometric = false; break;
      case DistributionFamily::kMixed: geometric = rng.bernoulli(0.5); break;
      case DistributionFamily::kNonReusable:
        r.dist = UsageDistribution::fixed(params.horizon + 1);
        break;
      case DistributionFamily::kImmediate: r.dist = UsageDistribution::geometric(1.0); break;
    }
    if (params.family == DistributionFamily::kGeometric ||
        params.family == DistributionFamily::kFinite ||
        params.family == DistributionFamily::kMixed) {
      r.dist = geometric ? UsageDistribution::geometric(rng.uniform(params.p_lo, params.p_hi))
                         : random_finite(rng, params.max_duration);
    }
    inst.resources.push_back(std::move(r));
  }
  for (int t = 0; t < params.horizon; ++t) {
    std::vector<int> arrival;
    for (int i = 0; i < params.n_resources; ++i) {
      if (rng.bernoulli(params.edge_density)) arrival.push_back(i);
    }
    inst.arrivals.push_back(std::move(arrival));
  }
  return canonicalize(inst);
}

namespace {

struct Fnv1a {
  std::uint64_t h = 0xcbf29ce484222325ULL;

  void bytes(const void* data, std::size_t len) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (std::size_t k = 0; k < len; ++k) {
      h ^= p[k];
      h *= 0x100000001b3ULL;
    }
  }
  void u64(std::uint64_t v) { bytes(&v, sizeof(v)); }
  void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }
};

}  // namespace

std::uint64_t instance_hash(const Instance& instance) {
  Fnv1a f;
  f.u64(static_cast<std::uint64_t>(instance.size()));
  f.u64(static_cast<std::uint64_t>(instance.horizon()));
  for (const auto& r : instance.resources) {
    f.f64(r.reward);
    if (r.dist.is_geometric()) {
      f.u64(1);
      f.f64(r.dist.as_geometric().p);
    } else {
      f.u64(2);
      f.u64(r.dist.as_finite().pmf.size());
      for (const auto& m : r.dist.as_finite().pmf) {
        f.u64(static_cast<std::uint64_t>(m.duration));
        f.f64(m.prob);
      }
    }
  }
  for (const auto& a : instance.arrivals) {
    f.u64(a.size());
    for (int idx : a) f.u64(static_cast<std::uint64_t>(idx));
  }
  return f.h;
}

}  // namespace reuse
