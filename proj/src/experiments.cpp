#include "reuse/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <memory>
#include <stdexcept>

#include "reuse/benchmark.hpp"
#include "reuse/errors.hpp"
#include "reuse/random.hpp"

namespace reuse {

const char* to_string(Bound bound) {
  switch (bound) {
    case Bound::kTheorem1: return "theorem1";
    case Bound::kTheorem2: return "theorem2";
    case Bound::kTheorem3General: return "theorem3-general";
    case Bound::kTheorem3Geometric: return "theorem3-geometric";
  }
  return "unknown";
}

double bound_value(Bound bound, double p, double alpha) {
  switch (bound) {
    case Bound::kTheorem1: return 1.0 / (2.0 - p);
    case Bound::kTheorem2: return (1.0 + p) / 2.0;
    case Bound::kTheorem3General:
      return alpha > 0.0 ? 1.0 / (1.0 - p + 1.0 / alpha) : 0.0;
    case Bound::kTheorem3Geometric:
      return alpha > 0.0 ? 1.0 / ((1.0 - p) / (1.0 + p) + 1.0 / alpha) : 0.0;
  }
  return 0.0;
}

namespace {

bool needs_geometric(Bound b) {
  return b == Bound::kTheorem2 || b == Bound::kTheorem3Geometric;
}

std::string hex(std::uint64_t h) {
  char buf[24];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace

BoundReport evaluate_bound(const Instance& instance, const Policy& policy, Bound bound,
                           const GuardLimits& limits, std::string id) {
  BoundReport r;
  r.hash = instance_hash(instance);
  r.id = id.empty() ? hex(r.hash) : std::move(id);
  r.policy = policy.name;
  r.bound = bound;
  r.p_min = p_min(instance);
  if (needs_geometric(bound) && !instance.all_geometric()) {
    r.error = std::string(to_string(bound)) + " applies to geometric instances only";
    return r;
  }
  try {
    const ValueTable table = solve_opt(instance, limits);
    const PolicyEvaluation eval = evaluate_policy_detailed(instance, policy, limits);
    r.opt_value = table.opt_value();
    r.policy_value = eval.expected_reward;
    r.ratio = r.opt_value > 0.0 ? r.policy_value / r.opt_value : 1.0;
    double alpha = 1.0;
    if (bound == Bound::kTheorem3General || bound == Bound::kTheorem3Geometric) {
      alpha = eval.measured_alpha();
      r.alpha = alpha;
    }
    r.bound_value = bound_value(bound, r.p_min, alpha);
    r.margin = r.ratio - r.bound_value;
    r.pass = r.margin >= -kReportTolerance;
  } catch (const GuardError& e) {
    r.error = e.what();
  } catch (const std::invalid_argument& e) {
    r.error = e.what();
  }
  return r;
}

std::vector<BoundReport> verify_bounds(std::span<const Instance> corpus, const Policy& policy,
                                       Bound bound, const GuardLimits& limits) {
  std::vector<BoundReport> out;
  out.reserve(corpus.size());
  for (std::size_t k = 0; k < corpus.size(); ++k) {
    out.push_back(evaluate_bound(corpus[k], policy, bound, limits, "corpus[" + std::to_string(k) + "]"));
  }
  return out;
}

bool all_pass(std::span<const BoundReport> reports) {
  return std::all_of(reports.begin(), reports.end(), [](const BoundReport& r) { return r.pass; });
}

std::vector<Instance> make_corpus(const CorpusSpec& spec, int count, std::uint64_t seed) {
  std::vector<Instance> out;
  out.reserve(static_cast<std::size_t>(std::max(count, 0)));
  for (int k = 0; k < count; ++k) {
    SplitMix64 rng(splitmix64(seed) ^ splitmix64(static_cast<std::uint64_t>(k) + 1));
    GeneratorParams g;
    g.family = spec.family;
    g.n_resources = rng.uniform_int(1, spec.max_resources);
    int max_t = spec.max_horizon;
    if (spec.max_cells > 0) max_t = std::min(max_t, spec.max_cells / g.n_resources);
    g.horizon = rng.uniform_int(1, std::max(1, max_t));
    g.p_lo = spec.p_lo;
    g.p_hi = spec.p_hi;
    g.max_duration = spec.max_duration;
    g.edge_density = rng.uniform(spec.density_lo, spec.density_hi);
    out.push_back(random_instance(g, rng.next()));
  }
  return out;
}

std::vector<SweepRow> sweep_tight_example(std::span<const double> ps,
                                          std::span<const double> deltas) {
  std::vector<SweepRow> rows;
  const Policy greedy = greedy_policy();
  for (double p : ps) {
    for (double delta : deltas) {
      const Instance inst = tight_example(p, delta);
      SweepRow row;
      row.p = p;
      row.delta = delta;
      row.opt = solve_opt(inst).opt_value();
      row.greedy = evaluate_policy(inst, greedy);
      row.ratio = row.greedy / row.opt;
      row.closed_form = (1.0 + p) * (1.0 + delta) / (2.0 + delta);
      row.difference = std::abs(row.ratio - row.closed_form);
      row.gap = row.ratio - (1.0 + p) / 2.0;
      rows.push_back(row);
    }
  }
  return rows;
}

namespace {

struct Candidate {
  Instance raw;  // resource 0 is the anchor holding p_min
  double ratio = 1.0;
};

double greedy_ratio(const Instance& raw) {
  const Instance inst = canonicalize(raw);
  const double opt = solve_opt(inst).opt_value();
  if (opt <= 0.0) return 1.0;
  return evaluate_policy(inst, greedy_policy()) / opt;
}

Instance seed_instance(const SearchParams& params, SplitMix64& rng) {
  Instance inst;
  const int n = params.n_resources;
  const int horizon = params.horizon;
  for (int i = 0; i < n; ++i) {
    Resource r;
    r.reward = rng.uniform(0.5, 1.5);
    if (params.family == DistributionFamily::kNonReusable) {
      r.dist = UsageDistribution::fixed(horizon + 1);
    } else {
      r.dist = UsageDistribution::geometric(i == 0 ? params.p_min
                                                   : rng.uniform(params.p_min, 1.0));
    }
    inst.resources.push_back(std::move(r));
  }
  for (int t = 0; t < horizon; ++t) {
    std::vector<int> arrival;
    for (int i = 0; i < n; ++i) {
      if (rng.bernoulli(params.edge_density)) arrival.push_back(i);
    }
    inst.arrivals.push_back(std::move(arrival));
  }
  return inst;
}

Instance mutate(const Instance& base, const SearchParams& params, SplitMix64& rng) {
  Instance inst = base;
  const int n = inst.size();
  const bool can_move_p =
      params.family == DistributionFamily::kGeometric && n > 1 && params.p_min < 1.0;
  const int kinds = can_move_p ? 3 : 2;
  switch (rng.uniform_int(0, kinds - 1)) {
    case 0: {
      const int t = rng.uniform_int(0, inst.horizon() - 1);
      const int i = rng.uniform_int(0, n - 1);
      auto& a = inst.arrivals[static_cast<std::size_t>(t)];
      const auto it = std::find(a.begin(), a.end(), i);
      if (it != a.end()) {
        a.erase(it);
      } else {
        a.insert(std::upper_bound(a.begin(), a.end(), i), i);
      }
      break;
    }
    case 1: {
      const int i = rng.uniform_int(0, n - 1);
      inst.resources[static_cast<std::size_t>(i)].reward *= 1.0 + rng.uniform(-0.1, 0.1);
      break;
    }
    default: {
      const int i = rng.uniform_int(1, n - 1);
      auto& dist = inst.resources[static_cast<std::size_t>(i)].dist;
      const double p = std::clamp(dist.as_geometric().p + rng.uniform(-0.1, 0.1), params.p_min, 1.0);
      dist = UsageDistribution::geometric(p);
      break;
    }
  }
  return inst;
}

}  // namespace

SearchResult ratio_search(const SearchParams& params, std::uint64_t seed, std::uint64_t budget) {
  if (params.family != DistributionFamily::kGeometric &&
      params.family != DistributionFamily::kNonReusable) {
    throw std::invalid_argument("ratio_search supports the geometric and non-reusable families");
  }
  if (params.family == DistributionFamily::kGeometric &&
      !(params.p_min > 0.0 && params.p_min <= 1.0)) {
    throw std::invalid_argument("ratio_search: geometric p_min must lie in (0, 1]");
  }
  if (params.n_resources < 1 || params.horizon < 1 || params.population < 1 || params.keep < 1) {
    throw std::invalid_argument("ratio_search: sizes must be positive");
  }
  Instance probe;
  probe.resources.resize(static_cast<std::size_t>(params.n_resources));
  probe.arrivals.resize(static_cast<std::size_t>(params.horizon));
  for (auto& r : probe.resources) {
    r.dist = params.family == DistributionFamily::kNonReusable
                 ? UsageDistribution::fixed(params.horizon + 1)
                 : UsageDistribution::geometric(0.5);
  }
  check_guard(probe, GuardLimits{});

  SplitMix64 rng(splitmix64(seed ^ static_cast<std::uint64_t>(DrawKind::kSearch)));
  SearchResult result;
  std::vector<Candidate> chains;
  std::vector<Candidate> best;
  for (int k = 0; k < params.population; ++k) {
    Candidate c;
    c.raw = seed_instance(params, rng);
    c.ratio = greedy_ratio(c.raw);
    ++result.evaluations;
    chains.push_back(c);
    best.push_back(c);
  }
  for (std::uint64_t it = 0; it < budget; ++it) {
    const auto k = static_cast<std::size_t>(it % static_cast<std::uint64_t>(params.population));
    Instance next = mutate(chains[k].raw, params, rng);
    const double ratio = greedy_ratio(next);
    ++result.evaluations;
    if (ratio < chains[k].ratio) {
      chains[k] = Candidate{std::move(next), ratio};
      if (chains[k].ratio < best[k].ratio) best[k] = chains[k];
    }
  }
  std::stable_sort(best.begin(), best.end(),
                   [](const Candidate& a, const Candidate& b) { return a.ratio < b.ratio; });
  const Bound bound =
      params.family == DistributionFamily::kGeometric ? Bound::kTheorem2 : Bound::kTheorem1;
  const std::size_t keep = std::min(best.size(), static_cast<std::size_t>(params.keep));
  for (std::size_t k = 0; k < keep; ++k) {
    Instance inst = canonicalize(best[k].raw);
    BoundReport report = evaluate_bound(inst, greedy_policy(), bound, {}, "search[" + std::to_string(k) + "]");
    if (!report.pass) result.counterexample = true;
    result.instances.push_back(std::move(inst));
    result.reports.push_back(std::move(report));
  }
  return result;
}

std::vector<RetainedRow> retained_monitor(std::span<const Instance> corpus) {
  std::vector<RetainedRow> rows;
  const Policy greedy = greedy_policy();
  for (const auto& inst : corpus) {
    auto table = std::make_shared<const ValueTable>(solve_opt(inst));
    const ExactEventTable events = enumerate_bernoulli(inst, greedy, opt_policy(table));
    RetainedRow row;
    row.hash = instance_hash(inst);
    row.retained = events.retained;
    row.greedy = events.primary_reward;
    row.opt = events.benchmark_reward;
    row.lost = events.lost;
    row.holds = events.retained <= events.primary_reward + kExactTolerance;
    row.witness = events.retained_witness;
    rows.push_back(row);
  }
  return rows;
}

}  // namespace reuse
