#include "reuse/coupling.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <stdexcept>
#include <thread>

#include "json.hpp"

#include "reuse/errors.hpp"
#include "reuse/summation.hpp"

namespace reuse {

const char* to_string(CouplingScheme scheme) {
  return scheme == CouplingScheme::kStack ? "stack" : "bernoulli";
}

namespace {

// Draw-index slots within one (resource, step) address.
constexpr std::uint64_t kPrimaryDraw = 0;
constexpr std::uint64_t kBenchmarkDraw = 1;

struct System {
  SystemState state;
  std::vector<std::int64_t> match_step;
  std::vector<std::int64_t> return_step;  // stack coupling only

  void reset(int n) {
    state = SystemState(n);
    match_step.assign(static_cast<std::size_t>(n), kNever);
    return_step.assign(static_cast<std::size_t>(n), 0);
  }
};

void check_feasible(const Policy& policy, Action a, int t, std::span<const int> incident,
                    const SystemState& state) {
  if (!a.is_match()) return;
  if (a.resource < 0 || a.resource >= state.size() || !state.available(a.resource) ||
      std::find(incident.begin(), incident.end(), a.resource) == incident.end()) {
    throw InvariantViolation("policy '" + policy.name + "' chose infeasible resource " +
                             std::to_string(a.resource) + " at step " + std::to_string(t));
  }
}

// Reusable scratch for repeated runs on one instance.
class Simulator {
 public:
  Simulator(const Instance& instance, const Policy& primary, const Policy& benchmark,
            CouplingScheme scheme)
      : instance_(instance), primary_(primary), benchmark_(benchmark), scheme_(scheme) {
    if (!primary.deterministic || !benchmark.deterministic) {
      throw std::invalid_argument("coupled runs require deterministic policies");
    }
    if (scheme == CouplingScheme::kBernoulli && !instance.all_geometric()) {
      throw std::invalid_argument("Bernoulli coupling requires geometric usage durations");
    }
    const auto n = static_cast<std::size_t>(instance.size());
    const auto horizon = static_cast<std::size_t>(instance.horizon());
    stacks_.resize(n);
    last_primary_match_.resize(n);
    out_of_stock_.resize(n);
    claimed_.resize(n * horizon);
    coincided_.resize(n * horizon);
  }

  // Returns the totals; appends to `trace` when non-null. Claim violations are
  // collected into `violations`.
  RunTotals run(const RandomSource& rng, CoupledTrace* trace, std::vector<std::string>& violations) {
    const int n = instance_.size();
    const int horizon = instance_.horizon();
    primary_sys_.reset(n);
    bench_sys_.reset(n);
    for (auto& s : stacks_) s.clear();
    std::fill(last_primary_match_.begin(), last_primary_match_.end(), kNever);
    std::fill(claimed_.begin(), claimed_.end(), 0);
    std::fill(coincided_.begin(), coincided_.end(), 0);

    RunTotals totals;
    for (int t = 0; t < horizon; ++t) {
      StepRecord* rec = nullptr;
      if (trace) {
        trace->steps.emplace_back();
        rec = &trace->steps.back();
        rec->step = t;
      }

      // (1) returns
      process_returns(primary_sys_, rng, t, rec ? &rec->returned : nullptr);
      process_returns(bench_sys_, rng, t, rec ? &rec->bench_returned : nullptr);

      // O_it as a suffix scan over the primary's availability.
      bool all_out = true;
      for (int i = n - 1; i >= 0; --i) {
        all_out = all_out && !primary_sys_.state.available(i);
        out_of_stock_[static_cast<std::size_t>(i)] = all_out ? 1 : 0;
      }
      const double best_avail = best_available_reward(primary_sys_.state, instance_);
      totals.best_available += best_avail;

      // (2) decisions
      const auto incident = instance_.incident(t);
      const Action a = primary_(t, incident, primary_sys_.state, instance_);
      const Action b = benchmark_(t, incident, bench_sys_.state, instance_);
      check_feasible(primary_, a, t, incident, primary_sys_.state);
      check_feasible(benchmark_, b, t, incident, bench_sys_.state);

      if (rec) {
        rec->available = primary_sys_.state.available_set();
        rec->bench_available = bench_sys_.state.available_set();
        rec->action = a;
        rec->bench_action = b;
        rec->out_of_stock = out_of_stock_;
        rec->best_available = best_avail;
      }

      // (3) durations
      int d_primary = 0;
      int d_bench = 0;
      if (scheme_ == CouplingScheme::kStack) {
        if (a.is_match() && a == b) {
          d_primary = d_bench = draw(rng, a.resource, t, kPrimaryDraw);
        } else {
          if (a.is_match()) {
            d_primary = draw(rng, a.resource, t, kPrimaryDraw);
            stacks_[static_cast<std::size_t>(a.resource)].push_back(d_primary);
          }
          if (b.is_match()) {
            auto& stack = stacks_[static_cast<std::size_t>(b.resource)];
            if (!stack.empty()) {
              d_bench = stack.back();
              stack.pop_back();
            } else {
              d_bench = draw(rng, b.resource, t, kBenchmarkDraw);
            }
          }
        }
      }
      occupy(primary_sys_, a, t, d_primary);
      occupy(bench_sys_, b, t, d_bench);

      // (4) recording
      if (a.is_match()) totals.primary_reward += instance_.reward(a.resource);
      if (b.is_match()) {
        const int i = b.resource;
        const double r = instance_.reward(i);
        totals.benchmark_reward += r;
        const int tau = last_primary_match_[static_cast<std::size_t>(i)];
        const bool lost = out_of_stock_[static_cast<std::size_t>(i)] != 0;
        if (lost) {
          totals.lost += r;
          check_lost(i, t, tau, violations);
        }
        if (a == b) {
          totals.coincidence_reward += r;
          coincided_[index(i, t)] = 1;
        }
        if (rec) {
          rec->lost = lost;
          rec->tau = lost ? tau : kNever;
          rec->coincide = a == b;
        }
      }
      if (rec) {
        rec->duration = d_primary;
        rec->bench_duration = d_bench;
      }
      if (a.is_match()) last_primary_match_[static_cast<std::size_t>(a.resource)] = t;
    }
    if (trace) {
      trace->primary_reward = totals.primary_reward;
      trace->benchmark_reward = totals.benchmark_reward;
      trace->lost = totals.lost;
      trace->best_available = totals.best_available;
      trace->coincidence_reward = totals.coincidence_reward;
    }
    return totals;
  }

 private:
  std::size_t index(int i, int t) const {
    return static_cast<std::size_t>(i) * static_cast<std::size_t>(instance_.horizon()) +
           static_cast<std::size_t>(t);
  }

  int draw(const RandomSource& rng, int i, int t, std::uint64_t slot) const {
    return instance_.dist(i).sample(rng.uniform(DrawKind::kDuration, static_cast<std::uint64_t>(i),
                                                static_cast<std::uint64_t>(t), slot));
  }

  void process_returns(System& sys, const RandomSource& rng, int t, std::vector<int>* returned) {
    for (int i = 0; i < sys.state.size(); ++i) {
      const auto k = static_cast<std::size_t>(i);
      if (sys.state.available(i)) continue;
      bool back = false;
      if (scheme_ == CouplingScheme::kStack) {
        back = sys.return_step[k] <= t;
      } else {
        back = rng.uniform(DrawKind::kReturn, static_cast<std::uint64_t>(i),
                           static_cast<std::uint64_t>(t)) < instance_.dist(i).as_geometric().p;
      }
      if (back) {
        sys.state.set_available(i);
        if (returned) returned->push_back(i);
      } else {
        sys.state.set_age(i, static_cast<int>(t - sys.match_step[k]));
      }
    }
  }

  static void occupy(System& sys, Action a, int t, int duration) {
    if (!a.is_match()) return;
    const auto k = static_cast<std::size_t>(a.resource);
    sys.match_step[k] = t;
    sys.return_step[k] = static_cast<std::int64_t>(t) + duration;
    // Provisional age; the next return pass sets the true age.
    sys.state.set_age(a.resource, 1);
  }

  void check_lost(int i, int t, int tau, std::vector<std::string>& violations) {
    if (tau == kNever) {
      violations.push_back("lost match on resource " + std::to_string(i) + " at step " +
                           std::to_string(t) + " without an earlier primary match");
      return;
    }
    auto& c = claimed_[index(i, tau)];
    if (c) {
      violations.push_back("claim 1: two lost matches on resource " + std::to_string(i) +
                           " attributed to step " + std::to_string(tau));
    }
    c = 1;
    if (coincided_[index(i, tau)]) {
      violations.push_back("claim 2: lost match on resource " + std::to_string(i) + " at step " +
                           std::to_string(t) + " attributed to coincidence step " +
                           std::to_string(tau));
    }
  }

  const Instance& instance_;
  const Policy& primary_;
  const Policy& benchmark_;
  CouplingScheme scheme_;
  System primary_sys_;
  System bench_sys_;
  std::vector<std::vector<int>> stacks_;
  std::vector<int> last_primary_match_;
  std::vector<char> out_of_stock_;
  std::vector<char> claimed_;
  std::vector<char> coincided_;
};

}  // namespace

CoupledTrace coupled_run(const Instance& instance, const Policy& primary, const Policy& benchmark,
                         CouplingScheme scheme, std::uint64_t seed, std::uint64_t stream) {
  Simulator sim(instance, primary, benchmark, scheme);
  CoupledTrace trace;
  trace.scheme = scheme;
  trace.seed = seed;
  trace.stream = stream;
  std::vector<std::string> violations;
  sim.run(RandomSource(seed, stream), &trace, violations);
  if (!violations.empty()) {
    throw InvariantViolation(violations.front(), trace_to_jsonl(trace, instance));
  }
  return trace;
}

std::vector<std::string> check_coupling_claims(const CoupledTrace& trace, int resources) {
  std::vector<std::string> out;
  const auto horizon = trace.steps.size();
  std::vector<char> claimed(static_cast<std::size_t>(resources) * horizon, 0);
  for (const auto& rec : trace.steps) {
    if (!rec.lost) continue;
    const int i = rec.bench_action.resource;
    if (rec.tau == kNever || rec.tau >= rec.step) {
      out.push_back("lost match on resource " + std::to_string(i) + " at step " +
                    std::to_string(rec.step) + " has no earlier primary match");
      continue;
    }
    auto& c = claimed[static_cast<std::size_t>(i) * horizon + static_cast<std::size_t>(rec.tau)];
    if (c) {
      out.push_back("claim 1: two lost matches on resource " + std::to_string(i) +
                    " attributed to step " + std::to_string(rec.tau));
    }
    c = 1;
    const auto& origin = trace.steps[static_cast<std::size_t>(rec.tau)];
    if (origin.coincide && origin.action.resource == i) {
      out.push_back("claim 2: lost match on resource " + std::to_string(i) + " at step " +
                    std::to_string(rec.step) + " attributed to coincidence step " +
                    std::to_string(rec.tau));
    }
  }
  return out;
}

std::string trace_to_jsonl(const CoupledTrace& trace, const Instance& instance) {
  using nlohmann::json;
  // Resources and steps are reported 1-based.
  auto shift = [](std::vector<int> v) {
    for (int& x : v) ++x;
    return v;
  };
  auto action = [](Action a) { return a.is_match() ? json(a.resource + 1) : json(0); };
  std::string out;
  json header = {{"record", "header"},
                 {"coupling", to_string(trace.scheme)},
                 {"seed", trace.seed},
                 {"stream", trace.stream},
                 {"N", instance.size()},
                 {"T", instance.horizon()},
                 {"index_base", 1},
                 {"no_match", 0}};
  out += header.dump() + '\n';
  for (const auto& rec : trace.steps) {
    std::vector<int> oos;
    for (std::size_t i = 0; i < rec.out_of_stock.size(); ++i) {
      if (rec.out_of_stock[i]) oos.push_back(static_cast<int>(i) + 1);
    }
    json j = {{"record", "step"},
              {"t", rec.step + 1},
              {"available", shift(rec.available)},
              {"bench_available", shift(rec.bench_available)},
              {"returned", shift(rec.returned)},
              {"bench_returned", shift(rec.bench_returned)},
              {"action", action(rec.action)},
              {"bench_action", action(rec.bench_action)},
              {"duration", rec.duration},
              {"bench_duration", rec.bench_duration},
              {"out_of_stock", oos},
              {"best_available", rec.best_available},
              {"lost", rec.lost},
              {"tau", rec.tau == kNever ? 0 : rec.tau + 1},
              {"coincide", rec.coincide}};
    out += j.dump() + '\n';
  }
  json totals = {{"record", "totals"},
                 {"primary_reward", trace.primary_reward},
                 {"benchmark_reward", trace.benchmark_reward},
                 {"lost", trace.lost},
                 {"best_available", trace.best_available},
                 {"coincidence_reward", trace.coincidence_reward}};
  out += totals.dump() + '\n';
  return out;
}

double measured_alpha(std::span<const CoupledTrace> traces) {
  CompensatedSum num;
  CompensatedSum den;
  for (const auto& tr : traces) {
    num += tr.primary_reward;
    den += tr.best_available;
  }
  return den.value() > 0.0 ? num.value() / den.value() : 1.0;
}

namespace {

Estimate summarize(const std::vector<double>& xs) {
  const double n = static_cast<double>(xs.size());
  CompensatedSum s;
  for (double x : xs) s += x;
  const double mean = s.value() / n;
  CompensatedSum ss;
  for (double x : xs) ss += (x - mean) * (x - mean);
  const double var = ss.value() / (n - 1.0);
  const double se = std::sqrt(var / n);
  return Estimate{mean, se, mean - 1.96 * se, mean + 1.96 * se};
}

}  // namespace

EstimateReport monte_carlo(const Instance& instance, const Policy& primary,
                           const Policy& benchmark, CouplingScheme scheme, int runs,
                           std::uint64_t seed, int threads) {
  if (runs < 2) throw std::invalid_argument("monte_carlo needs at least 2 runs");
  // Constructing a simulator up front surfaces argument errors on this thread.
  Simulator probe(instance, primary, benchmark, scheme);

  std::vector<RunTotals> results(static_cast<std::size_t>(runs));
  int workers = threads > 0 ? threads : static_cast<int>(std::thread::hardware_concurrency());
  workers = std::clamp(workers, 1, runs);
  std::vector<int> first_bad(static_cast<std::size_t>(workers), -1);
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(workers));

  auto work = [&](int w) {
    try {
      Simulator sim(instance, primary, benchmark, scheme);
      std::vector<std::string> violations;
      for (int k = w; k < runs; k += workers) {
        results[static_cast<std::size_t>(k)] =
            sim.run(RandomSource(seed, static_cast<std::uint64_t>(k)), nullptr, violations);
        if (!violations.empty()) {
          first_bad[static_cast<std::size_t>(w)] = k;
          return;
        }
      }
    } catch (...) {
      errors[static_cast<std::size_t>(w)] = std::current_exception();
    }
  };
  if (workers == 1) {
    work(0);
  } else {
    std::vector<std::jthread> pool;
    for (int w = 0; w < workers; ++w) pool.emplace_back(work, w);
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  int bad = -1;
  for (int k : first_bad) {
    if (k >= 0 && (bad < 0 || k < bad)) bad = k;
  }
  if (bad >= 0) {
    // Replays the offending run with a full trace; this throws with the dump.
    coupled_run(instance, primary, benchmark, scheme, seed, static_cast<std::uint64_t>(bad));
    throw InvariantViolation("coupling claim violated in run " + std::to_string(bad));
  }

  std::vector<double> col(static_cast<std::size_t>(runs));
  auto column = [&](auto member) {
    for (std::size_t k = 0; k < results.size(); ++k) col[k] = results[k].*member;
    return summarize(col);
  };
  EstimateReport report;
  report.runs = runs;
  report.seed = seed;
  report.scheme = scheme;
  report.primary_reward = column(&RunTotals::primary_reward);
  report.benchmark_reward = column(&RunTotals::benchmark_reward);
  report.lost = column(&RunTotals::lost);
  report.best_available = column(&RunTotals::best_available);
  report.coincidence_reward = column(&RunTotals::coincidence_reward);
  return report;
}

}  // namespace reuse
