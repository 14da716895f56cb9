#include "reuse/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "reuse/coupling.hpp"
#include "reuse/errors.hpp"
#include "reuse/summation.hpp"

namespace reuse {

namespace {

struct Side {
  SystemState state;
  std::vector<int> match_step;
  std::vector<std::int64_t> return_step;
  std::vector<char> f_prev;  // F_{i,t-1}
};

// Replay state of one branch of the enumeration.
struct Path {
  Side primary;
  Side bench;
  std::vector<int> last_primary;
  std::vector<char> claimed;
  std::vector<char> coincided;
  std::vector<std::vector<int>> stacks;
  RunTotals totals;

  Path(int n, int horizon) {
    for (Side* s : {&primary, &bench}) {
      s->state = SystemState(n);
      s->match_step.assign(static_cast<std::size_t>(n), -1);
      s->return_step.assign(static_cast<std::size_t>(n), 0);
      s->f_prev.assign(static_cast<std::size_t>(n), 0);
    }
    last_primary.assign(static_cast<std::size_t>(n), -1);
    claimed.assign(static_cast<std::size_t>(n) * static_cast<std::size_t>(horizon), 0);
    coincided.assign(claimed.size(), 0);
    stacks.resize(static_cast<std::size_t>(n));
  }
};

void set_ages(Side& side, int t) {
  for (int i = 0; i < side.state.size(); ++i) {
    if (!side.state.available(i)) {
      side.state.set_age(i, t - side.match_step[static_cast<std::size_t>(i)]);
    }
  }
}

void occupy(Side& side, Action a, int t, std::int64_t duration) {
  if (!a.is_match()) return;
  const auto k = static_cast<std::size_t>(a.resource);
  side.match_step[k] = t;
  side.return_step[k] = t + duration;
  side.state.set_age(a.resource, 1);
}

bool feasible(Action a, std::span<const int> incident, const SystemState& s) {
  if (!a.is_match()) return true;
  return a.resource >= 0 && a.resource < s.size() && s.available(a.resource) &&
         std::find(incident.begin(), incident.end(), a.resource) != incident.end();
}

class Accumulator {
 public:
  Accumulator(const Instance& instance)
      : instance_(instance),
        n_(instance.size()),
        horizon_(instance.horizon()),
        cells_(static_cast<std::size_t>(n_) * static_cast<std::size_t>(horizon_)),
        lost_(cells_),
        coincide_(cells_),
        bench_match_(cells_),
        below_(cells_),
        f_not_fstar_(cells_),
        oos_(static_cast<std::size_t>(n_)) {}

  std::pair<Action, Action> decide(Path& path, int t, const Policy& primary,
                                   const Policy& benchmark) {
    const auto incident = instance_.incident(t);
    set_ages(path.primary, t);
    set_ages(path.bench, t);
    const Action a = primary(t, incident, path.primary.state, instance_);
    const Action b = benchmark(t, incident, path.bench.state, instance_);
    if (!feasible(a, incident, path.primary.state) || !feasible(b, incident, path.bench.state)) {
      throw InvariantViolation("policy chose an infeasible action at step " + std::to_string(t));
    }
    return {a, b};
  }

  // Records step t of `path` with probability weight `w`, then applies the
  // matches (durations are set later by the caller for the stack engine).
  void record(Path& path, int t, Action a, Action b, double w, std::uint64_t atom) {
    const SystemState& g = path.primary.state;
    const SystemState& o = path.bench.state;
    bool all_out = true;
    for (int i = n_ - 1; i >= 0; --i) {
      all_out = all_out && !g.available(i);
      oos_[static_cast<std::size_t>(i)] = all_out ? 1 : 0;
    }
    const double best = best_available_reward(g, instance_);
    best_available_ += w * best;
    path.totals.best_available += best;
    for (int i = 0; i < n_; ++i) {
      const auto k = static_cast<std::size_t>(i);
      if (t > 0 && path.primary.f_prev[k] && !path.bench.f_prev[k]) {
        f_not_fstar_[cell(i, t)] += w;
      }
    }
    if (a.is_match()) {
      primary_ += w * instance_.reward(a.resource);
      path.totals.primary_reward += instance_.reward(a.resource);
    }
    if (b.is_match()) {
      const int i = b.resource;
      const auto k = static_cast<std::size_t>(i);
      const double r = instance_.reward(i);
      benchmark_ += w * r;
      path.totals.benchmark_reward += r;
      bench_match_[cell(i, t)] += w;
      if (oos_[k]) {
        lost_total_ += w * r;
        path.totals.lost += r;
        lost_[cell(i, t)] += w;
        const int tau = path.last_primary[k];
        if (tau < 0) {
          ++claim1_;
        } else {
          auto& c = path.claimed[cell(i, tau)];
          if (c) ++claim1_;
          c = 1;
          if (path.coincided[cell(i, tau)]) ++claim2_;
        }
      } else {
        retained_ += w * r;
        if (!witness_ && (!a.is_match() || instance_.reward(a.resource) < r)) {
          witness_ = PathWitness{atom, t, i};
        }
      }
      if (!a.is_match() || a.resource < i) {
        below_[cell(i, t)] += w;
        const bool history = t > 0 && path.primary.f_prev[k] && !path.bench.f_prev[k];
        if (!history) history_violation_ += w;
      }
      if (a == b) {
        coincide_[cell(i, t)] += w;
        coincidence_ += w * r;
        path.totals.coincidence_reward += r;
        path.coincided[cell(i, t)] = 1;
      }
    }
    for (int i = 0; i < n_; ++i) {
      const auto k = static_cast<std::size_t>(i);
      path.primary.f_prev[k] = (!g.available(i) || a.resource == i) ? 1 : 0;
      path.bench.f_prev[k] = (!o.available(i) || b.resource == i) ? 1 : 0;
    }
    if (a.is_match()) path.last_primary[static_cast<std::size_t>(a.resource)] = t;
  }

  void add_atom(double w) {
    ++atoms_;
    mass_ += w;
  }

  // Adds the squared run totals of a completed path with weight `w`.
  void close_path(const Path& path, double w) {
    const RunTotals& x = path.totals;
    sq_primary_ += w * x.primary_reward * x.primary_reward;
    sq_benchmark_ += w * x.benchmark_reward * x.benchmark_reward;
    sq_lost_ += w * x.lost * x.lost;
    sq_best_ += w * x.best_available * x.best_available;
    sq_coincidence_ += w * x.coincidence_reward * x.coincidence_reward;
  }

  ExactEventTable finish() const {
    ExactEventTable table;
    table.resources = n_;
    table.horizon = horizon_;
    table.atoms = atoms_;
    table.atom_mass = mass_.value();
    table.primary_reward = primary_.value();
    table.benchmark_reward = benchmark_.value();
    table.lost = lost_total_.value();
    table.retained = retained_.value();
    table.best_available = best_available_.value();
    table.coincidence_reward = coincidence_.value();
    table.second_moments = {sq_primary_.value(), sq_benchmark_.value(), sq_lost_.value(),
                            sq_best_.value(), sq_coincidence_.value()};
    auto dump = [](const std::vector<CompensatedSum>& v) {
      std::vector<double> out;
      out.reserve(v.size());
      for (const auto& s : v) out.push_back(s.value());
      return out;
    };
    table.lost_prob = dump(lost_);
    table.coincide_prob = dump(coincide_);
    table.bench_match_prob = dump(bench_match_);
    table.below_prob = dump(below_);
    table.f_not_fstar_prob = dump(f_not_fstar_);
    table.history_claim_violation = history_violation_.value();
    table.claim1_violations = claim1_;
    table.claim2_violations = claim2_;
    table.retained_witness = witness_;
    return table;
  }

 private:
  std::size_t cell(int i, int t) const {
    return static_cast<std::size_t>(i) * static_cast<std::size_t>(horizon_) +
           static_cast<std::size_t>(t);
  }

  const Instance& instance_;
  int n_;
  int horizon_;
  std::size_t cells_;
  CompensatedSum primary_, benchmark_, lost_total_, retained_, best_available_, coincidence_;
  CompensatedSum history_violation_, mass_;
  CompensatedSum sq_primary_, sq_benchmark_, sq_lost_, sq_best_, sq_coincidence_;
  std::vector<CompensatedSum> lost_, coincide_, bench_match_, below_, f_not_fstar_;
  std::vector<char> oos_;
  std::uint64_t claim1_ = 0;
  std::uint64_t claim2_ = 0;
  std::uint64_t atoms_ = 0;
  std::optional<PathWitness> witness_;
};

void require(const Instance& instance, const Policy& primary, const Policy& benchmark) {
  if (!is_canonical(instance) || !validate(instance).ok()) {
    throw std::invalid_argument("oracle requires a valid canonical instance");
  }
  if (!primary.deterministic || !benchmark.deterministic) {
    throw std::invalid_argument("oracle requires deterministic policies");
  }
}

class StackEnumerator {
 public:
  StackEnumerator(const Instance& instance, const Policy& primary, const Policy& benchmark)
      : instance_(instance), primary_(primary), benchmark_(benchmark), acc_(instance) {}

  ExactEventTable run() {
    Path root(instance_.size(), instance_.horizon());
    step(root, 0, 1.0);
    return acc_.finish();
  }

 private:
  void step(Path& path, int t, double w) {
    if (t == instance_.horizon()) {
      if (++leaves_ > kMaxStackBranches) {
        throw GuardError("stack-coupling branches", static_cast<double>(leaves_),
                         static_cast<double>(kMaxStackBranches));
      }
      acc_.add_atom(w);
      acc_.close_path(path, w);
      return;
    }
    for (Side* s : {&path.primary, &path.bench}) {
      for (int i = 0; i < s->state.size(); ++i) {
        if (!s->state.available(i) && s->return_step[static_cast<std::size_t>(i)] <= t) {
          s->state.set_available(i);
        }
      }
    }
    const auto [a, b] = acc_.decide(path, t, primary_, benchmark_);
    acc_.record(path, t, a, b, w, leaves_);

    const auto& pmf_of = [&](int i) -> const std::vector<DurationMass>& {
      return instance_.dist(i).as_finite().pmf;
    };
    if (a.is_match() && a == b) {
      for (const auto& m : pmf_of(a.resource)) {
        if (m.prob <= 0.0) continue;
        Path next = path;
        occupy(next.primary, a, t, m.duration);
        occupy(next.bench, b, t, m.duration);
        step(next, t + 1, w * m.prob);
      }
      return;
    }
    if (a.is_match()) {
      for (const auto& m : pmf_of(a.resource)) {
        if (m.prob <= 0.0) continue;
        Path next = path;
        occupy(next.primary, a, t, m.duration);
        next.stacks[static_cast<std::size_t>(a.resource)].push_back(m.duration);
        bench_step(next, t, b, w * m.prob);
      }
      return;
    }
    Path next = path;
    bench_step(next, t, b, w);
  }

  void bench_step(Path& path, int t, Action b, double w) {
    if (!b.is_match()) {
      step(path, t + 1, w);
      return;
    }
    auto& stack = path.stacks[static_cast<std::size_t>(b.resource)];
    if (!stack.empty()) {
      const int d = stack.back();
      stack.pop_back();
      occupy(path.bench, b, t, d);
      step(path, t + 1, w);
      return;
    }
    for (const auto& m : instance_.dist(b.resource).as_finite().pmf) {
      if (m.prob <= 0.0) continue;
      Path next = path;
      occupy(next.bench, b, t, m.duration);
      step(next, t + 1, w * m.prob);
    }
  }

  const Instance& instance_;
  const Policy& primary_;
  const Policy& benchmark_;
  Accumulator acc_;
  std::uint64_t leaves_ = 0;
};

}  // namespace

ExactEventTable enumerate_bernoulli(const Instance& instance, const Policy& primary,
                                    const Policy& benchmark) {
  require(instance, primary, benchmark);
  if (!instance.all_geometric()) {
    throw std::invalid_argument("enumerate_bernoulli requires geometric usage durations");
  }
  const int n = instance.size();
  const int horizon = instance.horizon();
  const int bits = n * horizon;
  if (bits > kMaxBernoulliBits) {
    throw GuardError("Bernoulli atoms (2^(N*T))", std::ldexp(1.0, bits),
                     std::ldexp(1.0, kMaxBernoulliBits));
  }

  Accumulator acc(instance);
  const std::uint64_t atoms = std::uint64_t{1} << bits;
  std::vector<double> p(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) p[static_cast<std::size_t>(i)] = instance.dist(i).as_geometric().p;

  for (std::uint64_t atom = 0; atom < atoms; ++atom) {
    // Bit i * T + t of the atom is P_it.
    auto bit = [&](int i, int t) { return (atom >> (i * horizon + t)) & 1U; };
    double w = 1.0;
    for (int i = 0; i < n; ++i) {
      const double pi = p[static_cast<std::size_t>(i)];
      for (int t = 0; t < horizon; ++t) w *= bit(i, t) ? pi : 1.0 - pi;
    }
    acc.add_atom(w);
    if (w == 0.0) continue;

    Path path(n, horizon);
    for (int t = 0; t < horizon; ++t) {
      for (Side* s : {&path.primary, &path.bench}) {
        for (int i = 0; i < n; ++i) {
          if (!s->state.available(i) && bit(i, t)) s->state.set_available(i);
        }
      }
      const auto [a, b] = acc.decide(path, t, primary, benchmark);
      acc.record(path, t, a, b, w, atom);
      occupy(path.primary, a, t, 0);
      occupy(path.bench, b, t, 0);
    }
    acc.close_path(path, w);
  }
  return acc.finish();
}

ExactEventTable enumerate_stack(const Instance& instance, const Policy& primary,
                                const Policy& benchmark) {
  require(instance, primary, benchmark);
  if (!instance.all_finite()) {
    throw std::invalid_argument(
        "enumerate_stack requires finite-support durations (use enumerate_bernoulli)");
  }
  return StackEnumerator(instance, primary, benchmark).run();
}

const CellCheck* CheckReport::find(int resource, int step) const {
  for (const auto& c : cells) {
    if (c.resource == resource && c.step == step) return &c;
  }
  return nullptr;
}

CheckReport lemma1_check(const ExactEventTable& table, const Instance& instance) {
  CheckReport report;
  const double p = p_min(instance);
  report.p = p;
  for (int i = 0; i < table.resources; ++i) {
    for (int t = 0; t < table.horizon; ++t) {
      CellCheck c;
      c.resource = i;
      c.step = t;
      c.lhs = table.coincide_prob[table.cell(i, t)];
      const double lost = table.lost_prob[table.cell(i, t)];
      if (p >= 1.0) {
        c.rhs = 0.0;
        c.margin = -lost;
        c.pass = lost <= kExactTolerance;
      } else {
        c.rhs = p * lost / (1.0 - p);
        c.margin = c.lhs - c.rhs;
        c.pass = c.margin >= -kExactTolerance;
      }
      report.pass = report.pass && c.pass;
      report.cells.push_back(c);
    }
  }
  return report;
}

LostBounds check_lost_bounds(const ExactEventTable& table, const Instance& instance,
                             double tolerance) {
  const double p = p_min(instance);
  const bool geometric = instance.all_geometric();
  auto make = [tolerance](double lhs, double rhs, bool applicable) {
    BoundCheck b;
    b.lhs = lhs;
    b.rhs = rhs;
    b.applicable = applicable;
    b.pass = !applicable || lhs <= rhs + tolerance;
    return b;
  };
  LostBounds out;
  out.decomposition = make(table.benchmark_reward, table.primary_reward + table.lost, true);
  out.weak = make(table.lost, (1.0 - p) * table.primary_reward, true);
  out.geometric = make(table.lost, (1.0 - p) / (1.0 + p) * table.primary_reward, geometric);
  out.coincidence =
      make(table.lost, (1.0 - p) * (table.primary_reward - table.coincidence_reward), geometric);
  return out;
}

}  // namespace reuse
