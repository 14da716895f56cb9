#pragma once

#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace reuse {

// Integer usage duration D >= 1 with Pr(D = d) = (1 - p)^(d - 1) p.
struct Geometric {
  double p = 1.0;

  friend bool operator==(const Geometric&, const Geometric&) = default;
};

struct DurationMass {
  int duration = 1;
  double prob = 0.0;

  friend bool operator==(const DurationMass&, const DurationMass&) = default;
};

// Explicit pmf over durations, listed in strictly increasing order.
struct FiniteSupport {
  std::vector<DurationMass> pmf;

  friend bool operator==(const FiniteSupport&, const FiniteSupport&) = default;
};

inline constexpr double kPmfTolerance = 1e-12;

class UsageDistribution {
 public:
  UsageDistribution() : rep_(Geometric{1.0}) {}
  UsageDistribution(Geometric g) : rep_(g) {}  // NOLINT(implicit)
  UsageDistribution(FiniteSupport f) : rep_(std::move(f)) {}  // NOLINT(implicit)

  static UsageDistribution geometric(double p) { return Geometric{p}; }
  static UsageDistribution finite(std::vector<DurationMass> pmf) {
    return FiniteSupport{std::move(pmf)};
  }
  // Single duration; `fixed(T + 1)` models a non-reusable resource on a
  // horizon of T steps.
  static UsageDistribution fixed(int duration) {
    return FiniteSupport{{{duration, 1.0}}};
  }

  bool is_geometric() const { return std::holds_alternative<Geometric>(rep_); }
  const Geometric& as_geometric() const { return std::get<Geometric>(rep_); }
  const FiniteSupport& as_finite() const { return std::get<FiniteSupport>(rep_); }

  // Pr(D = 1).
  double prob_one() const;
  // Pr(D = d).
  double pmf(int duration) const;
  // Pr(D > d).
  double survival(int duration) const;
  // Largest duration with positive mass; 0 for geometric (unbounded).
  int max_duration() const;

  // Probability of returning at the next step for a resource that has been
  // busy for `age` steps without returning: Pr(D = age + 1 | D > age).
  // Age 0 is the step of the match itself. Returns 1 past the support.
  double hazard(int age) const;

  // Inverse-cdf draw from a uniform in [0, 1).
  int sample(double u) const;

  // Empty when the distribution is well formed.
  std::vector<std::string> violations() const;

  friend bool operator==(const UsageDistribution&, const UsageDistribution&) = default;

 private:
  std::variant<Geometric, FiniteSupport> rep_;
};

}  // namespace reuse
