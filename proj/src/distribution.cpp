#include "reuse/distribution.hpp"

#include <cmath>
#include <cstdio>
#include <limits>

namespace reuse {

namespace {

std::string fmt_num(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

}  // namespace

double UsageDistribution::prob_one() const { return pmf(1); }

double UsageDistribution::pmf(int duration) const {
  if (duration < 1) return 0.0;
  if (is_geometric()) {
    const double p = as_geometric().p;
    return std::pow(1.0 - p, duration - 1) * p;
  }
  for (const auto& m : as_finite().pmf) {
    if (m.duration == duration) return m.prob;
  }
  return 0.0;
}

double UsageDistribution::survival(int duration) const {
  if (duration < 1) return 1.0;
  if (is_geometric()) return std::pow(1.0 - as_geometric().p, duration);
  double s = 0.0;
  for (const auto& m : as_finite().pmf) {
    if (m.duration > duration) s += m.prob;
  }
  return s;
}

int UsageDistribution::max_duration() const {
  if (is_geometric()) return 0;
  int d = 0;
  for (const auto& m : as_finite().pmf) {
    if (m.prob > 0.0 && m.duration > d) d = m.duration;
  }
  return d;
}

double UsageDistribution::hazard(int age) const {
  if (is_geometric()) return as_geometric().p;
  const double alive = survival(age);
  if (alive <= 0.0) return 1.0;
  const double h = pmf(age + 1) / alive;
  return h > 1.0 ? 1.0 : h;
}

int UsageDistribution::sample(double u) const {
  if (is_geometric()) {
    const double p = as_geometric().p;
    if (p >= 1.0) return 1;
    // Smallest d with 1 - (1-p)^d > u.
    const double d = std::floor(std::log1p(-u) / std::log1p(-p)) + 1.0;
    if (d >= static_cast<double>(std::numeric_limits<int>::max())) {
      return std::numeric_limits<int>::max();
    }
    return static_cast<int>(d);
  }
  const auto& pmf = as_finite().pmf;
  double cdf = 0.0;
  for (const auto& m : pmf) {
    cdf += m.prob;
    if (u < cdf) return m.duration;
  }
  return max_duration();
}

std::vector<std::string> UsageDistribution::violations() const {
  std::vector<std::string> out;
  if (is_geometric()) {
    const double p = as_geometric().p;
    if (!(p > 0.0 && p <= 1.0)) {
      out.push_back("geometric p = " + fmt_num(p) + " outside (0, 1]");
    }
    return out;
  }
  const auto& pmf = as_finite().pmf;
  if (pmf.empty()) {
    out.emplace_back("pmf is empty");
    return out;
  }
  double total = 0.0;
  int prev = 0;
  for (const auto& m : pmf) {
    if (m.duration < 1) {
      out.push_back("duration " + std::to_string(m.duration) + " < 1");
    } else if (m.duration <= prev) {
      out.push_back("durations not strictly increasing at " + std::to_string(m.duration));
    }
    prev = m.duration > prev ? m.duration : prev;
    if (!(m.prob >= 0.0 && m.prob <= 1.0)) {
      out.push_back("probability " + fmt_num(m.prob) + " outside [0, 1]");
    }
    total += m.prob;
  }
  if (!(std::abs(total - 1.0) <= kPmfTolerance)) {
    out.push_back("pmf sums to " + fmt_num(total));
  }
  return out;
}

}  // namespace reuse
