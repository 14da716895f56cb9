#include "reuse/state_space.hpp"

#include <array>
#include <cmath>
#include <string>

#include "reuse/errors.hpp"

namespace reuse {

namespace {

int radix_of(const UsageDistribution& dist) {
  return dist.is_geometric() ? 2 : dist.max_duration();
}

}  // namespace

double state_space_size(const Instance& instance) {
  double size = 1.0;
  for (const auto& r : instance.resources) size *= radix_of(r.dist);
  return size;
}

void check_guard(const Instance& instance, const GuardLimits& limits) {
  if (limits.force) return;
  if (instance.all_geometric()) {
    if (instance.size() > limits.max_geometric_resources) {
      throw GuardError("geometric resources (2^N bitmask states)", state_space_size(instance),
                       std::ldexp(1.0, limits.max_geometric_resources));
    }
  }
  const double size = state_space_size(instance);
  if (size > limits.max_states) {
    throw GuardError("age-augmented states", size, limits.max_states);
  }
}

double estimated_dp_bytes(const Instance& instance) {
  // Four dense double arrays plus one reachability mask, plus stored entries.
  const double s = state_space_size(instance);
  return s * (4.0 * sizeof(double) + sizeof(double)) +
         s * instance.horizon() * (sizeof(std::uint64_t) + sizeof(double) + sizeof(int));
}

StateSpace::StateSpace(const Instance& instance) {
  const int n = instance.size();
  for (int i = 0; i < n; ++i) {
    const auto& dist = instance.dist(i);
    const int m = radix_of(dist);
    radix_.push_back(m);
    stride_.push_back(size_);
    size_ *= static_cast<std::uint64_t>(m);
    geometric_.push_back(dist.is_geometric());

    std::vector<double> k(static_cast<std::size_t>(m) * m, 0.0);
    std::vector<double> row(static_cast<std::size_t>(m), 0.0);
    auto at = [m, &k](int from, int to) -> double& {
      return k[static_cast<std::size_t>(from) * m + to];
    };
    at(0, 0) = 1.0;
    if (dist.is_geometric()) {
      const double p = dist.as_geometric().p;
      at(1, 0) = p;
      at(1, 1) = 1.0 - p;
      row[0] = p;
      row[1] = 1.0 - p;
    } else {
      for (int e = 1; e < m; ++e) {
        const double h = e + 1 < m ? dist.hazard(e) : 1.0;
        at(e, 0) = h;
        if (e + 1 < m) at(e, e + 1) = 1.0 - h;
      }
      const double h0 = m > 1 ? dist.hazard(0) : 1.0;
      row[0] = h0;
      if (m > 1) row[1] = 1.0 - h0;
    }
    kernel_.push_back(std::move(k));
    match_row_.push_back(std::move(row));
  }
}

std::uint64_t StateSpace::encode(const SystemState& state) const {
  if (state.size() != resources()) {
    throw InvariantViolation("state has " + std::to_string(state.size()) +
                             " resources, expected " + std::to_string(resources()));
  }
  std::uint64_t code = 0;
  for (int i = 0; i < resources(); ++i) {
    const int age = state.age(i);
    int d = 0;
    if (age > 0) {
      if (geometric(i)) {
        d = 1;
      } else if (age < radix(i)) {
        d = age;
      } else {
        throw InvariantViolation("resource " + std::to_string(i) + " busy at age " +
                                 std::to_string(age) + " beyond its maximum duration");
      }
    }
    code += static_cast<std::uint64_t>(d) * stride(i);
  }
  return code;
}

void StateSpace::decode(std::uint64_t code, SystemState& out) const {
  if (out.size() != resources()) out = SystemState(resources());
  for (int i = 0; i < resources(); ++i) out.set_age(i, digit(code, i));
}

void StateSpace::apply(std::vector<double>& data, Direction dir, int matched) const {
  for (int i = 0; i < resources(); ++i) apply_dim(data, i, dir, i == matched, false);
}

void StateSpace::apply_support(std::vector<double>& data, int matched) const {
  for (int i = 0; i < resources(); ++i) {
    apply_dim(data, i, Direction::kPush, i == matched, true);
  }
}

void StateSpace::apply_dim(std::vector<double>& data, int i, Direction dir, bool use_match,
                           bool support) const {
  const int m = radix(i);
  if (m == 1) return;  // single digit, kernel and match row are both [1]
  const std::uint64_t s = stride(i);
  const std::uint64_t block = s * static_cast<std::uint64_t>(m);
  const auto& k = kernel(i);
  const auto& mrow = match_row(i);
  auto entry = [&](int from, int to) {
    const double w = (use_match && from == 0) ? mrow[static_cast<std::size_t>(to)]
                                              : k[static_cast<std::size_t>(from) * m + to];
    return support ? (w > 0.0 ? 1.0 : 0.0) : w;
  };

  std::vector<double> weights(static_cast<std::size_t>(m) * m);
  for (int a = 0; a < m; ++a) {
    for (int b = 0; b < m; ++b) weights[static_cast<std::size_t>(a) * m + b] = entry(a, b);
  }
  std::vector<double> x(static_cast<std::size_t>(m));
  std::vector<double> y(static_cast<std::size_t>(m));
  for (std::uint64_t base = 0; base < size_; base += block) {
    for (std::uint64_t inner = 0; inner < s; ++inner) {
      const std::uint64_t off = base + inner;
      for (int d = 0; d < m; ++d) x[static_cast<std::size_t>(d)] = data[off + d * s];
      for (int a = 0; a < m; ++a) {
        double acc = 0.0;
        for (int b = 0; b < m; ++b) {
          acc += dir == Direction::kPull
                     ? weights[static_cast<std::size_t>(a) * m + b] * x[static_cast<std::size_t>(b)]
                     : x[static_cast<std::size_t>(b)] * weights[static_cast<std::size_t>(b) * m + a];
        }
        y[static_cast<std::size_t>(a)] = support ? (acc > 0.0 ? 1.0 : 0.0) : acc;
      }
      for (int d = 0; d < m; ++d) data[off + d * s] = y[static_cast<std::size_t>(d)];
    }
  }
}

}  // namespace reuse
