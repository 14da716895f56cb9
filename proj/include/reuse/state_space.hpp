#pragma once

#include <cstdint>
#include <vector>

#include "reuse/instance.hpp"
#include "reuse/policy.hpp"

namespace reuse {

struct GuardLimits {
  int max_geometric_resources = 14;
  double max_states = 1e7;
  // Skip both checks. The CLI only sets this behind --force.
  bool force = false;
};

// Number of canonical decision-point states: 2 per geometric resource,
// max_duration per finite resource (available plus ages 1..max-1).
double state_space_size(const Instance& instance);

// Throws GuardError when the instance is too large for exact DP.
void check_guard(const Instance& instance, const GuardLimits& limits);

// Rough working-set estimate of solve_opt in bytes.
double estimated_dp_bytes(const Instance& instance);

// Mixed-radix encoding of decision-point states. Resource 0 is the least
// significant digit. Digit 0 is "available"; for a geometric resource digit 1
// is "busy" (age is irrelevant), for a finite resource digit e is "busy at
// age e".
//
// Transitions between consecutive decision points factor over resources:
// kernel(i) is the radix x radix row-stochastic matrix for a resource that
// was not matched, match_row(i) the distribution of the next digit for a
// resource matched at this step.
class StateSpace {
 public:
  explicit StateSpace(const Instance& instance);

  int resources() const { return static_cast<int>(radix_.size()); }
  std::uint64_t size() const { return size_; }
  int radix(int i) const { return radix_[static_cast<std::size_t>(i)]; }
  std::uint64_t stride(int i) const { return stride_[static_cast<std::size_t>(i)]; }
  bool geometric(int i) const { return geometric_[static_cast<std::size_t>(i)]; }

  int digit(std::uint64_t code, int i) const {
    return static_cast<int>((code / stride(i)) % static_cast<std::uint64_t>(radix(i)));
  }
  bool available(std::uint64_t code, int i) const { return digit(code, i) == 0; }

  // Throws InvariantViolation for an age the instance cannot produce.
  std::uint64_t encode(const SystemState& state) const;
  void decode(std::uint64_t code, SystemState& out) const;

  const std::vector<double>& kernel(int i) const { return kernel_[static_cast<std::size_t>(i)]; }
  const std::vector<double>& match_row(int i) const {
    return match_row_[static_cast<std::size_t>(i)];
  }

  enum class Direction { kPull, kPush };

  // Applies the product kernel to a dense array over all codes. kPull maps a
  // function of the next state to its conditional expectation given the
  // current state; kPush maps a distribution forward. With `matched >= 0` the
  // digit of that resource is taken from its match row instead of its
  // "available" row, i.e. the array is read/written at digit 0 as if the
  // resource had just been matched.
  void apply(std::vector<double>& data, Direction dir, int matched = -1) const;

  // Same as apply(kPush) on indicator arrays, using only the support of each
  // kernel; entries become 1.0 or 0.0.
  void apply_support(std::vector<double>& data, int matched = -1) const;

 private:
  void apply_dim(std::vector<double>& data, int i, Direction dir, bool use_match,
                 bool support) const;

  std::vector<int> radix_;
  std::vector<std::uint64_t> stride_;
  std::vector<bool> geometric_;
  std::vector<std::vector<double>> kernel_;
  std::vector<std::vector<double>> match_row_;
  std::uint64_t size_ = 1;
};

}  // namespace reuse
