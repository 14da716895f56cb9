#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace reuse {

// Raised when an instance exceeds the exact-computation state-space guard.
class GuardError : public std::runtime_error {
 public:
  GuardError(std::string guard, double size, double limit)
      : std::runtime_error("state-space guard '" + guard + "' exceeded: size " +
                           format_size(size) + " > limit " + format_size(limit)),
        guard_(std::move(guard)),
        size_(size),
        limit_(limit) {}

  const std::string& guard() const { return guard_; }
  double size() const { return size_; }
  double limit() const { return limit_; }

 private:
  static std::string format_size(double v) {
    if (v < 1e15) return std::to_string(static_cast<std::uint64_t>(v));
    return std::to_string(v);
  }

  std::string guard_;
  double size_;
  double limit_;
};

// An internal invariant failed: either a bug or a counterexample to a
// pathwise claim. Carries a human-readable dump when one is available.
class InvariantViolation : public std::logic_error {
 public:
  explicit InvariantViolation(const std::string& what, std::string dump = {})
      : std::logic_error(what), dump_(std::move(dump)) {}

  const std::string& dump() const { return dump_; }

 private:
  std::string dump_;
};

}  // namespace reuse
