#pragma once

// Test-only reference: plain recursive expectimax over explicit successor
// states. Busy finite resources carry their absolute return step, sampled
// in full at match time; busy geometric resources carry a flag.

#include <algorithm>
#include <map>
#include <optional>
#include <utility>
#include <vector>

#include "reuse/instance.hpp"
#include "reuse/policy.hpp"

namespace reuse::testing {

class BruteForce {
 public:
  // policy == nullptr means the optimum.
  BruteForce(const Instance& instance, const Policy* policy)
      : inst_(instance), policy_(policy) {}

  // (expected reward, expected sum of best available reward)
  std::pair<double, double> run() { return value(0, std::vector<int>(inst_.size(), 0)); }

 private:
  static constexpr int kBusyGeometric = -1;

  using Key = std::pair<int, std::vector<int>>;

  void successors(int t, std::vector<int>& st, std::size_t i, double prob,
                  std::vector<std::pair<std::vector<int>, double>>& out) const {
    if (prob == 0.0) return;
    if (i == st.size()) {
      out.emplace_back(st, prob);
      return;
    }
    const int s = st[i];
    if (s == kBusyGeometric) {
      const double p = inst_.dist(static_cast<int>(i)).as_geometric().p;
      st[i] = 0;
      successors(t, st, i + 1, prob * p, out);
      st[i] = kBusyGeometric;
      successors(t, st, i + 1, prob * (1.0 - p), out);
      return;
    }
    if (s > 0 && s <= t + 1) {
      st[i] = 0;
      successors(t, st, i + 1, prob, out);
      st[i] = s;
      return;
    }
    successors(t, st, i + 1, prob, out);
  }

  std::pair<double, double> after(int t, const std::vector<int>& st, int i) {
    std::vector<std::pair<std::vector<int>, double>> matched;
    if (i == kNoMatch) {
      matched.emplace_back(st, 1.0);
    } else if (inst_.dist(i).is_geometric()) {
      auto s = st;
      s[static_cast<std::size_t>(i)] = kBusyGeometric;
      matched.emplace_back(s, 1.0);
    } else {
      for (const auto& m : inst_.dist(i).as_finite().pmf) {
        auto s = st;
        s[static_cast<std::size_t>(i)] = t + m.duration;
        matched.emplace_back(s, m.prob);
      }
    }
    double v = i == kNoMatch ? 0.0 : inst_.reward(i);
    double b = 0.0;
    for (auto& [s0, q] : matched) {
      std::vector<std::pair<std::vector<int>, double>> next;
      successors(t, s0, 0, q, next);
      for (const auto& [s1, q1] : next) {
        const auto [w, c] = value(t + 1, s1);
        v += q1 * w;
        b += q1 * c;
      }
    }
    return {v, b};
  }

  std::pair<double, double> value(int t, const std::vector<int>& st) {
    if (t == inst_.horizon()) return {0.0, 0.0};
    const Key key{t, st};
    if (auto it = memo_.find(key); it != memo_.end()) return it->second;

    SystemState state(inst_.size());
    double best = 0.0;
    for (int i = 0; i < inst_.size(); ++i) {
      if (st[static_cast<std::size_t>(i)] != 0) {
        state.set_age(i, 1);
      } else {
        best = std::max(best, inst_.reward(i));
      }
    }
    std::pair<double, double> res;
    if (policy_ == nullptr) {
      res = after(t, st, kNoMatch);
      for (int i : inst_.incident(t)) {
        if (st[static_cast<std::size_t>(i)] != 0) continue;
        const auto cand = after(t, st, i);
        if (cand.first > res.first) res = cand;
      }
    } else {
      res = after(t, st, (*policy_)(t, inst_.incident(t), state, inst_).resource);
    }
    res.second += best;
    memo_.emplace(key, res);
    return res;
  }

  const Instance& inst_;
  const Policy* policy_;
  std::map<Key, std::pair<double, double>> memo_;
};

inline double brute_opt(const Instance& instance) {
  return BruteForce(instance, nullptr).run().first;
}

inline std::pair<double, double> brute_policy(const Instance& instance, const Policy& policy) {
  return BruteForce(instance, &policy).run();
}

}  // namespace reuse::testing
