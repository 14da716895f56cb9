#pragma once

#include "reuse/instance.hpp"

namespace reuse::testing {

inline Instance geometric_three() {
  Instance inst;
  inst.resources = {{1.0, UsageDistribution::geometric(0.3)},
                    {2.0, UsageDistribution::geometric(0.6)},
                    {3.5, UsageDistribution::geometric(0.45)}};
  inst.arrivals = {{0, 1, 2}, {1, 2}, {0, 2}, {0, 1, 2}};
  return inst;
}

inline Instance finite_two() {
  Instance inst;
  inst.resources = {{1.0, UsageDistribution::finite({{1, 0.5}, {2, 0.5}})},
                    {1.5, UsageDistribution::finite({{1, 0.2}, {3, 0.8}})}};
  inst.arrivals = {{0, 1}, {1}, {0, 1}, {0, 1}};
  return inst;
}

inline Instance mixed_three() {
  Instance inst;
  inst.resources = {{0.7, UsageDistribution::geometric(0.4)},
                    {1.0, UsageDistribution::fixed(2)},
                    {1.2, UsageDistribution::geometric(0.9)}};
  inst.arrivals = {{0, 1, 2}, {2}, {0, 1}, {1, 2}, {0, 2}};
  return inst;
}

}  // namespace reuse::testing
