#ifndef EVMT_TESTS_FIXTURES_HPP
#define EVMT_TESTS_FIXTURES_HPP

#include "evmt/groups.hpp"

#include <vector>

namespace fixture {

// Two-group toy layout: `signals` tiny p-values per group; the nulls are a
// symmetric dyadic grid (2k+1)/grid and its mirror, every value duplicated,
// so no null reaches 1 - T and every mirror is exact in floating point.
inline std::vector<double> toy_group(long n, long signals, double grid) {
  std::vector<double> p;
  for (long k = 1; k <= signals; ++k) p.push_back(1e-5 * static_cast<double>(k));
  const long half = (n - signals) / 4;
  for (long k = 0; k < half; ++k) {
    const double v = (2.0 * static_cast<double>(k) + 1.0) / grid;
    for (double x : {v, v, 1.0 - v, 1.0 - v}) p.push_back(x);
  }
  return p;
}

inline std::vector<double> toy_pvalues() {
  auto p = toy_group(100, 20, 128.0);
  const auto q = toy_group(1000, 20, 2048.0);
  p.insert(p.end(), q.begin(), q.end());
  return p;
}

inline evmt::GroupPartition toy_partition() {
  return evmt::GroupPartition::blocks({100, 1000});
}

inline evmt::PValueSet to_set(const std::vector<double>& p) {
  return evmt::PValueSet(Eigen::Map<const evmt::Vector>(
      p.data(), static_cast<evmt::Index>(p.size())));
}

}  // namespace fixture

#endif
