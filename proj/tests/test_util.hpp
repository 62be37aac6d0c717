#pragma once

// Shared helpers for the unit tests. Random draws go through GaussianStream
// so every test is reproducible from a literal key, independent of the
// standard library's distribution internals.

#include <cstdint>
#include <utility>

#include "spde/noise.hpp"
#include "spde/spaces.hpp"

namespace testutil {

inline spde::HVec randn_vec(const spde::SpaceSpec& s, std::uint64_t key) {
  spde::GaussianStream g(key);
  Eigen::VectorXd d(s.dim());
  for (int i = 0; i < s.dim(); ++i) d[i] = g.next();
  return spde::HVec(s, std::move(d));
}

inline Eigen::VectorXd randn_raw(int n, std::uint64_t key) {
  spde::GaussianStream g(key);
  Eigen::VectorXd d(n);
  for (int i = 0; i < n; ++i) d[i] = g.next();
  return d;
}

}  // namespace testutil
