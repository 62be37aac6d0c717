#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <random>

namespace spde {

// Time grid and driving-noise layout for one experiment: `steps` Euler steps
// of size dt on [0, steps*dt], with a spectrally truncated cylindrical Wiener
// process of `noise_dim` modes.
//
// Increments are a pure function of (seed, path_index, step): every path
// index opens an independent substream, so parallel schedules, restarts and
// nested estimators stay reproducible by construction. Restarted solves reuse
// the same stream and simply start reading at the restart step; estimators
// that need fresh noise take a disjoint path-index range instead.
struct NoisePlan {
  int noise_dim = 1;
  double dt = 0.01;
  int steps = 100;
  std::uint64_t seed = 0;

  double horizon() const { return steps * dt; }
  double time_at(int n) const { return n * dt; }
};

// All increments of one path: column n holds dW_n ~ N(0, dt I).
Eigen::MatrixXd sample_increments(const NoisePlan& plan, std::uint64_t path_index);

// Deterministic 64-bit stream key for (seed, path).
std::uint64_t noise_stream_key(std::uint64_t seed, std::uint64_t path_index);

// Standard normal sequence behind the plan; exposed for tests. Gaussians come
// from an explicit Box-Muller transform over mt19937_64 bits so the byte
// stream does not depend on the standard library's distribution internals.
class GaussianStream {
 public:
  explicit GaussianStream(std::uint64_t key);
  double next();
  void skip(long n);

 private:
  std::mt19937_64 bits_;
  double spare_ = 0.0;
  bool have_spare_ = false;
};

}  // namespace spde
