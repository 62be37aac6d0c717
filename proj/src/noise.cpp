#include "spde/noise.hpp"

#include <cmath>

#include "spde/types.hpp"

namespace spde {

std::uint64_t noise_stream_key(std::uint64_t seed, std::uint64_t path_index) {
  // One splitmix64 round over seed and path; enough spread that consecutive
  // path indices land in unrelated mt19937_64 states.
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (path_index + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

GaussianStream::GaussianStream(std::uint64_t key) : bits_(key) {}

double GaussianStream::next() {
  if (have_spare_) {
    have_spare_ = false;
    return spare_;
  }
  // Box-Muller on 53-bit uniforms; u1 is kept away from zero.
  const double u1 =
      (static_cast<double>(bits_() >> 11) + 1.0) * 0x1.0p-53;
  const double u2 = static_cast<double>(bits_() >> 11) * 0x1.0p-53;
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double a = 2.0 * M_PI * u2;
  spare_ = r * std::sin(a);
  have_spare_ = true;
  return r * std::cos(a);
}

void GaussianStream::skip(long n) {
  for (long i = 0; i < n; ++i) next();
}

Eigen::MatrixXd sample_increments(const NoisePlan& plan,
                                  std::uint64_t path_index) {
  if (plan.noise_dim < 1 || plan.steps < 1 || !(plan.dt > 0.0))
    throw ConfigError("noise plan needs noise_dim >= 1, steps >= 1, dt > 0");
  GaussianStream g(noise_stream_key(plan.seed, path_index));
  const double root_dt = std::sqrt(plan.dt);
  Eigen::MatrixXd dw(plan.noise_dim, plan.steps);
  for (int n = 0; n < plan.steps; ++n)
    for (int j = 0; j < plan.noise_dim; ++j) dw(j, n) = root_dt * g.next();
  return dw;
}

}  // namespace spde
