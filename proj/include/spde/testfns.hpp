#pragma once

#include <string>

#include "json.hpp"

#include "spde/spaces.hpp"

namespace spde {

// Bounded measurable observables used by the statistical Markov checks.
// All built-ins satisfy sup |phi| <= 1 so the per-path variance is tame.
struct TestFunction {
  enum class Kind { gauss_exp, coord_sigmoid, indicator_ball };

  Kind kind = Kind::gauss_exp;
  double c = 0.5;      // gauss_exp decay
  HVec w;              // coord_sigmoid direction
  HVec center;         // indicator_ball center
  double radius = 1.0;

  // exp(-c ||x||^2)
  static TestFunction gauss_exp(double c);
  // tanh(<x, w>)
  static TestFunction coord_sigmoid(HVec w);
  // 1 if ||x - center|| <= radius
  static TestFunction indicator_ball(HVec center, double radius);

  double operator()(const HVec& x) const;
  std::string describe() const;

  nlohmann::json to_json() const;
  // The space argument resolves vector payloads; throws ConfigError on a
  // malformed document.
  static TestFunction from_json(const nlohmann::json& j,
                                const SpaceSpec& space);
};

}  // namespace spde
