#pragma once

#include <vector>

#include "json.hpp"
#include "spde/types.hpp"

namespace spde {

// Nonnegative locally integrable function of time appearing in the growth
// and coercivity bounds. Constant, affine, or a piecewise-constant table;
// all three integrate in closed form.
struct TimeFunction {
  enum class Kind { constant, affine, table };

  Kind kind = Kind::constant;
  double c0 = 0.0, c1 = 0.0;   // c0 + c1 t for constant/affine
  std::vector<double> knots;   // table: breakpoints, ascending, starting at 0
  std::vector<double> values;  // table: value on [knots[i], knots[i+1])

  static TimeFunction constant(double c);
  static TimeFunction affine(double c0, double c1);
  static TimeFunction table(std::vector<double> knots, std::vector<double> values);

  double operator()(double t) const;
  double integral(double a, double b) const;

  nlohmann::json to_json() const;
  static TimeFunction from_json(const nlohmann::json& j);
};

// Nondecreasing function of the norm radius in the local monotonicity bound:
// tau(r) = c0 + c1 r^q. Constant when c1 = 0.
struct TauFunction {
  double c0 = 0.0, c1 = 0.0, q = 2.0;

  static TauFunction constant(double c);
  static TauFunction power(double c0, double c1, double q);

  bool is_constant() const { return c1 == 0.0; }
  double operator()(double r) const;

  nlohmann::json to_json() const;
  static TauFunction from_json(const nlohmann::json& j);
};

}  // namespace spde
