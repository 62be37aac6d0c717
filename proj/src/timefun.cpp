#include "spde/timefun.hpp"

#include <algorithm>
#include <cmath>

namespace spde {

TimeFunction TimeFunction::constant(double c) {
  if (c < 0.0) throw ConfigError("time function must be nonnegative");
  TimeFunction f;
  f.kind = Kind::constant;
  f.c0 = c;
  return f;
}

TimeFunction TimeFunction::affine(double c0, double c1) {
  if (c0 < 0.0 || c1 < 0.0)
    throw ConfigError("affine time function needs nonnegative coefficients");
  TimeFunction f;
  f.kind = Kind::affine;
  f.c0 = c0;
  f.c1 = c1;
  return f;
}

TimeFunction TimeFunction::table(std::vector<double> knots,
                                 std::vector<double> values) {
  if (knots.size() < 2 || values.size() + 1 != knots.size())
    throw ConfigError("time table needs n+1 knots for n values");
  if (knots.front() != 0.0) throw ConfigError("time table must start at 0");
  for (size_t i = 1; i < knots.size(); ++i)
    if (knots[i] <= knots[i - 1])
      throw ConfigError("time table knots must increase");
  for (double v : values)
    if (v < 0.0) throw ConfigError("time function must be nonnegative");
  TimeFunction f;
  f.kind = Kind::table;
  f.knots = std::move(knots);
  f.values = std::move(values);
  return f;
}

double TimeFunction::operator()(double t) const {
  switch (kind) {
    case Kind::constant:
      return c0;
    case Kind::affine:
      return c0 + c1 * std::max(t, 0.0);
    case Kind::table: {
      if (t <= knots.front()) return values.front();
      if (t >= knots.back()) return values.back();
      auto it = std::upper_bound(knots.begin(), knots.end(), t);
      return values[static_cast<size_t>(it - knots.begin()) - 1];
    }
  }
  return 0.0;
}

double TimeFunction::integral(double a, double b) const {
  if (b < a) return -integral(b, a);
  switch (kind) {
    case Kind::constant:
      return c0 * (b - a);
    case Kind::affine:
      return c0 * (b - a) + 0.5 * c1 * (b * b - a * a);
    case Kind::table: {
      // Piecewise-constant with the last value extended past the table.
      double acc = 0.0;
      for (size_t i = 0; i < values.size(); ++i) {
        const double lo = std::max(a, knots[i]);
        const double hi = std::min(b, knots[i + 1]);
        if (hi > lo) acc += values[i] * (hi - lo);
      }
      if (b > knots.back()) acc += values.back() * (b - std::max(a, knots.back()));
      return acc;
    }
  }
  return 0.0;
}

nlohmann::json TimeFunction::to_json() const {
  switch (kind) {
    case Kind::constant:
      return nlohmann::json{{"kind", "constant"}, {"value", c0}};
    case Kind::affine:
      return nlohmann::json{{"kind", "affine"}, {"c0", c0}, {"c1", c1}};
    case Kind::table:
      return nlohmann::json{
          {"kind", "table"}, {"knots", knots}, {"values", values}};
  }
  return {};
}

TimeFunction TimeFunction::from_json(const nlohmann::json& j) {
  if (j.is_number()) return constant(j.get<double>());
  const std::string kind = j.value("kind", "constant");
  if (kind == "constant") return constant(j.value("value", 0.0));
  if (kind == "affine") return affine(j.value("c0", 0.0), j.value("c1", 0.0));
  if (kind == "table")
    return table(j.at("knots").get<std::vector<double>>(),
                 j.at("values").get<std::vector<double>>());
  throw ConfigError("unknown time function kind: " + kind);
}

TauFunction TauFunction::constant(double c) {
  if (c < 0.0) throw ConfigError("tau must be nonnegative");
  TauFunction t;
  t.c0 = c;
  return t;
}

TauFunction TauFunction::power(double c0, double c1, double q) {
  if (c0 < 0.0 || c1 < 0.0 || q < 0.0)
    throw ConfigError("tau(r) = c0 + c1 r^q needs nonnegative parameters");
  TauFunction t;
  t.c0 = c0;
  t.c1 = c1;
  t.q = q;
  return t;
}

double TauFunction::operator()(double r) const {
  if (c1 == 0.0) return c0;
  return c0 + c1 * std::pow(std::abs(r), q);
}

nlohmann::json TauFunction::to_json() const {
  return nlohmann::json{{"c0", c0}, {"c1", c1}, {"q", q}};
}

TauFunction TauFunction::from_json(const nlohmann::json& j) {
  if (j.is_number()) return constant(j.get<double>());
  return power(j.value("c0", 0.0), j.value("c1", 0.0), j.value("q", 2.0));
}

}  // namespace spde
