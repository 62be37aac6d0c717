#include "spde/semigroup.hpp"

#include <cmath>

namespace spde {

ContractionSemigroup ContractionSemigroup::diagonal(Eigen::VectorXd ls) {
  if (ls.size() < 1) throw ConfigError("diagonal semigroup needs at least one rate");
  for (int k = 0; k < ls.size(); ++k)
    if (!(ls[k] > 0.0))
      throw ConfigError("diagonal semigroup rates must be positive, rate " +
                        std::to_string(k) + " is " + std::to_string(ls[k]));
  ContractionSemigroup s;
  s.kind = Kind::diagonal;
  s.space = SpaceSpec::spectral(static_cast<int>(ls.size()));
  s.lambdas = std::move(ls);
  return s;
}

ContractionSemigroup ContractionSemigroup::shift(const SpaceSpec& halfline) {
  if (halfline.kind != SpaceKind::halfline_grid)
    throw ConfigError("shift semigroup lives on a halfline grid, got " +
                      halfline.describe());
  ContractionSemigroup s;
  s.kind = Kind::shift;
  s.space = halfline;
  return s;
}

double ContractionSemigroup::lambda_min() const {
  if (kind != Kind::diagonal)
    throw ConfigError("lambda_min only defined for diagonal semigroups");
  return lambdas.minCoeff();
}

int aligned_cells(double t, double dx) {
  const double q = t / dx;
  const double r = std::round(q);
  if (std::abs(q - r) > 1e-9 * std::max(1.0, std::abs(q)))
    throw AlignmentError("time " + std::to_string(t) +
                         " is not a whole number of cells of dx = " +
                         std::to_string(dx));
  return static_cast<int>(r);
}

HVec apply_semigroup(const ContractionSemigroup& S, double t, const HVec& x) {
  require_same_space(S.space, x.space, "apply_semigroup");
  if (t < 0.0) throw ConfigError("semigroup time must be nonnegative");

  if (S.kind == ContractionSemigroup::Kind::diagonal) {
    Eigen::VectorXd out(x.dim());
    for (int k = 0; k < x.dim(); ++k)
      out[k] = std::exp(-S.lambdas[k] * t) * x.data[k];
    return HVec(x.space, std::move(out));
  }

  // Shift: values move toward s = 0 and fall off the boundary there; the far
  // end fills with zeros.
  const int cells = aligned_cells(t, S.space.dx);
  const int m = x.dim();
  Eigen::VectorXd out = Eigen::VectorXd::Zero(m);
  for (int i = 0; i + cells < m; ++i) out[i] = x.data[i + cells];
  return HVec(x.space, std::move(out));
}

}  // namespace spde
