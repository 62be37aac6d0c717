#include "spde/spaces.hpp"

#include <cmath>
#include <sstream>

namespace spde {

SpaceSpec SpaceSpec::spectral(int modes) {
  if (modes < 1) throw ConfigError("spectral space needs at least one mode");
  SpaceSpec s;
  s.kind = SpaceKind::spectral;
  s.points = modes;
  return s;
}

SpaceSpec SpaceSpec::line(double left, double dx, int points) {
  if (dx <= 0.0) throw ConfigError("line grid needs dx > 0");
  if (points < 2) throw ConfigError("line grid needs at least two points");
  SpaceSpec s;
  s.kind = SpaceKind::line_grid;
  s.points = points;
  s.left = left;
  s.dx = dx;
  return s;
}

SpaceSpec SpaceSpec::halfline(double dx, int points) {
  if (dx <= 0.0) throw ConfigError("halfline grid needs dx > 0");
  if (points < 2) throw ConfigError("halfline grid needs at least two points");
  SpaceSpec s;
  s.kind = SpaceKind::halfline_grid;
  s.points = points;
  s.left = 0.0;
  s.dx = dx;
  return s;
}

bool SpaceSpec::operator==(const SpaceSpec& o) const {
  if (kind != o.kind || points != o.points) return false;
  if (kind == SpaceKind::spectral) return true;
  return left == o.left && dx == o.dx;
}

std::string SpaceSpec::describe() const {
  std::ostringstream os;
  switch (kind) {
    case SpaceKind::spectral:
      os << "spectral(" << points << ")";
      break;
    case SpaceKind::line_grid:
      os << "line_grid(left=" << left << ", dx=" << dx << ", points=" << points
         << ")";
      break;
    case SpaceKind::halfline_grid:
      os << "halfline_grid(dx=" << dx << ", points=" << points << ")";
      break;
  }
  return os.str();
}

void require_same_space(const SpaceSpec& a, const SpaceSpec& b,
                        const char* where) {
  if (a != b)
    throw SpaceMismatch(std::string(where) + ": " + a.describe() + " vs " +
                        b.describe());
}

HVec::HVec(const SpaceSpec& s, Eigen::VectorXd d) : space(s), data(std::move(d)) {
  if (data.size() != space.dim())
    throw SpaceMismatch("vector has " + std::to_string(data.size()) +
                        " entries for " + space.describe());
}

HVec HVec::zero(const SpaceSpec& s) {
  return HVec(s, Eigen::VectorXd::Zero(s.dim()));
}

HVec HVec::basis(const SpaceSpec& s, int k) {
  if (k < 0 || k >= s.dim())
    throw SpaceMismatch("basis index " + std::to_string(k) + " out of range for " +
                        s.describe());
  Eigen::VectorXd d = Eigen::VectorXd::Zero(s.dim());
  d[k] = 1.0 / std::sqrt(s.weight());
  return HVec(s, std::move(d));
}

double inner(const HVec& u, const HVec& v) {
  require_same_space(u.space, v.space, "inner");
  double acc = 0.0;
  const double* a = u.data.data();
  const double* b = v.data.data();
  const int n = u.dim();
  for (int i = 0; i < n; ++i) acc += a[i] * b[i];
  return u.space.weight() * acc;
}

double norm_sq(const HVec& u) {
  double acc = 0.0;
  const double* a = u.data.data();
  const int n = u.dim();
  for (int i = 0; i < n; ++i) acc += a[i] * a[i];
  return u.space.weight() * acc;
}

double norm(const HVec& u) { return std::sqrt(norm_sq(u)); }

HVec add(const HVec& u, const HVec& v) {
  require_same_space(u.space, v.space, "add");
  return HVec(u.space, u.data + v.data);
}

HVec sub(const HVec& u, const HVec& v) {
  require_same_space(u.space, v.space, "sub");
  return HVec(u.space, u.data - v.data);
}

HVec neg(const HVec& u) { return HVec(u.space, -u.data); }

HVec scale(double c, const HVec& u) { return HVec(u.space, c * u.data); }

HVec axpy(double a, const HVec& x, const HVec& y) {
  require_same_space(x.space, y.space, "axpy");
  return HVec(x.space, a * x.data + y.data);
}

HSOperator::HSOperator(const SpaceSpec& dom, const SpaceSpec& codom,
                       Eigen::MatrixXd d)
    : domain(dom), codomain(codom), data(std::move(d)) {
  if (domain.kind != SpaceKind::spectral)
    throw SpaceMismatch("HS operator domain must be spectral, got " +
                        domain.describe());
  if (data.rows() != codomain.dim() || data.cols() != domain.dim())
    throw SpaceMismatch("HS operator is " + std::to_string(data.rows()) + "x" +
                        std::to_string(data.cols()) + " but maps " +
                        domain.describe() + " into " + codomain.describe());
}

HSOperator HSOperator::zero(const SpaceSpec& dom, const SpaceSpec& codom) {
  return HSOperator(dom, codom, Eigen::MatrixXd::Zero(codom.dim(), dom.dim()));
}

double hs_norm_sq(const HSOperator& B) {
  double acc = 0.0;
  const double* p = B.data.data();
  const long n = B.data.size();
  for (long i = 0; i < n; ++i) acc += p[i] * p[i];
  return B.codomain.weight() * acc;
}

double hs_norm(const HSOperator& B) { return std::sqrt(hs_norm_sq(B)); }

HVec apply(const HSOperator& B, const Eigen::VectorXd& u) {
  if (u.size() != B.cols())
    throw SpaceMismatch("HS operator apply: noise vector has " +
                        std::to_string(u.size()) + " entries, expected " +
                        std::to_string(B.cols()));
  return HVec(B.codomain, B.data * u);
}

}  // namespace spde
