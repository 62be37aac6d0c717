#pragma once

#include <Eigen/Core>
#include <string>

#include "spde/types.hpp"

namespace spde {

// Discretization kinds.
//   spectral      coefficients against a fixed orthonormal mode basis
//   line_grid     point values on a uniform grid over [left, left+(M-1)*dx]
//   halfline_grid point values on a uniform grid over [0, (M-1)*dx]
enum class SpaceKind { spectral, line_grid, halfline_grid };

// Finite-dimensional stand-in for a separable Hilbert space. Grid kinds use
// the rectangle-rule inner product dx * sum(u_i v_i); spectral uses the plain
// Euclidean dot product on mode coefficients.
struct SpaceSpec {
  SpaceKind kind = SpaceKind::spectral;
  int points = 1;     // number of modes (spectral) or grid points
  double left = 0.0;  // leftmost grid position (line_grid; 0 for halfline)
  double dx = 1.0;    // grid spacing, ignored for spectral

  static SpaceSpec spectral(int modes);
  static SpaceSpec line(double left, double dx, int points);
  static SpaceSpec halfline(double dx, int points);

  int dim() const { return points; }
  // Quadrature weight entering inner products and norms.
  double weight() const { return kind == SpaceKind::spectral ? 1.0 : dx; }
  // Position of grid point i (grids only).
  double position(int i) const { return left + i * dx; }

  bool operator==(const SpaceSpec& o) const;
  bool operator!=(const SpaceSpec& o) const { return !(*this == o); }
  std::string describe() const;
};

// Element of a discretized Hilbert space: the defining space plus one value
// per mode or grid point.
struct HVec {
  SpaceSpec space;
  Eigen::VectorXd data;

  HVec() = default;
  HVec(const SpaceSpec& s, Eigen::VectorXd d);

  static HVec zero(const SpaceSpec& s);
  // k-th coordinate vector scaled to unit H-norm (grids: e_k / sqrt(dx)).
  static HVec basis(const SpaceSpec& s, int k);

  int dim() const { return static_cast<int>(data.size()); }
  bool finite() const { return data.allFinite(); }
};

// Reductions are plain sequential loops on purpose: several frame checks
// compare shifted copies of the same data for exact equality, which SIMD
// block accumulation would spoil.
double inner(const HVec& u, const HVec& v);
double norm_sq(const HVec& u);
double norm(const HVec& u);

HVec add(const HVec& u, const HVec& v);
HVec sub(const HVec& u, const HVec& v);
HVec neg(const HVec& u);
HVec scale(double c, const HVec& u);
// a*x + y
HVec axpy(double a, const HVec& x, const HVec& y);

// Hilbert-Schmidt operator from a spectral noise space U into H, stored as a
// dense matrix with one column per noise mode.
struct HSOperator {
  SpaceSpec domain;    // spectral
  SpaceSpec codomain;  // any kind
  Eigen::MatrixXd data;  // codomain.dim() x domain.dim()

  HSOperator() = default;
  HSOperator(const SpaceSpec& dom, const SpaceSpec& codom, Eigen::MatrixXd d);
  static HSOperator zero(const SpaceSpec& dom, const SpaceSpec& codom);

  int rows() const { return static_cast<int>(data.rows()); }
  int cols() const { return static_cast<int>(data.cols()); }
};

// ||B||_HS^2 = sum_j ||B e_j||_H^2; the codomain quadrature weight applies
// once to the whole double sum.
double hs_norm_sq(const HSOperator& B);
double hs_norm(const HSOperator& B);
HVec apply(const HSOperator& B, const Eigen::VectorXd& u);

void require_same_space(const SpaceSpec& a, const SpaceSpec& b, const char* where);

}  // namespace spde
