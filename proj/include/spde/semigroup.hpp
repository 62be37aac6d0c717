#pragma once

#include <Eigen/Core>

#include "spde/spaces.hpp"

namespace spde {

// Strongly continuous contraction semigroup (S_t), t >= 0, in one of two
// concrete forms:
//
//   diagonal  on spectral(K):      (S_t x)_k = exp(-lambda_k t) x_k, lambda_k > 0
//   shift     on halfline_grid:    (S_t h)(s) = h(s + t), mass leaving at s = 0
//
// The shift form only moves by whole grid cells, so t must be an integer
// multiple of dx there.
struct ContractionSemigroup {
  enum class Kind { diagonal, shift };

  Kind kind = Kind::diagonal;
  SpaceSpec space;
  Eigen::VectorXd lambdas;  // diagonal only

  static ContractionSemigroup diagonal(Eigen::VectorXd lambdas);
  static ContractionSemigroup shift(const SpaceSpec& halfline);

  double lambda_min() const;
};

// Whole-cell count for an aligned time; AlignmentError if t is not a grid
// multiple (relative tolerance 1e-9).
int aligned_cells(double t, double dx);

HVec apply_semigroup(const ContractionSemigroup& S, double t, const HVec& x);

}  // namespace spde
