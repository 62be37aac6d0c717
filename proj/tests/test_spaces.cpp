#include "doctest.h"

#include <cmath>
#include <vector>

#include "spde/spaces.hpp"
#include "test_util.hpp"

using namespace spde;

TEST_CASE("grid inner product applies the quadrature weight once") {
  const SpaceSpec s = SpaceSpec::halfline(0.1, 10);
  const HVec ones(s, Eigen::VectorXd::Ones(10));
  // Sequential sum of ten exact 1.0s is exactly 10.0, and 0.1 * 10.0 rounds
  // to exactly 1.0, so this oracle holds bitwise.
  CHECK(inner(ones, ones) == 1.0);
  CHECK(norm_sq(ones) == 1.0);
  CHECK(s.weight() == 0.1);
  CHECK(s.position(0) == 0.0);
  CHECK(s.position(3) == doctest::Approx(0.3));
}

TEST_CASE("spectral inner product is the plain dot product") {
  const SpaceSpec s = SpaceSpec::spectral(3);
  HVec u(s, Eigen::Vector3d(1.0, 2.0, 3.0));
  HVec v(s, Eigen::Vector3d(-1.0, 0.5, 2.0));
  CHECK(inner(u, v) == 1.0 * -1.0 + 2.0 * 0.5 + 3.0 * 2.0);
  CHECK(norm_sq(u) == 14.0);
  CHECK(s.weight() == 1.0);
}

TEST_CASE("basis vectors have unit H norm in every space kind") {
  const std::vector<SpaceSpec> spaces = {
      SpaceSpec::spectral(4), SpaceSpec::line(-1.0, 0.25, 9),
      SpaceSpec::halfline(0.05, 40)};
  for (const auto& s : spaces)
    for (int k = 0; k < s.dim(); k += 3)
      CHECK(norm(HVec::basis(s, k)) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("Cauchy-Schwarz and parallelogram law on random vectors") {
  const std::vector<SpaceSpec> spaces = {
      SpaceSpec::spectral(7), SpaceSpec::line(-2.0, 0.1, 31),
      SpaceSpec::halfline(0.2, 12)};
  std::uint64_t key = 100;
  for (const auto& s : spaces) {
    for (int rep = 0; rep < 8; ++rep) {
      const HVec x = testutil::randn_vec(s, key++);
      const HVec y = testutil::randn_vec(s, key++);
      CHECK(std::abs(inner(x, y)) <= norm(x) * norm(y) * (1.0 + 1e-12));
      const double lhs = norm_sq(add(x, y)) + norm_sq(sub(x, y));
      const double rhs = 2.0 * (norm_sq(x) + norm_sq(y));
      CHECK(lhs == doctest::Approx(rhs).epsilon(1e-12));
    }
  }
}

TEST_CASE("vector algebra: axpy agrees with scale-then-add elementwise") {
  const SpaceSpec s = SpaceSpec::halfline(0.5, 6);
  const HVec x = testutil::randn_vec(s, 7);
  const HVec y = testutil::randn_vec(s, 8);
  const HVec a = axpy(2.5, x, y);
  const HVec b = add(scale(2.5, x), y);
  // Same elementwise expression either way, so this holds bitwise.
  CHECK((a.data - b.data).cwiseAbs().maxCoeff() == 0.0);
  CHECK((add(x, neg(x)).data.cwiseAbs().maxCoeff()) == 0.0);
  CHECK(norm_sq(sub(x, x)) == 0.0);
}

TEST_CASE("space mismatch is refused everywhere values could mix") {
  const SpaceSpec a = SpaceSpec::spectral(4);
  const SpaceSpec b = SpaceSpec::spectral(5);
  const SpaceSpec c = SpaceSpec::halfline(0.1, 4);
  const HVec xa = HVec::zero(a);
  const HVec xb = HVec::zero(b);
  const HVec xc = HVec::zero(c);
  CHECK_THROWS_AS(inner(xa, xb), SpaceMismatch);
  CHECK_THROWS_AS(add(xa, xc), SpaceMismatch);
  CHECK_THROWS_AS(HVec(a, Eigen::VectorXd::Zero(3)), SpaceMismatch);
  CHECK_THROWS_AS(HVec::basis(a, 4), SpaceMismatch);
  // Same dimension but different grids still counts as a mismatch.
  const SpaceSpec c2 = SpaceSpec::halfline(0.2, 4);
  CHECK_THROWS_AS(add(xc, HVec::zero(c2)), SpaceMismatch);
}

TEST_CASE("space construction rejects degenerate parameters") {
  CHECK_THROWS_AS(SpaceSpec::spectral(0), ConfigError);
  CHECK_THROWS_AS(SpaceSpec::line(0.0, -0.1, 5), ConfigError);
  CHECK_THROWS_AS(SpaceSpec::halfline(0.1, 1), ConfigError);
}

TEST_CASE("Hilbert-Schmidt norm adds the H norms of the columns") {
  const SpaceSpec dom = SpaceSpec::spectral(3);
  const SpaceSpec codom = SpaceSpec::halfline(0.25, 8);
  Eigen::MatrixXd M(8, 3);
  for (int j = 0; j < 3; ++j) M.col(j) = testutil::randn_raw(8, 50 + j);
  const HSOperator B(dom, codom, M);

  double colsum = 0.0;
  for (int j = 0; j < 3; ++j) colsum += norm_sq(HVec(codom, M.col(j)));
  CHECK(hs_norm_sq(B) == doctest::Approx(colsum).epsilon(1e-12));
  CHECK(hs_norm(B) == doctest::Approx(std::sqrt(colsum)).epsilon(1e-12));

  // Applying to a coordinate direction picks out the matching column.
  Eigen::VectorXd e1 = Eigen::VectorXd::Zero(3);
  e1[1] = 1.0;
  const HVec col = apply(B, e1);
  CHECK((col.data - M.col(1)).cwiseAbs().maxCoeff() == 0.0);

  CHECK(hs_norm_sq(HSOperator::zero(dom, codom)) == 0.0);
}
