#include "doctest.h"

#include <cmath>

#include "spde/testfns.hpp"
#include "test_util.hpp"

using namespace spde;

TEST_CASE("gaussian observable matches its closed form under a normal law") {
  // For X ~ N(mu, v) scalar:  E exp(-c X^2) = (1+2cv)^{-1/2} exp(-c mu^2 / (1+2cv)).
  const double c = 0.5, mu = 0.3, v = 0.8;
  const double denom = 1.0 + 2.0 * c * v;
  const double closed = std::exp(-c * mu * mu / denom) / std::sqrt(denom);

  const SpaceSpec s = SpaceSpec::spectral(1);
  const TestFunction phi = TestFunction::gauss_exp(c);
  GaussianStream g(600);
  const int n = 20000;
  double acc = 0.0, acc2 = 0.0;
  for (int i = 0; i < n; ++i) {
    HVec x(s, Eigen::VectorXd::Constant(1, mu + std::sqrt(v) * g.next()));
    const double val = phi(x);
    acc += val;
    acc2 += val * val;
  }
  const double mean = acc / n;
  const double se = std::sqrt((acc2 / n - mean * mean) / n);
  CHECK(std::abs(mean - closed) < 4.0 * se);
}

TEST_CASE("observables evaluate their defining formulas exactly") {
  const SpaceSpec s = SpaceSpec::spectral(2);
  const HVec x(s, Eigen::Vector2d(0.6, -0.8));

  CHECK(TestFunction::gauss_exp(0.5)(x) == std::exp(-0.5 * 1.0));

  const HVec w(s, Eigen::Vector2d(1.0, 2.0));
  CHECK(TestFunction::coord_sigmoid(w)(x) == std::tanh(0.6 - 1.6));

  const HVec center(s, Eigen::Vector2d(0.0, 0.0));
  CHECK(TestFunction::indicator_ball(center, 1.0)(x) == 1.0);  // ||x|| = 1
  CHECK(TestFunction::indicator_ball(center, 0.99)(x) == 0.0);
}

TEST_CASE("all builtin observables stay within [-1, 1]") {
  const SpaceSpec s = SpaceSpec::halfline(0.1, 10);
  const HVec w = testutil::randn_vec(s, 610);
  const TestFunction fns[] = {TestFunction::gauss_exp(2.0),
                              TestFunction::coord_sigmoid(w),
                              TestFunction::indicator_ball(HVec::zero(s), 0.5)};
  for (std::uint64_t key = 611; key < 620; ++key) {
    const HVec x = scale(10.0, testutil::randn_vec(s, key));
    for (const auto& f : fns) {
      CHECK(f(x) <= 1.0);
      CHECK(f(x) >= -1.0);
    }
  }
}

TEST_CASE("observable JSON round trip preserves evaluation") {
  const SpaceSpec s = SpaceSpec::spectral(3);
  const HVec w(s, Eigen::Vector3d(0.3, -1.0, 0.5));
  const TestFunction fns[] = {TestFunction::gauss_exp(1.5),
                              TestFunction::coord_sigmoid(w),
                              TestFunction::indicator_ball(w, 2.0)};
  for (const auto& f : fns) {
    const TestFunction g = TestFunction::from_json(f.to_json(), s);
    CHECK(g.describe() == f.describe());
    for (std::uint64_t key = 630; key < 634; ++key) {
      const HVec x = testutil::randn_vec(s, key);
      CHECK(g(x) == f(x));
    }
  }
}

TEST_CASE("observable parsing rejects dimension mismatches and bad kinds") {
  const SpaceSpec s = SpaceSpec::spectral(3);
  nlohmann::json j;
  j["kind"] = "coord_sigmoid";
  j["w"] = {1.0, 2.0};  // two entries for a three-mode space
  CHECK_THROWS_AS(TestFunction::from_json(j, s), ConfigError);

  nlohmann::json k;
  k["kind"] = "no-such-observable";
  CHECK_THROWS_AS(TestFunction::from_json(k, s), ConfigError);

  nlohmann::json b;
  b["kind"] = "gauss_exp";
  b["c"] = -1.0;
  CHECK_THROWS_AS(TestFunction::from_json(b, s), ConfigError);
}
