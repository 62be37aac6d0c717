#include "doctest.h"

#include <cmath>

#include "spde/markov.hpp"
#include "spde/models.hpp"
#include "test_util.hpp"

using namespace spde;

namespace {

NoisePlan small_plan(int steps, double dt, std::uint64_t seed) {
  NoisePlan p;
  p.noise_dim = 1;
  p.dt = dt;
  p.steps = steps;
  p.seed = seed;
  return p;
}

// Deterministic linear pull toward zero; sigma identically zero.
CoefficientModel deterministic_model(const SpaceSpec& s) {
  CoefficientModel m;
  m.id = "det-pull";
  m.space = s;
  m.noise_space = SpaceSpec::spectral(1);
  m.alpha = [](double, const HVec& x) { return scale(-1.0, x); };
  const HSOperator Z = HSOperator::zero(m.noise_space, s);
  m.sigma = [Z](double, const HVec&) { return Z; };
  m.sigma_apply = [](double, const HVec& x, const Eigen::VectorXd&) {
    return HVec::zero(x.space);
  };
  m.tau = TauFunction::constant(0.0);
  m.f = TimeFunction::constant(0.0);
  m.C0 = 1.0;
  m.theta = 1.0;
  m.validate();
  return m;
}

}  // namespace

TEST_CASE("grid times resolve to step indices within tolerance") {
  const NoisePlan plan = small_plan(100, 0.01, 0);
  CHECK(grid_index(plan, 0.0) == 0);
  CHECK(grid_index(plan, 0.25) == 25);
  CHECK(grid_index(plan, 1.0) == 100);
  CHECK(grid_index(plan, 0.25 * (1.0 + 1e-12)) == 25);
  CHECK_THROWS_AS(grid_index(plan, 0.255), ConfigError);
  CHECK_THROWS_AS(grid_index(plan, 1.01), ConfigError);
  CHECK_THROWS_AS(grid_index(plan, -0.01), ConfigError);
}

TEST_CASE("flow property holds exactly for both schemes") {
  const SpaceSpec s = SpaceSpec::halfline(0.1, 12);
  const ContractionSemigroup S = ContractionSemigroup::shift(s);
  const CoefficientModel m = make_model("allen-cahn", s, {});
  NoisePlan plan = small_plan(10, 0.1, 21);
  plan.noise_dim = m.noise_space.dim();
  const HVec xi = testutil::randn_vec(s, 800);

  const StatReport direct =
      test_flow_property(S, m, nullptr, 0.0, 0.5, 1.0, xi, plan, 20, 1e-10, 2);
  CHECK(direct.pass);
  CHECK(direct.estimate == 0.0);

  const Window w = DilationFrame::default_window(S, 1.0, 0.1, 1e-10);
  const DilationFrame frame = DilationFrame::dilate(S, w, 0.1, 1e-10);
  const StatReport dilated =
      test_flow_property(S, m, &frame, 0.0, 0.5, 1.0, xi, plan, 20, 1e-10, 2);
  CHECK(dilated.pass);
  CHECK(dilated.estimate == 0.0);
}

TEST_CASE("mild and dilated schemes coincide on a shift frame") {
  const SpaceSpec s = SpaceSpec::halfline(0.1, 12);
  const ContractionSemigroup S = ContractionSemigroup::shift(s);
  const CoefficientModel m = make_model("allen-cahn", s, {});
  const Window w = DilationFrame::default_window(S, 1.0, 0.1, 1e-10);
  const DilationFrame frame = DilationFrame::dilate(S, w, 0.1, 1e-10);
  NoisePlan plan = small_plan(10, 0.1, 22);
  plan.noise_dim = m.noise_space.dim();
  const HVec xi = testutil::randn_vec(s, 805);

  // From the start and from a mid-grid restart time.
  for (double start : {0.0, 0.3}) {
    const StatReport rep =
        test_scheme_equivalence(S, m, frame, start, xi, plan, 10, 1e-8, 2);
    CHECK(rep.pass);
    CHECK(rep.estimate == 0.0);
  }
}

TEST_CASE("markov operator estimates are reproducible and worker independent") {
  const ContractionSemigroup S =
      ContractionSemigroup::diagonal(Eigen::Vector2d(1.0, 3.0));
  const CoefficientModel m = make_model("linear-ou", S.space, {});
  NoisePlan plan = small_plan(16, 0.0625, 31);
  plan.noise_dim = 2;
  const HVec x(S.space, Eigen::Vector2d(0.4, -0.2));
  const TestFunction phi = TestFunction::gauss_exp(0.5);

  const StatReport a =
      estimate_markov_operator(S, m, 0.0, 1.0, x, phi, plan, 64, 0, 1);
  const StatReport b =
      estimate_markov_operator(S, m, 0.0, 1.0, x, phi, plan, 64, 0, 4);
  CHECK(a.estimate == b.estimate);
  CHECK(a.se == b.se);
  CHECK(a.n == 64);
  CHECK(a.estimate > 0.0);
  CHECK(a.estimate < 1.0);

  // Disjoint path ranges must decorrelate the estimate.
  const StatReport c =
      estimate_markov_operator(S, m, 0.0, 1.0, x, phi, plan, 64, 1000, 1);
  CHECK(c.estimate != a.estimate);
}

TEST_CASE("Chapman-Kolmogorov z-test accepts a healthy linear model") {
  const ContractionSemigroup S =
      ContractionSemigroup::diagonal(Eigen::Vector2d(1.0, 3.0));
  const CoefficientModel m = make_model("linear-ou", S.space, {});
  NoisePlan plan = small_plan(16, 0.0625, 32);
  plan.noise_dim = 2;
  const HVec x(S.space, Eigen::Vector2d(0.5, 0.1));
  const TestFunction phi = TestFunction::gauss_exp(0.5);

  const StatReport rep = test_chapman_kolmogorov(S, m, 0.0, 0.5, 1.0, x, phi,
                                                 plan, 40, 40, 3.5, 2);
  CHECK(rep.z_defined);
  CHECK(rep.pass);
  CHECK(std::abs(rep.z) <= 3.5);
  CHECK(rep.n == 40 * 40 + 40 + 40 * 40);
}

TEST_CASE("deterministic dynamics fall back to the exact-equality branch") {
  const SpaceSpec s = SpaceSpec::spectral(1);
  const ContractionSemigroup S =
      ContractionSemigroup::diagonal(Eigen::VectorXd::Ones(1));
  const CoefficientModel m = deterministic_model(s);
  const NoisePlan plan = small_plan(8, 0.125, 33);
  const HVec x(s, Eigen::VectorXd::Constant(1, 0.7));
  const TestFunction phi = TestFunction::gauss_exp(1.0);

  const StatReport rep =
      test_chapman_kolmogorov(S, m, 0.0, 0.5, 1.0, x, phi, plan, 10, 10, 3.0, 1);
  CHECK(!rep.z_defined);
  CHECK(rep.pass);
  CHECK(rep.estimate == 0.0);
}

TEST_CASE("tower test with a random initial condition stays within bounds") {
  const ContractionSemigroup S =
      ContractionSemigroup::diagonal(Eigen::Vector2d(1.0, 2.0));
  const CoefficientModel m = make_model("linear-ou", S.space, {});
  NoisePlan plan = small_plan(16, 0.0625, 34);
  plan.noise_dim = 2;
  const TestFunction phi = TestFunction::gauss_exp(0.5);

  GaussianStream seed_stream(900);
  auto sampler = [&](std::uint64_t k) {
    GaussianStream g(9000 + k);
    Eigen::VectorXd d(2);
    d[0] = 0.5 * g.next();
    d[1] = 0.5 * g.next();
    return HVec(S.space, std::move(d));
  };
  const StatReport rep =
      test_markov_tower(S, m, 0.0, 0.5, 1.0, sampler, phi, plan, 40, 40, 3.5, 2);
  CHECK(rep.z_defined);
  CHECK(rep.pass);
}

TEST_CASE("second-moment bound holds along the whole grid for allen-cahn") {
  const SpaceSpec s = SpaceSpec::halfline(0.1, 12);
  const ContractionSemigroup S = ContractionSemigroup::shift(s);
  const CoefficientModel m = make_model("allen-cahn", s, {});
  const Window w = DilationFrame::default_window(S, 0.5, 0.1, 1e-10);
  const DilationFrame frame = DilationFrame::dilate(S, w, 0.1, 1e-10);
  const DilatedCoefficients dc(m, frame);
  NoisePlan plan = small_plan(5, 0.1, 35);
  plan.noise_dim = m.noise_space.dim();

  const HVec xi = scale(0.3, testutil::randn_vec(s, 810));
  const HVec eta = frame.embed(xi);
  const StatReport rep = test_apriori_bound(dc, eta, plan, 150, m.p, 2);
  CHECK(rep.pass);
  REQUIRE(rep.curve.size() == 6);
  // The bound is the uniform constant ||eta||^2 + ||f||_{L1[0,T]}.
  const double expected = norm_sq(eta) + m.f(0.0) * plan.horizon();
  for (const auto& pt : rep.curve) {
    CHECK(pt.bound == doctest::Approx(expected).epsilon(1e-10));
    CHECK(pt.pass);
  }
}

TEST_CASE("coupled trajectories contract under the exponential weight") {
  const SpaceSpec s = SpaceSpec::halfline(0.1, 12);
  const ContractionSemigroup S = ContractionSemigroup::shift(s);
  const CoefficientModel m = make_model("allen-cahn", s, {});
  const Window w = DilationFrame::default_window(S, 0.5, 0.1, 1e-10);
  const DilationFrame frame = DilationFrame::dilate(S, w, 0.1, 1e-10);
  const DilatedCoefficients dc(m, frame);
  NoisePlan plan = small_plan(5, 0.1, 36);
  plan.noise_dim = m.noise_space.dim();

  const HVec xi = scale(0.4, testutil::randn_vec(s, 820));
  const HVec zeta = scale(0.4, testutil::randn_vec(s, 821));
  const StatReport rep = test_lipschitz_map(dc, xi, zeta, plan, 100, 2);
  CHECK(rep.pass);
  CHECK(rep.curve.front().value ==
        doctest::Approx(norm_sq(sub(frame.embed(xi), frame.embed(zeta))))
            .epsilon(1e-10));

  // A radius-dependent tau has no single contraction rate to test against.
  CoefficientModel bad = deterministic_model(s);
  bad.tau = TauFunction::power(0.0, 1.0, 2.0);
  const DilatedCoefficients dc_bad(bad, frame);
  CHECK_THROWS_AS(test_lipschitz_map(dc_bad, xi, zeta, plan, 10, 1),
                  ConfigError);
}

TEST_CASE("strong error decays with at least root order against a refinement") {
  const ContractionSemigroup S =
      ContractionSemigroup::diagonal(Eigen::Vector3d(1.0, 4.0, 9.0));
  nlohmann::json params;
  params["sigma_diag"] = {1.0, 0.5, 0.25};
  const CoefficientModel m = make_model("linear-ou", S.space, params);
  NoisePlan plan = small_plan(16, 0.0625, 37);
  plan.noise_dim = 3;
  const HVec xi(S.space, Eigen::Vector3d(1.0, 0.0, -1.0));

  const StatReport rep = test_strong_convergence(S, m, xi, plan, 60, 8, 0.3, 2);
  CHECK(rep.pass);
  CHECK(rep.estimate >= 0.3);

  CHECK_THROWS_AS(test_strong_convergence(S, m, xi, plan, 10, 6, 0.3, 1),
                  ConfigError);
}
