#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "json.hpp"

#include "spde/coefficients.hpp"
#include "spde/noise.hpp"
#include "spde/solvers.hpp"
#include "spde/testfns.hpp"

namespace spde {

// ---------------------------------------------------------------------------
// Reporting
// ---------------------------------------------------------------------------

struct CurvePoint {
  double t = 0;
  double value = 0;
  double se = 0;
  double bound = 0;
  bool pass = true;
};

// Outcome of one statistical check. `estimate` is the headline number
// (a discrepancy, a z-score source, or a fitted slope depending on the
// check); `z` is set when a normalized score makes sense.
struct StatReport {
  std::string name;
  double estimate = 0;
  double se = 0;
  double z = 0;
  bool z_defined = false;
  long n = 0;
  int aborted = 0;
  bool pass = false;
  std::uint64_t seed = 0;
  std::vector<CurvePoint> curve;
  nlohmann::json extras = nlohmann::json::object();

  nlohmann::json to_json() const;
};

// Maps a time on the plan grid to its step index; throws ConfigError if it
// does not sit on the grid (relative tolerance 1e-9).
int grid_index(const NoisePlan& plan, double t);

// ---------------------------------------------------------------------------
// Pathwise flow checks (exact up to floating point)
// ---------------------------------------------------------------------------

// Restarting the scheme at an intermediate grid time s from the state it
// reached there, with the same increments, must reproduce the original
// trajectory on [s, t]. `frame == nullptr` checks the mild scheme on the
// base space; otherwise the Euler scheme on the dilated space.
StatReport test_flow_property(const ContractionSemigroup& S,
                              const CoefficientModel& m,
                              const DilationFrame* frame, double r, double s,
                              double t, const HVec& xi, const NoisePlan& plan,
                              int n_paths, double tol, int workers);

// The mild scheme started at (s, xi) and the projected Euler scheme started
// at U_s* l xi agree along the whole grid. For the shift dilation the two
// recursions are arithmetically identical and the discrepancy is zero.
StatReport test_scheme_equivalence(const ContractionSemigroup& S,
                                   const CoefficientModel& m,
                                   const DilationFrame& frame, double s,
                                   const HVec& xi, const NoisePlan& plan,
                                   int n_paths, double tol, int workers);

// ---------------------------------------------------------------------------
// Monte Carlo transition-operator machinery
// ---------------------------------------------------------------------------

// Estimates (P_{s,t} phi)(x) = E phi(X_t(s, x)) with n_paths fresh paths
// whose stream indices start at path_base.
StatReport estimate_markov_operator(const ContractionSemigroup& S,
                                    const CoefficientModel& m, double s,
                                    double t, const HVec& x,
                                    const TestFunction& phi,
                                    const NoisePlan& plan, int n_paths,
                                    std::uint64_t path_base, int workers);

// Two-sided z-test of P_{r,t} = P_{r,s} P_{s,t} applied to phi at x.
// The left side uses n_outer*n_inner direct paths r -> t; the right side
// n_outer paths r -> s, each continued by n_inner fresh paths s -> t. All
// stream index ranges are disjoint.
StatReport test_chapman_kolmogorov(const ContractionSemigroup& S,
                                   const CoefficientModel& m, double r,
                                   double s, double t, const HVec& x,
                                   const TestFunction& phi,
                                   const NoisePlan& plan, int n_outer,
                                   int n_inner, double z_max, int workers);

// Tower-property variant with a random initial condition: compares
// E phi(X_t(r, xi)) against E [ (P_{s,t} phi)(X_s(r, xi)) ].
// xi_sampler(k) must return an independent draw keyed by k.
StatReport test_markov_tower(
    const ContractionSemigroup& S, const CoefficientModel& m, double r,
    double s, double t, const std::function<HVec(std::uint64_t)>& xi_sampler,
    const TestFunction& phi, const NoisePlan& plan, int n_outer, int n_inner,
    double z_max, int workers);

// ---------------------------------------------------------------------------
// Moment and stability estimates
// ---------------------------------------------------------------------------

// Checks the second-moment bound for the transformed equation:
//   E ||Y_t||^2 exp(-(C0 - theta) t) <= ||eta||^2 + ||f||_L1  (+ 3 se)
// along the grid, and the growth of E ||X_t||^2 / (1 + ||xi||^2) against
// exp((C0 - theta) t) (1 + ||f||_L1). Also reports the p-th moment of
// sup_t ||X_t||. eta lives on the dilated space.
StatReport test_apriori_bound(const DilatedCoefficients& dc, const HVec& eta,
                              const NoisePlan& plan, int n_paths, double p,
                              int workers);

// Coupled two-start contraction estimate. Requires a constant tau; with the
// weight exp(-int_0^t f - tau t) the squared gap between the two dilated
// trajectories driven by the same noise must stay below its initial value.
// Also reports the induced gap on the base space after projection.
StatReport test_lipschitz_map(const DilatedCoefficients& dc, const HVec& xi,
                              const HVec& zeta, const NoisePlan& plan,
                              int n_paths, int workers);

// Strong error of the mild scheme against a refinement of itself. Runs the
// scheme at dt, dt/2, dt/4 against a dt/refine reference built from the same
// Brownian paths and fits the log-log slope of the terminal RMS error.
StatReport test_strong_convergence(const ContractionSemigroup& S,
                                   const CoefficientModel& m, const HVec& xi,
                                   const NoisePlan& plan, int n_paths,
                                   int refine, double min_slope, int workers);

}  // namespace spde
