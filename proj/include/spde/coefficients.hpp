#pragma once

#include <functional>
#include <string>

#include "spde/frame.hpp"
#include "spde/timefun.hpp"

namespace spde {

// Drift and volatility of a semilinear equation together with the structural
// constants of its monotonicity/coercivity/growth bounds. The constants are
// claims about alpha and sigma; the condition prober checks them empirically.
struct CoefficientModel {
  std::string id;
  SpaceSpec space;        // state space H
  SpaceSpec noise_space;  // spectral(m)

  std::function<HVec(double, const HVec&)> alpha;
  std::function<HSOperator(double, const HVec&)> sigma;
  // sigma(t, x) * w without materializing the operator; wired by the model
  // builders for the integrator hot path.
  std::function<HVec(double, const HVec&, const Eigen::VectorXd&)> sigma_apply;

  double beta = 0.0;   // growth exponent
  double C0 = 1.0;     // growth/coercivity constant, C0 >= theta
  double theta = 1.0;  // coercivity gap, > 0
  double C = 1.0;      // bound constant for sigma and tau
  double p = 2.0;      // moment order, >= beta + 2
  TimeFunction f;
  TauFunction tau;

  HVec apply_sigma(double t, const HVec& x, const Eigen::VectorXd& w) const;
  void validate() const;
};

// One Euler step increment plus the quantities the integrability record
// wants along the way.
struct StepIncrement {
  HVec incr;                 // drift(t,v)*dt + vol(t,v) w
  double drift_norm = 0.0;   // ||drift(t, v)||
  double vol_hs_sq = 0.0;    // ||vol(t, v)||_HS^2
};

// Drift/volatility pair as the Euler integrator consumes it, on whatever
// space the equation lives on. Frame-transformed systems and hand-built test
// systems both reduce to this.
struct SdeSystem {
  SpaceSpec space;
  SpaceSpec noise_space;
  std::function<HVec(double, const HVec&)> drift;
  std::function<HVec(double, const HVec&, const Eigen::VectorXd&)> vol_apply;
  // Optional: ||vol(t, v)||_HS^2 for the integrability record.
  std::function<double(double, const HVec&)> vol_hs_norm_sq;
  // Optional fused step; frame systems provide it so the state is pulled back
  // once per step instead of once per closure.
  std::function<StepIncrement(double, const HVec&, double, const Eigen::VectorXd&)> step;

  StepIncrement eval_step(double t, const HVec& v, double dt,
                          const Eigen::VectorXd& w) const;
};

// Semigroup-free coefficients on the dilated space:
//
//   a(t, v) = U_t* l alpha(t, pi U_t v)
//   b(t, v) = U_t* l sigma(t, pi U_t v)
//
// Holds references; the model and frame must outlive this object.
class DilatedCoefficients {
 public:
  DilatedCoefficients(const CoefficientModel& model, const DilationFrame& frame);

  const CoefficientModel& base() const { return *model_; }
  const DilationFrame& frame() const { return *frame_; }

  // State seen from the base space at time t.
  HVec pull_back(double t, const HVec& v) const;
  HVec a(double t, const HVec& v) const;
  HVec b_apply(double t, const HVec& v, const Eigen::VectorXd& w) const;
  // Column-by-column lift of sigma; used by the prober, not the hot path.
  HSOperator b(double t, const HVec& v) const;

  SdeSystem system() const;

 private:
  const CoefficientModel* model_;
  const DilationFrame* frame_;
};

}  // namespace spde
