#include "spde/coefficients.hpp"

namespace spde {

HVec CoefficientModel::apply_sigma(double t, const HVec& x,
                                   const Eigen::VectorXd& w) const {
  if (sigma_apply) return sigma_apply(t, x, w);
  return apply(sigma(t, x), w);
}

void CoefficientModel::validate() const {
  std::vector<std::string> issues;
  if (!(theta > 0.0)) issues.push_back("model " + id + ": theta must be > 0");
  if (!(C0 >= theta)) issues.push_back("model " + id + ": C0 must be >= theta");
  if (beta < 0.0) issues.push_back("model " + id + ": beta must be >= 0");
  if (!(p >= beta + 2.0))
    issues.push_back("model " + id + ": moment order p must be >= beta + 2");
  if (C < 0.0) issues.push_back("model " + id + ": C must be >= 0");
  if (noise_space.kind != SpaceKind::spectral)
    issues.push_back("model " + id + ": noise space must be spectral");
  if (!alpha || !sigma) issues.push_back("model " + id + ": alpha and sigma required");
  if (!issues.empty()) throw ConfigError(std::move(issues));
}

DilatedCoefficients::DilatedCoefficients(const CoefficientModel& model,
                                         const DilationFrame& frame)
    : model_(&model), frame_(&frame) {
  require_same_space(model.space, frame.base_space(), "DilatedCoefficients");
}

HVec DilatedCoefficients::pull_back(double t, const HVec& v) const {
  return frame_->project_at(t, v);
}

HVec DilatedCoefficients::a(double t, const HVec& v) const {
  const HVec x = frame_->project_at(t, v);
  return frame_->adjoint_lift(t, model_->alpha(t, x));
}

HVec DilatedCoefficients::b_apply(double t, const HVec& v,
                                  const Eigen::VectorXd& w) const {
  const HVec x = frame_->project_at(t, v);
  return frame_->adjoint_lift(t, model_->apply_sigma(t, x, w));
}

HSOperator DilatedCoefficients::b(double t, const HVec& v) const {
  const HVec x = frame_->project_at(t, v);
  const HSOperator sig = model_->sigma(t, x);
  Eigen::MatrixXd cols(frame_->dilated_space().dim(), sig.cols());
  for (int j = 0; j < sig.cols(); ++j) {
    const HVec col(model_->space, sig.data.col(j));
    cols.col(j) = frame_->adjoint_lift(t, col).data;
  }
  return HSOperator(model_->noise_space, frame_->dilated_space(), std::move(cols));
}

SdeSystem DilatedCoefficients::system() const {
  SdeSystem sys;
  sys.space = frame_->dilated_space();
  sys.noise_space = model_->noise_space;
  const CoefficientModel* m = model_;
  const DilationFrame* fr = frame_;
  sys.drift = [m, fr](double t, const HVec& v) {
    return fr->adjoint_lift(t, m->alpha(t, fr->project_at(t, v)));
  };
  sys.vol_apply = [m, fr](double t, const HVec& v, const Eigen::VectorXd& w) {
    return fr->adjoint_lift(t, m->apply_sigma(t, fr->project_at(t, v), w));
  };
  // The lift is isometric inside the window, so the HS norm can be read off
  // the base-space operator.
  sys.vol_hs_norm_sq = [m, fr](double t, const HVec& v) {
    return hs_norm_sq(m->sigma(t, fr->project_at(t, v)));
  };
  // Fused step: one pull-back, the whole increment assembled on the base
  // space, one lift. Assembling alpha*dt + sigma*dW before lifting keeps the
  // per-entry float operations identical to the exponential-Euler route.
  sys.step = [m, fr](double t, const HVec& v, double dt,
                     const Eigen::VectorXd& w) {
    const HVec x = fr->project_at(t, v);
    const HVec al = m->alpha(t, x);
    const HVec sv = m->apply_sigma(t, x, w);
    StepIncrement out;
    out.incr = fr->adjoint_lift(t, HVec(x.space, al.data * dt + sv.data));
    out.drift_norm = norm(al);
    out.vol_hs_sq = hs_norm_sq(m->sigma(t, x));
    return out;
  };
  return sys;
}

StepIncrement SdeSystem::eval_step(double t, const HVec& v, double dt,
                                   const Eigen::VectorXd& w) const {
  if (step) return step(t, v, dt, w);
  const HVec a = drift(t, v);
  const HVec s = vol_apply(t, v, w);
  StepIncrement out;
  out.incr = HVec(a.space, a.data * dt + s.data);
  out.drift_norm = norm(a);
  out.vol_hs_sq = vol_hs_norm_sq ? vol_hs_norm_sq(t, v) : 0.0;
  return out;
}

}  // namespace spde
