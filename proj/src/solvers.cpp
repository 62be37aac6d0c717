#include "spde/solvers.hpp"

#include <cmath>

#include "spde/types.hpp"

namespace spde {

namespace {

bool finite(const HVec& v) { return v.data.allFinite(); }

void check_range(const NoisePlan& plan, int start, int& stop) {
  if (stop < 0) stop = plan.steps;
  if (start < 0 || start > plan.steps || stop < start || stop > plan.steps)
    throw ConfigError("solver start/stop outside the plan grid");
}

void fill_times(SamplePath& p, const NoisePlan& plan) {
  p.times.resize(plan.steps + 1);
  for (int n = 0; n <= plan.steps; ++n) p.times[n] = plan.time_at(n);
}

}  // namespace

// ---------------------------------------------------------------------------
// Euler-Maruyama on the system's own space
// ---------------------------------------------------------------------------

SamplePath solve_sde_euler_with(const SdeSystem& sys, const HVec& eta,
                                const NoisePlan& plan,
                                const Eigen::MatrixXd& dw, int start, int stop,
                                Provenance prov) {
  require_same_space(sys.space, eta.space, "solve_sde_euler initial value");
  check_range(plan, start, stop);
  if (dw.rows() != sys.noise_space.dim() || dw.cols() < stop)
    throw ConfigError("increment matrix does not match the noise plan");
  if (!finite(eta)) throw OverflowError(start, prov.path_index);

  SamplePath path;
  path.prov = std::move(prov);
  path.start = start;
  fill_times(path, plan);
  path.Y.assign(plan.steps + 1, HVec{});
  path.Y[start] = eta;

  HVec y = eta;
  for (int n = start; n < stop; ++n) {
    StepIncrement inc = sys.eval_step(plan.time_at(n), y, plan.dt, dw.col(n));
    y = HVec(y.space, y.data + inc.incr.data);
    if (!finite(y)) throw OverflowError(n + 1, path.prov.path_index);
    path.integrability += (inc.drift_norm + inc.vol_hs_sq) * plan.dt;
    path.Y[n + 1] = y;
  }
  return path;
}

SamplePath solve_sde_euler(const SdeSystem& sys, const HVec& eta,
                           const NoisePlan& plan, std::uint64_t path_index,
                           int start, int stop) {
  Eigen::MatrixXd dw = sample_increments(plan, path_index);
  Provenance prov;
  prov.scheme = "euler";
  prov.seed = plan.seed;
  prov.path_index = path_index;
  return solve_sde_euler_with(sys, eta, plan, dw, start, stop,
                              std::move(prov));
}

// ---------------------------------------------------------------------------
// Exponential Euler on the base space
// ---------------------------------------------------------------------------

SamplePath solve_mild_direct_with(const ContractionSemigroup& S,
                                  const CoefficientModel& m, const HVec& xi,
                                  const NoisePlan& plan,
                                  const Eigen::MatrixXd& dw, int start,
                                  int stop, Provenance prov) {
  require_same_space(S.space, m.space, "semigroup vs model space");
  require_same_space(m.space, xi.space, "mild initial value");
  check_range(plan, start, stop);
  if (dw.rows() != m.noise_space.dim() || dw.cols() < stop)
    throw ConfigError("increment matrix does not match the noise plan");
  if (!finite(xi)) throw OverflowError(start, prov.path_index);

  SamplePath path;
  path.prov = std::move(prov);
  path.prov.model_id = m.id;
  path.start = start;
  fill_times(path, plan);
  path.X.assign(plan.steps + 1, HVec{});
  path.X[start] = xi;

  HVec x = xi;
  for (int n = start; n < stop; ++n) {
    double t = plan.time_at(n);
    HVec al = m.alpha(t, x);
    HVec sv = m.apply_sigma(t, x, dw.col(n));
    double vol = hs_norm_sq(m.sigma(t, x));
    // Same grouping as the Euler stepper: one fused increment added to the
    // state, then the semigroup.
    HVec pre(x.space, x.data + (al.data * plan.dt + sv.data));
    x = apply_semigroup(S, plan.dt, pre);
    if (!finite(x)) throw OverflowError(n + 1, path.prov.path_index);
    path.integrability += (norm(al) + vol) * plan.dt;
    path.X[n + 1] = x;
  }
  return path;
}

SamplePath solve_mild_direct(const ContractionSemigroup& S,
                             const CoefficientModel& m, const HVec& xi,
                             const NoisePlan& plan, std::uint64_t path_index,
                             int start, int stop) {
  Eigen::MatrixXd dw = sample_increments(plan, path_index);
  Provenance prov;
  prov.scheme = "exp-euler";
  prov.seed = plan.seed;
  prov.path_index = path_index;
  return solve_mild_direct_with(S, m, xi, plan, dw, start, stop,
                                std::move(prov));
}

// ---------------------------------------------------------------------------
// Moving between the two pictures
// ---------------------------------------------------------------------------

void project_mild(const DilationFrame& frame, SamplePath& path) {
  if (path.Y.empty()) throw ConfigError("project_mild needs a dilated path");
  path.X.assign(path.Y.size(), HVec{});
  for (std::size_t n = path.start; n < path.Y.size(); ++n) {
    if (path.Y[n].space.dim() == 0) continue;  // truncated run
    path.X[n] = frame.project_at(path.times[n], path.Y[n]);
  }
}

SamplePath lift_mild(const DilationFrame& frame, const CoefficientModel& m,
                     const HVec& xi, const SamplePath& xpath,
                     const Eigen::MatrixXd& dw) {
  if (xpath.X.empty()) throw ConfigError("lift_mild needs a mild path");
  require_same_space(m.space, xi.space, "lift_mild initial value");
  int steps = static_cast<int>(xpath.X.size()) - 1;
  if (dw.rows() != m.noise_space.dim() || dw.cols() < steps)
    throw ConfigError("increment matrix does not match the mild path");
  double dt = steps > 0 ? xpath.times[1] - xpath.times[0] : 0.0;

  SamplePath out;
  out.prov = xpath.prov;
  out.prov.scheme = "lift";
  out.start = xpath.start;
  out.times = xpath.times;
  out.Y.assign(xpath.X.size(), HVec{});

  HVec y = frame.adjoint_lift(out.times[out.start], xi);
  out.Y[out.start] = y;
  for (int n = out.start; n < steps; ++n) {
    double t = out.times[n];
    const HVec& x = xpath.X[n];
    if (x.space.dim() == 0) throw ConfigError("lift_mild hit a truncated path");
    HVec al = m.alpha(t, x);
    HVec sv = m.apply_sigma(t, x, dw.col(n));
    HVec inc(m.space, al.data * dt + sv.data);
    y = HVec(y.space, y.data + frame.adjoint_lift(t, inc).data);
    if (!y.data.allFinite())
      throw OverflowError(n + 1, out.prov.path_index);
    out.Y[n + 1] = y;
  }
  return out;
}

SamplePath lift_mild(const DilationFrame& frame, const CoefficientModel& m,
                     const HVec& xi, const SamplePath& xpath,
                     const NoisePlan& plan, std::uint64_t path_index) {
  Eigen::MatrixXd dw = sample_increments(plan, path_index);
  return lift_mild(frame, m, xi, xpath, dw);
}

}  // namespace spde
