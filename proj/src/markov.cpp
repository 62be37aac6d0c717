#include "spde/markov.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

#include "spde/parallel.hpp"
#include "spde/types.hpp"

namespace spde {

namespace {

// Streaming mean/variance; fed in fixed path order so reductions are
// reproducible regardless of worker count.
struct Welford {
  long n = 0;
  double mean = 0.0;
  double m2 = 0.0;

  void add(double v) {
    ++n;
    double d = v - mean;
    mean += d / n;
    m2 += d * (v - mean);
  }
  double var() const { return n > 1 ? m2 / (n - 1) : 0.0; }
  double se() const { return n > 0 ? std::sqrt(var() / n) : 0.0; }
};

double max_or_zero(const std::vector<double>& v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, x);
  return m;
}

// Midpoint Riemann sum of |f| over [0, T] on the plan grid. Used only for
// bound constants, so grid resolution is plenty.
double abs_integral(const TimeFunction& f, const NoisePlan& plan) {
  double acc = 0.0;
  for (int n = 0; n < plan.steps; ++n)
    acc += std::abs(f((n + 0.5) * plan.dt)) * plan.dt;
  return acc;
}

}  // namespace

// ---------------------------------------------------------------------------
// Reporting
// ---------------------------------------------------------------------------

nlohmann::json StatReport::to_json() const {
  nlohmann::json j;
  j["name"] = name;
  j["estimate"] = estimate;
  j["se"] = se;
  if (z_defined) j["z"] = z;
  j["n"] = n;
  j["aborted"] = aborted;
  j["pass"] = pass;
  j["seed"] = seed;
  if (!curve.empty()) {
    nlohmann::json c = nlohmann::json::array();
    for (const CurvePoint& p : curve)
      c.push_back({{"t", p.t},
                   {"value", p.value},
                   {"se", p.se},
                   {"bound", p.bound},
                   {"pass", p.pass}});
    j["curve"] = c;
  }
  if (!extras.empty()) j["extras"] = extras;
  return j;
}

int grid_index(const NoisePlan& plan, double t) {
  double raw = t / plan.dt;
  double snapped = std::round(raw);
  double scale = std::max(1.0, std::abs(raw));
  if (std::abs(raw - snapped) > 1e-9 * scale)
    throw ConfigError("time does not sit on the plan grid");
  int idx = static_cast<int>(snapped);
  if (idx < 0 || idx > plan.steps)
    throw ConfigError("time outside the plan horizon");
  return idx;
}

// ---------------------------------------------------------------------------
// Pathwise flow checks
// ---------------------------------------------------------------------------

StatReport test_flow_property(const ContractionSemigroup& S,
                              const CoefficientModel& m,
                              const DilationFrame* frame, double r, double s,
                              double t, const HVec& xi, const NoisePlan& plan,
                              int n_paths, double tol, int workers) {
  int ir = grid_index(plan, r);
  int is = grid_index(plan, s);
  int it = grid_index(plan, t);
  if (!(ir <= is && is <= it))
    throw ConfigError("flow test needs r <= s <= t on the grid");
  if (n_paths < 1) throw ConfigError("flow test needs at least one path");

  std::vector<double> disc(n_paths, 0.0);
  std::vector<char> bad(n_paths, 0);

  parallel_for(n_paths, workers, [&](long p) {
    try {
      Eigen::MatrixXd dw = sample_increments(plan, p);
      double d = 0.0;
      if (frame == nullptr) {
        SamplePath full =
            solve_mild_direct_with(S, m, xi, plan, dw, ir, it);
        SamplePath restart =
            solve_mild_direct_with(S, m, full.X[is], plan, dw, is, it);
        for (int n = is; n <= it; ++n)
          d = std::max(d, norm(sub(full.X[n], restart.X[n])));
      } else {
        DilatedCoefficients dc(m, *frame);
        SdeSystem sys = dc.system();
        HVec eta = frame->adjoint_lift(plan.time_at(ir), xi);
        SamplePath full = solve_sde_euler_with(sys, eta, plan, dw, ir, it);
        SamplePath restart =
            solve_sde_euler_with(sys, full.Y[is], plan, dw, is, it);
        for (int n = is; n <= it; ++n)
          d = std::max(d, norm(sub(full.Y[n], restart.Y[n])));
      }
      disc[p] = d;
    } catch (const OverflowError&) {
      bad[p] = 1;
    }
  });

  StatReport rep;
  rep.name = frame ? "flow-property-dilated" : "flow-property-mild";
  rep.seed = plan.seed;
  rep.n = n_paths;
  for (char b : bad) rep.aborted += b;
  rep.estimate = max_or_zero(disc);
  rep.pass = rep.estimate <= tol && rep.aborted == 0;
  rep.extras = {{"r", r}, {"s", s}, {"t", t}, {"tol", tol}};
  return rep;
}

StatReport test_scheme_equivalence(const ContractionSemigroup& S,
                                   const CoefficientModel& m,
                                   const DilationFrame& frame, double s,
                                   const HVec& xi, const NoisePlan& plan,
                                   int n_paths, double tol, int workers) {
  int is = grid_index(plan, s);
  if (n_paths < 1)
    throw ConfigError("scheme equivalence needs at least one path");

  DilatedCoefficients dc(m, frame);
  SdeSystem sys = dc.system();

  std::vector<double> disc(n_paths, 0.0);
  std::vector<char> bad(n_paths, 0);

  parallel_for(n_paths, workers, [&](long p) {
    try {
      Eigen::MatrixXd dw = sample_increments(plan, p);
      SamplePath mild = solve_mild_direct_with(S, m, xi, plan, dw, is);
      HVec eta = frame.adjoint_lift(plan.time_at(is), xi);
      SamplePath dil = solve_sde_euler_with(sys, eta, plan, dw, is);
      double d = 0.0;
      for (int n = is; n <= plan.steps; ++n) {
        HVec px = frame.project_at(plan.time_at(n), dil.Y[n]);
        d = std::max(d, norm(sub(mild.X[n], px)));
      }
      disc[p] = d;
    } catch (const OverflowError&) {
      bad[p] = 1;
    }
  });

  StatReport rep;
  rep.name = "scheme-equivalence";
  rep.seed = plan.seed;
  rep.n = n_paths;
  for (char b : bad) rep.aborted += b;
  rep.estimate = max_or_zero(disc);
  rep.pass = rep.estimate <= tol && rep.aborted == 0;
  rep.extras = {{"s", s}, {"tol", tol}};
  return rep;
}

// ---------------------------------------------------------------------------
// Transition-operator estimates
// ---------------------------------------------------------------------------

StatReport estimate_markov_operator(const ContractionSemigroup& S,
                                    const CoefficientModel& m, double s,
                                    double t, const HVec& x,
                                    const TestFunction& phi,
                                    const NoisePlan& plan, int n_paths,
                                    std::uint64_t path_base, int workers) {
  int is = grid_index(plan, s);
  int it = grid_index(plan, t);
  if (is > it) throw ConfigError("operator estimate needs s <= t");
  if (n_paths < 1) throw ConfigError("operator estimate needs paths");

  std::vector<double> vals(n_paths, 0.0);
  std::vector<char> bad(n_paths, 0);
  parallel_for(n_paths, workers, [&](long p) {
    try {
      SamplePath path =
          solve_mild_direct(S, m, x, plan, path_base + p, is, it);
      vals[p] = phi(path.X[it]);
    } catch (const OverflowError&) {
      bad[p] = 1;
    }
  });

  Welford w;
  int aborted = 0;
  for (int p = 0; p < n_paths; ++p) {
    if (bad[p])
      ++aborted;
    else
      w.add(vals[p]);
  }

  StatReport rep;
  rep.name = "markov-operator";
  rep.seed = plan.seed;
  rep.n = w.n;
  rep.aborted = aborted;
  rep.estimate = w.mean;
  rep.se = w.se();
  rep.pass = aborted == 0;
  rep.extras = {{"s", s}, {"t", t}, {"phi", phi.describe()}};
  return rep;
}

namespace {

// Shared core of the Chapman-Kolmogorov and tower tests. The sampler is
// called once per left-hand path and once per outer path with globally
// distinct keys; for the pointwise test it ignores the key.
StatReport two_stage_comparison(
    const ContractionSemigroup& S, const CoefficientModel& m, double r,
    double s, double t, const std::function<HVec(std::uint64_t)>& draw_xi,
    const TestFunction& phi, const NoisePlan& plan, int n_outer, int n_inner,
    double z_max, int workers, const char* name) {
  int ir = grid_index(plan, r);
  int is = grid_index(plan, s);
  int it = grid_index(plan, t);
  if (!(ir <= is && is <= it))
    throw ConfigError("two-stage comparison needs r <= s <= t on the grid");
  if (n_outer < 2 || n_inner < 1)
    throw ConfigError("two-stage comparison needs n_outer >= 2, n_inner >= 1");

  const long n_lhs = static_cast<long>(n_outer) * n_inner;
  std::vector<double> lhs_vals(n_lhs, 0.0);
  std::vector<char> lhs_bad(n_lhs, 0);
  std::vector<HVec> outer_states(n_outer);
  std::vector<char> outer_bad(n_outer, 0);

  // Stage one: left-hand paths r -> t and outer paths r -> s. Stream and
  // sampler indices are disjoint by construction.
  parallel_for(n_lhs + n_outer, workers, [&](long q) {
    if (q < n_lhs) {
      try {
        HVec xi = draw_xi(static_cast<std::uint64_t>(q));
        SamplePath path = solve_mild_direct(S, m, xi, plan, q, ir, it);
        lhs_vals[q] = phi(path.X[it]);
      } catch (const OverflowError&) {
        lhs_bad[q] = 1;
      }
    } else {
      long i = q - n_lhs;
      try {
        HVec xi = draw_xi(static_cast<std::uint64_t>(q));
        SamplePath path = solve_mild_direct(S, m, xi, plan, q, ir, is);
        outer_states[i] = path.X[is];
      } catch (const OverflowError&) {
        outer_bad[i] = 1;
      }
    }
  });

  // Stage two: fresh inner paths s -> t from each outer state.
  std::vector<double> inner_vals(n_lhs, 0.0);
  std::vector<char> inner_bad(n_lhs, 0);
  const long inner_base = n_lhs + n_outer;
  parallel_for(n_lhs, workers, [&](long q) {
    long i = q / n_inner;
    if (outer_bad[i]) {
      inner_bad[q] = 1;
      return;
    }
    try {
      SamplePath path = solve_mild_direct(S, m, outer_states[i], plan,
                                          inner_base + q, is, it);
      inner_vals[q] = phi(path.X[it]);
    } catch (const OverflowError&) {
      inner_bad[q] = 1;
    }
  });

  int aborted = 0;
  Welford lhs;
  for (long q = 0; q < n_lhs; ++q) {
    if (lhs_bad[q])
      ++aborted;
    else
      lhs.add(lhs_vals[q]);
  }
  Welford rhs;
  for (int i = 0; i < n_outer; ++i) {
    if (outer_bad[i]) {
      ++aborted;
      continue;
    }
    Welford inner;
    bool ok = true;
    for (int j = 0; j < n_inner; ++j) {
      long q = static_cast<long>(i) * n_inner + j;
      if (inner_bad[q]) {
        ++aborted;
        ok = false;
      } else {
        inner.add(inner_vals[q]);
      }
    }
    if (ok) rhs.add(inner.mean);
  }

  StatReport rep;
  rep.name = name;
  rep.seed = plan.seed;
  rep.n = n_lhs + n_outer * (1 + static_cast<long>(n_inner));
  rep.aborted = aborted;
  double diff = lhs.mean - rhs.mean;
  double denom = std::sqrt(lhs.se() * lhs.se() + rhs.se() * rhs.se());
  rep.estimate = diff;
  rep.se = denom;
  if (denom > 0) {
    rep.z = diff / denom;
    rep.z_defined = true;
    rep.pass = std::abs(rep.z) <= z_max && aborted == 0;
  } else {
    // Deterministic dynamics collapse both sides to a point mass.
    rep.pass =
        std::abs(diff) <= 1e-12 * std::max(1.0, std::abs(lhs.mean)) &&
        aborted == 0;
  }
  rep.extras = {{"r", r},
                {"s", s},
                {"t", t},
                {"lhs_mean", lhs.mean},
                {"lhs_se", lhs.se()},
                {"rhs_mean", rhs.mean},
                {"rhs_se", rhs.se()},
                {"n_outer", n_outer},
                {"n_inner", n_inner},
                {"z_max", z_max},
                {"phi", phi.describe()}};
  return rep;
}

}  // namespace

StatReport test_chapman_kolmogorov(const ContractionSemigroup& S,
                                   const CoefficientModel& m, double r,
                                   double s, double t, const HVec& x,
                                   const TestFunction& phi,
                                   const NoisePlan& plan, int n_outer,
                                   int n_inner, double z_max, int workers) {
  auto fixed = [&x](std::uint64_t) { return x; };
  return two_stage_comparison(S, m, r, s, t, fixed, phi, plan, n_outer,
                              n_inner, z_max, workers, "chapman-kolmogorov");
}

StatReport test_markov_tower(
    const ContractionSemigroup& S, const CoefficientModel& m, double r,
    double s, double t, const std::function<HVec(std::uint64_t)>& xi_sampler,
    const TestFunction& phi, const NoisePlan& plan, int n_outer, int n_inner,
    double z_max, int workers) {
  return two_stage_comparison(S, m, r, s, t, xi_sampler, phi, plan, n_outer,
                              n_inner, z_max, workers, "markov-tower");
}

// ---------------------------------------------------------------------------
// Moment and stability estimates
// ---------------------------------------------------------------------------

StatReport test_apriori_bound(const DilatedCoefficients& dc, const HVec& eta,
                              const NoisePlan& plan, int n_paths, double p,
                              int workers) {
  const CoefficientModel& m = dc.base();
  const DilationFrame& frame = dc.frame();
  if (n_paths < 2) throw ConfigError("a-priori bound needs n_paths >= 2");
  SdeSystem sys = dc.system();
  const int N = plan.steps;
  const double gap = m.C0 - m.theta;

  // Per-path samples of the weighted dilated norm and the projected norm.
  std::vector<std::vector<double>> wy(n_paths), nx(n_paths);
  std::vector<double> sup_p(n_paths, 0.0);
  std::vector<char> bad(n_paths, 0);

  parallel_for(n_paths, workers, [&](long q) {
    try {
      SamplePath path = solve_sde_euler(sys, eta, plan, q);
      wy[q].resize(N + 1);
      nx[q].resize(N + 1);
      double sup_norm = 0.0;
      for (int n = 0; n <= N; ++n) {
        double t = plan.time_at(n);
        wy[q][n] = norm_sq(path.Y[n]) * std::exp(-gap * t);
        HVec x = frame.project_at(t, path.Y[n]);
        double nxn = norm_sq(x);
        nx[q][n] = nxn;
        sup_norm = std::max(sup_norm, std::sqrt(nxn));
      }
      sup_p[q] = std::pow(sup_norm, p);
    } catch (const OverflowError&) {
      bad[q] = 1;
    }
  });

  int aborted = 0;
  for (char b : bad) aborted += b;

  HVec xi0 = frame.project_at(0.0, eta);
  double denom_x = 1.0 + norm_sq(xi0);
  // L1 norm of f over the whole horizon; the bound uses it uniformly in t.
  double f_l1 = abs_integral(m.f, plan);
  double eta_sq = norm_sq(eta);

  StatReport rep;
  rep.name = "apriori-bound";
  rep.seed = plan.seed;
  rep.n = n_paths - aborted;
  rep.aborted = aborted;

  nlohmann::json kcurve = nlohmann::json::array();
  Welford sup_w;
  double worst = -std::numeric_limits<double>::infinity();
  double worst_se = 0.0;
  bool all_pass = aborted == 0;

  for (int n = 0; n <= N; ++n) {
    double t = plan.time_at(n);
    Welford wv, xv;
    for (int q = 0; q < n_paths; ++q) {
      if (bad[q]) continue;
      wv.add(wy[q][n]);
      xv.add(nx[q][n]);
    }
    double bound = eta_sq + f_l1;
    CurvePoint cp;
    cp.t = t;
    cp.value = wv.mean;
    cp.se = wv.se();
    cp.bound = bound;
    cp.pass = wv.mean <= bound + 3.0 * wv.se();
    all_pass = all_pass && cp.pass;
    rep.curve.push_back(cp);
    if (wv.mean - bound > worst) {
      worst = wv.mean - bound;
      worst_se = wv.se();
    }

    double khat = xv.mean / denom_x;
    double kse = xv.se() / denom_x;
    double kbound = std::exp(gap * t) * (1.0 + f_l1);
    bool kpass = khat <= kbound + 3.0 * kse;
    all_pass = all_pass && kpass;
    kcurve.push_back({{"t", t},
                      {"value", khat},
                      {"se", kse},
                      {"bound", kbound},
                      {"pass", kpass}});
  }
  for (int q = 0; q < n_paths; ++q)
    if (!bad[q]) sup_w.add(sup_p[q]);

  rep.estimate = worst;
  rep.se = worst_se;
  if (worst_se > 0) {
    rep.z = worst / worst_se;
    rep.z_defined = true;
  }
  rep.pass = all_pass;
  rep.extras = {{"C0", m.C0},
                {"theta", m.theta},
                {"growth_curve", kcurve},
                {"sup_moment_order", p},
                {"sup_moment_mean", sup_w.mean},
                {"sup_moment_se", sup_w.se()}};
  return rep;
}

StatReport test_lipschitz_map(const DilatedCoefficients& dc, const HVec& xi,
                              const HVec& zeta, const NoisePlan& plan,
                              int n_paths, int workers) {
  const CoefficientModel& m = dc.base();
  const DilationFrame& frame = dc.frame();
  if (!m.tau.is_constant())
    throw ConfigError(
        "lipschitz test needs a constant tau; state-dependent tau gives no "
        "two-point contraction weight");
  if (n_paths < 1) throw ConfigError("lipschitz test needs paths");
  double tau0 = m.tau(0.0);
  SdeSystem sys = dc.system();
  const int N = plan.steps;

  HVec eta_xi = frame.embed(xi);
  HVec eta_ze = frame.embed(zeta);
  double d0 = norm_sq(sub(eta_xi, eta_ze));
  double dh = norm_sq(sub(xi, zeta));

  std::vector<std::vector<double>> gap(n_paths), hgap(n_paths);
  std::vector<char> bad(n_paths, 0);

  parallel_for(n_paths, workers, [&](long q) {
    try {
      Eigen::MatrixXd dw = sample_increments(plan, q);
      SamplePath ya = solve_sde_euler_with(sys, eta_xi, plan, dw, 0);
      SamplePath yb = solve_sde_euler_with(sys, eta_ze, plan, dw, 0);
      gap[q].resize(N + 1);
      hgap[q].resize(N + 1);
      for (int n = 0; n <= N; ++n) {
        double t = plan.time_at(n);
        double w = std::exp(-m.f.integral(0.0, t) - tau0 * t);
        gap[q][n] = w * norm_sq(sub(ya.Y[n], yb.Y[n]));
        HVec xa = frame.project_at(t, ya.Y[n]);
        HVec xb = frame.project_at(t, yb.Y[n]);
        hgap[q][n] = norm_sq(sub(xa, xb));
      }
    } catch (const OverflowError&) {
      bad[q] = 1;
    }
  });

  int aborted = 0;
  for (char b : bad) aborted += b;

  StatReport rep;
  rep.name = "lipschitz-map";
  rep.seed = plan.seed;
  rep.n = n_paths - aborted;
  rep.aborted = aborted;

  bool all_pass = aborted == 0;
  double worst = -std::numeric_limits<double>::infinity();
  double worst_se = 0.0;
  double hmax = 0.0;
  for (int n = 0; n <= N; ++n) {
    Welford gv, hv;
    for (int q = 0; q < n_paths; ++q) {
      if (bad[q]) continue;
      gv.add(gap[q][n]);
      hv.add(hgap[q][n]);
    }
    CurvePoint cp;
    cp.t = plan.time_at(n);
    cp.value = gv.mean;
    cp.se = gv.se();
    cp.bound = d0;
    cp.pass = gv.mean <= d0 + 3.0 * gv.se();
    all_pass = all_pass && cp.pass;
    rep.curve.push_back(cp);
    if (gv.mean - d0 > worst) {
      worst = gv.mean - d0;
      worst_se = gv.se();
    }
    if (dh > 0) hmax = std::max(hmax, hv.mean / dh);
  }

  rep.estimate = worst;
  rep.se = worst_se;
  if (worst_se > 0) {
    rep.z = worst / worst_se;
    rep.z_defined = true;
  }
  rep.pass = all_pass;
  rep.extras = {{"tau", tau0},
                {"initial_gap_sq", d0},
                {"initial_gap_sq_base", dh},
                {"induced_base_ratio_max", hmax}};
  return rep;
}

StatReport test_strong_convergence(const ContractionSemigroup& S,
                                   const CoefficientModel& m, const HVec& xi,
                                   const NoisePlan& plan, int n_paths,
                                   int refine, double min_slope, int workers) {
  if (refine < 8 || refine % 4 != 0)
    throw ConfigError("refine must be a multiple of 4, at least 8");
  if (n_paths < 2) throw ConfigError("convergence test needs n_paths >= 2");
  const int levels[3] = {1, 2, 4};

  NoisePlan fine = plan;
  fine.dt = plan.dt / refine;
  fine.steps = plan.steps * refine;

  std::vector<std::array<double, 3>> err2(n_paths, {0.0, 0.0, 0.0});
  std::vector<char> bad(n_paths, 0);

  parallel_for(n_paths, workers, [&](long q) {
    try {
      Eigen::MatrixXd dwf = sample_increments(fine, q);
      SamplePath ref = solve_mild_direct_with(S, m, xi, fine, dwf, 0);
      const HVec& x_ref = ref.X[fine.steps];
      for (int li = 0; li < 3; ++li) {
        int lv = levels[li];
        NoisePlan lp = plan;
        lp.dt = plan.dt / lv;
        lp.steps = plan.steps * lv;
        int group = refine / lv;
        Eigen::MatrixXd dwl(dwf.rows(), lp.steps);
        for (int c = 0; c < lp.steps; ++c)
          dwl.col(c) = dwf.middleCols(c * group, group).rowwise().sum();
        SamplePath run = solve_mild_direct_with(S, m, xi, lp, dwl, 0);
        err2[q][li] = norm_sq(sub(run.X[lp.steps], x_ref));
      }
    } catch (const OverflowError&) {
      bad[q] = 1;
    }
  });

  int aborted = 0;
  for (char b : bad) aborted += b;

  StatReport rep;
  rep.name = "strong-convergence";
  rep.seed = plan.seed;
  rep.n = n_paths - aborted;
  rep.aborted = aborted;

  double xs[3], ys[3];
  for (int li = 0; li < 3; ++li) {
    Welford w;
    for (int q = 0; q < n_paths; ++q)
      if (!bad[q]) w.add(err2[q][li]);
    double e = std::sqrt(std::max(w.mean, 0.0));
    double dt_l = plan.dt / levels[li];
    CurvePoint cp;
    cp.t = dt_l;
    cp.value = e;
    cp.se = e > 0 ? w.se() / (2.0 * e) : 0.0;
    cp.bound = 0.0;
    rep.curve.push_back(cp);
    xs[li] = std::log(dt_l);
    ys[li] = std::log(std::max(e, 1e-300));
  }

  double xb = (xs[0] + xs[1] + xs[2]) / 3.0;
  double yb = (ys[0] + ys[1] + ys[2]) / 3.0;
  double num = 0.0, den = 0.0;
  for (int li = 0; li < 3; ++li) {
    num += (xs[li] - xb) * (ys[li] - yb);
    den += (xs[li] - xb) * (xs[li] - xb);
  }
  rep.estimate = num / den;
  rep.pass = rep.estimate >= min_slope && aborted == 0;
  rep.extras = {{"refine", refine}, {"min_slope", min_slope}};
  return rep;
}

}  // namespace spde
