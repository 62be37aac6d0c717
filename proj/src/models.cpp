#include "spde/models.hpp"

#include <cmath>

namespace spde {

namespace {

// Unit-H-norm noise column j of m. Spectral spaces use coordinate vectors;
// grids use smooth bumps spread over the grid span (point-mass columns would
// put all the noise into single cells).
HVec unit_column(const SpaceSpec& space, int j, int m) {
  if (space.kind == SpaceKind::spectral) return HVec::basis(space, j % space.dim());
  const double span = (space.points - 1) * space.dx;
  const double center = space.left + (j + 0.5) * span / m;
  const double width = std::max(span / (2.0 * m), 2.0 * space.dx);
  Eigen::VectorXd d(space.points);
  for (int i = 0; i < space.points; ++i) {
    const double s = space.position(i);
    d[i] = std::exp(-0.5 * std::pow((s - center) / width, 2));
  }
  HVec v(space, std::move(d));
  return scale(1.0 / norm(v), v);
}

Eigen::MatrixXd column_matrix(const SpaceSpec& space, int m, double s,
                              bool reversed) {
  Eigen::MatrixXd M(space.dim(), m);
  for (int j = 0; j < m; ++j) {
    const int jj = reversed ? m - 1 - j : j;
    M.col(j) = s * unit_column(space, jj, m).data;
  }
  return M;
}

Eigen::VectorXd get_vector(const nlohmann::json& params, const char* key,
                           int dim, double fallback_base) {
  if (params.contains(key)) {
    auto v = params.at(key).get<std::vector<double>>();
    if (static_cast<int>(v.size()) != dim)
      throw ConfigError(std::string("model parameter ") + key + " needs " +
                        std::to_string(dim) + " entries");
    return Eigen::Map<Eigen::VectorXd>(v.data(), dim);
  }
  Eigen::VectorXd out(dim);
  for (int k = 0; k < dim; ++k) out[k] = std::pow(fallback_base, k);
  return out;
}

CoefficientModel make_linear_ou(const SpaceSpec& space,
                                const nlohmann::json& params) {
  CoefficientModel m;
  m.id = "linear-ou";
  m.space = space;
  const int K = space.dim();
  const int nd = params.value("noise_dim", K);
  if (nd < 1 || nd > K)
    throw ConfigError("linear-ou noise_dim must be in [1, " + std::to_string(K) + "]");
  m.noise_space = SpaceSpec::spectral(nd);

  Eigen::VectorXd sig = get_vector(params, "sigma_diag", nd, 0.5);
  Eigen::VectorXd drift = params.contains("drift_diag")
                              ? get_vector(params, "drift_diag", K, 0.0)
                              : Eigen::VectorXd::Zero(K);
  Eigen::VectorXd g = params.contains("g0") ? get_vector(params, "g0", K, 0.0)
                                            : Eigen::VectorXd::Zero(K);
  for (int k = 0; k < K; ++k)
    if (drift[k] > 0.0)
      throw ConfigError("linear-ou drift spectrum must be <= 0");

  Eigen::MatrixXd S(K, nd);
  S.setZero();
  for (int j = 0; j < nd; ++j) S.col(j) = sig[j] * unit_column(space, j, nd).data;

  m.alpha = [drift, g](double, const HVec& x) {
    return HVec(x.space, drift.cwiseProduct(x.data) + g);
  };
  HSOperator Sop(m.noise_space, space, S);
  m.sigma = [Sop](double, const HVec&) { return Sop; };
  m.sigma_apply = [S, space](double, const HVec&, const Eigen::VectorXd& w) {
    return HVec(space, S * w);
  };

  const double s2 = hs_norm_sq(Sop);
  const double dmax = drift.cwiseAbs().maxCoeff();
  const double g2 = space.weight() * g.squaredNorm();
  m.theta = 1.0;
  m.C0 = std::max(m.theta + 1.0, 2.0 * dmax * dmax);
  m.f = TimeFunction::constant(s2 + g2 * (1.0 / (m.C0 - m.theta) + 2.0));
  m.tau = TauFunction::constant(0.0);
  m.beta = 0.0;
  m.p = 2.0;
  m.C = 1.0;
  return m;
}

CoefficientModel make_allen_cahn(const SpaceSpec& space,
                                 const nlohmann::json& params) {
  CoefficientModel m;
  m.id = "allen-cahn";
  m.space = space;
  const int nd = params.value("noise_dim", std::min(space.dim(), 4));
  m.noise_space = SpaceSpec::spectral(nd);

  const double c1 = params.value("c1", 1.0);
  const double c2 = params.value("c2", 1.0);
  const double kappa = params.value("kappa", 0.5);
  const double s0 = params.value("s0", 0.2);
  const double s1 = params.value("s1", 0.1);
  if (c2 < 0.0 || kappa < 0.0) throw ConfigError("allen-cahn needs c2, kappa >= 0");

  Eigen::MatrixXd S0 = column_matrix(space, nd, s0, false);
  Eigen::MatrixXd S1 = column_matrix(space, nd, s1, true);

  m.alpha = [c1, c2](double, const HVec& x) {
    return HVec(x.space,
                c1 * x.data.array() - c2 * x.data.array().cube());
  };
  const SpaceSpec noise = m.noise_space;
  m.sigma = [S0, S1, kappa, noise](double, const HVec& x) {
    const double rho = 1.0 / (1.0 + norm(x));
    return HSOperator(noise, x.space, S0 + (kappa * rho) * S1);
  };
  m.sigma_apply = [S0, S1, kappa](double, const HVec& x,
                                  const Eigen::VectorXd& w) {
    const double rho = 1.0 / (1.0 + norm(x));
    return HVec(x.space, S0 * w + (kappa * rho) * (S1 * w));
  };

  const double n0 = space.weight() * S0.squaredNorm();
  const double n1 = space.weight() * S1.squaredNorm();
  // rho has Lipschitz constant 1 and 0 < rho <= 1, so
  //   ||sigma(x)-sigma(y)||_HS <= kappa ||S1|| ||x-y||   and
  //   ||sigma(y)||^2 <= 2||S0||^2 + 2 kappa^2 ||S1||^2.
  m.tau = TauFunction::constant(2.0 * c1 + kappa * kappa * n1);
  m.f = TimeFunction::constant(2.0 * n0 + 2.0 * kappa * kappa * n1);
  m.theta = 1.0;
  // The cube term's growth constant is grid dependent: ||y||_inf^2 <=
  // ||y||^2 / weight on point grids.
  const double winv = 1.0 / space.weight();
  m.C0 = std::max({2.0 * c1 + m.theta, 2.0 * c1 * c1,
                   2.0 * c2 * c2 * winv * winv});
  m.beta = 4.0;
  m.p = 6.0;
  m.C = std::max(1.0, m.tau(0.0));
  return m;
}

CoefficientModel make_shift_hjm(const SpaceSpec& space,
                                const nlohmann::json& params) {
  if (space.kind != SpaceKind::halfline_grid)
    throw ConfigError("shift-hjm runs on a halfline grid, got " +
                      space.describe());
  CoefficientModel m;
  m.id = "shift-hjm";
  m.space = space;
  const int nd = params.value("noise_dim", 4);
  m.noise_space = SpaceSpec::spectral(nd);

  const double c1 = params.value("c1", 0.5);
  const double c2 = params.value("c2", 1.0);
  const double g0 = params.value("g0", 0.1);
  const double s0 = params.value("s0", 0.1);
  if (c1 < 0.0 || c2 < 0.0) throw ConfigError("shift-hjm needs c1, c2 >= 0");

  // Pull profile w(s) = exp(-s): mean reversion fades along the maturity axis.
  Eigen::VectorXd pull(space.points);
  for (int i = 0; i < space.points; ++i) pull[i] = std::exp(-space.position(i));
  const Eigen::VectorXd forcing = g0 * pull;

  m.alpha = [c1, c2, pull, forcing](double, const HVec& x) {
    return HVec(x.space, c1 * pull.cwiseProduct(x.data) -
                             c2 * x.data.array().cube().matrix() + forcing);
  };
  Eigen::MatrixXd S = column_matrix(space, nd, s0, false);
  HSOperator Sop(m.noise_space, space, S);
  m.sigma = [Sop](double, const HVec&) { return Sop; };
  m.sigma_apply = [S](double, const HVec& x, const Eigen::VectorXd& w) {
    return HVec(x.space, S * w);
  };

  const double s2 = hs_norm_sq(Sop);
  const double fg2 = space.weight() * forcing.squaredNorm();
  m.theta = 1.0;
  const double winv = 1.0 / space.weight();
  m.C0 = std::max({2.0 * c1 + m.theta + 1.0, 3.0 * c1 * c1,
                   3.0 * c2 * c2 * winv * winv});
  m.f = TimeFunction::constant(s2 + 4.0 * fg2);
  m.tau = TauFunction::constant(2.0 * c1);
  m.beta = 4.0;
  m.p = 6.0;
  m.C = std::max(1.0, m.tau(0.0));
  return m;
}

CoefficientModel make_cubic_blowup(const SpaceSpec& space,
                                   const nlohmann::json& params) {
  CoefficientModel m;
  m.id = "cubic-blowup";
  m.space = space;
  m.noise_space = SpaceSpec::spectral(params.value("noise_dim", 1));
  m.alpha = [](double, const HVec& x) {
    return HVec(x.space, x.data.array().cube().matrix().eval());
  };
  const HSOperator Z = HSOperator::zero(m.noise_space, space);
  m.sigma = [Z](double, const HVec&) { return Z; };
  m.sigma_apply = [](double, const HVec& x, const Eigen::VectorXd&) {
    return HVec::zero(x.space);
  };
  // Deliberately wrong claims: +x^3 is anti-monotone and f = 2 cannot absorb
  // it, so the prober has something real to refuse.
  m.f = TimeFunction::constant(2.0);
  m.tau = TauFunction::constant(0.0);
  m.theta = 1.0;
  m.C0 = 1.0;
  m.beta = 4.0;
  m.p = 6.0;
  m.C = 1.0;
  return m;
}

}  // namespace

CoefficientModel make_model(const std::string& id, const SpaceSpec& space,
                            const nlohmann::json& params) {
  // A bare {} binds as a null json; treat it as "all defaults".
  const nlohmann::json p =
      params.is_null() ? nlohmann::json::object() : params;
  if (!p.is_object())
    throw ConfigError("model params must be a JSON object, got " +
                      std::string(p.type_name()));
  CoefficientModel m;
  if (id == "linear-ou")
    m = make_linear_ou(space, p);
  else if (id == "allen-cahn")
    m = make_allen_cahn(space, p);
  else if (id == "shift-hjm")
    m = make_shift_hjm(space, p);
  else if (id == "cubic-blowup")
    m = make_cubic_blowup(space, p);
  else
    throw ConfigError("unknown model id: " + id +
                      " (known: linear-ou, allen-cahn, shift-hjm, cubic-blowup)");
  m.validate();
  return m;
}

std::vector<std::string> model_catalog() {
  return {"linear-ou", "allen-cahn", "shift-hjm", "cubic-blowup"};
}

}  // namespace spde
