#include "spde/frame.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace spde {

namespace {

// Snap a length outward to a whole number of cells.
int ceil_cells(double len, double dx) {
  int c = static_cast<int>(std::ceil(len / dx - 1e-9));
  return std::max(c, 0);
}

}  // namespace

Window DilationFrame::default_window(const ContractionSemigroup& S,
                                     double horizon, double dx,
                                     double eps_frame) {
  if (horizon < 0.0) throw ConfigError("window horizon must be nonnegative");
  Window w;
  if (S.kind == ContractionSemigroup::Kind::shift) {
    const double support = (S.space.points - 1) * S.space.dx;
    w.l_neg = (ceil_cells(horizon, dx) + 2) * dx;
    w.l_pos = (ceil_cells(support + horizon, dx) + 2) * dx;
  } else {
    // Tail mass left of -l_neg after a shift by up to `horizon` must stay
    // below eps_frame^2: exp(-2 lambda (l_neg - horizon)) <= eps^2.
    const double tail = std::log(1.0 / eps_frame) / S.lambda_min();
    w.l_neg = (ceil_cells(horizon + tail, dx) + 2) * dx;
    w.l_pos = (ceil_cells(horizon, dx) + 2) * dx;
  }
  return w;
}

DilationFrame DilationFrame::dilate(const ContractionSemigroup& S, Window w,
                                    double dx, double eps_frame) {
  if (!(dx > 0.0)) throw ConfigError("frame dx must be positive");
  if (!(eps_frame > 0.0 && eps_frame < 1.0))
    throw ConfigError("eps_frame must lie in (0, 1)");
  if (w.l_neg < dx || w.l_pos < 0.0)
    throw ConfigError("frame window must extend at least one cell left of 0");

  DilationFrame f;
  f.base_ = S;
  f.dx_ = dx;
  f.eps_ = eps_frame;

  const int n_neg = ceil_cells(w.l_neg, dx);
  const int n_pos = ceil_cells(w.l_pos, dx);
  f.l_neg_ = n_neg * dx;
  f.l_pos_ = n_pos * dx;
  f.band_points_ = n_neg + n_pos + 1;
  f.zero_idx_ = n_neg;

  if (S.kind == ContractionSemigroup::Kind::shift) {
    if (std::abs(dx - S.space.dx) > 1e-12 * S.space.dx)
      throw ConfigError("frame dx must equal the halfline grid dx");
    const double support = (S.space.points - 1) * S.space.dx;
    if (f.l_pos_ < support - 1e-12)
      throw ConfigError(
          "window too small: l_pos must cover the halfline data support " +
          std::to_string(support));
    f.bands_ = 1;
    f.max_horizon_ = std::min(f.l_pos_ - support, f.l_neg_);
    f.dilated_ = SpaceSpec::line(-f.l_neg_, dx, f.band_points_);
    return f;
  }

  // Diagonal kind: one band per mode, all sharing the window grid.
  const int K = S.space.points;
  const double lam_min = S.lambda_min();
  if (std::exp(-2.0 * lam_min * f.l_neg_) > eps_frame * eps_frame)
    throw ConfigError(
        "window too small: embedding tail mass exp(-2 lambda l_neg) exceeds "
        "eps_frame^2 for lambda = " +
        std::to_string(lam_min));

  f.bands_ = K;
  f.weights_ = Eigen::VectorXd::Zero(K * f.band_points_);
  for (int k = 0; k < K; ++k) {
    const double lam = S.lambdas[k];
    // Discrete normalization: dx * c^2 * sum exp(2 lambda s_i) = 1 over
    // s_i <= 0. Summed from the smallest terms up.
    double s2 = 0.0;
    for (int i = 0; i <= f.zero_idx_; ++i)
      s2 += std::exp(2.0 * lam * (-f.l_neg_ + i * dx));
    const double c = 1.0 / std::sqrt(dx * s2);
    for (int i = 0; i <= f.zero_idx_; ++i)
      f.weights_[k * f.band_points_ + i] =
          c * std::exp(lam * (-f.l_neg_ + i * dx));
  }
  // Horizon limits: lifts must not clip on the right, and the tail mass
  // swept past the left edge must stay below eps^2.
  const double tail_margin =
      f.l_neg_ - std::log(1.0 / eps_frame) / lam_min;
  f.max_horizon_ = std::max(0.0, std::min(f.l_pos_, tail_margin));
  f.dilated_ = SpaceSpec::line(-f.l_neg_, dx, K * f.band_points_);
  return f;
}

HVec DilationFrame::embed(const HVec& x) const {
  require_same_space(base_.space, x.space, "embed");
  Eigen::VectorXd out = Eigen::VectorXd::Zero(dilated_.dim());
  if (base_.kind == ContractionSemigroup::Kind::shift) {
    for (int i = 0; i < x.dim(); ++i) out[zero_idx_ + i] = x.data[i];
  } else {
    for (int k = 0; k < bands_; ++k)
      out.segment(k * band_points_, band_points_) =
          x.data[k] * weights_.segment(k * band_points_, band_points_);
  }
  return HVec(dilated_, std::move(out));
}

HVec DilationFrame::project(const HVec& h) const {
  return project_at(0.0, h);
}

HVec DilationFrame::group_shift(double t, const HVec& h) const {
  require_same_space(dilated_, h.space, "group_shift");
  const int c = cells(t);
  Eigen::VectorXd out = Eigen::VectorXd::Zero(dilated_.dim());
  for (int k = 0; k < bands_; ++k) {
    const int base = k * band_points_;
    const int lo = std::max(0, -c);
    const int hi = std::min(band_points_, band_points_ - c);
    for (int j = lo; j < hi; ++j) out[base + j] = h.data[base + j + c];
  }
  return HVec(dilated_, std::move(out));
}

HVec DilationFrame::project_at(double t, const HVec& h) const {
  require_same_space(dilated_, h.space, "project_at");
  const int c = cells(t);
  if (base_.kind == ContractionSemigroup::Kind::shift) {
    Eigen::VectorXd out = Eigen::VectorXd::Zero(base_.space.dim());
    for (int i = 0; i < base_.space.dim(); ++i) {
      const int j = zero_idx_ + i + c;
      if (j >= 0 && j < band_points_) out[i] = h.data[j];
    }
    return HVec(base_.space, std::move(out));
  }
  Eigen::VectorXd out(bands_);
  for (int k = 0; k < bands_; ++k) {
    const int base = k * band_points_;
    double acc = 0.0;
    const int lo = std::max(0, -c);
    const int hi = std::min(zero_idx_, band_points_ - 1 - c);
    for (int i = lo; i <= hi; ++i)
      acc += weights_[base + i] * h.data[base + i + c];
    out[k] = dx_ * acc;
  }
  return HVec(base_.space, std::move(out));
}

HVec DilationFrame::adjoint_lift(double t, const HVec& x) const {
  require_same_space(base_.space, x.space, "adjoint_lift");
  const int c = cells(t);
  Eigen::VectorXd out = Eigen::VectorXd::Zero(dilated_.dim());
  if (base_.kind == ContractionSemigroup::Kind::shift) {
    for (int i = 0; i < x.dim(); ++i) {
      const int j = zero_idx_ + i + c;
      if (j >= 0 && j < band_points_) out[j] = x.data[i];
    }
    return HVec(dilated_, std::move(out));
  }
  for (int k = 0; k < bands_; ++k) {
    const int base = k * band_points_;
    const int lo = std::max(0, c);
    const int hi = std::min(band_points_ - 1, zero_idx_ + c);
    for (int j = lo; j <= hi; ++j)
      out[base + j] = weights_[base + j - c] * x.data[k];
  }
  return HVec(dilated_, std::move(out));
}

FrameReport verify_frame(const DilationFrame& frame,
                         const std::vector<double>& t_samples,
                         const std::vector<HVec>& x_samples, std::uint64_t seed,
                         int n_h) {
  FrameReport rep;
  rep.eps_frame = frame.eps_frame();
  rep.n_t = static_cast<int>(t_samples.size());
  rep.n_x = static_cast<int>(x_samples.size());
  rep.n_h = n_h;

  int max_cells = 0;
  for (double t : t_samples) {
    if (t < 0.0) throw ConfigError("verify_frame times must be nonnegative");
    max_cells = std::max(max_cells, std::abs(frame.cells(t)));
  }

  // Support margin keeps every sampled vector clear of the window edges under
  // any single or composed shift, so the group laws are exact index moves.
  const int margin = 2 * max_cells + 1;
  const int bp = frame.band_points();
  if (2 * margin >= bp)
    throw ConfigError(
        "window too small to sample interior vectors: need more than " +
        std::to_string(2 * margin) + " points per band, have " +
        std::to_string(bp));

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  std::vector<HVec> hs;
  hs.reserve(n_h);
  for (int r = 0; r < n_h; ++r) {
    Eigen::VectorXd d = Eigen::VectorXd::Zero(frame.dilated_space().dim());
    for (int k = 0; k < frame.bands(); ++k)
      for (int i = margin; i < bp - margin; ++i)
        d[k * bp + i] = unif(rng);
    hs.emplace_back(frame.dilated_space(), std::move(d));
  }

  for (const HVec& x : x_samples) {
    rep.embed_isometry_defect = std::max(
        rep.embed_isometry_defect, std::abs(norm(frame.embed(x)) - norm(x)));
    for (double t : t_samples) {
      const HVec lhs = frame.project_at(t, frame.embed(x));
      const HVec rhs = apply_semigroup(frame.base(), t, x);
      rep.diagram_defect = std::max(rep.diagram_defect, norm(sub(lhs, rhs)));
    }
  }

  for (const HVec& h : hs) {
    const double nh = norm(h);
    for (double t : t_samples) {
      for (double sgn : {1.0, -1.0}) {
        const HVec ut = frame.group_shift(sgn * t, h);
        rep.group_isometry_defect =
            std::max(rep.group_isometry_defect, std::abs(norm(ut) - nh));
      }
      rep.inverse_defect = std::max(
          rep.inverse_defect,
          norm(sub(frame.group_shift(-t, frame.group_shift(t, h)), h)));
      for (double s : t_samples) {
        const HVec two = frame.group_shift(t, frame.group_shift(s, h));
        const HVec one = frame.group_shift(t + s, h);
        rep.group_law_defect =
            std::max(rep.group_law_defect, norm(sub(two, one)));
      }
    }
  }

  rep.pass = rep.diagram_defect <= rep.eps_frame &&
             rep.embed_isometry_defect <= rep.eps_frame &&
             rep.group_isometry_defect <= rep.eps_frame &&
             rep.group_law_defect <= rep.eps_frame &&
             rep.inverse_defect <= rep.eps_frame;
  return rep;
}

nlohmann::json FrameReport::to_json() const {
  return nlohmann::json{{"diagram_defect", diagram_defect},
                        {"embed_isometry_defect", embed_isometry_defect},
                        {"group_isometry_defect", group_isometry_defect},
                        {"group_law_defect", group_law_defect},
                        {"inverse_defect", inverse_defect},
                        {"eps_frame", eps_frame},
                        {"n_t", n_t},
                        {"n_x", n_x},
                        {"n_h", n_h},
                        {"pass", pass}};
}

}  // namespace spde
