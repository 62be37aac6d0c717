#pragma once

#include <cstdint>
#include <vector>

#include "json.hpp"
#include "spde/semigroup.hpp"

namespace spde {

// Window [-l_neg, l_pos] on which the dilated space lives. Both ends are
// snapped outward to whole cells.
struct Window {
  double l_neg = 0.0;
  double l_pos = 0.0;
};

struct FrameReport {
  double diagram_defect = 0.0;         // max |pi U_t l x - S_t x|
  double embed_isometry_defect = 0.0;  // max | ||l x|| - ||x|| |
  double group_isometry_defect = 0.0;  // max | ||U_t h|| - ||h|| |
  double group_law_defect = 0.0;       // max ||U_t U_s h - U_{t+s} h||
  double inverse_defect = 0.0;         // max ||U_{-t} U_t h - h||
  double eps_frame = 0.0;
  int n_t = 0, n_x = 0, n_h = 0;
  bool pass = false;

  nlohmann::json to_json() const;
};

// Unitary dilation of a contraction semigroup: a larger space carrying a
// translation group (U_t), an isometric embedding l of the base space and its
// adjoint pi = l*, with pi U_t l = S_t.
//
// Both concrete semigroup kinds dilate into translations on a windowed grid:
//
//   shift     the halfline grid extends to a full-line grid; l is extension
//             by zero to the left, pi is restriction. Everything is exact
//             index arithmetic.
//
//   diagonal  one grid band per mode. Mode k embeds as the density
//             x_k * c_k * exp(lambda_k s) on s <= 0, with c_k normalizing
//             the *discrete* sum, so l is exactly isometric and pi = l*
//             exactly; pi U_t l then reproduces exp(-lambda_k t) up to the
//             tail mass the window cuts off, which is what eps_frame bounds.
//
// Translations move whole cells only, so every time entering frame operations
// must be an integer multiple of dx.
class DilationFrame {
 public:
  static DilationFrame dilate(const ContractionSemigroup& S, Window w,
                              double dx, double eps_frame);
  // Window large enough for U_t* lifts up to `horizon` and, for diagonal
  // semigroups, for the embedding tail to stay below eps_frame^2 after any
  // shift during [0, horizon].
  static Window default_window(const ContractionSemigroup& S, double horizon,
                               double dx, double eps_frame);

  const ContractionSemigroup& base() const { return base_; }
  const SpaceSpec& base_space() const { return base_.space; }
  const SpaceSpec& dilated_space() const { return dilated_; }
  double dx() const { return dx_; }
  double eps_frame() const { return eps_; }
  int bands() const { return bands_; }
  int band_points() const { return band_points_; }
  double l_neg() const { return l_neg_; }
  double l_pos() const { return l_pos_; }
  // Largest t such that U_t* l lifts stay inside the window (and, for the
  // diagonal kind, clipped tail mass stays below eps_frame^2).
  double max_horizon() const { return max_horizon_; }

  int cells(double t) const { return aligned_cells(t, dx_); }

  HVec embed(const HVec& x) const;                    // l
  HVec project(const HVec& h) const;                  // pi = l*
  HVec group_shift(double t, const HVec& h) const;    // U_t, either sign
  HVec project_at(double t, const HVec& h) const;     // pi U_t h, fused
  HVec adjoint_lift(double t, const HVec& x) const;   // U_t* l x, fused

 private:
  ContractionSemigroup base_;
  SpaceSpec dilated_;
  double dx_ = 0.0, eps_ = 0.0;
  double l_neg_ = 0.0, l_pos_ = 0.0;
  int bands_ = 1;
  int band_points_ = 0;
  int zero_idx_ = 0;  // band index of position s = 0
  double max_horizon_ = 0.0;
  Eigen::VectorXd weights_;  // diagonal: flattened band profiles, zero past s=0
};

// Exercises the frame laws on the given base vectors and aligned times plus
// n_h randomly supported dilated-space vectors (kept clear of the window
// edges so translation never clips them).
FrameReport verify_frame(const DilationFrame& frame,
                         const std::vector<double>& t_samples,
                         const std::vector<HVec>& x_samples, std::uint64_t seed,
                         int n_h = 20);

}  // namespace spde
