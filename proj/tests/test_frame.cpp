#include "doctest.h"

#include <cmath>
#include <vector>

#include "spde/frame.hpp"
#include "test_util.hpp"

using namespace spde;

namespace {

DilationFrame make_shift_frame() {
  const ContractionSemigroup S =
      ContractionSemigroup::shift(SpaceSpec::halfline(0.1, 30));
  const Window w = DilationFrame::default_window(S, 1.0, 0.1, 1e-10);
  return DilationFrame::dilate(S, w, 0.1, 1e-10);
}

DilationFrame make_diagonal_frame() {
  const ContractionSemigroup S =
      ContractionSemigroup::diagonal(Eigen::Vector3d(1.0, 4.0, 9.0));
  const Window w = DilationFrame::default_window(S, 1.0, 0.01, 1e-10);
  return DilationFrame::dilate(S, w, 0.01, 1e-10);
}

}  // namespace

TEST_CASE("shift frame reproduces the semigroup without any rounding") {
  const DilationFrame f = make_shift_frame();
  CHECK(f.max_horizon() >= 1.0 - 1e-12);
  for (std::uint64_t key = 300; key < 305; ++key) {
    const HVec x = testutil::randn_vec(f.base_space(), key);
    for (double t : {0.0, 0.2, 0.5, 1.0}) {
      const HVec via_frame = f.project_at(t, f.embed(x));
      const HVec direct = apply_semigroup(f.base(), t, x);
      CHECK((via_frame.data - direct.data).cwiseAbs().maxCoeff() == 0.0);
    }
  }
}

TEST_CASE("diagonal frame reproduces the semigroup within eps_frame") {
  const DilationFrame f = make_diagonal_frame();
  CHECK(f.bands() == 3);
  CHECK(f.max_horizon() >= 1.0 - 1e-12);
  for (std::uint64_t key = 310; key < 315; ++key) {
    const HVec x = testutil::randn_vec(f.base_space(), key);
    for (double t : {0.0, 0.25, 0.77, 1.0}) {
      const HVec via_frame = f.project_at(t, f.embed(x));
      const HVec direct = apply_semigroup(f.base(), t, x);
      CHECK(norm(sub(via_frame, direct)) <= 1e-10);
    }
  }
}

TEST_CASE("embedding is isometric and projection inverts it") {
  for (const DilationFrame& f : {make_shift_frame(), make_diagonal_frame()}) {
    for (std::uint64_t key = 320; key < 324; ++key) {
      const HVec x = testutil::randn_vec(f.base_space(), key);
      const HVec h = f.embed(x);
      CHECK(std::abs(norm(h) - norm(x)) <= 1e-13 * (1.0 + norm(x)));
      const HVec back = f.project(h);
      CHECK(norm(sub(back, x)) <= 1e-13 * (1.0 + norm(x)));
    }
  }
}

TEST_CASE("shift frame round trips are bitwise exact") {
  const DilationFrame f = make_shift_frame();
  const HVec x = testutil::randn_vec(f.base_space(), 330);
  CHECK((f.project(f.embed(x)).data - x.data).cwiseAbs().maxCoeff() == 0.0);
  CHECK(norm_sq(f.embed(x)) == norm_sq(x));
  // Lift at t, read back at t: the same cells, so again exact.
  for (double t : {0.0, 0.3, 0.8})
    CHECK((f.project_at(t, f.adjoint_lift(t, x)).data - x.data)
              .cwiseAbs()
              .maxCoeff() == 0.0);
}

TEST_CASE("translation group acts by exact index arithmetic on the interior") {
  for (const DilationFrame& f : {make_shift_frame(), make_diagonal_frame()}) {
    // A small bump in the middle of band 0, well clear of both window edges.
    Eigen::VectorXd d = Eigen::VectorXd::Zero(f.dilated_space().dim());
    const int mid = f.band_points() / 2;
    d[mid] = 1.0;
    d[mid + 1] = -0.5;
    d[mid + 2] = 0.25;
    const HVec h(f.dilated_space(), d);

    const double dt = f.dx();
    for (double t : {3.0 * dt, 7.0 * dt}) {
      const HVec ht = f.group_shift(t, h);
      CHECK(norm_sq(ht) == norm_sq(h));
      const HVec back = f.group_shift(-t, ht);
      CHECK((back.data - h.data).cwiseAbs().maxCoeff() == 0.0);
    }
    // Composition: U_s U_t = U_{s+t} on the nose.
    const HVec a = f.group_shift(2.0 * dt, f.group_shift(3.0 * dt, h));
    const HVec b = f.group_shift(5.0 * dt, h);
    CHECK((a.data - b.data).cwiseAbs().maxCoeff() == 0.0);
  }
}

TEST_CASE("adjoint lift agrees with shifting the embedded vector") {
  // U_t* l x computed in one pass must match group_shift(-t, embed(x));
  // U_t* = U_{-t} for a unitary translation group.
  for (const DilationFrame& f : {make_shift_frame(), make_diagonal_frame()}) {
    const HVec x = testutil::randn_vec(f.base_space(), 333);
    for (double t : {0.0, 0.3}) {
      const HVec fused = f.adjoint_lift(t, x);
      const HVec composed = f.group_shift(-t, f.embed(x));
      CHECK((fused.data - composed.data).cwiseAbs().maxCoeff() == 0.0);
    }
  }
}

TEST_CASE("frame verification report passes on healthy frames") {
  const DilationFrame fs = make_shift_frame();
  std::vector<HVec> xs;
  for (std::uint64_t key = 340; key < 346; ++key)
    xs.push_back(testutil::randn_vec(fs.base_space(), key));
  const FrameReport rs = verify_frame(fs, {0.0, 0.2, 0.5, 1.0}, xs, 9);
  CHECK(rs.pass);
  CHECK(rs.diagram_defect == 0.0);
  CHECK(rs.group_law_defect == 0.0);
  CHECK(rs.inverse_defect == 0.0);
  CHECK(rs.embed_isometry_defect == 0.0);

  const DilationFrame fd = make_diagonal_frame();
  std::vector<HVec> xd;
  for (std::uint64_t key = 350; key < 356; ++key)
    xd.push_back(testutil::randn_vec(fd.base_space(), key));
  const FrameReport rd = verify_frame(fd, {0.0, 0.25, 0.5, 1.0}, xd, 9);
  CHECK(rd.pass);
  CHECK(rd.diagram_defect <= 1e-10);
  CHECK(rd.embed_isometry_defect <= 1e-12);
  CHECK(rd.group_law_defect == 0.0);
  CHECK(rd.inverse_defect == 0.0);
}

TEST_CASE("frame construction rejects unusable windows and inputs") {
  const ContractionSemigroup S =
      ContractionSemigroup::shift(SpaceSpec::halfline(0.1, 30));
  // l_pos shorter than the halfline data support.
  CHECK_THROWS_AS(DilationFrame::dilate(S, Window{1.0, 1.0}, 0.1, 1e-10),
                  ConfigError);
  // Frame grid must match the halfline grid.
  CHECK_THROWS_AS(DilationFrame::dilate(S, Window{1.0, 4.0}, 0.05, 1e-10),
                  ConfigError);
  CHECK_THROWS_AS(DilationFrame::dilate(S, Window{1.0, 4.0}, 0.1, 2.0),
                  ConfigError);

  const ContractionSemigroup D =
      ContractionSemigroup::diagonal(Eigen::Vector2d(1.0, 2.0));
  // Tail mass of the slowest mode does not fit a short left window.
  CHECK_THROWS_AS(DilationFrame::dilate(D, Window{0.5, 1.0}, 0.01, 1e-10),
                  ConfigError);
  CHECK_THROWS_AS(DilationFrame::default_window(D, -1.0, 0.01, 1e-10),
                  ConfigError);

  // Misaligned times are refused by every frame operation.
  const DilationFrame f = make_shift_frame();
  const HVec x = HVec::zero(f.base_space());
  const HVec h = HVec::zero(f.dilated_space());
  CHECK_THROWS_AS(f.project_at(0.123, h), AlignmentError);
  CHECK_THROWS_AS(f.adjoint_lift(0.123, x), AlignmentError);
  CHECK_THROWS_AS(f.group_shift(0.123, h), AlignmentError);
}
