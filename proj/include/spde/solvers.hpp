#pragma once

#include <string>
#include <vector>

#include "spde/coefficients.hpp"
#include "spde/noise.hpp"

namespace spde {

struct Provenance {
  std::string model_id;
  std::string frame_id;  // empty for direct runs
  std::string scheme;    // "euler", "exp-euler", "lift"
  std::uint64_t seed = 0;
  std::uint64_t path_index = 0;
};

// One trajectory on the full time grid of a plan. X holds base-space mild
// states, Y dilated states; either may be absent. Entries before `start` are
// default-constructed and not meaningful.
struct SamplePath {
  std::vector<double> times;
  std::vector<HVec> X;
  std::vector<HVec> Y;
  int start = 0;
  // Discrete integral sum (||drift|| + ||vol||_HS^2) dt over the run.
  double integrability = 0.0;
  Provenance prov;
};

// Euler-Maruyama on whatever space the system lives on:
//   V_{n+1} = V_n + drift(t_n, V_n) dt + vol(t_n, V_n) dW_n.
// Throws OverflowError with the step index as soon as a state goes
// non-finite. `stop` < 0 integrates to the end of the plan.
SamplePath solve_sde_euler(const SdeSystem& sys, const HVec& eta,
                           const NoisePlan& plan, std::uint64_t path_index,
                           int start = 0, int stop = -1);
SamplePath solve_sde_euler_with(const SdeSystem& sys, const HVec& eta,
                                const NoisePlan& plan,
                                const Eigen::MatrixXd& dw, int start = 0,
                                int stop = -1, Provenance prov = {});

// Exponential-Euler mild scheme driven directly by the semigroup:
//   X_{n+1} = S_dt (X_n + alpha(t_n, X_n) dt + sigma(t_n, X_n) dW_n).
SamplePath solve_mild_direct(const ContractionSemigroup& S,
                             const CoefficientModel& m, const HVec& xi,
                             const NoisePlan& plan, std::uint64_t path_index,
                             int start = 0, int stop = -1);
SamplePath solve_mild_direct_with(const ContractionSemigroup& S,
                                  const CoefficientModel& m, const HVec& xi,
                                  const NoisePlan& plan,
                                  const Eigen::MatrixXd& dw, int start = 0,
                                  int stop = -1, Provenance prov = {});

// Fills path.X with pi U_{t_n} Y_n.
void project_mild(const DilationFrame& frame, SamplePath& path);

// Rebuilds the dilated trajectory from a mild one by accumulating lifted
// increments:
//   Y_{n+1} = Y_n + U_{t_n}* l (alpha(t_n, X_n) dt + sigma(t_n, X_n) dW_n),
// started from U_{t_start}* l xi. With the same increments this reproduces
// the Euler trajectory of the transformed system.
SamplePath lift_mild(const DilationFrame& frame, const CoefficientModel& m,
                     const HVec& xi, const SamplePath& xpath,
                     const Eigen::MatrixXd& dw);
SamplePath lift_mild(const DilationFrame& frame, const CoefficientModel& m,
                     const HVec& xi, const SamplePath& xpath,
                     const NoisePlan& plan, std::uint64_t path_index);

}  // namespace spde
