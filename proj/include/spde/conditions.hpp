#pragma once

#include <string>
#include <vector>

#include "json.hpp"
#include "spde/coefficients.hpp"

namespace spde {

// Condition names reported by the prober.
inline constexpr const char* kHemicontinuity = "hemicontinuity";
inline constexpr const char* kLocalMonotonicity = "local-monotonicity";
inline constexpr const char* kCoercivity = "coercivity";
inline constexpr const char* kGrowth = "growth";
inline constexpr const char* kSigmaBound = "sigma-bound";
inline constexpr const char* kTauBound = "tau-bound";

struct ProbeSettings {
  int n_samples = 1000;
  std::vector<double> t_samples = {0.0};
  std::vector<double> radius_tiers = {0.1, 1.0, 10.0};
  double hemicont_tol = 1e-6;  // jump threshold relative to 1 + max |g|
  double slack = 0.0;          // allowed positive margin (frame round-off)
  std::uint64_t seed = 1;
  int workers = 1;
};

// Sampled point at which a condition margin was largest. Only the fields a
// condition uses are populated.
struct ConditionWitness {
  double t = 0.0;
  Eigen::VectorXd x, y, z;
  double lambda = 0.0;  // hemicontinuity probe offset
  double r = 0.0;       // tau bound radius
  nlohmann::json to_json() const;
};

struct ConditionEntry {
  std::string name;
  bool pass = false;
  double worst_margin = 0.0;  // max over samples of LHS - RHS; <= slack passes
  ConditionWitness witness;
};

struct ConditionReport {
  std::vector<ConditionEntry> entries;
  int n_samples = 0;
  std::uint64_t seed = 0;
  double slack = 0.0;
  nlohmann::json extras;

  bool all_pass() const;
  const ConditionEntry& entry(const std::string& name) const;
  nlohmann::json to_json() const;
};

// Checks the declared monotonicity/coercivity/growth bounds of a model
// against sampled states: componentwise Gaussians rescaled to the radius
// tiers plus deterministic witnesses (origin, coordinate vectors and their
// doubles). Margins are LHS - RHS, so anything positive beyond `slack` is a
// violation; the worst witness is recorded for independent re-evaluation.
ConditionReport probe_conditions(const CoefficientModel& model,
                                 const ProbeSettings& settings);

// The identical battery applied to the transformed pair (a, b) on the
// dilated space, with the same declared constants.
ConditionReport probe_transferred_conditions(const DilatedCoefficients& dc,
                                             const ProbeSettings& settings);

// Recomputes a condition margin at a recorded witness. Used to confirm that
// reported failures reproduce away from the prober's own loop.
double reevaluate_margin(const CoefficientModel& model,
                         const std::string& condition,
                         const ConditionWitness& w,
                         double hemicont_tol = 1e-6);
double reevaluate_margin(const DilatedCoefficients& dc,
                         const std::string& condition,
                         const ConditionWitness& w,
                         double hemicont_tol = 1e-6);

}  // namespace spde
