#pragma once

#include <string>
#include <vector>

#include "json.hpp"
#include "spde/coefficients.hpp"

namespace spde {

// Builtin coefficient models. Each builder wires alpha/sigma plus structural
// constants that the condition prober can confirm:
//
//   linear-ou     alpha(t,x) = D x + g, D diagonal <= 0, constant sigma.
//   allen-cahn    pointwise alpha(x) = c1 x - c2 x^3 with bounded
//                 norm-dependent volatility sigma0 + kappa rho(||x||) sigma1.
//   shift-hjm     halfline Nemytskii drift with a decaying pull profile and
//                 constant bump volatility.
//   cubic-blowup  alpha(x) = +x^3 with claimed constants that are wrong on
//                 purpose; negative control for the prober.
//
// `space` is the state space the model runs on; allen-cahn accepts any kind,
// shift-hjm requires a halfline grid.
CoefficientModel make_model(const std::string& id, const SpaceSpec& space,
                            const nlohmann::json& params);

std::vector<std::string> model_catalog();

}  // namespace spde
