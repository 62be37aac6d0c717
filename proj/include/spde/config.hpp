#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>

#include "json.hpp"
#include "spde/frame.hpp"
#include "spde/models.hpp"
#include "spde/noise.hpp"

namespace spde {

// 64-bit FNV-1a over the canonical dump of the document. nlohmann objects
// keep keys sorted, so reordering keys in the file does not change the hash.
std::string canonical_hash(const nlohmann::json& doc);

// Parsed and validated experiment description. Parsing collects every
// violated constraint and throws one ConfigError listing all of them.
//
// Document layout (see schema_document() for the full field list):
//
//   {
//     "name": "...", "experiment": "...",
//     "semigroup": {"kind": "diagonal", "lambdas": [..]}
//                | {"kind": "shift", "points": M, "dx": h},
//     "frame":    {"dx": h, "eps_frame": e, "window": {"l_neg":., "l_pos":.}},
//     "model":    {"id": "...", "params": {...}},
//     "noise":    {"dim": m, "dt": h, "steps": N, "T": optional, "seed": s},
//     "initial":  {"kind": "zero" | "basis" | "vector" | "gaussian", ...},
//     "test":     {... experiment specific ...},
//     "output_dir": "out"
//   }
class ExperimentConfig {
 public:
  static ExperimentConfig parse(nlohmann::json doc);
  static ExperimentConfig load(const std::string& path);

  const std::string& name() const { return name_; }
  const std::string& experiment() const { return experiment_; }
  const std::string& output_dir() const { return output_dir_; }
  const std::string& hash() const { return hash_; }
  const nlohmann::json& doc() const { return doc_; }
  const nlohmann::json& test() const { return test_; }

  bool has_frame() const { return doc_.contains("frame"); }
  bool needs_model() const { return experiment_ != "verify-frame"; }

  ContractionSemigroup build_semigroup() const;
  // Window defaults to DilationFrame::default_window over the plan horizon.
  DilationFrame build_frame(const ContractionSemigroup& S) const;
  CoefficientModel build_model(const SpaceSpec& space) const;
  NoisePlan build_plan() const;

  // Deterministic initial value from the given block key ("initial" by
  // default; tests may carry their own, e.g. "xi"/"zeta"). kind "gaussian"
  // is rejected here.
  HVec build_initial(const SpaceSpec& space, const std::string& key) const;
  // Sampler form: deterministic kinds ignore the draw key, "gaussian" draws
  // componentwise N(0, scale^2) from a stream disjoint from the path noise.
  std::function<HVec(std::uint64_t)> build_initial_sampler(
      const SpaceSpec& space, const std::string& key) const;

 private:
  nlohmann::json doc_;
  std::string name_, experiment_, output_dir_, hash_;
  nlohmann::json test_;
};

// The schema published by `print-schema`.
nlohmann::json schema_document();

// Names of the twelve experiment kinds.
const std::vector<std::string>& experiment_kinds();

}  // namespace spde
