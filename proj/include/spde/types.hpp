#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace spde {

inline constexpr const char* kToolVersion = "0.1.0";

// Combining values that live on different discretizations.
struct SpaceMismatch : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// A time that is not a whole number of grid cells (translations and the
// shift semigroup only move by whole cells).
struct AlignmentError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Invalid configuration. Carries every violated constraint, not just the
// first one found.
struct ConfigError : std::runtime_error {
  std::vector<std::string> issues;

  explicit ConfigError(const std::string& msg)
      : std::runtime_error(msg), issues{msg} {}
  explicit ConfigError(std::vector<std::string> all)
      : std::runtime_error(join(all)), issues(std::move(all)) {}

 private:
  static std::string join(const std::vector<std::string>& all) {
    std::string out = "configuration invalid:";
    for (const auto& s : all) out += "\n  - " + s;
    return out;
  }
};

// Non-finite state produced during integration; carries the offending step
// and path so aborted paths can be tallied.
struct OverflowError : std::runtime_error {
  int step;
  std::uint64_t path_index;

  OverflowError(int step_, std::uint64_t path)
      : std::runtime_error("non-finite state at step " + std::to_string(step_) +
                           ", path " + std::to_string(path)),
        step(step_),
        path_index(path) {}
};

}  // namespace spde
