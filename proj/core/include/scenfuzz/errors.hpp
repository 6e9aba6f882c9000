#pragma once

#include <stdexcept>
#include <string>

namespace scenfuzz {

/// Malformed search-space description or campaign configuration.
struct SchemaError : std::runtime_error {
  explicit SchemaError(const std::string& what) : std::runtime_error(what) {}
};

/// Rejection sampling exhausted max_attempts without satisfying the joint
/// linear constraints.
struct ConstraintUnsatisfiableError : std::runtime_error {
  explicit ConstraintUnsatisfiableError(const std::string& what) : std::runtime_error(what) {}
};

/// Filesystem-level failure (missing run directory, corrupt log line, ...).
struct IoError : std::runtime_error {
  explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace scenfuzz
