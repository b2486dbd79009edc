#pragma once

#include <stdexcept>
#include <string>

namespace dgap {

/// Bad input: malformed scenario, infeasible profile, out-of-range parameter.
struct ValidationError : std::runtime_error {
  explicit ValidationError(const std::string& what) : std::runtime_error(what) {}
};

/// A configured enumeration/size limit would be exceeded. Limits are never
/// downgraded to silent truncation.
struct CapacityError : std::runtime_error {
  explicit CapacityError(const std::string& what) : std::runtime_error(what) {}
};

/// Filesystem or serialization failure; the message carries the path.
struct IoError : std::runtime_error {
  explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace dgap
