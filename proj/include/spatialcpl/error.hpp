#pragma once

#include <stdexcept>
#include <string>

namespace spatialcpl {

// Category of failure; maps onto CLI exit codes.
enum class ErrorKind {
  Argument,      // bad caller input (exit 2)
  Index,         // out-of-range index (exit 2)
  Domain,        // coordinate outside valid range (exit 2)
  Format,        // malformed file (exit 3)
  Data,          // well-formed file with invalid values (exit 3)
  Reference,     // dangling id (exit 3)
  Capacity,      // would not fit in memory (exit 3)
  Degeneracy,    // regression cannot be identified (exit 4)
  Connectivity,  // unreachable cities (exit 4)
  Snapping,      // city too far from the road network (exit 4)
  Geometry,      // infeasible synthetic layout (exit 4)
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

inline int exit_code_for(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Argument:
    case ErrorKind::Index:
    case ErrorKind::Domain:
      return 2;
    case ErrorKind::Format:
    case ErrorKind::Data:
    case ErrorKind::Reference:
    case ErrorKind::Capacity:
      return 3;
    case ErrorKind::Degeneracy:
    case ErrorKind::Connectivity:
    case ErrorKind::Snapping:
    case ErrorKind::Geometry:
      return 4;
  }
  return 1;
}

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) { throw Error(kind, what); }

}  // namespace spatialcpl
