#pragma once

#include <stdexcept>
#include <string>

namespace refract {

struct DomainError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct SingularMatrixError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct RankOneDegeneracyError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct NoIntersectionError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct VisibilityError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct TotalInternalReflectionError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct CapError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ConvergenceError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace refract
