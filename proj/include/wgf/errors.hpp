#pragma once

#include <stdexcept>
#include <string>

namespace wgf {

/// Invalid experiment configuration (CLI exit code 2).
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A numeric precondition broke during a computation: non-positive slope
/// inside a log, colliding biases, a CDF gap below the floor, a failed
/// tridiagonal solve. Runs abort on it (CLI exit code 3).
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace wgf
