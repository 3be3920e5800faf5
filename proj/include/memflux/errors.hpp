#ifndef MEMFLUX_ERRORS_HPP
#define MEMFLUX_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace memflux {

/// Raised when a scenario/config input is invalid. Message names the
/// offending key or field. Maps to CLI exit code 1.
class ConfigError : public std::runtime_error {
public:
  explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Raised when an iterative solve fails to converge or a discrete
/// problem is found to be degenerate. Maps to CLI exit code 2.
class SolverError : public std::runtime_error {
public:
  explicit SolverError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Raised on file-system failures (unwritable path, missing file).
/// Maps to CLI exit code 3.
class IoError : public std::runtime_error {
public:
  explicit IoError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace memflux

#endif
