#pragma once

#include <numbers>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace bandfem {

inline constexpr double pi = std::numbers::pi;

template <int N> using Vec = Eigen::Matrix<double, N, 1>;
template <int N> using Mat = Eigen::Matrix<double, N, N>;

// Invalid user input: bad case name, h too large for the band, malformed
// config file. Mapped to exit code 3 by the CLI.
struct ConfigError : std::runtime_error {
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

// Irrecoverable failure inside the linear solver (indefiniteness breakdown).
// Mapped to exit code 2 by the CLI, like plain non-convergence.
struct SolverError : std::runtime_error {
  explicit SolverError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace bandfem
