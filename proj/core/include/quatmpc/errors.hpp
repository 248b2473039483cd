#pragma once

#include <stdexcept>
#include <string>

namespace quatmpc {

// Inverse Cayley chart evaluated too close to a 180-degree rotation.
class NearSingularChart : public std::runtime_error {
 public:
  explicit NearSingularChart(const std::string& what) : std::runtime_error(what) {}
};

// Control / contact arity disagrees with the robot model.
class DimensionMismatch : public std::runtime_error {
 public:
  explicit DimensionMismatch(const std::string& what) : std::runtime_error(what) {}
};

// Linearization requested about a (x_k, u_k, x_{k+1}) triple that is not a
// rollout of the discrete dynamics.
class ReferenceInconsistent : public std::runtime_error {
 public:
  explicit ReferenceInconsistent(const std::string& what) : std::runtime_error(what) {}
};

// ZYX Euler kinematic map evaluated at (or numerically at) gimbal lock.
class KinematicSingularity : public std::runtime_error {
 public:
  explicit KinematicSingularity(const std::string& what) : std::runtime_error(what) {}
};

// Scenario / model configuration file could not be parsed or validated.
// Message carries the offending field.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace quatmpc
