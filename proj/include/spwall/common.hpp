#pragma once

// Shared constants, unit conventions and error types.
//
// Unit system used throughout the library:
//   length  m            force        kN
//   stress  kPa          unit weight  kN/m^3
//   mass    Mg (tonne)   density      Mg/m^3   (so kN = Mg * m/s^2)
//   time    s            acceleration m/s^2
//   angles  radians internally; public config surfaces accept degrees
//
// Stress sign convention: tension positive inside the constitutive and FE
// layers; earth pressures reported by the pipeline are compression positive.

#include <cmath>
#include <stdexcept>
#include <string>

namespace spwall {

inline constexpr double kGravity = 9.81;  // m/s^2
inline constexpr double kPi = 3.14159265358979323846;

inline double deg2rad(double deg) { return deg * kPi / 180.0; }
inline double rad2deg(double rad) { return rad * 180.0 / kPi; }

// Invalid user-supplied parameters or configuration.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

// Ground-motion file or synthesis problems.
class MotionError : public std::runtime_error {
 public:
  explicit MotionError(const std::string& what) : std::runtime_error(what) {}
};

// Non-convergence, singular systems, negative Jacobians and friends.
class SolverError : public std::runtime_error {
 public:
  explicit SolverError(const std::string& what) : std::runtime_error(what) {}
};

// Pseudo-static coefficient requested outside the equilibrium-wedge domain.
// Carries the horizontal coefficient at which the breakdown occurs so a
// caller can report the limiting acceleration.
class ValidityDomainError : public std::invalid_argument {
 public:
  ValidityDomainError(const std::string& what, double limit_kh)
      : std::invalid_argument(what), limit_kh_(limit_kh) {}
  double limit_kh() const { return limit_kh_; }

 private:
  double limit_kh_;
};

}  // namespace spwall
