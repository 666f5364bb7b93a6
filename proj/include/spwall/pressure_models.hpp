#pragma once

// Closed-form pseudo-static lateral earth pressure models: the seismic
// wedge-equilibrium coefficients for yielding walls (active and passive),
// the rigid-wall elastic increment, resultant application heights, and an
// independent brute-force trial-wedge oracle used to verify the closed
// forms.

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <string>

#include "spwall/common.hpp"

namespace spwall {

// Wall/backfill geometry and strength parameters. Angles in radians.
struct WallSoilParams {
  double phi = 0.0;             // soil friction angle
  double delta = 0.0;           // wall friction angle
  double beta = 0.0;            // wall inclination from vertical
  double ground_slope_i = 0.0;  // backfill slope from horizontal
  double gamma = 0.0;           // unit weight, kN/m^3
  double height_H = 0.0;        // vertical wall height, m

  void validate() const {
    if (!(phi > 0.0 && phi < kPi / 2.0))
      throw ConfigError("friction angle must lie in (0, pi/2)");
    if (std::abs(delta) > phi)
      throw ConfigError("|wall friction| cannot exceed soil friction");
    if (!(gamma > 0.0)) throw ConfigError("unit weight must be positive");
    if (!(height_H > 0.0)) throw ConfigError("wall height must be positive");
  }
};

struct SeismicCoefficients {
  double k_h = 0.0;
  double k_v = 0.0;
};

enum class PressureMode { Active, Passive };

// Seismic inertia angle theta = atan(k_h / (1 - k_v)).
inline double seismic_angle(const SeismicCoefficients& c) {
  if (c.k_v >= 1.0)
    throw ConfigError("vertical coefficient k_v must be < 1");
  return std::atan(c.k_h / (1.0 - c.k_v));
}

namespace detail {
inline void check_cosine(double value, const char* term) {
  if (std::abs(value) < 1e-12)
    throw ConfigError(std::string("degenerate geometry: ") + term +
                      " vanishes");
}
}  // namespace detail

// Seismic earth pressure coefficient for a yielding wall. Active takes the
// upper signs of the classic expression, passive the lower.
inline double mo_coefficient(const WallSoilParams& p,
                             const SeismicCoefficients& c, PressureMode m) {
  p.validate();
  const double theta = seismic_angle(c);
  const double phi = p.phi, delta = p.delta, beta = p.beta,
               slope = p.ground_slope_i;

  const double sgn = (m == PressureMode::Active) ? 1.0 : -1.0;

  // Active: cos^2(phi - beta - theta); passive: cos^2(phi + beta - theta).
  const double num = std::cos(phi - sgn * beta - theta);
  // Active: cos(delta + beta + theta); passive: cos(delta - beta + theta).
  const double cos_dbt = std::cos(delta + sgn * beta + theta);
  const double cos_ib = std::cos(slope - beta);
  detail::check_cosine(std::cos(theta), "cos(theta)");
  detail::check_cosine(std::cos(beta), "cos(beta)");
  detail::check_cosine(cos_dbt, "cos(delta +/- beta + theta)");
  detail::check_cosine(cos_ib, "cos(i - beta)");

  // Active: sin(phi - i - theta); passive: sin(phi + i - theta).
  const double sin_term =
      (m == PressureMode::Active) ? std::sin(phi - slope - theta)
                                  : std::sin(phi + slope - theta);
  if (m == PressureMode::Active && sin_term < 0.0) {
    // No equilibrium wedge once theta + i exceeds phi. Report the breakdown
    // acceleration at which theta + i = phi.
    const double limit_kh = (1.0 - c.k_v) * std::tan(phi - slope);
    throw ValidityDomainError(
        "validity domain exceeded: theta + i > phi (limit k_h = " +
            std::to_string(limit_kh) + ")",
        limit_kh);
  }
  const double radicand =
      std::sin(phi + delta) * sin_term / (cos_dbt * cos_ib);
  if (radicand < 0.0)
    throw ConfigError("square-root argument negative; no wedge solution");

  const double bracket = 1.0 + sgn * std::sqrt(radicand);
  if (std::abs(bracket) < 1e-12)
    throw ConfigError("degenerate passive bracket; coefficient unbounded");

  const double denom = std::cos(theta) * std::cos(beta) * std::cos(beta) *
                       cos_dbt * bracket * bracket;
  const double K = num * num / denom;
  if (!(K > 0.0) || !std::isfinite(K))
    throw ConfigError("coefficient not positive/finite for these parameters");
  return K;
}

// Total pseudo-static thrust P = 1/2 gamma H^2 (1 - k_v) K, kN per metre.
inline double mo_force(const WallSoilParams& p, const SeismicCoefficients& c,
                       PressureMode m) {
  const double K = mo_coefficient(p, c, m);
  return 0.5 * p.gamma * p.height_H * p.height_H * (1.0 - c.k_v) * K;
}

// Rigid-wall elastic dynamic increment: dP = Fp * gamma * H^2 * k_h, with
// the equivalent coefficient increment dK = 2 Fp k_h. The resultant of the
// increment acts at 0.63 H above the base.
struct WoodIncrement {
  double delta_P = 0.0;  // kN/m
  double delta_K = 0.0;
  static constexpr double application_height_factor = 0.63;
};

inline WoodIncrement wood_rigid_increment(const WallSoilParams& p, double k_h,
                                          double pressure_factor = 1.0) {
  p.validate();
  if (k_h < 0.0) throw ConfigError("wood increment requires k_h >= 0");
  WoodIncrement w;
  w.delta_P = pressure_factor * p.gamma * p.height_H * p.height_H * k_h;
  w.delta_K = 2.0 * pressure_factor * k_h;
  return w;
}

// Combined application height of a static component at H/3 and a dynamic
// increment at 0.6 H (Seed-Whitman decomposition).
inline double resultant_height_decomposed(double P_static, double dP_dyn,
                                          double H) {
  if (P_static < 0.0) throw ConfigError("static component must be >= 0");
  const double total = P_static + dP_dyn;
  if (!(total > 0.0)) throw ConfigError("zero total force: height undefined");
  return (P_static * H / 3.0 + dP_dyn * 0.6 * H) / total;
}

namespace detail {

// Thrust coefficient of one trial planar wedge, from force equilibrium of
// the wedge bounded by the wall face, the ground surface and a failure
// plane at angle alpha from horizontal. Returns nothing when the trial
// plane gives no admissible (compressive) solution.
//
// Geometry: wall base at the origin, backfill on +x. The face runs up to
// the crest at (-H tan(beta), H): positive beta means the back face leans
// so the backfill overlies it. The surface rises from the crest at slope i.
// Horizontal inertia k_h * W acts toward the wall (-x) and the vertical
// body force is (1 - k_v) W downward.
inline std::optional<double> wedge_trial_K(const WallSoilParams& p,
                                           const SeismicCoefficients& c,
                                           PressureMode m, double alpha) {
  const double H = p.height_H;
  const double tan_a = std::tan(alpha);
  const double tan_i = std::tan(p.ground_slope_i);
  const double tan_b = std::tan(p.beta);
  if (tan_a <= tan_i + 1e-12) return std::nullopt;  // wedge never closes

  // Failure plane from the base: y = x tan(alpha); surface from the crest:
  // y = H + (x + H tan(beta)) tan(i).
  const double x_top = H * (1.0 + tan_b * tan_i) / (tan_a - tan_i);
  if (x_top <= 0.0) return std::nullopt;
  const double y_top = x_top * tan_a;

  // Signed area of triangle (0,0), crest, (x_top, y_top).
  const double crest_x = -H * tan_b;
  const double area = 0.5 * std::abs(crest_x * y_top - x_top * H);
  if (area <= 0.0) return std::nullopt;
  const double W = p.gamma * area;

  // Positive k_h corresponds to inertia toward the wall (-x) for the
  // active wedge and away from the wall (+x) for the passive wedge: each
  // is the direction that governs its own limit state, and both match the
  // closed form's shared inertia-angle convention.
  const double fr = (m == PressureMode::Active) ? 1.0 : -1.0;
  const double fx = -fr * c.k_h * W;
  const double fy = -(1.0 - c.k_v) * W;

  // Reaction on the failure plane: normal into the wedge plus friction.
  // Active wedges slide down-slope, passive wedges are pushed up-slope.
  const double nx = -std::sin(alpha), ny = std::cos(alpha);
  const double tx = std::cos(alpha), ty = std::sin(alpha);  // up-slope
  const double rx = std::cos(p.phi) * nx + fr * std::sin(p.phi) * tx;
  const double ry = std::cos(p.phi) * ny + fr * std::sin(p.phi) * ty;

  // Wall reaction on the wedge: face normal plus wall friction along the
  // face, again reversed between the two modes.
  const double wx = -std::sin(p.beta), wy = std::cos(p.beta);  // up the face
  const double mx = std::cos(p.beta), my = std::sin(p.beta);
  const double px = std::cos(p.delta) * mx + fr * std::sin(p.delta) * wx;
  const double py = std::cos(p.delta) * my + fr * std::sin(p.delta) * wy;

  // Solve P * p_dir + R * r_dir + F = 0 for the two magnitudes.
  const double det = px * ry - rx * py;
  if (std::abs(det) < 1e-14) return std::nullopt;
  const double P = (-fx * ry + fy * rx) / det;
  const double R = (-px * fy + fx * py) / det;
  if (P <= 0.0 || R <= 0.0) return std::nullopt;

  return 2.0 * P / (p.gamma * H * H * (1.0 - c.k_v));
}

}  // namespace detail

// Brute-force verification oracle: scans the failure-plane angle with a
// uniform grid and refines the best trial by golden-section search. Active
// mode maximizes the wedge thrust coefficient, passive minimizes it.
inline double wedge_oracle_coefficient(const WallSoilParams& p,
                                       const SeismicCoefficients& c,
                                       PressureMode m, int n_angles) {
  p.validate();
  if (n_angles < 1000)
    throw ConfigError("wedge oracle needs at least 1000 trial angles");
  const double theta = seismic_angle(c);
  if (m == PressureMode::Active && p.phi - p.ground_slope_i - theta < 0.0) {
    const double limit_kh =
        (1.0 - c.k_v) * std::tan(p.phi - p.ground_slope_i);
    throw ValidityDomainError(
        "validity domain exceeded: theta + i > phi (limit k_h = " +
            std::to_string(limit_kh) + ")",
        limit_kh);
  }

  const double sense = (m == PressureMode::Active) ? 1.0 : -1.0;
  const double lo = p.ground_slope_i + 1e-4;
  const double hi = kPi / 2.0 - 1e-4;

  double best_alpha = std::numeric_limits<double>::quiet_NaN();
  double best = -std::numeric_limits<double>::infinity();
  for (int k = 0; k <= n_angles; ++k) {
    const double alpha = lo + (hi - lo) * k / n_angles;
    const auto K = detail::wedge_trial_K(p, c, m, alpha);
    if (K && sense * *K > best) {
      best = sense * *K;
      best_alpha = alpha;
    }
  }
  if (!std::isfinite(best_alpha))
    throw ConfigError("no admissible trial wedge found");

  // Golden-section refinement around the best grid sample.
  const double step = (hi - lo) / n_angles;
  double a = std::max(lo, best_alpha - step);
  double b = std::min(hi, best_alpha + step);
  const double gr = (std::sqrt(5.0) - 1.0) / 2.0;
  auto value = [&](double alpha) {
    const auto K = detail::wedge_trial_K(p, c, m, alpha);
    return K ? sense * *K : -std::numeric_limits<double>::infinity();
  };
  double x1 = b - gr * (b - a), x2 = a + gr * (b - a);
  double f1 = value(x1), f2 = value(x2);
  for (int it = 0; it < 200 && (b - a) > 1e-13; ++it) {
    if (f1 < f2) {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + gr * (b - a);
      f2 = value(x2);
    } else {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - gr * (b - a);
      f1 = value(x1);
    }
  }
  const double refined = std::max(f1, f2);
  return sense * std::max(best, refined);
}

// Critical failure-plane angle (from horizontal) of the oracle wedge; used
// by the pipeline to place sliding-wedge probes.
inline double wedge_critical_angle(const WallSoilParams& p,
                                   const SeismicCoefficients& c,
                                   PressureMode m, int n_angles = 2000) {
  p.validate();
  const double sense = (m == PressureMode::Active) ? 1.0 : -1.0;
  const double lo = p.ground_slope_i + 1e-4;
  const double hi = kPi / 2.0 - 1e-4;
  double best_alpha = std::numeric_limits<double>::quiet_NaN();
  double best = -std::numeric_limits<double>::infinity();
  for (int k = 0; k <= n_angles; ++k) {
    const double alpha = lo + (hi - lo) * k / n_angles;
    const auto K = detail::wedge_trial_K(p, c, m, alpha);
    if (K && sense * *K > best) {
      best = sense * *K;
      best_alpha = alpha;
    }
  }
  if (!std::isfinite(best_alpha))
    throw ConfigError("no admissible trial wedge found");
  return best_alpha;
}

}  // namespace spwall
