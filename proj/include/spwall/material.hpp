#pragma once

// Material point drivers for plane strain: linear elasticity, the
// Mohr-Coulomb yield criterion and its principal-space return mapping with
// multi-surface (edge and apex) handling, and the algorithmically
// consistent tangent of the stress-update map.
//
// Stress state is carried as (sigma_xx, sigma_yy, sigma_zz, tau_xy) with
// tension positive. Plane strain keeps eps_zz = 0 while sigma_zz evolves
// and participates in the principal-stress evaluation: out-of-plane
// yielding is possible and handled.

#include <Eigen/Dense>
#include <array>
#include <cmath>

#include "spwall/common.hpp"

namespace spwall {

struct ElasticParams {
  double E = 0.0;    // kPa
  double nu = 0.0;
  double rho = 0.0;  // Mg/m^3

  void validate() const {
    if (!(E > 0.0)) throw ConfigError("Young's modulus must be positive");
    if (!(nu >= 0.0 && nu < 0.5))
      throw ConfigError("Poisson's ratio must lie in [0, 0.5)");
    if (!(rho > 0.0)) throw ConfigError("density must be positive");
  }
  double shear_modulus() const { return 0.5 * E / (1.0 + nu); }
  double lame_lambda() const {
    return E * nu / ((1.0 + nu) * (1.0 - 2.0 * nu));
  }
};

// In-plane tangent acting on (eps_xx, eps_yy, gamma_xy); sigma_zz is slaved
// through the plane-strain condition.
inline Eigen::Matrix3d elastic_tangent(const ElasticParams& ep) {
  ep.validate();
  const double lam = ep.lame_lambda(), G = ep.shear_modulus();
  Eigen::Matrix3d D;
  D << lam + 2.0 * G, lam, 0.0, lam, lam + 2.0 * G, 0.0, 0.0, 0.0, G;
  return D;
}

// Full stress response (xx, yy, zz, xy) to an in-plane strain increment.
inline Eigen::Matrix<double, 4, 3> elastic_tangent_full(
    const ElasticParams& ep) {
  ep.validate();
  const double lam = ep.lame_lambda(), G = ep.shear_modulus();
  Eigen::Matrix<double, 4, 3> D;
  D << lam + 2.0 * G, lam, 0.0,  //
      lam, lam + 2.0 * G, 0.0,   //
      lam, lam, 0.0,             //
      0.0, 0.0, G;
  return D;
}

struct MohrCoulombParams {
  double phi = 0.0;         // friction angle, radians
  double cohesion_c = 0.0;  // kPa
  double psi = 0.0;         // dilation angle, radians
  double tension_cap = -1.0;  // kPa mean tension; <0 means c*cot(phi)

  void validate() const {
    if (!(phi > 0.0 && phi < kPi / 2.0))
      throw ConfigError("friction angle must lie in (0, pi/2)");
    if (cohesion_c < 0.0) throw ConfigError("cohesion must be >= 0");
    if (!(psi >= 0.0 && psi <= phi))
      throw ConfigError("dilation angle must lie in [0, phi]");
  }
  double apex_stress() const { return cohesion_c / std::tan(phi); }
  double effective_tension_cap() const {
    return tension_cap < 0.0 ? apex_stress() : tension_cap;
  }
};

struct GaussState {
  Eigen::Vector4d stress = Eigen::Vector4d::Zero();
  Eigen::Vector4d strain = Eigen::Vector4d::Zero();  // gamma_xy engineering
  Eigen::Vector4d plastic_strain = Eigen::Vector4d::Zero();
  bool yielded = false;
};

namespace detail {

// Spectral data of a plane-strain stress tensor: the out-of-plane axis is
// always a principal direction, the in-plane pair is described by the
// double angle of the major in-plane direction.
struct Spectral {
  Eigen::Vector3d sorted;     // principal values, descending
  std::array<int, 3> src;     // src[k]: 0 = in-plane major, 1 = in-plane
                              // minor, 2 = out-of-plane
  double c2t = 1.0, s2t = 0.0;  // cos/sin of twice the major-axis angle
  double ip_split = 0.0;        // trial in-plane value gap (>= 0)
};

inline Spectral decompose(const Eigen::Vector4d& s) {
  Spectral r;
  const double m = 0.5 * (s(0) + s(1));
  const double d = 0.5 * (s(0) - s(1));
  const double R = std::hypot(d, s(3));
  if (R > 1e-14 * (std::abs(m) + 1.0)) {
    r.c2t = d / R;
    r.s2t = s(3) / R;
  }
  const double ip1 = m + R, ip2 = m - R;
  r.ip_split = ip1 - ip2;
  std::array<std::pair<double, int>, 3> v = {
      std::make_pair(ip1, 0), std::make_pair(ip2, 1), std::make_pair(s(2), 2)};
  std::stable_sort(v.begin(), v.end(),
                   [](const auto& a, const auto& b) { return a.first > b.first; });
  for (int k = 0; k < 3; ++k) {
    r.sorted(k) = v[k].first;
    r.src[k] = v[k].second;
  }
  return r;
}

// Rebuild a (xx, yy, zz, xy) tensor from values attached to the spectral
// labels of `sp`. `by_label` is indexed 0 = in-plane major, 1 = in-plane
// minor, 2 = out-of-plane. `shear_scale` is 1 for stress-like tensors and
// 2 for strain-like tensors with engineering shear.
inline Eigen::Vector4d recompose(const Spectral& sp,
                                 const Eigen::Vector3d& by_label,
                                 double shear_scale = 1.0) {
  const double m = 0.5 * (by_label(0) + by_label(1));
  const double R = 0.5 * (by_label(0) - by_label(1));
  Eigen::Vector4d out;
  out(0) = m + R * sp.c2t;
  out(1) = m - R * sp.c2t;
  out(2) = by_label(2);
  out(3) = shear_scale * R * sp.s2t;
  return out;
}

inline Eigen::Vector3d sorted_to_label(const Spectral& sp,
                                       const Eigen::Vector3d& sorted_vals) {
  Eigen::Vector3d lab;
  for (int k = 0; k < 3; ++k) lab(sp.src[k]) = sorted_vals(k);
  return lab;
}

}  // namespace detail

// Mohr-Coulomb yield value on the full principal set (tension positive,
// sigma_1 >= sigma_3): f = (s1 - s3)/2 + (s1 + s3)/2 sin(phi) - c cos(phi).
inline double mc_yield(const Eigen::Vector4d& stress,
                       const MohrCoulombParams& mp) {
  const auto sp = detail::decompose(stress);
  const double s1 = sp.sorted(0), s3 = sp.sorted(2);
  return 0.5 * (s1 - s3) + 0.5 * (s1 + s3) * std::sin(mp.phi) -
         mp.cohesion_c * std::cos(mp.phi);
}

struct PointUpdate {
  GaussState state;
  Eigen::Matrix<double, 4, 3> tangent_full;  // d sigma / d eps increment

  Eigen::Matrix3d tangent_in_plane() const {
    Eigen::Matrix3d D;
    D.row(0) = tangent_full.row(0);
    D.row(1) = tangent_full.row(1);
    D.row(2) = tangent_full.row(3);
    return D;
  }
};

namespace detail {

// dsigma/dsigma_trial (4x4 Voigt, order xx, yy, zz, xy) assembled from the
// principal-space Jacobian of the active return region plus the spectral
// rotation term for the in-plane shear component.
inline Eigen::Matrix4d spectral_stress_derivative(
    const Spectral& sp, const Eigen::Matrix3d& J_sorted,
    const Eigen::Vector3d& returned_by_label) {
  // Permute the sorted-space Jacobian to label slots.
  Eigen::Matrix3d P = Eigen::Matrix3d::Zero();
  for (int k = 0; k < 3; ++k) P(k, sp.src[k]) = 1.0;
  const Eigen::Matrix3d J = P.transpose() * J_sorted * P;

  // Tangent in the principal frame; component order (xx', yy', zz, x'y').
  Eigen::Matrix4d T = Eigen::Matrix4d::Zero();
  T.block<3, 3>(0, 0) = J;
  const double split = sp.ip_split;
  if (split > 1e-8 * (std::abs(sp.sorted(0)) + std::abs(sp.sorted(2)) + 1.0)) {
    T(3, 3) = (returned_by_label(0) - returned_by_label(1)) / split;
  } else {
    T(3, 3) = 0.5 * (J(0, 0) - J(0, 1) - J(1, 0) + J(1, 1));
  }

  // Voigt rotation between the xy frame and the principal frame, built
  // from the double angle. Q maps xy -> principal, Qi its inverse.
  const double c2 = sp.c2t, s2 = sp.s2t;
  const double cc = 0.5 * (1.0 + c2), ss = 0.5 * (1.0 - c2), cs = 0.5 * s2;
  Eigen::Matrix4d Q, Qi;
  Q << cc, ss, 0, 2 * cs,  //
      ss, cc, 0, -2 * cs,  //
      0, 0, 1, 0,          //
      -cs, cs, 0, c2;
  Qi << cc, ss, 0, -2 * cs,  //
      ss, cc, 0, 2 * cs,     //
      0, 0, 1, 0,            //
      cs, -cs, 0, c2;
  return Qi * T * Q;
}

}  // namespace detail

// Elastic predictor / plastic corrector for one integration point. The
// caller builds the trial stress; total strain bookkeeping happens in
// update_point below.
inline PointUpdate mc_return_map(const Eigen::Vector4d& trial_stress,
                                 const GaussState& prev,
                                 const MohrCoulombParams& mp,
                                 const ElasticParams& ep) {
  const Eigen::Matrix<double, 4, 3> De = elastic_tangent_full(ep);
  PointUpdate out;
  out.state = prev;

  const double sphi = std::sin(mp.phi), spsi = std::sin(mp.psi);
  const double coh = mp.cohesion_c * std::cos(mp.phi);

  auto sp = detail::decompose(trial_stress);
  const double ref = std::max({1.0, std::abs(sp.sorted(0)),
                               std::abs(sp.sorted(2))});

  // Optional hydrostatic cap tighter than the yield apex.
  Eigen::Vector4d trial = trial_stress;
  Eigen::Vector4d cap_plastic = Eigen::Vector4d::Zero();
  const double cap = mp.effective_tension_cap();
  if (cap < mp.apex_stress() - 1e-12) {
    const double p_mean = (trial(0) + trial(1) + trial(2)) / 3.0;
    if (p_mean > cap) {
      const double K_bulk = ep.lame_lambda() + 2.0 / 3.0 * ep.shear_modulus();
      const double dvol = (p_mean - cap) / K_bulk;
      for (int i = 0; i < 3; ++i) {
        trial(i) -= (p_mean - cap);
        cap_plastic(i) = dvol / 3.0;
      }
      sp = detail::decompose(trial);
      out.state.yielded = true;
    }
  }

  const double f_trial =
      0.5 * (sp.sorted(0) - sp.sorted(2)) +
      0.5 * (sp.sorted(0) + sp.sorted(2)) * sphi - coh;

  if (f_trial <= 1e-12 * ref) {
    if (cap_plastic.isZero()) {
      out.state.stress = trial_stress;  // elastic step, bit-identical
      out.tangent_full = De;
      return out;
    }
    // Cap clipped the trial but Mohr-Coulomb stays inactive: the update is
    // the hydrostatic projection of the elastic predictor.
    out.state.stress = trial;
    out.state.plastic_strain += cap_plastic;
    Eigen::Matrix4d proj = Eigen::Matrix4d::Identity();
    const Eigen::Vector4d mvec(1.0, 1.0, 1.0, 0.0);
    proj -= mvec * mvec.transpose() / 3.0;
    out.tangent_full = proj * De;
    return out;
  }

  // Principal-space elastic operator and surface normals (sorted slots).
  const double lam = ep.lame_lambda(), G = ep.shear_modulus();
  Eigen::Matrix3d Dp;
  Dp << lam + 2 * G, lam, lam, lam, lam + 2 * G, lam, lam, lam, lam + 2 * G;
  const double k1f = 0.5 * (1.0 + sphi), k3f = 0.5 * (1.0 - sphi);
  const double k1g = 0.5 * (1.0 + spsi), k3g = 0.5 * (1.0 - spsi);
  const Eigen::Vector3d a13(k1f, 0.0, -k3f), b13(k1g, 0.0, -k3g);
  const Eigen::Vector3d a12(k1f, -k3f, 0.0), b12(k1g, -k3g, 0.0);
  const Eigen::Vector3d a23(0.0, k1f, -k3f), b23(0.0, k1g, -k3g);
  auto fval = [&](const Eigen::Vector3d& a, const Eigen::Vector3d& s) {
    return a.dot(s) - coh;
  };

  const Eigen::Vector3d st = sp.sorted;
  const double apex = mp.apex_stress();
  const double otol = 1e-9 * ref;

  Eigen::Vector3d s_ret;
  Eigen::Vector3d dep_sorted;  // plastic strain increment, sorted slots
  Eigen::Matrix3d J_sorted;
  bool resolved = false;

  if (f_trial > 0.0) {
    // Return to the main plane.
    const double denom = a13.dot(Dp * b13);
    const double dl = f_trial / denom;
    const Eigen::Vector3d s_plane = st - dl * (Dp * b13);
    if (s_plane(0) >= s_plane(1) - otol && s_plane(1) >= s_plane(2) - otol) {
      s_ret = s_plane;
      dep_sorted = dl * b13;
      J_sorted = Eigen::Matrix3d::Identity() -
                 (Dp * b13) * a13.transpose() / denom;
      resolved = true;
    }
    if (!resolved) {
      // Koiter two-surface edge returns.
      struct Edge {
        Eigen::Vector3d a2, b2;
      };
      const Edge edges[2] = {{a23, b23}, {a12, b12}};  // s1=s2 and s2=s3 edges
      for (const auto& e : edges) {
        Eigen::Matrix2d A;
        A << a13.dot(Dp * b13), a13.dot(Dp * e.b2),  //
            e.a2.dot(Dp * b13), e.a2.dot(Dp * e.b2);
        const Eigen::Vector2d rhs(fval(a13, st), fval(e.a2, st));
        const Eigen::Vector2d dls = A.inverse() * rhs;
        if (dls(0) < -1e-14 || dls(1) < -1e-14) continue;
        const Eigen::Vector3d s_edge =
            st - dls(0) * (Dp * b13) - dls(1) * (Dp * e.b2);
        if (s_edge(0) < s_edge(2) - otol) continue;
        if (s_edge.maxCoeff() > apex + std::max(otol, 1e-9 * (1.0 + apex)))
          continue;
        s_ret = s_edge;
        dep_sorted = dls(0) * b13 + dls(1) * e.b2;
        const Eigen::Matrix2d Ai = A.inverse();
        Eigen::Matrix<double, 3, 2> DB;
        DB.col(0) = Dp * b13;
        DB.col(1) = Dp * e.b2;
        Eigen::Matrix<double, 2, 3> AT;
        AT.row(0) = a13.transpose();
        AT.row(1) = e.a2.transpose();
        J_sorted = Eigen::Matrix3d::Identity() - DB * Ai * AT;
        resolved = true;
        break;
      }
    }
  }

  if (!resolved) {
    // Apex return (also catches hydrostatic tension beyond the apex).
    s_ret = Eigen::Vector3d::Constant(apex);
    dep_sorted = Dp.inverse() * (st - s_ret);
    J_sorted = Eigen::Matrix3d::Zero();
  }

  const double f_check = 0.5 * (s_ret.maxCoeff() - s_ret.minCoeff()) +
                         0.5 * (s_ret.maxCoeff() + s_ret.minCoeff()) * sphi -
                         coh;
  if (f_check > 1e-8 * ref)
    throw SolverError("Mohr-Coulomb return mapping failed to close");

  out.state.stress = detail::recompose(sp, detail::sorted_to_label(sp, s_ret));
  out.state.plastic_strain +=
      cap_plastic +
      detail::recompose(sp, detail::sorted_to_label(sp, dep_sorted), 2.0);
  out.state.yielded = true;

  const Eigen::Matrix4d dsds =
      detail::spectral_stress_derivative(sp, J_sorted,
                                         detail::sorted_to_label(sp, s_ret));
  out.tangent_full = dsds * De;
  return out;
}

// Strain-driven update: elastic predictor from the previous committed
// state, then the return map when a Mohr-Coulomb material is present.
inline PointUpdate update_point(const GaussState& prev,
                                const Eigen::Vector3d& deps,
                                const ElasticParams& ep,
                                const MohrCoulombParams* mp = nullptr) {
  const Eigen::Matrix<double, 4, 3> De = elastic_tangent_full(ep);
  const Eigen::Vector4d trial = prev.stress + De * deps;
  PointUpdate out;
  if (mp == nullptr) {
    out.state = prev;
    out.state.stress = trial;
    out.state.yielded = false;
    out.tangent_full = De;
  } else {
    out = mc_return_map(trial, prev, *mp, ep);
  }
  out.state.strain = prev.strain;
  out.state.strain(0) += deps(0);
  out.state.strain(1) += deps(1);
  out.state.strain(3) += deps(2);
  return out;
}

}  // namespace spwall
