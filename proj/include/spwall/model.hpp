#pragma once

// The assembled plane-strain model: mesh + materials + per-Gauss-point
// state + element activity, with global assembly of stiffness, mass and
// internal force, gravity loads, geostatic stress initialization and the
// sparse direct solves.

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <Eigen/SparseLU>
#include <memory>
#include <optional>
#include <vector>

#include "spwall/dof_map.hpp"
#include "spwall/material.hpp"
#include "spwall/mesh.hpp"

namespace spwall {

struct Material {
  ElasticParams elastic;
  std::optional<MohrCoulombParams> mc;  // absent: linear elastic
  double unit_weight = 0.0;             // kN/m^3, echoed in reports
};

struct K0Profile {
  double k0 = 0.36;
  double gamma = 19.6;     // kN/m^3
  double surface_y = 0.0;  // elevation of the level ground surface
};

class Model {
 public:
  Mesh mesh;
  std::vector<Material> materials;
  std::vector<std::uint8_t> active;            // per element
  std::vector<std::array<GaussState, 9>> states;
  std::vector<double> u;                       // committed displacements
  std::vector<Constraint> constraints;
  std::vector<Tie> ties;
  double gravity_gamma = 0.0;  // uniform unit weight for static gravity

  Model() = default;
  Model(Mesh m, std::vector<Material> mats)
      : mesh(std::move(m)), materials(std::move(mats)) {
    active.assign(mesh.elements.size(), 1);
    states.resize(mesh.elements.size());
    u.assign(2 * mesh.nodes.size(), 0.0);
    build_geometry();
  }

  int n_nodes() const { return static_cast<int>(mesh.nodes.size()); }
  int n_elements() const { return static_cast<int>(mesh.elements.size()); }

  const Material& material_of(int e) const {
    return materials[mesh.elements[e].material];
  }

  // Fixed per-element quadrature geometry (small-strain kinematics).
  struct ElementGeom {
    std::array<Eigen::Matrix<double, 3, 16>, 9> B;
    std::array<double, 9> wdetJ;
    std::array<Eigen::Matrix<double, 8, 1>, 9> N;
    std::array<double, 9> gp_y;  // physical y of each integration point
  };
  const std::vector<ElementGeom>& geometry() const { return geom_; }

  void build_geometry() {
    const auto& rule = QuadratureRule::gauss3x3();
    geom_.resize(mesh.elements.size());
    for (int e = 0; e < n_elements(); ++e) {
      const auto coords = mesh.element_coords(e);
      for (int q = 0; q < 9; ++q) {
        const auto& pt = rule.points[q];
        const auto s = shape_q8(pt.xi, pt.eta);
        IsoMap m;
        try {
          m = iso_map(s, coords);
        } catch (const SolverError&) {
          throw SolverError("non-positive Jacobian in element " +
                            std::to_string(e));
        }
        geom_[e].B[q] = b_matrix(m.dN_xy);
        geom_[e].wdetJ[q] = pt.w * m.detJ;
        geom_[e].N[q] = s.N;
        geom_[e].gp_y[q] = s.N.dot(coords.col(1));
      }
    }
  }

  std::vector<std::uint8_t> used_nodes() const {
    std::vector<std::uint8_t> used(mesh.nodes.size(), 0);
    for (int e = 0; e < n_elements(); ++e) {
      if (!active[e]) continue;
      for (int a = 0; a < 8; ++a) used[mesh.elements[e].nodes[a]] = 1;
    }
    return used;
  }

  DofMap dof_map() const {
    return DofMap::build(n_nodes(), used_nodes(), constraints, ties);
  }

  Eigen::Matrix<double, 16, 1> element_dofs(
      int e, const std::vector<double>& full) const {
    Eigen::Matrix<double, 16, 1> v;
    for (int a = 0; a < 8; ++a) {
      v(2 * a) = full[2 * mesh.elements[e].nodes[a]];
      v(2 * a + 1) = full[2 * mesh.elements[e].nodes[a] + 1];
    }
    return v;
  }

  // Average in-plane Cauchy stress of an element's committed state.
  Eigen::Vector4d element_mean_stress(int e) const {
    Eigen::Vector4d s = Eigen::Vector4d::Zero();
    for (int q = 0; q < 9; ++q) s += states[e][q].stress;
    return s / 9.0;
  }

 private:
  std::vector<ElementGeom> geom_;
};

// Trial evaluation of the nonlinear internal force at a displacement
// iterate; carries the per-point updates so the converged iterate can be
// committed without recomputation.
struct EvalCache {
  std::vector<double> f_int;  // full slots
  std::vector<std::array<PointUpdate, 9>> gp;
};

inline EvalCache evaluate_internal(const Model& model,
                                   const std::vector<double>& u_trial) {
  EvalCache cache;
  cache.f_int.assign(2 * model.mesh.nodes.size(), 0.0);
  cache.gp.resize(model.mesh.elements.size());
  for (int e = 0; e < model.n_elements(); ++e) {
    if (!model.active[e]) continue;
    const auto& g = model.geometry()[e];
    const auto& mat = model.material_of(e);
    const auto u_el = model.element_dofs(e, u_trial);
    Eigen::Matrix<double, 16, 1> f_el = Eigen::Matrix<double, 16, 1>::Zero();
    for (int q = 0; q < 9; ++q) {
      const Eigen::Vector3d eps = g.B[q] * u_el;
      const auto& prev = model.states[e][q];
      const Eigen::Vector3d deps(eps(0) - prev.strain(0),
                                 eps(1) - prev.strain(1),
                                 eps(2) - prev.strain(3));
      cache.gp[e][q] = update_point(prev, deps, mat.elastic,
                                    mat.mc ? &*mat.mc : nullptr);
      const auto& sig = cache.gp[e][q].state.stress;
      const Eigen::Vector3d sig_ip(sig(0), sig(1), sig(3));
      f_el.noalias() += g.wdetJ[q] * g.B[q].transpose() * sig_ip;
    }
    for (int a = 0; a < 8; ++a) {
      cache.f_int[2 * model.mesh.elements[e].nodes[a]] += f_el(2 * a);
      cache.f_int[2 * model.mesh.elements[e].nodes[a] + 1] += f_el(2 * a + 1);
    }
  }
  return cache;
}

inline void commit(Model& model, const EvalCache& cache,
                   const std::vector<double>& u_trial) {
  for (int e = 0; e < model.n_elements(); ++e) {
    if (!model.active[e]) continue;
    for (int q = 0; q < 9; ++q) model.states[e][q] = cache.gp[e][q].state;
  }
  model.u = u_trial;
}

namespace detail {

template <typename PerElementMatrix>
Eigen::SparseMatrix<double> assemble_matrix(const Model& model,
                                            const DofMap& dof,
                                            PerElementMatrix&& element_matrix) {
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(model.n_elements() * 256);
  for (int e = 0; e < model.n_elements(); ++e) {
    if (!model.active[e]) continue;
    const ElementMatrix Ke = element_matrix(e);
    const auto& nodes = model.mesh.elements[e].nodes;
    for (int a = 0; a < 16; ++a) {
      const int ia = dof.index(nodes[a / 2], a % 2);
      if (ia < 0) continue;
      for (int b = 0; b < 16; ++b) {
        const int ib = dof.index(nodes[b / 2], b % 2);
        if (ib < 0) continue;
        trip.emplace_back(ia, ib, Ke(a, b));
      }
    }
  }
  Eigen::SparseMatrix<double> A(dof.n_active(), dof.n_active());
  A.setFromTriplets(trip.begin(), trip.end());
  A.makeCompressed();
  return A;
}

}  // namespace detail

// Tangent stiffness from a trial evaluation. A small elastic fraction is
// blended in to keep the factorization regular where integration points
// sit at the yield-surface apex (zero consistent tangent); Newton
// convergence is still judged on the true residual.
inline Eigen::SparseMatrix<double> assemble_tangent(
    const Model& model, const DofMap& dof, const EvalCache& cache,
    double elastic_regularization = 1e-6) {
  return detail::assemble_matrix(model, dof, [&](int e) {
    const auto& g = model.geometry()[e];
    const Eigen::Matrix3d De = elastic_tangent(model.material_of(e).elastic);
    ElementMatrix Ke = ElementMatrix::Zero();
    for (int q = 0; q < 9; ++q) {
      const Eigen::Matrix3d D = cache.gp[e][q].tangent_in_plane() +
                                elastic_regularization * De;
      Ke.noalias() += g.wdetJ[q] * g.B[q].transpose() * D * g.B[q];
    }
    return Ke;
  });
}

// Elastic (initial) stiffness, independent of the stress state.
inline Eigen::SparseMatrix<double> assemble_elastic_stiffness(
    const Model& model, const DofMap& dof) {
  return detail::assemble_matrix(model, dof, [&](int e) {
    const Eigen::Matrix3d D = elastic_tangent(model.material_of(e).elastic);
    const auto& g = model.geometry()[e];
    ElementMatrix Ke = ElementMatrix::Zero();
    for (int q = 0; q < 9; ++q)
      Ke.noalias() += g.wdetJ[q] * g.B[q].transpose() * D * g.B[q];
    return Ke;
  });
}

// Consistent mass with each region's own density.
inline Eigen::SparseMatrix<double> assemble_mass(const Model& model,
                                                 const DofMap& dof) {
  return detail::assemble_matrix(model, dof, [&](int e) {
    return element_mass(model.mesh.element_coords(e),
                        model.material_of(e).elastic.rho);
  });
}

// Rayleigh damping C = a0 M + a1 K_elastic accumulated over a subset of
// elements (the soil; the elastic wall carries no Rayleigh damping).
template <typename ElementFilter>
Eigen::SparseMatrix<double> assemble_rayleigh(const Model& model,
                                              const DofMap& dof, double a0,
                                              double a1,
                                              ElementFilter&& include) {
  return detail::assemble_matrix(model, dof, [&](int e) {
    if (!include(e)) return ElementMatrix::Zero().eval();
    const Eigen::Matrix3d D = elastic_tangent(model.material_of(e).elastic);
    const auto& g = model.geometry()[e];
    ElementMatrix Ke = ElementMatrix::Zero();
    for (int q = 0; q < 9; ++q)
      Ke.noalias() += g.wdetJ[q] * g.B[q].transpose() * D * g.B[q];
    const ElementMatrix Me = element_mass(model.mesh.element_coords(e),
                                          model.material_of(e).elastic.rho);
    return (a0 * Me + a1 * Ke).eval();
  });
}

// Gravity equivalent loads using the model's uniform static unit weight
// (see geostatic_initialize). Full-slot vector.
inline std::vector<double> gravity_load(const Model& model) {
  std::vector<double> f(2 * model.mesh.nodes.size(), 0.0);
  for (int e = 0; e < model.n_elements(); ++e) {
    if (!model.active[e]) continue;
    const auto fe = element_body_force(model.mesh.element_coords(e),
                                       {0.0, -model.gravity_gamma});
    for (int a = 0; a < 8; ++a) {
      f[2 * model.mesh.elements[e].nodes[a]] += fe(2 * a);
      f[2 * model.mesh.elements[e].nodes[a] + 1] += fe(2 * a + 1);
    }
  }
  return f;
}

// At-rest stress initialization: sigma_yy from the overburden of a level
// ground surface, sigma_xx = sigma_zz = k0 sigma_yy, zero shear. The
// matching uniform unit weight becomes the model's static gravity so the
// initial state equilibrates the gravity load exactly (the wall column is
// initialized as pre-existing ground; its density enters the dynamic mass,
// not the static gravity).
inline void geostatic_initialize(Model& model, const K0Profile& profile) {
  if (!(profile.k0 > 0.0 && profile.k0 < 1.0))
    throw ConfigError("at-rest coefficient must lie in (0, 1)");
  double surface = -1e30;
  for (const auto& p : model.mesh.nodes) surface = std::max(surface, p(1));
  if (std::abs(surface - profile.surface_y) > 1e-9)
    throw ConfigError("ground surface is not level at the stated elevation");
  for (int id : model.mesh.boundary.surface)
    if (std::abs(model.mesh.nodes[id](1) - profile.surface_y) > 1e-9)
      throw ConfigError("ground surface is not level across the model");

  model.gravity_gamma = profile.gamma;
  for (int e = 0; e < model.n_elements(); ++e) {
    if (!model.active[e]) continue;
    const auto& g = model.geometry()[e];
    for (int q = 0; q < 9; ++q) {
      GaussState s;
      const double depth = profile.surface_y - g.gp_y[q];
      s.stress(1) = -profile.gamma * depth;
      s.stress(0) = profile.k0 * s.stress(1);
      s.stress(2) = profile.k0 * s.stress(1);
      s.stress(3) = 0.0;
      model.states[e][q] = s;
    }
  }
  std::fill(model.u.begin(), model.u.end(), 0.0);
}

// Symmetric positive definite sparse solve (Cholesky-type). Reports
// singular or indefinite systems, which signal missing boundary conditions
// or a structural mechanism.
inline Eigen::VectorXd solve_linear_system(const Eigen::SparseMatrix<double>& K,
                                           const Eigen::VectorXd& f) {
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt(K);
  if (ldlt.info() != Eigen::Success)
    throw SolverError("sparse factorization failed (singular system?)");
  if (ldlt.vectorD().minCoeff() <= 0.0)
    throw SolverError("system is singular or indefinite; check boundary conditions");
  return ldlt.solve(f);
}

// General sparse solve for the (possibly non-symmetric) Newton tangent.
class TangentSolver {
 public:
  void factor(const Eigen::SparseMatrix<double>& A) {
    lu_.compute(A);
    if (lu_.info() != Eigen::Success)
      throw SolverError("tangent factorization failed (singular system?)");
  }
  Eigen::VectorXd solve(const Eigen::VectorXd& b) const {
    return lu_.solve(b);
  }

 private:
  Eigen::SparseLU<Eigen::SparseMatrix<double>> lu_;
};

}  // namespace spwall
