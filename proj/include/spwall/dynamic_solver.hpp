#pragma once

// Implicit Newmark time integration of the nonlinear wall-soil model under
// uniform horizontal base excitation, formulated in the frame of the
// moving base: base nodes stay fixed, the record enters as -M*iota*a_g(t),
// and absolute accelerations are recovered by adding a_g back. Rayleigh
// damping acts on the soil only and is anchored to the initial
// (post-construction) elastic stiffness. Lateral boundaries either carry
// Lysmer-Kuhlemeyer dashpots coupled to free-field site-response columns
// (default) or are tied periodically.

#include <functional>
#include <map>
#include <memory>
#include <set>
#include <vector>

#include "spwall/modal.hpp"
#include "spwall/model.hpp"
#include "spwall/motion.hpp"
#include "spwall/static_solver.hpp"

namespace spwall {

struct DynamicSolveSettings {
  double newmark_beta = 0.25;
  double newmark_gamma = 0.5;
  double dt = 0.0;       // 0: use the motion's sampling step
  double dt_min = 1e-5;  // adaptive halving floor
  double rayleigh_a0 = 0.0;  // 1/s
  double rayleigh_a1 = 0.0;  // s
  enum class LateralBoundary { DashpotFreeField, Tied };
  LateralBoundary boundary = LateralBoundary::DashpotFreeField;
  int max_newton_iters = 30;
  double force_tolerance = 1e-6;

  void validate() const {
    if (newmark_gamma < 0.5)
      throw ConfigError("newmark gamma must be >= 1/2 for stability");
    if (newmark_beta + 1e-12 < std::pow(newmark_gamma + 0.5, 2) / 4.0)
      throw ConfigError("newmark beta below the unconditional-stability bound");
    if (!(dt >= 0.0) || !(dt_min > 0.0))
      throw ConfigError("invalid time step settings");
  }
};

struct Dashpot {
  int slot = 0;    // full-slot dof index
  double c = 0.0;  // kN s/m; force = c (v_target - v)
};

// One Newmark-integrated system: a model with a frozen dof structure,
// consistent mass, Rayleigh damping over the soil, optional dashpots with
// externally supplied target velocities, and an extra external force
// channel (free-field tractions).
class NewmarkSystem {
 public:
  // `continue_static` carries f_int of the committed state as a constant
  // load so t = 0 exactly continues the static state (gravity plus the
  // frozen reactions of any dofs released for the dynamic phase). Disable
  // it for free-vibration studies from a displaced configuration.
  NewmarkSystem(Model& model, const DynamicSolveSettings& settings,
                std::vector<Dashpot> dashpots = {},
                bool continue_static = true)
      : model_(model),
        settings_(settings),
        dof_(model.dof_map()),
        dashpots_(std::move(dashpots)) {
    settings_.validate();
    M_ = assemble_mass(model_, dof_);
    C_ = assemble_rayleigh(model_, dof_, settings_.rayleigh_a0,
                           settings_.rayleigh_a1, [&](int e) {
                             return model_.mesh.elements[e].region.kind !=
                                    Region::Kind::Wall;
                           });
    std::vector<double> iota(dof_.n_slots(), 0.0);
    for (int s = 0; s < dof_.n_slots(); s += 2) iota[s] = 1.0;
    M_iota_ = M_ * dof_.pick(iota);

    if (continue_static) {
      const auto cache = evaluate_internal(model_, model_.u);
      f_static_ = dof_.reduce(cache.f_int);
    } else {
      f_static_ = Eigen::VectorXd::Zero(dof_.n_active());
    }

    u_full_ = model_.u;
    dof_.impose_values(u_full_);
    u_ = dof_.pick(u_full_);
    v_ = Eigen::VectorXd::Zero(dof_.n_active());
    a_ = Eigen::VectorXd::Zero(dof_.n_active());
    v_target_.assign(dof_.n_slots(), 0.0);
    f_extra_.assign(dof_.n_slots(), 0.0);
  }

  const DofMap& dof() const { return dof_; }
  const Eigen::VectorXd& velocity() const { return v_; }
  const Eigen::VectorXd& acceleration() const { return a_; }
  const std::vector<double>& displacement_full() const { return u_full_; }

  double velocity_slot(int slot) const {
    const int i = dof_.index_slot(slot);
    return i >= 0 ? v_(i) : 0.0;
  }
  double acceleration_slot(int slot) const {
    const int i = dof_.index_slot(slot);
    return i >= 0 ? a_(i) : 0.0;
  }

  std::vector<double>& v_target() { return v_target_; }
  std::vector<double>& f_extra() { return f_extra_; }

  // Initial acceleration consistent with the applied loads at rest.
  void initialize(double ug0) {
    const auto cache = evaluate_internal(model_, u_full_);
    const Eigen::VectorXd rhs =
        external_force(ug0) - dof_.reduce(cache.f_int) - C_ * v_;
    a_ = solve_linear_system(M_, rhs);
  }

  // Advance the committed state by dt with base acceleration ug_new at the
  // step end; halves the step recursively on non-convergence.
  void step(double dt, double ug_old, double ug_new) {
    if (dt < settings_.dt_min)
      throw SolverError("dynamic step collapsed below dt_min");
    if (!try_step(dt, ug_new)) {
      const double ug_mid = 0.5 * (ug_old + ug_new);
      step(0.5 * dt, ug_old, ug_mid);
      step(0.5 * dt, ug_mid, ug_new);
    }
  }

 private:
  Eigen::VectorXd external_force(double ug) const {
    Eigen::VectorXd f = f_static_ - ug * M_iota_ + dof_.reduce(f_extra_);
    for (const auto& d : dashpots_) {
      const int i = dof_.index_slot(d.slot);
      if (i >= 0) f(i) += d.c * v_target_[d.slot];
    }
    return f;
  }

  bool try_step(double dt, double ug_new) {
    const double beta = settings_.newmark_beta,
                 gamma = settings_.newmark_gamma;
    const double c0 = 1.0 / (beta * dt * dt), c2 = 1.0 / (beta * dt),
                 c3 = 1.0 / (2.0 * beta) - 1.0;

    const Eigen::VectorXd u_n = u_, v_n = v_, a_n = a_;
    std::vector<double> u_trial = u_full_;
    Eigen::VectorXd u_red = u_n;
    const Eigen::VectorXd f_ext = external_force(ug_new);
    const double f_ref = std::max(f_ext.norm(), 1e-6);

    EvalCache cache;
    TangentSolver solver;
    bool converged = false;
    for (int it = 0; it <= settings_.max_newton_iters; ++it) {
      cache = evaluate_internal(model_, u_trial);
      const Eigen::VectorXd a_new = c0 * (u_red - u_n) - c2 * v_n - c3 * a_n;
      const Eigen::VectorXd v_new =
          v_n + dt * ((1.0 - gamma) * a_n + gamma * a_new);
      Eigen::VectorXd r =
          M_ * a_new + C_ * v_new + dof_.reduce(cache.f_int) - f_ext;
      for (const auto& d : dashpots_) {
        const int i = dof_.index_slot(d.slot);
        if (i >= 0) r(i) += d.c * v_new(i);
      }
      if (r.norm() <= settings_.force_tolerance * f_ref) {
        u_ = u_red;
        a_ = a_new;
        v_ = v_new;
        commit(model_, cache, u_trial);
        u_full_ = u_trial;
        converged = true;
        break;
      }
      if (it == settings_.max_newton_iters) break;

      Eigen::SparseMatrix<double> J = assemble_tangent(model_, dof_, cache);
      J += (gamma * c2) * C_;
      J += c0 * M_;
      for (const auto& d : dashpots_) {
        const int i = dof_.index_slot(d.slot);
        if (i >= 0) J.coeffRef(i, i) += gamma * c2 * d.c;
      }
      solver.factor(J);
      const Eigen::VectorXd du = solver.solve(-r);
      u_red += du;
      for (int s = 0; s < dof_.n_slots(); ++s)
        if (dof_.index_slot(s) >= 0) u_trial[s] = u_red(dof_.index_slot(s));
    }
    return converged;
  }

  Model& model_;
  DynamicSolveSettings settings_;
  DofMap dof_;
  std::vector<Dashpot> dashpots_;
  Eigen::SparseMatrix<double> M_, C_;
  Eigen::VectorXd M_iota_;
  Eigen::VectorXd f_static_;
  Eigen::VectorXd u_, v_, a_;
  std::vector<double> u_full_;
  std::vector<double> v_target_;  // full slots
  std::vector<double> f_extra_;   // full slots
};

// ---------------------------------------------------------------------
// Free-field site-response column for one lateral boundary.

// A one-element-wide soil column with periodic row ties; integrates the
// same base motion and reports dynamic stresses and velocities by height.
class FreeFieldColumn {
 public:
  FreeFieldColumn(double height, const Material& soil, const K0Profile& k0,
                  const DynamicSolveSettings& settings, int rows_hint)
      : height_(height) {
    const int ny = std::max(6, rows_hint);
    Mesh mesh = build_column_mesh(height, 1.0, ny);
    model_ = std::make_unique<Model>(std::move(mesh), std::vector<Material>{soil});
    for (int id : model_->mesh.boundary.base) {
      model_->constraints.push_back({id, 0, 0.0});
      model_->constraints.push_back({id, 1, 0.0});
    }
    // Tie both components across every height row (periodic column).
    std::map<double, std::vector<int>> rows;
    for (std::size_t n = 0; n < model_->mesh.nodes.size(); ++n)
      rows[model_->mesh.nodes[n](1)].push_back(static_cast<int>(n));
    for (const auto& [y, ids] : rows)
      for (std::size_t k = 1; k < ids.size(); ++k) {
        model_->ties.push_back({ids[0], 0, ids[k], 0});
        model_->ties.push_back({ids[0], 1, ids[k], 1});
      }
    geostatic_initialize(*model_, {k0.k0, k0.gamma, height});

    // Static settle (quiescent by construction) then freeze the baseline.
    system_ = std::make_unique<NewmarkSystem>(*model_, settings);
    baseline_.resize(model_->n_elements());
    for (int e = 0; e < model_->n_elements(); ++e)
      baseline_[e] = model_->element_mean_stress(e);
    rebuild_rows();
  }

  void initialize(double ug0) { system_->initialize(ug0); }
  void step(double dt, double ug_old, double ug_new) {
    system_->step(dt, ug_old, ug_new);
    refresh_state();
  }

  double height() const { return height_; }

  // Dynamic (baseline-subtracted) stresses and velocities at height y.
  double sigma_xx_dyn(double y) const { return interp(rows_sxx_, y); }
  double tau_xy_dyn(double y) const { return interp(rows_txy_, y); }
  double vx(double y) const { return interp(rows_vx_, y); }
  double vy(double y) const { return interp(rows_vy_, y); }

 private:
  void rebuild_rows() {
    // One entry per element row, keyed by centroid height.
    std::map<double, std::vector<int>> by_y;
    for (int e = 0; e < model_->n_elements(); ++e)
      by_y[model_->mesh.element_centroid(e)(1)].push_back(e);
    row_y_.clear();
    row_elems_.clear();
    for (const auto& [y, es] : by_y) {
      row_y_.push_back(y);
      row_elems_.push_back(es);
    }
    rows_sxx_.assign(row_y_.size(), 0.0);
    rows_txy_.assign(row_y_.size(), 0.0);
    rows_vx_.assign(row_y_.size(), 0.0);
    rows_vy_.assign(row_y_.size(), 0.0);
    refresh_state();
  }

  void refresh_state() {
    for (std::size_t r = 0; r < row_y_.size(); ++r) {
      Eigen::Vector4d s = Eigen::Vector4d::Zero();
      for (int e : row_elems_[r])
        s += model_->element_mean_stress(e) - baseline_[e];
      s /= static_cast<double>(row_elems_[r].size());
      rows_sxx_[r] = s(0);
      rows_txy_[r] = s(3);
      // Any node of the row carries the tied velocity; use the element's
      // first node at that height.
      const int e0 = row_elems_[r][0];
      int node = model_->mesh.elements[e0].nodes[0];
      double best = 1e30;
      for (int a = 0; a < 8; ++a) {
        const int n = model_->mesh.elements[e0].nodes[a];
        const double d = std::abs(model_->mesh.nodes[n](1) - row_y_[r]);
        if (d < best) {
          best = d;
          node = n;
        }
      }
      rows_vx_[r] = system_->velocity_slot(2 * node);
      rows_vy_[r] = system_->velocity_slot(2 * node + 1);
    }
  }

  double interp(const std::vector<double>& vals, double y) const {
    if (row_y_.empty()) return 0.0;
    if (y <= row_y_.front()) return vals.front();
    if (y >= row_y_.back()) return vals.back();
    const auto it = std::lower_bound(row_y_.begin(), row_y_.end(), y);
    const std::size_t k = static_cast<std::size_t>(it - row_y_.begin());
    const double w = (y - row_y_[k - 1]) / (row_y_[k] - row_y_[k - 1]);
    return (1.0 - w) * vals[k - 1] + w * vals[k];
  }

  double height_;
  std::unique_ptr<Model> model_;
  std::unique_ptr<NewmarkSystem> system_;
  std::vector<Eigen::Vector4d> baseline_;
  std::vector<double> row_y_;
  std::vector<std::vector<int>> row_elems_;
  std::vector<double> rows_sxx_, rows_txy_, rows_vx_, rows_vy_;
};

// ---------------------------------------------------------------------
// Full dynamic run on the site model.

struct StepRecord {
  int step = 0;
  double t = 0.0;
  double base_accel = 0.0;  // m/s^2
  const Model* model = nullptr;
  const NewmarkSystem* system = nullptr;
};

using StepRecorder = std::function<void(const StepRecord&)>;

namespace detail {

struct BoundaryEdgeNode {
  int node = 0;
  double weight = 0.0;  // tributary length, m (consistent edge weights)
  double y = 0.0;
  int material = 0;
};

// Consistent edge weights (L/6, 2L/3, L/6) of the active-element faces
// lying on a vertical boundary at x = x_bound.
inline std::vector<BoundaryEdgeNode> boundary_face_nodes(const Model& model,
                                                         double x_bound) {
  std::map<int, BoundaryEdgeNode> acc;
  const int faces[2][3] = {{0, 3, 7}, {1, 2, 5}};  // left face, right face
  for (int e = 0; e < model.n_elements(); ++e) {
    if (!model.active[e]) continue;
    for (const auto& face : faces) {
      bool on = true;
      for (int a : face)
        if (std::abs(model.mesh.nodes[model.mesh.elements[e].nodes[a]](0) -
                     x_bound) > 1e-9)
          on = false;
      if (!on) continue;
      const int n1 = model.mesh.elements[e].nodes[face[0]];
      const int n2 = model.mesh.elements[e].nodes[face[1]];
      const int nm = model.mesh.elements[e].nodes[face[2]];
      const double L =
          std::abs(model.mesh.nodes[n1](1) - model.mesh.nodes[n2](1));
      const double w[3] = {L / 6.0, L / 6.0, 2.0 * L / 3.0};
      const int ids[3] = {n1, n2, nm};
      for (int k = 0; k < 3; ++k) {
        auto& entry = acc[ids[k]];
        entry.node = ids[k];
        entry.weight += w[k];
        entry.y = model.mesh.nodes[ids[k]](1);
        entry.material = model.mesh.elements[e].material;
      }
    }
  }
  std::vector<BoundaryEdgeNode> out;
  out.reserve(acc.size());
  for (const auto& [id, entry] : acc) out.push_back(entry);
  return out;
}

inline double active_soil_top(const Model& model, double x_bound) {
  double top = 0.0;
  for (const auto& bn : boundary_face_nodes(model, x_bound))
    top = std::max(top, bn.y);
  return top;
}

}  // namespace detail

struct DynamicRunResult {
  int steps = 0;
  double dt = 0.0;
};

// Integrate the committed (post-construction) model under the motion.
// Lateral rollers are released per the boundary setting; the static
// reactions are carried by the NewmarkSystem's constant-load channel.
inline DynamicRunResult newmark_dynamic_solve(
    Model& model, const GroundMotion& motion,
    const DynamicSolveSettings& settings_in, const K0Profile& k0,
    const StepRecorder& recorder = {}) {
  DynamicSolveSettings settings = settings_in;
  settings.validate();
  const double dt = settings.dt > 0.0 ? settings.dt : motion.dt;
  if (!(dt > 0.0)) throw ConfigError("dynamic run needs a time step");

  const double x_left = 0.0, x_right = model.mesh.width;
  const auto left_nodes = detail::boundary_face_nodes(model, x_left);
  const auto right_nodes = detail::boundary_face_nodes(model, x_right);

  using LB = DynamicSolveSettings::LateralBoundary;

  // In tied mode only matched-height rows are released and joined; in
  // dashpot mode every lateral roller on the soil faces is released.
  std::set<int> release_nodes;
  std::map<double, int> right_by_y;
  for (const auto& bn : right_nodes) right_by_y[bn.y] = bn.node;
  if (settings.boundary == LB::Tied) {
    for (const auto& bn : left_nodes) {
      auto it = right_by_y.lower_bound(bn.y - 1e-9);
      if (it != right_by_y.end() && std::abs(it->first - bn.y) < 1e-9) {
        release_nodes.insert(bn.node);
        release_nodes.insert(it->second);
      }
    }
  } else {
    for (const auto& bn : left_nodes) release_nodes.insert(bn.node);
    for (const auto& bn : right_nodes) release_nodes.insert(bn.node);
  }

  std::vector<Constraint> kept;
  for (const auto& c : model.constraints) {
    const double y = model.mesh.nodes[c.node](1);
    const bool release =
        c.comp == 0 && y > 1e-9 && release_nodes.count(c.node) > 0;
    if (!release) kept.push_back(c);
  }
  model.constraints = std::move(kept);

  std::vector<Dashpot> dashpots;
  std::unique_ptr<FreeFieldColumn> ff_left, ff_right;
  if (settings.boundary == LB::DashpotFreeField) {
    for (const auto& group : {left_nodes, right_nodes}) {
      for (const auto& bn : group) {
        const auto& mat = model.materials[bn.material].elastic;
        const double G = mat.shear_modulus();
        const double lam = mat.lame_lambda();
        const double vp = std::sqrt((lam + 2.0 * G) / mat.rho);
        const double vs = std::sqrt(G / mat.rho);
        dashpots.push_back({2 * bn.node, bn.weight * mat.rho * vp});
        dashpots.push_back({2 * bn.node + 1, bn.weight * mat.rho * vs});
      }
    }
    const double h_left = detail::active_soil_top(model, x_left);
    const double h_right = detail::active_soil_top(model, x_right);
    const Material& soil = model.materials[0];
    const int rows_hint = static_cast<int>(std::round(h_right / 0.75));
    ff_left = std::make_unique<FreeFieldColumn>(
        h_left, soil, k0, settings,
        static_cast<int>(std::round(h_left / 0.75)));
    ff_right = std::make_unique<FreeFieldColumn>(h_right, soil, k0, settings,
                                                 rows_hint);
  } else {
    // Tied boundaries: join the matched-height rows released above.
    for (const auto& bn : left_nodes) {
      auto it = right_by_y.lower_bound(bn.y - 1e-9);
      if (it != right_by_y.end() && std::abs(it->first - bn.y) < 1e-9) {
        model.ties.push_back({bn.node, 0, it->second, 0});
        model.ties.push_back({bn.node, 1, it->second, 1});
      }
    }
  }

  NewmarkSystem system(model, settings, dashpots);

  auto apply_free_field = [&](double t) {
    if (!ff_left && !ff_right) return;
    auto& f = system.f_extra();
    auto& vt = system.v_target();
    std::fill(f.begin(), f.end(), 0.0);
    std::fill(vt.begin(), vt.end(), 0.0);
    for (const auto& bn : left_nodes) {
      // Outward normal (-1, 0): traction = (-sxx, -txy).
      f[2 * bn.node] += bn.weight * (-ff_left->sigma_xx_dyn(bn.y));
      f[2 * bn.node + 1] += bn.weight * (-ff_left->tau_xy_dyn(bn.y));
      vt[2 * bn.node] = ff_left->vx(bn.y);
      vt[2 * bn.node + 1] = ff_left->vy(bn.y);
    }
    for (const auto& bn : right_nodes) {
      f[2 * bn.node] += bn.weight * (ff_right->sigma_xx_dyn(bn.y));
      f[2 * bn.node + 1] += bn.weight * (ff_right->tau_xy_dyn(bn.y));
      vt[2 * bn.node] = ff_right->vx(bn.y);
      vt[2 * bn.node + 1] = ff_right->vy(bn.y);
    }
    (void)t;
  };

  const double ug0 = motion.at(0.0);
  if (ff_left) ff_left->initialize(ug0);
  if (ff_right) ff_right->initialize(ug0);
  apply_free_field(0.0);
  system.initialize(ug0);

  const int n_steps =
      static_cast<int>(std::ceil(motion.duration() / dt - 1e-9));
  double ug_old = ug0;
  for (int step = 1; step <= n_steps; ++step) {
    const double t = step * dt;
    const double ug_new = motion.at(t);
    if (ff_left) ff_left->step(dt, ug_old, ug_new);
    if (ff_right) ff_right->step(dt, ug_old, ug_new);
    apply_free_field(t);
    system.step(dt, ug_old, ug_new);
    ug_old = ug_new;
    if (recorder) {
      StepRecord rec;
      rec.step = step;
      rec.t = t;
      rec.base_accel = ug_new;
      rec.model = &model;
      rec.system = &system;
      recorder(rec);
    }
  }
  return {n_steps, dt};
}

}  // namespace spwall
