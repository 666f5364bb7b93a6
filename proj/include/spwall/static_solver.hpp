#pragma once

// Staged nonlinear static solution. Excavation stages deactivate elements
// and release their boundary tractions over load substeps; prescribed
// displacement ramps drive verification problems (translating-wall limit
// states). Full Newton with the consistent tangent.

#include <sstream>
#include <string>
#include <vector>

#include "spwall/model.hpp"

namespace spwall {

struct StaticSolveSettings {
  int max_newton_iters = 40;
  double force_tolerance = 1e-6;         // relative to the external load
  double displacement_tolerance = 1e-6;  // relative increment norm
  int load_substeps = 5;

  void validate() const {
    if (!(force_tolerance > 0 && force_tolerance <= 1e-2))
      throw ConfigError("force tolerance must lie in (0, 1e-2]");
    if (!(displacement_tolerance > 0 && displacement_tolerance <= 1e-2))
      throw ConfigError("displacement tolerance must lie in (0, 1e-2]");
    if (load_substeps < 1) throw ConfigError("need at least one substep");
    if (max_newton_iters < 1) throw ConfigError("need at least one iteration");
  }
};

struct StageResult {
  std::string name;
  std::vector<int> iterations;       // per substep
  std::vector<double> residuals;     // final relative residual per substep
  bool converged = false;
  double max_displacement = 0.0;     // after the stage, m
};

// Solve one construction stage. `ramp_targets` are constraint values to be
// reached linearly over the substeps (existing constraints on the same
// dofs are replaced).
inline StageResult newton_static_solve(
    Model& model, const Stage& stage, const StaticSolveSettings& settings,
    const std::vector<Constraint>& ramp_targets = {}) {
  settings.validate();
  StageResult result;
  result.name = stage.name;

  // Boundary tractions of the removed elements at the start of the stage;
  // released to zero across the substeps.
  std::vector<double> f_release(2 * model.mesh.nodes.size(), 0.0);
  if (!stage.deactivate.empty()) {
    for (int e : stage.deactivate) {
      if (!model.active[e]) continue;
      // The tractions the removed body exerted on the remaining mesh:
      // gravity minus internal force of the element, at the stage-start
      // stress state.
      const auto& g = model.geometry()[e];
      Eigen::Matrix<double, 16, 1> fe = element_body_force(
          model.mesh.element_coords(e), {0.0, -model.gravity_gamma});
      for (int q = 0; q < 9; ++q) {
        const auto& sig = model.states[e][q].stress;
        const Eigen::Vector3d sig_ip(sig(0), sig(1), sig(3));
        fe.noalias() -= g.wdetJ[q] * g.B[q].transpose() * sig_ip;
      }
      for (int a = 0; a < 8; ++a) {
        f_release[2 * model.mesh.elements[e].nodes[a]] += fe(2 * a);
        f_release[2 * model.mesh.elements[e].nodes[a] + 1] += fe(2 * a + 1);
      }
    }
    for (int e : stage.deactivate) model.active[e] = 0;
  }

  // Starting values of any ramped constraints.
  std::vector<Constraint> ramp_start = ramp_targets;
  for (auto& c : ramp_start) {
    c.value = 0.0;
    for (const auto& existing : model.constraints)
      if (existing.node == c.node && existing.comp == c.comp)
        c.value = existing.value;
  }

  const std::vector<double> f_grav = gravity_load(model);
  std::ostringstream history;

  for (int sub = 1; sub <= settings.load_substeps; ++sub) {
    const double lambda =
        static_cast<double>(sub) / settings.load_substeps;

    if (!ramp_targets.empty()) {
      std::vector<Constraint> merged;
      for (const auto& c : model.constraints) {
        bool replaced = false;
        for (const auto& t : ramp_targets)
          if (t.node == c.node && t.comp == c.comp) replaced = true;
        if (!replaced) merged.push_back(c);
      }
      for (std::size_t k = 0; k < ramp_targets.size(); ++k) {
        Constraint c = ramp_targets[k];
        c.value = ramp_start[k].value +
                  lambda * (ramp_targets[k].value - ramp_start[k].value);
        merged.push_back(c);
      }
      model.constraints = std::move(merged);
    }

    const DofMap dof = model.dof_map();
    std::vector<double> f_ext = f_grav;
    for (std::size_t s = 0; s < f_ext.size(); ++s)
      f_ext[s] += (1.0 - lambda) * f_release[s];
    const Eigen::VectorXd f_ext_red = dof.reduce(f_ext);
    const double f_ref = std::max(f_ext_red.norm(), 1e-6);

    std::vector<double> u_trial = model.u;
    dof.impose_values(u_trial);

    bool sub_converged = false;
    EvalCache cache = evaluate_internal(model, u_trial);
    double res_norm = (dof.reduce(cache.f_int) - f_ext_red).norm();
    double rel = res_norm / f_ref;
    int it = 0;
    TangentSolver solver;
    for (; it < settings.max_newton_iters; ++it) {
      if (rel <= settings.force_tolerance || res_norm < 1e-9) {
        sub_converged = true;
        break;
      }
      solver.factor(assemble_tangent(model, dof, cache));
      const Eigen::VectorXd r = dof.reduce(cache.f_int) - f_ext_red;
      const Eigen::VectorXd du = solver.solve(-r);

      // Backtracking line search on the residual norm: full Newton steps
      // overshoot when a plastic zone spreads in a nearly cohesionless
      // material.
      double step = 1.0;
      EvalCache best_cache;
      std::vector<double> best_u;
      double best_norm = -1.0;
      for (int ls = 0; ls < 8; ++ls) {
        std::vector<double> u_try = u_trial;
        for (int s = 0; s < dof.n_slots(); ++s)
          if (dof.index_slot(s) >= 0) u_try[s] += step * du(dof.index_slot(s));
        EvalCache c_try = evaluate_internal(model, u_try);
        const double n_try = (dof.reduce(c_try.f_int) - f_ext_red).norm();
        if (best_norm < 0.0 || n_try < best_norm) {
          best_norm = n_try;
          best_cache = std::move(c_try);
          best_u = std::move(u_try);
        }
        if (n_try < 0.9 * res_norm) break;
        step *= 0.5;
      }
      u_trial = std::move(best_u);
      cache = std::move(best_cache);
      const double du_rel =
          du.norm() / std::max(dof.reduce(u_trial).norm(), 1e-12);
      res_norm = best_norm;
      rel = res_norm / f_ref;
      if (du_rel <= settings.displacement_tolerance &&
          rel <= 10.0 * settings.force_tolerance) {
        sub_converged = true;
        ++it;
        break;
      }
    }
    history << stage.name << " substep " << sub << ": iters=" << it
            << " residual=" << rel << "\n";
    result.iterations.push_back(it);
    result.residuals.push_back(rel);
    if (!sub_converged)
      throw SolverError("static stage failed to converge:\n" + history.str());
    commit(model, cache, u_trial);
  }

  result.converged = true;
  for (std::size_t n = 0; n < model.mesh.nodes.size(); ++n)
    result.max_displacement =
        std::max(result.max_displacement,
                 std::hypot(model.u[2 * n], model.u[2 * n + 1]));
  return result;
}

// Convenience: run a full construction plan.
inline std::vector<StageResult> run_stages(Model& model,
                                           const std::vector<Stage>& stages,
                                           const StaticSolveSettings& settings) {
  std::vector<StageResult> out;
  out.reserve(stages.size());
  for (const auto& st : stages)
    out.push_back(newton_static_solve(model, st, settings));
  return out;
}

}  // namespace spwall
