// Acceptance suite: one check per release criterion, each printed as a
// single [PASS]/[FAIL] line with its measured numbers. Returns the number
// of failed criteria.

#include <chrono>
#include <cstdio>
#include <functional>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "spwall/pipeline.hpp"

using namespace spwall;

namespace {

struct Check {
  bool pass = true;
  std::string detail;

  void require(bool ok, const std::string& what) {
    if (!ok) pass = false;
    if (!detail.empty()) detail += "; ";
    detail += (ok ? "" : "FAILED: ") + what;
  }
};

double now_s() {
  using clock = std::chrono::steady_clock;
  static const auto t0 = clock::now();
  return std::chrono::duration<double>(clock::now() - t0).count();
}

std::string fmt(double v, int prec = 4) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*g", prec, v);
  return buf;
}

// ---------------------------------------------------------------------

Check criterion1_analytical_exactness() {
  Check c;
  double worst = 0.0;
  int cases = 0;
  for (double phi : {25.0, 30.0, 35.0, 40.0}) {
    for (double delta : {0.0, phi / 2.0}) {
      for (double kh : {0.0, 0.1, 0.2, 0.3}) {
        WallSoilParams p;
        p.phi = deg2rad(phi);
        p.delta = deg2rad(delta);
        p.gamma = 19.6;
        p.height_H = 6.0;
        for (PressureMode m : {PressureMode::Active, PressureMode::Passive}) {
          double closed;
          try {
            closed = mo_coefficient(p, {kh, 0.0}, m);
          } catch (const std::invalid_argument&) {
            continue;  // outside the validity domain
          }
          const double oracle = wedge_oracle_coefficient(p, {kh, 0.0}, m, 20000);
          worst = std::max(worst, std::abs(closed - oracle));
          ++cases;
        }
      }
    }
  }
  c.require(worst <= 1e-4,
            "max |K_closed - K_oracle| = " + fmt(worst) + " over " +
                std::to_string(cases) + " cases (tol 1e-4)");
  return c;
}

Check criterion2_static_coulomb_limit() {
  Check c;
  // Rigid smooth wall strip pushed to active failure by translation.
  const double H = 6.0, W = 24.0, gamma = 19.6;
  Material soil;
  soil.elastic = {163130.0, 0.26, 2.0};
  MohrCoulombParams mp;
  mp.phi = deg2rad(40.0);
  mp.cohesion_c = 0.2;
  mp.psi = 0.0;
  soil.mc = mp;
  soil.unit_weight = gamma;

  Model model(build_block_mesh(W, H, 32, 8), {soil});
  // Smooth base, far roller, translating smooth wall on the left edge.
  for (int id : model.mesh.boundary.base) model.constraints.push_back({id, 1, 0.0});
  for (int id : model.mesh.boundary.right) model.constraints.push_back({id, 0, 0.0});
  for (int id : model.mesh.boundary.left) model.constraints.push_back({id, 0, 0.0});
  geostatic_initialize(model, {0.36, gamma, H});

  std::vector<Constraint> ramp;
  for (int id : model.mesh.boundary.left) ramp.push_back({id, 0, -0.01 * H});
  StaticSolveSettings settings;
  settings.load_substeps = 40;
  newton_static_solve(model, {"translate", {}}, settings, ramp);

  // Resultant of horizontal stress on the wall-adjacent column.
  double P = 0.0;
  for (int e = 0; e < model.n_elements(); ++e) {
    bool adjacent = true;
    for (int a : {0, 3, 7}) {
      const int n = model.mesh.elements[e].nodes[a];
      if (std::abs(model.mesh.nodes[n](0)) > 1e-9) adjacent = false;
    }
    if (!adjacent) continue;
    const int n1 = model.mesh.elements[e].nodes[0];
    const int n2 = model.mesh.elements[e].nodes[3];
    const double h = std::abs(model.mesh.nodes[n1](1) - model.mesh.nodes[n2](1));
    P += h * (-model.element_mean_stress(e)(0));
  }
  const double K_fe = 2.0 * P / (gamma * H * H);
  const double K_a = 0.2174;
  c.require(std::abs(K_fe - K_a) <= 0.15 * K_a,
            "K_fe = " + fmt(K_fe) + " vs K_a = 0.2174 (tol 15%)");
  return c;
}

Check criterion3_geostatic_self_equilibrium() {
  Check c;
  RunConfig cfg;  // default site
  Model model = build_site_model(cfg);
  geostatic_initialize(model, cfg.k0_profile());
  StaticSolveSettings settings;
  settings.load_substeps = 1;
  const auto res = newton_static_solve(model, {"geostatic", {}}, settings);
  c.require(res.max_displacement <= 1e-6,
            "max displacement " + fmt(res.max_displacement) + " m (tol 1e-6)");
  const auto prof = wall_pressure_profile(model, cfg.site, Side::Active);
  const double K = back_calculate_K(prof.resultant(), 19.6, 6.0, 0.0);
  c.require(std::abs(K - 0.36) <= 0.03 * 0.36,
            "active-side K = " + fmt(K) + " vs K0 = 0.36 (tol 3%)");
  return c;
}

Check criterion4_modal_estimate() {
  Check c;
  RunConfig cfg;
  Model model = build_site_model(cfg);
  geostatic_initialize(model, cfg.k0_profile());
  const double f1 = lowest_frequency(model).frequency_hz;
  c.require(f1 >= 3.6 && f1 <= 6.0,
            "default model f1 = " + fmt(f1) + " Hz (band [3.6, 6.0])");

  // Analytic shear-column benchmark.
  Material soil = cfg.soil_material();
  soil.mc.reset();
  Model col(build_column_mesh(15.0, 1.0, 15), {soil});
  for (std::size_t n = 0; n < col.mesh.nodes.size(); ++n)
    col.constraints.push_back({static_cast<int>(n), 1, 0.0});
  for (int id : col.mesh.boundary.base) col.constraints.push_back({id, 0, 0.0});
  std::map<double, std::vector<int>> rows;
  for (std::size_t n = 0; n < col.mesh.nodes.size(); ++n)
    rows[col.mesh.nodes[n](1)].push_back(static_cast<int>(n));
  for (const auto& [y, ids] : rows)
    for (std::size_t k = 1; k < ids.size(); ++k)
      col.ties.push_back({ids[0], 0, ids[k], 0});
  const double f_col = lowest_frequency(col).frequency_hz;
  const double vs = std::sqrt(soil.elastic.shear_modulus() / soil.elastic.rho);
  const double f_exact = vs / (4.0 * 15.0);
  c.require(std::abs(f_col - f_exact) <= 0.03 * f_exact,
            "shear column f1 = " + fmt(f_col) + " vs Vs/4H = " + fmt(f_exact) +
                " Hz (tol 3%)");
  return c;
}

Check criterion5_wave_resolution() {
  Check c;
  RunConfig cfg;
  const Mesh mesh = build_site_mesh(cfg.site);
  const std::vector<ElasticParams> mats = {cfg.soil_material().elastic,
                                           cfg.wall_material().elastic};
  const auto report = wave_resolution_check(mesh, mats, 15.0);
  c.require(std::abs(report.min_limit - 1.499) <= 1e-3,
            "element-size limit " + fmt(report.min_limit, 5) +
                " m (expect 1.499)");
  c.require(report.all_pass, "default 0.25-1.0 m grading passes at 15 Hz");
  return c;
}

Check criterion6_constitutive_strength() {
  Check c;
  const ElasticParams ep{163130.0, 0.26, 2.0};
  MohrCoulombParams mp;
  mp.phi = deg2rad(40.0);
  mp.cohesion_c = 0.0;
  mp.psi = 0.0;

  GaussState state;
  state.stress = Eigen::Vector4d(-100.0, -100.0, -100.0, 0.0);
  for (int step = 0; step < 400; ++step) {
    double deyy = 0.0;
    PointUpdate up;
    for (int it = 0; it < 30; ++it) {
      up = update_point(state, {-1e-4, deyy, 0.0}, ep, &mp);
      const double r = up.state.stress(1) + 100.0;
      if (std::abs(r) < 1e-10) break;
      deyy -= r / up.tangent_full(1, 1);
    }
    state = up.state;
  }
  const double strength = 100.0 * std::pow(std::tan(deg2rad(65.0)), 2);
  c.require(std::abs(-state.stress(0) - strength) <= 0.005 * strength,
            "driver plateau " + fmt(-state.stress(0), 5) + " kPa vs " +
                fmt(strength, 5) + " (tol 0.5%)");

  std::mt19937 rng(7);
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  double worst = 0.0;
  for (int k = 0; k < 10000; ++k) {
    GaussState prev;
    const double p = -50.0 - 400.0 * std::abs(U(rng));
    prev.stress = Eigen::Vector4d(p, p, p, 0.0);
    const auto up = update_point(
        prev, {5e-3 * U(rng), 5e-3 * U(rng), 5e-3 * U(rng)}, ep, &mp);
    const double ref = std::max(1.0, up.state.stress.cwiseAbs().maxCoeff());
    worst = std::max(worst, mc_yield(up.state.stress, mp) / ref);
  }
  c.require(worst <= 1e-8,
            "max residual yield value " + fmt(worst) + " (tol 1e-8)");
  return c;
}

Check criterion7_dynamics_fidelity() {
  Check c;
  Material soil;
  soil.elastic = {163130.0, 0.26, 2.0};
  soil.unit_weight = 19.6;

  auto make_column = [&](int ny) {
    Model model(build_column_mesh(15.0, 1.0, ny), {soil});
    for (std::size_t n = 0; n < model.mesh.nodes.size(); ++n)
      model.constraints.push_back({static_cast<int>(n), 1, 0.0});
    for (int id : model.mesh.boundary.base)
      model.constraints.push_back({id, 0, 0.0});
    std::map<double, std::vector<int>> rows;
    for (std::size_t n = 0; n < model.mesh.nodes.size(); ++n)
      rows[model.mesh.nodes[n](1)].push_back(static_cast<int>(n));
    for (const auto& [y, ids] : rows)
      for (std::size_t k = 1; k < ids.size(); ++k)
        model.ties.push_back({ids[0], 0, ids[k], 0});
    return model;
  };
  auto top_of = [](const Model& m) {
    int best = 0;
    for (std::size_t n = 0; n < m.mesh.nodes.size(); ++n)
      if (m.mesh.nodes[n](1) > m.mesh.nodes[best](1)) best = static_cast<int>(n);
    return best;
  };

  {  // free vibration, mode 1, dt = T/100
    Model model = make_column(15);
    const auto modal = lowest_frequency(model);
    const double T = 1.0 / modal.frequency_hz;
    const DofMap dof = model.dof_map();
    std::vector<double> u0(dof.n_slots(), 0.0);
    dof.expand(1e-4 / modal.mode.cwiseAbs().maxCoeff() * modal.mode, u0);
    model.u = u0;
    DynamicSolveSettings settings;
    NewmarkSystem system(model, settings, {}, false);
    system.initialize(0.0);
    const int probe = top_of(model);
    const double dt = T / 100.0;
    std::vector<double> t, u;
    for (int step = 1; step <= 320; ++step) {
      system.step(dt, 0.0, 0.0);
      t.push_back(step * dt);
      u.push_back(system.displacement_full()[2 * probe]);
    }
    std::vector<double> crossings;
    for (std::size_t i = 1; i < u.size(); ++i)
      if ((u[i - 1] < 0.0) != (u[i] < 0.0))
        crossings.push_back(t[i - 1] + dt * u[i - 1] / (u[i - 1] - u[i]));
    const double period =
        2.0 * (crossings.back() - crossings.front()) / (crossings.size() - 1);
    c.require(std::abs(period - T) <= 0.01 * T,
              "free-vibration period " + fmt(period, 5) + " s vs " +
                  fmt(T, 5) + " (tol 1%)");
  }

  {  // harmonic base motion amplification vs the damped shear beam
    Model model = make_column(16);
    const double f1 = lowest_frequency(model).frequency_hz;
    const double fe = 0.5 * f1, zeta = 0.05, A = 0.5;
    const auto ray = rayleigh_coefficients(zeta, f1, fe);
    DynamicSolveSettings settings;
    settings.rayleigh_a0 = ray.a0;
    settings.rayleigh_a1 = ray.a1;
    NewmarkSystem system(model, settings);
    system.initialize(0.0);
    const int probe = top_of(model);
    const double dt = 1.0 / (200.0 * fe);
    double ug_prev = 0.0, amp = 0.0;
    const double t_total = 12.0;
    const int n = static_cast<int>(t_total / dt);
    for (int step = 1; step <= n; ++step) {
      const double t = step * dt;
      const double ug = A * std::sin(2.0 * kPi * fe * t);
      system.step(dt, ug_prev, ug);
      ug_prev = ug;
      if (t >= t_total - 2.0 / fe)
        amp = std::max(amp,
                       std::abs(system.acceleration_slot(2 * probe) + ug));
    }
    const double G = soil.elastic.shear_modulus(), rho = soil.elastic.rho;
    const double w = 2.0 * kPi * fe;
    const std::complex<double> i(0.0, 1.0);
    const std::complex<double> Gd = G * (1.0 + i * w * ray.a1);
    const std::complex<double> k =
        std::sqrt(rho * (w * w - i * w * ray.a0) / Gd);
    const std::complex<double> U_top =
        A / (w * w - i * w * ray.a0) * (1.0 - 1.0 / std::cos(k * 15.0));
    const double amp_exact = std::abs(A - w * w * U_top);
    c.require(std::abs(amp - amp_exact) <= 0.05 * amp_exact,
              "amplification " + fmt(amp, 5) + " vs shear-beam " +
                  fmt(amp_exact, 5) + " (tol 5%)");
  }
  return c;
}

Check criterion8_rayleigh_exactness() {
  Check c;
  const auto ray = rayleigh_coefficients(0.01, 4.8, 2.0);
  const double z1 = ray.zeta_at(4.8), z2 = ray.zeta_at(2.0);
  c.require(std::abs(z1 - 0.01) <= 1e-12 && std::abs(z2 - 0.01) <= 1e-12,
            "zeta(f1) = " + fmt(z1, 15) + ", zeta(f2) = " + fmt(z2, 15) +
                " (target 0.01, tol 1e-12)");
  return c;
}

Check criterion9_directional_reproduction() {
  Check c;
  RunConfig cfg;
  cfg.site.element_size_min = 0.6;
  cfg.site.element_size_max = 1.8;

  std::map<double, RunSummary> runs;
  for (double pga : {0.05, 0.15, 0.30}) {
    SynthesisSpec spec;
    spec.amplitude_g = pga;
    spec.frequency_hz = 2.0;
    spec.duration_s = 8.0;
    spec.dt = 0.005;
    const auto motion = synthesize_motion(spec, cfg.dynamics.cutoff_hz);
    runs[pga] = run_dynamic_pipeline(cfg, motion).summary;
  }
  const auto& low = runs.at(0.05);
  const auto& mid = runs.at(0.15);
  const auto& high = runs.at(0.30);

  c.require(mid.a_active_matches_mo(0.35),
            "(a) 0.15g toward-wall mean |K_fe-K_mo|/K_mo = " +
                fmt(mid.active_mean_abs_dev_vs_mo_toward) + " (tol 0.35)");
  c.require(high.b_active_below_mo_at_strong_shaking(),
            "(b) 0.30g fraction of active peaks below K_mo = " +
                fmt(high.active_fraction_below_mo_toward) + " (need >= 0.5)");
  c.require(mid.c_away_exceeds_toward(),
            "(c) 0.15g mean K toward-face " + fmt(mid.mean_K_toward_wall) +
                " > away " + fmt(mid.mean_K_away_from_wall));
  c.require(low.e_passive_below_mo(),
            "(e) 0.05g passive rows below K_pe: fraction = " +
                fmt(low.passive_fraction_below_mo));
  c.require(low.peak_passive_K <= mid.peak_passive_K &&
                mid.peak_passive_K <= high.peak_passive_K,
            "(f) peak passive K nondecreasing: " + fmt(low.peak_passive_K) +
                " <= " + fmt(mid.peak_passive_K) + " <= " +
                fmt(high.peak_passive_K));
  c.require(mid.static_Y_over_H_active >= 0.20 &&
                mid.static_Y_over_H_active <= 0.33,
            "static Y/H = " + fmt(mid.static_Y_over_H_active) +
                " (band [0.20, 0.33])");
  c.require(low.mean_dynamic_Y_over_H_active >= 0.20 &&
                low.mean_dynamic_Y_over_H_active <= 0.30,
            "0.05g dynamic Y/H mean = " +
                fmt(low.mean_dynamic_Y_over_H_active) +
                " (band [0.20, 0.30])");
  return c;
}

Check criterion10_arithmetic_postprocessing() {
  Check c;
  std::mt19937 rng(2);
  std::uniform_real_distribution<double> U(0.1, 1.0);
  double worst_K = 0.0, worst_Y = 0.0;
  for (int k = 0; k < 100000; ++k) {
    const double P = 500.0 * U(rng), g = 25.0 * U(rng), H = 12.0 * U(rng),
                 kv = 0.5 * U(rng);
    const double expect = 2.0 * P / (g * H * H * (1.0 - kv));
    worst_K = std::max(worst_K, std::abs(back_calculate_K(P, g, H, kv) - expect) /
                                    expect);

    WallProfile prof;
    prof.height_H = 6.0;
    double num = 0.0, den = 0.0;
    for (int i = 0; i < 6; ++i) {
      prof.y.push_back(i + 0.5);
      prof.h.push_back(1.0);
      prof.sigma.push_back(100.0 * U(rng));
      num += prof.h[i] * prof.sigma[i] * prof.y[i];
      den += prof.h[i] * prof.sigma[i];
    }
    worst_Y = std::max(worst_Y, std::abs(application_height(prof) - num / den) /
                                    (num / den));
  }
  c.require(worst_K <= 1e-12 && worst_Y <= 1e-12,
            "max relative error: K " + fmt(worst_K) + ", Y " + fmt(worst_Y) +
                " over 1e5 cases (tol 1e-12)");
  return c;
}

}  // namespace

int main() {
  struct Entry {
    int id;
    const char* name;
    std::function<Check()> run;
  };
  const std::vector<Entry> entries = {
      {1, "analytical exactness vs wedge oracle", criterion1_analytical_exactness},
      {2, "static Coulomb limit at desk scale", criterion2_static_coulomb_limit},
      {3, "geostatic self-equilibrium", criterion3_geostatic_self_equilibrium},
      {4, "modal estimate", criterion4_modal_estimate},
      {5, "wave-resolution rule", criterion5_wave_resolution},
      {6, "constitutive strength", criterion6_constitutive_strength},
      {7, "dynamics fidelity", criterion7_dynamics_fidelity},
      {8, "Rayleigh exactness", criterion8_rayleigh_exactness},
      {9, "end-to-end directional reproduction", criterion9_directional_reproduction},
      {10, "arithmetic post-processing", criterion10_arithmetic_postprocessing},
  };

  int failures = 0;
  for (const auto& e : entries) {
    const double t0 = now_s();
    Check c;
    try {
      c = e.run();
    } catch (const std::exception& ex) {
      c.pass = false;
      c.detail = std::string("exception: ") + ex.what();
    }
    const double elapsed = now_s() - t0;
    std::printf("[%s] criterion %d: %s — %s (%.1f s)\n",
                c.pass ? "PASS" : "FAIL", e.id, e.name, c.detail.c_str(),
                elapsed);
    std::fflush(stdout);
    if (!c.pass) ++failures;
  }
  if (failures == 0)
    std::printf("all %zu acceptance criteria passed\n", entries.size());
  else
    std::printf("%d acceptance criteria FAILED\n", failures);
  return failures;
}
