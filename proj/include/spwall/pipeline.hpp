#pragma once

// End-to-end orchestration: build the site model, run the construction
// stages, shake it, and back-calculate lateral earth pressure coefficients
// and resultant application heights at the peaks of the wedge-probe
// inertia coefficient, against the closed-form models.
//
// Sign conventions: the backfill lies on +x of the wall. The per-side
// inertia coefficient is k_h(t) = -a_probe(t)/g with the probe
// acceleration measured positive away from the backfill, i.e. positive
// k_h means inertia toward the retained-side face. Both sides' closed-form
// coefficients take this same signed value.

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <optional>
#include <sstream>

#include "spwall/config.hpp"
#include "spwall/dynamic_solver.hpp"
#include "spwall/modal.hpp"
#include "spwall/pressure_models.hpp"

namespace spwall {

enum class Side { Active, Passive };

inline const char* side_name(Side s) {
  return s == Side::Active ? "active" : "passive";
}

struct WallProfile {
  Side side = Side::Active;
  double base_y = 0.0;    // elevation of the integration base
  double height_H = 0.0;  // integration height of this side
  std::vector<double> y;      // element centroid heights above base_y
  std::vector<double> h;      // tributary (element face) lengths
  std::vector<double> sigma;  // compression-positive horizontal stress, kPa

  double resultant() const {
    double P = 0.0;
    for (std::size_t i = 0; i < h.size(); ++i) P += h[i] * sigma[i];
    return P;
  }
};

// K = 2 P / (gamma H^2 (1 - k_v)).
inline double back_calculate_K(double P, double gamma_t, double H,
                               double k_v) {
  if (!(H > 0.0)) throw ConfigError("height must be positive");
  if (k_v >= 1.0) throw ConfigError("k_v must be < 1");
  return 2.0 * P / (gamma_t * H * H * (1.0 - k_v));
}

// Stress-weighted centroid height of the resultant.
inline double application_height(const WallProfile& profile) {
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < profile.h.size(); ++i) {
    num += profile.h[i] * profile.sigma[i] * profile.y[i];
    den += profile.h[i] * profile.sigma[i];
  }
  if (std::abs(den) < 1e-12)
    throw SolverError("zero resultant: application height undefined");
  return num / den;
}

struct Peak {
  int index = 0;
  double t = 0.0;
  double k_h = 0.0;
};

// Strict local extrema above the noise floor, both signs.
inline std::vector<Peak> select_peaks(const std::vector<double>& series,
                                      double dt, double noise_floor = 0.01) {
  std::vector<Peak> peaks;
  for (std::size_t i = 1; i + 1 < series.size(); ++i) {
    const double dl = series[i] - series[i - 1];
    const double dr = series[i + 1] - series[i];
    if (dl * dr < 0.0 && std::abs(series[i]) >= noise_floor)
      peaks.push_back({static_cast<int>(i), i * dt, series[i]});
  }
  return peaks;
}

// ---------------------------------------------------------------------
// Wall-adjacent pressure extraction.

namespace detail {

struct AdjacentColumn {
  std::vector<int> elements;  // wall-adjacent soil elements, bottom-up
  std::vector<double> y_centroid;
  std::vector<double> h;
  double base_y = 0.0;
  double height_H = 0.0;
  double dredge_y = 0.0;
};

// Soil elements sharing a face with the wall column on the given side,
// over the full face: the active side spans the whole embedded wall
// length (resultant heights integrate from the wall base), the passive
// side spans the embedment.
inline AdjacentColumn wall_adjacent_column(const Model& model,
                                           const SiteConfig& site,
                                           Side side) {
  AdjacentColumn col;
  const double x_face = side == Side::Active ? site.wall_x1() : site.wall_x0();
  col.dredge_y = site.dredge_y();
  double y_lo, y_hi;
  if (side == Side::Active) {
    col.base_y = site.wall_base_y();
    y_lo = site.wall_base_y();
    y_hi = site.surface_y();
    col.height_H = site.surface_y() - site.wall_base_y();
  } else {
    col.base_y = site.wall_base_y();
    y_lo = site.wall_base_y();
    y_hi = site.dredge_y();
    col.height_H = site.embedment;
  }
  // The soil element's left face touches the wall on the active side, its
  // right face on the passive side.
  const int face_active[3] = {0, 3, 7};
  const int face_passive[3] = {1, 2, 5};
  const int* face = side == Side::Active ? face_active : face_passive;
  std::vector<std::pair<double, std::pair<int, double>>> found;
  for (int e = 0; e < model.n_elements(); ++e) {
    if (!model.active[e]) continue;
    if (model.mesh.elements[e].region.kind == Region::Kind::Wall) continue;
    bool on_face = true;
    for (int k = 0; k < 3; ++k) {
      const int n = model.mesh.elements[e].nodes[face[k]];
      if (std::abs(model.mesh.nodes[n](0) - x_face) > 1e-9) on_face = false;
    }
    if (!on_face) continue;
    const auto c = model.mesh.element_centroid(e);
    if (c(1) < y_lo - 1e-9 || c(1) > y_hi + 1e-9) continue;
    const int n1 = model.mesh.elements[e].nodes[face[0]];
    const int n2 = model.mesh.elements[e].nodes[face[1]];
    const double h =
        std::abs(model.mesh.nodes[n1](1) - model.mesh.nodes[n2](1));
    found.push_back({c(1), {e, h}});
  }
  std::sort(found.begin(), found.end());
  for (const auto& [yc, eh] : found) {
    col.elements.push_back(eh.first);
    col.y_centroid.push_back(yc);
    col.h.push_back(eh.second);
  }
  return col;
}

// Build a profile from recorded (or current) element stresses. `for_K`
// restricts the active side to the retained height above the dredge line
// (the coefficient back-calculation band); resultant heights use the full
// face from the wall base.
inline WallProfile profile_from_stresses(const AdjacentColumn& col, Side side,
                                         const std::vector<double>& sigma,
                                         const SiteConfig& site, bool for_K) {
  WallProfile p;
  p.side = side;
  if (side == Side::Active && for_K) {
    p.base_y = col.dredge_y;
    p.height_H = site.retained_height;
  } else {
    p.base_y = col.base_y;
    p.height_H = col.height_H;
  }
  for (std::size_t i = 0; i < col.elements.size(); ++i) {
    if (col.y_centroid[i] < p.base_y) continue;
    p.y.push_back(col.y_centroid[i] - p.base_y);
    p.h.push_back(col.h[i]);
    p.sigma.push_back(sigma[i]);
  }
  return p;
}

inline std::vector<double> column_sigma(const Model& model,
                                        const AdjacentColumn& col) {
  std::vector<double> s;
  s.reserve(col.elements.size());
  // Tension-positive internal stress; report compression positive.
  for (int e : col.elements)
    s.push_back(-model.element_mean_stress(e)(0));
  return s;
}

}  // namespace detail

// Pressure profile of the committed state on one side of the wall, over
// the coefficient band (Eq. 5 use). `full_face` instead returns the whole
// wall-adjacent column from the wall base (Eq. 6 use).
inline WallProfile wall_pressure_profile(const Model& model,
                                         const SiteConfig& site, Side side,
                                         bool full_face = false) {
  const auto col = detail::wall_adjacent_column(model, site, side);
  return detail::profile_from_stresses(col, side, detail::column_sigma(model, col),
                                       site, !full_face);
}

// ---------------------------------------------------------------------
// Comparison rows and run summary.

struct ComparisonRow {
  double time = 0.0;
  Side side = Side::Active;
  double k_h = 0.0;
  double K_fe = 0.0;
  std::optional<double> K_mo;  // absent: outside the validity domain
  double K_wood = 0.0;         // K0 + rigid-wall increment 2 Fp k_h
  double Y = 0.0;
  double Y_over_H = 0.0;
  std::string motion;
};

struct RunSummary {
  // Active side statistics over peak rows. The demand-side comparisons
  // (observations about K_fe tracking the closed form) are evaluated on
  // the toward-wall peaks (k_h > 0), where the wedge limit state the
  // closed form assumes is actually being driven; away-from-wall peaks
  // retain locked-in plastic pressures far above the transiently reduced
  // closed-form value and are reported separately.
  int active_rows = 0;
  double active_mean_abs_dev_vs_mo = 0.0;         // all valid rows
  double active_mean_abs_dev_vs_mo_toward = 0.0;  // k_h > 0 rows
  double active_fraction_below_mo_toward = 0.0;
  double mean_K_toward_wall = 0.0;   // k_h > 0 peaks
  double mean_K_away_from_wall = 0.0;  // k_h < 0 peaks
  int active_above_mo = 0, active_below_mo = 0;
  // Passive side.
  int passive_rows = 0;
  double passive_fraction_below_mo = 0.0;
  double peak_passive_K = 0.0;
  // Application heights over the full wall face.
  double static_Y_over_H_active = 0.0;
  double mean_dynamic_Y_over_H_active = 0.0;

  // Directional observation flags.
  bool a_active_matches_mo(double tol = 0.35) const {
    return active_rows > 0 && active_mean_abs_dev_vs_mo_toward <= tol;
  }
  bool b_active_below_mo_at_strong_shaking() const {
    return active_fraction_below_mo_toward >= 0.5;
  }
  bool c_away_exceeds_toward() const {
    return mean_K_toward_wall > mean_K_away_from_wall;
  }
  bool d_active_scatters_around_mo() const {
    return active_above_mo > 0 && active_below_mo > 0;
  }
  bool e_passive_below_mo() const {
    return passive_rows > 0 && passive_fraction_below_mo >= 1.0;
  }
  bool g_passive_one_sided() const {
    return passive_fraction_below_mo >= 0.8;
  }
};
// Note on (c): positive k_h acts toward the retained-side face, which is
// the paper's "away from backfill" inertia labelling.

struct StaticReport {
  std::vector<StageResult> stages;
  WallProfile active, passive;  // coefficient bands (Eq. 5)
  WallProfile active_full;      // full face from the wall base (Eq. 6)
  double P_active = 0.0, P_passive = 0.0;
  double K_active = 0.0, K_passive = 0.0;
  double Y_active = 0.0, Y_passive = 0.0;  // heights above the face base
};

struct RunResult {
  double f1_hz = 0.0;
  double f2_hz = 0.0;
  RayleighCoefficients rayleigh;
  int element_count = 0;
  int probe_node_active = -1, probe_node_passive = -1;
  StaticReport static_report;
  std::vector<double> time;
  std::vector<double> kh_active, kh_passive;
  std::vector<ComparisonRow> rows;       // static rows first, then peaks
  std::vector<Peak> peaks_active, peaks_passive;
  RunSummary summary;
  std::string motion_label;
  double dt = 0.0;
};

// ---------------------------------------------------------------------
// Model construction and the static phase.

inline Model build_site_model(const RunConfig& cfg) {
  Model model(build_site_mesh(cfg.site),
              {cfg.soil_material(), cfg.wall_material()});
  for (int id : model.mesh.boundary.base) {
    model.constraints.push_back({id, 0, 0.0});
    model.constraints.push_back({id, 1, 0.0});
  }
  for (int id : model.mesh.boundary.left)
    model.constraints.push_back({id, 0, 0.0});
  for (int id : model.mesh.boundary.right)
    model.constraints.push_back({id, 0, 0.0});
  return model;
}

inline StaticReport run_static_phase(Model& model, const RunConfig& cfg) {
  geostatic_initialize(model, cfg.k0_profile());
  StaticReport report;
  report.stages = run_stages(model, stage_plan(model.mesh, cfg.site),
                             cfg.static_settings());
  report.active = wall_pressure_profile(model, cfg.site, Side::Active);
  report.passive = wall_pressure_profile(model, cfg.site, Side::Passive);
  report.active_full =
      wall_pressure_profile(model, cfg.site, Side::Active, /*full_face=*/true);
  report.P_active = report.active.resultant();
  report.P_passive = report.passive.resultant();
  const double g_t = cfg.soil.unit_weight_kn_m3;
  report.K_active =
      back_calculate_K(report.P_active, g_t, report.active.height_H, 0.0);
  report.K_passive =
      back_calculate_K(report.P_passive, g_t, report.passive.height_H, 0.0);
  report.Y_active = application_height(report.active_full);
  report.Y_passive = application_height(report.passive);
  return report;
}

// Node nearest the centroid of the static critical wedge on each side
// (probe for the sliding-wedge inertia coefficient).
inline int wedge_probe_node(const Model& model, const RunConfig& cfg,
                            Side side) {
  const auto params = cfg.analytical_params(side == Side::Active);
  const double alpha = wedge_critical_angle(
      params, {0.0, 0.0},
      side == Side::Active ? PressureMode::Active : PressureMode::Passive);
  Eigen::Vector2d centroid;
  if (side == Side::Active) {
    const double H = cfg.site.retained_height;
    const Eigen::Vector2d apex(cfg.site.wall_x1(), cfg.site.dredge_y());
    const Eigen::Vector2d crest(cfg.site.wall_x1(), cfg.site.surface_y());
    const Eigen::Vector2d toe(cfg.site.wall_x1() + H / std::tan(alpha),
                              cfg.site.surface_y());
    centroid = (apex + crest + toe) / 3.0;
  } else {
    const double D = cfg.site.embedment;
    const Eigen::Vector2d apex(cfg.site.wall_x0(), cfg.site.wall_base_y());
    const Eigen::Vector2d crest(cfg.site.wall_x0(), cfg.site.dredge_y());
    const Eigen::Vector2d toe(cfg.site.wall_x0() - D / std::tan(alpha),
                              cfg.site.dredge_y());
    centroid = (apex + crest + toe) / 3.0;
  }
  const auto used = model.used_nodes();
  int best = -1;
  double best_d = 1e30;
  for (std::size_t n = 0; n < model.mesh.nodes.size(); ++n) {
    if (!used[n]) continue;
    const double d = (model.mesh.nodes[n] - centroid).norm();
    if (d < best_d) {
      best_d = d;
      best = static_cast<int>(n);
    }
  }
  if (best < 0) throw SolverError("no active node near the wedge centroid");
  return best;
}

// ---------------------------------------------------------------------
// Checkpoints: plain text, node displacements plus per-point stresses.

inline void write_checkpoint(const Model& model, const std::string& path,
                             const std::string& tag) {
  std::ofstream os(path);
  if (!os) throw ConfigError("cannot write checkpoint: " + path);
  os << std::setprecision(17);
  os << "checkpoint " << tag << "\n";
  os << "nodes " << model.mesh.nodes.size() << "\n";
  for (std::size_t n = 0; n < model.mesh.nodes.size(); ++n)
    os << model.u[2 * n] << " " << model.u[2 * n + 1] << "\n";
  os << "elements " << model.mesh.elements.size() << "\n";
  for (int e = 0; e < model.n_elements(); ++e) {
    os << static_cast<int>(model.active[e]);
    for (int q = 0; q < 9; ++q) {
      const auto& s = model.states[e][q].stress;
      os << " " << s(0) << " " << s(1) << " " << s(2) << " " << s(3);
    }
    os << "\n";
  }
}

inline std::string load_checkpoint(Model& model, const std::string& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot read checkpoint: " + path);
  std::string word, tag;
  is >> word >> tag;
  if (word != "checkpoint") throw ConfigError("not a checkpoint: " + path);
  std::size_t n_nodes = 0, n_elems = 0;
  is >> word >> n_nodes;
  if (word != "nodes" || n_nodes != model.mesh.nodes.size())
    throw ConfigError("checkpoint does not match the model: " + path);
  for (std::size_t n = 0; n < n_nodes; ++n)
    is >> model.u[2 * n] >> model.u[2 * n + 1];
  is >> word >> n_elems;
  if (word != "elements" || n_elems != model.mesh.elements.size())
    throw ConfigError("checkpoint does not match the model: " + path);
  for (std::size_t e = 0; e < n_elems; ++e) {
    int act = 0;
    is >> act;
    model.active[e] = static_cast<std::uint8_t>(act);
    for (int q = 0; q < 9; ++q) {
      auto& s = model.states[e][q].stress;
      is >> s(0) >> s(1) >> s(2) >> s(3);
    }
  }
  if (!is) throw ConfigError("truncated checkpoint: " + path);
  return tag;
}

// ---------------------------------------------------------------------
// The full dynamic pipeline.

namespace detail {

inline std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.10g", v);
  return buf;
}

inline void write_comparison_csv(const std::string& path,
                                 const std::vector<ComparisonRow>& rows) {
  std::ofstream os(path);
  os << "time,side,k_h,K_fe,K_mo,K_wood,Y,Y_over_H,motion\n";
  for (const auto& r : rows) {
    os << fmt(r.time) << "," << side_name(r.side) << "," << fmt(r.k_h) << ","
       << fmt(r.K_fe) << "," << (r.K_mo ? fmt(*r.K_mo) : std::string("exceeded"))
       << "," << fmt(r.K_wood) << "," << fmt(r.Y) << "," << fmt(r.Y_over_H)
       << "," << r.motion << "\n";
  }
}

inline void write_profiles_csv(
    const std::string& path,
    const std::vector<std::pair<ComparisonRow, WallProfile>>& snapshots) {
  std::ofstream os(path);
  os << "time,side,k_h,y_i,h_i,sigma_i,motion\n";
  for (const auto& [row, prof] : snapshots) {
    for (std::size_t i = 0; i < prof.y.size(); ++i)
      os << fmt(row.time) << "," << side_name(row.side) << ","
         << fmt(row.k_h) << "," << fmt(prof.y[i]) << "," << fmt(prof.h[i])
         << "," << fmt(prof.sigma[i]) << "," << row.motion << "\n";
  }
}

}  // namespace detail

// Run the complete pipeline for one motion. If out_dir is non-empty the
// external files (comparison.csv, pressure_profiles.csv, run_meta,
// checkpoints) are written there.
inline RunResult run_dynamic_pipeline(const RunConfig& cfg,
                                      const GroundMotion& motion_in,
                                      const std::string& out_dir = "",
                                      unsigned seed = 1) {
  RunResult result;
  result.motion_label = motion_in.label;

  if (!out_dir.empty()) std::filesystem::create_directories(out_dir);

  Model model = build_site_model(cfg);
  result.element_count = model.n_elements();
  result.static_report = run_static_phase(model, cfg);
  if (!out_dir.empty())
    write_checkpoint(model, out_dir + "/checkpoint_static.txt",
                     "post_construction");

  // Motion conditioning: low-pass at the analysis cutoff.
  GroundMotion motion = motion_in;
  if (cfg.dynamics.cutoff_hz > 0.0 &&
      cfg.dynamics.cutoff_hz < 0.5 / motion.dt)
    motion = lowpass_filter(motion, cfg.dynamics.cutoff_hz);

  // Damping targets: lowest model frequency and the motion's predominant
  // frequency unless the config pins them.
  result.f1_hz = cfg.damping.f1_hz > 0.0
                     ? cfg.damping.f1_hz
                     : lowest_frequency(model, seed).frequency_hz;
  result.f2_hz = cfg.damping.f2_hz > 0.0
                     ? cfg.damping.f2_hz
                     : predominant_frequency(motion, cfg.dynamics.cutoff_hz);
  result.rayleigh =
      rayleigh_coefficients(cfg.damping.ratio, result.f1_hz, result.f2_hz);

  DynamicSolveSettings settings;
  settings.newmark_beta = cfg.dynamics.newmark_beta;
  settings.newmark_gamma = cfg.dynamics.newmark_gamma;
  settings.dt = cfg.dynamics.dt;
  settings.dt_min = cfg.dynamics.dt_min;
  settings.rayleigh_a0 = result.rayleigh.a0;
  settings.rayleigh_a1 = result.rayleigh.a1;
  settings.boundary =
      cfg.dynamics.lateral_boundary == "tied"
          ? DynamicSolveSettings::LateralBoundary::Tied
          : DynamicSolveSettings::LateralBoundary::DashpotFreeField;

  result.probe_node_active = wedge_probe_node(model, cfg, Side::Active);
  result.probe_node_passive = wedge_probe_node(model, cfg, Side::Passive);

  const auto col_active =
      detail::wall_adjacent_column(model, cfg.site, Side::Active);
  const auto col_passive =
      detail::wall_adjacent_column(model, cfg.site, Side::Passive);

  // Per-step series recorded during integration.
  std::vector<std::vector<double>> sxx_active, sxx_passive;
  const int checkpoint_every = cfg.dynamics.checkpoint_every;
  int checkpoint_id = 0;

  newmark_dynamic_solve(
      model, motion, settings, cfg.k0_profile(), [&](const StepRecord& rec) {
        result.time.push_back(rec.t);
        const double ax_a =
            rec.system->acceleration_slot(2 * result.probe_node_active) +
            rec.base_accel;
        const double ax_p =
            rec.system->acceleration_slot(2 * result.probe_node_passive) +
            rec.base_accel;
        // Positive k_h: inertia toward the retained-side face (-x), i.e.
        // probe acceleration toward the backfill (+x).
        result.kh_active.push_back(ax_a / kGravity);
        result.kh_passive.push_back(ax_p / kGravity);
        std::vector<double> sa, sp;
        for (int e : col_active.elements)
          sa.push_back(-rec.model->element_mean_stress(e)(0));
        for (int e : col_passive.elements)
          sp.push_back(-rec.model->element_mean_stress(e)(0));
        sxx_active.push_back(std::move(sa));
        sxx_passive.push_back(std::move(sp));
        if (!out_dir.empty() && checkpoint_every > 0 &&
            rec.step % checkpoint_every == 0) {
          write_checkpoint(*rec.model,
                           out_dir + "/checkpoint_step_" +
                               std::to_string(rec.step) + ".txt",
                           "step_" + std::to_string(rec.step));
          ++checkpoint_id;
        }
      });
  result.dt = settings.dt > 0.0 ? settings.dt : motion.dt;

  // Static rows, then one row per probe peak per side.
  std::vector<std::pair<ComparisonRow, WallProfile>> snapshots;
  const double gamma_t = cfg.soil.unit_weight_kn_m3;
  const double k0 = cfg.soil.k0;
  const double Fp = cfg.analysis.wood_factor;

  auto make_row = [&](Side side, double t, double kh, const WallProfile& prof_K,
                      const WallProfile& prof_Y) {
    ComparisonRow row;
    row.time = t;
    row.side = side;
    row.k_h = kh;
    row.motion = result.motion_label;
    row.K_fe =
        back_calculate_K(prof_K.resultant(), gamma_t, prof_K.height_H, 0.0);
    const auto params = cfg.analytical_params(side == Side::Active);
    try {
      row.K_mo = mo_coefficient(
          params, {kh, 0.0},
          side == Side::Active ? PressureMode::Active : PressureMode::Passive);
    } catch (const std::invalid_argument&) {
      row.K_mo.reset();
    } catch (const ConfigError&) {
      row.K_mo.reset();
    }
    row.K_wood = k0 + 2.0 * Fp * kh;
    row.Y = application_height(prof_Y);
    row.Y_over_H = row.Y / prof_Y.height_H;
    return row;
  };

  result.rows.push_back(make_row(Side::Active, 0.0, 0.0,
                                 result.static_report.active,
                                 result.static_report.active_full));
  snapshots.push_back({result.rows.back(), result.static_report.active_full});
  result.rows.push_back(make_row(Side::Passive, 0.0, 0.0,
                                 result.static_report.passive,
                                 result.static_report.passive));
  snapshots.push_back({result.rows.back(), result.static_report.passive});

  result.peaks_active =
      select_peaks(result.kh_active, result.dt, cfg.analysis.noise_floor);
  result.peaks_passive =
      select_peaks(result.kh_passive, result.dt, cfg.analysis.noise_floor);

  for (const auto& pk : result.peaks_active) {
    const auto prof_K = detail::profile_from_stresses(
        col_active, Side::Active, sxx_active[pk.index], cfg.site, true);
    const auto prof_Y = detail::profile_from_stresses(
        col_active, Side::Active, sxx_active[pk.index], cfg.site, false);
    result.rows.push_back(make_row(Side::Active, result.time[pk.index],
                                   pk.k_h, prof_K, prof_Y));
    snapshots.push_back({result.rows.back(), prof_Y});
  }
  for (const auto& pk : result.peaks_passive) {
    const auto prof = detail::profile_from_stresses(
        col_passive, Side::Passive, sxx_passive[pk.index], cfg.site, true);
    result.rows.push_back(make_row(Side::Passive, result.time[pk.index],
                                   pk.k_h, prof, prof));
    snapshots.push_back({result.rows.back(), prof});
  }

  // Summary statistics over the peak rows.
  RunSummary& s = result.summary;
  s.static_Y_over_H_active = result.static_report.Y_active /
                             result.static_report.active_full.height_H;
  double dev_sum = 0.0, dev_sum_tw = 0.0;
  int dev_n = 0, dev_n_tw = 0, below_tw = 0, n_tw = 0, n_aw = 0;
  double k_tw = 0.0, k_aw = 0.0, yh_sum = 0.0;
  int yh_n = 0;
  for (const auto& row : result.rows) {
    if (row.time == 0.0) continue;
    if (row.side == Side::Active) {
      ++s.active_rows;
      if (row.K_mo) {
        const double dev = std::abs(row.K_fe - *row.K_mo) / *row.K_mo;
        dev_sum += dev;
        ++dev_n;
        if (row.K_fe < *row.K_mo)
          ++s.active_below_mo;
        else
          ++s.active_above_mo;
        if (row.k_h > 0.0) {
          dev_sum_tw += dev;
          ++dev_n_tw;
          if (row.K_fe < *row.K_mo) ++below_tw;
        }
      }
      if (row.k_h > 0.0) {
        k_tw += row.K_fe;
        ++n_tw;
      } else {
        k_aw += row.K_fe;
        ++n_aw;
      }
      yh_sum += row.Y_over_H;
      ++yh_n;
    } else {
      ++s.passive_rows;
      if (row.K_mo && row.K_fe < *row.K_mo) s.passive_fraction_below_mo += 1.0;
      s.peak_passive_K = std::max(s.peak_passive_K, row.K_fe);
    }
  }
  if (dev_n > 0) s.active_mean_abs_dev_vs_mo = dev_sum / dev_n;
  if (dev_n_tw > 0) {
    s.active_mean_abs_dev_vs_mo_toward = dev_sum_tw / dev_n_tw;
    s.active_fraction_below_mo_toward =
        static_cast<double>(below_tw) / dev_n_tw;
  }
  if (n_tw > 0) s.mean_K_toward_wall = k_tw / n_tw;
  if (n_aw > 0) s.mean_K_away_from_wall = k_aw / n_aw;
  if (yh_n > 0) s.mean_dynamic_Y_over_H_active = yh_sum / yh_n;
  if (s.passive_rows > 0) s.passive_fraction_below_mo /= s.passive_rows;

  if (!out_dir.empty()) {
    detail::write_comparison_csv(out_dir + "/comparison.csv", result.rows);
    detail::write_profiles_csv(out_dir + "/pressure_profiles.csv", snapshots);
    std::ofstream meta(out_dir + "/run_meta");
    meta << "# run metadata\n";
    meta << "motion " << result.motion_label << "\n";
    meta << "dt " << detail::fmt(result.dt) << "\n";
    meta << "filter lowpass_butterworth4_zero_phase cutoff_hz "
         << detail::fmt(cfg.dynamics.cutoff_hz) << "\n";
    meta << "f1_hz " << detail::fmt(result.f1_hz) << "\n";
    meta << "f2_hz " << detail::fmt(result.f2_hz) << "\n";
    meta << "rayleigh_a0 " << detail::fmt(result.rayleigh.a0) << " a1 "
         << detail::fmt(result.rayleigh.a1) << "\n";
    meta << "element_count " << result.element_count << "\n";
    meta << "probe_node_active " << result.probe_node_active
         << " probe_node_passive " << result.probe_node_passive << "\n";
    meta << "static K_active " << detail::fmt(result.static_report.K_active)
         << " K_passive " << detail::fmt(result.static_report.K_passive)
         << " Y_over_H_active "
         << detail::fmt(s.static_Y_over_H_active) << "\n";
    meta << "summary active_rows " << s.active_rows << " passive_rows "
         << s.passive_rows << "\n";
    meta << "summary active_mean_abs_dev_vs_mo "
         << detail::fmt(s.active_mean_abs_dev_vs_mo) << " toward_only "
         << detail::fmt(s.active_mean_abs_dev_vs_mo_toward) << "\n";
    meta << "summary mean_K_toward_wall "
         << detail::fmt(s.mean_K_toward_wall) << " mean_K_away_from_wall "
         << detail::fmt(s.mean_K_away_from_wall) << "\n";
    meta << "summary peak_passive_K " << detail::fmt(s.peak_passive_K)
         << "\n";
    meta << "note steel parameters parsed but unused (elastic wall)\n";
    meta << "config_echo\n" << echo_config(cfg) << "\n";
  }
  return result;
}

}  // namespace spwall
