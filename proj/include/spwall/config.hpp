#pragma once

// Run configuration: JSON-backed, defaulting to the studied site (geometry
// and material tables) so a bare config plus one motion reproduces the
// reference model. Parsed configs echo back into run_meta verbatim.

#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "spwall/mesh.hpp"
#include "spwall/model.hpp"
#include "spwall/motion.hpp"
#include "spwall/pressure_models.hpp"
#include "spwall/static_solver.hpp"

namespace spwall {

using nlohmann::json;

struct SoilConfig {
  double youngs_modulus_mpa = 163.13;
  double poissons_ratio = 0.26;
  double density_kg_m3 = 2000.0;
  double unit_weight_kn_m3 = 19.6;
  double friction_angle_deg = 40.0;
  double dilation_angle_deg = 0.0;
  double cohesion_kpa = 0.2;  // numerical cohesion for a cohesionless fill
  double k0 = 0.36;
  double wall_friction_angle_deg = 0.0;  // analytical comparison curves only
  double tension_cap_kpa = -1.0;         // <0: c cot(phi)
};

// Elastic modulus of concrete from its compressive strength, MPa.
inline double concrete_modulus_mpa(double fc_mpa) {
  return 5000.0 * std::sqrt(fc_mpa);
}

struct WallConfig {
  double youngs_modulus_mpa = 30000.0;
  bool ec_from_fc = false;  // derive the modulus from fc instead
  double fc_mpa = 27.6;
  double poissons_ratio = 0.2;
  double density_kg_m3 = 2400.0;
  double unit_weight_kn_m3 = 23.6;
  // Parsed and echoed; the wall is elastic so reinforcement never enters.
  double steel_yield_mpa = 413.4;
  double steel_modulus_gpa = 200.0;

  double modulus_mpa() const {
    return ec_from_fc ? concrete_modulus_mpa(fc_mpa) : youngs_modulus_mpa;
  }
};

struct DampingConfig {
  double ratio = 0.01;
  double f1_hz = 0.0;  // 0: lowest model frequency
  double f2_hz = 0.0;  // 0: predominant motion frequency
};

struct DynamicsConfig {
  double newmark_beta = 0.25;
  double newmark_gamma = 0.5;
  double dt = 0.0;  // 0: motion dt
  double dt_min = 1e-5;
  std::string lateral_boundary = "dashpot_freefield";  // or "tied"
  double cutoff_hz = 15.0;
  int checkpoint_every = 0;  // steps; 0 disables dynamic checkpoints
};

struct StaticsConfig {
  int max_newton_iters = 40;
  double force_tolerance = 1e-6;
  double displacement_tolerance = 1e-6;
  int load_substeps = 5;
};

struct MotionConfig {
  std::string file;             // empty: synthesize
  std::string units = "g";
  double scale = 1.0;
  std::optional<SynthesisSpec> synthesize;
};

struct AnalysisConfig {
  double wood_factor = 1.0;
  double noise_floor = 0.01;  // k_h peak floor
};

struct RunConfig {
  SiteConfig site;
  SoilConfig soil;
  WallConfig wall;
  DampingConfig damping;
  DynamicsConfig dynamics;
  StaticsConfig statics;
  std::vector<MotionConfig> motions;
  AnalysisConfig analysis;
  std::string output_directory = "out";

  Material soil_material() const {
    Material m;
    m.elastic = {soil.youngs_modulus_mpa * 1000.0, soil.poissons_ratio,
                 soil.density_kg_m3 / 1000.0};
    MohrCoulombParams mp;
    mp.phi = deg2rad(soil.friction_angle_deg);
    mp.psi = deg2rad(soil.dilation_angle_deg);
    mp.cohesion_c = soil.cohesion_kpa;
    mp.tension_cap = soil.tension_cap_kpa;
    mp.validate();
    m.mc = mp;
    m.unit_weight = soil.unit_weight_kn_m3;
    return m;
  }

  Material wall_material() const {
    Material m;
    m.elastic = {wall.modulus_mpa() * 1000.0, wall.poissons_ratio,
                 wall.density_kg_m3 / 1000.0};
    m.unit_weight = wall.unit_weight_kn_m3;
    return m;
  }

  K0Profile k0_profile() const {
    return {soil.k0, soil.unit_weight_kn_m3, site.surface_y()};
  }

  // Parameters for the closed-form models; the active side works on the
  // retained height, the passive side on the embedment depth.
  WallSoilParams analytical_params(bool active_side) const {
    WallSoilParams p;
    p.phi = deg2rad(soil.friction_angle_deg);
    p.delta = deg2rad(soil.wall_friction_angle_deg);
    p.beta = 0.0;
    p.ground_slope_i = 0.0;
    p.gamma = soil.unit_weight_kn_m3;
    p.height_H = active_side ? site.retained_height : site.embedment;
    return p;
  }

  StaticSolveSettings static_settings() const {
    StaticSolveSettings s;
    s.max_newton_iters = statics.max_newton_iters;
    s.force_tolerance = statics.force_tolerance;
    s.displacement_tolerance = statics.displacement_tolerance;
    s.load_substeps = statics.load_substeps;
    return s;
  }
};

// ---------------------------------------------------------------------
// JSON (de)serialization. Unknown keys are rejected nowhere; absent keys
// keep their defaults so configs stay minimal.

#define SPWALL_GET(obj, field, name) \
  field = obj.value(name, field)

inline void from_json(const json& j, SiteConfig& c) {
  SPWALL_GET(j, c.retained_height, "retained_height");
  SPWALL_GET(j, c.embedment, "embedment");
  SPWALL_GET(j, c.wall_thickness, "wall_thickness");
  SPWALL_GET(j, c.soil_front_width, "soil_front_width");
  SPWALL_GET(j, c.soil_back_width, "soil_back_width");
  SPWALL_GET(j, c.depth_below_wall, "depth_below_wall");
  SPWALL_GET(j, c.element_size_min, "element_size_min");
  SPWALL_GET(j, c.element_size_max, "element_size_max");
  if (j.contains("excavation_lifts"))
    c.excavation_lifts = j.at("excavation_lifts").get<std::vector<double>>();
}

inline void to_json(json& j, const SiteConfig& c) {
  j = json{{"retained_height", c.retained_height},
           {"embedment", c.embedment},
           {"wall_thickness", c.wall_thickness},
           {"soil_front_width", c.soil_front_width},
           {"soil_back_width", c.soil_back_width},
           {"depth_below_wall", c.depth_below_wall},
           {"element_size_min", c.element_size_min},
           {"element_size_max", c.element_size_max},
           {"excavation_lifts", c.excavation_lifts}};
}

inline void from_json(const json& j, SoilConfig& c) {
  SPWALL_GET(j, c.youngs_modulus_mpa, "youngs_modulus_mpa");
  SPWALL_GET(j, c.poissons_ratio, "poissons_ratio");
  SPWALL_GET(j, c.density_kg_m3, "density_kg_m3");
  SPWALL_GET(j, c.unit_weight_kn_m3, "unit_weight_kn_m3");
  SPWALL_GET(j, c.friction_angle_deg, "friction_angle_deg");
  SPWALL_GET(j, c.dilation_angle_deg, "dilation_angle_deg");
  SPWALL_GET(j, c.cohesion_kpa, "cohesion_kpa");
  SPWALL_GET(j, c.k0, "k0");
  SPWALL_GET(j, c.wall_friction_angle_deg, "wall_friction_angle_deg");
  SPWALL_GET(j, c.tension_cap_kpa, "tension_cap_kpa");
}

inline void to_json(json& j, const SoilConfig& c) {
  j = json{{"youngs_modulus_mpa", c.youngs_modulus_mpa},
           {"poissons_ratio", c.poissons_ratio},
           {"density_kg_m3", c.density_kg_m3},
           {"unit_weight_kn_m3", c.unit_weight_kn_m3},
           {"friction_angle_deg", c.friction_angle_deg},
           {"dilation_angle_deg", c.dilation_angle_deg},
           {"cohesion_kpa", c.cohesion_kpa},
           {"k0", c.k0},
           {"wall_friction_angle_deg", c.wall_friction_angle_deg},
           {"tension_cap_kpa", c.tension_cap_kpa}};
}

inline void from_json(const json& j, WallConfig& c) {
  SPWALL_GET(j, c.youngs_modulus_mpa, "youngs_modulus_mpa");
  SPWALL_GET(j, c.ec_from_fc, "ec_from_fc");
  SPWALL_GET(j, c.fc_mpa, "fc_mpa");
  SPWALL_GET(j, c.poissons_ratio, "poissons_ratio");
  SPWALL_GET(j, c.density_kg_m3, "density_kg_m3");
  SPWALL_GET(j, c.unit_weight_kn_m3, "unit_weight_kn_m3");
  SPWALL_GET(j, c.steel_yield_mpa, "steel_yield_mpa");
  SPWALL_GET(j, c.steel_modulus_gpa, "steel_modulus_gpa");
}

inline void to_json(json& j, const WallConfig& c) {
  j = json{{"youngs_modulus_mpa", c.youngs_modulus_mpa},
           {"ec_from_fc", c.ec_from_fc},
           {"fc_mpa", c.fc_mpa},
           {"poissons_ratio", c.poissons_ratio},
           {"density_kg_m3", c.density_kg_m3},
           {"unit_weight_kn_m3", c.unit_weight_kn_m3},
           {"steel_yield_mpa", c.steel_yield_mpa},
           {"steel_modulus_gpa", c.steel_modulus_gpa}};
}

inline void from_json(const json& j, DampingConfig& c) {
  SPWALL_GET(j, c.ratio, "ratio");
  SPWALL_GET(j, c.f1_hz, "f1_hz");
  SPWALL_GET(j, c.f2_hz, "f2_hz");
}

inline void to_json(json& j, const DampingConfig& c) {
  j = json{{"ratio", c.ratio}, {"f1_hz", c.f1_hz}, {"f2_hz", c.f2_hz}};
}

inline void from_json(const json& j, DynamicsConfig& c) {
  SPWALL_GET(j, c.newmark_beta, "newmark_beta");
  SPWALL_GET(j, c.newmark_gamma, "newmark_gamma");
  SPWALL_GET(j, c.dt, "dt");
  SPWALL_GET(j, c.dt_min, "dt_min");
  SPWALL_GET(j, c.lateral_boundary, "lateral_boundary");
  SPWALL_GET(j, c.cutoff_hz, "cutoff_hz");
  SPWALL_GET(j, c.checkpoint_every, "checkpoint_every");
}

inline void to_json(json& j, const DynamicsConfig& c) {
  j = json{{"newmark_beta", c.newmark_beta},
           {"newmark_gamma", c.newmark_gamma},
           {"dt", c.dt},
           {"dt_min", c.dt_min},
           {"lateral_boundary", c.lateral_boundary},
           {"cutoff_hz", c.cutoff_hz},
           {"checkpoint_every", c.checkpoint_every}};
}

inline void from_json(const json& j, StaticsConfig& c) {
  SPWALL_GET(j, c.max_newton_iters, "max_newton_iters");
  SPWALL_GET(j, c.force_tolerance, "force_tolerance");
  SPWALL_GET(j, c.displacement_tolerance, "displacement_tolerance");
  SPWALL_GET(j, c.load_substeps, "load_substeps");
}

inline void to_json(json& j, const StaticsConfig& c) {
  j = json{{"max_newton_iters", c.max_newton_iters},
           {"force_tolerance", c.force_tolerance},
           {"displacement_tolerance", c.displacement_tolerance},
           {"load_substeps", c.load_substeps}};
}

inline void from_json(const json& j, SynthesisSpec& c) {
  SPWALL_GET(j, c.kind, "kind");
  SPWALL_GET(j, c.amplitude_g, "amplitude_g");
  SPWALL_GET(j, c.frequency_hz, "frequency_hz");
  SPWALL_GET(j, c.duration_s, "duration_s");
  SPWALL_GET(j, c.dt, "dt");
  SPWALL_GET(j, c.taper_cycles, "taper_cycles");
}

inline void to_json(json& j, const SynthesisSpec& c) {
  j = json{{"kind", c.kind},
           {"amplitude_g", c.amplitude_g},
           {"frequency_hz", c.frequency_hz},
           {"duration_s", c.duration_s},
           {"dt", c.dt},
           {"taper_cycles", c.taper_cycles}};
}

inline void from_json(const json& j, MotionConfig& c) {
  SPWALL_GET(j, c.file, "file");
  SPWALL_GET(j, c.units, "units");
  SPWALL_GET(j, c.scale, "scale");
  if (j.contains("synthesize"))
    c.synthesize = j.at("synthesize").get<SynthesisSpec>();
}

inline void to_json(json& j, const MotionConfig& c) {
  j = json{{"file", c.file}, {"units", c.units}, {"scale", c.scale}};
  if (c.synthesize) j["synthesize"] = *c.synthesize;
}

inline void from_json(const json& j, AnalysisConfig& c) {
  SPWALL_GET(j, c.wood_factor, "wood_factor");
  SPWALL_GET(j, c.noise_floor, "noise_floor");
}

inline void to_json(json& j, const AnalysisConfig& c) {
  j = json{{"wood_factor", c.wood_factor}, {"noise_floor", c.noise_floor}};
}

inline void from_json(const json& j, RunConfig& c) {
  if (j.contains("site")) j.at("site").get_to(c.site);
  if (j.contains("soil")) j.at("soil").get_to(c.soil);
  if (j.contains("wall")) j.at("wall").get_to(c.wall);
  if (j.contains("damping")) j.at("damping").get_to(c.damping);
  if (j.contains("dynamics")) j.at("dynamics").get_to(c.dynamics);
  if (j.contains("statics")) j.at("statics").get_to(c.statics);
  if (j.contains("motions"))
    c.motions = j.at("motions").get<std::vector<MotionConfig>>();
  if (j.contains("analysis")) j.at("analysis").get_to(c.analysis);
  SPWALL_GET(j, c.output_directory, "output_directory");
}

inline void to_json(json& j, const RunConfig& c) {
  j = json{{"site", c.site},         {"soil", c.soil},
           {"wall", c.wall},         {"damping", c.damping},
           {"dynamics", c.dynamics}, {"statics", c.statics},
           {"motions", c.motions},   {"analysis", c.analysis},
           {"output_directory", c.output_directory}};
}

#undef SPWALL_GET

inline RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ConfigError("config parse error in " + path + ": " + e.what());
  }
  RunConfig cfg = j.get<RunConfig>();
  cfg.site.validate();
  return cfg;
}

inline std::string echo_config(const RunConfig& cfg) {
  return json(cfg).dump(2);
}

}  // namespace spwall
