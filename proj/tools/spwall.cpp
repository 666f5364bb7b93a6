// Command-line front end: analytical coefficient tables, staged static
// analysis, dynamic runs with comparison output, and the mesh
// wave-resolution check.
//
// Exit codes: 0 success, 2 invalid parameters/config, 3 solver failure,
// 4 motion-file errors.

#include <CLI11.hpp>
#include <atomic>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <mutex>
#include <thread>

#include "spwall/pipeline.hpp"

using namespace spwall;

namespace {

RunConfig config_from(const std::string& path) {
  if (path.empty()) return RunConfig{};
  return load_config(path);
}

// "start:step:stop" (inclusive) or a comma-separated list.
std::vector<double> parse_grid(const std::string& text) {
  std::vector<double> grid;
  if (text.empty()) return grid;
  if (text.find(':') != std::string::npos) {
    double start, step, stop;
    if (std::sscanf(text.c_str(), "%lf:%lf:%lf", &start, &step, &stop) != 3 ||
        step <= 0.0)
      throw ConfigError("grid must be start:step:stop with step > 0");
    for (double v = start; v <= stop + 1e-12; v += step) grid.push_back(v);
  } else {
    std::string item;
    std::istringstream ss(text);
    while (std::getline(ss, item, ',')) grid.push_back(std::stod(item));
  }
  return grid;
}

int cmd_mo_table(const RunConfig& cfg, const std::string& grid_text,
                 const std::string& csv_path) {
  const auto grid = parse_grid(grid_text);
  const auto pa = cfg.analytical_params(true);
  const auto pp = cfg.analytical_params(false);
  const double Fp = cfg.analysis.wood_factor;

  std::ostringstream csv;
  csv << "k_h,K_ae,K_pe,dK_wood\n";
  std::printf("%8s %12s %12s %12s\n", "k_h", "K_ae", "K_pe", "dK_wood");
  for (double kh : grid) {
    std::string ka = "exceeded", kp = "exceeded";
    try {
      ka = std::to_string(mo_coefficient(pa, {kh, 0.0}, PressureMode::Active));
    } catch (const ValidityDomainError&) {
    }
    try {
      kp = std::to_string(mo_coefficient(pp, {kh, 0.0}, PressureMode::Passive));
    } catch (const ValidityDomainError&) {
    } catch (const ConfigError&) {
      kp = "exceeded";
    }
    const double dK = 2.0 * Fp * kh;
    std::printf("%8.4f %12s %12s %12.4f\n", kh, ka.c_str(), kp.c_str(), dK);
    csv << kh << "," << ka << "," << kp << "," << dK << "\n";
  }
  if (!csv_path.empty()) {
    std::ofstream out(csv_path);
    if (!out) throw ConfigError("cannot write " + csv_path);
    out << csv.str();
  }
  return 0;
}

int cmd_check_mesh(const RunConfig& cfg, const std::string& out_dir) {
  const Mesh mesh = build_site_mesh(cfg.site);
  const std::vector<ElasticParams> mats = {cfg.soil_material().elastic,
                                           cfg.wall_material().elastic};
  const auto report =
      wave_resolution_check(mesh, mats, cfg.dynamics.cutoff_hz);
  std::printf("elements %zu  nodes %zu\n", mesh.elements.size(),
              mesh.nodes.size());
  for (const auto& [name, count] : mesh.region_counts())
    std::printf("  region %-12s %d\n", name.c_str(), count);
  std::printf("wave resolution at %.3g Hz: limit %.4f m -> %s\n",
              cfg.dynamics.cutoff_hz, report.min_limit,
              report.all_pass ? "all elements pass" : "FAILURES");
  for (const auto& e : report.entries)
    std::printf("  element %d size %.3f m exceeds required %.3f m\n",
                e.element, e.size, e.limit);
  if (!out_dir.empty()) {
    std::filesystem::create_directories(out_dir);
    std::ofstream os(out_dir + "/mesh.txt");
    write_mesh_text(mesh, os);
    std::ofstream ws(out_dir + "/wave_check.txt");
    ws << "cutoff_hz " << cfg.dynamics.cutoff_hz << "\n";
    ws << "min_limit_m " << report.min_limit << "\n";
    ws << "checked " << report.checked << "\n";
    ws << "failures " << report.entries.size() << "\n";
    for (const auto& e : report.entries)
      ws << e.element << " " << e.size << " " << e.limit << "\n";
  }
  return report.all_pass ? 0 : 0;
}

int cmd_static(const RunConfig& cfg, const std::string& out_dir) {
  Model model = build_site_model(cfg);
  const auto report = run_static_phase(model, cfg);
  for (const auto& st : report.stages) {
    std::printf("stage %-18s substeps %zu iterations", st.name.c_str(),
                st.iterations.size());
    for (int it : st.iterations) std::printf(" %d", it);
    std::printf("  max|u| %.4g m\n", st.max_displacement);
  }
  std::printf("active  side: P %10.3f kN/m  K %8.4f  Y/H %6.4f\n",
              report.P_active, report.K_active,
              report.Y_active / report.active_full.height_H);
  std::printf("passive side: P %10.3f kN/m  K %8.4f  Y/H %6.4f\n",
              report.P_passive, report.K_passive,
              report.Y_passive / report.passive.height_H);
  if (!out_dir.empty()) {
    std::filesystem::create_directories(out_dir);
    write_checkpoint(model, out_dir + "/checkpoint_static.txt",
                     "post_construction");
    std::ofstream os(out_dir + "/static_report.txt");
    os << "K_active " << report.K_active << "\n";
    os << "K_passive " << report.K_passive << "\n";
    os << "Y_over_H_active "
       << report.Y_active / report.active_full.height_H << "\n";
    os << "Y_over_H_passive " << report.Y_passive / report.passive.height_H
       << "\n";
    os << "config_echo\n" << echo_config(cfg) << "\n";
  }
  return 0;
}

GroundMotion motion_from(const MotionConfig& mc, double cutoff) {
  GroundMotion gm;
  if (!mc.file.empty()) {
    const MotionUnits units =
        mc.units == "m/s2" ? MotionUnits::MetersPerSecond2 : MotionUnits::G;
    gm = load_ground_motion(mc.file, units);
  } else if (mc.synthesize) {
    gm = synthesize_motion(*mc.synthesize, cutoff);
  } else {
    throw MotionError("motion entry has neither a file nor a synthesis spec");
  }
  if (mc.scale != 1.0)
    for (double& a : gm.accel) a *= mc.scale;
  return gm;
}

int cmd_dynamic(const RunConfig& cfg_in, std::vector<std::string> motion_paths,
                const std::string& out_dir, int jobs, unsigned seed) {
  RunConfig cfg = cfg_in;
  if (!out_dir.empty()) cfg.output_directory = out_dir;
  for (const auto& p : motion_paths) {
    MotionConfig mc;
    mc.file = p;
    cfg.motions.push_back(mc);
  }
  if (cfg.motions.empty())
    throw MotionError("no motions given (config motions or --motion)");

  std::vector<GroundMotion> motions;
  for (const auto& mc : cfg.motions)
    motions.push_back(motion_from(mc, cfg.dynamics.cutoff_hz));

  std::atomic<int> next{0};
  std::mutex print_mutex;
  std::vector<std::string> failures;
  auto worker = [&]() {
    for (;;) {
      const int i = next.fetch_add(1);
      if (i >= static_cast<int>(motions.size())) return;
      const std::string dir =
          motions.size() == 1
              ? cfg.output_directory
              : cfg.output_directory + "/" + motions[i].label;
      try {
        const auto result = run_dynamic_pipeline(cfg, motions[i], dir, seed);
        std::lock_guard<std::mutex> lock(print_mutex);
        std::printf(
            "motion %-24s f1 %6.3f Hz f2 %6.3f Hz rows %zu -> %s\n",
            result.motion_label.c_str(), result.f1_hz, result.f2_hz,
            result.rows.size(), dir.c_str());
      } catch (const std::exception& e) {
        std::lock_guard<std::mutex> lock(print_mutex);
        failures.push_back(motions[i].label + ": " + e.what());
      }
    }
  };
  const int n_workers =
      std::max(1, std::min<int>(jobs, static_cast<int>(motions.size())));
  std::vector<std::thread> pool;
  for (int w = 0; w < n_workers; ++w) pool.emplace_back(worker);
  for (auto& t : pool) t.join();

  for (const auto& f : failures) std::fprintf(stderr, "error: %s\n", f.c_str());
  return failures.empty() ? 0 : 3;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"seismic earth pressure analysis for embedded sheet pile walls"};
  app.require_subcommand(1);

  std::string config_path, out_dir, grid = "0:0.05:0.4", csv_path;
  std::vector<std::string> motion_paths;
  int jobs = 1;
  unsigned seed = 1;
  app.add_option("--config", config_path, "JSON run configuration");
  app.add_option("--seed", seed, "seed for randomized drivers");

  auto* mo = app.add_subcommand("mo-table",
                                "seismic coefficient table vs k_h");
  mo->add_option("--grid", grid, "k_h grid start:step:stop or list");
  mo->add_option("--csv", csv_path, "also write the table as CSV");

  auto* st = app.add_subcommand("static", "staged construction analysis");
  st->add_option("--out", out_dir, "output directory");

  auto* dy = app.add_subcommand("dynamic",
                                "staged construction plus dynamic run");
  dy->add_option("--motion", motion_paths, "ground motion file(s)");
  dy->add_option("--out", out_dir, "output directory");
  dy->add_option("--jobs", jobs, "parallel workers over motions");

  auto* cm = app.add_subcommand("check-mesh", "mesh and wave-resolution report");
  cm->add_option("--out", out_dir, "output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;
  }

  try {
    const RunConfig cfg = config_from(config_path);
    if (mo->parsed()) return cmd_mo_table(cfg, grid, csv_path);
    if (st->parsed()) return cmd_static(cfg, out_dir);
    if (dy->parsed())
      return cmd_dynamic(cfg, motion_paths, out_dir, jobs, seed);
    if (cm->parsed()) return cmd_check_mesh(cfg, out_dir);
  } catch (const MotionError& e) {
    std::fprintf(stderr, "motion error: %s\n", e.what());
    return 4;
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "parameter error: %s\n", e.what());
    return 2;
  } catch (const SolverError& e) {
    std::fprintf(stderr, "solver error: %s\n", e.what());
    return 3;
  }
  return 0;
}
