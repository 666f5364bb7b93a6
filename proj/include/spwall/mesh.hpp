#pragma once

// Site geometry and mesh construction: a structured, graded Q8 mesh of the
// wall-soil system with region tags (wall column, backfill, foundation,
// excavation lifts), boundary node sets, the staged-construction plan, the
// wave-resolution mesh check and a plain-text mesh export.

#include <Eigen/Dense>
#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <ostream>
#include <string>
#include <vector>

#include "spwall/common.hpp"
#include "spwall/element_q8.hpp"
#include "spwall/material.hpp"

namespace spwall {

struct SiteConfig {
  double retained_height = 6.0;   // m above the dredge line
  double embedment = 5.0;         // m of wall below the dredge line
  double wall_thickness = 0.5;    // m
  double soil_front_width = 12.0; // m of soil in front of the wall
  double soil_back_width = 26.0;  // m of backfill behind the wall
  double depth_below_wall = 4.0;  // m of foundation soil below the wall toe
  double element_size_min = 0.25; // m
  double element_size_max = 1.0;  // m
  std::vector<double> excavation_lifts = {3.0, 3.0};  // top-down depths, m

  double total_height() const {
    return retained_height + embedment + depth_below_wall;
  }
  double total_width() const {
    return soil_front_width + wall_thickness + soil_back_width;
  }
  double wall_base_y() const { return depth_below_wall; }
  double dredge_y() const { return depth_below_wall + embedment; }
  double surface_y() const { return total_height(); }
  double wall_x0() const { return soil_front_width; }
  double wall_x1() const { return soil_front_width + wall_thickness; }

  void validate() const {
    if (retained_height <= 0 || embedment <= 0 || wall_thickness <= 0 ||
        soil_front_width <= 0 || soil_back_width <= 0 ||
        depth_below_wall <= 0)
      throw ConfigError("site dimensions must be positive");
    if (!(element_size_min > 0 && element_size_max >= element_size_min))
      throw ConfigError("element size bounds are inconsistent");
    double lift_sum = 0.0;
    for (double d : excavation_lifts) {
      if (d <= 0) throw ConfigError("excavation lift depths must be positive");
      lift_sum += d;
    }
    if (!excavation_lifts.empty() &&
        std::abs(lift_sum - retained_height) > 1e-9)
      throw ConfigError("excavation lift depths must sum to the retained height");
  }
};

struct Region {
  enum class Kind { Backfill, Foundation, Wall, ExcavationLift };
  Kind kind = Kind::Backfill;
  int lift = 0;  // 1-based, top lift first; only for ExcavationLift

  std::string name() const {
    switch (kind) {
      case Kind::Backfill: return "backfill";
      case Kind::Foundation: return "foundation";
      case Kind::Wall: return "wall";
      case Kind::ExcavationLift: return "lift" + std::to_string(lift);
    }
    return "?";
  }
};

struct MeshElement {
  std::array<int, 8> nodes{};
  Region region;
  int material = 0;
};

struct BoundarySets {
  std::vector<int> base, left, right, surface;
};

struct Mesh {
  std::vector<Eigen::Vector2d> nodes;
  std::vector<MeshElement> elements;
  BoundarySets boundary;
  double width = 0.0, height = 0.0;

  NodeCoords element_coords(int e) const {
    NodeCoords c;
    for (int a = 0; a < 8; ++a) {
      c(a, 0) = nodes[elements[e].nodes[a]](0);
      c(a, 1) = nodes[elements[e].nodes[a]](1);
    }
    return c;
  }
  Eigen::Vector2d element_centroid(int e) const {
    Eigen::Vector2d c = Eigen::Vector2d::Zero();
    for (int a = 0; a < 4; ++a) c += nodes[elements[e].nodes[a]];
    return c / 4.0;
  }
  double element_max_edge(int e) const {
    double m = 0.0;
    for (int a = 0; a < 4; ++a) {
      const auto& p = nodes[elements[e].nodes[a]];
      const auto& q = nodes[elements[e].nodes[(a + 1) % 4]];
      m = std::max(m, (p - q).norm());
    }
    return m;
  }
  std::map<std::string, int> region_counts() const {
    std::map<std::string, int> counts;
    for (const auto& el : elements) ++counts[el.region.name()];
    return counts;
  }
};

namespace detail {

// Cell sizes for one band: a geometric ramp from `s_fine` (at the `fine_end`
// of the band) capped at `s_coarse`, stretched so the sizes sum exactly to
// L while staying within [lo, hi].
inline std::vector<double> grade_band(double L, double s_fine, double s_coarse,
                                      double lo, double hi,
                                      bool fine_at_start, double ratio = 1.4) {
  if (L <= 0) throw ConfigError("grading band with non-positive length");
  std::vector<double> sizes;
  if (L <= hi + 1e-12 && L >= lo - 1e-12) {
    sizes = {L};
  } else {
    double s = s_fine, acc = 0.0;
    while (s < s_coarse - 1e-12 && acc + s < L) {
      sizes.push_back(s);
      acc += s;
      s = std::min(s * ratio, s_coarse);
    }
    const double rest = L - acc;
    if (rest > 1e-12) {
      int n_cap = std::max(1, static_cast<int>(std::ceil(rest / s_coarse - 1e-12)));
      const double cap_size = rest / n_cap;
      if (cap_size < lo - 1e-12 && !sizes.empty()) {
        // Fold the remainder into the ramp instead of a sliver cell.
        const double spread = rest / static_cast<int>(sizes.size());
        for (auto& v : sizes) v += spread;
      } else {
        for (int i = 0; i < n_cap; ++i) sizes.push_back(cap_size);
      }
    }
  }
  double sum = 0.0;
  for (double v : sizes) sum += v;
  const double scale = L / sum;
  for (auto& v : sizes) v *= scale;
  for (double v : sizes)
    if (v < lo - 1e-9 || v > hi + 1e-9)
      throw ConfigError("grading cannot conform to the element size bounds");
  if (!fine_at_start) std::reverse(sizes.begin(), sizes.end());
  return sizes;
}

inline std::vector<double> breaks_from_sizes(double start,
                                             const std::vector<double>& sizes) {
  std::vector<double> b = {start};
  for (double s : sizes) b.push_back(b.back() + s);
  return b;
}

}  // namespace detail

// Structured Q8 mesh over the tensor grid of the given break points. The
// region of each cell is decided by a centroid callback.
template <typename RegionFn>
Mesh structured_quad8(const std::vector<double>& xb,
                      const std::vector<double>& yb, RegionFn region_of) {
  const int nx = static_cast<int>(xb.size()) - 1;
  const int ny = static_cast<int>(yb.size()) - 1;
  if (nx < 1 || ny < 1) throw ConfigError("mesh needs at least one cell");

  Mesh mesh;
  mesh.width = xb.back() - xb.front();
  mesh.height = yb.back() - yb.front();

  // Corner grid, then x-midside grid, then y-midside grid.
  const int n_corner = (nx + 1) * (ny + 1);
  const int n_xmid = nx * (ny + 1);
  mesh.nodes.resize(n_corner + n_xmid + (nx + 1) * ny);
  auto corner = [&](int i, int j) { return j * (nx + 1) + i; };
  auto xmid = [&](int i, int j) { return n_corner + j * nx + i; };
  auto ymid = [&](int i, int j) { return n_corner + n_xmid + j * (nx + 1) + i; };

  for (int j = 0; j <= ny; ++j)
    for (int i = 0; i <= nx; ++i)
      mesh.nodes[corner(i, j)] = {xb[i], yb[j]};
  for (int j = 0; j <= ny; ++j)
    for (int i = 0; i < nx; ++i)
      mesh.nodes[xmid(i, j)] = {0.5 * (xb[i] + xb[i + 1]), yb[j]};
  for (int j = 0; j < ny; ++j)
    for (int i = 0; i <= nx; ++i)
      mesh.nodes[ymid(i, j)] = {xb[i], 0.5 * (yb[j] + yb[j + 1])};

  mesh.elements.reserve(static_cast<std::size_t>(nx) * ny);
  for (int j = 0; j < ny; ++j)
    for (int i = 0; i < nx; ++i) {
      MeshElement el;
      el.nodes = {corner(i, j),     corner(i + 1, j), corner(i + 1, j + 1),
                  corner(i, j + 1), xmid(i, j),       ymid(i + 1, j),
                  xmid(i, j + 1),   ymid(i, j)};
      const Eigen::Vector2d c(0.5 * (xb[i] + xb[i + 1]),
                              0.5 * (yb[j] + yb[j + 1]));
      el.region = region_of(c);
      el.material = (el.region.kind == Region::Kind::Wall) ? 1 : 0;
      mesh.elements.push_back(el);
    }

  const double x0 = xb.front(), x1 = xb.back(), y0 = yb.front(),
               y1 = yb.back();
  for (std::size_t n = 0; n < mesh.nodes.size(); ++n) {
    const auto& p = mesh.nodes[n];
    const int id = static_cast<int>(n);
    if (std::abs(p(1) - y0) < 1e-9) mesh.boundary.base.push_back(id);
    if (std::abs(p(0) - x0) < 1e-9) mesh.boundary.left.push_back(id);
    if (std::abs(p(0) - x1) < 1e-9) mesh.boundary.right.push_back(id);
    if (std::abs(p(1) - y1) < 1e-9) mesh.boundary.surface.push_back(id);
  }
  return mesh;
}

// The wall-soil system of the studied site: wall column wished in place,
// excavation lifts tagged in front of the wall, graded toward the wall.
inline Mesh build_site_mesh(const SiteConfig& cfg) {
  cfg.validate();
  const double lo = cfg.element_size_min, hi = cfg.element_size_max;
  const double mid = 0.5 * (lo + hi);

  // Horizontal breaks: coarse far field, fine toward the wall; the wall
  // column is a single band of one element.
  std::vector<double> xb;
  {
    const auto front = detail::grade_band(cfg.soil_front_width, lo, hi, lo,
                                          hi, /*fine_at_start=*/false);
    const auto back = detail::grade_band(cfg.soil_back_width, lo, hi, lo, hi,
                                         /*fine_at_start=*/true);
    xb = detail::breaks_from_sizes(0.0, front);
    for (double b : detail::breaks_from_sizes(cfg.wall_x0(),
                                              {cfg.wall_thickness}))
      if (b > xb.back() + 1e-12) xb.push_back(b);
    for (double b : detail::breaks_from_sizes(cfg.wall_x1(), back))
      if (b > xb.back() + 1e-12) xb.push_back(b);
  }

  // Vertical breaks: every stage boundary (wall base, dredge line, lift
  // interfaces, surface) is an exact break line. Resolution concentrates
  // at the wall toe and the dredge line, where the pressure gradients
  // steer the resultants.
  std::vector<double> yb;
  {
    const auto below = detail::grade_band(cfg.depth_below_wall, lo, hi, lo,
                                          hi, /*fine_at_start=*/false);
    yb = detail::breaks_from_sizes(0.0, below);
    // Embedment: fine at the toe, coarsening toward the dredge line.
    const auto embed = detail::grade_band(cfg.embedment, lo, mid, lo, hi,
                                          /*fine_at_start=*/true);
    for (double b : detail::breaks_from_sizes(cfg.wall_base_y(), embed))
      if (b > yb.back() + 1e-12) yb.push_back(b);
    double y = cfg.dredge_y();
    bool first_lift = true;
    for (auto it = cfg.excavation_lifts.rbegin();
         it != cfg.excavation_lifts.rend(); ++it) {
      // The lowest lift starts fine at the dredge line.
      const auto lift = detail::grade_band(*it, first_lift ? lo : mid, mid,
                                           lo, hi, true);
      first_lift = false;
      for (double b : detail::breaks_from_sizes(y, lift))
        if (b > yb.back() + 1e-12) yb.push_back(b);
      y += *it;
    }
    if (cfg.excavation_lifts.empty()) {
      const auto top = detail::grade_band(cfg.retained_height, lo, mid, lo,
                                          hi, true);
      for (double b : detail::breaks_from_sizes(cfg.dredge_y(), top))
        if (b > yb.back() + 1e-12) yb.push_back(b);
    }
  }

  // Lift index of a centroid height above the dredge line (1 = top lift).
  auto lift_of = [&](double cy) {
    double top = cfg.surface_y();
    for (std::size_t k = 0; k < cfg.excavation_lifts.size(); ++k) {
      const double bottom = top - cfg.excavation_lifts[k];
      if (cy >= bottom) return static_cast<int>(k) + 1;
      top = bottom;
    }
    return static_cast<int>(cfg.excavation_lifts.size());
  };

  auto region_of = [&](const Eigen::Vector2d& c) {
    Region r;
    if (c(0) >= cfg.wall_x0() && c(0) <= cfg.wall_x1() &&
        c(1) >= cfg.wall_base_y()) {
      r.kind = Region::Kind::Wall;
    } else if (c(0) < cfg.wall_x0() && c(1) >= cfg.dredge_y() &&
               !cfg.excavation_lifts.empty()) {
      r.kind = Region::Kind::ExcavationLift;
      r.lift = lift_of(c(1));
    } else if (c(0) > cfg.wall_x1() && c(1) >= cfg.wall_base_y()) {
      r.kind = Region::Kind::Backfill;
    } else {
      r.kind = Region::Kind::Foundation;
    }
    return r;
  };

  Mesh mesh = structured_quad8(xb, yb, region_of);
  for (std::size_t e = 0; e < mesh.elements.size(); ++e) {
    const auto coords = mesh.element_coords(static_cast<int>(e));
    for (const auto& pt : QuadratureRule::gauss3x3().points)
      iso_map(shape_q8(pt.xi, pt.eta), coords);  // throws on bad Jacobian
  }
  return mesh;
}

// Uniform rectangular block of one soil region; used for reduced models
// and verification problems.
inline Mesh build_block_mesh(double width, double height, int nx, int ny) {
  std::vector<double> xb(nx + 1), yb(ny + 1);
  for (int i = 0; i <= nx; ++i) xb[i] = width * i / nx;
  for (int j = 0; j <= ny; ++j) yb[j] = height * j / ny;
  return structured_quad8(xb, yb, [](const Eigen::Vector2d&) {
    return Region{Region::Kind::Backfill, 0};
  });
}

// Single column of elements (used for shear-column benchmarks and
// free-field site response).
inline Mesh build_column_mesh(double height, double width, int ny) {
  std::vector<double> xb = {0.0, width};
  std::vector<double> yb(ny + 1);
  for (int j = 0; j <= ny; ++j) yb[j] = height * j / ny;
  return structured_quad8(xb, yb, [](const Eigen::Vector2d&) {
    return Region{Region::Kind::Foundation, 0};
  });
}

struct Stage {
  std::string name;
  std::vector<int> deactivate;  // element ids removed in this stage
};

// Construction sequence: geostatic state with the wall wished in place,
// then one stage per excavation lift (top lift first).
inline std::vector<Stage> stage_plan(const Mesh& mesh, const SiteConfig& cfg) {
  cfg.validate();
  std::vector<Stage> stages;
  stages.push_back({"geostatic", {}});
  for (std::size_t k = 1; k <= cfg.excavation_lifts.size(); ++k) {
    Stage s;
    s.name = "excavate_lift_" + std::to_string(k);
    for (std::size_t e = 0; e < mesh.elements.size(); ++e) {
      const auto& r = mesh.elements[e].region;
      if (r.kind == Region::Kind::ExcavationLift &&
          r.lift == static_cast<int>(k))
        s.deactivate.push_back(static_cast<int>(e));
    }
    if (s.deactivate.empty())
      throw ConfigError("excavation lift " + std::to_string(k) +
                        " contains no elements");
    stages.push_back(std::move(s));
  }
  return stages;
}

struct WaveCheckEntry {
  int element = 0;
  double size = 0.0;   // max edge length, m
  double limit = 0.0;  // required size V_s / (8 f), m
  bool pass = true;
};

struct WaveCheckReport {
  std::vector<WaveCheckEntry> entries;  // failures only
  double min_limit = 0.0;
  int checked = 0;
  bool all_pass = true;
};

// Kuhlemeyer-Lysmer rule: element size no larger than one eighth of the
// shortest wavelength at the cutoff frequency.
inline WaveCheckReport wave_resolution_check(
    const Mesh& mesh, const std::vector<ElasticParams>& materials,
    double f_cutoff) {
  WaveCheckReport report;
  report.min_limit = std::numeric_limits<double>::infinity();
  for (std::size_t e = 0; e < mesh.elements.size(); ++e) {
    const auto& el = mesh.elements[e];
    const auto& mat = materials.at(el.material);
    const double G = mat.shear_modulus();
    const double vs = std::sqrt(G / mat.rho);
    const double limit = f_cutoff > 0.0
                             ? vs / (8.0 * f_cutoff)
                             : std::numeric_limits<double>::infinity();
    report.min_limit = std::min(report.min_limit, limit);
    ++report.checked;
    const double size = mesh.element_max_edge(static_cast<int>(e));
    if (size > limit) {
      report.entries.push_back({static_cast<int>(e), size, limit, false});
      report.all_pass = false;
    }
  }
  return report;
}

// Plain-text export: node table, element table, region table, boundary
// sets. Intended for inspection and plotting.
inline void write_mesh_text(const Mesh& mesh, std::ostream& os) {
  os << "# nodes " << mesh.nodes.size() << "\n";
  os << "# id x y\n";
  for (std::size_t n = 0; n < mesh.nodes.size(); ++n)
    os << n << " " << mesh.nodes[n](0) << " " << mesh.nodes[n](1) << "\n";
  os << "# elements " << mesh.elements.size() << "\n";
  os << "# id n1..n8 region material\n";
  for (std::size_t e = 0; e < mesh.elements.size(); ++e) {
    os << e;
    for (int a = 0; a < 8; ++a) os << " " << mesh.elements[e].nodes[a];
    os << " " << mesh.elements[e].region.name() << " "
       << mesh.elements[e].material << "\n";
  }
  os << "# regions\n";
  for (const auto& [name, count] : mesh.region_counts())
    os << name << " " << count << "\n";
  os << "# boundary base " << mesh.boundary.base.size() << " left "
     << mesh.boundary.left.size() << " right " << mesh.boundary.right.size()
     << " surface " << mesh.boundary.surface.size() << "\n";
}

}  // namespace spwall
