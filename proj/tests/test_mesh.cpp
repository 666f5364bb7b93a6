#include <gtest/gtest.h>

#include <map>
#include <set>
#include <sstream>

#include "spwall/mesh.hpp"

using namespace spwall;

TEST(SiteMesh, DefaultBuildMatchesSiteLayout) {
  const SiteConfig cfg;
  const Mesh mesh = build_site_mesh(cfg);

  EXPECT_NEAR(mesh.width, 38.5, 1e-12);
  EXPECT_NEAR(mesh.height, 15.0, 1e-12);

  const auto counts = mesh.region_counts();
  EXPECT_GT(counts.at("wall"), 0);
  EXPECT_GT(counts.at("backfill"), 0);
  EXPECT_GT(counts.at("foundation"), 0);
  EXPECT_GT(counts.at("lift1"), 0);
  EXPECT_GT(counts.at("lift2"), 0);

  // Element count within a factor of two of the reference 806.
  const int n = static_cast<int>(mesh.elements.size());
  EXPECT_GE(n, 403);
  EXPECT_LE(n, 1612);

  // Edge lengths within the configured band.
  for (std::size_t e = 0; e < mesh.elements.size(); ++e) {
    for (int a = 0; a < 4; ++a) {
      const auto& p = mesh.nodes[mesh.elements[e].nodes[a]];
      const auto& q = mesh.nodes[mesh.elements[e].nodes[(a + 1) % 4]];
      const double len = (p - q).norm();
      EXPECT_GE(len, cfg.element_size_min - 1e-9);
      EXPECT_LE(len, cfg.element_size_max + 1e-9);
    }
  }
}

TEST(SiteMesh, WallColumnGeometry) {
  const SiteConfig cfg;
  const Mesh mesh = build_site_mesh(cfg);
  int wall_count = 0;
  double min_x = 1e30, max_x = -1e30, min_y = 1e30, max_y = -1e30;
  for (std::size_t e = 0; e < mesh.elements.size(); ++e) {
    if (mesh.elements[e].region.kind != Region::Kind::Wall) continue;
    ++wall_count;
    for (int a = 0; a < 4; ++a) {
      const auto& p = mesh.nodes[mesh.elements[e].nodes[a]];
      min_x = std::min(min_x, p(0));
      max_x = std::max(max_x, p(0));
      min_y = std::min(min_y, p(1));
      max_y = std::max(max_y, p(1));
    }
    EXPECT_EQ(mesh.elements[e].material, 1);
  }
  EXPECT_GT(wall_count, 0);
  EXPECT_NEAR(min_x, cfg.wall_x0(), 1e-12);
  EXPECT_NEAR(max_x, cfg.wall_x1(), 1e-12);
  EXPECT_NEAR(max_x - min_x, 0.5, 1e-12);  // one column, 0.5 m wide
  EXPECT_NEAR(min_y, 4.0, 1e-12);
  EXPECT_NEAR(max_y, 15.0, 1e-12);  // spans the 11 m wall length
}

TEST(SiteMesh, Conforming) {
  const Mesh mesh = build_site_mesh(SiteConfig{});
  // Every shared corner-corner edge must carry the same midside node.
  std::map<std::pair<int, int>, std::pair<int, int>> edges;  // edge -> (mid, count)
  const int edge_nodes[4][3] = {{0, 1, 4}, {1, 2, 5}, {2, 3, 6}, {3, 0, 7}};
  for (const auto& el : mesh.elements) {
    for (const auto& en : edge_nodes) {
      int a = el.nodes[en[0]], b = el.nodes[en[1]];
      if (a > b) std::swap(a, b);
      const auto key = std::make_pair(a, b);
      auto it = edges.find(key);
      if (it == edges.end()) {
        edges[key] = {el.nodes[en[2]], 1};
      } else {
        EXPECT_EQ(it->second.first, el.nodes[en[2]]);
        ++it->second.second;
      }
    }
  }
  for (const auto& [key, val] : edges) EXPECT_LE(val.second, 2);
}

TEST(SiteMesh, Deterministic) {
  const Mesh a = build_site_mesh(SiteConfig{});
  const Mesh b = build_site_mesh(SiteConfig{});
  ASSERT_EQ(a.nodes.size(), b.nodes.size());
  ASSERT_EQ(a.elements.size(), b.elements.size());
  for (std::size_t n = 0; n < a.nodes.size(); ++n)
    EXPECT_EQ(a.nodes[n], b.nodes[n]);
  for (std::size_t e = 0; e < a.elements.size(); ++e)
    EXPECT_EQ(a.elements[e].nodes, b.elements[e].nodes);
}

TEST(SiteMesh, RejectsMismatchedLifts) {
  SiteConfig cfg;
  cfg.excavation_lifts = {3.0, 2.0};  // sums to 5, retained height is 6
  EXPECT_THROW(build_site_mesh(cfg), ConfigError);
}

TEST(BlockMesh, HandCountableSmallCase) {
  // 2x2 Q8 grid: 9 corners + 12 midsides = 21 nodes, 4 elements.
  const Mesh mesh = build_block_mesh(1.0, 1.0, 2, 2);
  EXPECT_EQ(mesh.elements.size(), 4u);
  EXPECT_EQ(mesh.nodes.size(), 21u);
  std::set<int> used;
  for (const auto& el : mesh.elements)
    for (int a = 0; a < 8; ++a) used.insert(el.nodes[a]);
  EXPECT_EQ(used.size(), mesh.nodes.size());
}

TEST(StagePlan, DefaultThreeStages) {
  const SiteConfig cfg;
  const Mesh mesh = build_site_mesh(cfg);
  const auto stages = stage_plan(mesh, cfg);
  ASSERT_EQ(stages.size(), 3u);
  EXPECT_EQ(stages[0].name, "geostatic");
  EXPECT_TRUE(stages[0].deactivate.empty());

  // Lift 1 elements lie in the top 3 m in front of the wall.
  std::set<int> lift1(stages[1].deactivate.begin(), stages[1].deactivate.end());
  EXPECT_FALSE(lift1.empty());
  for (int e : stages[1].deactivate) {
    const auto c = mesh.element_centroid(e);
    EXPECT_LT(c(0), cfg.wall_x0());
    EXPECT_GT(c(1), cfg.surface_y() - 3.0);
  }
  // Disjoint lifts.
  for (int e : stages[2].deactivate) EXPECT_EQ(lift1.count(e), 0u);
}

TEST(StagePlan, AlternateStagings) {
  SiteConfig cfg;
  cfg.excavation_lifts.clear();
  const Mesh m0 = build_site_mesh(cfg);
  EXPECT_EQ(stage_plan(m0, cfg).size(), 1u);

  SiteConfig cfg1;
  cfg1.excavation_lifts = {6.0};
  const Mesh m1 = build_site_mesh(cfg1);
  const auto stages = stage_plan(m1, cfg1);
  ASSERT_EQ(stages.size(), 2u);
  double depth_sum = 0.0;
  for (int e : stages[1].deactivate) {
    const auto c = m1.element_centroid(e);
    EXPECT_GT(c(1), cfg1.dredge_y());
    (void)depth_sum;
  }
}

TEST(WaveCheck, SiteSoilAtCutoff) {
  const Mesh mesh = build_site_mesh(SiteConfig{});
  const std::vector<ElasticParams> mats = {{163130.0, 0.26, 2.0},
                                           {30000000.0, 0.2, 2.4}};
  const auto report = wave_resolution_check(mesh, mats, 15.0);
  // Soil limit: V_s = sqrt(G/rho) = 179.9 m/s -> 1.499 m at 15 Hz.
  EXPECT_NEAR(report.min_limit, 1.499, 1e-3);
  EXPECT_TRUE(report.all_pass);  // 0.25-1.0 m grading passes

  const auto strict = wave_resolution_check(mesh, mats, 45.0);
  EXPECT_FALSE(strict.all_pass);  // 0.50 m limit fails the 1.0 m elements
  EXPECT_NEAR(strict.entries.front().limit, 0.4998, 1e-3);

  const auto none = wave_resolution_check(mesh, mats, 0.0);
  EXPECT_TRUE(none.all_pass);
}

TEST(MeshExport, RoundTripSmoke) {
  const Mesh mesh = build_block_mesh(2.0, 1.0, 2, 1);
  std::ostringstream os;
  write_mesh_text(mesh, os);
  const std::string text = os.str();
  EXPECT_NE(text.find("# nodes 13"), std::string::npos);
  EXPECT_NE(text.find("# elements 2"), std::string::npos);
  EXPECT_NE(text.find("backfill 2"), std::string::npos);
}
