#include <gtest/gtest.h>

#include "affordance/scene.hpp"
#include "affordance/synthetic.hpp"

using namespace affordance;

TEST(LabelTable, ReservedEmptyLabelAndFloorDetection) {
  LabelTable t;
  EXPECT_THROW(t.set(0, {"x", true, true}), Error);
  t.set(7, {"Floor", true, true});
  EXPECT_TRUE(t.is_floor(7));
  EXPECT_TRUE(t.occupies(7));
  EXPECT_FALSE(t.occupies(0));
  EXPECT_FALSE(t.contains(8));
}

TEST(SceneGrid, RejectsUnknownLabelsAndBadParameters) {
  Grid3<std::uint8_t> g({2, 2, 2}, 0);
  g(1, 1, 1) = 9;
  EXPECT_THROW(SceneVoxelGrid(g, synthetic::indoor_labels()), Error);
  Grid3<std::uint8_t> ok({2, 2, 2}, 1);
  EXPECT_THROW(SceneVoxelGrid(ok, synthetic::indoor_labels(), 0.0), Error);
  EXPECT_THROW(SceneVoxelGrid(ok, synthetic::indoor_labels(), 0.02, Vec3::Zero(), 3), Error);
}

TEST(SceneGrid, WorldVoxelConversions) {
  const SceneVoxelGrid s(Grid3<std::uint8_t>({10, 10, 10}), synthetic::indoor_labels(), 0.02, Vec3(-0.1, 0, 0.5));
  EXPECT_EQ(s.world_to_voxel(Vec3(-0.1, 0.0, 0.5)), (Index3{0, 0, 0}));
  EXPECT_EQ(s.world_to_voxel(Vec3(-0.081, 0.039, 0.5)), (Index3{0, 1, 0}));
  EXPECT_EQ(s.world_to_voxel(Vec3(-0.11, 0.0, 0.5)), (Index3{-1, 0, 0}));
  EXPECT_EQ(s.world_to_voxel(s.voxel_to_world({3, 4, 5})), (Index3{3, 4, 5}));
  EXPECT_THROW(s.world_to_voxel(Vec3(1e12, 0, 0)), Error);
}

TEST(DerivedGrids, FreeSpaceAndSupportSourceSemantics) {
  const SceneVoxelGrid s = synthetic::floor_and_bed({20, 20, 10}, {{5, 5, 1}, {10, 10, 4}});
  const BinaryGrid vf = build_free_space_grid(s);
  const BinaryGrid vs = build_support_source_grid(s);
  EXPECT_EQ(vf.values(0, 0, 0), 1);
  EXPECT_EQ(vf.values(0, 0, 1), 0);
  EXPECT_EQ(vs.values(0, 0, 0), 0);
  EXPECT_EQ(vs.values(0, 0, 1), 1);
  EXPECT_EQ(vs.values(6, 6, 2), 0);
  EXPECT_EQ(vf.semantics, GridSemantics::FreeSpace);
  EXPECT_EQ(vs.semantics, GridSemantics::SupportSource);
}

TEST(DerivedGrids, WallsOccupyButDoNotSupport) {
  const SceneVoxelGrid s = synthetic::floor_and_wall_cavity({20, 20, 10}, 10, {{5, 10, 1}, {8, 12, 5}});
  const BinaryGrid vs = build_support_source_grid(s);
  EXPECT_EQ(vs.values(0, 15, 3), 1);
  EXPECT_TRUE(s.occupied({0, 15, 3}));
}

TEST(GaussianKernel, NormalizedAndSymmetric) {
  const auto g = GaussianKernel3D::make();
  double total = 0;
  for (double w : g.kernel.weights()) total += w;
  EXPECT_NEAR(total, 1.0, 1e-15);
  EXPECT_DOUBLE_EQ(g.kernel.at({1, -2, 0}), g.kernel.at({-1, 2, 0}));
  EXPECT_DOUBLE_EQ(g.kernel.at({1, 2, 0}), g.kernel.at({2, 0, 1}));
  EXPECT_THROW(GaussianKernel3D::make(4), Error);
}

TEST(SupportSurface, FlatFloorTopLayerOnly) {
  const SceneVoxelGrid s = synthetic::flat_floor({12, 12, 12});
  const SupportField f = detect_support_surface(s);
  // Top layer of the floor: half-space response is the kernel mass above.
  const auto k = GaussianKernel3D::make();
  double above = 0;
  for (int z = 1; z <= 2; ++z)
    for (int y = -2; y <= 2; ++y)
      for (int x = -2; x <= 2; ++x) above += k.kernel.at({x, y, z});
  for (int y = 0; y < 12; ++y)
    for (int x = 0; x < 12; ++x) EXPECT_NEAR(f.at({x, y, 0}), above, 1e-12);
  EXPECT_EQ(f.nonzero_count(), 144u);
  EXPECT_EQ(f.at({3, 3, 1}), 0.0);
  EXPECT_TRUE(f.row_nonzero(5, 0));
  EXPECT_FALSE(f.row_nonzero(5, 1));
}

TEST(SupportSurface, BedTopIsSupportButCoveredFloorIsNot) {
  const SceneVoxelGrid s = synthetic::floor_and_bed({30, 30, 20}, {{10, 10, 1}, {20, 20, 6}});
  const SupportField f = detect_support_surface(s);
  EXPECT_GT(f.at({15, 15, 5}), 0.0);
  EXPECT_EQ(f.at({15, 15, 4}), 0.0);
  EXPECT_EQ(f.at({15, 15, 0}), 0.0);
  EXPECT_GT(f.at({2, 2, 0}), 0.0);
  const SupportField floor = restrict_to_floor(f, s);
  EXPECT_EQ(floor.at({15, 15, 5}), 0.0);
  EXPECT_EQ(floor.at({2, 2, 0}), f.at({2, 2, 0}));
}

TEST(SupportSurface, TopOfGridCountsAsCovered) {
  Grid3<std::uint8_t> g({6, 6, 3}, synthetic::kFloor);
  const SceneVoxelGrid s(g, synthetic::indoor_labels());
  EXPECT_EQ(detect_support_surface(s).nonzero_count(), 0u);
}

TEST(SupportSurface, WorkersAgree) {
  const SceneVoxelGrid s = synthetic::floor_and_bed({30, 30, 20}, {{10, 10, 1}, {20, 20, 6}});
  const auto a = detect_support_surface(s, GaussianKernel3D::make(), kDefaultSurfaceEps, 1);
  const auto b = detect_support_surface(s, GaussianKernel3D::make(), kDefaultSurfaceEps, 6);
  EXPECT_TRUE(a.values() == b.values());
}

TEST(SupportSurface, UpAxisFollowsScene) {
  // Same floor, but with y as the up axis: the floor is the y = 0 slab.
  Grid3<std::uint8_t> g({8, 8, 8});
  for (int z = 0; z < 8; ++z)
    for (int x = 0; x < 8; ++x) g(x, 0, z) = synthetic::kFloor;
  const SceneVoxelGrid s(g, synthetic::indoor_labels(), 0.02, Vec3::Zero(), 1);
  const SupportField f = detect_support_surface(s);
  EXPECT_GT(f.at({4, 0, 4}), 0.0);
  EXPECT_EQ(f.nonzero_count(), 64u);
}
