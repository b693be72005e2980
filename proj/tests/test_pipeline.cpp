#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "affordance/pipeline.hpp"
#include "affordance/synthetic.hpp"

using namespace affordance;

namespace {

LocationHeatmap uniform_background(int h, int w) {
  LocationHeatmap hm{h, w, std::vector<float>(static_cast<std::size_t>(kHeatmapChannels) * h * w, 0.0f)};
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) hm.values[static_cast<std::size_t>(30) * h * w + y * w + x] = 1.0f;
  return hm;
}

void set_pixel(LocationHeatmap& hm, int x, int y, int channel, float p) {
  const std::size_t plane = static_cast<std::size_t>(hm.h) * hm.w;
  for (int c = 0; c < kHeatmapChannels; ++c) hm.values[c * plane + y * hm.w + x] = 0.0f;
  hm.values[channel * plane + y * hm.w + x] = p;
  hm.values[30 * plane + y * hm.w + x] = 1.0f - p;
}

SynthesisContext context(const PreparedScene& prepared, const synthetic::Demo& d, const PoseClassLibrary& classes,
                         unsigned workers, std::uint64_t seed) {
  SynthesisContext ctx;
  ctx.scene = &prepared;
  ctx.camera = d.camera;
  ctx.classes = &classes;
  ctx.seed = seed;
  ctx.workers = workers;
  ctx.scene_id = "s";
  ctx.camera_id = "c";
  return ctx;
}

}  // namespace

TEST(HeightPrior, MomentsAndClamp) {
  std::mt19937_64 rng(1);
  const HeightPrior prior;
  double sum = 0, sq = 0, lo = 1e9, hi = -1e9;
  const int n = 20000;
  for (int i = 0; i < n; ++i) {
    const double h = sample_height(Category::Sitting, prior, rng);
    sum += h;
    sq += h * h;
    lo = std::min(lo, h);
    hi = std::max(hi, h);
  }
  const double mean = sum / n;
  EXPECT_NEAR(mean, 1.20, 0.01);
  EXPECT_NEAR(std::sqrt(sq / n - mean * mean), 0.10, 0.01);
  EXPECT_GE(lo, 0.90 - 1e-12);
  EXPECT_LE(hi, 1.50 + 1e-12);
  HeightPrior bad;
  bad.standing_std = 0.0;
  EXPECT_THROW(sample_height(Category::Standing, bad, rng), Error);
}

TEST(LocationHeatmap, ValidationRequiresUnitSums) {
  LocationHeatmap hm = uniform_background(3, 4);
  EXPECT_NO_THROW(hm.validate());
  hm.values[5] = 0.5f;
  EXPECT_THROW(hm.validate(), Error);
}

TEST(SampleLocations, OnlyForegroundAboveTauWithArgmaxClass) {
  LocationHeatmap hm = uniform_background(6, 6);
  set_pixel(hm, 1, 2, 4, 0.9f);   // class 5
  set_pixel(hm, 4, 4, 20, 0.7f);  // class 21
  set_pixel(hm, 0, 0, 7, 0.3f);   // below tau
  std::mt19937_64 rng(2);
  const auto s = sample_locations(hm, 500, 0.5, rng);
  int first = 0;
  for (const auto& p : s) {
    const bool a = p.x == 1 && p.y == 2 && p.class_id == 5;
    const bool b = p.x == 4 && p.y == 4 && p.class_id == 21;
    ASSERT_TRUE(a || b);
    first += a;
  }
  EXPECT_NEAR(first / 500.0, 0.9 / 1.6, 0.06);
}

TEST(SampleLocations, AllBackgroundIsNoForeground) {
  std::mt19937_64 rng(3);
  try {
    sample_locations(uniform_background(4, 4), 3, 0.5, rng);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::NoForeground);
  }
}

TEST(DepthHeatmap, JointsBoneMidpointsAndBackground) {
  Joints2 j;
  std::array<double, kJointCount> depth;
  std::array<int, kJointCount> row{};
  for (const Bone& b : kBones) row[b.child] = row[b.parent] + 10;
  for (int k = 0; k < kJointCount; ++k) {
    j[k] = Vec2(20 + 12 * (k % 3 == 0 ? 0 : k), 5 + row[k]);
    depth[k] = 2.0 + 0.125 * k;
  }
  const DepthHeatmap hm = render_depth_heatmap(j, depth, 80, 220);
  int background = 0;
  for (double v : hm.values) background += v == -1.0;
  EXPECT_GT(background, 0);
  for (int k = 0; k < kJointCount; ++k) {
    const double v = hm.at(static_cast<int>(j[k].y()), static_cast<int>(j[k].x()));
    EXPECT_LE(v, depth[k]);
  }
  for (const Bone& b : kBones) {
    const Vec2 a = j[b.parent], c = j[b.child];
    if (std::abs(a.x() - c.x()) > 0 || static_cast<int>(c.y() - a.y()) % 2) continue;
    const Vec2 mid = 0.5 * (a + c);
    EXPECT_DOUBLE_EQ(hm.at(static_cast<int>(mid.y()), static_cast<int>(mid.x())), 0.5 * (depth[b.parent] + depth[b.child]));
  }
}

TEST(DepthHeatmap, SingleBoneExactValues) {
  Joints2 j;
  for (auto& p : j) p = Vec2(-100, -100);
  j[kPelvis] = Vec2(2, 3);
  j[kRightHip] = Vec2(10, 3);
  std::array<double, kJointCount> depth{};
  depth[kPelvis] = 1.0;
  depth[kRightHip] = 3.0;
  const DepthHeatmap hm = render_depth_heatmap(j, depth, 8, 16);
  EXPECT_EQ(hm.at(3, 2), 1.0);
  EXPECT_EQ(hm.at(3, 10), 3.0);
  EXPECT_EQ(hm.at(3, 6), 2.0);
  EXPECT_EQ(hm.at(3, 4), 1.5);
  EXPECT_EQ(hm.at(4, 6), -1.0);
  EXPECT_EQ(hm.at(3, 11), -1.0);
}

TEST(ProposalRng, IndependentStreams) {
  auto a = proposal_rng(5, 0);
  auto b = proposal_rng(5, 1);
  auto c = proposal_rng(5, 0);
  const auto va = a();
  EXPECT_NE(va, b());
  EXPECT_EQ(va, c());
}

TEST(LiftProposal, ExactOffsetsRecoverScaledGroundTruth) {
  const auto d = synthetic::demo(synthetic::DemoScene::FlatFloor, 4, 9);
  const auto classes = synthetic::class_library();
  HeightPrior fixed;
  fixed.standing_std = 1e-12;
  fixed.clamp_sigmas = 0.0;
  for (std::size_t i = 0; i < d.proposals.size(); ++i) {
    // The height that reproduces the ground-truth pelvis depth.
    const Pose3D& gt = d.poses[i];
    const Joints2 j2 = *d.proposals[i].joints2d;
    const double truth = world_to_pixel(gt.joints[kPelvis], d.camera.extrinsics, d.camera.intrinsics).d.value();
    const double unit = estimate_pose_depth(j2, 1.0, d.camera);
    fixed.standing_mean = truth / unit;
    auto rng = proposal_rng(0, i);
    const LiftedPose lifted = lift_proposal(d.proposals[i], &classes, nullptr, d.camera, fixed, rng);
    EXPECT_EQ(lifted.pose.category, Category::Standing);
    EXPECT_EQ(lifted.class_id, d.proposals[i].class_id);
    for (int k = 0; k < kJointCount; ++k) EXPECT_LT((lifted.pose.joints[k] - gt.joints[k]).norm(), 1e-9);
  }
}

TEST(LiftProposal, RetrievalSuppliesDepthAndCategory) {
  const auto d = synthetic::demo(synthetic::DemoScene::FlatFloor, 1, 3);
  Proposal p = d.proposals[0];
  p.depth_offsets.reset();
  p.class_id.reset();
  p.category.reset();
  Pose3DLibrary lib{{"sit", synthetic::sitting_gesture(), Category::Sitting},
                    {"stand", synthetic::standing_gesture(), Category::Standing}};
  const auto index = RetrievalIndex::uniform(lib, 36);
  auto rng = proposal_rng(0, 0);
  EXPECT_THROW(lift_proposal(p, nullptr, nullptr, d.camera, HeightPrior{}, rng), Error);
  const auto classes = synthetic::class_library();
  const LiftedPose lifted = lift_proposal(p, &classes, &index, d.camera, HeightPrior{}, rng);
  EXPECT_EQ(lifted.pose.category, Category::Standing);
  EXPECT_TRUE(lifted.depth.has_value());
}

TEST(Synthesize, AcceptedRecordsPassCheckAndOrderIsStable) {
  const auto d = synthetic::demo(synthetic::DemoScene::Bed, 16, 4);
  const PreparedScene prepared = PreparedScene::build(d.scene);
  const auto classes = synthetic::class_library();
  const auto one = synthesize(d.proposals, context(prepared, d, classes, 1, 42));
  const auto many = synthesize(d.proposals, context(prepared, d, classes, 6, 42));
  ASSERT_EQ(one.records.size(), d.proposals.size());
  EXPECT_GT(one.summary.accepted, 0u);
  EXPECT_EQ(one.summary.accepted + one.summary.discarded_no_support + one.summary.discarded_degenerate, 16u);
  for (std::size_t i = 0; i < one.records.size(); ++i) {
    const auto& a = one.records[i];
    const auto& b = many.records[i];
    EXPECT_EQ(a.index, i);
    EXPECT_EQ(a.proposal_id, d.proposals[i].id);
    EXPECT_EQ(a.status, b.status);
    EXPECT_EQ(a.height, b.height);
    EXPECT_EQ(a.r_s, b.r_s);
    if (a.accepted()) {
      EXPECT_TRUE(check_pose(*a.pose, prepared, ConstraintConfig{}).ok());
      EXPECT_TRUE(a.reason.empty());
      EXPECT_EQ(a.pose->joints, b.pose->joints);
    } else {
      EXPECT_FALSE(a.reason.empty());
    }
  }
  const auto other_seed = synthesize(d.proposals, context(prepared, d, classes, 1, 43));
  EXPECT_NE(other_seed.records[0].height, one.records[0].height);
}

TEST(Synthesize, ErrorsBecomeDiscardedRecords) {
  const auto d = synthetic::demo(synthetic::DemoScene::FlatFloor, 2, 5);
  const PreparedScene prepared = PreparedScene::build(d.scene);
  const auto classes = synthetic::class_library();
  auto proposals = d.proposals;
  (*proposals[1].joints2d)[kHead] = Vec2(300, 470);  // head below the feet
  auto ctx = context(prepared, d, classes, 1, 1);
  const auto res = synthesize(proposals, ctx);
  EXPECT_EQ(res.records[1].reason, "NonPositiveDepth");
  EXPECT_FALSE(res.records[1].pose.has_value());
  EXPECT_EQ(res.summary.discarded_degenerate, 1u);
  ctx.camera.extrinsics = CameraExtrinsics();
  EXPECT_EQ(synthesize(proposals, ctx).records[0].reason, "DegenerateView");
}

TEST(Synthesize, StricterFreeSpaceNeverAcceptsMore) {
  const auto d = synthetic::demo(synthetic::DemoScene::WallCavity, 12, 6);
  const PreparedScene prepared = PreparedScene::build(d.scene);
  const auto classes = synthetic::class_library();
  auto ctx = context(prepared, d, classes, 4, 7);
  const auto loose = synthesize(d.proposals, ctx);
  ctx.constraints.t_f = 0;
  const auto strict = synthesize(d.proposals, ctx);
  EXPECT_LE(strict.summary.accepted, loose.summary.accepted);
}

TEST(GeometryScore, FractionOfValidPoses) {
  const ConstraintConfig cfg;
  const auto scene = synthetic::flat_floor();
  const PreparedScene prepared = PreparedScene::build(scene);
  std::vector<Pose3D> poses{synthetic::standing_on_layer(scene, 0.8, 0.8, 0, 3), synthetic::standing_on_layer(scene, 1.2, 1.0, 2, 3),
                            synthetic::standing_on_layer(scene, 1.0, 1.2, 1, 3), synthetic::standing_on_layer(scene, 1.0, 1.0, 20, 3)};
  const auto report = geometry_score(poses, prepared, cfg);
  EXPECT_DOUBLE_EQ(report.score, 0.75);
  EXPECT_FALSE(report.per_pose[3].ok());
  const auto empty = geometry_score({}, prepared, cfg);
  EXPECT_TRUE(empty.empty);
  EXPECT_EQ(empty.score, 0.0);
}

TEST(ProjectPose, BehindCameraJointsAreFlagged) {
  const Camera cam = synthetic::level_camera(Vec3(0, 0, 1));
  Pose3D pose;
  for (auto& j : pose.joints) j = Vec3(0, 3, 1);
  pose.joints[kHead] = Vec3(0, -1, 1);
  const Overlay o = project_pose(pose, cam);
  EXPECT_TRUE(o.joints[kHead].behind_camera);
  EXPECT_DOUBLE_EQ(o.joints[kPelvis].u, 320.0);
  EXPECT_EQ(o.segments.size(), static_cast<std::size_t>(kBoneCount - 1));
}

TEST(ProposalsFromSamples, RayHitsTheFloor) {
  const auto scene = synthetic::flat_floor();
  const Camera cam = synthetic::tilted_camera(Vec3(1.0, -1.0, 1.2), 0.5);
  const auto classes = synthetic::class_library();
  const std::vector<LocationSample> samples{{320, 400, 3}, {320, 10, 3}};
  const auto props = proposals_from_samples(samples, classes, cam, scene, HeightPrior{});
  ASSERT_EQ(props.size(), 1u);
  EXPECT_EQ(props[0].id, "sample-0");
  EXPECT_EQ(props[0].class_id, 3);
  EXPECT_EQ((*props[0].joints2d)[kPelvis], Vec2(320, 400));
  EXPECT_EQ((*props[0].depth_offsets)[kPelvis], 0.0);
}
