#pragma once

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <random>
#include <string>
#include <thread>
#include <vector>

#include "affordance/camera.hpp"
#include "affordance/constraints.hpp"
#include "affordance/error.hpp"
#include "affordance/lifting.hpp"
#include "affordance/scene.hpp"
#include "affordance/skeleton.hpp"

namespace affordance {

struct HeightPrior {
  double standing_mean = 1.65;
  double standing_std = 0.10;
  double sitting_mean = 1.20;
  double sitting_std = 0.10;
  double clamp_sigmas = 3.0;

  double mean(Category c) const { return c == Category::Standing ? standing_mean : sitting_mean; }
  double stddev(Category c) const { return c == Category::Standing ? standing_std : sitting_std; }
};

/// Gaussian draw clamped to mean +- clamp_sigmas * std.
template <class Rng>
double sample_height(Category c, const HeightPrior& prior, Rng& rng) {
  const double mu = prior.mean(c);
  const double sd = prior.stddev(c);
  if (!(sd > 0.0) || !(mu - prior.clamp_sigmas * sd > 0.0)) {
    throw Error(ErrorKind::InvalidInput, "height prior must have std > 0 and a positive lower clamp");
  }
  std::normal_distribution<double> dist(mu, sd);
  return std::clamp(dist(rng), mu - prior.clamp_sigmas * sd, mu + prior.clamp_sigmas * sd);
}

inline constexpr int kHeatmapChannels = 31;

/// 31 x h x w class probabilities, channel-major; channel index 30 is the
/// background class.
struct LocationHeatmap {
  int h = 0;
  int w = 0;
  std::vector<float> values;

  float at(int channel, int y, int x) const {
    return values[static_cast<std::size_t>(channel) * h * w + static_cast<std::size_t>(y) * w + x];
  }

  void validate(double tolerance = 1e-6) const {
    if (h <= 0 || w <= 0) throw Error(ErrorKind::InvalidInput, "heat map dimensions must be positive");
    if (values.size() != static_cast<std::size_t>(kHeatmapChannels) * h * w) {
      throw Error(ErrorKind::InvalidInput, "heat map value count does not match 31 x h x w");
    }
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        double sum = 0.0;
        for (int c = 0; c < kHeatmapChannels; ++c) {
          const float v = at(c, y, x);
          if (!(v >= 0.0f) || !std::isfinite(v)) throw Error(ErrorKind::InvalidInput, "heat map values must be >= 0");
          sum += v;
        }
        if (std::abs(sum - 1.0) > tolerance) {
          throw Error(ErrorKind::InvalidInput,
                      "heat map pixel (" + std::to_string(x) + ", " + std::to_string(y) + ") does not sum to 1");
        }
      }
    }
  }
};

struct LocationSample {
  int x = 0;
  int y = 0;
  int class_id = 1;
};

inline constexpr double kDefaultForegroundThreshold = 0.5;

/// Draws n pixels with probability proportional to their strongest foreground
/// channel, among pixels where that value exceeds tau. The class is the
/// argmax foreground channel (smallest class on ties).
template <class Rng>
std::vector<LocationSample> sample_locations(const LocationHeatmap& hm, int n, double tau, Rng& rng) {
  if (n < 0) throw Error(ErrorKind::InvalidInput, "sample count must be >= 0");
  if (!(tau >= 0.0 && tau < 1.0)) throw Error(ErrorKind::InvalidInput, "tau must lie in [0, 1)");
  std::vector<LocationSample> eligible;
  std::vector<double> weights;
  for (int y = 0; y < hm.h; ++y) {
    for (int x = 0; x < hm.w; ++x) {
      int best = 0;
      float best_v = hm.at(0, y, x);
      for (int c = 1; c < kPoseClassCount; ++c) {
        const float v = hm.at(c, y, x);
        if (v > best_v) {
          best_v = v;
          best = c;
        }
      }
      if (best_v > tau) {
        eligible.push_back({x, y, best + 1});
        weights.push_back(best_v);
      }
    }
  }
  if (eligible.empty()) throw Error(ErrorKind::NoForeground, "no pixel exceeds the foreground threshold");
  std::discrete_distribution<std::size_t> pick(weights.begin(), weights.end());
  std::vector<LocationSample> out;
  out.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) out.push_back(eligible[pick(rng)]);
  return out;
}

/// h x w map holding, on skeleton pixels, the depth interpolated along the
/// bone and -1 everywhere else.
struct DepthHeatmap {
  int h = 0;
  int w = 0;
  std::vector<double> values;

  double at(int y, int x) const { return values[static_cast<std::size_t>(y) * w + x]; }
};

inline constexpr double kBackgroundDepth = -1.0;

/// Each bone becomes a 1-pixel integer line between its rounded endpoint
/// pixels; pixel k of n takes (1 - k/n) d_a + (k/n) d_b. Overlaps keep the
/// nearest depth.
inline DepthHeatmap render_depth_heatmap(const Joints2& joints, const std::array<double, kJointCount>& depths, int h,
                                         int w) {
  if (h <= 0 || w <= 0) throw Error(ErrorKind::InvalidInput, "image dimensions must be positive");
  for (int j = 0; j < kJointCount; ++j) {
    if (!joints[j].allFinite() || !std::isfinite(depths[j])) {
      throw Error(ErrorKind::InvalidInput, "joint " + std::to_string(j) + " is not finite");
    }
  }
  DepthHeatmap out{h, w, std::vector<double>(static_cast<std::size_t>(h) * w, kBackgroundDepth)};
  auto pixel = [](const Vec2& p) {
    return std::array<long long, 2>{std::llround(p.x()), std::llround(p.y())};
  };
  for (const Bone& bone : kBones) {
    const auto a = pixel(joints[bone.parent]);
    const auto b = pixel(joints[bone.child]);
    const double da = depths[bone.parent];
    const double db = depths[bone.child];
    const long long dx = b[0] - a[0];
    const long long dy = b[1] - a[1];
    const long long n = std::max(std::llabs(dx), std::llabs(dy));
    for (long long k = 0; k <= n; ++k) {
      const long long x = n == 0 ? a[0] : a[0] + detail::round_div(k * dx, n);
      const long long y = n == 0 ? a[1] : a[1] + detail::round_div(k * dy, n);
      if (x < 0 || y < 0 || x >= w || y >= h) continue;
      const double t = n == 0 ? 0.0 : static_cast<double>(k) / static_cast<double>(n);
      const double depth = (1.0 - t) * da + t * db;
      double& cell = out.values[static_cast<std::size_t>(y) * w + static_cast<std::size_t>(x)];
      if (cell == kBackgroundDepth || depth < cell) cell = depth;
    }
  }
  return out;
}

/// One pose proposal as ingested from pose JSONL.
struct Proposal {
  std::string id;
  std::optional<Joints2> joints2d;
  std::optional<std::array<double, kJointCount>> depth_offsets;
  std::optional<Joints3> joints3d;
  std::optional<int> class_id;
  std::optional<Category> category;
};

enum class RecordStatus { Accepted, Discarded };

struct AffordanceRecord {
  std::string scene_id;
  std::string camera_id;
  std::string proposal_id;
  std::size_t index = 0;
  std::optional<int> class_id;
  std::optional<Category> category;
  std::optional<double> height;
  std::optional<double> depth;
  std::optional<Pose3D> pose;
  std::array<std::optional<Vec2>, kJointCount> joints2d{};
  int r_f = 0;
  double r_s = 0.0;
  RecordStatus status = RecordStatus::Discarded;
  std::string reason;  // empty when accepted
  std::uint64_t seed = 0;

  bool accepted() const { return status == RecordStatus::Accepted; }
};

struct SynthesisSummary {
  std::size_t proposed = 0;
  std::size_t accepted = 0;
  std::size_t discarded_no_support = 0;
  std::size_t discarded_degenerate = 0;
};

struct SynthesisContext {
  const PreparedScene* scene = nullptr;
  Camera camera;
  const PoseClassLibrary* classes = nullptr;  // optional
  const RetrievalIndex* retrieval = nullptr;  // optional, for proposals without depth information
  HeightPrior prior;
  ConstraintConfig constraints;
  std::uint64_t seed = 0;
  unsigned workers = 1;
  std::string scene_id;
  std::string camera_id;
};

struct SynthesisResult {
  std::vector<AffordanceRecord> records;
  SynthesisSummary summary;
};

/// Per-proposal generator, independent of scheduling.
inline std::mt19937_64 proposal_rng(std::uint64_t seed, std::size_t index) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(static_cast<std::uint64_t>(index) >> 32)};
  return std::mt19937_64(seq);
}

namespace detail {

inline void project_joints(AffordanceRecord& rec, const Camera& cam) {
  for (int j = 0; j < kJointCount; ++j) {
    const Vec3 c = world_to_camera(rec.pose->joints[j], cam.extrinsics);
    if (c.z() > 0.0) {
      const PixelPoint p = camera_to_pixel(c, cam.intrinsics);
      rec.joints2d[j] = Vec2(p.u, p.v);
    } else {
      rec.joints2d[j].reset();
    }
  }
}

}  // namespace detail

/// A proposal resolved to a category and lifted into world coordinates.
struct LiftedPose {
  std::optional<int> class_id;
  Pose3D pose;
  std::optional<double> height;  // absent for proposals given directly in 3D
  std::optional<double> depth;
};

/// Resolves class and category, picks a depth-offset source (explicit offsets,
/// a gesture-frame joints3d, or nearest-neighbour retrieval), samples a height,
/// estimates the pelvis depth and back-projects every joint. Proposals with
/// only joints3d are taken as world-frame poses.
template <class Rng>
LiftedPose lift_proposal(const Proposal& prop, const PoseClassLibrary* classes, const RetrievalIndex* retrieval,
                         const Camera& camera, const HeightPrior& prior, Rng& rng) {
  if (!prop.joints2d && !prop.joints3d) throw Error(ErrorKind::InvalidInput, "proposal has neither joints2d nor joints3d");

  std::optional<Joints3> gesture = prop.joints2d ? prop.joints3d : std::nullopt;
  const bool needs_gesture = prop.joints2d && !prop.depth_offsets && !gesture;
  const bool needs_class = !prop.class_id && !prop.category;
  if (prop.joints2d && !gesture && (needs_gesture || needs_class) && retrieval) {
    gesture = retrieval->query(*prop.joints2d).pose.joints;
  }
  if (needs_gesture && !gesture) {
    throw Error(ErrorKind::InvalidInput, "proposal " + prop.id + " needs depth_offsets, joints3d or a 3D pose library");
  }

  LiftedPose out;
  if (prop.class_id) {
    if (!classes) throw Error(ErrorKind::InvalidInput, "proposal " + prop.id + " has a class but no class library was given");
    out.pose.category = pose_category(*prop.class_id, *classes);
    out.class_id = prop.class_id;
  } else {
    const Joints3* shape = gesture ? &*gesture : (prop.joints3d ? &*prop.joints3d : nullptr);
    if (classes && shape) out.class_id = assign_pose_class(*shape, *classes);
    if (prop.category) {
      out.pose.category = *prop.category;
    } else if (out.class_id) {
      out.pose.category = pose_category(*out.class_id, *classes);
    } else {
      throw Error(ErrorKind::InvalidInput, "cannot resolve the category of proposal " + prop.id);
    }
  }

  if (prop.joints2d) {
    const auto offsets = prop.depth_offsets ? *prop.depth_offsets : depth_offsets(*gesture);
    out.height = sample_height(out.pose.category, prior, rng);
    out.depth = estimate_pose_depth(*prop.joints2d, *out.height, camera);
    out.pose.joints = lift_pose(*prop.joints2d, offsets, *out.depth, camera);
  } else {
    out.pose.joints = *prop.joints3d;
  }
  if (!out.pose.finite()) throw Error(ErrorKind::DegeneratePose, "lifted pose is not finite");
  return out;
}

namespace detail {

inline AffordanceRecord synthesize_one(const Proposal& prop, std::size_t index, const SynthesisContext& ctx) {
  AffordanceRecord rec;
  rec.scene_id = ctx.scene_id;
  rec.camera_id = ctx.camera_id;
  rec.proposal_id = prop.id;
  rec.index = index;
  rec.seed = ctx.seed;
  auto rng = proposal_rng(ctx.seed, index);

  try {
    const LiftedPose lifted = lift_proposal(prop, ctx.classes, ctx.retrieval, ctx.camera, ctx.prior, rng);
    rec.class_id = lifted.class_id;
    rec.category = lifted.pose.category;
    rec.height = lifted.height;
    rec.depth = lifted.depth;

    const AdjustResult adj = adjust_pose(lifted.pose, *ctx.scene, ctx.constraints);
    rec.pose = adj.pose;
    rec.r_f = adj.r_f;
    rec.r_s = adj.r_s;
    if (adj.accepted()) {
      const CheckResult check = check_pose(adj.pose, *ctx.scene, ctx.constraints);
      if (check.ok()) {
        rec.status = RecordStatus::Accepted;
      } else {
        rec.reason = "failed_revalidation";
      }
    } else {
      rec.reason = std::string(to_string(adj.status));
    }
    project_joints(rec, ctx.camera);
  } catch (const Error& e) {
    rec.status = RecordStatus::Discarded;
    rec.reason = std::string(to_string(e.kind()));
    rec.pose.reset();
    rec.joints2d = {};
  }
  return rec;
}

}  // namespace detail

/// Lifts, adjusts and validates every proposal. Records come back in input
/// order and depend only on the inputs and the seed, not on `workers`.
inline SynthesisResult synthesize(const std::vector<Proposal>& proposals, const SynthesisContext& ctx) {
  if (!ctx.scene) throw Error(ErrorKind::InvalidInput, "synthesis needs a prepared scene");
  ctx.constraints.validate();
  SynthesisResult out;
  out.records.resize(proposals.size());
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i = next++; i < proposals.size(); i = next++) {
      out.records[i] = detail::synthesize_one(proposals[i], i, ctx);
    }
  };
  const unsigned workers = std::max(1u, std::min<unsigned>(ctx.workers, static_cast<unsigned>(proposals.size())));
  if (workers <= 1) {
    work();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned t = 0; t < workers; ++t) pool.emplace_back(work);
  }
  out.summary.proposed = proposals.size();
  for (const auto& r : out.records) {
    if (r.accepted()) {
      ++out.summary.accepted;
    } else if (r.reason == to_string(AdjustStatus::NoFeasibleLocation) ||
               r.reason == to_string(AdjustStatus::InsufficientSupport) || r.reason == "failed_revalidation") {
      ++out.summary.discarded_no_support;
    } else {
      ++out.summary.discarded_degenerate;
    }
  }
  return out;
}

struct ScoreReport {
  double score = 0.0;
  bool empty = false;  // no poses: score is reported as 0
  std::vector<CheckResult> per_pose;
};

/// Fraction of poses that satisfy both the free-space and support rules.
inline ScoreReport geometry_score(const std::vector<Pose3D>& poses, const PreparedScene& prepared,
                                  const ConstraintConfig& cfg) {
  ScoreReport out;
  out.per_pose.reserve(poses.size());
  std::size_t ok = 0;
  for (const auto& p : poses) {
    out.per_pose.push_back(check_pose(p, prepared, cfg));
    ok += out.per_pose.back().ok() ? 1 : 0;
  }
  out.empty = poses.empty();
  out.score = poses.empty() ? 0.0 : static_cast<double>(ok) / static_cast<double>(poses.size());
  return out;
}

struct ProjectedJoint {
  double u = 0.0;
  double v = 0.0;
  double depth = 0.0;
  bool behind_camera = false;
};

struct Overlay {
  std::array<ProjectedJoint, kJointCount> joints{};
  std::vector<std::array<int, 2>> segments;  // bones whose endpoints are both in front of the camera
};

inline Overlay project_pose(const Pose3D& pose, const Camera& cam) {
  Overlay out;
  for (int j = 0; j < kJointCount; ++j) {
    const Vec3 c = world_to_camera(pose.joints[j], cam.extrinsics);
    auto& pj = out.joints[j];
    pj.depth = c.z();
    if (c.z() > 0.0) {
      const PixelPoint p = camera_to_pixel(c, cam.intrinsics);
      pj.u = p.u;
      pj.v = p.v;
    } else {
      pj.behind_camera = true;
    }
  }
  for (const Bone& b : kBones) {
    if (!out.joints[b.parent].behind_camera && !out.joints[b.child].behind_camera) out.segments.push_back({b.parent, b.child});
  }
  return out;
}

inline Overlay project_record(const AffordanceRecord& rec, const Camera& cam) {
  if (!rec.pose) throw Error(ErrorKind::InvalidInput, "record " + rec.proposal_id + " has no pose");
  return project_pose(*rec.pose, cam);
}

/// Turns heat-map samples into 2D proposals: the class center, scaled to the
/// prior's mean height, is drawn around the sampled pelvis pixel at the depth
/// where that pixel's ray first meets occupied space. Samples whose ray misses
/// the scene are dropped.
inline std::vector<Proposal> proposals_from_samples(const std::vector<LocationSample>& samples,
                                                    const PoseClassLibrary& classes, const Camera& cam,
                                                    const SceneVoxelGrid& scene, const HeightPrior& prior) {
  std::vector<Proposal> out;
  const Dims3 d = scene.dims();
  const Vec3 center = cam.extrinsics.translation();
  double reach = 0.0;
  for (int c = 0; c < 8; ++c) {
    const Vec3 corner = scene.origin() + scene.voxel_size() * Vec3((c & 1) ? d.nx : 0, (c & 2) ? d.ny : 0, (c & 4) ? d.nz : 0);
    reach = std::max(reach, (corner - center).norm());
  }
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const auto& s = samples[i];
    const PoseClass& pc = classes.at(s.class_id);
    const Vec3 ray = cam.extrinsics.rotation() *
                     Vec3((s.x - cam.intrinsics.ox) / cam.intrinsics.f, (s.y - cam.intrinsics.oy) / cam.intrinsics.f, 1.0);
    const double step = 0.5 * scene.voxel_size() / ray.norm();
    std::optional<double> hit;
    for (double depth = step; depth * ray.norm() <= reach; depth += step) {
      const Index3 v = scene.world_to_voxel(center + depth * ray);
      if (d.contains(v) && scene.occupied(v)) {
        hit = depth;
        break;
      }
    }
    if (!hit) continue;
    const double extent = pc.center[lowest_joint(project_xy(pc.center))].y() - pc.center[kHead].y();
    if (!(extent > 0.0)) continue;
    const double metric = prior.mean(pc.category) / extent;
    const double pixels = cam.intrinsics.f / *hit;
    Proposal p;
    p.id = "sample-" + std::to_string(i);
    p.class_id = s.class_id;
    Joints2 j2;
    std::array<double, kJointCount> offsets;
    for (int j = 0; j < kJointCount; ++j) {
      j2[j] = Vec2(s.x, s.y) + pixels * metric * pc.center[j].head<2>();
      offsets[j] = metric * pc.center[j].z();
    }
    p.joints2d = j2;
    p.depth_offsets = offsets;
    out.push_back(std::move(p));
  }
  return out;
}

}  // namespace affordance
