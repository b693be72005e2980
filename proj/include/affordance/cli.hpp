#pragma once

// Command-line front end. Every subcommand parses its inputs, calls one
// library operation and serializes the result.

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <ostream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "affordance/camera.hpp"
#include "affordance/constraints.hpp"
#include "affordance/error.hpp"
#include "affordance/io.hpp"
#include "affordance/lifting.hpp"
#include "affordance/pipeline.hpp"
#include "affordance/scene.hpp"
#include "affordance/skeleton.hpp"

namespace affordance::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitBadInput = 2;
inline constexpr int kExitIo = 3;
inline constexpr const char* kWorkersEnv = "AFFORDANCE_WORKERS";

inline int exit_code(ErrorKind kind) { return kind == ErrorKind::Io ? kExitIo : kExitBadInput; }

struct Overrides {
  std::optional<int> t_f;
  std::optional<double> t_s;
  std::optional<int> proximity;
  std::optional<double> radius;
  std::optional<int> bone_radius;
};

struct Options {
  std::uint64_t seed = 0;
  unsigned workers = std::max(1u, std::thread::hardware_concurrency());
  std::string config;
  bool json = false;

  std::string scene;
  std::string labels;
  std::string camera;
  std::string poses;
  std::string heatmap;
  std::string classes;
  std::string library;
  std::string records;
  std::string out;
  std::string summary;
  std::string scene_id;
  std::string camera_id;
  int rotations = 36;
  int samples = 16;
  double tau = kDefaultForegroundThreshold;
  bool all = false;
  int width = 640;
  int height = 480;
  double pelvis_depth = 0.0;
  std::size_t index = 0;
  Overrides overrides;
};

namespace detail {

inline void add_overrides(CLI::App* cmd, Overrides& o) {
  cmd->add_option("--tf", o.t_f, "free-space threshold T_f (voxels)");
  cmd->add_option("--ts", o.t_s, "support threshold T_s");
  cmd->add_option("--proximity", o.proximity, "standing support proximity (voxels)");
  cmd->add_option("--radius", o.radius, "adjustment search radius (meters)");
  cmd->add_option("--bone-radius", o.bone_radius, "bone dilation radius (voxels)");
}

inline ConstraintConfig constraints(const Options& opt) {
  ConstraintConfig cfg = opt.config.empty() ? ConstraintConfig{} : io::load_config(opt.config);
  const Overrides& o = opt.overrides;
  if (o.t_f) cfg.t_f = *o.t_f;
  if (o.t_s) cfg.t_s = *o.t_s;
  if (o.proximity) cfg.support_proximity = *o.proximity;
  if (o.radius) cfg.search_radius_m = *o.radius;
  if (o.bone_radius) cfg.bone_radius = *o.bone_radius;
  cfg.validate();
  return cfg;
}

inline std::string stem(const std::string& path) { return std::filesystem::path(path).stem().string(); }

inline void write_or_print(const std::string& path, const std::string& text, std::ostream& out) {
  if (path.empty() || path == "-") {
    out << text;
  } else {
    io::atomic_write(path, text);
  }
}

inline Pose3D world_pose(const Proposal& p, const PoseClassLibrary* classes) {
  if (!p.joints3d) throw Error(ErrorKind::InvalidInput, "pose " + p.id + " has no joints3d");
  Category c = Category::Standing;
  if (p.category) {
    c = *p.category;
  } else if (p.class_id && classes) {
    c = pose_category(*p.class_id, *classes);
  } else {
    throw Error(ErrorKind::InvalidInput, "pose " + p.id + " has no category");
  }
  return {*p.joints3d, c};
}

struct ScoredPose {
  std::string id;
  Pose3D pose;
};

/// Accepts affordance records (accepted ones unless `all`) or pose lines with
/// world joints3d.
inline std::vector<ScoredPose> scored_poses(const std::string& path, bool all, const PoseClassLibrary* classes) {
  const std::string text = io::read_file(path);
  std::vector<ScoredPose> out;
  io::detail::for_each_line(text, [&](const std::string& line, std::size_t n) {
    const std::string at = path + ":" + std::to_string(n);
    const auto j = io::parse_json(line, at);
    if (j.is_object() && j.contains("status")) {
      const AffordanceRecord r = io::parse_record(j, at);
      if (!r.pose || (!all && !r.accepted())) return;
      out.push_back({r.proposal_id, *r.pose});
    } else {
      try {
        const Proposal p = io::parse_proposal(j, at, n);
        out.push_back({p.id, world_pose(p, classes)});
      } catch (const Error& e) {
        throw Error(e.kind(), at + ": " + e.what());
      }
    }
  });
  return out;
}

inline std::string check_json(const std::string& id, const CheckResult& c) {
  return "{\"id\":" + io::quote(id) + ",\"free_ok\":" + (c.free_ok ? "true" : "false") +
         ",\"support_ok\":" + (c.support_ok ? "true" : "false") + ",\"r_f\":" + std::to_string(c.r_f) +
         ",\"r_s\":" + io::format_number(c.r_s) + ",\"floor_distance\":" + std::to_string(c.floor_distance) +
         ",\"nearby_support\":" + io::format_number(c.nearby_support) + "}";
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Subcommands

inline int cmd_synthesize(const Options& opt, std::ostream& out) {
  if (opt.poses.empty() == opt.heatmap.empty()) {
    throw Error(ErrorKind::InvalidInput, "exactly one of --poses or --heatmap is required");
  }
  const ConstraintConfig cfg = detail::constraints(opt);
  auto scene = std::make_shared<const SceneVoxelGrid>(io::load_scene(opt.scene, opt.labels));
  const Camera camera = io::load_camera(opt.camera);
  std::optional<PoseClassLibrary> classes;
  if (!opt.classes.empty()) classes = io::load_class_library(opt.classes);
  std::optional<Pose3DLibrary> library;
  if (!opt.library.empty()) library = io::load_exemplars(opt.library);

  std::vector<Proposal> proposals;
  if (!opt.poses.empty()) {
    proposals = io::load_poses(opt.poses);
  } else {
    if (!classes) throw Error(ErrorKind::InvalidInput, "--heatmap requires --classes");
    const LocationHeatmap hm = io::load_heatmap(opt.heatmap);
    auto rng = proposal_rng(opt.seed, static_cast<std::size_t>(-1));
    const auto samples = sample_locations(hm, opt.samples, opt.tau, rng);
    proposals = proposals_from_samples(samples, *classes, camera, *scene, HeightPrior{});
  }

  std::optional<RetrievalIndex> retrieval;
  if (library) retrieval = RetrievalIndex::uniform(*library, opt.rotations);
  const PreparedScene prepared = PreparedScene::build(scene, GaussianKernel3D::make(), kDefaultSurfaceEps, opt.workers);

  SynthesisContext ctx;
  ctx.scene = &prepared;
  ctx.camera = camera;
  ctx.classes = classes ? &*classes : nullptr;
  ctx.retrieval = retrieval ? &*retrieval : nullptr;
  ctx.constraints = cfg;
  ctx.seed = opt.seed;
  ctx.workers = opt.workers;
  ctx.scene_id = opt.scene_id.empty() ? detail::stem(opt.scene) : opt.scene_id;
  ctx.camera_id = opt.camera_id.empty() ? detail::stem(opt.camera) : opt.camera_id;
  const SynthesisResult result = synthesize(proposals, ctx);

  detail::write_or_print(opt.out, io::records_text(result.records), out);
  const std::string summary = io::summary_json(result.summary).dump() + "\n";
  if (!opt.summary.empty()) io::atomic_write(opt.summary, summary);
  if (!opt.out.empty() && opt.out != "-") out << summary;
  return kExitOk;
}

inline int cmd_score(const Options& opt, std::ostream& out, std::ostream& err) {
  const ConstraintConfig cfg = detail::constraints(opt);
  std::optional<PoseClassLibrary> classes;
  if (!opt.classes.empty()) classes = io::load_class_library(opt.classes);
  const auto poses = detail::scored_poses(opt.records, opt.all, classes ? &*classes : nullptr);
  const PreparedScene prepared =
      PreparedScene::build(io::load_scene(opt.scene, opt.labels), GaussianKernel3D::make(), kDefaultSurfaceEps, opt.workers);

  std::vector<Pose3D> just_poses;
  for (const auto& p : poses) just_poses.push_back(p.pose);
  const ScoreReport report = geometry_score(just_poses, prepared, cfg);
  if (report.empty) err << "warning: no poses to score in " << opt.records << "; score is 0\n";

  std::string text;
  if (opt.json) {
    text = "{\"score\":" + io::format_number(report.score) + ",\"count\":" + std::to_string(poses.size()) +
           ",\"empty\":" + (report.empty ? "true" : "false") + ",\"poses\":[";
    for (std::size_t i = 0; i < poses.size(); ++i) text += (i ? "," : "") + detail::check_json(poses[i].id, report.per_pose[i]);
    text += "]}\n";
  } else {
    text = "geometry score " + io::format_number(report.score) + " over " + std::to_string(poses.size()) + " poses\n";
    for (std::size_t i = 0; i < poses.size(); ++i) {
      const auto& c = report.per_pose[i];
      text += poses[i].id + (c.ok() ? " ok" : " fail") + " free=" + (c.free_ok ? "1" : "0") +
              " support=" + (c.support_ok ? "1" : "0") + " r_f=" + std::to_string(c.r_f) +
              " r_s=" + io::format_number(c.r_s) + "\n";
    }
  }
  detail::write_or_print(opt.out, text, out);
  return kExitOk;
}

inline int cmd_validate(const Options& opt, std::ostream& out) {
  std::vector<std::string> checked;
  if (!opt.config.empty() || opt.overrides.t_f || opt.overrides.t_s) {
    detail::constraints(opt);
    checked.push_back("config");
  }
  if (!opt.scene.empty() || !opt.labels.empty()) {
    if (opt.scene.empty() || opt.labels.empty()) throw Error(ErrorKind::InvalidInput, "--scene and --labels go together");
    io::load_scene(opt.scene, opt.labels);
    checked.push_back("scene");
  }
  if (!opt.camera.empty()) {
    io::load_camera(opt.camera);
    checked.push_back("camera");
  }
  std::optional<PoseClassLibrary> classes;
  if (!opt.classes.empty()) {
    classes = io::load_class_library(opt.classes);
    checked.push_back("classes");
  }
  if (!opt.poses.empty()) {
    for (const auto& p : io::load_poses(opt.poses)) {
      if (p.class_id && classes) classes->at(*p.class_id);
    }
    checked.push_back("poses");
  }
  if (!opt.library.empty()) {
    io::load_exemplars(opt.library);
    checked.push_back("library");
  }
  if (!opt.heatmap.empty()) {
    io::load_heatmap(opt.heatmap);
    checked.push_back("heatmap");
  }
  if (!opt.records.empty()) {
    io::detail::for_each_line(io::read_file(opt.records), [&](const std::string& line, std::size_t n) {
      const std::string at = opt.records + ":" + std::to_string(n);
      io::parse_record(io::parse_json(line, at), at);
    });
    checked.push_back("records");
  }
  if (checked.empty()) throw Error(ErrorKind::InvalidInput, "nothing to validate");
  if (opt.json) {
    out << nlohmann::json{{"ok", true}, {"checked", checked}}.dump() << "\n";
  } else {
    for (const auto& c : checked) out << c << ": ok\n";
  }
  return kExitOk;
}

inline int cmd_lift(const Options& opt, std::ostream& out) {
  const Camera camera = io::load_camera(opt.camera);
  std::optional<PoseClassLibrary> classes;
  if (!opt.classes.empty()) classes = io::load_class_library(opt.classes);
  std::optional<Pose3DLibrary> library;
  if (!opt.library.empty()) library = io::load_exemplars(opt.library);
  std::optional<RetrievalIndex> retrieval;
  if (library) retrieval = RetrievalIndex::uniform(*library, opt.rotations);
  const auto proposals = io::load_poses(opt.poses);

  std::string text;
  for (std::size_t i = 0; i < proposals.size(); ++i) {
    const Proposal& p = proposals[i];
    auto rng = proposal_rng(opt.seed, i);
    LiftedPose lifted;
    try {
      lifted = lift_proposal(p, classes ? &*classes : nullptr, retrieval ? &*retrieval : nullptr, camera, HeightPrior{}, rng);
    } catch (const Error& e) {
      throw Error(e.kind(), "pose " + p.id + ": " + e.what());
    }
    auto opt_num = [](const std::optional<double>& v) { return v ? io::format_number(*v) : std::string("null"); };
    text += "{\"id\":" + io::quote(p.id) +
            ",\"class\":" + (lifted.class_id ? std::to_string(*lifted.class_id) : std::string("null")) +
            ",\"category\":" + io::quote(to_string(lifted.pose.category)) + ",\"height\":" + opt_num(lifted.height) +
            ",\"depth\":" + opt_num(lifted.depth) + ",\"joints3d\":" + io::format_joints(lifted.pose.joints) + "}\n";
  }
  detail::write_or_print(opt.out, text, out);
  return kExitOk;
}

inline int cmd_adjust(const Options& opt, std::ostream& out) {
  const ConstraintConfig cfg = detail::constraints(opt);
  std::optional<PoseClassLibrary> classes;
  if (!opt.classes.empty()) classes = io::load_class_library(opt.classes);
  const auto proposals = io::load_poses(opt.poses);
  const PreparedScene prepared =
      PreparedScene::build(io::load_scene(opt.scene, opt.labels), GaussianKernel3D::make(), kDefaultSurfaceEps, opt.workers);

  std::string text;
  for (const auto& p : proposals) {
    const Pose3D pose = detail::world_pose(p, classes ? &*classes : nullptr);
    const AdjustResult r = adjust_pose(pose, prepared, cfg);
    const Pose3D& shown = r.accepted() ? r.pose : pose;
    text += "{\"id\":" + io::quote(p.id) + ",\"category\":" + io::quote(to_string(pose.category)) +
            ",\"status\":" + io::quote(to_string(r.status)) + ",\"displacement\":[" +
            std::to_string(r.displacement.x) + "," + std::to_string(r.displacement.y) + "," +
            std::to_string(r.displacement.z) + "],\"r_f\":" + std::to_string(r.r_f) +
            ",\"r_s\":" + io::format_number(r.r_s) + ",\"joints3d\":" + io::format_joints(shown.joints) + "}\n";
  }
  detail::write_or_print(opt.out, text, out);
  return kExitOk;
}

inline int cmd_render_heatmap(const Options& opt, std::ostream& out) {
  const auto proposals = io::load_poses(opt.poses);
  if (opt.index >= proposals.size()) throw Error(ErrorKind::InvalidInput, "--index beyond the number of poses");
  const Proposal& p = proposals[opt.index];
  Joints2 joints;
  std::array<double, kJointCount> depths{};
  if (p.joints2d && p.depth_offsets) {
    joints = *p.joints2d;
    for (int j = 0; j < kJointCount; ++j) depths[j] = opt.pelvis_depth + ((*p.depth_offsets)[j] - (*p.depth_offsets)[kPelvis]);
  } else if (p.joints3d && !opt.camera.empty()) {
    const Camera cam = io::load_camera(opt.camera);
    for (int j = 0; j < kJointCount; ++j) {
      const PixelPoint px = world_to_pixel((*p.joints3d)[j], cam.extrinsics, cam.intrinsics);
      joints[j] = Vec2(px.u, px.v);
      depths[j] = *px.d;
    }
  } else {
    throw Error(ErrorKind::InvalidInput, "pose " + p.id + " needs joints2d with depth_offsets, or joints3d with --camera");
  }
  const DepthHeatmap hm = render_depth_heatmap(joints, depths, opt.height, opt.width);
  std::string text = "{\"id\":" + io::quote(p.id) + ",\"h\":" + std::to_string(hm.h) + ",\"w\":" + std::to_string(hm.w) +
                     ",\"values\":[";
  for (std::size_t i = 0; i < hm.values.size(); ++i) text += (i ? "," : "") + io::format_number(hm.values[i]);
  text += "]}\n";
  detail::write_or_print(opt.out, text, out);
  return kExitOk;
}

inline int cmd_project(const Options& opt, std::ostream& out) {
  const Camera cam = io::load_camera(opt.camera);
  std::optional<PoseClassLibrary> classes;
  if (!opt.classes.empty()) classes = io::load_class_library(opt.classes);
  const std::string& source = opt.records.empty() ? opt.poses : opt.records;
  if (source.empty()) throw Error(ErrorKind::InvalidInput, "--records or --poses is required");
  const auto poses = detail::scored_poses(source, true, classes ? &*classes : nullptr);

  std::string text;
  for (const auto& p : poses) {
    const Overlay o = project_pose(p.pose, cam);
    text += "{\"id\":" + io::quote(p.id) + ",\"joints\":[";
    for (int j = 0; j < kJointCount; ++j) {
      const auto& pj = o.joints[j];
      text += (j ? "," : "");
      text += pj.behind_camera ? "null" : "[" + io::format_number(pj.u) + "," + io::format_number(pj.v) + "," +
                                              io::format_number(pj.depth) + "]";
    }
    text += "],\"segments\":[";
    for (std::size_t s = 0; s < o.segments.size(); ++s) {
      text += (s ? "," : "") + std::string("[") + std::to_string(o.segments[s][0]) + "," +
              std::to_string(o.segments[s][1]) + "]";
    }
    text += "]}\n";
  }
  detail::write_or_print(opt.out, text, out);
  return kExitOk;
}

// ---------------------------------------------------------------------------
// Entry point

inline int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  Options opt;
  CLI::App app{"Physically plausible human pose synthesis in voxelized indoor scenes", "affordance"};
  app.require_subcommand(1);
  app.add_option("--seed", opt.seed, "random seed")->capture_default_str();
  app.add_option("--workers", opt.workers, "worker threads")->envname(kWorkersEnv)->check(CLI::PositiveNumber);
  app.add_option("--config", opt.config, "constraint config (TOML or JSON)")->check(CLI::ExistingFile);
  app.add_flag("--json", opt.json, "machine-readable output");

  auto scene_opts = [&](CLI::App* cmd, bool required) {
    cmd->add_option("--scene", opt.scene, "scene voxel grid (.svx)")->required(required);
    cmd->add_option("--labels", opt.labels, "label table (JSON)")->required(required);
  };

  CLI::App* synth = app.add_subcommand("synthesize", "lift, adjust and validate pose proposals");
  scene_opts(synth, true);
  synth->add_option("--camera", opt.camera, "camera (JSON)")->required();
  synth->add_option("--poses", opt.poses, "pose proposals (JSONL)");
  synth->add_option("--heatmap", opt.heatmap, "location heat map (.hm31)");
  synth->add_option("--samples", opt.samples, "heat map samples")->check(CLI::NonNegativeNumber);
  synth->add_option("--tau", opt.tau, "foreground threshold");
  synth->add_option("--classes", opt.classes, "pose class library (JSON)");
  synth->add_option("--library", opt.library, "3D exemplar library (JSONL)");
  synth->add_option("--rotations", opt.rotations, "retrieval rotations")->check(CLI::PositiveNumber);
  synth->add_option("--out", opt.out, "records output (JSONL)")->required();
  synth->add_option("--summary", opt.summary, "summary output (JSON)");
  synth->add_option("--scene-id", opt.scene_id, "scene identifier in records");
  synth->add_option("--camera-id", opt.camera_id, "camera identifier in records");
  detail::add_overrides(synth, opt.overrides);

  CLI::App* score = app.add_subcommand("score", "geometry score of a pose set");
  scene_opts(score, true);
  score->add_option("--records", opt.records, "records or poses (JSONL)")->required();
  score->add_option("--classes", opt.classes, "pose class library (JSON)");
  score->add_flag("--all", opt.all, "include discarded records");
  score->add_option("--out", opt.out, "report output");
  detail::add_overrides(score, opt.overrides);

  CLI::App* validate = app.add_subcommand("validate", "check input files");
  scene_opts(validate, false);
  validate->add_option("--camera", opt.camera, "camera (JSON)");
  validate->add_option("--poses", opt.poses, "poses (JSONL)");
  validate->add_option("--classes", opt.classes, "pose class library (JSON)");
  validate->add_option("--library", opt.library, "3D exemplar library (JSONL)");
  validate->add_option("--heatmap", opt.heatmap, "location heat map (.hm31)");
  validate->add_option("--records", opt.records, "records (JSONL)");

  CLI::App* lift = app.add_subcommand("lift", "lift 2D poses into world coordinates");
  lift->add_option("--camera", opt.camera, "camera (JSON)")->required();
  lift->add_option("--poses", opt.poses, "pose proposals (JSONL)")->required();
  lift->add_option("--classes", opt.classes, "pose class library (JSON)");
  lift->add_option("--library", opt.library, "3D exemplar library (JSONL)");
  lift->add_option("--rotations", opt.rotations, "retrieval rotations")->check(CLI::PositiveNumber);
  lift->add_option("--out", opt.out, "output (JSONL)");

  CLI::App* adjust = app.add_subcommand("adjust", "move world poses to the best supported location");
  scene_opts(adjust, true);
  adjust->add_option("--poses", opt.poses, "world poses (JSONL)")->required();
  adjust->add_option("--classes", opt.classes, "pose class library (JSON)");
  adjust->add_option("--out", opt.out, "output (JSONL)");
  detail::add_overrides(adjust, opt.overrides);

  CLI::App* render = app.add_subcommand("render-heatmap", "render a depth heat map for one pose");
  render->add_option("--poses", opt.poses, "poses (JSONL)")->required();
  render->add_option("--camera", opt.camera, "camera for joints3d poses (JSON)");
  render->add_option("--index", opt.index, "pose index");
  render->add_option("--width", opt.width, "image width")->check(CLI::PositiveNumber);
  render->add_option("--height", opt.height, "image height")->check(CLI::PositiveNumber);
  render->add_option("--pelvis-depth", opt.pelvis_depth, "pelvis depth for depth_offsets input");
  render->add_option("--out", opt.out, "output (JSON)");

  CLI::App* project = app.add_subcommand("project", "project world poses into the image");
  project->add_option("--camera", opt.camera, "camera (JSON)")->required();
  project->add_option("--records", opt.records, "records (JSONL)");
  project->add_option("--poses", opt.poses, "world poses (JSONL)");
  project->add_option("--classes", opt.classes, "pose class library (JSON)");
  project->add_option("--out", opt.out, "output (JSONL)");

  for (CLI::App* cmd : {synth, score, validate, lift, adjust, render, project}) cmd->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return kExitBadInput;
  }

  try {
    if (*synth) return cmd_synthesize(opt, out);
    if (*score) return cmd_score(opt, out, err);
    if (*validate) return cmd_validate(opt, out);
    if (*lift) return cmd_lift(opt, out);
    if (*adjust) return cmd_adjust(opt, out);
    if (*render) return cmd_render_heatmap(opt, out);
    if (*project) return cmd_project(opt, out);
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return exit_code(e.kind());
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitBadInput;
  }
  return kExitBadInput;
}

}  // namespace affordance::cli
