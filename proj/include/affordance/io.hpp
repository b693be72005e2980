#pragma once

#include <array>
#include <bit>
#include <charconv>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include <json.hpp>

#include "affordance/camera.hpp"
#include "affordance/constraints.hpp"
#include "affordance/error.hpp"
#include "affordance/pipeline.hpp"
#include "affordance/scene.hpp"
#include "affordance/skeleton.hpp"

namespace affordance::io {

using json = nlohmann::json;
namespace fs = std::filesystem;

// ---------------------------------------------------------------------------
// Plain file access

inline std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::InvalidInput, "cannot open " + path.string());
  return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

/// Writes to a sibling temporary file and renames it into place.
inline void atomic_write(const fs::path& path, std::string_view content) {
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorKind::Io, "cannot write " + tmp.string());
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    out.flush();
    if (!out) throw Error(ErrorKind::Io, "write failed for " + tmp.string());
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) {
    fs::remove(tmp, ec);
    throw Error(ErrorKind::Io, "cannot move output into place at " + path.string());
  }
}

inline json parse_json(std::string_view text, const std::string& where) {
  try {
    return json::parse(text);
  } catch (const json::exception& e) {
    throw Error(ErrorKind::InvalidInput, where + ": " + e.what());
  }
}

// ---------------------------------------------------------------------------
// Little-endian primitives

namespace detail {

class ByteWriter {
 public:
  void u8(std::uint8_t v) { bytes_.push_back(static_cast<char>(v)); }
  void u32(std::uint32_t v) {
    for (int i = 0; i < 4; ++i) u8(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void u64(std::uint64_t v) {
    for (int i = 0; i < 8; ++i) u8(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void f32(float v) { u32(std::bit_cast<std::uint32_t>(v)); }
  void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }
  void raw(std::string_view s) { bytes_.append(s); }
  std::string take() { return std::move(bytes_); }

 private:
  std::string bytes_;
};

class ByteReader {
 public:
  ByteReader(std::string_view bytes, std::string where) : bytes_(bytes), where_(std::move(where)) {}

  std::uint8_t u8() {
    need(1);
    return static_cast<std::uint8_t>(bytes_[pos_++]);
  }
  std::uint32_t u32() {
    need(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(static_cast<std::uint8_t>(bytes_[pos_++])) << (8 * i);
    return v;
  }
  std::uint64_t u64() {
    need(8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(static_cast<std::uint8_t>(bytes_[pos_++])) << (8 * i);
    return v;
  }
  float f32() { return std::bit_cast<float>(u32()); }
  double f64() { return std::bit_cast<double>(u64()); }
  std::string_view raw(std::size_t n) {
    need(n);
    auto s = bytes_.substr(pos_, n);
    pos_ += n;
    return s;
  }
  std::size_t remaining() const { return bytes_.size() - pos_; }

 private:
  void need(std::size_t n) const {
    if (bytes_.size() - pos_ < n) throw Error(ErrorKind::InvalidInput, where_ + ": truncated file");
  }

  std::string_view bytes_;
  std::size_t pos_ = 0;
  std::string where_;
};

}  // namespace detail

// ---------------------------------------------------------------------------
// JSON text helpers for the fixed-precision writers

/// 17 significant digits; non-finite values become null.
inline std::string format_number(double v) {
  if (!std::isfinite(v)) return "null";
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::general, 17);
  return std::string(buf, res.ptr);
}

inline std::string quote(std::string_view s) { return json(std::string(s)).dump(); }

inline std::string format_vec(const Vec3& v) {
  return "[" + format_number(v.x()) + "," + format_number(v.y()) + "," + format_number(v.z()) + "]";
}

inline std::string format_vec(const Vec2& v) { return "[" + format_number(v.x()) + "," + format_number(v.y()) + "]"; }

inline std::string format_joints(const Joints3& joints) {
  std::string s = "[";
  for (int j = 0; j < kJointCount; ++j) s += (j ? "," : "") + format_vec(joints[j]);
  return s + "]";
}

inline std::string format_joints(const Joints2& joints) {
  std::string s = "[";
  for (int j = 0; j < kJointCount; ++j) s += (j ? "," : "") + format_vec(joints[j]);
  return s + "]";
}

// ---------------------------------------------------------------------------
// JSON field readers

namespace detail {

inline double number(const json& j, const std::string& what) {
  if (!j.is_number()) throw Error(ErrorKind::InvalidInput, what + " must be a number");
  return j.get<double>();
}

template <int N>
Eigen::Matrix<double, N, 1> vec(const json& j, const std::string& what) {
  if (!j.is_array() || j.size() != N) {
    throw Error(ErrorKind::InvalidInput, what + " must be an array of " + std::to_string(N) + " numbers");
  }
  Eigen::Matrix<double, N, 1> v;
  for (int i = 0; i < N; ++i) v[i] = number(j[i], what);
  return v;
}

template <int N>
std::array<Eigen::Matrix<double, N, 1>, kJointCount> joints(const json& j, const std::string& what) {
  if (!j.is_array() || j.size() != kJointCount) {
    throw Error(ErrorKind::InvalidInput, what + " must hold " + std::to_string(kJointCount) + " joints");
  }
  std::array<Eigen::Matrix<double, N, 1>, kJointCount> out;
  for (int i = 0; i < kJointCount; ++i) out[i] = vec<N>(j[i], what);
  return out;
}

inline std::array<double, kJointCount> joint_scalars(const json& j, const std::string& what) {
  if (!j.is_array() || j.size() != kJointCount) {
    throw Error(ErrorKind::InvalidInput, what + " must hold " + std::to_string(kJointCount) + " numbers");
  }
  std::array<double, kJointCount> out;
  for (int i = 0; i < kJointCount; ++i) out[i] = number(j[i], what);
  return out;
}

inline std::string text(const json& j, const std::string& what) {
  if (!j.is_string()) throw Error(ErrorKind::InvalidInput, what + " must be a string");
  return j.get<std::string>();
}

inline bool boolean(const json& j, const std::string& what) {
  if (!j.is_boolean()) throw Error(ErrorKind::InvalidInput, what + " must be a boolean");
  return j.get<bool>();
}

inline int integer(const json& j, const std::string& what) {
  if (!j.is_number_integer()) throw Error(ErrorKind::InvalidInput, what + " must be an integer");
  return j.get<int>();
}

template <class Fn>
void for_each_line(const std::string& text, Fn&& fn) {
  std::istringstream in(text);
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    fn(line, n);
  }
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Scene voxels (.svx) and label tables

struct SvxHeader {
  Dims3 dims;
  double voxel_size = kDefaultVoxelSize;
  Vec3 origin = Vec3::Zero();
  int up_axis = 2;
};

inline std::string encode_svx(const SceneVoxelGrid& scene) {
  detail::ByteWriter w;
  w.raw("SVX1");
  const Dims3& d = scene.dims();
  w.u32(static_cast<std::uint32_t>(d.nx));
  w.u32(static_cast<std::uint32_t>(d.ny));
  w.u32(static_cast<std::uint32_t>(d.nz));
  w.f64(scene.voxel_size());
  w.f64(scene.origin().x());
  w.f64(scene.origin().y());
  w.f64(scene.origin().z());
  w.u8(static_cast<std::uint8_t>(scene.up_axis()));
  const auto labels = scene.labels().data();
  w.raw(std::string_view(reinterpret_cast<const char*>(labels.data()), labels.size()));
  return w.take();
}

inline std::pair<SvxHeader, Grid3<std::uint8_t>> decode_svx(std::string_view bytes, const std::string& where) {
  detail::ByteReader r(bytes, where);
  if (r.raw(4) != "SVX1") throw Error(ErrorKind::InvalidInput, where + ": bad magic, expected SVX1");
  SvxHeader h;
  const std::uint32_t nx = r.u32();
  const std::uint32_t ny = r.u32();
  const std::uint32_t nz = r.u32();
  if (nx > (1u << 16) || ny > (1u << 16) || nz > (1u << 16)) {
    throw Error(ErrorKind::InvalidInput, where + ": implausible grid dimensions");
  }
  h.dims = {static_cast<int>(nx), static_cast<int>(ny), static_cast<int>(nz)};
  h.voxel_size = r.f64();
  for (int a = 0; a < 3; ++a) h.origin[a] = r.f64();
  h.up_axis = r.u8();
  if (r.remaining() != h.dims.count()) {
    throw Error(ErrorKind::InvalidInput, where + ": label payload size does not match nx*ny*nz");
  }
  const auto payload = r.raw(h.dims.count());
  std::vector<std::uint8_t> labels(payload.begin(), payload.end());
  return {h, Grid3<std::uint8_t>(h.dims, std::move(labels))};
}

inline LabelTable parse_label_table(const json& j, const std::string& where) {
  if (!j.is_array()) throw Error(ErrorKind::InvalidInput, where + ": label table must be an array");
  LabelTable table;
  for (const auto& e : j) {
    if (!e.is_object()) throw Error(ErrorKind::InvalidInput, where + ": label entries must be objects");
    const int label = detail::integer(e.at("label"), where + ": label");
    if (label < 0 || label > 255) throw Error(ErrorKind::InvalidInput, where + ": label out of u8 range");
    table.set(static_cast<std::uint8_t>(label),
              {detail::text(e.at("name"), where + ": name"),
               detail::boolean(e.at("occupies_space"), where + ": occupies_space"),
               detail::boolean(e.at("affordable"), where + ": affordable")});
  }
  return table;
}

inline json label_table_json(const LabelTable& table) {
  json out = json::array();
  for (auto l : table.labels()) {
    const auto& info = *table.get(l);
    out.push_back({{"label", l}, {"name", info.name}, {"occupies_space", info.occupies_space}, {"affordable", info.affordable}});
  }
  return out;
}

inline SceneVoxelGrid load_scene(const fs::path& svx_path, const fs::path& labels_path) {
  auto [header, grid] = decode_svx(read_file(svx_path), svx_path.string());
  const std::string where = labels_path.string();
  LabelTable table;
  try {
    table = parse_label_table(parse_json(read_file(labels_path), where), where);
  } catch (const json::exception& e) {
    throw Error(ErrorKind::InvalidInput, where + ": " + e.what());
  }
  try {
    return SceneVoxelGrid(std::move(grid), std::move(table), header.voxel_size, header.origin, header.up_axis);
  } catch (const Error& e) {
    throw Error(ErrorKind::InvalidInput, svx_path.string() + ": " + e.what());
  }
}

inline void save_scene(const SceneVoxelGrid& scene, const fs::path& svx_path, const fs::path& labels_path) {
  atomic_write(svx_path, encode_svx(scene));
  atomic_write(labels_path, label_table_json(scene.label_table()).dump(2) + "\n");
}

// ---------------------------------------------------------------------------
// Camera JSON

inline Camera parse_camera(const json& j, const std::string& where) {
  try {
    if (!j.is_object()) throw Error(ErrorKind::InvalidInput, "camera must be an object");
    const auto& m = j.at("extrinsics_row_major");
    if (!m.is_array() || m.size() != 12) throw Error(ErrorKind::InvalidInput, "extrinsics_row_major must have 12 numbers");
    std::array<double, 12> values;
    for (int i = 0; i < 12; ++i) values[i] = detail::number(m[i], "extrinsics_row_major");
    const std::string convention = j.contains("convention") ? detail::text(j["convention"], "convention") : "camera_to_world";
    if (convention != "camera_to_world" && convention != "world_to_camera") {
      throw Error(ErrorKind::InvalidInput, "convention must be camera_to_world or world_to_camera");
    }
    const int gravity_row = j.contains("gravity_row") ? detail::integer(j["gravity_row"], "gravity_row") : 2;
    Camera cam;
    cam.intrinsics = CameraIntrinsics(detail::number(j.at("f"), "f"), detail::number(j.at("ox"), "ox"),
                                      detail::number(j.at("oy"), "oy"));
    cam.extrinsics = CameraExtrinsics::from_row_major(values, convention == "world_to_camera", gravity_row);
    return cam;
  } catch (const json::exception& e) {
    throw Error(ErrorKind::InvalidInput, where + ": " + e.what());
  } catch (const Error& e) {
    throw Error(e.kind(), where + ": " + e.what());
  }
}

inline Camera load_camera(const fs::path& path) {
  return parse_camera(parse_json(read_file(path), path.string()), path.string());
}

inline std::string camera_json(const Camera& cam) {
  std::string s = "{\"f\":" + format_number(cam.intrinsics.f) + ",\"ox\":" + format_number(cam.intrinsics.ox) +
                  ",\"oy\":" + format_number(cam.intrinsics.oy) + ",\"extrinsics_row_major\":[";
  const auto m = cam.extrinsics.row_major();
  for (int i = 0; i < 12; ++i) s += (i ? "," : "") + format_number(m[i]);
  s += "],\"convention\":\"camera_to_world\",\"gravity_row\":" + std::to_string(cam.extrinsics.gravity_row()) + "}";
  return s;
}

// ---------------------------------------------------------------------------
// Pose JSONL

inline Proposal parse_proposal(const json& j, const std::string& where, std::size_t line) {
  if (!j.is_object()) throw Error(ErrorKind::InvalidInput, where + ": each line must be a JSON object");
  Proposal p;
  p.id = j.contains("id") ? detail::text(j["id"], "id") : "line-" + std::to_string(line);
  if (j.contains("joints2d") && !j["joints2d"].is_null()) p.joints2d = detail::joints<2>(j["joints2d"], "joints2d");
  if (j.contains("depth_offsets") && !j["depth_offsets"].is_null()) {
    p.depth_offsets = detail::joint_scalars(j["depth_offsets"], "depth_offsets");
  }
  if (j.contains("joints3d") && !j["joints3d"].is_null()) p.joints3d = detail::joints<3>(j["joints3d"], "joints3d");
  if (j.contains("class") && !j["class"].is_null()) {
    const int c = detail::integer(j["class"], "class");
    if (c < 1 || c > kPoseClassCount) throw Error(ErrorKind::UnknownClass, "class " + std::to_string(c));
    p.class_id = c;
  }
  if (j.contains("category") && !j["category"].is_null()) p.category = parse_category(detail::text(j["category"], "category"));
  if (!p.joints2d && !p.joints3d) throw Error(ErrorKind::InvalidInput, "pose needs joints2d or joints3d");
  return p;
}

inline std::vector<Proposal> parse_pose_jsonl(const std::string& text, const std::string& where) {
  std::vector<Proposal> out;
  detail::for_each_line(text, [&](const std::string& line, std::size_t n) {
    const std::string at = where + ":" + std::to_string(n);
    try {
      out.push_back(parse_proposal(parse_json(line, at), at, n));
    } catch (const Error& e) {
      throw Error(e.kind(), at + ": " + e.what());
    }
  });
  return out;
}

inline std::vector<Proposal> load_poses(const fs::path& path) {
  return parse_pose_jsonl(read_file(path), path.string());
}

inline std::string pose_line(const Proposal& p) {
  std::string s = "{\"id\":" + quote(p.id);
  if (p.joints2d) s += ",\"joints2d\":" + format_joints(*p.joints2d);
  if (p.depth_offsets) {
    s += ",\"depth_offsets\":[";
    for (int j = 0; j < kJointCount; ++j) s += (j ? "," : "") + format_number((*p.depth_offsets)[j]);
    s += "]";
  }
  if (p.joints3d) s += ",\"joints3d\":" + format_joints(*p.joints3d);
  if (p.class_id) s += ",\"class\":" + std::to_string(*p.class_id);
  if (p.category) s += ",\"category\":" + quote(to_string(*p.category));
  return s + "}";
}

/// Exemplar library for 2D->3D retrieval: pose JSONL entries with joints3d in
/// the gesture frame. Entries without a category default to standing.
inline Pose3DLibrary load_exemplars(const fs::path& path) {
  Pose3DLibrary lib;
  for (auto& p : load_poses(path)) {
    if (!p.joints3d) throw Error(ErrorKind::InvalidInput, path.string() + ": exemplar " + p.id + " lacks joints3d");
    lib.push_back({p.id, *p.joints3d, p.category.value_or(Category::Standing)});
  }
  if (lib.empty()) throw Error(ErrorKind::EmptyLibrary, path.string());
  return lib;
}

// ---------------------------------------------------------------------------
// Class library JSON

inline PoseClassLibrary parse_class_library(const json& j, const std::string& where) {
  try {
    if (!j.is_array()) throw Error(ErrorKind::InvalidInput, "class library must be an array");
    std::vector<PoseClass> classes;
    for (const auto& e : j) {
      classes.push_back({detail::integer(e.at("class"), "class"), detail::joints<3>(e.at("center"), "center"),
                         parse_category(detail::text(e.at("category"), "category"))});
    }
    return PoseClassLibrary(std::move(classes));
  } catch (const json::exception& e) {
    throw Error(ErrorKind::InvalidInput, where + ": " + e.what());
  } catch (const Error& e) {
    throw Error(e.kind(), where + ": " + e.what());
  }
}

inline PoseClassLibrary load_class_library(const fs::path& path) {
  return parse_class_library(parse_json(read_file(path), path.string()), path.string());
}

inline std::string class_library_json(const PoseClassLibrary& lib) {
  std::string s = "[\n";
  bool first = true;
  for (const auto& c : lib.classes()) {
    s += (first ? "  " : ",\n  ");
    first = false;
    s += "{\"class\":" + std::to_string(c.class_id) + ",\"category\":" + quote(to_string(c.category)) +
         ",\"center\":" + format_joints(c.center) + "}";
  }
  return s + "\n]\n";
}

// ---------------------------------------------------------------------------
// Location heat map (.hm31)

inline std::string encode_hm31(const LocationHeatmap& hm) {
  detail::ByteWriter w;
  w.raw("HM31");
  w.u32(static_cast<std::uint32_t>(hm.h));
  w.u32(static_cast<std::uint32_t>(hm.w));
  for (float v : hm.values) w.f32(v);
  return w.take();
}

inline LocationHeatmap decode_hm31(std::string_view bytes, const std::string& where) {
  detail::ByteReader r(bytes, where);
  if (r.raw(4) != "HM31") throw Error(ErrorKind::InvalidInput, where + ": bad magic, expected HM31");
  LocationHeatmap hm;
  const std::uint32_t h = r.u32();
  const std::uint32_t w = r.u32();
  if (h == 0 || w == 0 || h > (1u << 15) || w > (1u << 15)) {
    throw Error(ErrorKind::InvalidInput, where + ": implausible heat map dimensions");
  }
  hm.h = static_cast<int>(h);
  hm.w = static_cast<int>(w);
  const std::size_t n = static_cast<std::size_t>(kHeatmapChannels) * h * w;
  if (r.remaining() != 4 * n) throw Error(ErrorKind::InvalidInput, where + ": payload size does not match 31*h*w");
  hm.values.resize(n);
  for (auto& v : hm.values) v = r.f32();
  try {
    hm.validate();
  } catch (const Error& e) {
    throw Error(e.kind(), where + ": " + e.what());
  }
  return hm;
}

inline LocationHeatmap load_heatmap(const fs::path& path) { return decode_hm31(read_file(path), path.string()); }

// ---------------------------------------------------------------------------
// Affordance records

inline std::string record_line(const AffordanceRecord& r) {
  auto opt = [](const std::optional<double>& v) { return v ? format_number(*v) : std::string("null"); };
  std::string s = "{\"scene_id\":" + quote(r.scene_id) + ",\"camera_id\":" + quote(r.camera_id) +
                  ",\"proposal_id\":" + quote(r.proposal_id) + ",\"index\":" + std::to_string(r.index) +
                  ",\"class\":" + (r.class_id ? std::to_string(*r.class_id) : "null") +
                  ",\"category\":" + (r.category ? quote(to_string(*r.category)) : "null") +
                  ",\"height\":" + opt(r.height) + ",\"depth\":" + opt(r.depth) +
                  ",\"pose3d\":" + (r.pose ? format_joints(r.pose->joints) : "null") + ",\"joints2d\":";
  if (r.pose) {
    s += "[";
    for (int j = 0; j < kJointCount; ++j) s += (j ? "," : "") + (r.joints2d[j] ? format_vec(*r.joints2d[j]) : "null");
    s += "]";
  } else {
    s += "null";
  }
  s += ",\"r_f\":" + std::to_string(r.r_f) + ",\"r_s\":" + format_number(r.r_s) +
       ",\"status\":" + quote(r.accepted() ? "accepted" : "discarded") + ",\"reason\":" + quote(r.reason) +
       ",\"seed\":" + std::to_string(r.seed) + "}";
  return s;
}

inline AffordanceRecord parse_record(const json& j, const std::string& where) {
  try {
    AffordanceRecord r;
    r.scene_id = detail::text(j.at("scene_id"), "scene_id");
    r.camera_id = detail::text(j.at("camera_id"), "camera_id");
    r.proposal_id = detail::text(j.at("proposal_id"), "proposal_id");
    r.index = j.at("index").get<std::size_t>();
    if (!j.at("class").is_null()) r.class_id = detail::integer(j["class"], "class");
    if (!j.at("category").is_null()) r.category = parse_category(detail::text(j["category"], "category"));
    if (!j.at("height").is_null()) r.height = detail::number(j["height"], "height");
    if (!j.at("depth").is_null()) r.depth = detail::number(j["depth"], "depth");
    if (!j.at("pose3d").is_null()) {
      r.pose = Pose3D{detail::joints<3>(j["pose3d"], "pose3d"), r.category.value_or(Category::Standing)};
    }
    const auto& j2 = j.at("joints2d");
    if (!j2.is_null()) {
      if (!j2.is_array() || j2.size() != kJointCount) throw Error(ErrorKind::InvalidInput, "joints2d must hold 17 entries");
      for (int k = 0; k < kJointCount; ++k) {
        if (!j2[k].is_null()) r.joints2d[k] = detail::vec<2>(j2[k], "joints2d");
      }
    }
    r.r_f = detail::integer(j.at("r_f"), "r_f");
    r.r_s = detail::number(j.at("r_s"), "r_s");
    const std::string status = detail::text(j.at("status"), "status");
    if (status != "accepted" && status != "discarded") throw Error(ErrorKind::InvalidInput, "unknown status " + status);
    r.status = status == "accepted" ? RecordStatus::Accepted : RecordStatus::Discarded;
    r.reason = detail::text(j.at("reason"), "reason");
    r.seed = j.at("seed").get<std::uint64_t>();
    return r;
  } catch (const json::exception& e) {
    throw Error(ErrorKind::InvalidInput, where + ": " + e.what());
  } catch (const Error& e) {
    throw Error(e.kind(), where + ": " + e.what());
  }
}

inline std::string records_text(const std::vector<AffordanceRecord>& records) {
  std::string s;
  for (const auto& r : records) s += record_line(r) + "\n";
  return s;
}

inline json summary_json(const SynthesisSummary& s) {
  return {{"proposed", s.proposed},
          {"accepted", s.accepted},
          {"discarded_no_support", s.discarded_no_support},
          {"discarded_degenerate", s.discarded_degenerate}};
}

// ---------------------------------------------------------------------------
// Constraint configuration (JSON or flat TOML)

inline void apply_config_value(ConstraintConfig& cfg, const std::string& key, double value, const std::string& where) {
  auto as_int = [&](double v) {
    if (v != std::floor(v)) throw Error(ErrorKind::InvalidInput, where + ": " + key + " must be an integer");
    return static_cast<int>(v);
  };
  if (key == "t_f") {
    cfg.t_f = as_int(value);
  } else if (key == "t_s") {
    cfg.t_s = value;
  } else if (key == "support_proximity") {
    cfg.support_proximity = as_int(value);
  } else if (key == "search_radius_m") {
    cfg.search_radius_m = value;
  } else if (key == "bone_radius") {
    cfg.bone_radius = as_int(value);
  } else {
    throw Error(ErrorKind::InvalidInput, where + ": unknown config key '" + key + "'");
  }
}

/// Accepts a JSON object or TOML restricted to top-level `key = number` lines.
inline ConstraintConfig parse_config(const std::string& text, const std::string& where, ConstraintConfig cfg = {}) {
  const auto first = text.find_first_not_of(" \t\r\n");
  if (first != std::string::npos && text[first] == '{') {
    const json j = parse_json(text, where);
    for (const auto& [key, value] : j.items()) {
      apply_config_value(cfg, key, detail::number(value, where + ": " + key), where);
    }
  } else {
    detail::for_each_line(text, [&](const std::string& raw, std::size_t n) {
      std::string line = raw.substr(0, raw.find('#'));
      if (line.find_first_not_of(" \t\r") == std::string::npos) return;
      const auto eq = line.find('=');
      const std::string at = where + ":" + std::to_string(n);
      if (eq == std::string::npos) throw Error(ErrorKind::InvalidInput, at + ": expected key = value");
      auto trim = [](std::string s) {
        const auto b = s.find_first_not_of(" \t\r");
        const auto e = s.find_last_not_of(" \t\r");
        return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
      };
      const std::string key = trim(line.substr(0, eq));
      const std::string value = trim(line.substr(eq + 1));
      double v = 0.0;
      const auto res = std::from_chars(value.data(), value.data() + value.size(), v);
      if (res.ec != std::errc() || res.ptr != value.data() + value.size()) {
        throw Error(ErrorKind::InvalidInput, at + ": value of " + key + " is not a number");
      }
      apply_config_value(cfg, key, v, at);
    });
  }
  cfg.validate();
  return cfg;
}

inline ConstraintConfig load_config(const fs::path& path, ConstraintConfig base = {}) {
  return parse_config(read_file(path), path.string(), base);
}

}  // namespace affordance::io
