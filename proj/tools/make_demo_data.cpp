#include <filesystem>
#include <iostream>
#include <map>

#include <CLI11.hpp>

#include "affordance/io.hpp"
#include "affordance/synthetic.hpp"

using namespace affordance;

int main(int argc, char** argv) {
  CLI::App app{"write a synthetic scene, camera, pose proposals and class library"};
  std::string kind = "bed";
  std::string out = ".";
  int count = 20;
  std::uint64_t seed = 1;
  const std::map<std::string, synthetic::DemoScene> kinds{
      {"floor", synthetic::DemoScene::FlatFloor}, {"bed", synthetic::DemoScene::Bed}, {"wall", synthetic::DemoScene::WallCavity}};
  app.add_option("--scene", kind, "floor, bed or wall")->transform(CLI::IsMember(kinds));
  app.add_option("--count", count, "number of pose proposals")->check(CLI::PositiveNumber);
  app.add_option("--seed", seed, "random seed");
  app.add_option("--out", out, "output directory");
  CLI11_PARSE(app, argc, argv);

  try {
    std::filesystem::create_directories(out);
    const std::filesystem::path dir(out);
    const auto d = synthetic::demo(kinds.at(kind), count, seed);
    io::save_scene(d.scene, dir / "scene.svx", dir / "labels.json");
    io::atomic_write(dir / "camera.json", io::camera_json(d.camera) + "\n");
    std::string poses;
    for (const auto& p : d.proposals) poses += io::pose_line(p) + "\n";
    io::atomic_write(dir / "poses.jsonl", poses);
    io::atomic_write(dir / "classes.json", io::class_library_json(synthetic::class_library()));
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
  return 0;
}
