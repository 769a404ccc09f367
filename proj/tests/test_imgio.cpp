#include <filesystem>
#include <fstream>
#include <random>

#include "doctest.h"
#include "spatialmc/checker.hpp"
#include "spatialmc/imgio.hpp"
#include "support/oracles.hpp"

using namespace spatialmc;
using namespace spatialmc::testing;
namespace fs = std::filesystem;

namespace {

fs::path work_dir() {
  auto p = fs::temp_directory_path() / "spatialmc_imgio_tests";
  fs::create_directories(p);
  return p;
}

std::string file_bytes(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  REQUIRE(in.good());
  return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

}  // namespace

TEST_CASE("PGM round trip preserves 8-bit intensities") {
  auto path = (work_dir() / "gray.pgm").string();
  std::ofstream out(path, std::ios::binary);
  out << "P5\n# comment\n2 2\n255\n";
  const unsigned char px[4] = {0, 128, 255, 64};
  out.write(reinterpret_cast<const char*>(px), 4);
  out.close();

  VoxelGrid g = load_image2d(path);
  CHECK(g.dims == Dims{2, 2});
  const auto& v = g.attribute("intensity").values;
  CHECK(v == std::vector<double>{0.0, 128.0, 255.0, 64.0});
}

TEST_CASE("RGB images expose channels plus mean intensity") {
  auto path = (work_dir() / "red.ppm").string();
  std::ofstream out(path, std::ios::binary);
  out << "P6\n1 1\n255\n";
  const unsigned char px[3] = {255, 0, 0};
  out.write(reinterpret_cast<const char*>(px), 3);
  out.close();

  VoxelGrid g = load_image2d(path);
  CHECK(g.attribute("red").values[0] == 255.0);
  CHECK(g.attribute("green").values[0] == 0.0);
  CHECK(g.attribute("blue").values[0] == 0.0);
  CHECK(g.attribute("intensity").values[0] == 85.0);
}

TEST_CASE("PNG round trips through save_mask and load_image2d") {
  std::mt19937 rng(3);
  PointSet mask = random_pointset(rng, Dims{9, 7}, 0.5);
  auto path = (work_dir() / "mask.png").string();
  save_mask(path, mask);

  VoxelGrid g = load_image2d(path);
  CHECK(g.dims == mask.dims);
  PointSet back = eval_atom(g, Constraint{"intensity", Comparator::gt, 128.0});
  CHECK(back == mask);
}

TEST_CASE("mask files are pure black and white") {
  auto empty_path = (work_dir() / "empty.pgm").string();
  save_mask(empty_path, PointSet(Dims{4, 2}));
  VoxelGrid ge = load_image2d(empty_path);
  for (double v : ge.attribute("intensity").values) CHECK(v == 0.0);

  auto full_path = (work_dir() / "full.pgm").string();
  save_mask(full_path, PointSet::full(Dims{4, 2}));
  VoxelGrid gf = load_image2d(full_path);
  for (double v : gf.attribute("intensity").values) CHECK(v == 255.0);
}

TEST_CASE("3D masks are written slice by slice") {
  PointSet s(Dims{4, 4, 2});
  s.insert(Coord{1, 2, 0});
  s.insert(Coord{3, 3, 1});
  auto base = work_dir() / "vol_mask.pgm";
  save_mask(base.string(), s);

  auto z0 = work_dir() / "vol_mask_z0.pgm";
  auto z1 = work_dir() / "vol_mask_z1.pgm";
  REQUIRE(fs::exists(z0));
  REQUIRE(fs::exists(z1));
  VoxelGrid s0 = load_image2d(z0.string());
  VoxelGrid s1 = load_image2d(z1.string());
  CHECK(s0.attribute("intensity").values[linear_index(Dims{4, 4}, {1, 2})] == 255.0);
  CHECK(s1.attribute("intensity").values[linear_index(Dims{4, 4}, {3, 3})] == 255.0);
  CHECK(s0.attribute("intensity").values[linear_index(Dims{4, 4}, {3, 3})] == 0.0);
}

TEST_CASE("missing and malformed files raise load errors") {
  CHECK_THROWS_AS(load_image2d((work_dir() / "nope.png").string()), LoadError);
  CHECK_THROWS_AS(load_image2d((work_dir() / "nope.xyz").string()), LoadError);

  auto bad = (work_dir() / "bad.pgm").string();
  std::ofstream out(bad, std::ios::binary);
  out << "P5\n4 4\n255\nxx";  // payload too short
  out.close();
  CHECK_THROWS_AS(load_image2d(bad), LoadError);
}

TEST_CASE("RAWVOL round trip preserves header and payload") {
  VoxelGrid g(Dims{4, 4, 2}, {1.0, 1.0, 2.5});
  std::vector<double> a(32), b(32);
  for (std::size_t i = 0; i < 32; ++i) {
    a[i] = static_cast<double>(i) * 0.5;
    b[i] = 31.0 - static_cast<double>(i);
  }
  g.add_attribute("ct", a);
  g.add_attribute("pet", b);

  auto path = (work_dir() / "vol.rawvol").string();
  save_volume(path, g);
  VoxelGrid back = load_volume(path);
  CHECK(back.dims == Dims{4, 4, 2});
  CHECK(back.size() == 32);
  CHECK(back.spacing == std::vector<double>{1.0, 1.0, 2.5});
  CHECK(back.attribute("ct").values == a);
  CHECK(back.attribute("pet").values == b);
}

TEST_CASE("RAWVOL rejects malformed inputs") {
  auto dir = work_dir();

  auto write_file = [&](const std::string& name, const std::string& content) {
    auto p = (dir / name).string();
    std::ofstream out(p, std::ios::binary);
    out << content;
    return p;
  };

  CHECK_THROWS_AS(load_volume(write_file("magic.rawvol", "NOTVOL v1\nend\n")), LoadError);
  CHECK_THROWS_AS(load_volume(write_file("field.rawvol",
                                         "RAWVOL v1\nwhat 1\nend\n")),
                  LoadError);
  CHECK_THROWS_AS(load_volume(write_file("type.rawvol",
                                         "RAWVOL v1\ndims 2 2 1\nspacing 1 1 1\n"
                                         "channels a\ntype f64le\nend\n")),
                  LoadError);
  // Truncated payload: header promises 4 floats, provides 2.
  std::string truncated = "RAWVOL v1\ndims 2 2 1\nspacing 1 1 1\nchannels a\ntype f32le\nend\n";
  truncated += std::string(8, '\0');
  CHECK_THROWS_AS(load_volume(write_file("short.rawvol", truncated)), LoadError);
  // Trailing junk after the declared payload.
  std::string oversized = "RAWVOL v1\ndims 2 2 1\nspacing 1 1 1\nchannels a\ntype f32le\nend\n";
  oversized += std::string(16 + 3, '\0');
  CHECK_THROWS_AS(load_volume(write_file("long.rawvol", oversized)), LoadError);
}

TEST_CASE("overlay rendering") {
  VoxelGrid g(Dims{3, 2}, {1.0, 1.0});
  g.add_attribute("intensity", {0.0, 50.0, 100.0, 25.0, 75.0, 100.0});

  SUBCASE("no layers is a normalized grayscale rendering") {
    auto path = (work_dir() / "plain.png").string();
    save_overlay(path, g, OverlaySpec{"intensity", {}});
    VoxelGrid back = load_image2d(path);
    CHECK(back.dims == g.dims);
    CHECK(back.attribute("intensity").values[0] == 0.0);
    CHECK(back.attribute("intensity").values[2] == 255.0);
  }

  SUBCASE("constant base renders mid-gray") {
    VoxelGrid flat(Dims{2, 2}, {1.0, 1.0});
    flat.add_attribute("intensity", {7.0, 7.0, 7.0, 7.0});
    auto path = (work_dir() / "flat.ppm").string();
    save_overlay(path, flat, OverlaySpec{"intensity", {}});
    VoxelGrid back = load_image2d(path);
    for (double v : back.attribute("red").values) CHECK(v == 128.0);
  }

  SUBCASE("later layers paint over earlier ones") {
    PointSet first(g.dims), second(g.dims);
    first.insert(Coord{0, 0});
    first.insert(Coord{1, 0});
    second.insert(Coord{1, 0});
    OverlaySpec spec{"intensity",
                     {{first, Rgb{255, 255, 0}}, {second, Rgb{255, 165, 0}}}};
    auto path = (work_dir() / "layers.ppm").string();
    save_overlay(path, g, spec);
    VoxelGrid back = load_image2d(path);
    CHECK(back.attribute("green").values[linear_index(g.dims, {0, 0})] == 255.0);
    CHECK(back.attribute("green").values[linear_index(g.dims, {1, 0})] == 165.0);
  }

  SUBCASE("unknown base attribute") {
    CHECK_THROWS_AS(save_overlay((work_dir() / "x.png").string(), g, OverlaySpec{"nope", {}}),
                    ModelError);
  }
}

TEST_CASE("saving twice produces identical bytes") {
  std::mt19937 rng(9);
  PointSet mask = random_pointset(rng, Dims{16, 16}, 0.4);
  auto p1 = work_dir() / "rep1.png";
  auto p2 = work_dir() / "rep2.png";
  save_mask(p1.string(), mask);
  save_mask(p2.string(), mask);
  CHECK(file_bytes(p1) == file_bytes(p2));
}

TEST_CASE("color parsing") {
  Rgb c = parse_color("#FFA500");
  CHECK(c == Rgb{255, 165, 0});
  CHECK_THROWS_AS(parse_color("FFA500"), ParseError);
  CHECK_THROWS_AS(parse_color("#GG0000"), ParseError);
}
