#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "spatialmc/imgio.hpp"
#include "spatialmc/script.hpp"
#include "support/oracles.hpp"

using namespace spatialmc;
namespace fs = std::filesystem;

namespace {

fs::path work_dir() {
  auto p = fs::temp_directory_path() / "spatialmc_script_tests";
  fs::create_directories(p);
  return p;
}

// 4x4 test card: left half dark (32), right half bright (224).
std::string write_test_card() {
  auto path = (work_dir() / "card.pgm").string();
  std::ofstream out(path, std::ios::binary);
  out << "P5\n4 4\n255\n";
  for (int y = 0; y < 4; ++y) {
    for (int x = 0; x < 4; ++x) {
      out.put(x < 2 ? static_cast<char>(32) : static_cast<char>(224));
    }
  }
  return path;
}

int run_text(const std::string& text, std::string* out_text = nullptr,
             std::string* err_text = nullptr, const RunOptions& base = {}) {
  std::ostringstream out, err;
  RunOptions opts = base;
  if (opts.base_dir.empty()) opts.base_dir = work_dir().string();
  int code = run_script(parse_script(text), opts, out, err);
  if (out_text) *out_text = out.str();
  if (err_text) *err_text = err.str();
  return code;
}

std::string file_bytes(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  REQUIRE(in.good());
  return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

}  // namespace

TEST_CASE("script parsing and binding rules") {
  write_test_card();

  SUBCASE("let bodies substitute earlier bindings") {
    Script s = parse_script("load img = image \"card.pgm\"\n"
                            "let t = intensity > 0.6\n"
                            "let o = t & N t\n");
    REQUIRE(s.statements.size() == 3);
    const Statement& st = s.statements[2];
    CHECK(print_formula(*st.formula) ==
          print_formula(*parse_formula("intensity > 0.6 & N (intensity > 0.6)")));
  }

  SUBCASE("save and print require bound names") {
    CHECK_THROWS_AS(parse_script("load i = image \"card.pgm\"\nsave mask \"m.png\" ghost\n"),
                    ParseError);
    CHECK_THROWS_AS(parse_script("load i = image \"card.pgm\"\nprint stats ghost\n"),
                    ParseError);
  }

  SUBCASE("a let requires a loaded model") {
    CHECK_THROWS_AS(parse_script("let t = intensity > 1\n"), ParseError);
  }

  SUBCASE("only one load is allowed") {
    CHECK_THROWS_AS(parse_script("load a = image \"x.pgm\"\nload b = image \"y.pgm\"\n"),
                    ParseError);
  }

  SUBCASE("rebinding is rejected") {
    CHECK_THROWS_AS(parse_script("load i = image \"card.pgm\"\n"
                                 "let t = intensity > 1\nlet t = intensity > 2\n"),
                    ParseError);
  }

  SUBCASE("neighborhood statements must precede lets") {
    CHECK_THROWS_AS(parse_script("load i = image \"card.pgm\"\n"
                                 "let t = intensity > 1\nneighborhood moore\n"),
                    ParseError);
  }

  SUBCASE("comments and blank lines are ignored") {
    Script s = parse_script("# a comment\n\nload i = image \"card.pgm\"  # trailing\n");
    CHECK(s.statements.size() == 1);
  }

  SUBCASE("bound names cannot be compared") {
    CHECK_THROWS_AS(parse_script("load i = image \"card.pgm\"\n"
                                 "let t = intensity > 1\nlet u = t > 0.5\n"),
                    ParseError);
  }
}

TEST_CASE("the script parser never crashes on garbage") {
  std::mt19937 rng(505);
  const std::string alphabet = "loadneighbrspcint=\"#.<>0123456789 \n\t:|&!";
  std::uniform_int_distribution<std::size_t> len(0, 120);
  std::uniform_int_distribution<std::size_t> pick(0, alphabet.size() - 1);
  for (int iter = 0; iter < 1000; ++iter) {
    std::string text;
    std::size_t n = len(rng);
    for (std::size_t i = 0; i < n; ++i) text += alphabet[pick(rng)];
    try {
      parse_script(text);
    } catch (const ParseError&) {
      // expected for most inputs
    }
  }
  CHECK(true);
}

TEST_CASE("empty script succeeds silently") {
  std::string out, err;
  CHECK(run_text("", &out, &err) == 0);
  CHECK(out.empty());
  CHECK(err.empty());
}

TEST_CASE("missing image file exits with the I/O code") {
  std::string err;
  CHECK(run_text("load i = image \"absent.pgm\"\n", nullptr, &err) == 2);
  CHECK(!err.empty());
}

TEST_CASE("unknown attribute surfaces as a script error") {
  write_test_card();
  std::string err;
  CHECK(run_text("load i = image \"card.pgm\"\nlet t = ghost > 1\n", nullptr, &err) == 1);
  CHECK(err.find("unknown attribute ghost") != std::string::npos);
}

TEST_CASE("stats output format") {
  write_test_card();
  std::string out;
  int code = run_text("load i = image \"card.pgm\"\n"
                      "let bright = intensity > 128\n"
                      "print stats bright\n",
                      &out);
  CHECK(code == 0);
  CHECK(out == "stats bright: count=8 percent=50.0000\n");
}

TEST_CASE("prefixed attribute aliases work alongside bare names") {
  write_test_card();
  std::string out;
  int code = run_text("load img = image \"card.pgm\"\n"
                      "let a = img.intensity > 128\n"
                      "let b = intensity > 128\n"
                      "let same = !(a & !b | b & !a)\n"
                      "print stats same\n",
                      &out);
  CHECK(code == 0);
  CHECK(out.find("percent=100.0000") != std::string::npos);
}

TEST_CASE("full pipeline writes masks and overlays deterministically") {
  write_test_card();
  const std::string script =
      "load img = image \"card.pgm\"\n"
      "neighborhood moore\n"
      "let bright = intensity > 128\n"
      "let nearBright = D[z <= 1](bright)\n"
      "save mask \"bright.png\" bright\n"
      "save overlay \"view.png\" base=intensity bright:#FFA500 nearBright:#FFFF00\n"
      "print stats nearBright\n";

  std::string out1;
  REQUIRE(run_text(script, &out1) == 0);
  auto bright1 = file_bytes(work_dir() / "bright.png");
  auto view1 = file_bytes(work_dir() / "view.png");

  std::string out2;
  RunOptions threaded;
  threaded.threads = 8;
  REQUIRE(run_text(script, &out2, nullptr, threaded) == 0);
  CHECK(out1 == out2);
  CHECK(file_bytes(work_dir() / "bright.png") == bright1);
  CHECK(file_bytes(work_dir() / "view.png") == view1);

  // nearBright: bright half (8) plus the adjacent dark column at distance 1.
  CHECK(out1 == "stats nearBright: count=12 percent=75.0000\n");

  VoxelGrid mask_back = load_image2d((work_dir() / "bright.png").string());
  CHECK(mask_back.dims == Dims{4, 4});
}

TEST_CASE("neighborhood and spacing statements shape the model") {
  write_test_card();

  SUBCASE("moore and vonneumann closures agree on a half-split card") {
    std::string out_m, out_v;
    REQUIRE(run_text("load i = image \"card.pgm\"\nneighborhood moore\n"
                     "let n = N (intensity > 128)\nprint stats n\n",
                     &out_m) == 0);
    REQUIRE(run_text("load i = image \"card.pgm\"\nneighborhood vonneumann\n"
                     "let n = N (intensity > 128)\nprint stats n\n",
                     &out_v) == 0);
    CHECK(out_m == "stats n: count=12 percent=75.0000\n");
    CHECK(out_m == out_v);
  }

  SUBCASE("spacing rescales distance formulas") {
    std::string out_near, out_far;
    REQUIRE(run_text("load i = image \"card.pgm\"\n"
                     "let d = D[z <= 1](intensity > 128)\nprint stats d\n",
                     &out_near) == 0);
    REQUIRE(run_text("load i = image \"card.pgm\"\nspacing 3 3\n"
                     "let d = D[z <= 1](intensity > 128)\nprint stats d\n",
                     &out_far) == 0);
    CHECK(out_near == "stats d: count=12 percent=75.0000\n");
    CHECK(out_far == "stats d: count=8 percent=50.0000\n");
  }

  SUBCASE("spacing arity must match the model") {
    std::string err;
    CHECK(run_text("load i = image \"card.pgm\"\nspacing 1 1 1\nlet t = tt\n", nullptr, &err) ==
          1);
  }
}

TEST_CASE("run_script_file resolves paths relative to the script") {
  write_test_card();
  auto script_path = work_dir() / "analysis.mc";
  std::ofstream out(script_path);
  out << "load i = image \"card.pgm\"\nlet b = intensity > 128\nsave mask \"from_file.pgm\" b\n";
  out.close();

  std::ostringstream so, se;
  CHECK(run_script_file(script_path.string(), RunOptions{}, so, se) == 0);
  CHECK(fs::exists(work_dir() / "from_file.pgm"));

  CHECK(run_script_file((work_dir() / "missing.mc").string(), RunOptions{}, so, se) == 2);
}

TEST_CASE("volumes run through the script pipeline slice by slice") {
  // 4x4x2 volume, hot plane at z=1; anisotropic z spacing from the header.
  VoxelGrid vol(Dims{4, 4, 2}, {1.0, 1.0, 2.5});
  std::vector<double> v(32, 10.0);
  for (std::size_t i = 16; i < 32; ++i) v[i] = 200.0;
  vol.add_attribute("ct", std::move(v));
  save_volume((work_dir() / "hot.rawvol").string(), vol);

  std::string out;
  int code = run_text("load vol = volume \"hot.rawvol\"\n"
                      "neighborhood vonneumann\n"
                      "let hot = ct > 100\n"
                      "let reach = D[z <= 2.5](hot)\n"
                      "save mask \"hot.pgm\" hot\n"
                      "print stats hot\nprint stats reach\n",
                      &out);
  REQUIRE(code == 0);
  // 16 hot voxels; the z=0 plane sits exactly 2.5 units below it.
  CHECK(out == "stats hot: count=16 percent=50.0000\n"
               "stats reach: count=32 percent=100.0000\n");
  CHECK(fs::exists(work_dir() / "hot_z0.pgm"));
  CHECK(fs::exists(work_dir() / "hot_z1.pgm"));
  VoxelGrid z0 = load_image2d((work_dir() / "hot_z0.pgm").string());
  VoxelGrid z1 = load_image2d((work_dir() / "hot_z1.pgm").string());
  for (double px : z0.attribute("intensity").values) CHECK(px == 0.0);
  for (double px : z1.attribute("intensity").values) CHECK(px == 255.0);
}

TEST_CASE("scmp statement in a script grows a region") {
  write_test_card();
  std::string out;
  int code = run_text("load i = image \"card.pgm\"\n"
                      "let seed = intensity > 200\n"
                      "let grown = SCMP(0.5, 1, 8, 0, 255, intensity, seed) | seed\n"
                      "print stats grown\n",
                      &out);
  CHECK(code == 0);
  // The bright half correlates with the seed's histogram; the dark half does not.
  CHECK(out == "stats grown: count=8 percent=50.0000\n");
}
