#include "spatialmc/imgio.hpp"

#include <png.h>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <limits>
#include <memory>
#include <sstream>

namespace spatialmc {

namespace {

// In-memory 8-bit raster, rows top-to-bottom, channels interleaved.
struct Raster {
  std::size_t width = 0;
  std::size_t height = 0;
  int channels = 1;  // 1 = gray, 3 = rgb
  std::vector<std::uint8_t> pixels;

  std::uint8_t at(std::size_t x, std::size_t y, int ch) const {
    return pixels[(y * width + x) * static_cast<std::size_t>(channels) +
                  static_cast<std::size_t>(ch)];
  }
};

std::string lower_ext(const std::string& path) {
  auto dot = path.find_last_of('.');
  if (dot == std::string::npos) return "";
  std::string ext = path.substr(dot + 1);
  std::transform(ext.begin(), ext.end(), ext.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return ext;
}

struct FileCloser {
  void operator()(std::FILE* f) const {
    if (f) std::fclose(f);
  }
};
using FileHandle = std::unique_ptr<std::FILE, FileCloser>;

Raster read_png(const std::string& path) {
  FileHandle fp(std::fopen(path.c_str(), "rb"));
  if (!fp) throw LoadError("cannot open " + path);

  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (!png) throw LoadError("png reader init failed");
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_read_struct(&png, nullptr, nullptr);
    throw LoadError("png reader init failed");
  }
  std::vector<png_bytep> row_ptrs;
  Raster raster;
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw LoadError("corrupt PNG: " + path);
  }
  png_init_io(png, fp.get());
  png_read_info(png, info);

  png_set_strip_16(png);
  png_set_packing(png);
  if (png_get_color_type(png, info) == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
  if (png_get_color_type(png, info) == PNG_COLOR_TYPE_GRAY &&
      png_get_bit_depth(png, info) < 8) {
    png_set_expand_gray_1_2_4_to_8(png);
  }
  if (png_get_valid(png, info, PNG_INFO_tRNS)) png_set_tRNS_to_alpha(png);
  png_set_strip_alpha(png);
  png_read_update_info(png, info);

  raster.width = png_get_image_width(png, info);
  raster.height = png_get_image_height(png, info);
  int channels = png_get_channels(png, info);
  if (channels != 1 && channels != 3) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw LoadError("unsupported PNG channel layout in " + path);
  }
  raster.channels = channels;
  raster.pixels.resize(raster.width * raster.height * static_cast<std::size_t>(channels));
  row_ptrs.resize(raster.height);
  for (std::size_t y = 0; y < raster.height; ++y) {
    row_ptrs[y] = raster.pixels.data() + y * raster.width * static_cast<std::size_t>(channels);
  }
  png_read_image(png, row_ptrs.data());
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);
  return raster;
}

void write_png(const std::string& path, const Raster& raster) {
  FileHandle fp(std::fopen(path.c_str(), "wb"));
  if (!fp) throw IoError("cannot write " + path);

  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (!png) throw IoError("png writer init failed");
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_write_struct(&png, nullptr);
    throw IoError("png writer init failed");
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw IoError("png write failed: " + path);
  }
  png_init_io(png, fp.get());
  png_set_IHDR(png, info, static_cast<png_uint_32>(raster.width),
               static_cast<png_uint_32>(raster.height), 8,
               raster.channels == 1 ? PNG_COLOR_TYPE_GRAY : PNG_COLOR_TYPE_RGB,
               PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  std::vector<png_bytep> row_ptrs(raster.height);
  for (std::size_t y = 0; y < raster.height; ++y) {
    row_ptrs[y] = const_cast<png_bytep>(raster.pixels.data() +
                                        y * raster.width * static_cast<std::size_t>(raster.channels));
  }
  png_write_image(png, row_ptrs.data());
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
}

int pnm_token(std::istream& in) {
  // Skips whitespace and '#' comments, then reads one unsigned decimal token.
  while (true) {
    int c = in.peek();
    if (c == '#') {
      std::string line;
      std::getline(in, line);
    } else if (c != EOF && std::isspace(c)) {
      in.get();
    } else {
      break;
    }
  }
  int value = -1;
  in >> value;
  return in ? value : -1;
}

Raster read_pnm(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw LoadError("cannot open " + path);
  char magic[2] = {0, 0};
  in.read(magic, 2);
  if (!in || magic[0] != 'P' || (magic[1] != '5' && magic[1] != '6')) {
    throw LoadError("not a binary PGM/PPM file: " + path);
  }
  Raster raster;
  raster.channels = magic[1] == '5' ? 1 : 3;
  int w = pnm_token(in);
  int h = pnm_token(in);
  int maxval = pnm_token(in);
  if (w <= 0 || h <= 0 || maxval <= 0 || maxval > 255) {
    throw LoadError("unsupported PGM/PPM header in " + path);
  }
  in.get();  // single whitespace byte before payload
  raster.width = static_cast<std::size_t>(w);
  raster.height = static_cast<std::size_t>(h);
  raster.pixels.resize(raster.width * raster.height * static_cast<std::size_t>(raster.channels));
  in.read(reinterpret_cast<char*>(raster.pixels.data()),
          static_cast<std::streamsize>(raster.pixels.size()));
  if (in.gcount() != static_cast<std::streamsize>(raster.pixels.size())) {
    throw LoadError("truncated PGM/PPM payload in " + path);
  }
  return raster;
}

void write_pnm(const std::string& path, const Raster& raster) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path);
  out << (raster.channels == 1 ? "P5" : "P6") << "\n"
      << raster.width << " " << raster.height << "\n255\n";
  out.write(reinterpret_cast<const char*>(raster.pixels.data()),
            static_cast<std::streamsize>(raster.pixels.size()));
  if (!out) throw IoError("write failed: " + path);
}

Raster read_raster(const std::string& path) {
  std::string ext = lower_ext(path);
  if (ext == "png") return read_png(path);
  if (ext == "pgm" || ext == "ppm") return read_pnm(path);
  throw LoadError("unsupported image format: " + path);
}

void write_raster(const std::string& path, const Raster& raster) {
  std::string ext = lower_ext(path);
  if (ext == "png") {
    write_png(path, raster);
  } else if (ext == "pgm" && raster.channels == 1) {
    write_pnm(path, raster);
  } else if (ext == "ppm" && raster.channels == 3) {
    write_pnm(path, raster);
  } else {
    throw IoError("unsupported output format: " + path);
  }
}

}  // namespace

Rgb parse_color(const std::string& text) {
  if (text.size() != 7 || text[0] != '#') throw ParseError("expected #RRGGBB color", 0, 0);
  auto hex = [&](std::size_t i) -> int {
    int v = 0;
    for (std::size_t k = i; k < i + 2; ++k) {
      char c = static_cast<char>(std::tolower(static_cast<unsigned char>(text[k])));
      int digit;
      if (c >= '0' && c <= '9') {
        digit = c - '0';
      } else if (c >= 'a' && c <= 'f') {
        digit = 10 + (c - 'a');
      } else {
        throw ParseError("bad hex digit in color " + text, 0, 0);
      }
      v = v * 16 + digit;
    }
    return v;
  };
  return Rgb{static_cast<std::uint8_t>(hex(1)), static_cast<std::uint8_t>(hex(3)),
             static_cast<std::uint8_t>(hex(5))};
}

VoxelGrid load_image2d(const std::string& path) {
  Raster raster = read_raster(path);
  VoxelGrid grid({raster.width, raster.height}, {1.0, 1.0});
  std::size_t n = raster.width * raster.height;
  if (raster.channels == 1) {
    std::vector<double> intensity(n);
    for (std::size_t i = 0; i < n; ++i) intensity[i] = raster.pixels[i];
    grid.add_attribute("intensity", std::move(intensity));
  } else {
    std::vector<double> r(n), g(n), b(n), intensity(n);
    for (std::size_t i = 0; i < n; ++i) {
      r[i] = raster.pixels[i * 3];
      g[i] = raster.pixels[i * 3 + 1];
      b[i] = raster.pixels[i * 3 + 2];
      intensity[i] = (r[i] + g[i] + b[i]) / 3.0;
    }
    grid.add_attribute("red", std::move(r));
    grid.add_attribute("green", std::move(g));
    grid.add_attribute("blue", std::move(b));
    grid.add_attribute("intensity", std::move(intensity));
  }
  return grid;
}

namespace {

constexpr char kRawvolMagic[] = "RAWVOL v1";

std::vector<std::string> split_words(const std::string& line) {
  std::vector<std::string> words;
  std::istringstream in(line);
  std::string w;
  while (in >> w) words.push_back(w);
  return words;
}

}  // namespace

VoxelGrid load_volume(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw LoadError("cannot open " + path);

  auto next_line = [&]() {
    std::string line;
    if (!std::getline(in, line)) throw LoadError("truncated RAWVOL header in " + path);
    return line;
  };

  if (next_line() != kRawvolMagic) throw LoadError("not a RAWVOL v1 file: " + path);

  Dims dims;
  std::vector<double> spacing;
  std::vector<std::string> channels;
  bool saw_type = false;
  while (true) {
    std::string line = next_line();
    if (line == "end") break;
    auto words = split_words(line);
    if (words.empty()) throw LoadError("empty RAWVOL header line in " + path);
    if (words[0] == "dims") {
      if (words.size() != 4) throw LoadError("RAWVOL dims must have 3 entries");
      for (std::size_t i = 1; i < words.size(); ++i) {
        long v = std::strtol(words[i].c_str(), nullptr, 10);
        if (v < 1) throw LoadError("RAWVOL dims must be positive");
        dims.push_back(static_cast<std::size_t>(v));
      }
    } else if (words[0] == "spacing") {
      if (words.size() != 4) throw LoadError("RAWVOL spacing must have 3 entries");
      for (std::size_t i = 1; i < words.size(); ++i) {
        double v = std::strtod(words[i].c_str(), nullptr);
        if (!(v > 0.0)) throw LoadError("RAWVOL spacing must be positive");
        spacing.push_back(v);
      }
    } else if (words[0] == "channels") {
      channels.assign(words.begin() + 1, words.end());
      if (channels.empty()) throw LoadError("RAWVOL needs at least one channel");
    } else if (words[0] == "type") {
      if (words.size() != 2 || words[1] != "f32le") {
        throw LoadError("RAWVOL supports type f32le only");
      }
      saw_type = true;
    } else {
      throw LoadError("unknown RAWVOL header field: " + words[0]);
    }
  }
  if (dims.empty() || spacing.empty() || channels.empty() || !saw_type) {
    throw LoadError("incomplete RAWVOL header in " + path);
  }

  VoxelGrid grid(dims, spacing);
  std::size_t n = grid.size();
  std::vector<float> buffer(n);
  for (const std::string& name : channels) {
    in.read(reinterpret_cast<char*>(buffer.data()),
            static_cast<std::streamsize>(n * sizeof(float)));
    if (in.gcount() != static_cast<std::streamsize>(n * sizeof(float))) {
      throw LoadError("truncated RAWVOL payload in " + path);
    }
    std::vector<double> values(n);
    for (std::size_t i = 0; i < n; ++i) {
      if (std::isnan(buffer[i])) throw LoadError("NaN in RAWVOL payload");
      values[i] = buffer[i];
    }
    grid.add_attribute(name, std::move(values));
  }
  if (in.get() != EOF) throw LoadError("RAWVOL payload longer than declared: " + path);
  return grid;
}

void save_volume(const std::string& path, const VoxelGrid& g) {
  if (g.ndims() != 3) throw IoError("RAWVOL stores 3D volumes only");
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path);
  out << kRawvolMagic << "\n";
  out << "dims " << g.dims[0] << " " << g.dims[1] << " " << g.dims[2] << "\n";
  out << "spacing " << g.spacing[0] << " " << g.spacing[1] << " " << g.spacing[2] << "\n";
  out << "channels";
  for (const auto& [name, _] : g.attributes) out << " " << name;
  out << "\ntype f32le\nend\n";
  std::vector<float> buffer(g.size());
  for (const auto& [name, field] : g.attributes) {
    for (std::size_t i = 0; i < buffer.size(); ++i) {
      buffer[i] = static_cast<float>(field.values[i]);
    }
    out.write(reinterpret_cast<const char*>(buffer.data()),
              static_cast<std::streamsize>(buffer.size() * sizeof(float)));
  }
  if (!out) throw IoError("write failed: " + path);
}

namespace {

std::string slice_path(const std::string& path, std::size_t z) {
  auto dot = path.find_last_of('.');
  std::string stem = dot == std::string::npos ? path : path.substr(0, dot);
  std::string ext = dot == std::string::npos ? "" : path.substr(dot);
  return stem + "_z" + std::to_string(z) + ext;
}

Raster mask_slice(const PointSet& s, std::size_t z_base, std::size_t w, std::size_t h) {
  Raster raster;
  raster.width = w;
  raster.height = h;
  raster.channels = 1;
  raster.pixels.resize(w * h);
  for (std::size_t i = 0; i < w * h; ++i) {
    raster.pixels[i] = s.membership[z_base + i] ? 255 : 0;
  }
  return raster;
}

}  // namespace

void save_mask(const std::string& path, const PointSet& s) {
  if (s.dims.size() == 2) {
    write_raster(path, mask_slice(s, 0, s.dims[0], s.dims[1]));
    return;
  }
  if (s.dims.size() == 3) {
    std::size_t plane = s.dims[0] * s.dims[1];
    for (std::size_t z = 0; z < s.dims[2]; ++z) {
      write_raster(slice_path(path, z), mask_slice(s, z * plane, s.dims[0], s.dims[1]));
    }
    return;
  }
  throw IoError("masks can be saved for 2D and 3D point sets only");
}

void save_overlay(const std::string& path, const VoxelGrid& g, const OverlaySpec& spec) {
  const ScalarField& base = g.attribute(spec.base);
  for (const OverlayLayer& layer : spec.layers) {
    if (layer.points.dims != g.dims) throw ModelError("overlay layer dims do not match grid");
  }

  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  for (double v : base.values) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  double range = hi - lo;

  auto render = [&](std::size_t base_index, std::size_t w, std::size_t h) {
    Raster raster;
    raster.width = w;
    raster.height = h;
    raster.channels = 3;
    raster.pixels.resize(w * h * 3);
    for (std::size_t i = 0; i < w * h; ++i) {
      std::size_t src = base_index + i;
      std::uint8_t gray = 128;
      if (range > 0.0 && std::isfinite(range)) {
        gray = static_cast<std::uint8_t>(
            std::lround((base.values[src] - lo) / range * 255.0));
      }
      Rgb color{gray, gray, gray};
      for (const OverlayLayer& layer : spec.layers) {
        if (layer.points.membership[src]) color = layer.color;
      }
      raster.pixels[i * 3] = color.r;
      raster.pixels[i * 3 + 1] = color.g;
      raster.pixels[i * 3 + 2] = color.b;
    }
    return raster;
  };

  if (g.ndims() == 2) {
    write_raster(path, render(0, g.dims[0], g.dims[1]));
    return;
  }
  if (g.ndims() == 3) {
    std::size_t plane = g.dims[0] * g.dims[1];
    for (std::size_t z = 0; z < g.dims[2]; ++z) {
      write_raster(slice_path(path, z), render(z * plane, g.dims[0], g.dims[1]));
    }
    return;
  }
  throw IoError("overlays can be saved for 2D and 3D grids only");
}

}  // namespace spatialmc
