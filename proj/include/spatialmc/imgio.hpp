#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "spatialmc/grid.hpp"

namespace spatialmc {

struct Rgb {
  std::uint8_t r = 0;
  std::uint8_t g = 0;
  std::uint8_t b = 0;

  friend bool operator==(const Rgb&, const Rgb&) = default;
};

// #RRGGBB, case-insensitive hex digits.
Rgb parse_color(const std::string& text);

struct OverlayLayer {
  PointSet points;
  Rgb color;
};

// Base attribute rendered as min-max normalized grayscale; layers paint over
// it in declared order.
struct OverlaySpec {
  std::string base;
  std::vector<OverlayLayer> layers;
};

// 8-bit grayscale or RGB raster (.png, .pgm, .ppm). Grayscale yields an
// "intensity" attribute in [0,255]; RGB yields "red", "green", "blue" plus
// "intensity" = (r+g+b)/3. dims = (width, height), spacing (1,1).
VoxelGrid load_image2d(const std::string& path);

// RAWVOL v1 volume; dims and spacing from the header, one attribute per
// declared channel.
VoxelGrid load_volume(const std::string& path);
void save_volume(const std::string& path, const VoxelGrid& g);

// Binary image, member = 255. 3D sets are written one slice per file with a
// _z<k> suffix before the extension.
void save_mask(const std::string& path, const PointSet& s);

void save_overlay(const std::string& path, const VoxelGrid& g, const OverlaySpec& spec);

}  // namespace spatialmc
