#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "spatialmc/formula.hpp"
#include "spatialmc/grid.hpp"

namespace spatialmc {

// First-order value histogram. Bins are half-open [edge_i, edge_i+1) with the
// final bin closed; out-of-range values clamp to the end bins.
struct Histogram {
  int nbins = 0;
  double vmin = 0.0;
  double vmax = 0.0;
  std::vector<std::uint64_t> counts;

  Histogram() = default;
  Histogram(int nbins_, double vmin_, double vmax_);

  int bin_of(double v) const;
  void add(double v) { ++counts[static_cast<std::size_t>(bin_of(v))]; }
  void remove(double v);
  std::uint64_t total() const;
  bool compatible(const Histogram& other) const;
};

Histogram region_histogram(const VoxelGrid& g, const std::string& attr, const PointSet& region,
                           int nbins, double vmin, double vmax);

// Histogram over the Chebyshev ball of the given radius around center,
// clipped to the grid; includes the center point.
Histogram window_histogram(const VoxelGrid& g, const std::string& attr, const Coord& center,
                           int radius, int nbins, double vmin, double vmax);

// Pearson correlation of the two bin-frequency vectors, in [-1, 1].
// Exactly equal frequency vectors give 1; if either vector is constant
// (Pearson undefined) the result is 1 for equal vectors, else 0.
double cross_correlation(const Histogram& a, const Histogram& b);

// SCMP: marks every point whose window histogram cross-correlates with the
// reference area's histogram at or above params.threshold. Windows slide
// along axis 0, updating by entering/leaving hyperplanes.
PointSet scmp_mask(const VoxelGrid& g, const ScmpParams& params, const PointSet& reference_area,
                   int threads = 1);

}  // namespace spatialmc
