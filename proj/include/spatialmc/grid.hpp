#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "spatialmc/errors.hpp"

namespace spatialmc {

using Dims = std::vector<std::size_t>;
using Coord = std::vector<std::int64_t>;
using Offset = std::vector<int>;

std::size_t element_count(const Dims& dims);

// Strides for the linear layout shared by every module: axis 0 fastest-varying.
std::vector<std::size_t> make_strides(const Dims& dims);

std::size_t linear_index(const Dims& dims, const Coord& c);
Coord coordinates_of(const Dims& dims, std::size_t index);
bool in_bounds(const Dims& dims, const Coord& c);

// Real value per grid point. +inf is allowed (distance from an empty set);
// NaN is rejected wherever fields enter a grid.
struct ScalarField {
  Dims dims;
  std::vector<double> values;

  ScalarField() = default;
  ScalarField(Dims d, double fill);
  ScalarField(Dims d, std::vector<double> v);

  std::size_t size() const { return values.size(); }
  double operator[](std::size_t i) const { return values[i]; }
  double& operator[](std::size_t i) { return values[i]; }
};

// Boolean mask over grid points; the denotation of a formula.
struct PointSet {
  Dims dims;
  std::vector<std::uint8_t> membership;

  PointSet() = default;
  explicit PointSet(Dims d);

  static PointSet full(Dims d);

  std::size_t size() const { return membership.size(); }
  bool contains(std::size_t i) const { return membership[i] != 0; }
  bool contains(const Coord& c) const;
  void insert(std::size_t i) { membership[i] = 1; }
  void insert(const Coord& c);
  std::size_t count() const;
  bool empty() const { return count() == 0; }

  friend bool operator==(const PointSet&, const PointSet&) = default;
};

PointSet set_union(const PointSet& a, const PointSet& b);
PointSet set_intersection(const PointSet& a, const PointSet& b);
PointSet set_difference(const PointSet& a, const PointSet& b);
PointSet set_complement(const PointSet& a);
bool is_subset(const PointSet& a, const PointSet& b);

// Physical length of an offset under per-axis spacing.
double offset_length(const Offset& o, std::span<const double> spacing);

// The adjacency relation R as integer offsets. An arc runs from every point x
// to every in-bounds x + o. Weights, when absent, default to the physical
// Euclidean offset length under the grid's spacing.
struct NeighborhoodSpec {
  std::vector<Offset> offsets;
  std::optional<std::vector<double>> weights;  // parallel to offsets when present

  static NeighborhoodSpec moore(std::size_t ndims);
  static NeighborhoodSpec von_neumann(std::size_t ndims);
  // All nonzero offsets in {-k,...,k}^ndims; extended(n, 1) == moore(n).
  static NeighborhoodSpec extended(std::size_t ndims, int k);

  NeighborhoodSpec with_uniform_weight(double w) const;

  std::size_t arity() const { return offsets.size(); }
  double weight(std::size_t i, std::span<const double> spacing) const;
  bool symmetric() const;
  void validate(std::size_t ndims) const;
};

// n-dimensional grid with per-axis physical spacing and named per-point
// attributes (the quantitative valuation).
struct VoxelGrid {
  Dims dims;
  std::vector<double> spacing;
  std::map<std::string, ScalarField> attributes;

  VoxelGrid() = default;
  VoxelGrid(Dims d, std::vector<double> s);

  std::size_t size() const { return element_count(dims); }
  std::size_t ndims() const { return dims.size(); }
  void add_attribute(const std::string& name, std::vector<double> values);
  bool has_attribute(const std::string& name) const;
  const ScalarField& attribute(const std::string& name) const;
};

// Metric backing distance formulas. GRAPH uses the model's neighborhood.
enum class MetricKind { euclidean, graph, chessboard, cityblock };

// Immutable space (X, R) bundle used by the checker.
struct Model {
  VoxelGrid grid;
  NeighborhoodSpec neighborhood;
  MetricKind metric = MetricKind::euclidean;
};

Model make_model(VoxelGrid grid, NeighborhoodSpec neighborhood,
                 MetricKind metric = MetricKind::euclidean);

// Closure of s: s together with every in-bounds point reachable from s by one
// arc. Offsets leaving the grid are dropped.
PointSet dilate(const PointSet& s, const NeighborhoodSpec& nb);

// In-bounds neighbors of a point with their arc weights.
std::vector<std::pair<std::size_t, double>> neighbors_of(std::size_t index,
                                                         const NeighborhoodSpec& nb,
                                                         const VoxelGrid& g);

}  // namespace spatialmc
