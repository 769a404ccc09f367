#pragma once

#include <span>

#include "spatialmc/formula.hpp"
#include "spatialmc/grid.hpp"

namespace spatialmc {

// Distances in physical units; +inf where no source point is reachable.
using DistanceField = ScalarField;

// Exact Euclidean distance transform under anisotropic spacing, computed by
// the dimension-wise lower-envelope-of-parabolas method, O(n) per axis pass.
// axis_order permutes the passes (the result is order-independent).
DistanceField edt(const PointSet& source, std::span<const double> spacing, int threads = 1,
                  std::span<const std::size_t> axis_order = {});

// Multi-source Dijkstra shortest-path distance on the grid graph (Chamfer
// distance). For directed neighborhoods the value at x is the length of the
// shortest forward path from x to a source point.
DistanceField graph_dt(const PointSet& source, const NeighborhoodSpec& nb,
                       std::span<const double> spacing);

// Chessboard (max |dx_i|) or cityblock (sum |dx_i|) distance in index units;
// kind must be chessboard or cityblock.
DistanceField closed_form_dt(const PointSet& source, MetricKind kind);

// Pointwise |d_eucl - d| / d_eucl. Zero where d_eucl is zero, and where both
// fields are infinite.
ScalarField percentage_error(const DistanceField& d, const DistanceField& d_eucl);

// Pointwise e(d): +inf satisfies only upper-unbounded predicates.
PointSet predicate_mask(const DistanceField& d, const DistancePredicate& p);

// Transform dispatch on the model's metric.
DistanceField distance_transform(const Model& m, const PointSet& source, int threads = 1);

}  // namespace spatialmc
