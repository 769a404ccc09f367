#pragma once

// Independent reference implementations used to pin expected values. These
// deliberately avoid the library's algorithmic code paths: distances come
// from direct minimum scans, surrounded from per-point reachability, SCMP
// from naive window enumeration with textbook Pearson correlation.

#include <cstdint>
#include <random>
#include <span>

#include "spatialmc/formula.hpp"
#include "spatialmc/grid.hpp"

namespace spatialmc::testing {

// O(points * sources) Euclidean minimum under anisotropic spacing.
ScalarField brute_force_edt(const PointSet& source, std::span<const double> spacing);

// Per-point forward BFS through the complement of b; x survives iff x is in a
// and no reachable all-not-b path ends outside a.
PointSet surrounded_oracle(const PointSet& a, const PointSet& b, const NeighborhoodSpec& nb);

// Naive SCMP: full window histogram per point, frequency-vector Pearson with
// the same degenerate conventions as the spec'd operator.
PointSet scmp_reference(const VoxelGrid& g, const ScmpParams& p, const PointSet& sa);

double dice(const PointSet& a, const PointSet& b);

// Random-model helpers for property tests.
Dims random_dims(std::mt19937& rng, std::size_t ndims, std::size_t max_side,
                 std::size_t max_points = 0);
PointSet random_pointset(std::mt19937& rng, const Dims& dims, double density);
NeighborhoodSpec random_symmetric_neighborhood(std::mt19937& rng, std::size_t ndims);
NeighborhoodSpec random_directed_neighborhood(std::mt19937& rng, std::size_t ndims);

}  // namespace spatialmc::testing
