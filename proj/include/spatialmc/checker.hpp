#pragma once

#include <string>
#include <unordered_map>

#include "spatialmc/formula.hpp"
#include "spatialmc/grid.hpp"

namespace spatialmc {

// Global model-checking state: the (immutable) model plus a cache of
// subformula denotations keyed by canonical formula text. Cache entries are
// only ever re-read, never mutated.
struct CheckContext {
  const Model* model = nullptr;
  int threads = 1;
  bool cache_enabled = true;
  std::unordered_map<std::string, PointSet> cache;

  explicit CheckContext(const Model& m, int threads_ = 1) : model(&m), threads(threads_) {}
};

// [[f]]: the set of points satisfying f, computed bottom-up.
PointSet check(CheckContext& ctx, const Formula& f);

PointSet eval_atom(const VoxelGrid& g, const Constraint& c, int threads = 1);
PointSet eval_near(CheckContext& ctx, const Formula& f);
PointSet eval_surrounded(CheckContext& ctx, const Formula& f1, const Formula& f2);

// Set-level surrounded: points of a from which every forward path leaving a
// hits b no later than the exit point. Flooding runs over reversed arcs from
// the seed (complement of a union b) through the complement of b.
PointSet surrounded_mask(const PointSet& a, const PointSet& b, const NeighborhoodSpec& nb);

}  // namespace spatialmc
