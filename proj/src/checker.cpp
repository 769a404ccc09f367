#include "spatialmc/checker.hpp"

#include <vector>

#include "spatialmc/distance.hpp"
#include "spatialmc/parallel.hpp"
#include "spatialmc/texture.hpp"

namespace spatialmc {

PointSet eval_atom(const VoxelGrid& g, const Constraint& c, int threads) {
  const ScalarField& field = g.attribute(c.attribute);
  PointSet result(g.dims);
  parallel_for(field.size(), threads, [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      result.membership[i] = compare(field.values[i], c.cmp, c.threshold) ? 1 : 0;
    }
  });
  return result;
}

PointSet surrounded_mask(const PointSet& a, const PointSet& b, const NeighborhoodSpec& nb) {
  if (a.dims != b.dims) throw ModelError("point sets have different dims");
  nb.validate(a.dims.size());
  const Dims& dims = a.dims;
  auto strides = make_strides(dims);

  std::size_t n_offsets = nb.offsets.size();
  std::vector<std::int64_t> deltas(n_offsets);
  for (std::size_t k = 0; k < n_offsets; ++k) {
    std::int64_t d = 0;
    for (std::size_t ax = 0; ax < dims.size(); ++ax) {
      d += static_cast<std::int64_t>(nb.offsets[k][ax]) * static_cast<std::int64_t>(strides[ax]);
    }
    deltas[k] = d;
  }

  // Flood E from the seed (outside a, outside b) backwards through points
  // outside b; a point of a survives iff it is never flooded.
  std::vector<std::uint8_t> flooded(a.size(), 0);
  std::vector<std::size_t> worklist;
  worklist.reserve(a.size() / 4 + 1);
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (!a.membership[i] && !b.membership[i]) {
      flooded[i] = 1;
      worklist.push_back(i);
    }
  }

  Coord c(dims.size());
  while (!worklist.empty()) {
    std::size_t x = worklist.back();
    worklist.pop_back();
    std::size_t rem = x;
    for (std::size_t ax = 0; ax < dims.size(); ++ax) {
      c[ax] = static_cast<std::int64_t>(rem % dims[ax]);
      rem /= dims[ax];
    }
    for (std::size_t k = 0; k < n_offsets; ++k) {
      bool ok = true;
      for (std::size_t ax = 0; ax < dims.size(); ++ax) {
        std::int64_t t = c[ax] - static_cast<std::int64_t>(nb.offsets[k][ax]);
        if (t < 0 || t >= static_cast<std::int64_t>(dims[ax])) {
          ok = false;
          break;
        }
      }
      if (!ok) continue;
      std::size_t y = static_cast<std::size_t>(static_cast<std::int64_t>(x) - deltas[k]);
      if (!flooded[y] && !b.membership[y]) {
        flooded[y] = 1;
        worklist.push_back(y);
      }
    }
  }

  PointSet result(dims);
  for (std::size_t i = 0; i < a.size(); ++i) {
    result.membership[i] = static_cast<std::uint8_t>(a.membership[i] & (flooded[i] ^ 1u));
  }
  return result;
}

namespace {

PointSet check_impl(CheckContext& ctx, const Formula& f);

PointSet check_cached(CheckContext& ctx, const Formula& f) {
  if (!ctx.cache_enabled) return check_impl(ctx, f);
  std::string key = print_formula(f);
  auto it = ctx.cache.find(key);
  if (it != ctx.cache.end()) return it->second;
  PointSet result = check_impl(ctx, f);
  ctx.cache.emplace(std::move(key), result);
  return result;
}

PointSet check_impl(CheckContext& ctx, const Formula& f) {
  const Model& m = *ctx.model;
  switch (f.kind) {
    case FormulaKind::truth:
      return PointSet::full(m.grid.dims);
    case FormulaKind::atom:
      return eval_atom(m.grid, f.atom, ctx.threads);
    case FormulaKind::negation:
      return set_complement(check_cached(ctx, *f.lhs));
    case FormulaKind::conjunction:
      return set_intersection(check_cached(ctx, *f.lhs), check_cached(ctx, *f.rhs));
    case FormulaKind::disjunction:
      return set_union(check_cached(ctx, *f.lhs), check_cached(ctx, *f.rhs));
    case FormulaKind::near:
      return dilate(check_cached(ctx, *f.lhs), m.neighborhood);
    case FormulaKind::surrounded:
      return surrounded_mask(check_cached(ctx, *f.lhs), check_cached(ctx, *f.rhs),
                             m.neighborhood);
    case FormulaKind::distance: {
      PointSet source = check_cached(ctx, *f.lhs);
      DistanceField d = distance_transform(m, source, ctx.threads);
      return predicate_mask(d, f.dpred);
    }
    case FormulaKind::scmp: {
      PointSet sa = check_cached(ctx, *f.lhs);
      if (sa.empty()) {
        throw CheckError("SCMP reference area is empty: " + print_formula(*f.lhs));
      }
      return scmp_mask(m.grid, f.scmp, sa, ctx.threads);
    }
  }
  throw CheckError("unknown formula kind");
}

}  // namespace

PointSet check(CheckContext& ctx, const Formula& f) {
  if (!ctx.model) throw CheckError("check context has no model");
  return check_cached(ctx, f);
}

PointSet eval_near(CheckContext& ctx, const Formula& f) {
  return dilate(check(ctx, f), ctx.model->neighborhood);
}

PointSet eval_surrounded(CheckContext& ctx, const Formula& f1, const Formula& f2) {
  return surrounded_mask(check(ctx, f1), check(ctx, f2), ctx.model->neighborhood);
}

}  // namespace spatialmc
