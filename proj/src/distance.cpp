#include "spatialmc/distance.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <queue>
#include <vector>

#include "spatialmc/parallel.hpp"

namespace spatialmc {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// 1D squared-distance transform along one line: the lower envelope of
// parabolas rooted at samples with finite value. Coordinates are i*step.
// f is read from values[base + i*stride] and written back in place.
struct LineTransform {
  std::vector<int> hull;           // parabola roots
  std::vector<double> boundaries;  // z[k]: start of hull[k]'s dominance range
  std::vector<double> line;

  void run(std::vector<double>& values, std::size_t base, std::size_t stride, std::size_t n,
           double step) {
    line.resize(n);
    for (std::size_t i = 0; i < n; ++i) line[i] = values[base + i * stride];

    hull.clear();
    boundaries.clear();
    for (std::size_t q = 0; q < n; ++q) {
      if (line[q] == kInf) continue;
      double xq = static_cast<double>(q) * step;
      double s = 0.0;
      while (!hull.empty()) {
        double xr = static_cast<double>(hull.back()) * step;
        s = ((line[q] + xq * xq) - (line[hull.back()] + xr * xr)) / (2.0 * (xq - xr));
        if (s > boundaries.back()) break;
        hull.pop_back();
        boundaries.pop_back();
      }
      if (hull.empty()) {
        boundaries.push_back(-kInf);
      } else {
        boundaries.push_back(s);
      }
      hull.push_back(static_cast<int>(q));
    }

    if (hull.empty()) return;  // whole line stays +inf

    std::size_t k = 0;
    for (std::size_t i = 0; i < n; ++i) {
      double x = static_cast<double>(i) * step;
      while (k + 1 < hull.size() && boundaries[k + 1] < x) ++k;
      double dx = x - static_cast<double>(hull[k]) * step;
      values[base + i * stride] = dx * dx + line[hull[k]];
    }
  }
};

// Enumerates the base linear index of every line along `axis`.
std::size_t line_base(const Dims& dims, const std::vector<std::size_t>& strides, std::size_t axis,
                      std::size_t line_no) {
  std::size_t base = 0;
  for (std::size_t a = 0; a < dims.size(); ++a) {
    if (a == axis) continue;
    std::size_t extent = dims[a];
    base += (line_no % extent) * strides[a];
    line_no /= extent;
  }
  return base;
}

}  // namespace

DistanceField edt(const PointSet& source, std::span<const double> spacing, int threads,
                  std::span<const std::size_t> axis_order) {
  const Dims& dims = source.dims;
  if (spacing.size() != dims.size()) throw ModelError("spacing length does not match dims");

  ScalarField sq(dims, 0.0);
  for (std::size_t i = 0; i < source.size(); ++i) {
    sq.values[i] = source.membership[i] ? 0.0 : kInf;
  }

  std::vector<std::size_t> order(axis_order.begin(), axis_order.end());
  if (order.empty()) {
    order.resize(dims.size());
    std::iota(order.begin(), order.end(), 0);
  }

  auto strides = make_strides(dims);
  std::size_t total = element_count(dims);
  for (std::size_t axis : order) {
    if (axis >= dims.size()) throw ModelError("bad axis in axis order");
    std::size_t n = dims[axis];
    std::size_t lines = total / n;
    double step = spacing[axis];
    parallel_for(lines, threads, [&](std::size_t begin, std::size_t end) {
      LineTransform tf;
      for (std::size_t ln = begin; ln < end; ++ln) {
        tf.run(sq.values, line_base(dims, strides, axis, ln), strides[axis], n, step);
      }
    });
  }

  parallel_for(total, threads, [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) sq.values[i] = std::sqrt(sq.values[i]);
  });
  return sq;
}

DistanceField graph_dt(const PointSet& source, const NeighborhoodSpec& nb,
                       std::span<const double> spacing) {
  const Dims& dims = source.dims;
  nb.validate(dims.size());
  if (spacing.size() != dims.size()) throw ModelError("spacing length does not match dims");

  auto strides = make_strides(dims);
  std::size_t n_offsets = nb.offsets.size();
  std::vector<std::int64_t> deltas(n_offsets);
  std::vector<double> weights(n_offsets);
  for (std::size_t k = 0; k < n_offsets; ++k) {
    std::int64_t d = 0;
    for (std::size_t a = 0; a < dims.size(); ++a) {
      d += static_cast<std::int64_t>(nb.offsets[k][a]) * static_cast<std::int64_t>(strides[a]);
    }
    deltas[k] = d;
    weights[k] = nb.weight(k, spacing);
    if (!(weights[k] > 0.0)) throw ModelError("arc weights must be positive");
  }

  ScalarField dist(dims, kInf);
  using Entry = std::pair<double, std::size_t>;
  std::priority_queue<Entry, std::vector<Entry>, std::greater<>> queue;
  for (std::size_t i = 0; i < source.size(); ++i) {
    if (source.membership[i]) {
      dist.values[i] = 0.0;
      queue.emplace(0.0, i);
    }
  }

  Coord c(dims.size());
  while (!queue.empty()) {
    auto [d, u] = queue.top();
    queue.pop();
    if (d > dist.values[u]) continue;
    // Relax predecessors u - o: their forward arc reaches u.
    std::size_t rem = u;
    for (std::size_t a = 0; a < dims.size(); ++a) {
      c[a] = static_cast<std::int64_t>(rem % dims[a]);
      rem /= dims[a];
    }
    for (std::size_t k = 0; k < n_offsets; ++k) {
      bool ok = true;
      for (std::size_t a = 0; a < dims.size(); ++a) {
        std::int64_t t = c[a] - static_cast<std::int64_t>(nb.offsets[k][a]);
        if (t < 0 || t >= static_cast<std::int64_t>(dims[a])) {
          ok = false;
          break;
        }
      }
      if (!ok) continue;
      std::size_t v = static_cast<std::size_t>(static_cast<std::int64_t>(u) - deltas[k]);
      double nd = d + weights[k];
      if (nd < dist.values[v]) {
        dist.values[v] = nd;
        queue.emplace(nd, v);
      }
    }
  }
  return dist;
}

DistanceField closed_form_dt(const PointSet& source, MetricKind kind) {
  if (kind != MetricKind::chessboard && kind != MetricKind::cityblock) {
    throw ModelError("closed-form transform supports chessboard and cityblock only");
  }
  const Dims& dims = source.dims;
  std::vector<Coord> sources;
  for (std::size_t i = 0; i < source.size(); ++i) {
    if (source.membership[i]) sources.push_back(coordinates_of(dims, i));
  }

  ScalarField dist(dims, kInf);
  if (sources.empty()) return dist;

  Coord c(dims.size(), 0);
  for (std::size_t i = 0; i < dist.size(); ++i) {
    double best = kInf;
    for (const Coord& s : sources) {
      double v = 0.0;
      if (kind == MetricKind::chessboard) {
        for (std::size_t a = 0; a < dims.size(); ++a) {
          v = std::max(v, static_cast<double>(std::llabs(c[a] - s[a])));
        }
      } else {
        for (std::size_t a = 0; a < dims.size(); ++a) {
          v += static_cast<double>(std::llabs(c[a] - s[a]));
        }
      }
      best = std::min(best, v);
    }
    dist.values[i] = best;
    for (std::size_t a = 0; a < dims.size(); ++a) {
      if (++c[a] < static_cast<std::int64_t>(dims[a])) break;
      c[a] = 0;
    }
  }
  return dist;
}

ScalarField percentage_error(const DistanceField& d, const DistanceField& d_eucl) {
  if (d.dims != d_eucl.dims) throw ModelError("distance fields have different dims");
  ScalarField err(d.dims, 0.0);
  for (std::size_t i = 0; i < d.size(); ++i) {
    double de = d_eucl.values[i];
    double dv = d.values[i];
    if (de == 0.0) {
      err.values[i] = 0.0;
    } else if (std::isinf(de)) {
      err.values[i] = std::isinf(dv) ? 0.0 : kInf;
    } else {
      err.values[i] = std::abs(de - dv) / de;
    }
  }
  return err;
}

PointSet predicate_mask(const DistanceField& d, const DistancePredicate& p) {
  PointSet mask(d.dims);
  for (std::size_t i = 0; i < d.size(); ++i) {
    if (p.matches(d.values[i])) mask.membership[i] = 1;
  }
  return mask;
}

DistanceField distance_transform(const Model& m, const PointSet& source, int threads) {
  switch (m.metric) {
    case MetricKind::euclidean: return edt(source, m.grid.spacing, threads);
    case MetricKind::graph: return graph_dt(source, m.neighborhood, m.grid.spacing);
    case MetricKind::chessboard:
    case MetricKind::cityblock: return closed_form_dt(source, m.metric);
  }
  throw ModelError("unknown metric");
}

}  // namespace spatialmc
