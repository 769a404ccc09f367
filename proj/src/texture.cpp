#include "spatialmc/texture.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "spatialmc/parallel.hpp"

namespace spatialmc {

Histogram::Histogram(int nbins_, double vmin_, double vmax_)
    : nbins(nbins_), vmin(vmin_), vmax(vmax_) {
  if (nbins < 1) throw ModelError("histogram needs at least one bin");
  if (!(vmin < vmax)) throw ModelError("histogram requires vmin < vmax");
  counts.assign(static_cast<std::size_t>(nbins), 0);
}

int Histogram::bin_of(double v) const {
  if (v < vmin) return 0;
  if (v >= vmax) return nbins - 1;
  double width = (vmax - vmin) / nbins;
  int b = static_cast<int>((v - vmin) / width);
  return std::clamp(b, 0, nbins - 1);
}

void Histogram::remove(double v) {
  std::size_t b = static_cast<std::size_t>(bin_of(v));
  if (counts[b] == 0) throw ModelError("histogram underflow on remove");
  --counts[b];
}

std::uint64_t Histogram::total() const {
  std::uint64_t t = 0;
  for (std::uint64_t c : counts) t += c;
  return t;
}

bool Histogram::compatible(const Histogram& other) const {
  return nbins == other.nbins && vmin == other.vmin && vmax == other.vmax;
}

Histogram region_histogram(const VoxelGrid& g, const std::string& attr, const PointSet& region,
                           int nbins, double vmin, double vmax) {
  if (region.dims != g.dims) throw ModelError("region dims do not match grid");
  const ScalarField& field = g.attribute(attr);
  Histogram h(nbins, vmin, vmax);
  bool any = false;
  for (std::size_t i = 0; i < region.size(); ++i) {
    if (region.membership[i]) {
      h.add(field.values[i]);
      any = true;
    }
  }
  if (!any) throw ModelError("reference region is empty");
  return h;
}

Histogram window_histogram(const VoxelGrid& g, const std::string& attr, const Coord& center,
                           int radius, int nbins, double vmin, double vmax) {
  if (center.size() != g.ndims()) throw ModelError("center arity does not match grid");
  if (!in_bounds(g.dims, center)) throw ModelError("window center out of bounds");
  if (radius < 1) throw ModelError("window radius must be >= 1");
  const ScalarField& field = g.attribute(attr);
  const Dims& dims = g.dims;

  Coord lo(dims.size()), hi(dims.size());
  for (std::size_t a = 0; a < dims.size(); ++a) {
    lo[a] = std::max<std::int64_t>(0, center[a] - radius);
    hi[a] = std::min<std::int64_t>(static_cast<std::int64_t>(dims[a]) - 1, center[a] + radius);
  }

  Histogram h(nbins, vmin, vmax);
  Coord c = lo;
  while (true) {
    h.add(field.values[linear_index(dims, c)]);
    std::size_t a = 0;
    while (a < dims.size()) {
      if (++c[a] <= hi[a]) break;
      c[a] = lo[a];
      ++a;
    }
    if (a == dims.size()) break;
  }
  return h;
}

namespace {

bool frequencies_equal(const Histogram& a, const Histogram& b, std::uint64_t ta, std::uint64_t tb) {
  for (int i = 0; i < a.nbins; ++i) {
    if (a.counts[static_cast<std::size_t>(i)] * tb != b.counts[static_cast<std::size_t>(i)] * ta) {
      return false;
    }
  }
  return true;
}

bool uniform_counts(const Histogram& h) {
  for (std::uint64_t c : h.counts) {
    if (c != h.counts[0]) return false;
  }
  return true;
}

}  // namespace

double cross_correlation(const Histogram& a, const Histogram& b) {
  if (!a.compatible(b)) throw ModelError("incompatible histogram configurations");
  std::uint64_t ta = a.total();
  std::uint64_t tb = b.total();
  if (ta == 0 || tb == 0) throw ModelError("histogram is empty");

  if (frequencies_equal(a, b, ta, tb)) return 1.0;
  // Pearson is undefined for a constant frequency vector; unequal vectors
  // compare as 0 by convention.
  if (uniform_counts(a) || uniform_counts(b)) return 0.0;

  std::size_t k = static_cast<std::size_t>(a.nbins);
  double ma = 0.0, mb = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    ma += static_cast<double>(a.counts[i]) / static_cast<double>(ta);
    mb += static_cast<double>(b.counts[i]) / static_cast<double>(tb);
  }
  ma /= static_cast<double>(k);
  mb /= static_cast<double>(k);

  double cov = 0.0, va = 0.0, vb = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    double da = static_cast<double>(a.counts[i]) / static_cast<double>(ta) - ma;
    double db = static_cast<double>(b.counts[i]) / static_cast<double>(tb) - mb;
    cov += da * db;
    va += da * da;
    vb += db * db;
  }
  double r = cov / std::sqrt(va * vb);
  return std::clamp(r, -1.0, 1.0);
}

PointSet scmp_mask(const VoxelGrid& g, const ScmpParams& p, const PointSet& reference_area,
                   int threads) {
  if (p.radius < 1) throw ModelError("SCMP radius must be >= 1");
  if (p.threshold < -1.0 || p.threshold > 1.0) throw ModelError("SCMP threshold out of range");
  Histogram ref = region_histogram(g, p.attribute, reference_area, p.nbins, p.vmin, p.vmax);

  const ScalarField& field = g.attribute(p.attribute);
  const Dims& dims = g.dims;
  auto strides = make_strides(dims);
  std::size_t ndims = dims.size();
  std::size_t d0 = dims[0];
  std::size_t rows = g.size() / d0;
  std::int64_t r = p.radius;
  PointSet result(dims);

  parallel_for(rows, threads, [&](std::size_t begin, std::size_t end) {
    Histogram h(p.nbins, p.vmin, p.vmax);
    std::vector<std::size_t> box;  // linear offsets of the window's cross-section
    Coord rest(ndims), lo(ndims), hi(ndims), c(ndims);

    for (std::size_t row = begin; row < end; ++row) {
      std::size_t rem = row;
      for (std::size_t a = 1; a < ndims; ++a) {
        rest[a] = static_cast<std::int64_t>(rem % dims[a]);
        rem /= dims[a];
      }

      box.clear();
      if (ndims == 1) {
        box.push_back(0);
      } else {
        for (std::size_t a = 1; a < ndims; ++a) {
          lo[a] = std::max<std::int64_t>(0, rest[a] - r);
          hi[a] = std::min<std::int64_t>(static_cast<std::int64_t>(dims[a]) - 1, rest[a] + r);
          c[a] = lo[a];
        }
        while (true) {
          std::size_t off = 0;
          for (std::size_t a = 1; a < ndims; ++a) {
            off += static_cast<std::size_t>(c[a]) * strides[a];
          }
          box.push_back(off);
          std::size_t a = 1;
          while (a < ndims) {
            if (++c[a] <= hi[a]) break;
            c[a] = lo[a];
            ++a;
          }
          if (a == ndims) break;
        }
      }

      std::fill(h.counts.begin(), h.counts.end(), 0);
      std::int64_t top = std::min<std::int64_t>(r, static_cast<std::int64_t>(d0) - 1);
      for (std::int64_t plane = 0; plane <= top; ++plane) {
        for (std::size_t off : box) h.add(field.values[static_cast<std::size_t>(plane) + off]);
      }

      for (std::size_t x0 = 0; x0 < d0; ++x0) {
        std::size_t idx = x0;
        for (std::size_t a = 1; a < ndims; ++a) {
          idx += static_cast<std::size_t>(rest[a]) * strides[a];
        }
        if (cross_correlation(h, ref) >= p.threshold) result.membership[idx] = 1;

        std::int64_t leaving = static_cast<std::int64_t>(x0) - r;
        if (leaving >= 0) {
          for (std::size_t off : box) h.remove(field.values[static_cast<std::size_t>(leaving) + off]);
        }
        std::int64_t entering = static_cast<std::int64_t>(x0) + r + 1;
        if (entering < static_cast<std::int64_t>(d0)) {
          for (std::size_t off : box) h.add(field.values[static_cast<std::size_t>(entering) + off]);
        }
      }
    }
  });
  return result;
}

}  // namespace spatialmc
