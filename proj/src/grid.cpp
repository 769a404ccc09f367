#include "spatialmc/grid.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace spatialmc {

std::size_t element_count(const Dims& dims) {
  std::size_t n = 1;
  for (std::size_t d : dims) n *= d;
  return n;
}

std::vector<std::size_t> make_strides(const Dims& dims) {
  std::vector<std::size_t> strides(dims.size());
  std::size_t s = 1;
  for (std::size_t a = 0; a < dims.size(); ++a) {
    strides[a] = s;
    s *= dims[a];
  }
  return strides;
}

std::size_t linear_index(const Dims& dims, const Coord& c) {
  std::size_t idx = 0;
  std::size_t stride = 1;
  for (std::size_t a = 0; a < dims.size(); ++a) {
    idx += static_cast<std::size_t>(c[a]) * stride;
    stride *= dims[a];
  }
  return idx;
}

Coord coordinates_of(const Dims& dims, std::size_t index) {
  Coord c(dims.size());
  for (std::size_t a = 0; a < dims.size(); ++a) {
    c[a] = static_cast<std::int64_t>(index % dims[a]);
    index /= dims[a];
  }
  return c;
}

bool in_bounds(const Dims& dims, const Coord& c) {
  for (std::size_t a = 0; a < dims.size(); ++a) {
    if (c[a] < 0 || c[a] >= static_cast<std::int64_t>(dims[a])) return false;
  }
  return true;
}

static void validate_dims(const Dims& dims) {
  if (dims.empty()) throw ModelError("dims must be non-empty");
  for (std::size_t d : dims) {
    if (d < 1) throw ModelError("every dim must be >= 1");
  }
}

ScalarField::ScalarField(Dims d, double fill) : dims(std::move(d)) {
  validate_dims(dims);
  values.assign(element_count(dims), fill);
}

ScalarField::ScalarField(Dims d, std::vector<double> v) : dims(std::move(d)), values(std::move(v)) {
  validate_dims(dims);
  if (values.size() != element_count(dims)) {
    throw ModelError("scalar field size does not match dims");
  }
  for (double x : values) {
    if (std::isnan(x)) throw ModelError("scalar field value is NaN");
  }
}

PointSet::PointSet(Dims d) : dims(std::move(d)) {
  validate_dims(dims);
  membership.assign(element_count(dims), 0);
}

PointSet PointSet::full(Dims d) {
  PointSet s(std::move(d));
  std::fill(s.membership.begin(), s.membership.end(), 1);
  return s;
}

bool PointSet::contains(const Coord& c) const { return contains(linear_index(dims, c)); }

void PointSet::insert(const Coord& c) { insert(linear_index(dims, c)); }

std::size_t PointSet::count() const {
  std::size_t n = 0;
  for (std::uint8_t m : membership) n += m;
  return n;
}

static void require_same_dims(const PointSet& a, const PointSet& b) {
  if (a.dims != b.dims) throw ModelError("point sets have different dims");
}

PointSet set_union(const PointSet& a, const PointSet& b) {
  require_same_dims(a, b);
  PointSet r(a.dims);
  for (std::size_t i = 0; i < r.size(); ++i) r.membership[i] = a.membership[i] | b.membership[i];
  return r;
}

PointSet set_intersection(const PointSet& a, const PointSet& b) {
  require_same_dims(a, b);
  PointSet r(a.dims);
  for (std::size_t i = 0; i < r.size(); ++i) r.membership[i] = a.membership[i] & b.membership[i];
  return r;
}

PointSet set_difference(const PointSet& a, const PointSet& b) {
  require_same_dims(a, b);
  PointSet r(a.dims);
  for (std::size_t i = 0; i < r.size(); ++i) {
    r.membership[i] = static_cast<std::uint8_t>(a.membership[i] & (b.membership[i] ^ 1u));
  }
  return r;
}

PointSet set_complement(const PointSet& a) {
  PointSet r(a.dims);
  for (std::size_t i = 0; i < r.size(); ++i) r.membership[i] = a.membership[i] ^ 1u;
  return r;
}

bool is_subset(const PointSet& a, const PointSet& b) {
  require_same_dims(a, b);
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a.membership[i] && !b.membership[i]) return false;
  }
  return true;
}

double offset_length(const Offset& o, std::span<const double> spacing) {
  double sum = 0.0;
  for (std::size_t a = 0; a < o.size(); ++a) {
    double step = o[a] * (a < spacing.size() ? spacing[a] : 1.0);
    sum += step * step;
  }
  return std::sqrt(sum);
}

NeighborhoodSpec NeighborhoodSpec::moore(std::size_t ndims) { return extended(ndims, 1); }

NeighborhoodSpec NeighborhoodSpec::von_neumann(std::size_t ndims) {
  NeighborhoodSpec nb;
  for (std::size_t a = 0; a < ndims; ++a) {
    for (int s : {-1, 1}) {
      Offset o(ndims, 0);
      o[a] = s;
      nb.offsets.push_back(std::move(o));
    }
  }
  return nb;
}

NeighborhoodSpec NeighborhoodSpec::extended(std::size_t ndims, int k) {
  if (ndims == 0) throw ModelError("neighborhood needs at least one dimension");
  if (k < 1) throw ModelError("extended neighborhood needs k >= 1");
  NeighborhoodSpec nb;
  Offset o(ndims, -k);
  while (true) {
    if (std::any_of(o.begin(), o.end(), [](int v) { return v != 0; })) {
      nb.offsets.push_back(o);
    }
    std::size_t a = 0;
    while (a < ndims) {
      if (++o[a] <= k) break;
      o[a] = -k;
      ++a;
    }
    if (a == ndims) break;
  }
  return nb;
}

NeighborhoodSpec NeighborhoodSpec::with_uniform_weight(double w) const {
  if (!(w > 0.0)) throw ModelError("arc weights must be positive");
  NeighborhoodSpec nb = *this;
  nb.weights = std::vector<double>(offsets.size(), w);
  return nb;
}

double NeighborhoodSpec::weight(std::size_t i, std::span<const double> spacing) const {
  if (weights) return (*weights)[i];
  return offset_length(offsets[i], spacing);
}

bool NeighborhoodSpec::symmetric() const {
  std::set<Offset> have(offsets.begin(), offsets.end());
  for (const Offset& o : offsets) {
    Offset neg(o.size());
    for (std::size_t a = 0; a < o.size(); ++a) neg[a] = -o[a];
    if (!have.count(neg)) return false;
  }
  return true;
}

void NeighborhoodSpec::validate(std::size_t ndims) const {
  for (const Offset& o : offsets) {
    if (o.size() != ndims) throw ModelError("offset arity does not match grid dims");
    if (std::all_of(o.begin(), o.end(), [](int v) { return v == 0; })) {
      throw ModelError("zero offset is not allowed");
    }
  }
  if (weights) {
    if (weights->size() != offsets.size()) throw ModelError("weights do not match offsets");
    for (double w : *weights) {
      if (!(w > 0.0) || std::isinf(w)) throw ModelError("arc weights must be positive and finite");
    }
  }
}

VoxelGrid::VoxelGrid(Dims d, std::vector<double> s) : dims(std::move(d)), spacing(std::move(s)) {
  validate_dims(dims);
  if (spacing.size() != dims.size()) throw ModelError("spacing length does not match dims");
  for (double v : spacing) {
    if (!(v > 0.0) || std::isinf(v) || std::isnan(v)) {
      throw ModelError("spacing values must be strictly positive and finite");
    }
  }
}

void VoxelGrid::add_attribute(const std::string& name, std::vector<double> values) {
  if (name.empty()) throw ModelError("attribute name must be non-empty");
  attributes.insert_or_assign(name, ScalarField(dims, std::move(values)));
}

bool VoxelGrid::has_attribute(const std::string& name) const { return attributes.count(name) != 0; }

const ScalarField& VoxelGrid::attribute(const std::string& name) const {
  auto it = attributes.find(name);
  if (it == attributes.end()) throw ModelError("unknown attribute " + name);
  return it->second;
}

Model make_model(VoxelGrid grid, NeighborhoodSpec neighborhood, MetricKind metric) {
  neighborhood.validate(grid.ndims());
  return Model{std::move(grid), std::move(neighborhood), metric};
}

namespace {

// Precomputed linear deltas plus per-axis bounds for one offset.
struct OffsetStep {
  std::int64_t delta;
  Offset off;
};

std::vector<OffsetStep> make_steps(const Dims& dims, const NeighborhoodSpec& nb) {
  auto strides = make_strides(dims);
  std::vector<OffsetStep> steps;
  steps.reserve(nb.offsets.size());
  for (const Offset& o : nb.offsets) {
    std::int64_t delta = 0;
    for (std::size_t a = 0; a < dims.size(); ++a) {
      delta += static_cast<std::int64_t>(o[a]) * static_cast<std::int64_t>(strides[a]);
    }
    steps.push_back({delta, o});
  }
  return steps;
}

bool step_in_bounds(const Dims& dims, const Coord& c, const Offset& o, int sign) {
  for (std::size_t a = 0; a < dims.size(); ++a) {
    std::int64_t t = c[a] + static_cast<std::int64_t>(sign * o[a]);
    if (t < 0 || t >= static_cast<std::int64_t>(dims[a])) return false;
  }
  return true;
}

// Advances an odometer coordinate in axis-0-fastest order.
void advance(const Dims& dims, Coord& c) {
  for (std::size_t a = 0; a < dims.size(); ++a) {
    if (++c[a] < static_cast<std::int64_t>(dims[a])) return;
    c[a] = 0;
  }
}

}  // namespace

PointSet dilate(const PointSet& s, const NeighborhoodSpec& nb) {
  nb.validate(s.dims.size());
  PointSet result = s;
  auto steps = make_steps(s.dims, nb);
  Coord c(s.dims.size(), 0);
  for (std::size_t i = 0; i < s.size(); ++i, advance(s.dims, c)) {
    if (!s.membership[i]) continue;
    for (const OffsetStep& st : steps) {
      if (step_in_bounds(s.dims, c, st.off, +1)) {
        result.membership[static_cast<std::size_t>(static_cast<std::int64_t>(i) + st.delta)] = 1;
      }
    }
  }
  return result;
}

std::vector<std::pair<std::size_t, double>> neighbors_of(std::size_t index,
                                                         const NeighborhoodSpec& nb,
                                                         const VoxelGrid& g) {
  nb.validate(g.ndims());
  if (index >= g.size()) throw ModelError("point index out of bounds");
  auto steps = make_steps(g.dims, nb);
  Coord c = coordinates_of(g.dims, index);
  std::vector<std::pair<std::size_t, double>> result;
  result.reserve(steps.size());
  for (std::size_t k = 0; k < steps.size(); ++k) {
    if (step_in_bounds(g.dims, c, steps[k].off, +1)) {
      result.emplace_back(static_cast<std::size_t>(static_cast<std::int64_t>(index) + steps[k].delta),
                          nb.weight(k, g.spacing));
    }
  }
  return result;
}

}  // namespace spatialmc
