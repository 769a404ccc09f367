#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <memory>
#include <sstream>

#include "spatialmc/checker.hpp"
#include "spatialmc/distance.hpp"
#include "spatialmc/formula.hpp"
#include "spatialmc/grid.hpp"
#include "spatialmc/imgio.hpp"
#include "spatialmc/script.hpp"
#include "spatialmc/texture.hpp"

namespace py = pybind11;
using namespace spatialmc;

namespace {

// Arrays are exchanged C-contiguous with shape = reversed(dims), so a 2D
// image with dims (w, h) maps to the usual numpy (h, w) layout.
std::vector<py::ssize_t> numpy_shape(const Dims& dims) {
  std::vector<py::ssize_t> shape(dims.rbegin(), dims.rend());
  return shape;
}

Dims shape_dims(const py::array& a) {
  Dims dims;
  for (py::ssize_t i = a.ndim() - 1; i >= 0; --i) {
    dims.push_back(static_cast<std::size_t>(a.shape(i)));
  }
  return dims;
}

PointSet to_pointset(const py::array_t<bool, py::array::c_style | py::array::forcecast>& a) {
  PointSet s(shape_dims(a));
  const bool* data = a.data();
  for (std::size_t i = 0; i < s.size(); ++i) s.membership[i] = data[i] ? 1 : 0;
  return s;
}

py::array_t<bool> from_pointset(const PointSet& s) {
  py::array_t<bool> a(numpy_shape(s.dims));
  bool* data = a.mutable_data();
  for (std::size_t i = 0; i < s.size(); ++i) data[i] = s.membership[i] != 0;
  return a;
}

ScalarField to_field(const py::array_t<double, py::array::c_style | py::array::forcecast>& a) {
  const double* data = a.data();
  return ScalarField(shape_dims(a),
                     std::vector<double>(data, data + static_cast<std::size_t>(a.size())));
}

py::array_t<double> from_field(const ScalarField& f) {
  py::array_t<double> a(numpy_shape(f.dims));
  std::copy(f.values.begin(), f.values.end(), a.mutable_data());
  return a;
}

FormulaPtr as_formula(const py::object& f) {
  if (py::isinstance<py::str>(f)) return parse_formula(f.cast<std::string>());
  return std::const_pointer_cast<const Formula>(f.cast<std::shared_ptr<Formula>>());
}

MetricKind metric_from_name(const std::string& name) {
  if (name == "euclidean") return MetricKind::euclidean;
  if (name == "graph") return MetricKind::graph;
  if (name == "chessboard") return MetricKind::chessboard;
  if (name == "cityblock") return MetricKind::cityblock;
  throw ModelError("unknown metric " + name);
}

}  // namespace

PYBIND11_MODULE(spatialmc, m) {
  m.doc() = "Spatial model checker for multi-dimensional images: SLCS formulas with "
            "distance and statistical texture operators over voxel grids.";

  py::register_exception<ModelError>(m, "ModelError", PyExc_ValueError);
  py::register_exception<LoadError>(m, "LoadError", PyExc_IOError);
  py::register_exception<IoError>(m, "IoError", PyExc_IOError);
  py::register_exception<CheckError>(m, "CheckError", PyExc_ValueError);
  py::register_exception<ParseError>(m, "FormulaParseError", PyExc_ValueError);

  py::class_<VoxelGrid>(m, "VoxelGrid")
      .def(py::init([](const Dims& dims, const std::vector<double>& spacing) {
             return VoxelGrid(dims, spacing);
           }),
           py::arg("dims"), py::arg("spacing"))
      .def_readonly("dims", &VoxelGrid::dims)
      .def_readonly("spacing", &VoxelGrid::spacing)
      .def("add_attribute",
           [](VoxelGrid& g, const std::string& name,
              const py::array_t<double, py::array::c_style | py::array::forcecast>& values) {
             const double* data = values.data();
             g.add_attribute(name, std::vector<double>(
                                       data, data + static_cast<std::size_t>(values.size())));
           },
           py::arg("name"), py::arg("values"))
      .def("attribute",
           [](const VoxelGrid& g, const std::string& name) { return from_field(g.attribute(name)); },
           py::arg("name"))
      .def("attribute_names",
           [](const VoxelGrid& g) {
             std::vector<std::string> names;
             for (const auto& [name, _] : g.attributes) names.push_back(name);
             return names;
           })
      .def("__repr__", [](const VoxelGrid& g) {
        std::ostringstream out;
        out << "VoxelGrid(dims=[";
        for (std::size_t i = 0; i < g.dims.size(); ++i) out << (i ? ", " : "") << g.dims[i];
        out << "], attributes=" << g.attributes.size() << ")";
        return out.str();
      });

  py::class_<NeighborhoodSpec>(m, "NeighborhoodSpec")
      .def_static("moore", &NeighborhoodSpec::moore, py::arg("ndims"))
      .def_static("von_neumann", &NeighborhoodSpec::von_neumann, py::arg("ndims"))
      .def_static("extended", &NeighborhoodSpec::extended, py::arg("ndims"), py::arg("k"))
      .def("with_uniform_weight", &NeighborhoodSpec::with_uniform_weight, py::arg("weight"))
      .def("symmetric", &NeighborhoodSpec::symmetric)
      .def_readonly("offsets", &NeighborhoodSpec::offsets)
      .def("__len__", [](const NeighborhoodSpec& nb) { return nb.arity(); });

  py::class_<Model>(m, "Model")
      .def_property_readonly("grid", [](const Model& m_) { return m_.grid; })
      .def_property_readonly("neighborhood", [](const Model& m_) { return m_.neighborhood; });

  m.def(
      "make_model",
      [](const VoxelGrid& grid, const NeighborhoodSpec& nb, const std::string& metric) {
        return make_model(grid, nb, metric_from_name(metric));
      },
      py::arg("grid"), py::arg("neighborhood"), py::arg("metric") = "euclidean");

  py::class_<Formula, std::shared_ptr<Formula>>(m, "Formula")
      .def("__repr__", [](const Formula& f) { return "Formula(" + print_formula(f) + ")"; })
      .def("__str__", [](const Formula& f) { return print_formula(f); });

  m.def(
      "parse_formula",
      [](const std::string& text) {
        return std::const_pointer_cast<Formula>(parse_formula(text));
      },
      py::arg("text"));
  m.def("print_formula", [](const py::object& f) { return print_formula(*as_formula(f)); },
        py::arg("formula"));
  m.def(
      "validate",
      [](const py::object& f, const Model& model) { return validate(*as_formula(f), model); },
      py::arg("formula"), py::arg("model"));

  m.def(
      "check",
      [](const Model& model, const py::object& f, int threads) {
        CheckContext ctx(model, threads);
        return from_pointset(check(ctx, *as_formula(f)));
      },
      py::arg("model"), py::arg("formula"), py::arg("threads") = 1,
      "Evaluate a formula over a model; returns a boolean mask shaped like the grid.");

  m.def(
      "dilate",
      [](const py::array_t<bool, py::array::c_style | py::array::forcecast>& mask,
         const NeighborhoodSpec& nb) { return from_pointset(dilate(to_pointset(mask), nb)); },
      py::arg("mask"), py::arg("neighborhood"));

  m.def(
      "edt",
      [](const py::array_t<bool, py::array::c_style | py::array::forcecast>& source,
         const std::vector<double>& spacing, int threads) {
        return from_field(edt(to_pointset(source), spacing, threads));
      },
      py::arg("source"), py::arg("spacing"), py::arg("threads") = 1,
      "Exact Euclidean distance transform under anisotropic spacing.");

  m.def(
      "graph_dt",
      [](const py::array_t<bool, py::array::c_style | py::array::forcecast>& source,
         const NeighborhoodSpec& nb, const std::vector<double>& spacing) {
        return from_field(graph_dt(to_pointset(source), nb, spacing));
      },
      py::arg("source"), py::arg("neighborhood"), py::arg("spacing"),
      "Dijkstra shortest-path (Chamfer) distance transform.");

  m.def(
      "closed_form_dt",
      [](const py::array_t<bool, py::array::c_style | py::array::forcecast>& source,
         const std::string& metric) {
        return from_field(closed_form_dt(to_pointset(source), metric_from_name(metric)));
      },
      py::arg("source"), py::arg("metric"));

  m.def(
      "percentage_error",
      [](const py::array_t<double, py::array::c_style | py::array::forcecast>& d,
         const py::array_t<double, py::array::c_style | py::array::forcecast>& d_eucl) {
        return from_field(percentage_error(to_field(d), to_field(d_eucl)));
      },
      py::arg("d"), py::arg("d_eucl"));

  m.def("load_image2d", &load_image2d, py::arg("path"));
  m.def("load_volume", &load_volume, py::arg("path"));
  m.def("save_volume", &save_volume, py::arg("path"), py::arg("grid"));
  m.def(
      "save_mask",
      [](const std::string& path,
         const py::array_t<bool, py::array::c_style | py::array::forcecast>& mask) {
        save_mask(path, to_pointset(mask));
      },
      py::arg("path"), py::arg("mask"));
  m.def(
      "save_overlay",
      [](const std::string& path, const VoxelGrid& grid, const std::string& base,
         const std::vector<std::pair<py::array_t<bool, py::array::c_style | py::array::forcecast>,
                                     std::tuple<int, int, int>>>& layers) {
        OverlaySpec spec;
        spec.base = base;
        for (const auto& [mask, color] : layers) {
          spec.layers.push_back({to_pointset(mask),
                                 Rgb{static_cast<std::uint8_t>(std::get<0>(color)),
                                     static_cast<std::uint8_t>(std::get<1>(color)),
                                     static_cast<std::uint8_t>(std::get<2>(color))}});
        }
        save_overlay(path, grid, spec);
      },
      py::arg("path"), py::arg("grid"), py::arg("base"), py::arg("layers"));

  m.def(
      "run_script",
      [](const std::string& path, bool verbose, int threads) {
        std::ostringstream out, err;
        RunOptions opts;
        opts.verbose = verbose;
        opts.threads = threads;
        int code = run_script_file(path, opts, out, err);
        return py::make_tuple(code, out.str(), err.str());
      },
      py::arg("path"), py::arg("verbose") = false, py::arg("threads") = 0,
      "Run an analysis script; returns (exit_code, stdout, stderr).");
}
