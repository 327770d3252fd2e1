#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <string>

#include "qcwarp/beltrami.hpp"
#include "qcwarp/distort.hpp"
#include "qcwarp/error.hpp"
#include "qcwarp/lbs.hpp"
#include "qcwarp/metrics.hpp"
#include "qcwarp/restore.hpp"
#include "qcwarp/warp.hpp"

namespace py = pybind11;
using namespace qcwarp;

namespace {

using Doubles = py::array_t<double, py::array::c_style | py::array::forcecast>;
using Complexes = py::array_t<Complex, py::array::c_style | py::array::forcecast>;

// Maps travel as (h, w, 2) arrays of vertex positions (x, y).
DeformationMap to_map(const Doubles& a) {
  if (a.ndim() != 3 || a.shape(2) != 2) throw Error(ErrorKind::InvalidArgument, "map array must have shape (h, w, 2)");
  const auto mesh = build_grid_mesh(static_cast<int>(a.shape(1)), static_cast<int>(a.shape(0)));
  const auto* p = a.data();
  std::vector<Vec2> pos(mesh->vertex_count());
  for (std::size_t v = 0; v < pos.size(); ++v) pos[v] = {p[2 * v], p[2 * v + 1]};
  return DeformationMap(mesh, std::move(pos));
}

Doubles from_map(const DeformationMap& m) {
  Doubles out({m.mesh().height_v(), m.mesh().width_v(), 2});
  auto* p = out.mutable_data();
  for (std::size_t v = 0; v < m.positions().size(); ++v) {
    p[2 * v] = m.positions()[v].x;
    p[2 * v + 1] = m.positions()[v].y;
  }
  return out;
}

// Fields travel as (h - 1, w - 1, 2) complex arrays: lower then upper face of each cell.
BeltramiField to_field(const Complexes& a) {
  if (a.ndim() != 3 || a.shape(2) != 2) {
    throw Error(ErrorKind::InvalidArgument, "field array must have shape (h - 1, w - 1, 2)");
  }
  const auto mesh = build_grid_mesh(static_cast<int>(a.shape(1)) + 1, static_cast<int>(a.shape(0)) + 1);
  return BeltramiField(mesh, std::vector<Complex>(a.data(), a.data() + a.size()));
}

Complexes from_field(const BeltramiField& f) {
  Complexes out({f.mesh().cells_y(), f.mesh().cells_x(), 2});
  std::copy(f.values().begin(), f.values().end(), out.mutable_data());
  return out;
}

// Images travel as (h, w) or (h, w, c) arrays.
RasterImage to_image(const Doubles& a) {
  if (a.ndim() != 2 && a.ndim() != 3) throw Error(ErrorKind::InvalidArgument, "image array must be 2-D or 3-D");
  const int channels = a.ndim() == 3 ? static_cast<int>(a.shape(2)) : 1;
  return RasterImage(static_cast<int>(a.shape(1)), static_cast<int>(a.shape(0)), channels,
                     std::vector<double>(a.data(), a.data() + a.size()));
}

Doubles from_image(const RasterImage& img) {
  std::vector<py::ssize_t> shape{img.height(), img.width()};
  if (img.channels() > 1) shape.push_back(img.channels());
  Doubles out(shape);
  std::copy(img.data().begin(), img.data().end(), out.mutable_data());
  return out;
}

py::dict report_dict(const MetricReport& r) {
  py::dict d;
  d["mse"] = r.mse;
  d["psnr"] = r.psnr;
  d["ssim"] = r.ssim;
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Quasiconformal mesh maps, Beltrami coefficients and fold-free image restoration";

  static py::exception<Error> base(m, "QcwarpError", PyExc_ValueError);
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      const std::string msg = std::string(to_token(e.kind())) + ": " + e.what();
      PyErr_SetString(base.ptr(), msg.c_str());
    }
  });

  m.def("identity_map", [](int width, int height) { return from_map(identity_map(build_grid_mesh(width, height))); },
        py::arg("width"), py::arg("height"));

  m.def("compute_beltrami", [](const Doubles& map) { return from_field(compute_beltrami(to_map(map))); },
        py::arg("map"), "Per-face Beltrami coefficient of a vertex-position map.");

  m.def(
      "solve",
      [](const Complexes& field, std::optional<Doubles> boundary) {
        const auto mu = to_field(field);
        if (!boundary) return from_map(lbs_reconstruct(mu));
        const auto b = to_map(*boundary);
        if (!(b.mesh() == mu.mesh())) throw Error(ErrorKind::InvalidArgument, "boundary map and field use different meshes");
        return from_map(solve(assemble(mu.mesh_ptr(), mu, BoundaryCondition::boundary_of(b))));
      },
      py::arg("field"), py::arg("boundary") = py::none(),
      "Linear Beltrami solve. The boundary is the identity unless a map supplies it.");

  m.def(
      "squash",
      [](const Complexes& field, double margin) { return from_field(squash_activation(to_field(field), margin)); },
      py::arg("field"), py::arg("margin") = 1e-3);

  m.def("fourier_truncate", [](const Complexes& field, int k) { return from_field(fourier_truncate(to_field(field), k)); },
        py::arg("field"), py::arg("k"));

  m.def(
      "orientation_counts",
      [](const Doubles& map) {
        const auto c = face_orientation_count(to_map(map));
        return py::make_tuple(c.positive, c.flipped, c.degenerate);
      },
      py::arg("map"), "(positive, flipped, degenerate) face counts.");

  m.def(
      "warp",
      [](const Doubles& image, const Doubles& map) { return from_image(warp_image(to_image(image), to_map(map))); },
      py::arg("image"), py::arg("map"), "Backward warp: out(p) = image(map(p)).");

  m.def(
      "distortion_field",
      [](const std::string& spec, int width, int height) {
        return from_map(generate_field(parse_distortion_spec(spec), build_grid_mesh(width, height)));
      },
      py::arg("spec"), py::arg("width"), py::arg("height"), "Ground-truth map of a JSON distortion spec.");

  m.def(
      "simulate",
      [](const Doubles& image, const std::string& spec) {
        const auto pair = make_pair(to_image(image), parse_distortion_spec(spec));
        return py::make_tuple(from_image(pair.distorted), from_map(pair.truth));
      },
      py::arg("image"), py::arg("spec"), "Returns (distorted image, ground-truth map).");

  m.def(
      "synthetic_texture",
      [](int width, int height, int channels, std::uint64_t seed) {
        return from_image(synthetic_texture(width, height, channels, seed));
      },
      py::arg("width"), py::arg("height"), py::arg("channels") = 1, py::arg("seed") = 0);

  m.def(
      "restore",
      [](const Doubles& distorted, const Doubles& reference, std::optional<std::string> config) {
        const RestoreConfig cfg = config ? parse_restore_config(*config) : RestoreConfig{};
        RestoreResult res = [&] {
          const auto d = to_image(distorted);
          const auto r = to_image(reference);
          py::gil_scoped_release release;
          return restore_pair(d, r, cfg);
        }();
        py::list trace;
        for (const auto& row : res.trace) {
          trace.append(py::dict(py::arg("iteration") = row.iteration, py::arg("level") = row.level,
                                py::arg("l_est") = row.l_est, py::arg("residual") = row.residual,
                                py::arg("folds") = row.folds, py::arg("sup_norm") = row.sup_norm));
        }
        py::dict out;
        out["restored"] = from_image(res.restored);
        out["map"] = from_map(res.map);
        out["field"] = from_field(res.field);
        out["trace"] = trace;
        return out;
      },
      py::arg("distorted"), py::arg("reference"), py::arg("config") = py::none(),
      "Restore a distorted image toward a reference; config is optional JSON text.");

  m.def("map_error", [](const Doubles& recovered, const Doubles& truth) { return map_error(to_map(recovered), to_map(truth)); },
        py::arg("recovered"), py::arg("truth"));

  m.def(
      "evaluate", [](const Doubles& a, const Doubles& b) { return report_dict(evaluate(to_image(a), to_image(b))); },
      py::arg("a"), py::arg("b"), "MSE, PSNR and SSIM as a dict.");
}
