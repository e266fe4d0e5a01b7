#include <pybind11/complex.h>
#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "rbfsurf/error.hpp"
#include "rbfsurf/experiments.hpp"
#include "rbfsurf/geometry.hpp"
#include "rbfsurf/kernels.hpp"
#include "rbfsurf/linalg.hpp"
#include "rbfsurf/operators.hpp"
#include "rbfsurf/reaction.hpp"
#include "rbfsurf/timestepping.hpp"

namespace py = pybind11;
using namespace rbfsurf;

namespace {

using RowPoints = Eigen::Matrix<double, Eigen::Dynamic, 3, Eigen::RowMajor>;

RowPoints to_array(const Points& p) {
  RowPoints a(static_cast<Index>(p.size()), 3);
  for (std::size_t i = 0; i < p.size(); ++i) a.row(static_cast<Index>(i)) = p[i].transpose();
  return a;
}

Points from_array(const RowPoints& a) {
  Points p(static_cast<std::size_t>(a.rows()));
  for (Index i = 0; i < a.rows(); ++i) p[static_cast<std::size_t>(i)] = a.row(i).transpose();
  return p;
}

py::dict trajectory_dict(const Trajectory& t) {
  py::dict d;
  d["times"] = t.times;
  d["snapshots"] = t.snapshots;
  d["final_u"] = t.final_u;
  d["final_v"] = t.final_v;
  d["final_time"] = t.final_time;
  d["steps"] = t.steps;
  d["factorizations"] = t.factorizations;
  d["stopped_early"] = t.stopped_early;
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Meshfree RBF surface operators and reaction-diffusion experiments";

  auto base = py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
  py::register_exception<InvalidArgument>(m, "InvalidArgument", PyExc_ValueError);
  auto numerical = py::register_exception<NumericalError>(m, "NumericalError", base.ptr());
  py::register_exception<NotPositiveDefinite>(m, "NotPositiveDefinite", numerical.ptr());
  py::register_exception<SingularMatrix>(m, "SingularMatrix", numerical.ptr());
  py::register_exception<NoConvergence>(m, "NoConvergence", numerical.ptr());
  py::register_exception<BlowUp>(m, "BlowUp", numerical.ptr());

  // kernels
  py::class_<Kernel>(m, "Kernel")
      .def_static("matern", &Kernel::matern, py::arg("nu"), py::arg("epsilon"))
      .def_static("imq", &Kernel::imq, py::arg("epsilon"))
      .def_static("parse", &parse_kernel_spec, py::arg("spec"))
      .def_property_readonly("epsilon", &Kernel::epsilon)
      .def_property_readonly("nu", &Kernel::nu)
      .def_property_readonly("spec", &Kernel::spec)
      .def("phi", [](const Kernel& k, const py::array_t<double>& r) { return py::vectorize([&k](double x) { return k.phi(x); })(r); }, py::arg("r"))
      .def("eta", [](const Kernel& k, const py::array_t<double>& r) { return py::vectorize([&k](double x) { return k.eta(x); })(r); }, py::arg("r"))
      .def("__repr__", [](const Kernel& k) { return "Kernel('" + k.spec() + "')"; });

  // geometry
  py::class_<Surface, std::shared_ptr<Surface>>(m, "Surface")
      .def_property_readonly("name", &Surface::name)
      .def("value", [](const Surface& s, const Vec3& x) { return s.value(x); })
      .def("normal", [](const Surface& s, const Vec3& x) { return Vec3(normal_at(s, x)); })
      .def("project", [](const Surface& s, const Vec3& x) { return Vec3(project(s, x)); })
      .def("area", &Surface::area);
  m.def("make_surface", [](const std::string& name) { return std::const_pointer_cast<Surface>(make_surface(name)); },
        py::arg("name"));
  m.def("surface_names", &surface_names);

  py::class_<NodeSet>(m, "NodeSet")
      .def(py::init([](const RowPoints& pts, const RowPoints& normals) {
             NodeSet ns;
             ns.points = from_array(pts);
             ns.normals = from_array(normals);
             if (ns.points.size() != ns.normals.size())
               throw InvalidArgument("points and normals must have the same length");
             return ns;
           }),
           py::arg("points"), py::arg("normals"))
      .def_property_readonly("points", [](const NodeSet& ns) { return to_array(ns.points); })
      .def_property_readonly("normals", [](const NodeSet& ns) { return to_array(ns.normals); })
      .def_readonly("weights", &NodeSet::weights)
      .def_readonly("h", &NodeSet::h)
      .def_readonly("q", &NodeSet::q)
      .def_readonly("rho", &NodeSet::rho)
      .def_readonly("surface", &NodeSet::surface)
      .def("__len__", &NodeSet::size);
  m.def(
      "generate_nodes",
      [](const std::string& surface, std::size_t n, std::uint64_t seed) {
        return generate_nodes(*make_surface(surface), n, seed);
      },
      py::arg("surface"), py::arg("n"), py::arg("seed") = 1, py::call_guard<py::gil_scoped_release>());
  m.def("save_nodes", &save_nodes, py::arg("nodes"), py::arg("path"));
  m.def(
      "load_nodes",
      [](const std::filesystem::path& path, const std::string& surface) {
        if (surface.empty()) return load_nodes(path);
        auto s = make_surface(surface);
        return load_nodes(path, s.get());
      },
      py::arg("path"), py::arg("surface") = "");

  // linalg
  m.def(
      "cholesky_solve", [](const Matrix& a, const Matrix& b) { return Matrix(cholesky(a).solve(b)); }, py::arg("a"),
      py::arg("b"));
  m.def(
      "lu_solve", [](const Matrix& a, const Matrix& b) { return Matrix(lu(a).solve(b)); }, py::arg("a"),
      py::arg("b"));
  m.def(
      "eigenvalues",
      [](const Matrix& a, Index cap) {
        EigenOptions o;
        o.cap = cap;
        return eigenvalues(a, o);
      },
      py::arg("a"), py::arg("cap") = 2500, py::call_guard<py::gil_scoped_release>());

  // operators
  py::class_<SurfaceOperators>(m, "SurfaceOperators")
      .def(py::init<Kernel, NodeSet>(), py::arg("kernel"), py::arg("nodes"),
           py::call_guard<py::gil_scoped_release>())
      .def_property_readonly("kernel", &SurfaceOperators::kernel)
      .def_property_readonly("nodes", &SurfaceOperators::nodes)
      .def_property_readonly("size", &SurfaceOperators::size)
      .def_property_readonly("A", &SurfaceOperators::A)
      .def_property_readonly("Gx", &SurfaceOperators::Gx)
      .def_property_readonly("Gy", &SurfaceOperators::Gy)
      .def_property_readonly("Gz", &SurfaceOperators::Gz)
      .def_property_readonly("L", &SurfaceOperators::L)
      .def_property_readonly("cond_estimate", &SurfaceOperators::cond_estimate)
      .def("laplacian", [](const SurfaceOperators& o, const Vector& u) { return Vector(o.L() * u); })
      .def("gradient", [](const SurfaceOperators& o, const Vector& u) {
        Matrix g(o.size(), 3);
        g.col(0) = o.Gx() * u;
        g.col(1) = o.Gy() * u;
        g.col(2) = o.Gz() * u;
        return g;
      });
  m.def("default_imq_epsilon", &default_imq_epsilon, py::arg("surface"));

  // experiments
  py::enum_<TestField>(m, "TestField")
      .value("SphereZ", TestField::SphereZ)
      .value("SphereGaussians", TestField::SphereGaussians)
      .value("SphereSmooth", TestField::SphereSmooth)
      .value("TorusPolynomial", TestField::TorusPolynomial);
  py::enum_<SphereProfile>(m, "SphereProfile").value("Exp", SphereProfile::Exp).value("Gauss", SphereProfile::Gauss);
  m.def(
      "laplacian_error",
      [](const SurfaceOperators& o, const std::string& field, std::uint64_t center_seed) {
        const Norms n = laplacian_error(o, parse_test_field(field), random_sphere_centers(23, center_seed));
        return py::make_tuple(n.l2, n.linf);
      },
      py::arg("ops"), py::arg("field"), py::arg("center_seed") = 2024);
  m.def(
      "run_convergence",
      [](const std::string& surface, const Kernel& k, const std::vector<std::size_t>& counts, double dt, double t_end,
         std::uint64_t seed, const std::string& profile) {
        ConvergenceOptions o;
        o.dt = dt;
        o.t_end = t_end;
        o.node_seed = seed;
        o.sphere_profile = parse_sphere_profile(profile);
        ConvergenceTable t;
        {
          py::gil_scoped_release nogil;
          t = run_convergence(surface, k, counts, o);
        }
        py::list rows;
        for (const auto& r : t.rows) {
          py::dict d;
          d["N"] = r.n;
          d["h"] = r.h;
          d["l2"] = r.l2;
          d["linf"] = r.linf;
          d["failed"] = r.failed;
          d["error"] = r.error;
          rows.append(d);
        }
        py::dict d;
        d["rows"] = rows;
        d["l2_rate"] = t.l2_rate;
        d["linf_rate"] = t.linf_rate;
        return d;
      },
      py::arg("surface"), py::arg("kernel"), py::arg("counts"), py::arg("dt") = 1e-3, py::arg("t_end") = 0.2,
      py::arg("seed") = 1, py::arg("sphere_profile") = "exp");
  m.def(
      "stability_scan",
      [](const SurfaceOperators& o, Index cap) {
        EigenOptions eo;
        eo.cap = cap;
        SpectrumReport r;
        {
          py::gil_scoped_release nogil;
          r = stability_scan(o, eo);
        }
        py::dict d;
        d["eigenvalues"] = r.eigenvalues;
        d["max_real"] = r.max_real;
        d["max_abs"] = r.max_abs;
        d["left_half_plane"] = r.left_half_plane();
        d["conjugate_defect"] = conjugate_symmetry_defect(r.eigenvalues);
        return d;
      },
      py::arg("ops"), py::arg("cap") = 2500);
  m.def("fit_order", &fit_order, py::arg("dts"), py::arg("errors"));

  // time stepping
  m.def(
      "bdf4_run",
      [](const Matrix& l, double delta, const Vector& u0, double dt, double t_end) {
        return trajectory_dict(bdf4_run(DiffusionProblem{l, delta, {}, u0}, dt, t_end));
      },
      py::arg("L"), py::arg("delta"), py::arg("u0"), py::arg("dt"), py::arg("t_end"));

  // reaction
  py::class_<TuringParams>(m, "TuringParams")
      .def(py::init<>())
      .def_readwrite("delta_u", &TuringParams::delta_u)
      .def_readwrite("delta_v", &TuringParams::delta_v)
      .def_readwrite("alpha", &TuringParams::alpha)
      .def_readwrite("beta", &TuringParams::beta)
      .def_readwrite("gamma", &TuringParams::gamma)
      .def_readwrite("tau1", &TuringParams::tau1)
      .def_readwrite("tau2", &TuringParams::tau2);
  m.def(
      "turing_preset",
      [](const std::string& name) {
        const TuringPreset p = turing_preset(name);
        return py::make_tuple(p.surface, p.params);
      },
      py::arg("name"));
  m.def("turing_preset_names", &turing_preset_names);
  m.def(
      "run_turing",
      [](const SurfaceOperators& o, const TuringParams& p, double dt, std::size_t max_steps, std::uint64_t seed) {
        TuringOptions opts;
        opts.dt = dt;
        opts.max_steps = max_steps;
        opts.seed = seed;
        TuringResult r;
        {
          py::gil_scoped_release nogil;
          r = run_turing(o, p, opts);
        }
        py::dict d = trajectory_dict(r.traj);
        d["steady"] = r.steady;
        d["last_rate"] = r.last_rate;
        d["std_u"] = r.std_u;
        d["mean_u"] = r.mean_u;
        return d;
      },
      py::arg("ops"), py::arg("params"), py::arg("dt") = 0.01, py::arg("max_steps") = 100000, py::arg("seed") = 1);

  py::class_<SpiralParams>(m, "SpiralParams")
      .def(py::init<>())
      .def_readwrite("a", &SpiralParams::a)
      .def_readwrite("b", &SpiralParams::b)
      .def_readwrite("alpha", &SpiralParams::alpha)
      .def_readwrite("delta_u", &SpiralParams::delta_u)
      .def_readwrite("delta_v", &SpiralParams::delta_v);
  m.def("spiral_preset", &spiral_preset, py::arg("surface"));
  m.def(
      "run_spiral",
      [](const SurfaceOperators& o, const SpiralParams& p, double dt, double t_end) {
        SpiralOptions opts;
        opts.dt = dt;
        opts.t_end = t_end;
        SpiralResult r;
        {
          py::gil_scoped_release nogil;
          r = run_spiral(o, p, opts);
        }
        py::dict d = trajectory_dict(r.traj);
        d["u_min"] = r.u_min;
        d["u_max"] = r.u_max;
        d["probe_variance"] = r.probe_variance;
        d["mean_variance"] = r.mean_variance;
        return d;
      },
      py::arg("ops"), py::arg("params"), py::arg("dt") = 0.02, py::arg("t_end") = 45.0);
}
