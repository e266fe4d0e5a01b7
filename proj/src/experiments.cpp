#include "rbfsurf/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>

#include "rbfsurf/error.hpp"

namespace rbfsurf {

namespace {

constexpr double kGuard = 1e-6;

double angle(const Vec3& a, const Vec3& b) {
  // atan2 keeps full accuracy near 0 and pi, unlike acos.
  return std::atan2(a.cross(b).norm(), a.dot(b));
}

Vector nodal(const NodeSet& ns, const std::function<double(const Vec3&)>& f) {
  Vector v(static_cast<Index>(ns.size()));
  for (std::size_t i = 0; i < ns.size(); ++i) v[static_cast<Index>(i)] = f(ns.points[i]);
  return v;
}

}  // namespace

Points random_sphere_centers(std::size_t count, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0.0, 1.0);
  Points c;
  c.reserve(count);
  while (c.size() < count) {
    Vec3 p(g(rng), g(rng), g(rng));
    const double r = p.norm();
    if (r < 1e-12) continue;
    c.push_back(p / r);
  }
  return c;
}

SphereProfile parse_sphere_profile(std::string_view name) {
  if (name == "exp") return SphereProfile::Exp;
  if (name == "gauss") return SphereProfile::Gauss;
  throw InvalidArgument("unknown sphere profile '" + std::string(name) + "' (exp, gauss)");
}

std::string sphere_profile_name(SphereProfile p) { return p == SphereProfile::Exp ? "exp" : "gauss"; }

double sphere_solution(double t, const Vec3& x, const Points& centers, SphereProfile p) {
  double s = 0.0;
  for (const auto& c : centers) {
    const double th = angle(c, x);
    s += std::exp(p == SphereProfile::Exp ? -10.0 * th : -10.0 * th * th);
  }
  return std::exp(-5.0 * t) * s;
}

double sphere_laplacian(double t, const Vec3& x, const Points& centers, SphereProfile p) {
  double s = 0.0;
  for (const auto& c : centers) {
    const double th = angle(c, x);
    if (std::numbers::pi - th < kGuard || (p == SphereProfile::Exp && th < kGuard))
      throw InvalidArgument("sphere forcing: point within 1e-6 of a center or its antipode");
    if (p == SphereProfile::Exp) {
      s += (100.0 - 10.0 / std::tan(th)) * std::exp(-10.0 * th);
    } else {
      const double th_cot = th < 1e-8 ? 1.0 : th / std::tan(th);
      s += (400.0 * th * th - 20.0 - 20.0 * th_cot) * std::exp(-10.0 * th * th);
    }
  }
  return std::exp(-5.0 * t) * s;
}

double sphere_forcing(double t, const Vec3& x, const Points& centers, SphereProfile p) {
  return -5.0 * sphere_solution(t, x, centers, p) - sphere_laplacian(t, x, centers, p);
}

double torus_solution(double t, const Vec3& p) {
  const double x = p[0], y = p[1], z = p[2];
  const double x2 = x * x, y2 = y * y;
  return 0.125 * std::exp(-5.0 * t) * x * (x2 * x2 - 10.0 * x2 * y2 + 5.0 * y2 * y2) * (x2 + y2 - 60.0 * z * z);
}

double torus_laplacian(double t, const Vec3& p) {
  const double x = p[0], y = p[1];
  const double x2 = x * x, y2 = y * y;
  const double r2 = x2 + y2, r = std::sqrt(r2);
  const double poly = (((10248.0 * r - 34335.0) * r + 41359.0) * r - 21320.0) * r + 4000.0;
  return -(3.0 / (8.0 * r2)) * std::exp(-5.0 * t) * x * (x2 * x2 - 10.0 * x2 * y2 + 5.0 * y2 * y2) * poly;
}

double torus_forcing(double t, const Vec3& x) { return -5.0 * torus_solution(t, x) - torus_laplacian(t, x); }

Norms discrete_norms(const Vector& err, const Vector& ref, const std::vector<double>& w) {
  if (err.size() != ref.size()) throw InvalidArgument("discrete_norms: length mismatch");
  if (!w.empty() && static_cast<Index>(w.size()) != ref.size())
    throw InvalidArgument("discrete_norms: weight length mismatch");
  double ne = 0.0, nr = 0.0;
  for (Index i = 0; i < ref.size(); ++i) {
    const double wi = w.empty() ? 1.0 : w[static_cast<std::size_t>(i)];
    ne += wi * err[i] * err[i];
    nr += wi * ref[i] * ref[i];
  }
  const double mr = ref.size() ? ref.cwiseAbs().maxCoeff() : 0.0;
  if (nr == 0.0 || mr == 0.0) throw InvalidArgument("discrete_norms: reference is zero");
  const double me = err.size() ? err.cwiseAbs().maxCoeff() : 0.0;
  return {std::sqrt(ne / nr), me / mr};
}

TestField parse_test_field(std::string_view name) {
  if (name == "sphere-z") return TestField::SphereZ;
  if (name == "sphere-gauss") return TestField::SphereGaussians;
  if (name == "sphere-smooth") return TestField::SphereSmooth;
  if (name == "torus-poly") return TestField::TorusPolynomial;
  throw InvalidArgument("unknown test field '" + std::string(name) + "' (sphere-z, sphere-gauss, sphere-smooth, torus-poly)");
}

std::string test_field_name(TestField f) {
  switch (f) {
    case TestField::SphereZ: return "sphere-z";
    case TestField::SphereGaussians: return "sphere-gauss";
    case TestField::SphereSmooth: return "sphere-smooth";
    case TestField::TorusPolynomial: return "torus-poly";
  }
  return {};
}

Vector field_values(TestField f, const NodeSet& ns, const Points& centers) {
  switch (f) {
    case TestField::SphereZ: return nodal(ns, [](const Vec3& x) { return x[2]; });
    case TestField::SphereGaussians:
      return nodal(ns, [&](const Vec3& x) { return sphere_solution(0.0, x, centers); });
    case TestField::SphereSmooth:
      return nodal(ns, [&](const Vec3& x) { return sphere_solution(0.0, x, centers, SphereProfile::Gauss); });
    case TestField::TorusPolynomial: return nodal(ns, [](const Vec3& x) { return torus_solution(0.0, x); });
  }
  throw InvalidArgument("unknown test field");
}

Vector field_laplacian(TestField f, const NodeSet& ns, const Points& centers) {
  switch (f) {
    case TestField::SphereZ: return nodal(ns, [](const Vec3& x) { return -2.0 * x[2]; });
    case TestField::SphereGaussians:
      return nodal(ns, [&](const Vec3& x) { return sphere_laplacian(0.0, x, centers); });
    case TestField::SphereSmooth:
      return nodal(ns, [&](const Vec3& x) { return sphere_laplacian(0.0, x, centers, SphereProfile::Gauss); });
    case TestField::TorusPolynomial: return nodal(ns, [](const Vec3& x) { return torus_laplacian(0.0, x); });
  }
  throw InvalidArgument("unknown test field");
}

Norms laplacian_error(const SurfaceOperators& ops, TestField f, const Points& centers) {
  const Vector u = field_values(f, ops.nodes(), centers);
  const Vector ref = field_laplacian(f, ops.nodes(), centers);
  return discrete_norms(ops.L() * u - ref, ref, ops.nodes().weights);
}

bool ConvergenceTable::all_ok() const {
  return std::none_of(rows.begin(), rows.end(), [](const ConvergenceRow& r) { return r.failed; });
}

double fit_rate(const std::vector<std::size_t>& ns, const std::vector<double>& errs) {
  if (ns.size() != errs.size()) throw InvalidArgument("fit_rate: length mismatch");
  if (ns.size() < 2) return std::numeric_limits<double>::quiet_NaN();
  const std::size_t first = ns.size() > 4 ? ns.size() - 4 : 0;
  std::vector<double> x, y;
  for (std::size_t i = first; i < ns.size(); ++i) {
    x.push_back(std::sqrt(static_cast<double>(ns[i])));
    y.push_back(errs[i]);
  }
  // fit_order returns d log(err) / d log(x).
  return -fit_order(x, y);
}

ConvergenceRow convergence_row(const SurfaceOperators& ops, const std::string& surface,
                               const ConvergenceOptions& opts) {
  const NodeSet& ns = ops.nodes();
  std::function<double(double, const Vec3&)> sol, forcing;
  if (surface == "sphere") {
    const Points centers = random_sphere_centers(opts.center_count, opts.center_seed);
    const SphereProfile prof = opts.sphere_profile;
    sol = [centers, prof](double t, const Vec3& x) { return sphere_solution(t, x, centers, prof); };
    forcing = [centers, prof](double t, const Vec3& x) { return sphere_forcing(t, x, centers, prof); };
  } else if (surface == "torus") {
    sol = torus_solution;
    forcing = torus_forcing;
  } else {
    throw InvalidArgument("no forced-diffusion test problem on surface '" + surface + "'");
  }
  auto at = [&](const std::function<double(double, const Vec3&)>& f) {
    return [&ns, f](double t) { return nodal(ns, [&](const Vec3& x) { return f(t, x); }); };
  };

  DiffusionProblem p{ops.L(), 1.0, at(forcing), at(sol)(0.0)};
  Bdf4Options bo;
  bo.startup = opts.startup;
  bo.exact = at(sol);
  const Trajectory tr = bdf4_run(p, opts.dt, opts.t_end, bo);
  const Vector ref = at(sol)(tr.final_time);
  const Norms e = discrete_norms(tr.final_u - ref, ref, ns.weights);
  return {ns.size(), ns.h, e.l2, e.linf, false, {}};
}

ConvergenceTable run_convergence(const std::string& surface, const Kernel& kernel,
                                 const std::vector<std::size_t>& node_counts, const ConvergenceOptions& opts,
                                 NodeSource source) {
  if (node_counts.size() < 3) throw InvalidArgument("run_convergence: need at least three node counts");
  if (!std::is_sorted(node_counts.begin(), node_counts.end()) ||
      std::adjacent_find(node_counts.begin(), node_counts.end()) != node_counts.end())
    throw InvalidArgument("run_convergence: node counts must be strictly increasing");
  if (!source) {
    auto s = make_surface(surface);
    source = [s, seed = opts.node_seed](std::size_t n) { return generate_nodes(*s, n, seed); };
  }

  ConvergenceTable table;
  for (std::size_t n : node_counts) {
    try {
      SurfaceOperators ops(kernel, source(n));
      table.rows.push_back(convergence_row(ops, surface, opts));
    } catch (const Error& e) {
      ConvergenceRow r;
      r.n = n;
      r.failed = true;
      r.error = e.what();
      table.rows.push_back(r);
    }
  }

  std::vector<std::size_t> ns;
  std::vector<double> l2, linf;
  for (const auto& r : table.rows) {
    if (r.failed) continue;
    ns.push_back(r.n);
    l2.push_back(r.l2);
    linf.push_back(r.linf);
  }
  table.l2_rate = fit_rate(ns, l2);
  table.linf_rate = fit_rate(ns, linf);
  return table;
}

std::vector<std::size_t> default_node_counts(const std::string& surface) {
  if (surface == "sphere") return {256, 576, 1024, 2025};
  if (surface == "torus") return {500, 1000, 2000};
  throw InvalidArgument("no default node counts for surface '" + surface + "'");
}

SpectrumReport stability_scan(const SurfaceOperators& ops, const EigenOptions& opts) {
  SpectrumReport r;
  r.eigenvalues = eigenvalues(ops.L(), opts);
  r.max_real = -std::numeric_limits<double>::infinity();
  for (const auto& z : r.eigenvalues) {
    r.max_real = std::max(r.max_real, z.real());
    r.max_abs = std::max(r.max_abs, std::abs(z));
  }
  r.kernel = ops.kernel().spec();
  r.n = static_cast<std::size_t>(ops.size());
  r.epsilon = ops.kernel().epsilon();
  r.surface = ops.nodes().surface;
  return r;
}

double conjugate_symmetry_defect(const std::vector<std::complex<double>>& eigs) {
  double scale = 0.0;
  for (const auto& z : eigs) scale = std::max(scale, std::abs(z));
  if (scale == 0.0) return 0.0;
  double worst = 0.0;
  for (const auto& z : eigs) {
    const auto c = std::conj(z);
    double best = std::numeric_limits<double>::infinity();
    for (const auto& w : eigs) best = std::min(best, std::abs(w - c));
    worst = std::max(worst, best);
  }
  return worst / scale;
}

}  // namespace rbfsurf
