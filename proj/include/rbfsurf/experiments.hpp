#pragma once

#include <complex>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "rbfsurf/geometry.hpp"
#include "rbfsurf/kernels.hpp"
#include "rbfsurf/linalg.hpp"
#include "rbfsurf/operators.hpp"
#include "rbfsurf/timestepping.hpp"

namespace rbfsurf {

// Sphere test problem: a sum of bumps centered at random points, decaying
// like e^{-5t}.

/// Radial profile g(theta) of each bump.
enum class SphereProfile {
  /// e^{-10 theta}: the stated formula. Has a cusp at each center, so its
  /// Laplacian carries a 1/theta singularity there.
  Exp,
  /// e^{-10 theta^2}: geodesic Gaussian, smooth at the centers.
  Gauss,
};

SphereProfile parse_sphere_profile(std::string_view name);  // "exp" | "gauss"
std::string sphere_profile_name(SphereProfile p);

/// `count` seeded points uniform on the unit sphere.
Points random_sphere_centers(std::size_t count, std::uint64_t seed);

/// e^{-5t} sum_k g(theta_k), theta_k = arccos(xi_k . x).
double sphere_solution(double t, const Vec3& x, const Points& centers, SphereProfile p = SphereProfile::Exp);
/// e^{-5t} sum_k (g'' + cot(theta_k) g'):
///   Exp:   (100 - 10 cot theta) e^{-10 theta}
///   Gauss: (400 theta^2 - 20 - 20 theta cot theta) e^{-10 theta^2}
/// Throws InvalidArgument when x is within 1e-6 (angle) of the antipode of a
/// center, or (Exp only) of a center.
double sphere_laplacian(double t, const Vec3& x, const Points& centers, SphereProfile p = SphereProfile::Exp);
/// -5 u - Laplacian u.
double sphere_forcing(double t, const Vec3& x, const Points& centers, SphereProfile p = SphereProfile::Exp);

// Torus test problem: a degree-10 polynomial with 5-fold symmetry.

/// (1/8) e^{-5t} x (x^4 - 10 x^2 y^2 + 5 y^4)(x^2 + y^2 - 60 z^2).
double torus_solution(double t, const Vec3& x);
/// -(3 / (8 rho^2)) e^{-5t} x (x^4 - 10 x^2 y^2 + 5 y^4)
///   (10248 rho^4 - 34335 rho^3 + 41359 rho^2 - 21320 rho + 4000).
double torus_laplacian(double t, const Vec3& x);
double torus_forcing(double t, const Vec3& x);

struct Norms {
  double l2 = 0.0;
  double linf = 0.0;
};

/// Relative weighted l2 and relative max norm of err against ref. Empty
/// weights mean uniform. Throws InvalidArgument if ref is zero.
Norms discrete_norms(const Vector& err, const Vector& ref, const std::vector<double>& w = {});

/// Analytic fields with known surface Laplacians.
enum class TestField {
  SphereZ,          // z on the unit sphere; Laplacian -2z
  SphereGaussians,  // sphere_solution at t = 0 (Exp profile)
  SphereSmooth,     // sphere_solution at t = 0 (Gauss profile)
  TorusPolynomial,  // torus_solution at t = 0
};

TestField parse_test_field(std::string_view name);
std::string test_field_name(TestField f);

/// Nodal samples of the field and of its Laplacian.
Vector field_values(TestField f, const NodeSet& ns, const Points& centers = {});
Vector field_laplacian(TestField f, const NodeSet& ns, const Points& centers = {});

/// Relative norms of L u - Laplacian(u) at the nodes.
Norms laplacian_error(const SurfaceOperators& ops, TestField f, const Points& centers = {});

struct ConvergenceRow {
  std::size_t n = 0;
  double h = 0.0;
  double l2 = 0.0;
  double linf = 0.0;
  bool failed = false;
  std::string error;
};

struct ConvergenceTable {
  std::vector<ConvergenceRow> rows;
  /// Decay rates -d log(err) / d log(sqrt N), least squares over the last
  /// min(4, all) successful rows. NaN with fewer than two such rows.
  double l2_rate = 0.0;
  double linf_rate = 0.0;

  bool all_ok() const;
};

/// Rate of decay of errs against sqrt(ns) fitted over the last min(4, all)
/// entries.
double fit_rate(const std::vector<std::size_t>& ns, const std::vector<double>& errs);

struct ConvergenceOptions {
  double dt = 1e-3;
  double t_end = 0.2;
  std::size_t center_count = 23;
  std::uint64_t center_seed = 2024;
  std::uint64_t node_seed = 1;
  Startup startup = Startup::Exact;
  SphereProfile sphere_profile = SphereProfile::Exp;
};

/// Forced-diffusion problem ("sphere" or "torus") solved with BDF4 on the
/// given operators; relative error at t_end against the analytic solution.
ConvergenceRow convergence_row(const SurfaceOperators& ops, const std::string& surface,
                               const ConvergenceOptions& opts = {});

/// Supplies the node set for each N. The default generates Riesz nodes with
/// opts.node_seed.
using NodeSource = std::function<NodeSet(std::size_t)>;

/// One row per node count; a row that throws is marked failed.
ConvergenceTable run_convergence(const std::string& surface, const Kernel& kernel,
                                 const std::vector<std::size_t>& node_counts,
                                 const ConvergenceOptions& opts = {}, NodeSource source = {});

/// Sphere {256, 576, 1024, 2025}; torus {500, 1000, 2000}.
std::vector<std::size_t> default_node_counts(const std::string& surface);

struct SpectrumReport {
  std::vector<std::complex<double>> eigenvalues;
  double max_real = 0.0;
  double max_abs = 0.0;
  std::string kernel;
  std::size_t n = 0;
  double epsilon = 0.0;
  std::string surface;

  /// max Re <= tol * max |lambda|.
  bool left_half_plane(double tol = 1e-6) const { return max_real <= tol * max_abs; }
};

SpectrumReport stability_scan(const SurfaceOperators& ops, const EigenOptions& opts = {});

/// Largest distance from an eigenvalue's conjugate to its nearest partner in
/// the list, relative to max |lambda|.
double conjugate_symmetry_defect(const std::vector<std::complex<double>>& eigs);

}  // namespace rbfsurf
