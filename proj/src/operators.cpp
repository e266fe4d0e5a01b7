#include "rbfsurf/operators.hpp"

#include <Eigen/Dense>

#include "rbfsurf/error.hpp"

namespace rbfsurf {

namespace {

void require_nodes(const NodeSet& ns) {
  if (ns.size() == 0) throw InvalidArgument("node set is empty");
  if (ns.normals.size() != ns.size()) throw InvalidArgument("node set has no normals");
}

}  // namespace

Matrix interpolation_matrix(const Kernel& k, const NodeSet& ns) {
  require_nodes(ns);
  const auto n = static_cast<Index>(ns.size());
  Matrix a(n, n);
#pragma omp parallel for schedule(static)
  for (Index i = 0; i < n; ++i) {
    a(i, i) = k.phi(0.0);
    for (Index j = 0; j < i; ++j) {
      const double v = k.phi((ns.points[static_cast<std::size_t>(i)] - ns.points[static_cast<std::size_t>(j)]).norm());
      a(i, j) = v;
    }
  }
  a.triangularView<Eigen::StrictlyUpper>() = a.transpose();
  return a;
}

Vector build_interpolant(const Factorization& a_factor, const Vector& fx) {
  if (!fx.allFinite()) throw InvalidArgument("build_interpolant: non-finite data");
  return a_factor.solve(fx);
}

Vector build_interpolant(const Kernel& k, const NodeSet& ns, const Vector& fx) {
  if (fx.size() != static_cast<Index>(ns.size())) throw InvalidArgument("build_interpolant: size mismatch");
  return build_interpolant(cholesky(interpolation_matrix(k, ns)), fx);
}

double eval_interpolant(const Kernel& k, const NodeSet& ns, const Vector& c, const Vec3& y) {
  if (c.size() != static_cast<Index>(ns.size())) throw InvalidArgument("eval_interpolant: size mismatch");
  double acc = 0.0;
  for (std::size_t j = 0; j < ns.size(); ++j) acc += c[static_cast<Index>(j)] * k.phi((y - ns.points[j]).norm());
  return acc;
}

std::array<Matrix, 3> build_b_matrices(const Kernel& k, const NodeSet& ns) {
  require_nodes(ns);
  const auto n = static_cast<Index>(ns.size());
  std::array<Matrix, 3> b{Matrix(n, n), Matrix(n, n), Matrix(n, n)};
#pragma omp parallel for schedule(static)
  for (Index i = 0; i < n; ++i) {
    const Vec3& xi = ns.points[static_cast<std::size_t>(i)];
    const Vec3& ni = ns.normals[static_cast<std::size_t>(i)];
    for (Index j = 0; j < n; ++j) {
      const Vec3 d = xi - ns.points[static_cast<std::size_t>(j)];
      const double eta = k.eta(d.norm());
      // (I - n n^T) d
      const Vec3 t = d - ni * ni.dot(d);
      b[0](i, j) = t[0] * eta;
      b[1](i, j) = t[1] * eta;
      b[2](i, j) = t[2] * eta;
    }
  }
  return b;
}

std::array<Matrix, 3> build_gradient_matrices(const Kernel& k, const NodeSet& ns, const Factorization& a_factor) {
  if (a_factor.size() != static_cast<Index>(ns.size()))
    throw InvalidArgument("build_gradient_matrices: factorization size mismatch");
  auto b = build_b_matrices(k, ns);
  for (auto& m : b) m = a_factor.solve_right(m);
  return b;
}

Matrix build_laplacian(const std::array<Matrix, 3>& g) {
  const Index n = g[0].rows();
  Matrix l(n, n);
  l.noalias() = g[0] * g[0];
  l.noalias() += g[1] * g[1];
  l.noalias() += g[2] * g[2];
  return l;
}

SurfaceOperators::SurfaceOperators(Kernel kernel, NodeSet nodes)
    : kernel_(std::move(kernel)),
      nodes_(std::move(nodes)),
      a_(interpolation_matrix(kernel_, nodes_)),
      a_factor_(cholesky(a_)),
      g_(build_gradient_matrices(kernel_, nodes_, a_factor_)),
      l_(build_laplacian(g_)),
      cond_(cond2_estimate(a_, a_factor_)) {}

Matrix SurfaceOperators::stacked_gradient() const {
  const Index n = size();
  Matrix s(3 * n, n);
  for (int c = 0; c < 3; ++c) s.middleRows(c * n, n) = g_[static_cast<std::size_t>(c)];
  return s;
}

Vector apply_divergence(const SurfaceOperators& ops, const Vector& fx, const Vector& fy, const Vector& fz) {
  const Index n = ops.size();
  if (fx.size() != n || fy.size() != n || fz.size() != n)
    throw InvalidArgument("apply_divergence: component size mismatch");
  Vector out = ops.Gx() * fx;
  out.noalias() += ops.Gy() * fy;
  out.noalias() += ops.Gz() * fz;
  return out;
}

double default_imq_epsilon(std::string_view surface) {
  if (surface == "sphere" || surface == "torus") return 2.8;
  if (surface == "rbc") return 4.0;
  if (surface == "cyclide") return 2.0;
  if (surface == "bretzel2") return 6.5;
  throw InvalidArgument("no default shape parameter for surface '" + std::string(surface) + "'");
}

}  // namespace rbfsurf
