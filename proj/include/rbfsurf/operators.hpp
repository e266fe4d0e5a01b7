#pragma once

#include <array>
#include <string_view>

#include "rbfsurf/geometry.hpp"
#include "rbfsurf/kernels.hpp"
#include "rbfsurf/linalg.hpp"

namespace rbfsurf {

/// A_ij = phi(|x_i - x_j|).
Matrix interpolation_matrix(const Kernel& k, const NodeSet& ns);

/// Coefficients c with A c = fX.
Vector build_interpolant(const Kernel& k, const NodeSet& ns, const Vector& fx);
Vector build_interpolant(const Factorization& a_factor, const Vector& fx);

/// sum_j c_j phi(|y - x_j|).
double eval_interpolant(const Kernel& k, const NodeSet& ns, const Vector& c, const Vec3& y);

/// Projected kernel gradients at the nodes:
///   (B^x)_ij = [(x_i - x_j) - n^x_i n_i . (x_i - x_j)] eta(|x_i - x_j|)
/// and likewise for y, z. Diagonals are exactly zero.
std::array<Matrix, 3> build_b_matrices(const Kernel& k, const NodeSet& ns);

/// G = B A^{-1} per component, through the Cholesky factor of A.
std::array<Matrix, 3> build_gradient_matrices(const Kernel& k, const NodeSet& ns,
                                              const Factorization& a_factor);

/// L = Gx Gx + Gy Gy + Gz Gz.
Matrix build_laplacian(const std::array<Matrix, 3>& g);

/// Discrete surface operators for one kernel and node set. Immutable after
/// construction.
class SurfaceOperators {
 public:
  SurfaceOperators(Kernel kernel, NodeSet nodes);

  const Kernel& kernel() const noexcept { return kernel_; }
  const NodeSet& nodes() const noexcept { return nodes_; }
  Index size() const noexcept { return a_.rows(); }

  const Matrix& A() const noexcept { return a_; }
  const Factorization& A_factor() const noexcept { return a_factor_; }
  const Matrix& Gx() const noexcept { return g_[0]; }
  const Matrix& Gy() const noexcept { return g_[1]; }
  const Matrix& Gz() const noexcept { return g_[2]; }
  const std::array<Matrix, 3>& G() const noexcept { return g_; }
  const Matrix& L() const noexcept { return l_; }
  /// Stacked 3N x N gradient matrix [Gx; Gy; Gz].
  Matrix stacked_gradient() const;
  double cond_estimate() const noexcept { return cond_; }

 private:
  Kernel kernel_;
  NodeSet nodes_;
  Matrix a_;
  Factorization a_factor_;
  std::array<Matrix, 3> g_;
  Matrix l_;
  double cond_ = 0.0;
};

/// Gx fx + Gy fy + Gz fz.
Vector apply_divergence(const SurfaceOperators& ops, const Vector& fx, const Vector& fy,
                        const Vector& fz);

/// IMQ shape parameters used for each built-in surface (eigenvalue scans and
/// reaction-diffusion runs): sphere 2.8, rbc 4, torus 2.8, cyclide 2,
/// bretzel2 6.5.
double default_imq_epsilon(std::string_view surface);

}  // namespace rbfsurf
