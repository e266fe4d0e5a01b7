#pragma once

#include <complex>
#include <cstddef>
#include <filesystem>
#include <vector>

#include <Eigen/Core>

namespace rbfsurf {

using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

enum class FactorKind { Cholesky, PartialPivLU };

/// A factored square matrix. Immutable after construction; concurrent solves
/// against one instance are safe.
class Factorization {
 public:
  FactorKind kind() const noexcept { return kind_; }
  Index size() const noexcept { return factors_.rows(); }

  /// Cholesky: lower factor L with A = L L^T (upper part zero).
  /// LU: unit-lower L and U packed in one matrix with P A = L U.
  const Matrix& factors() const noexcept { return factors_; }
  /// Row i of P A is row permutation()[i] of A. Identity for Cholesky.
  const std::vector<Index>& permutation() const noexcept { return perm_; }

  /// A^{-1} B for one or many right-hand sides.
  Matrix solve(const Matrix& b) const;
  Vector solve(const Vector& b) const;
  /// A^{-T} b.
  Vector solve_transposed(const Vector& b) const;
  /// B A^{-1}.
  Matrix solve_right(const Matrix& b) const;

  /// Multiplies the factors back together (permutation undone).
  Matrix reconstruct() const;

 private:
  friend Factorization cholesky(const Matrix& a);
  friend Factorization lu(const Matrix& a);
  Factorization(FactorKind kind, Matrix factors, std::vector<Index> perm)
      : kind_(kind), factors_(std::move(factors)), perm_(std::move(perm)) {}

  FactorKind kind_;
  Matrix factors_;
  std::vector<Index> perm_;
};

/// Blocked right-looking Cholesky. Throws NotPositiveDefinite with the failing
/// pivot index, InvalidArgument if A is not symmetric to 1e-12 ||A||.
Factorization cholesky(const Matrix& a);

/// Blocked LU with partial (row) pivoting. Throws SingularMatrix.
Factorization lu(const Matrix& a);

inline Matrix solve(const Factorization& f, const Matrix& b) { return f.solve(b); }

struct EigenOptions {
  /// Largest accepted dimension.
  Index cap = 2500;
  /// Diagonal similarity scaling before Hessenberg reduction.
  bool balance = true;
};

/// All eigenvalues of a real square matrix (unordered): balancing, Householder
/// reduction to Hessenberg form, then Francis double-shift QR with exceptional
/// shifts. Throws NoConvergence after 60 N sweeps and NumericalError if the
/// eigenvalue sum misses the trace.
std::vector<std::complex<double>> eigenvalues(const Matrix& a, const EigenOptions& opts = {});

/// Estimate of the 2-norm condition number: power iteration on A^T A for the
/// largest singular value and inverse iteration through `f` for the smallest.
double cond2_estimate(const Matrix& a, const Factorization& f);

/// Binary matrix dump: int64 rows, int64 cols, then rows*cols little-endian
/// doubles in row-major order.
void write_dmat(const Matrix& m, const std::filesystem::path& path);
Matrix read_dmat(const std::filesystem::path& path);

}  // namespace rbfsurf
