#include "rbfsurf/linalg.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <limits>
#include <numeric>

#include <Eigen/Dense>

#include "rbfsurf/error.hpp"

namespace rbfsurf {

namespace {

constexpr Index kBlock = 64;
constexpr double kEps = std::numeric_limits<double>::epsilon();

void require_square(const Matrix& a, const char* what) {
  if (a.rows() != a.cols() || a.rows() == 0)
    throw InvalidArgument(std::string(what) + ": matrix must be square and non-empty");
  if (!a.allFinite()) throw InvalidArgument(std::string(what) + ": non-finite entries");
}

}  // namespace

Factorization cholesky(const Matrix& a) {
  require_square(a, "cholesky");
  const Index n = a.rows();
  const double scale = a.cwiseAbs().maxCoeff();
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < i; ++j)
      if (std::abs(a(i, j) - a(j, i)) > 1e-12 * scale)
        throw InvalidArgument("cholesky: matrix is not symmetric");

  Matrix l = a;
  for (Index k = 0; k < n; k += kBlock) {
    const Index b = std::min(kBlock, n - k);
    auto d = l.block(k, k, b, b);
    for (Index j = 0; j < b; ++j) {
      const double piv = d(j, j) - d.row(j).head(j).squaredNorm();
      if (!(piv > 0.0) || !std::isfinite(piv)) throw NotPositiveDefinite(static_cast<std::size_t>(k + j));
      const double ljj = std::sqrt(piv);
      d(j, j) = ljj;
      for (Index i = j + 1; i < b; ++i)
        d(i, j) = (d(i, j) - d.row(i).head(j).dot(d.row(j).head(j))) / ljj;
    }
    const Index rest = n - k - b;
    if (rest == 0) continue;
    auto panel = l.block(k + b, k, rest, b);
    d.triangularView<Eigen::Lower>().transpose().solveInPlace<Eigen::OnTheRight>(panel);
    l.block(k + b, k + b, rest, rest).selfadjointView<Eigen::Lower>().rankUpdate(panel, -1.0);
  }
  l.triangularView<Eigen::StrictlyUpper>().setZero();

  std::vector<Index> perm(static_cast<std::size_t>(n));
  std::iota(perm.begin(), perm.end(), Index{0});
  return Factorization(FactorKind::Cholesky, std::move(l), std::move(perm));
}

Factorization lu(const Matrix& a) {
  require_square(a, "lu");
  const Index n = a.rows();
  const double tol = static_cast<double>(std::max<Index>(n, 16)) * kEps * a.cwiseAbs().maxCoeff();

  Matrix m = a;
  std::vector<Index> perm(static_cast<std::size_t>(n));
  std::iota(perm.begin(), perm.end(), Index{0});

  for (Index k = 0; k < n; k += kBlock) {
    const Index b = std::min(kBlock, n - k);
    for (Index j = k; j < k + b; ++j) {
      Index p = 0;
      const double pivmag = m.col(j).segment(j, n - j).cwiseAbs().maxCoeff(&p);
      p += j;
      if (!(pivmag > tol)) throw SingularMatrix(static_cast<std::size_t>(j));
      if (p != j) {
        m.row(p).swap(m.row(j));
        std::swap(perm[static_cast<std::size_t>(p)], perm[static_cast<std::size_t>(j)]);
      }
      const Index below = n - j - 1;
      if (below == 0) continue;
      m.col(j).segment(j + 1, below) /= m(j, j);
      const Index right = k + b - j - 1;
      if (right > 0)
        m.block(j + 1, j + 1, below, right).noalias() -=
            m.col(j).segment(j + 1, below) * m.row(j).segment(j + 1, right);
    }
    const Index rest = n - k - b;
    if (rest == 0) continue;
    m.block(k, k, b, b).triangularView<Eigen::UnitLower>().solveInPlace(m.block(k, k + b, b, rest));
    m.block(k + b, k + b, rest, rest).noalias() -= m.block(k + b, k, rest, b) * m.block(k, k + b, b, rest);
  }
  return Factorization(FactorKind::PartialPivLU, std::move(m), std::move(perm));
}

Matrix Factorization::solve(const Matrix& b) const {
  if (b.rows() != size()) throw InvalidArgument("solve: right-hand side has wrong row count");
  if (kind_ == FactorKind::Cholesky) {
    Matrix x = b;
    factors_.triangularView<Eigen::Lower>().solveInPlace(x);
    factors_.triangularView<Eigen::Lower>().transpose().solveInPlace(x);
    return x;
  }
  Matrix x(b.rows(), b.cols());
  for (Index i = 0; i < size(); ++i) x.row(i) = b.row(perm_[static_cast<std::size_t>(i)]);
  factors_.triangularView<Eigen::UnitLower>().solveInPlace(x);
  factors_.triangularView<Eigen::Upper>().solveInPlace(x);
  return x;
}

Vector Factorization::solve(const Vector& b) const {
  if (b.size() != size()) throw InvalidArgument("solve: right-hand side has wrong length");
  if (kind_ == FactorKind::Cholesky) {
    Vector x = b;
    factors_.triangularView<Eigen::Lower>().solveInPlace(x);
    factors_.triangularView<Eigen::Lower>().transpose().solveInPlace(x);
    return x;
  }
  Vector x(b.size());
  for (Index i = 0; i < size(); ++i) x[i] = b[perm_[static_cast<std::size_t>(i)]];
  factors_.triangularView<Eigen::UnitLower>().solveInPlace(x);
  factors_.triangularView<Eigen::Upper>().solveInPlace(x);
  return x;
}

Vector Factorization::solve_transposed(const Vector& b) const {
  if (b.size() != size()) throw InvalidArgument("solve: right-hand side has wrong length");
  if (kind_ == FactorKind::Cholesky) return solve(b);
  // A^T = U^T L^T P
  Vector w = b;
  factors_.triangularView<Eigen::Upper>().transpose().solveInPlace(w);
  factors_.triangularView<Eigen::UnitLower>().transpose().solveInPlace(w);
  Vector x(b.size());
  for (Index i = 0; i < size(); ++i) x[perm_[static_cast<std::size_t>(i)]] = w[i];
  return x;
}

Matrix Factorization::solve_right(const Matrix& b) const {
  if (b.cols() != size()) throw InvalidArgument("solve_right: left operand has wrong column count");
  Matrix x = b;
  if (kind_ == FactorKind::Cholesky) {
    // X L L^T = B
    factors_.triangularView<Eigen::Lower>().transpose().solveInPlace<Eigen::OnTheRight>(x);
    factors_.triangularView<Eigen::Lower>().solveInPlace<Eigen::OnTheRight>(x);
    return x;
  }
  // X P^T L U = B
  factors_.triangularView<Eigen::Upper>().solveInPlace<Eigen::OnTheRight>(x);
  factors_.triangularView<Eigen::UnitLower>().solveInPlace<Eigen::OnTheRight>(x);
  Matrix out(x.rows(), x.cols());
  for (Index i = 0; i < size(); ++i) out.col(perm_[static_cast<std::size_t>(i)]) = x.col(i);
  return out;
}

Matrix Factorization::reconstruct() const {
  if (kind_ == FactorKind::Cholesky) {
    Matrix l = factors_.triangularView<Eigen::Lower>();
    return l * l.transpose();
  }
  Matrix l = factors_.triangularView<Eigen::UnitLower>();
  Matrix u = factors_.triangularView<Eigen::Upper>();
  const Matrix pa = l * u;
  Matrix a(pa.rows(), pa.cols());
  for (Index i = 0; i < size(); ++i) a.row(perm_[static_cast<std::size_t>(i)]) = pa.row(i);
  return a;
}

namespace {

void balance(Matrix& a) {
  constexpr double radix = 2.0;
  constexpr double sqrdx = radix * radix;
  const Index n = a.rows();
  bool done = false;
  while (!done) {
    done = true;
    for (Index i = 0; i < n; ++i) {
      double r = 0.0;
      double c = 0.0;
      for (Index j = 0; j < n; ++j) {
        if (j == i) continue;
        c += std::abs(a(j, i));
        r += std::abs(a(i, j));
      }
      if (c == 0.0 || r == 0.0) continue;
      double g = r / radix;
      double f = 1.0;
      const double s = c + r;
      while (c < g) {
        f *= radix;
        c *= sqrdx;
      }
      g = r * radix;
      while (c > g) {
        f /= radix;
        c /= sqrdx;
      }
      if ((c + r) / f < 0.95 * s) {
        done = false;
        a.row(i) /= f;
        a.col(i) *= f;
      }
    }
  }
}

void reduce_to_hessenberg(Matrix& a) {
  const Index n = a.rows();
  Vector v(n);
  Eigen::RowVectorXd w(n);
  for (Index k = 0; k + 2 < n; ++k) {
    const Index m = n - k - 1;
    auto x = a.col(k).segment(k + 1, m);
    const double alpha = x.norm();
    if (alpha == 0.0) continue;
    auto vk = v.head(m);
    vk = x;
    vk[0] += std::copysign(alpha, x[0]);
    const double vnorm2 = vk.squaredNorm();
    if (vnorm2 == 0.0) continue;
    const double beta = 2.0 / vnorm2;
    // H <- (I - beta v v^T) H (I - beta v v^T) on the trailing rows/cols
    auto rows = a.block(k + 1, k, m, n - k);
    w.head(n - k).noalias() = vk.transpose() * rows;
    rows.noalias() -= (beta * vk) * w.head(n - k);
    auto cols = a.block(0, k + 1, n, m);
    Vector y = cols * vk;
    cols.noalias() -= (beta * y) * vk.transpose();
    a.col(k).segment(k + 2, m - 1).setZero();
  }
}

// Francis double-shift QR on an upper Hessenberg matrix, eigenvalues only.
std::vector<std::complex<double>> hessenberg_qr(Matrix& a) {
  const Index n = a.rows();
  std::vector<std::complex<double>> out(static_cast<std::size_t>(n));
  double anorm = 0.0;
  for (Index i = 0; i < n; ++i)
    for (Index j = std::max<Index>(i - 1, 0); j < n; ++j) anorm += std::abs(a(i, j));

  const long long max_sweeps = 60LL * static_cast<long long>(n);
  long long sweeps = 0;
  Index nn = n - 1;
  Index l = 0;
  double t = 0.0;
  double p = 0.0, q = 0.0, r = 0.0, s = 0.0, w = 0.0, x = 0.0, y = 0.0, z = 0.0;
  while (nn >= 0) {
    int its = 0;
    do {
      for (l = nn; l >= 1; --l) {
        s = std::abs(a(l - 1, l - 1)) + std::abs(a(l, l));
        if (s == 0.0) s = anorm;
        if (std::abs(a(l, l - 1)) <= kEps * s) {
          a(l, l - 1) = 0.0;
          break;
        }
      }
      x = a(nn, nn);
      if (l == nn) {
        out[static_cast<std::size_t>(nn)] = {x + t, 0.0};
        --nn;
      } else {
        y = a(nn - 1, nn - 1);
        w = a(nn, nn - 1) * a(nn - 1, nn);
        if (l == nn - 1) {
          p = 0.5 * (y - x);
          q = p * p + w;
          z = std::sqrt(std::abs(q));
          x += t;
          if (q >= 0.0) {
            z = p + std::copysign(z, p);
            const double e1 = x + z;
            const double e2 = z != 0.0 ? x - w / z : e1;
            out[static_cast<std::size_t>(nn - 1)] = {e1, 0.0};
            out[static_cast<std::size_t>(nn)] = {e2, 0.0};
          } else {
            out[static_cast<std::size_t>(nn - 1)] = {x + p, z};
            out[static_cast<std::size_t>(nn)] = {x + p, -z};
          }
          nn -= 2;
        } else {
          if (++sweeps > max_sweeps)
            throw NoConvergence("eigenvalues: QR iteration did not converge after " +
                                std::to_string(max_sweeps) + " sweeps");
          if (its > 0 && its % 10 == 0) {
            // exceptional shift
            t += x;
            for (Index i = 0; i <= nn; ++i) a(i, i) -= x;
            s = std::abs(a(nn, nn - 1)) + std::abs(a(nn - 1, nn - 2));
            y = x = 0.75 * s;
            w = -0.4375 * s * s;
          }
          ++its;
          Index m = nn - 2;
          for (; m >= l; --m) {
            z = a(m, m);
            r = x - z;
            s = y - z;
            p = (r * s - w) / a(m + 1, m) + a(m, m + 1);
            q = a(m + 1, m + 1) - z - r - s;
            r = a(m + 2, m + 1);
            s = std::abs(p) + std::abs(q) + std::abs(r);
            p /= s;
            q /= s;
            r /= s;
            if (m == l) break;
            const double u = std::abs(a(m, m - 1)) * (std::abs(q) + std::abs(r));
            const double v = std::abs(p) * (std::abs(a(m - 1, m - 1)) + std::abs(z) + std::abs(a(m + 1, m + 1)));
            if (u <= kEps * v) break;
          }
          for (Index i = m + 2; i <= nn; ++i) {
            a(i, i - 2) = 0.0;
            if (i != m + 2) a(i, i - 3) = 0.0;
          }
          for (Index k = m; k <= nn - 1; ++k) {
            if (k != m) {
              p = a(k, k - 1);
              q = a(k + 1, k - 1);
              r = 0.0;
              if (k != nn - 1) r = a(k + 2, k - 1);
              x = std::abs(p) + std::abs(q) + std::abs(r);
              if (x != 0.0) {
                p /= x;
                q /= x;
                r /= x;
              }
            }
            s = std::copysign(std::sqrt(p * p + q * q + r * r), p);
            if (s == 0.0) continue;
            if (k == m) {
              if (l != m) a(k, k - 1) = -a(k, k - 1);
            } else {
              a(k, k - 1) = -s * x;
            }
            p += s;
            x = p / s;
            y = q / s;
            z = r / s;
            q /= p;
            r /= p;
            for (Index j = k; j <= nn; ++j) {
              p = a(k, j) + q * a(k + 1, j);
              if (k != nn - 1) {
                p += r * a(k + 2, j);
                a(k + 2, j) -= p * z;
              }
              a(k + 1, j) -= p * y;
              a(k, j) -= p * x;
            }
            const Index mmin = nn < k + 3 ? nn : k + 3;
            for (Index i = l; i <= mmin; ++i) {
              p = x * a(i, k) + y * a(i, k + 1);
              if (k != nn - 1) {
                p += z * a(i, k + 2);
                a(i, k + 2) -= p * r;
              }
              a(i, k + 1) -= p * q;
              a(i, k) -= p;
            }
          }
        }
      }
    } while (l < nn - 1);
  }
  return out;
}

}  // namespace

std::vector<std::complex<double>> eigenvalues(const Matrix& a, const EigenOptions& opts) {
  require_square(a, "eigenvalues");
  if (a.rows() > opts.cap)
    throw InvalidArgument("eigenvalues: dimension " + std::to_string(a.rows()) +
                          " exceeds the cap of " + std::to_string(opts.cap));
  Matrix h = a;
  if (opts.balance) balance(h);
  reduce_to_hessenberg(h);
  auto eig = hessenberg_qr(h);

  const double trace = a.trace();
  std::complex<double> sum = 0.0;
  double mag = 0.0;
  for (const auto& e : eig) {
    sum += e;
    mag += std::abs(e);
  }
  const double scale = std::max({std::abs(trace), mag, kEps});
  if (std::abs(sum.real() - trace) > 1e-8 * scale || std::abs(sum.imag()) > 1e-8 * scale)
    throw NumericalError("eigenvalues: eigenvalue sum does not match the trace");
  return eig;
}

double cond2_estimate(const Matrix& a, const Factorization& f) {
  const Index n = a.rows();
  if (f.size() != n) throw InvalidArgument("cond2_estimate: factorization size mismatch");
  constexpr int kMaxIter = 60;
  constexpr double kRelTol = 1e-6;

  Vector v = Vector::Ones(n).normalized();
  double big = 0.0;
  for (int it = 0; it < kMaxIter; ++it) {
    Vector w = a.transpose() * (a * v);
    const double lam = w.norm();
    if (lam == 0.0) return std::numeric_limits<double>::infinity();
    v = w / lam;
    const bool done = std::abs(lam - big) <= kRelTol * lam;
    big = lam;
    if (done) break;
  }

  // Alternating start so the smallest singular direction is not orthogonal
  // to it for symmetric node layouts.
  Vector u(n);
  for (Index i = 0; i < n; ++i) u[i] = (i % 2 == 0 ? 1.0 : -1.0) * (1.0 + 0.01 * static_cast<double>(i % 7));
  u.normalize();
  double inv = 0.0;
  for (int it = 0; it < kMaxIter; ++it) {
    Vector w = f.solve(f.solve_transposed(u));
    const double lam = w.norm();
    if (!std::isfinite(lam)) return std::numeric_limits<double>::infinity();
    u = w / lam;
    const bool done = std::abs(lam - inv) <= kRelTol * lam;
    inv = lam;
    if (done) break;
  }
  const double c = std::sqrt(big * inv);
  return std::isfinite(c) ? c : std::numeric_limits<double>::infinity();
}

namespace {

template <typename T>
T to_little(T v) {
  if constexpr (std::endian::native == std::endian::little) {
    return v;
  } else {
    auto bytes = std::bit_cast<std::array<unsigned char, sizeof(T)>>(v);
    std::reverse(bytes.begin(), bytes.end());
    return std::bit_cast<T>(bytes);
  }
}

}  // namespace

void write_dmat(const Matrix& m, const std::filesystem::path& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw InvalidArgument("cannot open '" + path.string() + "' for writing");
  const std::int64_t dims[2] = {to_little<std::int64_t>(m.rows()), to_little<std::int64_t>(m.cols())};
  os.write(reinterpret_cast<const char*>(dims), sizeof(dims));
  for (Index i = 0; i < m.rows(); ++i)
    for (Index j = 0; j < m.cols(); ++j) {
      const double v = to_little(m(i, j));
      os.write(reinterpret_cast<const char*>(&v), sizeof(v));
    }
  if (!os) throw Error("write failed for '" + path.string() + "'");
}

Matrix read_dmat(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw InvalidArgument("cannot open '" + path.string() + "'");
  std::int64_t dims[2] = {0, 0};
  is.read(reinterpret_cast<char*>(dims), sizeof(dims));
  const std::int64_t rows = to_little(dims[0]);
  const std::int64_t cols = to_little(dims[1]);
  if (!is || rows < 1 || cols < 1 || rows > (1LL << 20) || cols > (1LL << 20))
    throw InvalidArgument("'" + path.string() + "' is not a valid .dmat file");
  Matrix m(rows, cols);
  for (Index i = 0; i < rows; ++i)
    for (Index j = 0; j < cols; ++j) {
      double v = 0.0;
      is.read(reinterpret_cast<char*>(&v), sizeof(v));
      m(i, j) = to_little(v);
    }
  if (!is) throw InvalidArgument("'" + path.string() + "' is truncated");
  return m;
}

}  // namespace rbfsurf
