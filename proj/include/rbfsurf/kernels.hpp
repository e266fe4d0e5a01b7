#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace rbfsurf {

enum class KernelFamily { Matern, IMQ };

/// Radial kernel phi(r) with shape parameter epsilon.
///
/// Matern kernels are restricted to integer nu >= 3, i.e. Bessel order
/// nu - 3/2 = m + 1/2 with m >= 1, where phi has the closed form
/// exp(-eps r) * P_m(eps r). They are normalized so that phi(0) = 1.
///
/// eta(r) = phi'(r) / r is evaluated from a polynomial quotient, so it is
/// exact at r = 0 without a separate small-r branch.
class Kernel {
 public:
  static Kernel matern(double nu, double epsilon);
  static Kernel imq(double epsilon);

  KernelFamily family() const noexcept { return family_; }
  double epsilon() const noexcept { return epsilon_; }
  /// Matern order; 0 for IMQ.
  double nu() const noexcept { return nu_; }
  /// Sobolev order of the native space restricted to a 2-surface
  /// (nu - 1/2 for Matern, +inf for IMQ).
  double smoothness_s() const noexcept;
  /// k such that phi is C^k on R^3; -1 means C^infinity.
  int continuity() const noexcept;

  double phi(double r) const noexcept;
  double eta(double r) const noexcept;

  /// Canonical spec string, e.g. "matern:nu=4,eps=4" or "imq:eps=2.8".
  std::string spec() const;

 private:
  Kernel(KernelFamily family, double nu, double epsilon);

  KernelFamily family_;
  double nu_;
  double epsilon_;
  // Ascending-power coefficients in z = eps * r (Matern only).
  std::vector<double> phi_poly_;
  std::vector<double> eta_poly_;
};

Kernel make_matern(double nu, double epsilon);
Kernel make_imq(double epsilon);

inline double eval_phi(const Kernel& k, double r) { return k.phi(r); }
inline double eval_eta(const Kernel& k, double r) { return k.eta(r); }

/// Parses "imq:eps=3.0" or "matern:nu=4,eps=4.0".
Kernel parse_kernel_spec(std::string_view spec);

}  // namespace rbfsurf
