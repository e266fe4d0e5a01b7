#include "rbfsurf/kernels.hpp"

#include <charconv>
#include <cmath>
#include <limits>
#include <map>
#include <sstream>

#include "rbfsurf/error.hpp"

namespace rbfsurf {

namespace {

double horner(const std::vector<double>& c, double z) {
  double acc = 0.0;
  for (auto it = c.rbegin(); it != c.rend(); ++it) acc = acc * z + *it;
  return acc;
}

// Shortest string that reads back to the same double.
std::string format_number(double v) {
  char buf[32];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

}  // namespace

Kernel::Kernel(KernelFamily family, double nu, double epsilon)
    : family_(family), nu_(nu), epsilon_(epsilon) {
  if (!(epsilon > 0.0) || !std::isfinite(epsilon))
    throw InvalidArgument("kernel shape parameter must be positive, got " +
                          format_number(epsilon));
  if (family_ != KernelFamily::Matern) return;

  // z^{m+1/2} K_{m+1/2}(z) = sqrt(pi/2) e^{-z} sum_k a_k z^{m-k},
  // a_k = (m+k)! / (k! (m-k)!) 2^{-k}. Normalize by the constant term a_m.
  const int m = static_cast<int>(nu) - 2;
  std::vector<double> a(m + 1);
  for (int k = 0; k <= m; ++k) {
    double c = std::ldexp(1.0, -k);
    for (int j = m - k + 1; j <= m + k; ++j) c *= j;
    for (int j = 2; j <= k; ++j) c /= j;
    a[k] = c;
  }
  phi_poly_.assign(m + 1, 0.0);
  for (int j = 0; j <= m; ++j) phi_poly_[j] = a[m - j] / a[m];

  // phi'(r) = eps e^{-z} (P'(z) - P(z)); the constant term of P' - P
  // vanishes identically, so (P' - P) / z is again a polynomial.
  std::vector<double> q(m + 1);
  for (int j = 0; j <= m; ++j) {
    const double next = j < m ? (j + 1) * phi_poly_[j + 1] : 0.0;
    q[j] = next - phi_poly_[j];
  }
  eta_poly_.assign(q.begin() + 1, q.end());
}

Kernel Kernel::matern(double nu, double epsilon) {
  if (!(nu >= 3.0) || std::floor(nu) != nu || nu > 40.0)
    throw InvalidArgument("Matern order nu must be an integer in [3, 40], got " +
                          format_number(nu));
  return Kernel(KernelFamily::Matern, nu, epsilon);
}

Kernel Kernel::imq(double epsilon) { return Kernel(KernelFamily::IMQ, 0.0, epsilon); }

Kernel make_matern(double nu, double epsilon) { return Kernel::matern(nu, epsilon); }
Kernel make_imq(double epsilon) { return Kernel::imq(epsilon); }

double Kernel::smoothness_s() const noexcept {
  if (family_ == KernelFamily::IMQ) return std::numeric_limits<double>::infinity();
  return nu_ - 0.5;
}

int Kernel::continuity() const noexcept {
  if (family_ == KernelFamily::IMQ) return -1;
  return 2 * (static_cast<int>(nu_) - 2);
}

double Kernel::phi(double r) const noexcept {
  const double z = epsilon_ * r;
  if (family_ == KernelFamily::IMQ) return 1.0 / std::sqrt(1.0 + z * z);
  return std::exp(-z) * horner(phi_poly_, z);
}

double Kernel::eta(double r) const noexcept {
  const double z = epsilon_ * r;
  const double e2 = epsilon_ * epsilon_;
  if (family_ == KernelFamily::IMQ) {
    const double s = 1.0 + z * z;
    return -e2 / (s * std::sqrt(s));
  }
  return e2 * std::exp(-z) * horner(eta_poly_, z);
}

std::string Kernel::spec() const {
  if (family_ == KernelFamily::IMQ) return "imq:eps=" + format_number(epsilon_);
  return "matern:nu=" + format_number(nu_) + ",eps=" + format_number(epsilon_);
}

Kernel parse_kernel_spec(std::string_view spec) {
  const auto colon = spec.find(':');
  if (colon == std::string_view::npos)
    throw InvalidArgument("kernel spec '" + std::string(spec) +
                          "' must look like family:key=value[,key=value]");
  const std::string_view family = spec.substr(0, colon);
  std::map<std::string, double, std::less<>> params;
  std::string_view rest = spec.substr(colon + 1);
  while (!rest.empty()) {
    const auto comma = rest.find(',');
    const std::string_view item = rest.substr(0, comma);
    rest = comma == std::string_view::npos ? std::string_view{} : rest.substr(comma + 1);
    const auto eq = item.find('=');
    if (eq == std::string_view::npos || eq == 0)
      throw InvalidArgument("bad kernel parameter '" + std::string(item) + "'");
    const std::string_view key = item.substr(0, eq);
    const std::string_view val = item.substr(eq + 1);
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(val.data(), val.data() + val.size(), v);
    if (ec != std::errc{} || ptr != val.data() + val.size())
      throw InvalidArgument("bad number '" + std::string(val) + "' in kernel spec");
    if (!params.emplace(std::string(key), v).second)
      throw InvalidArgument("duplicate key '" + std::string(key) + "' in kernel spec");
  }

  auto take = [&](std::string_view key) {
    const auto it = params.find(key);
    if (it == params.end())
      throw InvalidArgument("kernel spec '" + std::string(spec) + "' is missing '" +
                            std::string(key) + "'");
    const double v = it->second;
    params.erase(it);
    return v;
  };

  Kernel out = [&] {
    if (family == "imq") return Kernel::imq(take("eps"));
    if (family == "matern") {
      const double nu = take("nu");
      return Kernel::matern(nu, take("eps"));
    }
    throw InvalidArgument("unknown kernel family '" + std::string(family) + "'");
  }();
  if (!params.empty())
    throw InvalidArgument("unknown key '" + params.begin()->first + "' in kernel spec");
  return out;
}

}  // namespace rbfsurf
