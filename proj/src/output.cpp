#include "rbfsurf/output.hpp"

#include <cmath>
#include <fstream>
#include <limits>

#include "rbfsurf/error.hpp"

namespace rbfsurf {

namespace {

std::ofstream open_out(const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw InvalidArgument("cannot open '" + path.string() + "' for writing");
  out.precision(17);
  return out;
}

void check_field(const NodeSet& ns, const Vector& u) {
  if (u.size() != static_cast<Index>(ns.size())) throw InvalidArgument("field length does not match node count");
}

Json number(double x) { return std::isfinite(x) ? Json(x) : Json(nullptr); }

}  // namespace

void write_field_csv(const std::filesystem::path& path, const NodeSet& ns, const Vector& u) {
  check_field(ns, u);
  auto out = open_out(path);
  out << "x,y,z,u\n";
  for (std::size_t i = 0; i < ns.size(); ++i) {
    const Vec3& p = ns.points[i];
    out << p[0] << ',' << p[1] << ',' << p[2] << ',' << u[static_cast<Index>(i)] << '\n';
  }
}

void write_ply(const std::filesystem::path& path, const NodeSet& ns, const Vector& u) {
  check_field(ns, u);
  auto out = open_out(path);
  out << "ply\nformat ascii 1.0\nelement vertex " << ns.size()
      << "\nproperty double x\nproperty double y\nproperty double z\nproperty double u\nend_header\n";
  for (std::size_t i = 0; i < ns.size(); ++i) {
    const Vec3& p = ns.points[i];
    out << p[0] << ' ' << p[1] << ' ' << p[2] << ' ' << u[static_cast<Index>(i)] << '\n';
  }
}

void write_convergence_csv(const std::filesystem::path& path, const ConvergenceTable& t) {
  auto out = open_out(path);
  const double nan = std::numeric_limits<double>::quiet_NaN();
  out << "N,h,l2,linf\n";
  for (const auto& r : t.rows)
    out << r.n << ',' << r.h << ',' << (r.failed ? nan : r.l2) << ',' << (r.failed ? nan : r.linf) << '\n';
}

Json convergence_json(const ConvergenceTable& t) {
  Json rows = Json::array();
  for (const auto& r : t.rows) {
    Json j{{"N", r.n}, {"h", r.h}, {"l2", number(r.failed ? NAN : r.l2)}, {"linf", number(r.failed ? NAN : r.linf)}, {"failed", r.failed}};
    if (r.failed) j["error"] = r.error;
    rows.push_back(std::move(j));
  }
  return {{"rows", rows}, {"l2_rate", number(t.l2_rate)}, {"linf_rate", number(t.linf_rate)}};
}

void write_spectrum_csv(const std::filesystem::path& path, const SpectrumReport& r) {
  auto out = open_out(path);
  out << "re,im\n";
  for (const auto& z : r.eigenvalues) out << z.real() << ',' << z.imag() << '\n';
}

Json spectrum_json(const SpectrumReport& r) {
  return {{"surface", r.surface},
          {"kernel", r.kernel},
          {"epsilon", r.epsilon},
          {"N", r.n},
          {"max_real", r.max_real},
          {"max_abs", r.max_abs},
          {"left_half_plane", r.left_half_plane()},
          {"conjugate_defect", conjugate_symmetry_defect(r.eigenvalues)}};
}

RunRecord::RunRecord(std::string command) : command_(std::move(command)), last_(std::chrono::steady_clock::now()) {}

void RunRecord::add_snapshot(std::size_t step, double t, const std::filesystem::path& p) {
  snapshots_.push_back({{"step", step}, {"t", t}, {"file", p.string()}});
  add_output(p);
}

void RunRecord::mark(const std::string& phase) {
  const auto now = std::chrono::steady_clock::now();
  timings_[phase] = std::chrono::duration<double>(now - last_).count();
  last_ = now;
}

Json RunRecord::to_json() const {
  return {{"command", command_}, {"config", config_},         {"summary", summary_},
          {"timings", timings_}, {"snapshots", snapshots_}, {"diagnostics", diagnostics_},
          {"outputs", outputs_}};
}

void RunRecord::write(const std::filesystem::path& path) {
  add_output(path);
  auto out = open_out(path);
  out << to_json().dump(2) << '\n';
}

}  // namespace rbfsurf
