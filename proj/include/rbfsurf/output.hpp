#pragma once

#include <chrono>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "rbfsurf/experiments.hpp"
#include "rbfsurf/geometry.hpp"
#include "rbfsurf/linalg.hpp"

namespace rbfsurf {

using Json = nlohmann::ordered_json;

/// Node positions and one scalar field: x,y,z,u.
void write_field_csv(const std::filesystem::path& path, const NodeSet& ns, const Vector& u);

/// ASCII PLY point cloud with per-vertex property `u`.
void write_ply(const std::filesystem::path& path, const NodeSet& ns, const Vector& u);

/// N,h,l2,linf (failed rows carry NaN errors).
void write_convergence_csv(const std::filesystem::path& path, const ConvergenceTable& t);
Json convergence_json(const ConvergenceTable& t);

/// re,im per eigenvalue.
void write_spectrum_csv(const std::filesystem::path& path, const SpectrumReport& r);
Json spectrum_json(const SpectrumReport& r);

/// Manifest of one CLI run: configuration echo, diagnostics, timings and
/// the list of files written.
class RunRecord {
 public:
  explicit RunRecord(std::string command);

  Json& config() { return config_; }
  Json& summary() { return summary_; }
  /// Appends one per-step (or per-row) diagnostic object.
  void add_diagnostic(Json d) { diagnostics_.push_back(std::move(d)); }
  void add_output(const std::filesystem::path& p) { outputs_.push_back(p.string()); }
  void add_snapshot(std::size_t step, double t, const std::filesystem::path& p);
  /// Records the seconds since the previous mark (or construction).
  void mark(const std::string& phase);

  Json to_json() const;
  /// Writes the manifest and lists it in itself.
  void write(const std::filesystem::path& path);

 private:
  std::string command_;
  Json config_ = Json::object();
  Json summary_ = Json::object();
  Json diagnostics_ = Json::array();
  Json snapshots_ = Json::array();
  Json timings_ = Json::object();
  std::vector<std::string> outputs_;
  std::chrono::steady_clock::time_point last_;
};

}  // namespace rbfsurf
