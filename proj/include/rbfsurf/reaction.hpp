#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "rbfsurf/geometry.hpp"
#include "rbfsurf/linalg.hpp"
#include "rbfsurf/operators.hpp"
#include "rbfsurf/timestepping.hpp"

namespace rbfsurf {

/// Linearized Brusselator kinetics:
///   f_u = alpha u (1 - tau1 v^2) + v (1 - tau2 u)
///   f_v = beta v (1 + (alpha tau1 / beta) u v) + u (gamma + tau2 v)
struct TuringParams {
  double delta_u = 0.0;
  double delta_v = 0.0;
  double alpha = 0.899;
  double beta = -0.91;
  double gamma = -0.899;
  double tau1 = 0.0;
  double tau2 = 0.0;
};

struct TuringPreset {
  std::string name;
  std::string surface;  // surface the preset was tuned for
  TuringParams params;
  std::string note;     // non-empty when the preset was remapped
};

/// rbc-spots, rbc-stripes, cyclide-spots, cyclide-stripes, bretzel2-spots,
/// bretzel2-stripes; bumpy-spots and bumpy-stripes run on the unit sphere.
TuringPreset turing_preset(std::string_view name);
std::vector<std::string> turing_preset_names();

/// Fitzhugh-Nagumo kinetics:
///   f_u = (1 / alpha) u (1 - u) (u - (v + b) / a),  f_v = u - v.
struct SpiralParams {
  double a = 0.75;
  double b = 0.02;
  double alpha = 0.02;
  double delta_u = 0.0;
  double delta_v = 0.0;

  /// Outside the excitable regime alpha << 1.
  bool weakly_excitable() const { return alpha > 0.1; }
};

/// Default spiral parameters: delta_u = 1.5 (2 pi / 50)^2 on the sphere,
/// 2.5 (2 pi / 50)^2 on the cyclide; delta_v = 0.
SpiralParams spiral_preset(std::string_view surface);

void turing_rhs(const Vector& u, const Vector& v, const TuringParams& p, Vector& fu, Vector& fv);
void spiral_rhs(const Vector& u, const Vector& v, const SpiralParams& p, Vector& fu, Vector& fv);

struct Fields {
  Vector u;
  Vector v;
};

/// Uniform(-0.5, 0.5) values for u and v at nodes with
/// |z - z_mid| <= halfwidth (z_max - z_min); zero elsewhere.
Fields turing_initial(const NodeSet& ns, std::uint64_t seed, double strip_halfwidth = 0.05);

/// u = (1 + tanh(2x + y)) / 2, v = (1 - tanh(3z)) / 2.
Fields spiral_initial(const NodeSet& ns);

struct TuringOptions {
  double dt = 0.01;
  std::size_t max_steps = 100000;
  double steady_tol = 1e-4;
  /// No steady-state exit before this many steps.
  std::size_t min_steps = 0;
  std::uint64_t seed = 1;
  double strip_halfwidth = 0.05;
  std::size_t snap_every = 0;
};

struct TuringResult {
  Trajectory traj;
  bool steady = false;
  double last_rate = 0.0;  // |u^{n+1} - u^n|_inf / dt at the last step
  double std_u = 0.0;
  double mean_u = 0.0;
  std::size_t sign_changes = 0;
  std::size_t strip_nodes = 0;
};

/// SBDF3 with bootstrap until |u^{n+1} - u^n|_inf / dt < steady_tol or
/// max_steps.
TuringResult run_turing(const SurfaceOperators& ops, const TuringParams& p, const TuringOptions& opts = {});
/// Same from given initial fields.
TuringResult run_turing(const SurfaceOperators& ops, const TuringParams& p, const Fields& init,
                        const TuringOptions& opts = {});

struct SpiralOptions {
  double dt = 0.02;
  double t_end = 45.0;
  std::size_t probes = 10;
  /// Temporal variance is taken over the final fraction of the run.
  double tail = 0.25;
  std::size_t snap_every = 0;
};

struct SpiralResult {
  Trajectory traj;
  double u_min = 0.0;
  double u_max = 0.0;
  // Range over the variance window only.
  double tail_u_min = 0.0;
  double tail_u_max = 0.0;
  std::vector<std::size_t> probe_nodes;
  std::vector<double> probe_variance;
  double mean_variance = 0.0;
};

SpiralResult run_spiral(const SurfaceOperators& ops, const SpiralParams& p, const SpiralOptions& opts = {});
SpiralResult run_spiral(const SurfaceOperators& ops, const SpiralParams& p, const Fields& init,
                        const SpiralOptions& opts = {});

}  // namespace rbfsurf
