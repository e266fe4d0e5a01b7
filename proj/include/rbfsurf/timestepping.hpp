#pragma once

#include <cstddef>
#include <functional>
#include <vector>

#include "rbfsurf/linalg.hpp"

namespace rbfsurf {

/// du/dt = delta L u + f(t).
struct DiffusionProblem {
  Matrix L;
  double delta = 1.0;
  /// Nodal forcing at time t; empty means zero.
  std::function<Vector(double)> forcing;
  Vector u0;
};

enum class Startup { Exact, BdfRamp };

struct Trajectory {
  std::vector<double> times;
  std::vector<Vector> snapshots;
  Vector final_u;
  Vector final_v;  // empty for scalar problems
  double final_time = 0.0;
  std::size_t steps = 0;
  std::size_t factorizations = 0;
  bool stopped_early = false;
};

struct Bdf4Options {
  Startup startup = Startup::BdfRamp;
  /// Analytic nodal solution, required for Startup::Exact.
  std::function<Vector(double)> exact;
  /// Keep u every k steps (plus the final state); 0 keeps none.
  std::size_t snap_every = 0;
};

/// (25/12) u^{n+1} - 4 u^n + 3 u^{n-1} - (4/3) u^{n-2} + (1/4) u^{n-3}
///   = dt (delta L u^{n+1} + f(t^{n+1})),  t^n = n dt.
/// Runs ceil(t_end / dt - 1e-9) steps. (25/12) I - dt delta L is factored once;
/// the ramp uses one BDF1, one BDF2 and one BDF3 step, each factored once.
Trajectory bdf4_run(const DiffusionProblem& p, double dt, double t_end, const Bdf4Options& opts = {});

/// Nodal reaction terms: writes f_u, f_v for given t, u, v.
using ReactionFn = std::function<void(double t, const Vector& u, const Vector& v, Vector& fu, Vector& fv)>;

struct ImexSystem {
  Matrix L;
  double delta_u = 0.0;
  double delta_v = 0.0;
  ReactionFn reaction;
  Vector u0;
  Vector v0;
};

struct SbdfOptions {
  /// Bootstrap runs SBDF1 then SBDF2 before the first step of the target
  /// order. Exact takes the history from `exact_u` / `exact_v`.
  Startup startup = Startup::BdfRamp;
  std::function<Vector(double)> exact_u;
  std::function<Vector(double)> exact_v;
  std::size_t snap_every = 0;
  /// Called after every step with (step, t, u_new, u_old, v_new); returning
  /// false stops the run.
  std::function<bool(std::size_t, double, const Vector&, const Vector&, const Vector&)> observer;
};

/// SBDF1/2/3: diffusion implicit, reaction extrapolated explicitly.
///   SBDF1: u^{n+1} - u^n = dt (dL u^{n+1} + f^n)
///   SBDF2: (3/2, -2, 1/2 | 2, -1)
///   SBDF3: (11/6, -3, 3/2, -1/3 | 3, -3, 1)
/// With zero diffusivity the implicit matrix is a scaled identity and is not
/// factored.
Trajectory sbdf_run(const ImexSystem& s, double dt, std::size_t steps, int order,
                    const SbdfOptions& opts = {});

/// Least-squares slope of log(err) against log(dt); the temporal order.
double fit_order(const std::vector<double>& dts, const std::vector<double>& errs);

}  // namespace rbfsurf
