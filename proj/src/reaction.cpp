#include "rbfsurf/reaction.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "rbfsurf/error.hpp"

namespace rbfsurf {

namespace {

struct PresetRow {
  const char* name;
  const char* surface;
  double delta_v;
  bool spots;
};

constexpr PresetRow kPresets[] = {
    {"rbc-spots", "rbc", 4.5e-3, true},
    {"rbc-stripes", "rbc", 2.1e-3, false},
    {"bumpy-spots", "sphere", 4.5e-3, true},
    {"bumpy-stripes", "sphere", 2.1e-3, false},
    {"cyclide-spots", "cyclide", 4.5e-2, true},
    {"cyclide-stripes", "cyclide", 1.89e-2, false},
    {"bretzel2-spots", "bretzel2", 2.1e-3, true},
    {"bretzel2-stripes", "bretzel2", 8.87e-4, false},
};

void check_sizes(const Vector& u, const Vector& v, Vector& fu, Vector& fv) {
  if (u.size() != v.size()) throw InvalidArgument("reaction: u and v lengths differ");
  fu.resize(u.size());
  fv.resize(u.size());
}

}  // namespace

TuringPreset turing_preset(std::string_view name) {
  for (const auto& r : kPresets) {
    if (name != r.name) continue;
    TuringPreset p;
    p.name = r.name;
    p.surface = r.surface;
    p.params.delta_v = r.delta_v;
    p.params.delta_u = 0.516 * r.delta_v;
    p.params.tau1 = r.spots ? 0.02 : 3.5;
    p.params.tau2 = r.spots ? 0.2 : 0.0;
    if (p.surface == "sphere") p.note = "bumpy sphere parameters run on the unit sphere";
    return p;
  }
  throw InvalidArgument("unknown Turing preset '" + std::string(name) + "'");
}

std::vector<std::string> turing_preset_names() {
  std::vector<std::string> out;
  for (const auto& r : kPresets) out.emplace_back(r.name);
  return out;
}

SpiralParams spiral_preset(std::string_view surface) {
  const double k2 = std::pow(2.0 * std::numbers::pi / 50.0, 2);
  SpiralParams p;
  if (surface == "sphere") {
    p.delta_u = 1.5 * k2;
  } else if (surface == "cyclide") {
    p.delta_u = 2.5 * k2;
  } else {
    throw InvalidArgument("no spiral preset for surface '" + std::string(surface) + "'");
  }
  return p;
}

void turing_rhs(const Vector& u, const Vector& v, const TuringParams& p, Vector& fu, Vector& fv) {
  check_sizes(u, v, fu, fv);
  const double c = p.alpha * p.tau1 / p.beta;
#pragma omp parallel for schedule(static)
  for (Index i = 0; i < u.size(); ++i) {
    const double a = u[i], b = v[i];
    fu[i] = p.alpha * a * (1.0 - p.tau1 * b * b) + b * (1.0 - p.tau2 * a);
    fv[i] = p.beta * b * (1.0 + c * a * b) + a * (p.gamma + p.tau2 * b);
  }
}

void spiral_rhs(const Vector& u, const Vector& v, const SpiralParams& p, Vector& fu, Vector& fv) {
  check_sizes(u, v, fu, fv);
#pragma omp parallel for schedule(static)
  for (Index i = 0; i < u.size(); ++i) {
    const double a = u[i], b = v[i];
    fu[i] = a * (1.0 - a) * (a - (b + p.b) / p.a) / p.alpha;
    fv[i] = a - b;
  }
}

Fields turing_initial(const NodeSet& ns, std::uint64_t seed, double strip_halfwidth) {
  if (!(strip_halfwidth > 0.0)) throw InvalidArgument("turing_initial: strip halfwidth must be positive");
  if (ns.size() == 0) throw InvalidArgument("turing_initial: empty node set");
  double zmin = ns.points[0][2], zmax = zmin;
  for (const auto& x : ns.points) {
    zmin = std::min(zmin, x[2]);
    zmax = std::max(zmax, x[2]);
  }
  const double mid = 0.5 * (zmin + zmax), half = strip_halfwidth * (zmax - zmin);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> d(-0.5, 0.5);
  const auto n = static_cast<Index>(ns.size());
  Fields f{Vector::Zero(n), Vector::Zero(n)};
  std::size_t hit = 0;
  for (Index i = 0; i < n; ++i) {
    if (std::abs(ns.points[static_cast<std::size_t>(i)][2] - mid) > half) continue;
    f.u[i] = d(rng);
    f.v[i] = d(rng);
    ++hit;
  }
  if (hit == 0) throw InvalidArgument("turing_initial: no node lies in the initial strip");
  return f;
}

Fields spiral_initial(const NodeSet& ns) {
  const auto n = static_cast<Index>(ns.size());
  Fields f{Vector(n), Vector(n)};
  for (Index i = 0; i < n; ++i) {
    const Vec3& x = ns.points[static_cast<std::size_t>(i)];
    f.u[i] = 0.5 * (1.0 + std::tanh(2.0 * x[0] + x[1]));
    f.v[i] = 0.5 * (1.0 - std::tanh(3.0 * x[2]));
  }
  return f;
}

TuringResult run_turing(const SurfaceOperators& ops, const TuringParams& p, const TuringOptions& opts) {
  return run_turing(ops, p, turing_initial(ops.nodes(), opts.seed, opts.strip_halfwidth), opts);
}

TuringResult run_turing(const SurfaceOperators& ops, const TuringParams& p, const Fields& init,
                        const TuringOptions& opts) {
  if (p.beta == 0.0) throw InvalidArgument("run_turing: beta must be nonzero");
  ImexSystem sys{ops.L(), p.delta_u, p.delta_v,
                 [&p](double, const Vector& u, const Vector& v, Vector& fu, Vector& fv) { turing_rhs(u, v, p, fu, fv); },
                 init.u, init.v};

  TuringResult res;
  res.strip_nodes = static_cast<std::size_t>((init.u.array() != 0.0).count());
  SbdfOptions so;
  so.snap_every = opts.snap_every;
  so.observer = [&](std::size_t k, double, const Vector& un, const Vector& uo, const Vector&) {
    res.last_rate = (un - uo).cwiseAbs().maxCoeff() / opts.dt;
    if (k >= opts.min_steps && res.last_rate < opts.steady_tol) {
      res.steady = true;
      return false;
    }
    return true;
  };
  try {
    res.traj = sbdf_run(sys, opts.dt, opts.max_steps, 3, so);
  } catch (const BlowUp& e) {
    throw BlowUp(e.step(), std::string(e.what()) + " [Turing delta_v=" + std::to_string(p.delta_v) +
                               " tau1=" + std::to_string(p.tau1) + " tau2=" + std::to_string(p.tau2) + "]");
  }

  const Vector& u = res.traj.final_u;
  res.mean_u = u.mean();
  res.std_u = std::sqrt((u.array() - res.mean_u).square().mean());
  for (Index i = 1; i < u.size(); ++i)
    if ((u[i - 1] >= res.mean_u) != (u[i] >= res.mean_u)) ++res.sign_changes;
  return res;
}

SpiralResult run_spiral(const SurfaceOperators& ops, const SpiralParams& p, const SpiralOptions& opts) {
  return run_spiral(ops, p, spiral_initial(ops.nodes()), opts);
}

SpiralResult run_spiral(const SurfaceOperators& ops, const SpiralParams& p, const Fields& init,
                        const SpiralOptions& opts) {
  if (!(p.alpha > 0.0) || p.a == 0.0) throw InvalidArgument("run_spiral: need alpha > 0 and a != 0");
  if (!(opts.t_end > 0.0)) throw InvalidArgument("run_spiral: t_end must be positive");
  const auto n = static_cast<std::size_t>(ops.size());
  const std::size_t probes = std::min(opts.probes, n);
  ImexSystem sys{ops.L(), p.delta_u, p.delta_v,
                 [&p](double, const Vector& u, const Vector& v, Vector& fu, Vector& fv) { spiral_rhs(u, v, p, fu, fv); },
                 init.u, init.v};

  SpiralResult res;
  for (std::size_t k = 0; k < probes; ++k) res.probe_nodes.push_back(k * n / probes);
  res.u_min = init.u.minCoeff();
  res.u_max = init.u.maxCoeff();
  std::vector<double> sum(probes, 0.0), sum2(probes, 0.0);
  std::size_t samples = 0;
  const double t_tail = (1.0 - opts.tail) * opts.t_end;

  SbdfOptions so;
  so.snap_every = opts.snap_every;
  so.observer = [&](std::size_t, double t, const Vector& un, const Vector&, const Vector&) {
    res.u_min = std::min(res.u_min, un.minCoeff());
    res.u_max = std::max(res.u_max, un.maxCoeff());
    if (t >= t_tail - 1e-12) {
      res.tail_u_min = samples ? std::min(res.tail_u_min, un.minCoeff()) : un.minCoeff();
      res.tail_u_max = samples ? std::max(res.tail_u_max, un.maxCoeff()) : un.maxCoeff();
      for (std::size_t k = 0; k < probes; ++k) {
        const double x = un[static_cast<Index>(res.probe_nodes[k])];
        sum[k] += x;
        sum2[k] += x * x;
      }
      ++samples;
    }
    return true;
  };
  const auto steps = static_cast<std::size_t>(std::ceil(opts.t_end / opts.dt - 1e-9));
  res.traj = sbdf_run(sys, opts.dt, steps, 3, so);

  res.probe_variance.assign(probes, 0.0);
  if (samples > 0) {
    const double m = static_cast<double>(samples);
    for (std::size_t k = 0; k < probes; ++k) {
      const double mean = sum[k] / m;
      res.probe_variance[k] = std::max(0.0, sum2[k] / m - mean * mean);
    }
  }
  double acc = 0.0;
  for (double v : res.probe_variance) acc += v;
  res.mean_variance = probes ? acc / static_cast<double>(probes) : 0.0;
  return res;
}

}  // namespace rbfsurf
