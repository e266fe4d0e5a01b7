#include "rbfsurf/timestepping.hpp"

#include <cmath>
#include <deque>

#include "rbfsurf/error.hpp"

namespace rbfsurf {

namespace {

struct Scheme {
  double a0;
  std::vector<double> a;  // history coefficients, newest first
  std::vector<double> b;  // extrapolation weights for explicit terms
};

const Scheme& bdf(int order) {
  static const Scheme s[4] = {
      {1.0, {-1.0}, {1.0}},
      {1.5, {-2.0, 0.5}, {2.0, -1.0}},
      {11.0 / 6.0, {-3.0, 1.5, -1.0 / 3.0}, {3.0, -3.0, 1.0}},
      {25.0 / 12.0, {-4.0, 3.0, -4.0 / 3.0, 0.25}, {}},
  };
  return s[order - 1];
}

// Factors a0 I - dt delta L at most once per (a0, delta) pair.
class ImplicitSolver {
 public:
  ImplicitSolver(const Matrix& l, double dt) : l_(l), dt_(dt) {}

  Vector solve(double a0, double delta, const Vector& rhs) {
    if (delta == 0.0) return rhs / a0;
    for (auto& e : cache_)
      if (e.a0 == a0 && e.delta == delta) return e.f.solve(rhs);
    Matrix m = -(dt_ * delta) * l_;
    m.diagonal().array() += a0;
    cache_.push_back({a0, delta, lu(m)});
    ++count_;
    return cache_.back().f.solve(rhs);
  }

  std::size_t count() const noexcept { return count_; }

 private:
  struct Entry {
    double a0;
    double delta;
    Factorization f;
  };
  const Matrix& l_;
  double dt_;
  std::vector<Entry> cache_;
  std::size_t count_ = 0;
};

void guard(const Vector& u, std::size_t step, const char* name) {
  if (!u.allFinite()) throw BlowUp(step, std::string(name) + " is not finite");
  const double m = u.size() ? u.cwiseAbs().maxCoeff() : 0.0;
  if (m > 1e12) throw BlowUp(step, std::string(name) + " exceeds 1e12 (max |" + name + "| = " + std::to_string(m) + ")");
}

void check_square(const Matrix& l, const Vector& u0) {
  if (l.rows() != l.cols()) throw InvalidArgument("operator matrix is not square");
  if (u0.size() != l.rows()) throw InvalidArgument("initial data length does not match operator");
}

}  // namespace

Trajectory bdf4_run(const DiffusionProblem& p, double dt, double t_end, const Bdf4Options& opts) {
  if (!(dt > 0.0)) throw InvalidArgument("bdf4_run: dt must be positive");
  if (!(t_end >= 0.0)) throw InvalidArgument("bdf4_run: t_end must be nonnegative");
  if (p.delta < 0.0) throw InvalidArgument("bdf4_run: delta must be nonnegative");
  check_square(p.L, p.u0);
  if (opts.startup == Startup::Exact && !opts.exact)
    throw InvalidArgument("bdf4_run: exact startup needs the analytic solution");

  const auto steps = static_cast<std::size_t>(std::ceil(t_end / dt - 1e-9));
  const Index n = p.u0.size();
  ImplicitSolver solver(p.L, dt);
  Trajectory tr;

  std::deque<Vector> hist{p.u0};  // newest first
  auto record = [&](std::size_t k, const Vector& u) {
    if (opts.snap_every && (k % opts.snap_every == 0 || k == steps)) {
      tr.times.push_back(static_cast<double>(k) * dt);
      tr.snapshots.push_back(u);
    }
  };

  for (std::size_t k = 1; k <= steps; ++k) {
    const double t = static_cast<double>(k) * dt;
    Vector u;
    if (opts.startup == Startup::Exact && k <= 3) {
      u = opts.exact(t);
      if (u.size() != n) throw InvalidArgument("bdf4_run: exact solution has wrong length");
    } else {
      const int order = static_cast<int>(std::min<std::size_t>(k, 4));
      const Scheme& s = bdf(order);
      Vector rhs = Vector::Zero(n);
      for (std::size_t j = 0; j < s.a.size(); ++j) rhs -= s.a[j] * hist[j];
      if (p.forcing) {
        Vector f = p.forcing(t);
        if (f.size() != n) throw InvalidArgument("bdf4_run: forcing has wrong length");
        rhs += dt * f;
      }
      u = solver.solve(s.a0, p.delta, rhs);
    }
    guard(u, k, "u");
    hist.push_front(u);
    if (hist.size() > 4) hist.pop_back();
    record(k, hist.front());
  }

  tr.final_u = hist.front();
  tr.final_time = static_cast<double>(steps) * dt;
  tr.steps = steps;
  tr.factorizations = solver.count();
  return tr;
}

Trajectory sbdf_run(const ImexSystem& s, double dt, std::size_t steps, int order, const SbdfOptions& opts) {
  if (!(dt > 0.0)) throw InvalidArgument("sbdf_run: dt must be positive");
  if (order < 1 || order > 3) throw InvalidArgument("sbdf_run: order must be 1, 2 or 3");
  if (s.delta_u < 0.0 || s.delta_v < 0.0) throw InvalidArgument("sbdf_run: diffusivities must be nonnegative");
  check_square(s.L, s.u0);
  if (s.v0.size() != s.u0.size()) throw InvalidArgument("sbdf_run: u0 and v0 lengths differ");
  if (!s.reaction) throw InvalidArgument("sbdf_run: reaction function missing");
  const bool exact = opts.startup == Startup::Exact;
  if (exact && (!opts.exact_u || !opts.exact_v))
    throw InvalidArgument("sbdf_run: exact startup needs analytic u and v");

  const Index n = s.u0.size();
  ImplicitSolver solver(s.L, dt);
  Trajectory tr;

  std::deque<Vector> uh{s.u0}, vh{s.v0}, fuh, fvh;
  auto eval = [&](double t, const Vector& u, const Vector& v) {
    Vector fu(n), fv(n);
    s.reaction(t, u, v, fu, fv);
    fuh.push_front(std::move(fu));
    fvh.push_front(std::move(fv));
    if (fuh.size() > 3) {
      fuh.pop_back();
      fvh.pop_back();
    }
  };
  eval(0.0, s.u0, s.v0);

  std::size_t k = 1;
  if (exact) {
    // History u^1 .. u^{order-1} from the analytic solution.
    for (; k < static_cast<std::size_t>(order) && k <= steps; ++k) {
      const double t = static_cast<double>(k) * dt;
      uh.push_front(opts.exact_u(t));
      vh.push_front(opts.exact_v(t));
      eval(t, uh.front(), vh.front());
      if (opts.snap_every && (k % opts.snap_every == 0 || k == steps)) {
        tr.times.push_back(t);
        tr.snapshots.push_back(uh.front());
      }
    }
  }

  for (; k <= steps; ++k) {
    const double t = static_cast<double>(k) * dt;
    const int ord = std::min(order, static_cast<int>(k));
    const Scheme& sc = bdf(ord);
    Vector ru = Vector::Zero(n), rv = Vector::Zero(n);
    for (std::size_t j = 0; j < sc.a.size(); ++j) {
      ru -= sc.a[j] * uh[j];
      rv -= sc.a[j] * vh[j];
    }
    for (std::size_t j = 0; j < sc.b.size(); ++j) {
      ru += (dt * sc.b[j]) * fuh[j];
      rv += (dt * sc.b[j]) * fvh[j];
    }
    Vector u = solver.solve(sc.a0, s.delta_u, ru);
    Vector v = solver.solve(sc.a0, s.delta_v, rv);
    guard(u, k, "u");
    guard(v, k, "v");
    uh.push_front(std::move(u));
    vh.push_front(std::move(v));
    if (uh.size() > 3) {
      uh.pop_back();
      vh.pop_back();
    }
    if (opts.snap_every && (k % opts.snap_every == 0 || k == steps)) {
      tr.times.push_back(t);
      tr.snapshots.push_back(uh.front());
    }
    tr.steps = k;
    if (opts.observer && !opts.observer(k, t, uh[0], uh[1], vh[0])) {
      tr.stopped_early = k < steps;
      if (opts.snap_every && k % opts.snap_every != 0 && k != steps) {
        tr.times.push_back(t);
        tr.snapshots.push_back(uh.front());
      }
      break;
    }
    if (k < steps) eval(t, uh.front(), vh.front());
  }

  tr.final_u = uh.front();
  tr.final_v = vh.front();
  tr.steps = std::min(k, steps);
  tr.final_time = static_cast<double>(tr.steps) * dt;
  tr.factorizations = solver.count();
  return tr;
}

double fit_order(const std::vector<double>& dts, const std::vector<double>& errs) {
  if (dts.size() != errs.size() || dts.size() < 2) throw InvalidArgument("fit_order: need two or more matching samples");
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double m = static_cast<double>(dts.size());
  for (std::size_t i = 0; i < dts.size(); ++i) {
    if (!(dts[i] > 0.0) || !(errs[i] > 0.0)) throw InvalidArgument("fit_order: samples must be positive");
    const double x = std::log(dts[i]), y = std::log(errs[i]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  return (m * sxy - sx * sy) / (m * sxx - sx * sx);
}

}  // namespace rbfsurf
