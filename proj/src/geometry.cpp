#include "rbfsurf/geometry.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <numbers>
#include <random>
#include <sstream>
#include <unordered_map>

#include "rbfsurf/error.hpp"

namespace rbfsurf {

namespace {

constexpr double kPi = std::numbers::pi;

Vec3 uniform_in_box(const BoundingBox& b, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Vec3 p;
  for (int k = 0; k < 3; ++k) p[k] = b.lo[k] + u(rng) * (b.hi[k] - b.lo[k]);
  return p;
}

// Half-width of the sampling shell, relative to the bbox diagonal.
constexpr double kShellFraction = 0.005;

}  // namespace

bool BoundingBox::contains(const Vec3& p, double inflate) const {
  const Vec3 pad = inflate * (hi - lo);
  for (int k = 0; k < 3; ++k)
    if (p[k] < lo[k] - pad[k] || p[k] > hi[k] + pad[k]) return false;
  return true;
}

// ---------------------------------------------------------------- surfaces

double UnitSphere::value(const Vec3& x) const { return x.squaredNorm() - 1.0; }
Vec3 UnitSphere::gradient(const Vec3& x) const { return 2.0 * x; }
BoundingBox UnitSphere::bbox() const { return {Vec3::Constant(-1.0), Vec3::Constant(1.0)}; }
std::optional<double> UnitSphere::area() const { return 4.0 * kPi; }

double Torus::value(const Vec3& x) const {
  const double rho = std::hypot(x[0], x[1]);
  return (1.0 - rho) * (1.0 - rho) + x[2] * x[2] - 1.0 / 9.0;
}

Vec3 Torus::gradient(const Vec3& x) const {
  const double rho = std::hypot(x[0], x[1]);
  if (rho == 0.0) return {0.0, 0.0, 2.0 * x[2]};
  const double f = -2.0 * (1.0 - rho) / rho;
  return {f * x[0], f * x[1], 2.0 * x[2]};
}

BoundingBox Torus::bbox() const {
  return {Vec3(-4.0 / 3.0, -4.0 / 3.0, -1.0 / 3.0), Vec3(4.0 / 3.0, 4.0 / 3.0, 1.0 / 3.0)};
}

std::optional<double> Torus::area() const { return 4.0 * kPi * kPi / 3.0; }

RedBloodCell::RedBloodCell() {
  auto profile = [](double th) {
    const double c = std::cos(th);
    const double cc = c * c;
    return 0.5 * std::sin(th) * (c0 + c2 * cc + c4 * cc * cc);
  };
  double zmax = 0.0;
  constexpr int kScan = 20000;
  for (int i = 0; i <= kScan; ++i) zmax = std::max(zmax, std::abs(profile(-0.5 * kPi + kPi * i / kScan)));
  const double pad = 1.01;
  bbox_ = {Vec3(-r0 * pad, -r0 * pad, -zmax * pad), Vec3(r0 * pad, r0 * pad, zmax * pad)};

  // Surface of revolution: A = 2 pi int rho(th) |(rho', z')| dth (Simpson).
  auto integrand = [](double th) {
    const double c = std::cos(th);
    const double s = std::sin(th);
    const double cc = c * c;
    const double poly = c0 + c2 * cc + c4 * cc * cc;
    const double dpoly = (c2 + 2.0 * c4 * cc) * (-2.0 * c * s);
    const double drho = -r0 * s;
    const double dz = 0.5 * (c * poly + s * dpoly);
    return r0 * c * std::hypot(drho, dz);
  };
  constexpr int kPanels = 20000;
  const double hstep = kPi / kPanels;
  double acc = integrand(-0.5 * kPi) + integrand(0.5 * kPi);
  for (int i = 1; i < kPanels; ++i) acc += (i % 2 == 1 ? 4.0 : 2.0) * integrand(-0.5 * kPi + i * hstep);
  area_ = 2.0 * kPi * acc * hstep / 3.0;
}

// The profile polynomial is frozen at s = 1 outside the disc: it has a root
// near s = 1.88 that would otherwise add a degenerate zero ring at z = 0.
double RedBloodCell::value(const Vec3& x) const {
  const double s = (x[0] * x[0] + x[1] * x[1]) / (r0 * r0);
  const double sp = std::min(s, 1.0);
  const double poly = c0 + c2 * sp + c4 * sp * sp;
  return x[2] * x[2] - 0.25 * (1.0 - s) * poly * poly;
}

Vec3 RedBloodCell::gradient(const Vec3& x) const {
  const double s = (x[0] * x[0] + x[1] * x[1]) / (r0 * r0);
  const double sp = std::min(s, 1.0);
  const double poly = c0 + c2 * sp + c4 * sp * sp;
  const double dpoly = s < 1.0 ? c2 + 2.0 * c4 * s : 0.0;
  // d/ds of (1 - s) poly^2 / 4
  const double dg = 0.25 * (-poly * poly + 2.0 * (1.0 - s) * poly * dpoly);
  const double f = -2.0 * dg / (r0 * r0);
  return {f * x[0], f * x[1], 2.0 * x[2]};
}

Vec3 RedBloodCell::point(double theta, double lambda) const {
  const double c = std::cos(theta);
  const double cc = c * c;
  return {r0 * std::cos(lambda) * c, r0 * std::sin(lambda) * c,
          0.5 * std::sin(theta) * (c0 + c2 * cc + c4 * cc * cc)};
}

Vec3 RedBloodCell::parametric_normal(double theta, double lambda) const {
  const double c = std::cos(theta);
  const double s = std::sin(theta);
  const double cc = c * c;
  const double poly = c0 + c2 * cc + c4 * cc * cc;
  const double dpoly = (c2 + 2.0 * c4 * cc) * (-2.0 * c * s);
  const double dz = 0.5 * (c * poly + s * dpoly);
  const Vec3 t_theta(-r0 * std::cos(lambda) * s, -r0 * std::sin(lambda) * s, dz);
  const Vec3 t_lambda(-r0 * std::sin(lambda) * c, r0 * std::cos(lambda) * c, 0.0);
  Vec3 n = t_lambda.cross(t_theta);
  n.normalize();
  // outward: same side as the radial/vertical position
  const Vec3 p = point(theta, lambda);
  if (n.dot(gradient(p)) < 0.0) n = -n;
  return n;
}

namespace {
constexpr double kCycA = 2.0;
constexpr double kCycB = 1.9;
constexpr double kCycD = 1.0;
const double kCycC = std::sqrt(kCycA * kCycA - kCycB * kCycB);
}  // namespace

double DupinCyclide::value(const Vec3& x) const {
  const double r2 = x.squaredNorm();
  const double t = r2 - kCycD * kCycD + kCycB * kCycB;
  const double u = kCycA * x[0] + kCycC * kCycD;
  return t * t - 4.0 * u * u - 4.0 * kCycB * kCycB * x[1] * x[1];
}

Vec3 DupinCyclide::gradient(const Vec3& x) const {
  const double r2 = x.squaredNorm();
  const double t = r2 - kCycD * kCycD + kCycB * kCycB;
  const double u = kCycA * x[0] + kCycC * kCycD;
  return {4.0 * t * x[0] - 8.0 * kCycA * u, 4.0 * t * x[1] - 8.0 * kCycB * kCycB * x[1], 4.0 * t * x[2]};
}

BoundingBox DupinCyclide::bbox() const { return {Vec3(-2.45, -3.05, -1.7), Vec3(3.7, 3.05, 1.7)}; }

double Bretzel2::value(const Vec3& x) const {
  const double xx = x[0] * x[0];
  const double g = xx * (1.0 - xx) - x[1] * x[1];
  return g * g + 0.5 * x[2] * x[2] - 1.0 / 40.0;
}

Vec3 Bretzel2::gradient(const Vec3& x) const {
  const double xx = x[0] * x[0];
  const double g = xx * (1.0 - xx) - x[1] * x[1];
  return {2.0 * g * (2.0 * x[0] - 4.0 * xx * x[0]), -4.0 * g * x[1], x[2]};
}

BoundingBox Bretzel2::bbox() const { return {Vec3(-1.09, -0.66, -0.235), Vec3(1.09, 0.66, 0.235)}; }

std::shared_ptr<const Surface> make_surface(std::string_view name) {
  if (name == "sphere") return std::make_shared<UnitSphere>();
  if (name == "torus") return std::make_shared<Torus>();
  if (name == "rbc") return std::make_shared<RedBloodCell>();
  if (name == "cyclide") return std::make_shared<DupinCyclide>();
  if (name == "bretzel2") return std::make_shared<Bretzel2>();
  throw InvalidArgument("unknown surface '" + std::string(name) +
                        "' (expected sphere|torus|rbc|cyclide|bretzel2)");
}

std::vector<std::string> surface_names() { return {"sphere", "torus", "rbc", "cyclide", "bretzel2"}; }

// ---------------------------------------------------------------- pointwise

Vec3 normal_at(const Surface& s, const Vec3& x) {
  const Vec3 g = s.gradient(x);
  const double n = g.norm();
  if (!(n >= 1e-12)) throw NumericalError("surface gradient vanishes at a node");
  return g / n;
}

Vec3 project(const Surface& s, const Vec3& x) {
  const BoundingBox box = s.bbox();
  if (!box.contains(x, 0.5)) throw InvalidArgument("project: point is outside the inflated bounding box");
  const double tol = 1e-13 * box.diagonal();
  Vec3 y = x;
  double f = s.value(y);
  for (int it = 0; it < 100; ++it) {
    const Vec3 g = s.gradient(y);
    const double g2 = g.squaredNorm();
    if (!(g2 > 0.0)) throw NumericalError("project: gradient vanishes");
    if (std::abs(f) <= tol * std::sqrt(g2)) return y;
    const Vec3 dir = -(f / g2) * g;
    double lambda = 1.0;
    Vec3 trial = y + dir;
    double ft = s.value(trial);
    for (int half = 0; half < 30 && !(std::abs(ft) < std::abs(f)); ++half) {
      lambda *= 0.5;
      trial = y + lambda * dir;
      ft = s.value(trial);
    }
    if (trial == y) return y;
    y = trial;
    f = ft;
  }
  const Vec3 g = s.gradient(y);
  if (std::abs(f) <= tol * g.norm()) return y;
  std::ostringstream os;
  os << "project: no convergence after 100 iterations (residual " << f << ")";
  throw NoConvergence(os.str());
}

Points sample_surface(const Surface& s, std::size_t n, std::uint64_t seed) {
  if (n == 0) throw InvalidArgument("sample_surface: n must be at least 1");
  const BoundingBox box = s.bbox();
  const double w = kShellFraction * box.diagonal();
  std::mt19937_64 rng(seed);
  Points out;
  out.reserve(n);
  const std::size_t max_attempts = 100000 * n + 1000000;
  std::size_t attempts = 0;
  while (out.size() < n) {
    if (++attempts > max_attempts)
      throw NumericalError("sample_surface: sampling exhausted after " + std::to_string(attempts) + " draws");
    const Vec3 x = uniform_in_box(box, rng);
    const double gn = s.gradient(x).norm();
    if (!(gn > 0.0) || std::abs(s.value(x)) >= w * gn) continue;
    try {
      out.push_back(project(s, x));
    } catch (const NoConvergence&) {
      // rare for shell points; draw another
    }
  }
  return out;
}

double estimate_area(const Surface& s, std::size_t samples, std::uint64_t seed) {
  BoundingBox box = s.bbox();
  const double w = kShellFraction * box.diagonal();
  // the shell must not be clipped where the surface touches the box
  box.lo.array() -= w;
  box.hi.array() += w;
  std::mt19937_64 rng(seed);
  std::size_t hits = 0;
  for (std::size_t i = 0; i < samples; ++i) {
    const Vec3 x = uniform_in_box(box, rng);
    const double gn = s.gradient(x).norm();
    if (gn > 0.0 && std::abs(s.value(x)) < w * gn) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(samples) * box.volume() / (2.0 * w);
}

// ---------------------------------------------------------------- locator

NodeLocator::NodeLocator(const Points& points) : points_(&points) {
  if (points.empty()) throw InvalidArgument("NodeLocator: no points");
  Vec3 lo = points.front();
  Vec3 hi = points.front();
  for (const auto& p : points) {
    lo = lo.cwiseMin(p);
    hi = hi.cwiseMax(p);
  }
  const double diag = std::max((hi - lo).norm(), 1e-12);
  const auto n = static_cast<double>(points.size());
  cell_ = diag / std::sqrt(n);
  auto ncells = [&] {
    long long total = 1;
    for (int k = 0; k < 3; ++k) {
      dims_[k] = std::max<long long>(1, static_cast<long long>(std::floor((hi[k] - lo[k]) / cell_)) + 1);
      total *= dims_[k];
    }
    return total;
  };
  while (ncells() > 64 * static_cast<long long>(points.size()) + 4096) cell_ *= 1.5;
  origin_ = lo;
  buckets_.assign(static_cast<std::size_t>(dims_[0] * dims_[1] * dims_[2]), {});
  for (std::size_t i = 0; i < points.size(); ++i) {
    long long c[3];
    for (int k = 0; k < 3; ++k)
      c[k] = std::clamp<long long>(static_cast<long long>(std::floor((points[i][k] - origin_[k]) / cell_)), 0,
                                   dims_[k] - 1);
    buckets_[static_cast<std::size_t>(key(c[0], c[1], c[2]))].push_back(i);
  }
}

long long NodeLocator::key(long long ix, long long iy, long long iz) const {
  return (ix * dims_[1] + iy) * dims_[2] + iz;
}

std::size_t NodeLocator::nearest(const Vec3& p, std::size_t exclude) const {
  long long c[3];
  for (int k = 0; k < 3; ++k)
    c[k] = std::clamp<long long>(static_cast<long long>(std::floor((p[k] - origin_[k]) / cell_)), 0, dims_[k] - 1);
  const long long kmax = std::max({dims_[0], dims_[1], dims_[2]});
  double best = std::numeric_limits<double>::infinity();
  std::size_t best_i = static_cast<std::size_t>(-1);
  for (long long ring = 0; ring <= kmax; ++ring) {
    for (long long dx = -ring; dx <= ring; ++dx) {
      const long long ix = c[0] + dx;
      if (ix < 0 || ix >= dims_[0]) continue;
      for (long long dy = -ring; dy <= ring; ++dy) {
        const long long iy = c[1] + dy;
        if (iy < 0 || iy >= dims_[1]) continue;
        const bool face = std::abs(dx) == ring || std::abs(dy) == ring;
        for (long long dz = -ring; dz <= ring; dz += (face ? 1 : 2 * std::max<long long>(ring, 1))) {
          const long long iz = c[2] + dz;
          if (iz < 0 || iz >= dims_[2]) continue;
          for (const std::size_t i : buckets_[static_cast<std::size_t>(key(ix, iy, iz))]) {
            if (i == exclude) continue;
            const double d = ((*points_)[i] - p).squaredNorm();
            if (d < best || (d == best && i < best_i)) {
              best = d;
              best_i = i;
            }
          }
        }
      }
    }
    if (best_i != static_cast<std::size_t>(-1) && std::sqrt(best) <= static_cast<double>(ring) * cell_) break;
  }
  if (best_i == static_cast<std::size_t>(-1)) throw InvalidArgument("NodeLocator: no candidate point");
  return best_i;
}

// ---------------------------------------------------------------- node sets

Points thin(const Points& points, double qmin) {
  if (!(qmin > 0.0)) throw InvalidArgument("thin: qmin must be positive");
  Points kept;
  if (points.empty()) return kept;
  Vec3 lo = points.front();
  for (const auto& p : points) lo = lo.cwiseMin(p);
  // Hash grid with cell = qmin: neighbours within qmin lie in adjacent cells.
  std::unordered_map<long long, std::vector<std::size_t>> grid;
  auto cell_of = [&](const Vec3& p, int k) { return static_cast<long long>(std::floor((p[k] - lo[k]) / qmin)); };
  auto pack = [](long long a, long long b, long long c) { return (a * 2097152LL + b) * 2097152LL + c; };
  for (const auto& p : points) {
    const long long cx = cell_of(p, 0), cy = cell_of(p, 1), cz = cell_of(p, 2);
    bool ok = true;
    for (long long dx = -1; dx <= 1 && ok; ++dx)
      for (long long dy = -1; dy <= 1 && ok; ++dy)
        for (long long dz = -1; dz <= 1 && ok; ++dz) {
          const auto it = grid.find(pack(cx + dx, cy + dy, cz + dz));
          if (it == grid.end()) continue;
          for (const std::size_t j : it->second)
            if ((kept[j] - p).norm() < qmin) {
              ok = false;
              break;
            }
        }
    if (!ok) continue;
    grid[pack(cx, cy, cz)].push_back(kept.size());
    kept.push_back(p);
  }
  return kept;
}

Points reduce_to_count(Points points, std::size_t count) {
  const std::size_t n = points.size();
  if (count >= n) return points;
  std::vector<char> alive(n, 1);
  std::vector<double> nn(n, std::numeric_limits<double>::infinity());
  std::vector<std::size_t> nn_idx(n, 0);
  auto refresh = [&](std::size_t i) {
    nn[i] = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i || !alive[j]) continue;
      const double d = (points[i] - points[j]).squaredNorm();
      if (d < nn[i]) {
        nn[i] = d;
        nn_idx[i] = j;
      }
    }
  };
  for (std::size_t i = 0; i < n; ++i) refresh(i);
  for (std::size_t remaining = n; remaining > count; --remaining) {
    std::size_t victim = n;
    for (std::size_t i = 0; i < n; ++i)
      if (alive[i] && (victim == n || nn[i] < nn[victim])) victim = i;
    // drop the later point of the closest pair
    victim = std::max(victim, nn_idx[victim]);
    alive[victim] = 0;
    for (std::size_t i = 0; i < n; ++i)
      if (alive[i] && nn_idx[i] == victim) refresh(i);
  }
  Points out;
  out.reserve(count);
  for (std::size_t i = 0; i < n; ++i)
    if (alive[i]) out.push_back(points[i]);
  return out;
}

double riesz_energy(const Points& points) {
  const std::size_t n = points.size();
  std::vector<double> rows(n, 0.0);
#pragma omp parallel for schedule(dynamic, 16)
  for (std::ptrdiff_t ii = 0; ii < static_cast<std::ptrdiff_t>(n); ++ii) {
    const auto i = static_cast<std::size_t>(ii);
    double acc = 0.0;
    for (std::size_t j = i + 1; j < n; ++j) acc += 1.0 / (points[i] - points[j]).squaredNorm();
    rows[i] = acc;
  }
  double e = 0.0;
  for (const double r : rows) e += r;
  if (!std::isfinite(e)) throw NumericalError("riesz_energy: coincident points");
  return e;
}

NodeSet riesz_minimize(const Surface& s, Points points, std::size_t iters, double step,
                       std::vector<double>* energy_trace) {
  if (!(step > 0.0)) throw InvalidArgument("riesz_minimize: step must be positive");
  const std::size_t n = points.size();
  double energy = n > 1 ? riesz_energy(points) : 0.0;
  if (energy_trace) energy_trace->assign(1, energy);

  Points normals(n);
  Points disp(n);
  Points trial(n);
  double alpha = step;
  for (std::size_t it = 0; it < iters && n > 1; ++it) {
    for (std::size_t i = 0; i < n; ++i) normals[i] = normal_at(s, points[i]);
#pragma omp parallel for schedule(dynamic, 16)
    for (std::ptrdiff_t ii = 0; ii < static_cast<std::ptrdiff_t>(n); ++ii) {
      const auto i = static_cast<std::size_t>(ii);
      Vec3 g = Vec3::Zero();
      double nn2 = std::numeric_limits<double>::infinity();
      for (std::size_t j = 0; j < n; ++j) {
        if (j == i) continue;
        const Vec3 d = points[i] - points[j];
        const double d2 = d.squaredNorm();
        nn2 = std::min(nn2, d2);
        g += (2.0 / (d2 * d2)) * d;
      }
      // tangential part of the descent direction, scaled by the inverse of
      // the nearest-neighbour curvature scale and capped at the local spacing
      g -= normals[i] * normals[i].dot(g);
      const double nn = std::sqrt(nn2);
      const double gn = g.norm();
      const double len = std::min(0.5 * nn2 * nn2 * gn, nn);
      disp[i] = gn > 0.0 ? Vec3((len / gn) * g) : Vec3(Vec3::Zero());
    }
    bool accepted = false;
    while (!accepted && alpha > 1e-10 * step) {
      for (std::size_t i = 0; i < n; ++i) trial[i] = project(s, points[i] + alpha * disp[i]);
      double e_new = std::numeric_limits<double>::infinity();
      try {
        e_new = riesz_energy(trial);
      } catch (const NumericalError&) {
      }
      if (e_new <= energy) {
        accepted = true;
        points.swap(trial);
        energy = e_new;
        if (energy_trace) energy_trace->push_back(energy);
        alpha = std::min(1.25 * alpha, step);
      } else {
        alpha *= 0.5;
      }
    }
    if (!accepted) break;
  }

  NodeSet ns;
  ns.surface = s.name();
  ns.points = std::move(points);
  ns.normals.resize(n);
  for (std::size_t i = 0; i < n; ++i) ns.normals[i] = normal_at(s, ns.points[i]);
  if (n > 1) {
    const MeshStats st = mesh_stats(s, ns, 10 * n, 1);
    ns.h = st.h;
    ns.q = st.q;
    ns.rho = st.rho;
  }
  return ns;
}

namespace {

double separation(const Points& pts) {
  if (pts.size() < 2) return 0.0;
  const NodeLocator loc(pts);
  double dmin = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < pts.size(); ++i) dmin = std::min(dmin, (pts[loc.nearest(pts[i], i)] - pts[i]).norm());
  return 0.5 * dmin;
}

}  // namespace

MeshStats mesh_stats(const Surface& s, const NodeSet& ns, std::size_t probe_count, std::uint64_t seed) {
  MeshStats st;
  if (ns.size() == 0) return st;
  st.q = separation(ns.points);
  const Points probes = sample_surface(s, std::max<std::size_t>(probe_count, 1), seed);
  const NodeLocator loc(ns.points);
  for (const auto& p : probes) st.h = std::max(st.h, (ns.points[loc.nearest(p)] - p).norm());
  st.rho = st.q > 0.0 ? st.h / st.q : std::numeric_limits<double>::infinity();
  return st;
}

std::vector<double> quadrature_weights(const Surface& s, const NodeSet& ns, std::uint64_t seed,
                                       std::size_t samples_per_node) {
  const std::size_t n = ns.size();
  if (n == 0) return {};
  const std::size_t m = samples_per_node * n;
  const double area = s.area().value_or(estimate_area(s, 4000000, seed ^ 0x9e3779b97f4a7c15ULL));
  const Points samples = sample_surface(s, m, seed);
  const NodeLocator loc(ns.points);
  std::vector<std::size_t> counts(n, 0);
  for (const auto& p : samples) ++counts[loc.nearest(p)];
  std::vector<double> w(n);
  for (std::size_t i = 0; i < n; ++i) w[i] = static_cast<double>(counts[i]) / static_cast<double>(m) * area;
  return w;
}

NodeSet finalize_nodes(const Surface& s, Points points, std::uint64_t seed) {
  NodeSet ns;
  ns.surface = s.name();
  ns.points = std::move(points);
  ns.normals.reserve(ns.size());
  for (const auto& p : ns.points) ns.normals.push_back(normal_at(s, p));
  const MeshStats st = mesh_stats(s, ns, 10 * ns.size(), seed + 1);
  ns.h = st.h;
  ns.q = st.q;
  ns.rho = st.rho;
  ns.weights = quadrature_weights(s, ns, seed + 2);
  return ns;
}

NodeSet generate_nodes(const Surface& s, std::size_t n, std::uint64_t seed, const NodeGenOptions& opts) {
  if (n == 0) throw InvalidArgument("generate_nodes: n must be at least 1");
  const auto ncand = static_cast<std::size_t>(std::ceil(opts.candidate_factor * static_cast<double>(n)));
  Points pts = sample_surface(s, std::max(ncand, n), seed);

  const auto target = static_cast<std::size_t>(std::ceil(opts.thinned_factor * static_cast<double>(n)));
  if (pts.size() > target && n > 3) {
    double lo = 0.0;
    double hi = s.bbox().diagonal();
    Points best = pts;
    for (int it = 0; it < 40; ++it) {
      const double mid = 0.5 * (lo + hi);
      Points t = thin(pts, mid);
      if (t.size() >= target) {
        lo = mid;
        best = std::move(t);
      } else {
        hi = mid;
      }
    }
    pts = std::move(best);
  }
  pts = reduce_to_count(std::move(pts), n);
  NodeSet ns = riesz_minimize(s, std::move(pts), opts.riesz_iters, opts.riesz_step);
  return finalize_nodes(s, std::move(ns.points), seed);
}

// ---------------------------------------------------------------- node CSV

void save_nodes(const NodeSet& ns, const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream os(path);
  if (!os) throw InvalidArgument("cannot open '" + path.string() + "' for writing");
  const bool with_normals = ns.normals.size() == ns.size();
  const bool with_weights = with_normals && ns.weights.size() == ns.size();
  os << "x,y,z";
  if (with_normals) os << ",nx,ny,nz";
  if (with_weights) os << ",w";
  os << '\n';
  char buf[64];
  auto put = [&](double v) {
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    os << buf;
  };
  for (std::size_t i = 0; i < ns.size(); ++i) {
    for (int k = 0; k < 3; ++k) {
      if (k) os << ',';
      put(ns.points[i][k]);
    }
    if (with_normals)
      for (int k = 0; k < 3; ++k) {
        os << ',';
        put(ns.normals[i][k]);
      }
    if (with_weights) {
      os << ',';
      put(ns.weights[i]);
    }
    os << '\n';
  }
  if (!os) throw Error("write failed for '" + path.string() + "'");
}

NodeSet load_nodes(const std::filesystem::path& path, const Surface* surface) {
  std::ifstream is(path);
  if (!is) throw InvalidArgument("cannot open node file '" + path.string() + "'");
  std::string line;
  if (!std::getline(is, line)) throw ParseError(1, "empty node file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  std::size_t cols = 0;
  if (line == "x,y,z") cols = 3;
  else if (line == "x,y,z,nx,ny,nz") cols = 6;
  else if (line == "x,y,z,nx,ny,nz,w") cols = 7;
  else throw ParseError(1, "header must be x,y,z[,nx,ny,nz[,w]]");
  if (cols == 3 && surface == nullptr)
    throw InvalidArgument("node file has no normals; a surface is required to compute them");

  NodeSet ns;
  std::size_t lineno = 1;
  while (std::getline(is, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    double v[7] = {};
    std::size_t got = 0;
    const char* p = line.data();
    const char* end = line.data() + line.size();
    while (true) {
      if (got == cols) throw ParseError(lineno, "too many fields");
      while (p < end && *p == ' ') ++p;
      if (p < end && *p == '+') ++p;
      const auto [ptr, ec] = std::from_chars(p, end, v[got]);
      if (ec != std::errc{} || !std::isfinite(v[got])) throw ParseError(lineno, "malformed number in row");
      ++got;
      p = ptr;
      while (p < end && *p == ' ') ++p;
      if (p == end) break;
      if (*p != ',') throw ParseError(lineno, "unexpected character in row");
      ++p;
    }
    if (got != cols) throw ParseError(lineno, "expected " + std::to_string(cols) + " fields");
    ns.points.emplace_back(v[0], v[1], v[2]);
    if (cols >= 6) ns.normals.emplace_back(v[3], v[4], v[5]);
    if (cols == 7) ns.weights.push_back(v[6]);
  }
  if (ns.points.empty()) throw ParseError(lineno, "node file has no rows");

  if (surface) {
    ns.surface = surface->name();
    const double tol = 1e-8 * surface->bbox().diagonal();
    for (std::size_t i = 0; i < ns.size(); ++i) {
      const Vec3& x = ns.points[i];
      const double gn = surface->gradient(x).norm();
      if (!(std::abs(surface->value(x)) <= tol * gn))
        throw ParseError(i + 2, "node is off the '" + surface->name() + "' surface");
    }
    if (cols == 3)
      for (const auto& x : ns.points) ns.normals.push_back(normal_at(*surface, x));
    const MeshStats st = mesh_stats(*surface, ns, 10 * ns.size(), 1);
    ns.h = st.h;
    ns.q = st.q;
    ns.rho = st.rho;
  } else {
    ns.q = separation(ns.points);
  }
  return ns;
}

}  // namespace rbfsurf
