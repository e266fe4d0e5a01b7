#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>
#include <Eigen/Geometry>

namespace rbfsurf {

using Vec3 = Eigen::Vector3d;
using Points = std::vector<Vec3>;

struct BoundingBox {
  Vec3 lo;
  Vec3 hi;

  double diagonal() const { return (hi - lo).norm(); }
  double volume() const { return (hi - lo).prod(); }
  /// True if p lies in the box grown by `inflate` times its extent on each side.
  bool contains(const Vec3& p, double inflate = 0.0) const;
};

/// Closed surface given as the zero set of F with F < 0 inside, so that
/// grad F points outward.
class Surface {
 public:
  virtual ~Surface() = default;

  virtual std::string name() const = 0;
  virtual double value(const Vec3& x) const = 0;
  virtual Vec3 gradient(const Vec3& x) const = 0;
  virtual BoundingBox bbox() const = 0;
  /// Surface area where it is known in closed form (or by 1-D quadrature).
  virtual std::optional<double> area() const { return std::nullopt; }
  /// A point strictly inside the enclosed solid.
  virtual Vec3 interior_point() const = 0;
};

/// x^2 + y^2 + z^2 = 1.
class UnitSphere final : public Surface {
 public:
  std::string name() const override { return "sphere"; }
  double value(const Vec3& x) const override;
  Vec3 gradient(const Vec3& x) const override;
  BoundingBox bbox() const override;
  std::optional<double> area() const override;
  Vec3 interior_point() const override { return Vec3::Zero(); }
};

/// (1 - sqrt(x^2 + y^2))^2 + z^2 - 1/9 = 0: tube radius 1/3 around the unit circle.
class Torus final : public Surface {
 public:
  std::string name() const override { return "torus"; }
  double value(const Vec3& x) const override;
  Vec3 gradient(const Vec3& x) const override;
  BoundingBox bbox() const override;
  std::optional<double> area() const override;
  Vec3 interior_point() const override { return {1.0, 0.0, 0.0}; }
};

/// Red blood cell (biconcave disc) of revolution:
///   x = r0 cos(lam) cos(th), y = r0 sin(lam) cos(th),
///   z = sin(th) (c0 + c2 cos^2 th + c4 cos^4 th) / 2.
/// With s = (x^2 + y^2) / r0^2 = cos^2 th this is the polynomial zero set
///   z^2 - (1 - s) (c0 + c2 s + c4 s^2)^2 / 4 = 0.
class RedBloodCell final : public Surface {
 public:
  RedBloodCell();

  std::string name() const override { return "rbc"; }
  double value(const Vec3& x) const override;
  Vec3 gradient(const Vec3& x) const override;
  BoundingBox bbox() const override { return bbox_; }
  std::optional<double> area() const override { return area_; }
  Vec3 interior_point() const override { return Vec3::Zero(); }

  /// Parametric point, th in [-pi/2, pi/2], lam in [-pi, pi).
  Vec3 point(double theta, double lambda) const;
  /// Outward unit normal from the cross product of parametric tangents.
  Vec3 parametric_normal(double theta, double lambda) const;

  static constexpr double r0 = 3.91 / 3.39;
  static constexpr double c0 = 0.81 / 3.39;
  static constexpr double c2 = 7.83 / 3.39;
  static constexpr double c4 = -4.39 / 3.39;

 private:
  BoundingBox bbox_;
  double area_;
};

/// (x^2 + y^2 + z^2 - d^2 + b^2)^2 - 4 (a x + c d)^2 - 4 b^2 y^2 = 0,
/// a = 2, b = 1.9, d = 1, c^2 = a^2 - b^2.
class DupinCyclide final : public Surface {
 public:
  std::string name() const override { return "cyclide"; }
  double value(const Vec3& x) const override;
  Vec3 gradient(const Vec3& x) const override;
  BoundingBox bbox() const override;
  Vec3 interior_point() const override { return {2.0, 0.0, 0.0}; }
};

/// (x^2 (1 - x^2) - y^2)^2 + z^2 / 2 - 1/40 = 0 (genus two).
class Bretzel2 final : public Surface {
 public:
  std::string name() const override { return "bretzel2"; }
  double value(const Vec3& x) const override;
  Vec3 gradient(const Vec3& x) const override;
  BoundingBox bbox() const override;
  Vec3 interior_point() const override { return {0.7, 0.5, 0.0}; }
};

/// "sphere", "torus", "rbc", "cyclide" or "bretzel2".
std::shared_ptr<const Surface> make_surface(std::string_view name);
std::vector<std::string> surface_names();

struct NodeSet {
  Points points;
  Points normals;
  std::vector<double> weights;  // empty when unknown
  double h = 0.0;               // mesh norm estimate
  double q = 0.0;               // separation radius
  double rho = 0.0;             // h / q
  std::string surface;          // name of the generating surface, if any

  std::size_t size() const noexcept { return points.size(); }
};

struct MeshStats {
  double h = 0.0;
  double q = 0.0;
  double rho = 0.0;
};

/// grad F / |grad F|. Throws NumericalError if the gradient vanishes.
Vec3 normal_at(const Surface& s, const Vec3& x);

/// Damped Newton projection y <- y - F(y) grad F(y) / |grad F(y)|^2.
/// Throws InvalidArgument outside the bbox inflated by 50% and NoConvergence
/// after 100 iterations.
Vec3 project(const Surface& s, const Vec3& x);

/// Approximately area-uniform random points: uniform bbox samples within a
/// thin shell around the surface, projected onto it. Deterministic per seed.
Points sample_surface(const Surface& s, std::size_t n, std::uint64_t seed);

/// Monte-Carlo estimate of the surface area from the thin-shell volume.
double estimate_area(const Surface& s, std::size_t samples, std::uint64_t seed);

/// Greedy first-come thinning: keeps a point only if it is at least qmin away
/// from every point already kept.
Points thin(const Points& points, double qmin);

/// Removes one point of the currently closest pair until `count` remain.
Points reduce_to_count(Points points, std::size_t count);

/// Riesz s = 2 energy over unordered pairs. Throws NumericalError on
/// coincident points.
double riesz_energy(const Points& points);

/// Tangential descent of the Riesz energy with per-point step scaling and
/// backtracking, projecting back onto the surface after every move. The
/// energy never increases across accepted steps. `energy_trace`, when given,
/// receives the energy after every accepted step (initial value first).
NodeSet riesz_minimize(const Surface& s, Points points, std::size_t iters, double step,
                       std::vector<double>* energy_trace = nullptr);

/// q = half the minimum pairwise distance; h = largest distance from
/// `probe_count` random surface points to their nearest node.
MeshStats mesh_stats(const Surface& s, const NodeSet& ns, std::size_t probe_count,
                     std::uint64_t seed);

/// Monte-Carlo Voronoi masses scaled so the weights sum to the surface area
/// (known area or an estimate). Uses `samples_per_node` * N surface samples.
std::vector<double> quadrature_weights(const Surface& s, const NodeSet& ns,
                                       std::uint64_t seed = 7,
                                       std::size_t samples_per_node = 200);

/// Fills normals, mesh statistics and quadrature weights for points on `s`.
NodeSet finalize_nodes(const Surface& s, Points points, std::uint64_t seed);

struct NodeGenOptions {
  double candidate_factor = 3.0;
  double thinned_factor = 1.2;
  std::size_t riesz_iters = 200;
  double riesz_step = 0.25;
};

/// Sample, thin, reduce to exactly n, then Riesz-descend.
NodeSet generate_nodes(const Surface& s, std::size_t n, std::uint64_t seed,
                       const NodeGenOptions& opts = {});

/// CSV with header x,y,z[,nx,ny,nz[,w]], 17 significant digits.
void save_nodes(const NodeSet& ns, const std::filesystem::path& path);

/// Reads a node CSV. With a surface, missing normals are computed from it,
/// points farther than 1e-8 * bbox diagonal (in |F| / |grad F|) are rejected
/// and h / rho are estimated; q is always computed.
NodeSet load_nodes(const std::filesystem::path& path, const Surface* surface = nullptr);

/// Nearest-node queries over a uniform grid of buckets.
class NodeLocator {
 public:
  explicit NodeLocator(const Points& points);
  /// Index of the closest point to p, skipping index `exclude`.
  std::size_t nearest(const Vec3& p, std::size_t exclude = static_cast<std::size_t>(-1)) const;

 private:
  long long key(long long ix, long long iy, long long iz) const;

  const Points* points_;
  Vec3 origin_;
  double cell_;
  long long dims_[3];
  std::vector<std::vector<std::size_t>> buckets_;
};

}  // namespace rbfsurf
