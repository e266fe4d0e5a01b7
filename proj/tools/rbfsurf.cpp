// rbfsurf: node generation, spectra, convergence tables and
// reaction-diffusion runs on closed surfaces.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <Eigen/Core>
#include <json.hpp>
#ifdef _OPENMP
#include <omp.h>
#endif

#include "rbfsurf/error.hpp"
#include "rbfsurf/experiments.hpp"
#include "rbfsurf/geometry.hpp"
#include "rbfsurf/kernels.hpp"
#include "rbfsurf/operators.hpp"
#include "rbfsurf/output.hpp"
#include "rbfsurf/reaction.hpp"

namespace fs = std::filesystem;
using namespace rbfsurf;

namespace {

// Flat JSON object -> option values of the selected subcommand. Arrays
// become multi-value inputs.
class JsonConfig : public CLI::Config {
 public:
  explicit JsonConfig(const CLI::App* app) : app_(app) {}

  std::string to_config(const CLI::App* app, bool default_also, bool, std::string) const override {
    Json j = Json::object();
    for (const CLI::Option* opt : app->get_options({})) {
      if (opt->get_lnames().empty() || !opt->get_configurable()) continue;
      const std::string name = opt->get_lnames()[0];
      if (opt->count() > 0) {
        const auto& r = opt->results();
        j[name] = r.size() == 1 ? Json(r[0]) : Json(r);
      } else if (default_also && !opt->get_default_str().empty()) {
        j[name] = opt->get_default_str();
      }
    }
    return j.dump(2);
  }

  std::vector<CLI::ConfigItem> from_config(std::istream& in) const override {
    Json j;
    try {
      j = Json::parse(in);
    } catch (const nlohmann::json::exception& e) {
      throw CLI::ConversionError(std::string("config is not valid JSON: ") + e.what());
    }
    if (!j.is_object()) throw CLI::ConversionError("config must be a JSON object");
    std::vector<CLI::ConfigItem> items;
    for (const auto& [key, val] : j.items()) {
      CLI::ConfigItem item;
      item.name = key;
      const auto subs = app_->get_subcommands();
      if (!subs.empty()) item.parents = {subs.front()->get_name()};
      if (val.is_array()) {
        for (const auto& v : val) item.inputs.push_back(scalar(v));
      } else {
        item.inputs.push_back(scalar(val));
      }
      items.push_back(std::move(item));
    }
    return items;
  }

 private:
  const CLI::App* app_;

  static std::string scalar(const Json& v) {
    if (v.is_string()) return v.get<std::string>();
    if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
    if (v.is_number()) return v.dump();
    throw CLI::ConversionError("config values must be scalars or arrays of scalars");
  }
};

struct Common {
  std::uint64_t seed = 1;
  int threads = 0;
  std::string out = "out";
  std::size_t snap_every = 0;
};

struct NodeArgs {
  std::string surface = "sphere";
  std::string nodes_file;
  std::size_t n = 0;
};

void set_threads(int k) {
  if (k <= 0) return;
#ifdef _OPENMP
  omp_set_num_threads(k);
#endif
  Eigen::setNbThreads(k);
}

void add_common(CLI::App* sub, Common& c, bool snapshots) {
  sub->add_option("--seed", c.seed, "Random seed (nodes, centers, initial data)")->capture_default_str();
  sub->add_option("--threads", c.threads, "Worker thread cap (0 = runtime default)")->check(CLI::NonNegativeNumber);
  sub->add_option("--out", c.out, "Output directory")->capture_default_str();
  if (snapshots)
    sub->add_option("--snap-every", c.snap_every, "Write a field snapshot every k steps and at the end (0 = none)")
        ->capture_default_str();
}

void add_nodes(CLI::App* sub, NodeArgs& a, std::size_t default_n) {
  a.n = default_n;
  sub->add_option("--surface", a.surface, "sphere | torus | rbc | cyclide | bretzel2")->capture_default_str();
  sub->add_option("--nodes", a.nodes_file, "Node CSV (x,y,z[,nx,ny,nz[,w]]) instead of generating nodes");
  sub->add_option("-N,--count", a.n, "Number of generated nodes")->capture_default_str();
}

NodeSet obtain_nodes(const NodeArgs& a, std::uint64_t seed) {
  auto s = make_surface(a.surface);
  if (!a.nodes_file.empty()) return load_nodes(a.nodes_file, s.get());
  if (a.n == 0) throw InvalidArgument("node count must be positive");
  return generate_nodes(*s, a.n, seed);
}

Kernel kernel_or_default(const std::string& spec, const std::string& surface) {
  if (!spec.empty()) return parse_kernel_spec(spec);
  return make_imq(default_imq_epsilon(surface));
}

Json node_summary(const NodeSet& ns) {
  double w = 0.0;
  for (double x : ns.weights) w += x;
  return {{"N", ns.size()}, {"h", ns.h}, {"q", ns.q}, {"rho", ns.rho}, {"weight_sum", w}};
}

fs::path snapshot_path(const fs::path& dir, const std::string& stem, std::size_t step, const std::string& fmt) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%s_%07zu.%s", stem.c_str(), step, fmt.c_str());
  return dir / buf;
}

void write_snapshots(RunRecord& rec, const fs::path& dir, const NodeSet& ns, const Trajectory& tr, double dt,
                     const std::string& fmt) {
  for (std::size_t i = 0; i < tr.snapshots.size(); ++i) {
    const auto step = static_cast<std::size_t>(std::llround(tr.times[i] / dt));
    const fs::path p = snapshot_path(dir, "u", step, fmt);
    if (fmt == "ply")
      write_ply(p, ns, tr.snapshots[i]);
    else
      write_field_csv(p, ns, tr.snapshots[i]);
    rec.add_snapshot(step, tr.times[i], p);
  }
}

int cmd_nodes(const Common& c, const NodeArgs& a) {
  RunRecord rec("nodes");
  rec.config() = {{"surface", a.surface}, {"N", a.n}, {"seed", c.seed}};
  auto s = make_surface(a.surface);
  const NodeSet ns = generate_nodes(*s, a.n, c.seed);
  rec.mark("generate");
  const fs::path dir(c.out);
  const fs::path file = dir / ("nodes_" + a.surface + "_" + std::to_string(a.n) + ".csv");
  save_nodes(ns, file);
  rec.add_output(file);
  rec.summary() = node_summary(ns);
  rec.write(dir / "run.json");
  std::printf("%s N=%zu  h=%.6g  q=%.6g  rho=%.4g  sum(w)=%.8g  -> %s\n", a.surface.c_str(), ns.size(), ns.h, ns.q,
              ns.rho, rec.summary()["weight_sum"].get<double>(), file.string().c_str());
  return 0;
}

int cmd_eigs(const Common& c, const NodeArgs& a, const std::string& kspec, long cap) {
  RunRecord rec("eigs");
  const Kernel k = kernel_or_default(kspec, a.surface);
  rec.config() = {{"surface", a.surface}, {"nodes", a.nodes_file}, {"N", a.n},
                  {"seed", c.seed},       {"kernel", k.spec()},     {"eig_cap", cap}};
  NodeSet ns = obtain_nodes(a, c.seed);
  rec.mark("nodes");
  SurfaceOperators ops(k, std::move(ns));
  rec.mark("operators");
  EigenOptions eo;
  eo.cap = cap;
  const SpectrumReport r = stability_scan(ops, eo);
  rec.mark("eigenvalues");
  const fs::path dir(c.out);
  write_spectrum_csv(dir / "spectrum.csv", r);
  rec.add_output(dir / "spectrum.csv");
  rec.summary() = spectrum_json(r);
  rec.summary()["cond_estimate"] = ops.cond_estimate();
  rec.write(dir / "run.json");
  std::printf("%s N=%zu %s  max Re = %.6g  max |lambda| = %.6g  left half plane: %s\n", a.surface.c_str(), r.n,
              r.kernel.c_str(), r.max_real, r.max_abs, r.left_half_plane() ? "yes" : "no");
  return 0;
}

int cmd_converge(const Common& c, const std::string& surface, const std::string& kspec,
                 std::vector<std::size_t> counts, double dt, double tend, const std::string& nodes_dir,
                 const std::string& profile) {
  RunRecord rec("converge");
  const Kernel k = parse_kernel_spec(kspec);
  if (counts.empty()) counts = default_node_counts(surface);
  ConvergenceOptions o;
  o.dt = dt;
  o.t_end = tend;
  o.node_seed = c.seed;
  o.center_seed = c.seed + 2023;
  o.sphere_profile = parse_sphere_profile(profile);
  rec.config() = {{"surface", surface}, {"kernel", k.spec()}, {"N", counts},
                  {"dt", dt},           {"t_end", tend},       {"seed", c.seed},
                  {"center_seed", o.center_seed}, {"center_count", o.center_count}, {"startup", "exact"}};
  if (surface == "sphere") rec.config()["sphere_profile"] = profile;
  NodeSource src;
  if (!nodes_dir.empty()) {
    auto s = make_surface(surface);
    src = [s, nodes_dir, surface](std::size_t n) {
      return load_nodes(fs::path(nodes_dir) / ("nodes_" + surface + "_" + std::to_string(n) + ".csv"), s.get());
    };
  }
  const ConvergenceTable t = run_convergence(surface, k, counts, o, src);
  rec.mark("run");
  const fs::path dir(c.out);
  write_convergence_csv(dir / "convergence.csv", t);
  rec.add_output(dir / "convergence.csv");
  rec.summary() = convergence_json(t);
  rec.write(dir / "run.json");
  for (const auto& r : t.rows) {
    if (r.failed)
      std::printf("N=%6zu  FAILED: %s\n", r.n, r.error.c_str());
    else
      std::printf("N=%6zu  h=%.5f  l2=%.4e  linf=%.4e\n", r.n, r.h, r.l2, r.linf);
  }
  std::printf("rate vs sqrt(N): l2 %.3f  linf %.3f\n", t.l2_rate, t.linf_rate);
  return t.all_ok() ? 0 : 3;
}

int cmd_laplacian(const Common& c, const NodeArgs& a, const std::string& kspec, const std::string& field) {
  RunRecord rec("laplacian-test");
  const TestField f = field.empty() ? (a.surface == "torus" ? TestField::TorusPolynomial : TestField::SphereZ)
                                    : parse_test_field(field);
  const Kernel k = kernel_or_default(kspec, a.surface);
  const Points centers = random_sphere_centers(23, c.seed + 2023);
  rec.config() = {{"surface", a.surface}, {"nodes", a.nodes_file}, {"N", a.n},
                  {"seed", c.seed},       {"kernel", k.spec()},     {"field", test_field_name(f)}};
  SurfaceOperators ops(k, obtain_nodes(a, c.seed));
  rec.mark("operators");
  const Norms e = laplacian_error(ops, f, centers);
  rec.summary() = node_summary(ops.nodes());
  rec.summary()["l2"] = e.l2;
  rec.summary()["linf"] = e.linf;
  rec.write(fs::path(c.out) / "run.json");
  std::printf("%s N=%zu %s field=%s  rel l2=%.4e  rel linf=%.4e\n", a.surface.c_str(), ops.nodes().size(),
              k.spec().c_str(), test_field_name(f).c_str(), e.l2, e.linf);
  return 0;
}

int cmd_turing(const Common& c, NodeArgs a, const std::string& kspec, const std::string& preset_name, double dt,
               std::size_t max_steps, std::size_t min_steps, const std::string& fmt, bool surface_set) {
  RunRecord rec("turing");
  const TuringPreset pr = turing_preset(preset_name);
  if (!surface_set) a.surface = pr.surface;
  if (!pr.note.empty()) std::fprintf(stderr, "warning: %s\n", pr.note.c_str());
  if (a.surface != pr.surface)
    std::fprintf(stderr, "warning: preset %s was tuned for %s, running on %s\n", pr.name.c_str(),
                 pr.surface.c_str(), a.surface.c_str());
  const Kernel k = kernel_or_default(kspec, a.surface);
  TuringOptions o;
  o.dt = dt;
  o.max_steps = max_steps;
  o.min_steps = min_steps;
  o.seed = c.seed;
  o.snap_every = c.snap_every;
  const TuringParams& p = pr.params;
  rec.config() = {{"preset", pr.name},   {"surface", a.surface},  {"nodes", a.nodes_file}, {"N", a.n},
                  {"seed", c.seed},      {"kernel", k.spec()},     {"dt", dt},              {"max_steps", max_steps},
                  {"min_steps", min_steps}, {"steady_tol", o.steady_tol}, {"strip_halfwidth", o.strip_halfwidth},
                  {"params", {{"delta_u", p.delta_u}, {"delta_v", p.delta_v}, {"alpha", p.alpha}, {"beta", p.beta},
                              {"gamma", p.gamma}, {"tau1", p.tau1}, {"tau2", p.tau2}}}};
  SurfaceOperators ops(k, obtain_nodes(a, c.seed));
  rec.mark("operators");
  const TuringResult r = run_turing(ops, p, o);
  rec.mark("run");
  const fs::path dir(c.out);
  write_snapshots(rec, dir, ops.nodes(), r.traj, dt, fmt);
  const fs::path fin = dir / ("u_final." + fmt);
  fmt == "ply" ? write_ply(fin, ops.nodes(), r.traj.final_u) : write_field_csv(fin, ops.nodes(), r.traj.final_u);
  rec.add_output(fin);
  rec.summary() = {{"steady", r.steady},   {"steps", r.traj.steps},     {"t", r.traj.final_time},
                   {"rate", r.last_rate},  {"std_u", r.std_u},          {"mean_u", r.mean_u},
                   {"sign_changes", r.sign_changes}, {"strip_nodes", r.strip_nodes},
                   {"factorizations", r.traj.factorizations}};
  rec.write(dir / "run.json");
  std::printf("%s on %s: %s after %zu steps (t=%.2f), std(u)=%.4e, sign changes=%zu\n", pr.name.c_str(),
              a.surface.c_str(), r.steady ? "steady" : "not steady", r.traj.steps, r.traj.final_time, r.std_u,
              r.sign_changes);
  return 0;
}

int cmd_spiral(const Common& c, const NodeArgs& a, const std::string& kspec, double dt, double tend,
               double delta_u, const std::string& fmt) {
  RunRecord rec("spiral");
  const Kernel k = kernel_or_default(kspec, a.surface);
  SpiralParams p = spiral_preset(a.surface);
  if (delta_u >= 0.0) p.delta_u = delta_u;
  SpiralOptions o;
  o.dt = dt;
  o.t_end = tend;
  o.snap_every = c.snap_every;
  rec.config() = {{"surface", a.surface}, {"nodes", a.nodes_file}, {"N", a.n},  {"seed", c.seed},
                  {"kernel", k.spec()},   {"dt", dt},              {"t_end", tend},
                  {"params", {{"a", p.a}, {"b", p.b}, {"alpha", p.alpha}, {"delta_u", p.delta_u}, {"delta_v", p.delta_v}}}};
  SurfaceOperators ops(k, obtain_nodes(a, c.seed));
  rec.mark("operators");
  const SpiralResult r = run_spiral(ops, p, o);
  rec.mark("run");
  const fs::path dir(c.out);
  write_snapshots(rec, dir, ops.nodes(), r.traj, dt, fmt);
  const fs::path fin = dir / ("u_final." + fmt);
  fmt == "ply" ? write_ply(fin, ops.nodes(), r.traj.final_u) : write_field_csv(fin, ops.nodes(), r.traj.final_u);
  rec.add_output(fin);
  rec.summary() = {{"steps", r.traj.steps}, {"u_min", r.u_min}, {"u_max", r.u_max},
                   {"tail_u_min", r.tail_u_min}, {"tail_u_max", r.tail_u_max},
                   {"probe_nodes", r.probe_nodes}, {"probe_variance", r.probe_variance},
                   {"mean_variance", r.mean_variance}};
  rec.write(dir / "run.json");
  std::printf("spiral on %s: u in [%.4f, %.4f], mean probe variance %.4e over the last 25%%\n", a.surface.c_str(),
              r.u_min, r.u_max, r.mean_variance);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Meshfree RBF surface operators and reaction-diffusion experiments"};
  app.require_subcommand(1);
  app.fallthrough();
  app.allow_config_extras(CLI::config_extras_mode::error);
  app.set_config("--config", "", "JSON object of option values for the subcommand; command-line flags override it");
  app.config_formatter(std::make_shared<JsonConfig>(&app));

  Common common;
  NodeArgs na_nodes, na_eigs, na_lap, na_tur, na_spi;
  std::string kspec, field, preset = "rbc-spots", fmt = "ply", nodes_dir, profile = "exp";
  std::string conv_surface = "torus", conv_kernel = "matern:nu=4,eps=4";
  std::vector<std::size_t> counts;
  double dt = 0.0, tend = 0.0, delta_u = -1.0;
  long eig_cap = 2500;
  std::size_t max_steps = 100000, min_steps = 0;

  auto* nodes = app.add_subcommand("nodes", "Generate a Riesz node set and save it as CSV");
  add_common(nodes, common, false);
  add_nodes(nodes, na_nodes, 1024);

  auto* eigs = app.add_subcommand("eigs", "Eigenvalues of the discrete surface Laplacian");
  add_common(eigs, common, false);
  add_nodes(eigs, na_eigs, 1024);
  eigs->add_option("--kernel", kspec, "Kernel spec, e.g. imq:eps=2.8 or matern:nu=4,eps=4 (default: IMQ per surface)");
  eigs->add_option("--eig-cap", eig_cap, "Largest N accepted by the eigensolver")->capture_default_str();

  auto* conv = app.add_subcommand("converge", "Forced-diffusion convergence table (BDF4, exact startup)");
  add_common(conv, common, false);
  conv->add_option("--surface", conv_surface, "sphere | torus")->capture_default_str();
  conv->add_option("--kernel", conv_kernel, "Kernel spec")->capture_default_str();
  conv->add_option("-N,--counts", counts, "Node counts (default: sphere 256,576,1024,2025; torus 500,1000,2000)")
      ->delimiter(',');
  conv->add_option("--dt", dt, "Time step (default 1e-3)");
  conv->add_option("--tend", tend, "Final time (default 0.2)");
  conv->add_option("--nodes-dir", nodes_dir, "Read nodes_<surface>_<N>.csv from this directory");
  conv->add_option("--sphere-profile", profile, "Sphere bump profile: exp = e^{-10 theta} (cusp at centers), "
                                                "gauss = e^{-10 theta^2}")
      ->check(CLI::IsMember({"exp", "gauss"}))
      ->capture_default_str();

  auto* lap = app.add_subcommand("laplacian-test", "Apply the discrete Laplacian to an analytic field");
  add_common(lap, common, false);
  add_nodes(lap, na_lap, 1024);
  lap->add_option("--kernel", kspec, "Kernel spec (default: IMQ per surface)");
  lap->add_option("--field", field, "sphere-z | sphere-gauss | sphere-smooth | torus-poly (default by surface)");

  auto* tur = app.add_subcommand("turing", "Turing pattern run (SBDF3) from a parameter preset");
  add_common(tur, common, true);
  add_nodes(tur, na_tur, 2000);
  tur->add_option("--kernel", kspec, "Kernel spec (default: IMQ per surface)");
  tur->add_option("--preset", preset, "rbc-spots | rbc-stripes | cyclide-spots | cyclide-stripes | "
                                      "bretzel2-spots | bretzel2-stripes | bumpy-spots | bumpy-stripes")
      ->capture_default_str();
  tur->add_option("--dt", dt, "Time step (default 0.01)");
  tur->add_option("--max-steps", max_steps, "Step limit")->capture_default_str();
  tur->add_option("--min-steps", min_steps, "No steady-state exit before this step")->capture_default_str();
  tur->add_option("--format", fmt, "Snapshot format")->check(CLI::IsMember({"ply", "csv"}))->capture_default_str();

  auto* spi = app.add_subcommand("spiral", "Spiral-wave run (SBDF3)");
  add_common(spi, common, true);
  add_nodes(spi, na_spi, 2000);
  spi->add_option("--kernel", kspec, "Kernel spec (default: IMQ per surface)");
  spi->add_option("--dt", dt, "Time step (default 0.02)");
  spi->add_option("--tend", tend, "Final time (default 45)");
  spi->add_option("--delta-u", delta_u, "Override delta_u (default: 1.5 (2pi/50)^2 sphere, 2.5 (2pi/50)^2 cyclide)");
  spi->add_option("--format", fmt, "Snapshot format")->check(CLI::IsMember({"ply", "csv"}))->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::fprintf(stderr, "rbfsurf: %s\n", e.what());
    return 2;
  }

  set_threads(common.threads);
  try {
    if (*nodes) return cmd_nodes(common, na_nodes);
    if (*eigs) return cmd_eigs(common, na_eigs, kspec, eig_cap);
    if (*conv) return cmd_converge(common, conv_surface, conv_kernel, counts, dt > 0 ? dt : 1e-3,
                                   tend > 0 ? tend : 0.2, nodes_dir, profile);
    if (*lap) return cmd_laplacian(common, na_lap, kspec, field);
    if (*tur)
      return cmd_turing(common, na_tur, kspec, preset, dt > 0 ? dt : 0.01, max_steps, min_steps, fmt,
                        tur->get_option("--surface")->count() > 0);
    if (*spi) return cmd_spiral(common, na_spi, kspec, dt > 0 ? dt : 0.02, tend > 0 ? tend : 45.0, delta_u, fmt);
  } catch (const InvalidArgument& e) {
    std::fprintf(stderr, "rbfsurf: %s\n", e.what());
    return 2;
  } catch (const Error& e) {
    std::fprintf(stderr, "rbfsurf: numerical failure: %s\n", e.what());
    return 3;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "rbfsurf: %s\n", e.what());
    return 3;
  }
  return 2;
}
