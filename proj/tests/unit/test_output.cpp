#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "rbfsurf/error.hpp"
#include "rbfsurf/output.hpp"

using namespace rbfsurf;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path d = fs::temp_directory_path() / "rbfsurf_test_output";
  fs::remove_all(d / name);
  return d / name;
}

std::vector<std::string> lines(const fs::path& p) {
  std::ifstream in(p);
  std::vector<std::string> out;
  for (std::string s; std::getline(in, s);) out.push_back(s);
  return out;
}

NodeSet three() {
  NodeSet ns;
  ns.points = {Vec3(1, 0, 0), Vec3(0, 1, 0), Vec3(0, 0, 1)};
  ns.normals = ns.points;
  return ns;
}

}  // namespace

TEST_CASE("field csv round trips values") {
  const NodeSet ns = three();
  const Vector u = Vector::LinSpaced(3, 0.1, 1.0 / 3.0);
  const fs::path p = scratch("csv") / "deep" / "u.csv";
  write_field_csv(p, ns, u);
  const auto l = lines(p);
  REQUIRE(l.size() == 4);
  CHECK(l[0] == "x,y,z,u");
  for (int i = 0; i < 3; ++i) {
    std::istringstream row(l[static_cast<std::size_t>(i + 1)]);
    std::string cell;
    std::vector<double> v;
    while (std::getline(row, cell, ',')) v.push_back(std::stod(cell));
    REQUIRE(v.size() == 4);
    CHECK(v[3] == u[i]);  // 17 significant digits round trip exactly
    CHECK(Vec3(v[0], v[1], v[2]) == ns.points[static_cast<std::size_t>(i)]);
  }
  CHECK_THROWS_AS(write_field_csv(p, ns, Vector::Zero(2)), InvalidArgument);
}

TEST_CASE("ply header and vertex count") {
  const NodeSet ns = three();
  const fs::path p = scratch("ply") / "u.ply";
  write_ply(p, ns, Vector::Ones(3));
  const auto l = lines(p);
  REQUIRE(l.size() == 8 + 3);
  CHECK(l[0] == "ply");
  CHECK(l[1] == "format ascii 1.0");
  CHECK(l[2] == "element vertex 3");
  CHECK(l[6] == "property double u");
  CHECK(l[7] == "end_header");
  CHECK(l[10] == "0 0 1 1");
}

TEST_CASE("convergence table output") {
  ConvergenceTable t;
  t.rows = {{100, 0.3, 1e-2, 2e-2, false, ""}, {400, 0.15, 1e-3, 2e-3, false, ""}, {900, 0.1, 0, 0, true, "boom"}};
  t.l2_rate = 3.3;
  t.linf_rate = std::nan("");
  const fs::path p = scratch("conv") / "c.csv";
  write_convergence_csv(p, t);
  const auto l = lines(p);
  REQUIRE(l.size() == 4);
  CHECK(l[0] == "N,h,l2,linf");
  CHECK(l[3] == "900,0.10000000000000001,nan,nan");
  const Json j = convergence_json(t);
  CHECK(j["rows"].size() == 3);
  CHECK(j["rows"][2]["error"] == "boom");
  CHECK(j["rows"][2]["l2"].is_null());
  CHECK(j["l2_rate"] == 3.3);
  CHECK(j["linf_rate"].is_null());
}

TEST_CASE("spectrum output") {
  SpectrumReport r;
  r.eigenvalues = {{-1.0, 2.0}, {-1.0, -2.0}, {-3.0, 0.0}};
  r.max_real = -1.0;
  r.max_abs = 3.0;
  r.kernel = "imq:eps=2.8";
  r.n = 3;
  r.epsilon = 2.8;
  r.surface = "sphere";
  const fs::path p = scratch("spec") / "s.csv";
  write_spectrum_csv(p, r);
  CHECK(lines(p).size() == 4);
  const Json j = spectrum_json(r);
  CHECK(j["left_half_plane"] == true);
  CHECK(j["conjugate_defect"] == 0.0);
  CHECK(j["N"] == 3);
}

TEST_CASE("run record manifest") {
  const fs::path d = scratch("rec");
  RunRecord rec("nodes");
  rec.config()["seed"] = 7;
  rec.summary()["h"] = 0.5;
  rec.add_diagnostic({{"step", 1}});
  rec.add_snapshot(10, 0.1, d / "u_0000010.csv");
  rec.mark("build");
  rec.write(d / "run.json");
  std::ifstream in(d / "run.json");
  const Json j = Json::parse(in);
  CHECK(j["command"] == "nodes");
  CHECK(j["config"]["seed"] == 7);
  CHECK(j["summary"]["h"] == 0.5);
  CHECK(j["diagnostics"].size() == 1);
  CHECK(j["snapshots"][0]["step"] == 10);
  CHECK(j["timings"]["build"].get<double>() >= 0.0);
  REQUIRE(j["outputs"].size() == 2);
  CHECK(j["outputs"][1] == (d / "run.json").string());
  // key order is preserved
  CHECK(j.begin().key() == "command");
}
