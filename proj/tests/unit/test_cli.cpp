#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "gstim/cli.hpp"

using namespace gstim;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

struct Scratch {
  fs::path dir;
  Scratch() : dir(fs::temp_directory_path() / "gstim_cli_test") {
    fs::remove_all(dir);
    fs::create_directories(dir);
  }
  ~Scratch() { fs::remove_all(dir); }

  std::string config(const std::string& name, json doc) {
    doc["output"] = {{"dir", (dir / name).string()}};
    const fs::path p = dir / (name + ".json");
    std::ofstream(p) << doc.dump();
    return p.string();
  }
};

struct Run {
  int code;
  std::string out, err;
};

Run run(std::vector<std::string> args) {
  args.insert(args.begin(), "gstim");
  std::vector<char*> argv;
  for (auto& a : args) argv.push_back(a.data());
  std::ostringstream out, err;
  const int code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

int config_error_kind(const json& doc) {
  try {
    parse_config(doc);
  } catch (const Error& e) {
    return static_cast<int>(e.kind());
  }
  return -1;
}

}  // namespace

TEST_CASE("config parsing") {
  const RunConfig c = parse_config(json{{"fixture", "sphere_in_r3"},
                                        {"grid", {{"samples", {11, 13}}}},
                                        {"perturbation", {{"alpha_scale", 1.1}}},
                                        {"tolerances", {{"check", 1e-7}}},
                                        {"seed", 9}});
  CHECK(c.fixture == "sphere_in_r3");
  CHECK(c.options.samples == std::vector<int>{11, 13});
  CHECK(c.options.alpha_scale == 1.1);
  CHECK(c.check_tol == 1e-7);
  CHECK(c.sampling.seed == 9);

  const int config_error = static_cast<int>(ErrorKind::ConfigError);
  CHECK(config_error_kind(json{{"fixture", "sphere_in_r3"}, {"colour", "red"}}) == config_error);
  CHECK(config_error_kind(json{{"fixture", 3}}) == config_error);
  CHECK(config_error_kind(json{{"seed", 1}}) == config_error);
  CHECK(config_error_kind(json{{"fixture", "sphere_in_r3"}, {"tolerances", {{"chek", 1e-3}}}}) == config_error);
}

TEST_CASE("models from JSON") {
  CHECK(model_from_json(json{{"family", "spaceform"}, {"c", 1}, {"dim", 3}}).dim == 3);
  const ModelSpace e = model_from_json(json{{"family", "ekappatau"}, {"kappa", -1}, {"tau", 0.5}});
  CHECK(e.kind == ModelKind::EKappaTau);
  CHECK(e.tau == 0.5);
  const ModelSpace p = model_from_json(
      json{{"family", "product"},
           {"children", {{{"family", "spaceform"}, {"c", -1}, {"dim", 2}}, {{"family", "spaceform"}, {"c", 0}, {"dim", 1}}}}});
  CHECK(p.dim == 3);
  CHECK(model_from_json(json{{"family", "liegroup"}, {"algebra", "heisenberg"}, {"parameter", 0.5}}).dim == 3);
  CHECK_THROWS_AS(model_from_json(json{{"family", "torus"}}), Error);
}

TEST_CASE("exit codes") {
  Scratch s;
  const auto good = s.config("good", {{"fixture", "flat_plane_in_r3"}});
  Run r = run({"check", good});
  CHECK(r.code == 0);
  CHECK(r.out.find("compatible") != std::string::npos);
  CHECK(fs::exists(s.dir / "good" / "report.json"));

  const auto bad = s.config("bad", {{"fixture", "sphere_in_r3"}, {"perturbation", {{"alpha_scale", 1.1}}}});
  r = run({"check", bad});
  CHECK(r.code == 1);
  CHECK(r.out.find("incompatible: gauss") != std::string::npos);
  CHECK(run({"solve", bad}).code == 1);

  const auto dims = s.config(
      "dims", {{"fixture", "sphere_in_r3"}, {"model", {{"family", "spaceform"}, {"c", 0}, {"dim", 4}}}});
  r = run({"check", dims});
  CHECK(r.code == 2);
  CHECK(r.err.find("ShapeError") != std::string::npos);

  CHECK(run({"check", (s.dir / "missing.json").string()}).code == 2);
  CHECK(run({"frobnicate"}).code == 2);
  CHECK(run({"solve", good, "--step-refine", "0"}).code == 2);
}

TEST_CASE("solve writes the mesh and reports") {
  Scratch s;
  const auto cfg = s.config("plane", {{"fixture", "flat_plane_in_r3"}});
  const Run r = run({"solve", cfg});
  REQUIRE(r.code == 0);
  for (const char* file : {"mesh.obj", "nodes.csv", "solution.json"}) CHECK(fs::exists(s.dir / "plane" / file));
  const json sol = json::parse(slurp(s.dir / "plane" / "solution.json"));
  CHECK(sol.contains("verification"));

  const std::string first = slurp(s.dir / "plane" / "nodes.csv");
  REQUIRE(run({"solve", cfg}).code == 0);
  CHECK(slurp(s.dir / "plane" / "nodes.csv") == first);
}

TEST_CASE("exported fields load back") {
  Scratch s;
  const auto cfg = s.config("exp", {{"fixture", "sphere_in_r3"}});
  REQUIRE(run({"export", cfg}).code == 0);
  const fs::path out = s.dir / "exp";
  json fields;
  for (const char* name : {"alpha0", "normal_connection", "frame"}) {
    const fs::path file = out / (std::string(name) + ".field");
    CHECK(fs::exists(file));
    fields[name] = file.string();
  }
  // Cubic interpolation limits the Codazzi families to about 1e-5 on this grid.
  const auto reuse = s.config("reuse", {{"fixture", "sphere_in_r3"}, {"fields", fields}});
  CHECK(run({"check", reuse, "--tol", "1e-4"}).code == 0);
  CHECK(run({"check", reuse, "--tol", "1e-6"}).code == 1);
  CHECK(run({"solve", reuse, "--tol", "1e-4"}).code == 0);
}

TEST_CASE("catalog") {
  Run r = run({"catalog", "--json"});
  REQUIRE(r.code == 0);
  const json j = json::parse(r.out);
  CHECK(j.contains("models"));
  CHECK(j.contains("structures"));
  r = run({"catalog"});
  CHECK(r.out.find("ekappatau") != std::string::npos);
  CHECK(run({"catalog", "--model", "ekappatau"}).code == 0);
  CHECK(run({"catalog", "--model", "torus"}).code == 2);
}
