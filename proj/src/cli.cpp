#include "gstim/cli.hpp"

#include <filesystem>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>

#include "CLI11.hpp"

namespace gstim {

using nlohmann::json;
using ojson = nlohmann::ordered_json;
namespace fs = std::filesystem;

namespace {

[[noreturn]] void config_error(const std::string& msg) { throw Error(ErrorKind::ConfigError, msg); }

void check_keys(const json& j, const std::set<std::string>& allowed, const std::string& where) {
  if (!j.is_object()) config_error(where + " must be an object");
  for (auto it = j.begin(); it != j.end(); ++it)
    if (!allowed.count(it.key())) config_error("unknown key '" + it.key() + "' in " + where);
}

template <class T>
T get(const json& j, const std::string& key, const std::string& where) {
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    config_error("missing or malformed '" + key + "' in " + where);
  }
}

template <class T>
T get_or(const json& j, const std::string& key, T fallback, const std::string& where) {
  return j.contains(key) ? get<T>(j, key, where) : fallback;
}

Eigen::MatrixXd matrix_from_json(const json& j, const std::string& where) {
  if (!j.is_array() || j.empty() || !j[0].is_array()) config_error(where + " must be a non-empty array of rows");
  const auto rows = j.size(), cols = j[0].size();
  Eigen::MatrixXd m(rows, cols);
  for (size_t r = 0; r < rows; ++r) {
    if (!j[r].is_array() || j[r].size() != cols) config_error(where + " has ragged rows");
    for (size_t c = 0; c < cols; ++c) {
      if (!j[r][c].is_number()) config_error(where + " must hold numbers");
      m(static_cast<int>(r), static_cast<int>(c)) = j[r][c].get<double>();
    }
  }
  return m;
}

std::vector<double> to_vector(const VecN& v) { return {v.data(), v.data() + v.size()}; }

/// Exit code for a library error: configuration problems are 2, everything
/// that fails on the mathematics is 1.
int exit_code(const Error& e) {
  switch (e.kind()) {
    case ErrorKind::ConfigError:
    case ErrorKind::ShapeError:
    case ErrorKind::SpecViolation:
    case ErrorKind::UnsupportedModel:
    case ErrorKind::DegenerateForm:
    case ErrorKind::OutOfDomain:
      return 2;
    default:
      return 1;
  }
}

template <class F>
int guarded(std::ostream& err, F&& body) {
  try {
    return body();
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return exit_code(e);
  } catch (const json::exception& e) {
    err << "error: ConfigError: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
}

fs::path prepare_out(const RunConfig& c) {
  std::error_code ec;
  fs::create_directories(c.out_dir, ec);
  if (ec) config_error("cannot create output directory '" + c.out_dir + "'");
  return fs::path(c.out_dir);
}

void write_json(const fs::path& path, const ojson& j) {
  std::ofstream os(path);
  if (!os) config_error("cannot write '" + path.string() + "'");
  os << j.dump(2) << "\n";
}

ojson grid_json(const ChartGrid& g) {
  ojson j;
  j["min"] = to_vector(g.coord_min());
  j["max"] = to_vector(g.coord_max());
  j["samples"] = g.samples();
  return j;
}

}  // namespace

// ------------------------------------------------------------------ config

ModelSpace model_from_json(const json& j) {
  const std::string where = "model";
  if (!j.is_object()) config_error("model must be an object");
  const std::string family = get<std::string>(j, "family", where);
  ModelSpace m;
  if (family == "spaceform" || family == "complexspaceform") {
    check_keys(j, {"family", "c", "dim", "index"}, where);
    const double c = get<double>(j, "c", where);
    const int dim = get<int>(j, "dim", where);
    const int index = get_or<int>(j, "index", 0, where);
    m = family == "spaceform" ? ModelSpace::space_form(c, dim, index) : ModelSpace::complex_space_form(c, dim, index);
  } else if (family == "liegroup") {
    check_keys(j, {"family", "algebra", "parameter"}, where);
    m = ModelSpace::lie_group(
        named_lie_algebra(get<std::string>(j, "algebra", where), get_or<double>(j, "parameter", 0.0, where)));
  } else if (family == "ekappatau") {
    check_keys(j, {"family", "kappa", "tau"}, where);
    m = ModelSpace::e_kappa_tau(get<double>(j, "kappa", where), get<double>(j, "tau", where));
  } else if (family == "product") {
    check_keys(j, {"family", "children"}, where);
    if (!j.contains("children") || !j["children"].is_array() || j["children"].size() < 2)
      config_error("product model needs at least two children");
    std::vector<ModelSpace> ch;
    for (const auto& c : j["children"]) ch.push_back(model_from_json(c));
    m = ModelSpace::product(std::move(ch));
  } else {
    config_error("unknown model family '" + family + "'");
  }
  validate_model(m);
  return m;
}

RunConfig parse_config(const json& doc) {
  check_keys(doc, {"fixture", "grid", "perturbation", "model", "structure", "fields", "initial", "tolerances",
                   "sampling", "integration", "seed", "force", "output"},
             "config");
  RunConfig c;
  c.fixture = get<std::string>(doc, "fixture", "config");
  if (doc.contains("grid")) {
    check_keys(doc["grid"], {"samples"}, "grid");
    c.options.samples = get<std::vector<int>>(doc["grid"], "samples", "grid");
  }
  if (doc.contains("perturbation")) {
    const json& p = doc["perturbation"];
    check_keys(p, {"alpha_scale", "alpha_bump", "alpha_antisym", "normal_twist"}, "perturbation");
    c.options.alpha_scale = get_or<double>(p, "alpha_scale", 1.0, "perturbation");
    c.options.alpha_bump = get_or<double>(p, "alpha_bump", 0.0, "perturbation");
    c.options.alpha_antisym = get_or<double>(p, "alpha_antisym", 0.0, "perturbation");
    c.options.normal_twist = get_or<double>(p, "normal_twist", 0.0, "perturbation");
  }
  if (doc.contains("model")) c.model = doc["model"];
  if (doc.contains("structure")) c.structure = get<std::string>(doc, "structure", "config");
  if (doc.contains("fields")) {
    const json& f = doc["fields"];
    check_keys(f, {"alpha0", "normal_connection", "frame"}, "fields");
    c.alpha0_file = get_or<std::string>(f, "alpha0", "", "fields");
    c.normal_connection_file = get_or<std::string>(f, "normal_connection", "", "fields");
    c.frame_file = get_or<std::string>(f, "frame", "", "fields");
  }
  if (doc.contains("initial")) {
    const json& i = doc["initial"];
    check_keys(i, {"origin", "sigma0"}, "initial");
    c.origin = get_or<std::vector<int>>(i, "origin", {}, "initial");
    if (i.contains("sigma0")) {
      if (i["sigma0"].is_string()) {
        c.sigma0 = i["sigma0"].get<std::string>();
        if (c.sigma0 != "canonical" && c.sigma0 != "exact") config_error("sigma0 must be canonical, exact or a matrix");
      } else {
        c.sigma0 = "matrix";
        c.sigma0_matrix = matrix_from_json(i["sigma0"], "sigma0");
      }
    }
  }
  if (doc.contains("tolerances")) {
    const json& t = doc["tolerances"];
    check_keys(t, {"check", "gate", "verify", "structure"}, "tolerances");
    c.check_tol = get_or<double>(t, "check", c.check_tol, "tolerances");
    c.gate_tol = get_or<double>(t, "gate", c.gate_tol, "tolerances");
    c.verify_tol = get_or<double>(t, "verify", c.verify_tol, "tolerances");
    c.structure_tol = get_or<double>(t, "structure", c.structure_tol, "tolerances");
  }
  if (doc.contains("sampling")) {
    const json& s = doc["sampling"];
    check_keys(s, {"random_per_node", "margin", "stride"}, "sampling");
    c.sampling.random_per_node = get_or<int>(s, "random_per_node", c.sampling.random_per_node, "sampling");
    c.sampling.margin = get_or<int>(s, "margin", c.sampling.margin, "sampling");
    c.sampling.stride = get_or<int>(s, "stride", c.sampling.stride, "sampling");
  }
  if (doc.contains("integration")) {
    check_keys(doc["integration"], {"refine"}, "integration");
    c.refine = get_or<int>(doc["integration"], "refine", 2, "integration");
  }
  c.sampling.seed = get_or<std::uint64_t>(doc, "seed", 0, "config");
  c.force = get_or<bool>(doc, "force", false, "config");
  if (doc.contains("output")) {
    check_keys(doc["output"], {"dir"}, "output");
    c.out_dir = get<std::string>(doc["output"], "dir", "output");
  }
  if (c.refine < 1) config_error("integration.refine must be at least 1");
  if (c.sampling.random_per_node < 0 || c.sampling.margin < 0 || c.sampling.stride < 1)
    config_error("sampling values out of range");
  return c;
}

RunConfig load_config(const std::string& path) {
  std::ifstream is(path);
  if (!is) config_error("cannot read config '" + path + "'");
  json doc;
  try {
    doc = json::parse(is);
  } catch (const json::exception& e) {
    config_error(std::string("config is not valid JSON: ") + e.what());
  }
  return parse_config(doc);
}

Fixture build_fixture(const RunConfig& config) {
  Fixture f = make_fixture(config.fixture, config.options);
  WhitneyData& d = f.problem.data;
  if (!config.alpha0_file.empty()) {
    d.alpha0 = load_grid_field(config.alpha0_file);
    if (!d.g || !d.g0) config_error("an alpha0 file needs both metrics to recover the Weingarten form");
    d.a0 = weingarten_field(*d.g, *d.g0, d.alpha0);
  }
  if (!config.normal_connection_file.empty())
    d.normal_conn = ConnectionField(d.dim(), d.normal_rank(), load_grid_field(config.normal_connection_file));
  if (!config.frame_file.empty()) f.frame = load_grid_field(config.frame_file);
  if (!config.alpha0_file.empty() || !config.normal_connection_file.empty()) validate_whitney(d);
  if (config.model) {
    f.problem.model = model_from_json(*config.model);
    f.exact_point = nullptr;
    f.exact_state = nullptr;
  }
  if (config.structure && structure_kind_from_name(*config.structure) != f.problem.spec.kind)
    config_error("structure '" + *config.structure + "' does not match the fixture's variant '" +
                 structure_kind_name(f.problem.spec.kind) + "'");
  if (config.options.samples.empty() && !config.origin.empty() &&
      static_cast<int>(config.origin.size()) != f.grid.dim())
    config_error("origin has the wrong dimension");
  validate_problem(f.problem, f.grid.node(0));
  return f;
}

// ------------------------------------------------------------------ check

int cmd_check(const RunConfig& config, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const Fixture f = build_fixture(config);
    const ResidualReport rep = full_report(f.problem, f.grid, config.sampling);
    const auto bad = rep.violations(config.check_tol);
    ojson j;
    j["fixture"] = f.name;
    j["model"] = f.problem.model.describe();
    j["structure"] = structure_kind_name(f.problem.spec.kind);
    j["grid"] = grid_json(f.grid);
    j["tolerance"] = config.check_tol;
    j["passed"] = bad.empty();
    j["violations"] = bad;
    j["report"] = rep.to_json();
    const fs::path dir = prepare_out(config);
    write_json(dir / "report.json", j);

    char line[160];
    out << "check " << f.name << " on " << f.problem.model.describe() << "\n";
    for (const auto& fam : rep.families) {
      std::snprintf(line, sizeof line, "  %-20s max %.3e  rms %.3e  %s\n", fam.name.c_str(), fam.max, fam.rms,
                    fam.max <= config.check_tol ? "ok" : "VIOLATED");
      out << line;
    }
    out << (bad.empty() ? "compatible" : "incompatible: " + bad.front()) << " (tol " << config.check_tol << ")\n";
    return bad.empty() ? 0 : 1;
  });
}

// ------------------------------------------------------------------ solve

int cmd_solve(const RunConfig& config, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const Fixture f = build_fixture(config);
    const LambdaField lambda(f.problem, f.frame);
    const auto target = realize_target(f.problem.model);

    SolveOptions so;
    so.origin = config.origin;
    if (so.origin.empty())
      for (int s : f.grid.samples()) so.origin.push_back(s / 2);
    so.integration.refine = config.refine;
    so.force = config.force;
    so.residual_gate = config.gate_tol;
    so.gate_plan.seed = config.sampling.seed;
    const VecN x0 = f.grid.node(so.origin);
    if (config.sigma0 == "exact") {
      if (!f.exact_state) config_error("fixture '" + f.name + "' has no exact state for sigma0 = exact");
      so.initial_state = f.exact_state(x0);
    } else if (config.sigma0 == "matrix") {
      so.sigma0 = config.sigma0_matrix;
    }
    if (!so.initial_state) {
      // Every frame in the structure is admissible at x0; reject others early.
      build_lambda(lambda, x0, VecN::Zero(f.grid.dim()));
    }

    const ImmersionSolution sol = solve_grid(lambda, *target, f.grid, so);
    const VerificationReport& v = sol.verification;
    const double geometric = v.has_pullback ? v.pullback : v.differential;

    ojson j;
    j["fixture"] = f.name;
    j["model"] = f.problem.model.describe();
    j["realization"] = target->name();
    j["grid"] = grid_json(f.grid);
    j["origin"] = sol.origin;
    j["sigma0"] = config.sigma0;
    j["refine"] = config.refine;
    j["forced"] = config.force;
    j["reprojected"] = sol.reprojected;
    ojson vj;
    vj["differential"] = v.differential;
    if (v.has_pullback) vj["pullback"] = v.pullback;
    vj["alpha_recovery"] = v.alpha_recovery;
    vj["theta_recovery"] = v.theta_recovery;
    vj["structure"] = v.structure;
    j["verification"] = vj;

    if (f.exact_point) {
      const int count = f.grid.node_count();
      const int pd = static_cast<int>(sol.points[0].size());
      Eigen::MatrixXd a(pd, count), b(pd, count);
      for (int i = 0; i < count; ++i) {
        a.col(i) = sol.points[i];
        b.col(i) = f.exact_point(f.grid.node(i));
      }
      // Other starts differ from the closed form by an isometry of the
      // target, which is only factored out for Euclidean and spherical targets.
      ojson ej;
      if (config.sigma0 == "exact") ej["direct"] = max_abs(a - b);
      const ModelSpace& m = f.problem.model;
      if (m.kind == ModelKind::SpaceForm && m.curvature >= 0.0 && m.index == 0) {
        const RigidAlignment al = kabsch_align(a, b);
        ej["aligned_max"] = al.max_error;
        ej["aligned_rms"] = al.rms_error;
      }
      if (!ej.empty()) j["exact_error"] = ej;
    }

    const fs::path dir = prepare_out(config);
    export_obj((dir / "mesh.obj").string(), sol, *target);
    export_csv((dir / "nodes.csv").string(), sol, *target);
    const bool ok = geometric <= config.verify_tol && v.structure <= config.structure_tol;
    j["passed"] = ok;
    write_json(dir / "solution.json", j);

    char line[160];
    out << "solve " << f.name << " in " << f.problem.model.describe() << " via " << target->name() << "\n";
    std::snprintf(line, sizeof line, "  %s %.3e  structure %.3e  alpha %.3e\n",
                  v.has_pullback ? "pullback" : "differential", geometric, v.structure, v.alpha_recovery);
    out << line;
    if (j.contains("exact_error")) {
      const ojson& ej = j["exact_error"];
      if (ej.contains("direct")) {
        std::snprintf(line, sizeof line, "  exact error %.3e\n", ej["direct"].get<double>());
        out << line;
      }
      if (ej.contains("aligned_max")) {
        std::snprintf(line, sizeof line, "  exact error after rigid alignment %.3e\n", ej["aligned_max"].get<double>());
        out << line;
      }
    }
    out << (ok ? "verified" : "verification failed") << "; wrote mesh.obj, nodes.csv, solution.json\n";
    return ok ? 0 : 1;
  });
}

// ----------------------------------------------------------------- export

int cmd_export(const RunConfig& config, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const Fixture f = build_fixture(config);
    // Up to two extra nodes per side keep derivative stencils of the sampled
    // fields inside their grid on the original nodes, as far as the closed
    // forms are defined there.
    const ChartGrid& g = f.grid;
    const WhitneyData& d = f.problem.data;
    const std::vector<std::pair<std::string, MatrixField>> fields{
        {"alpha0", d.alpha0}, {"normal_connection", d.normal_conn.field()}, {"frame", f.frame}};
    VecN lo = g.coord_min(), hi = g.coord_max();
    std::vector<int> samples = g.samples();
    for (int a = 0; a < g.dim(); ++a) {
      const double h = g.spacing(a);
      int below = 2, above = 2;
      for (const auto& [name, field] : fields) {
        below = std::min(below, static_cast<int>(std::floor((g.coord_min()(a) - field.domain_min()(a)) / h + 1e-9)));
        above = std::min(above, static_cast<int>(std::floor((field.domain_max()(a) - g.coord_max()(a)) / h + 1e-9)));
      }
      below = std::max(below, 0);
      above = std::max(above, 0);
      lo(a) -= below * h;
      hi(a) += above * h;
      samples[a] += below + above;
    }
    const ChartGrid wide(lo, hi, samples);
    auto sample = [&](const MatrixField& field, const std::string& name) {
      std::vector<Eigen::MatrixXd> values;
      for (int i = 0; i < wide.node_count(); ++i) values.push_back(field(wide.node(i)));
      return MatrixField::grid_sampled(wide, std::move(values), 3, name);
    };
    const fs::path dir = prepare_out(config);
    for (const auto& [name, field] : fields) {
      const fs::path path = dir / (name + ".field");
      save_grid_field(path.string(), sample(field, name));
      out << "wrote " << path.filename().string() << "\n";
    }
    return 0;
  });
}

// ---------------------------------------------------------------- catalog

namespace {

struct FamilyInfo {
  std::string tag, name;
  std::vector<std::pair<std::string, std::string>> params;
  std::string constraint, structure, curvature;
};

const std::vector<FamilyInfo>& families() {
  static const std::vector<FamilyInfo> list{
      {"spaceform", "SpaceForm",
       {{"c", "real, sectional curvature"}, {"dim", "integer >= 1"}, {"index", "integer, 0 <= index <= dim"}},
       "none",
       "orthonormal",
       "R(v,w)z = c (g(w,z) v - g(v,z) w); T = 0; inner torsion 0"},
      {"complexspaceform", "ComplexSpaceForm",
       {{"c", "real, holomorphic sectional curvature"}, {"dim", "even integer >= 2"}, {"index", "even integer"}},
       "dim even; indefinite with c != 0 unsupported",
       "unitary",
       "R(v,w)z = (c/4)(g(w,z) v - g(v,z) w + g(Jw,z) Jv - g(Jv,z) Jw + 2 g(v,Jw) Jz); T = 0"},
      {"liegroup", "LieGroupLeftInvariant",
       {{"algebra", "heisenberg | so3 | abelian | affine_line"}, {"parameter", "real (tau, or dimension for abelian)"}},
       "Jacobi identity",
       "trivial_frame",
       "left-invariant Levi-Civita: inner torsion In(u) = Gamma(u); T = 0; R from brackets"},
      {"ekappatau", "EKappaTau",
       {{"kappa", "real, base curvature"}, {"tau", "real, bundle curvature"}},
       "dim = 3",
       "oriented_unit_vector_3d",
       "R(v,w)z = (kappa - 3 tau^2)(g(w,z) v - g(v,z) w) - (kappa - 4 tau^2)(terms in the vertical field xi); "
       "inner torsion In(u) = tau u x xi"},
      {"product", "Product",
       {{"children", "array of at least two models"}},
       "dim = sum of children",
       "product",
       "block direct sum of the children's tensors"},
  };
  return list;
}

std::string structure_parameters(StructureKind k) {
  switch (k) {
    case StructureKind::TrivialFrame: return "frame";
    case StructureKind::Orthonormal: return "form, index";
    case StructureKind::Subbundle: return "subspace";
    case StructureKind::AdaptedOrthonormal: return "form, index, subspace, subspace_index";
    case StructureKind::UnitSection: return "unit, optional form and index";
    case StructureKind::AlmostComplex: return "complex";
    case StructureKind::Unitary: return "form, index, complex";
    case StructureKind::OrientedUnitVector3D: return "form, unit, orientation";
    case StructureKind::Product: return "split, children";
  }
  return "";
}

ojson family_json(const FamilyInfo& f) {
  ojson j;
  j["family"] = f.tag;
  j["name"] = f.name;
  ojson p = ojson::object();
  for (const auto& [k, v] : f.params) p[k] = v;
  j["parameters"] = p;
  j["constraint"] = f.constraint;
  j["structure"] = f.structure;
  j["curvature"] = f.curvature;
  return j;
}

}  // namespace

int cmd_catalog(const std::string& model, bool as_json, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    std::vector<FamilyInfo> shown;
    for (const auto& f : families())
      if (model.empty() || f.tag == model) shown.push_back(f);
    if (shown.empty()) config_error("unknown model family '" + model + "'");
    if (as_json) {
      ojson j;
      ojson fams = ojson::array();
      for (const auto& f : shown) fams.push_back(family_json(f));
      j["models"] = fams;
      if (model.empty()) {
        ojson vars = ojson::array();
        for (StructureKind k : primitive_structure_kinds()) {
          ojson v;
          v["variant"] = structure_kind_name(k);
          v["parameters"] = structure_parameters(k);
          vars.push_back(v);
        }
        j["structures"] = vars;
        j["combinators"] = {{{"variant", "product"}, {"parameters", structure_parameters(StructureKind::Product)}}};
      }
      out << j.dump(2) << "\n";
      return 0;
    }
    out << "model families (" << shown.size() << ")\n";
    for (const auto& f : shown) {
      out << "  " << f.tag << "  " << f.name << "\n";
      for (const auto& [k, v] : f.params) out << "      " << k << ": " << v << "\n";
      out << "      constraint: " << f.constraint << "\n";
      out << "      structure: " << f.structure << "\n";
      if (!model.empty()) out << "      curvature: " << f.curvature << "\n";
    }
    if (model.empty()) {
      out << "G-structure variants (" << primitive_structure_kinds().size() << ")\n";
      for (StructureKind k : primitive_structure_kinds())
        out << "  " << structure_kind_name(k) << "  [" << structure_parameters(k) << "]\n";
      out << "combinator\n  product  [" << structure_parameters(StructureKind::Product) << "]\n";
      out << "fixtures\n";
      for (const auto& n : fixture_names()) out << "  " << n << "\n";
    }
    return 0;
  });
}

// -------------------------------------------------------------------- main

int run_cli(int argc, char** argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Isometric immersions into homogeneous model spaces via G-structures"};
  app.require_subcommand(1);

  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<double> tol;
  std::optional<std::string> out_dir;
  std::optional<int> refine;
  bool force = false;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("config", config_path, "JSON run configuration")->required();
    sub->add_option("--seed", seed, "seed for random residual tuples");
    sub->add_option("--tol", tol, "residual tolerance");
    sub->add_option("--out", out_dir, "output directory");
  };
  CLI::App* check = app.add_subcommand("check", "evaluate the compatibility residuals");
  add_common(check);
  CLI::App* solve = app.add_subcommand("solve", "integrate the immersion and export the mesh");
  add_common(solve);
  solve->add_flag("--force", force, "solve even if the residual gate fails");
  solve->add_option("--step-refine", refine, "RK4 steps per grid edge");
  CLI::App* exp = app.add_subcommand("export", "write the configured fields as grid-sampled field files");
  add_common(exp);
  std::string model;
  bool as_json = false;
  CLI::App* catalog = app.add_subcommand("catalog", "list model spaces and G-structure variants");
  catalog->add_option("--model", model, "show one model family");
  catalog->add_flag("--json", as_json, "machine-readable output");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    for (const CLI::App* sub : {check, solve, exp, catalog})
      if (sub->parsed()) {
        out << sub->help();
        return 0;
      }
    out << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  }

  if (catalog->parsed()) return cmd_catalog(model, as_json, out, err);

  RunConfig config;
  try {
    config = load_config(config_path);
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  }
  if (seed) config.sampling.seed = *seed;
  if (tol) config.check_tol = config.gate_tol = *tol;
  if (out_dir) config.out_dir = *out_dir;
  if (refine) {
    if (*refine < 1) {
      err << "error: --step-refine must be at least 1\n";
      return 2;
    }
    config.refine = *refine;
  }
  if (force) config.force = true;

  if (check->parsed()) return cmd_check(config, out, err);
  if (solve->parsed()) return cmd_solve(config, out, err);
  return cmd_export(config, out, err);
}

}  // namespace gstim
