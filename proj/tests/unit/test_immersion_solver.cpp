#include <filesystem>
#include <fstream>

#include "doctest.h"
#include "gstim/fixtures.hpp"
#include "gstim/immersion_solver.hpp"
#include "oracles.hpp"

using namespace gstim;
using Mat = Eigen::MatrixXd;

namespace {

struct Setup {
  Fixture fixture;
  std::unique_ptr<TargetRealization> target;
  LambdaField lambda;

  explicit Setup(const std::string& name, FixtureOptions opt = {})
      : fixture(make_fixture(name, opt)),
        target(realize_target(fixture.problem.model)),
        lambda(fixture.problem, fixture.frame) {}
};

FixtureOptions sized(int n) {
  FixtureOptions o;
  o.samples = {n, n};
  return o;
}

// Coarse grids need RK4 substeps to stay within the drift limit.
SolveOptions refined(int refine) {
  SolveOptions o;
  o.integration.refine = refine;
  return o;
}

SolveOptions exact_start(const Setup& s, const std::vector<int>& origin, int refine = 1) {
  SolveOptions o = refined(refine);
  o.origin = origin;
  o.initial_state = s.fixture.exact_state(s.fixture.grid.node(origin));
  return o;
}

double point_error(const Setup& s, const ImmersionSolution& sol) {
  double e = 0.0;
  for (int i = 0; i < sol.grid.node_count(); ++i)
    e = std::max(e, max_abs(sol.points[i] - s.fixture.exact_point(sol.grid.node(i))));
  return e;
}

}  // namespace

TEST_CASE("lambda of an adapted frame is admissible") {
  Setup s("sphere_in_r3", sized(11));
  std::mt19937_64 rng(41);
  for (int t = 0; t < 5; ++t) {
    const VecN x = s.fixture.grid.node(static_cast<int>(rng() % s.fixture.grid.node_count()));
    const VecN v = oracle::random_vector(rng, 2);
    CHECK(s.lambda.frame_defect(x) < 1e-12);
    CHECK(s.lambda.admissibility_defect(x, v) < 1e-9);
    const LambdaValue l = build_lambda(s.lambda, x, v);
    CHECK(l.theta.size() == 3);
    CHECK(l.omega.rows() == 3);
  }
}

TEST_CASE("a frame off the structure is rejected") {
  Fixture f = make_fixture("sphere_in_r3", sized(11));
  const MatrixField bad = f.frame.derived(3, 3, [fr = f.frame](const VecN& x) { return Mat(2.0 * fr(x)); });
  LambdaField lambda(f.problem, bad);
  try {
    build_lambda(lambda, f.grid.node(0), VecN::Unit(2, 0));
    FAIL("expected FrameNotInStructure");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::FrameNotInStructure);
  }
}

TEST_CASE("exact immersions are recovered") {
  for (const char* name : {"flat_plane_in_r3", "sphere_in_r3", "clifford_torus_in_s3", "cylinder_in_nil3"}) {
    CAPTURE(name);
    Setup s(name);
    std::vector<int> origin;
    for (int n : s.fixture.grid.samples()) origin.push_back(n / 2);
    const ImmersionSolution sol = solve_grid(s.lambda, *s.target, s.fixture.grid, exact_start(s, origin));
    CHECK(point_error(s, sol) < 1e-5);
    CHECK(sol.verification.structure < 1e-7);
    CHECK(sol.verification.pullback < 1e-5);
  }
}

TEST_CASE("convergence under refinement") {
  Setup coarse("sphere_in_r3", sized(11)), fine("sphere_in_r3", sized(21));
  const double ec = point_error(coarse, solve_grid(coarse.lambda, *coarse.target, coarse.fixture.grid,
                                                    exact_start(coarse, {5, 5}, 4)));
  const double ef =
      point_error(fine, solve_grid(fine.lambda, *fine.target, fine.fixture.grid, exact_start(fine, {10, 10}, 4)));
  CHECK(ec / ef > 8.0);
}

TEST_CASE("the residual gate stops incompatible data") {
  FixtureOptions opt = sized(11);
  opt.alpha_scale = 1.1;
  Setup s("sphere_in_r3", opt);
  try {
    solve_grid(s.lambda, *s.target, s.fixture.grid, refined(4));
    FAIL("expected ResidualGate");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::ResidualGate);
  }
  SolveOptions forced = refined(4);
  forced.force = true;
  const ImmersionSolution sol = solve_grid(s.lambda, *s.target, s.fixture.grid, forced);
  CHECK(sol.verification.pullback > 1e-3);
  CHECK(uniqueness_check(s.lambda, *s.target, s.fixture.grid, forced) > 1e-3);
}

TEST_CASE("holonomy vanishes on compatible data and grows with the defect") {
  Setup s("clifford_torus_in_s3", sized(11));
  CHECK(holonomy_scan(s.lambda, *s.target, s.fixture.grid, 3, refined(4).integration).max < 1e-5);
  FixtureOptions opt = sized(11);
  opt.alpha_scale = 1.1;
  Setup bad("clifford_torus_in_s3", opt);
  CHECK(holonomy_scan(bad.lambda, *bad.target, bad.fixture.grid, 3, refined(4).integration).max > 1e-2);
}

TEST_CASE("sweep order does not matter on compatible data") {
  Setup s("clifford_torus_in_s3");
  CHECK(uniqueness_check(s.lambda, *s.target, s.fixture.grid) < 1e-7);
}

TEST_CASE("Kabsch alignment") {
  std::mt19937_64 rng(42);
  const Mat pts = oracle::random_matrix(rng, 3, 12);
  Mat rot = orthonormalize(Mat::Identity(3, 3), oracle::random_matrix(rng, 3, 3), 3);
  if (rot.determinant() < 0) rot.col(0) *= -1.0;
  VecN shift(3);
  shift << 0.5, -1.0, 2.0;
  const Mat moved = (rot * pts).colwise() + shift;
  const RigidAlignment a = kabsch_align(pts, moved, true);
  CHECK(a.max_error < 1e-12);
  CHECK(max_abs(a.rotation - rot) < 1e-12);
  CHECK(max_abs(a.translation - shift) < 1e-12);

  Mat mirror = Mat::Identity(3, 3);
  mirror(2, 2) = -1.0;
  const Mat reflected = mirror * pts;
  CHECK(kabsch_align(pts, reflected).max_error < 1e-12);
  CHECK(kabsch_align(pts, reflected, true).max_error > 1e-3);
}

TEST_CASE("exports") {
  Setup s("sphere_in_r3", sized(5));
  const ImmersionSolution sol = solve_grid(s.lambda, *s.target, s.fixture.grid, exact_start(s, {2, 2}, 16));
  const auto dir = std::filesystem::temp_directory_path() / "gstim_export_test";
  std::filesystem::create_directories(dir);
  export_obj((dir / "m.obj").string(), sol, *s.target);
  export_csv((dir / "n.csv").string(), sol, *s.target);
  std::ifstream obj(dir / "m.obj"), csv(dir / "n.csv");
  int verts = 0, faces = 0, rows = 0;
  for (std::string line; std::getline(obj, line);) {
    if (line.rfind("v ", 0) == 0) ++verts;
    if (line.rfind("f ", 0) == 0) ++faces;
  }
  std::string header;
  std::getline(csv, header);
  for (std::string line; std::getline(csv, line);) ++rows;
  CHECK(verts == 25);
  CHECK(faces == 16);
  CHECK(rows == 25);
  CHECK(header.rfind("node,", 0) == 0);
  std::filesystem::remove_all(dir);
}
