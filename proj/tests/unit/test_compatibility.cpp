#include "doctest.h"
#include "gstim/fixtures.hpp"
#include "oracles.hpp"

using namespace gstim;
using Mat = Eigen::MatrixXd;

namespace {

const SamplingPlan kCoarse{5, 2, 1, 4};

double family_max(const std::string& fixture, const FixtureOptions& opt, const std::string& family) {
  const Fixture f = make_fixture(fixture, opt);
  return full_report(f.problem, f.grid, kCoarse).family(family).max;
}

}  // namespace

TEST_CASE("Weingarten form is the adjoint of alpha") {
  std::mt19937_64 rng(31);
  const int n = 3, k = 2;
  Mat q = oracle::random_matrix(rng, n, n), q0 = oracle::random_matrix(rng, k, k);
  const Mat g = q.transpose() * q + Mat::Identity(n, n);
  Mat g0 = q0.transpose() * q0 + Mat::Identity(k, k);
  g0(1, 1) = -g0(1, 1) - 3.0;  // indefinite normal metric
  Mat alpha = oracle::random_matrix(rng, k, n * n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < i; ++j) alpha.col(j * n + i) = alpha.col(i * n + j);
  const Mat a = weingarten_from_alpha(g, g0, alpha);
  REQUIRE(a.rows() == n);
  REQUIRE(a.cols() == n * k);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int b = 0; b < k; ++b) {
        VecN av = VecN::Zero(n);  // A(e_b) d_i
        av = a.col(i * k + b);
        const double lhs = alpha.col(i * n + j).dot(g0.col(b));
        CHECK(lhs == doctest::Approx(-av.dot(g.col(j))).epsilon(1e-12));
      }
}

TEST_CASE("positive controls satisfy every family") {
  for (const auto& name : fixture_names()) {
    CAPTURE(name);
    const Fixture f = make_fixture(name);
    const ResidualReport r = full_report(f.problem, f.grid, kCoarse);
    CHECK(r.nodes > 0);
    CHECK(r.max_residual() < (f.fd_limited ? 1e-6 : 1e-8));
    CHECK(r.violations(1e-6).empty());
  }
}

TEST_CASE("negative controls violate the expected family") {
  FixtureOptions scaled;
  scaled.alpha_scale = 1.1;
  CHECK(family_max("sphere_in_r3", scaled, "gauss") > 1e-2);
  CHECK(family_max("sphere_in_r3", scaled, "codazzi") < 1e-8);

  FixtureOptions bump;
  bump.alpha_bump = 0.1;
  CHECK(family_max("flat_plane_in_r3", bump, "codazzi") > 1e-3);

  FixtureOptions twist;
  twist.normal_twist = 0.1;
  CHECK(family_max("flat_torus_in_s4", twist, "ricci") > 1e-3);

  FixtureOptions mix;
  mix.alpha_bump = 0.1;
  CHECK(family_max("h2_in_h2xr", mix, "inner_torsion") > 1e-3);
}

TEST_CASE("normal twist needs two normal directions") {
  FixtureOptions twist;
  twist.normal_twist = 0.1;
  CHECK_THROWS_AS(make_fixture("sphere_in_r3", twist), Error);
}

TEST_CASE("reports are reproducible") {
  const Fixture f = make_fixture("clifford_torus_in_s3");
  const auto a = full_report(f.problem, f.grid, kCoarse).to_json().dump();
  const auto b = full_report(f.problem, f.grid, kCoarse).to_json().dump();
  CHECK(a == b);
  SamplingPlan other = kCoarse;
  other.seed = 6;
  CHECK(full_report(f.problem, f.grid, other).to_json().dump() != a);
}

TEST_CASE("family bookkeeping") {
  FamilyStats s;
  s.name = "x";
  s.add(3.0, VecN::Constant(2, 1.0));
  s.add(4.0, VecN::Constant(2, 2.0));
  CHECK(s.max == 4.0);
  CHECK(s.samples == 2);
  CHECK(s.worst_point(0) == 2.0);
  FamilyStats t;
  t.name = "x";
  t.add(12.0, VecN::Zero(2));
  s.merge(t);
  CHECK(s.max == 12.0);
  CHECK(s.samples == 3);
  CHECK(residual_family_names(true).size() == residual_family_names(false).size() + 3);
}

TEST_CASE("problem validation") {
  Fixture f = make_fixture("sphere_in_r3");
  f.problem.model = ModelSpace::space_form(1, 4, 0);
  try {
    validate_problem(f.problem, f.grid.node(0));
    FAIL("expected a shape error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::ShapeError);
  }
}
