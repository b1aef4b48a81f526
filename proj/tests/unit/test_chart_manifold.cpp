#include <cmath>
#include <cstdio>
#include <numbers>

#include "doctest.h"
#include "gstim/chart_manifold.hpp"
#include "oracles.hpp"

using namespace gstim;
using Mat = Eigen::MatrixXd;

namespace {

VecN v2(double a, double b) {
  VecN v(2);
  v << a, b;
  return v;
}

MetricField round_metric() {
  return {MatrixField::closed_form(
              2, 2,
              [](const VecN& x) {
                Mat g = Mat::Identity(2, 2);
                g(1, 1) = std::sin(x(0)) * std::sin(x(0));
                return g;
              },
              v2(0.1, -1.0), v2(3.0, 7.0), 1e-3, "round"),
          0};
}

MetricField half_plane_metric() {
  return {MatrixField::closed_form(
              2, 2, [](const VecN& x) { return Mat(Mat::Identity(2, 2) / (x(1) * x(1))); }, v2(-2, 0.2), v2(2, 3),
              1e-3, "hyperbolic"),
          0};
}

double sectional_form(const ConnectionField& conn, const MetricField& g, const VecN& x, const VecN& v,
                      const VecN& w) {
  const Mat gx = g.source(x);
  return (curvature_tensor(conn, x, v, w) * v).dot(gx * w);
}

double area_form(const MetricField& g, const VecN& x, const VecN& v, const VecN& w) {
  const Mat gx = g.source(x);
  return v.dot(gx * v) * w.dot(gx * w) - std::pow(v.dot(gx * w), 2);
}

}  // namespace

TEST_CASE("ChartGrid indexing") {
  const ChartGrid g(v2(0, 0), v2(1, 2), {3, 5});
  CHECK(g.node_count() == 15);
  CHECK(g.spacing(1) == doctest::Approx(0.5));
  for (int f = 0; f < g.node_count(); ++f) CHECK(g.flat_index(g.multi_index(f)) == f);
  CHECK(g.flat_index({1, 0}) == 1);  // axis 0 fastest
  CHECK(g.contains(v2(0.5, 1.0)));
  CHECK_FALSE(g.contains(v2(1.5, 1.0)));
}

TEST_CASE("fields outside their domain are errors, not extrapolation") {
  const MetricField g = round_metric();
  try {
    g.source(v2(3.5, 0.0));
    FAIL("expected OutOfDomain");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::OutOfDomain);
  }
}

TEST_CASE("Levi-Civita Christoffels") {
  const MetricField flat{MatrixField::constant(Mat::Identity(2, 2), v2(-1, -1), v2(1, 1), 1e-3), 0};
  for (const auto& m : levi_civita(flat, v2(0.2, 0.3))) CHECK(max_abs(m) < 1e-12);

  const MetricField sphere = round_metric();
  const VecN x = v2(std::numbers::pi / 4, 0.3);
  const auto gam = levi_civita(sphere, x);
  // column b of Gamma_i holds nabla_{d_i} d_b, so Gamma^theta_{phi phi} = gam[1](0, 1)
  CHECK(gam[1](0, 1) == doctest::Approx(-0.5).epsilon(1e-10));
  const auto ref = oracle::christoffel_symbols([&](const VecN& y) { return sphere.source(y); }, x);
  for (int k = 0; k < 2; ++k)
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j) CHECK(gam[i](k, j) == doctest::Approx(ref[k](i, j)).epsilon(1e-8));

  const MetricField hyp = half_plane_metric();
  const VecN y = v2(0.4, 1.3);
  CHECK(levi_civita(hyp, y)[0](0, 1) == doctest::Approx(-1.0 / 1.3).epsilon(1e-10));
}

TEST_CASE("curvature of model surfaces") {
  std::mt19937_64 rng(7);
  const MetricField sphere = round_metric();
  const MetricField hyp = half_plane_metric();
  const ConnectionField cs = levi_civita_connection(sphere), ch = levi_civita_connection(hyp);
  for (int t = 0; t < 10; ++t) {
    const VecN x = v2(0.5 + 2.0 * std::abs(oracle::random_vector(rng, 1)(0)), 0.5);
    const VecN y = v2(0.3, 0.8 + std::abs(oracle::random_vector(rng, 1)(0)));
    const VecN v = oracle::random_vector(rng, 2), w = oracle::random_vector(rng, 2);
    CHECK(sectional_form(cs, sphere, x, v, w) == doctest::Approx(-area_form(sphere, x, v, w)).epsilon(1e-8));
    CHECK(sectional_form(ch, hyp, y, v, w) == doctest::Approx(area_form(hyp, y, v, w)).epsilon(1e-8));
    CHECK(max_abs(curvature_tensor(cs, x, v, w) + curvature_tensor(cs, x, w, v)) == 0.0);
  }
  const ConnectionField flat = ConnectionField::trivial(2, 2, v2(-1, -1), v2(1, 1), 1e-3);
  CHECK(max_abs(curvature_tensor(flat, v2(0, 0), v2(1, 0), v2(0, 1))) == 0.0);
}

TEST_CASE("first Bianchi identity for a Levi-Civita connection") {
  const MetricField g{MatrixField::closed_form(
                          3, 3,
                          [](const VecN& x) {
                            Mat m = Mat::Identity(3, 3);
                            m(0, 0) = 1.0 + 0.3 * std::sin(x(1));
                            m(1, 1) = std::exp(0.2 * x(0) * x(2));
                            m(0, 2) = m(2, 0) = 0.1 * std::cos(x(0));
                            return m;
                          },
                          VecN::Constant(3, -1.0), VecN::Constant(3, 1.0), 1e-3),
                      0};
  const ConnectionField c = levi_civita_connection(g);
  std::mt19937_64 rng(8);
  const VecN x = 0.3 * oracle::random_vector(rng, 3);
  const VecN u = oracle::random_vector(rng, 3), v = oracle::random_vector(rng, 3), w = oracle::random_vector(rng, 3);
  const VecN cyc = curvature_tensor(c, x, v, w) * u + curvature_tensor(c, x, w, u) * v + curvature_tensor(c, x, u, v) * w;
  CHECK(cyc.cwiseAbs().maxCoeff() < 1e-8);
}

TEST_CASE("iota-torsion") {
  const MetricField sphere = round_metric();
  const ConnectionField lc = levi_civita_connection(sphere);
  const MatrixField id = MatrixField::constant(Mat::Identity(2, 2), v2(0.1, -1.0), v2(3.0, 7.0), 1e-3);
  CHECK(iota_torsion(lc, id, v2(1.0, 0.5), v2(0.3, -0.2), v2(0.7, 0.1)).cwiseAbs().maxCoeff() < 1e-12);

  // Gamma^k_ij = c eps_ijk on R^3: T(e1, e2) = 2 c e3
  const double coef = 0.35;
  Mat blocks = Mat::Zero(3, 9);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      for (int k = 0; k < 3; ++k) {
        const double eps = (i == j || j == k || i == k) ? 0.0 : ((j - i + 3) % 3 == 1 ? 1.0 : -1.0);
        blocks(k, i * 3 + j) = coef * eps;
      }
  const VecN lo = VecN::Constant(3, -1), hi = VecN::Constant(3, 1);
  const ConnectionField c(3, 3, MatrixField::constant(blocks, lo, hi, 1e-3));
  const MatrixField id3 = MatrixField::constant(Mat::Identity(3, 3), lo, hi, 1e-3);
  const VecN t = iota_torsion(c, id3, VecN::Zero(3), VecN::Unit(3, 0), VecN::Unit(3, 1));
  CHECK(max_abs(t - 2.0 * coef * VecN::Unit(3, 2)) < 1e-13);
}

TEST_CASE("christoffel_of_frame") {
  const MetricField sphere = round_metric();
  const ConnectionField lc = levi_civita_connection(sphere);
  const MatrixField coord = MatrixField::constant(Mat::Identity(2, 2), v2(0.1, -1.0), v2(3.0, 7.0), 1e-3);
  const VecN x = v2(1.1, 0.4);
  const auto raw = lc.at(x), viaframe = christoffel_of_frame(lc, coord, x);
  for (int i = 0; i < 2; ++i) CHECK(max_abs(raw[i] - viaframe[i]) < 1e-12);

  const MatrixField ortho = sphere.source.derived(2, 2, [](const VecN& y) {
    Mat s = Mat::Identity(2, 2);
    s(1, 1) = 1.0 / std::sin(y(0));
    return s;
  });
  const MatrixField scaled = sphere.source.derived(2, 2, [ortho](const VecN& y) { return Mat(3.0 * ortho(y)); });
  std::mt19937_64 rng(9);
  for (int t = 0; t < 20; ++t) {
    const VecN y = v2(0.4 + 2.2 * std::abs(oracle::random_vector(rng, 1)(0)), oracle::random_vector(rng, 1)(0));
    const auto g1 = christoffel_of_frame(lc, ortho, y), g2 = christoffel_of_frame(lc, scaled, y);
    const Bilinear gy(sphere.source(y), 0);
    for (int i = 0; i < 2; ++i) {
      // antisymmetric with respect to g, as an endomorphism of the fibre
      CHECK(max_abs(g1[i] + transpose_wrt(gy, g1[i])) < 1e-9);
      CHECK(max_abs(g1[i] - g2[i]) < 1e-9);
    }
  }
}

TEST_CASE("assemble_whitney and its components") {
  const MetricField sphere = round_metric();
  WhitneyData d;
  d.g = sphere;
  d.g0 = MetricField{MatrixField::constant(Mat::Identity(1, 1), v2(0.1, -1.0), v2(3.0, 7.0), 1e-3), 0};
  d.tangent_conn = levi_civita_connection(sphere);
  d.normal_conn = ConnectionField::trivial(2, 1, v2(0.1, -1.0), v2(3.0, 7.0), 1e-3);
  d.alpha0 = sphere.source.derived(1, 4, [sphere](const VecN& x) {
    const Mat g = sphere.source(x);
    return Mat(Eigen::Map<const Mat>(g.data(), 1, 4));
  });
  // A0(e0) = -Id from the defining identity
  d.a0 = sphere.source.derived(2, 2, [](const VecN&) { return Mat(-Mat::Identity(2, 2)); });
  validate_whitney(d);
  const ConnectionField hat = assemble_whitney(d);
  const VecN x = v2(1.2, 0.7);
  const auto comps = whitney_components(hat, 2, 1, x);
  const auto tang = d.tangent_conn.at(x);
  for (int i = 0; i < 2; ++i) {
    CHECK(max_abs(comps.tangent[i] - tang[i]) == 0.0);
    CHECK(max_abs(comps.normal[i]) == 0.0);
    CHECK(max_abs(comps.alpha[i] - d.alpha0(x).middleCols(i * 2, 2)) == 0.0);
    CHECK(max_abs(comps.weingarten[i] + Mat::Identity(2, 2).col(i)) == 0.0);
  }
  // metric compatibility of the assembled connection: d_i g = G_i^T g + g G_i
  const auto gh = hat.at(x);
  const MatrixField form = sphere.source.derived(3, 3, [d](const VecN& y) { return d.whitney_form(y); });
  for (int i = 0; i < 2; ++i) {
    const Mat gx = form(x);
    CHECK(max_abs(form.derivative(x, i) - gh[i].transpose() * gx - gx * gh[i]) < 1e-9);
  }

  // without alpha0 and A0 the connection is block diagonal
  d.alpha0 = MatrixField::constant(Mat::Zero(1, 4), v2(0.1, -1.0), v2(3.0, 7.0), 1e-3);
  d.a0 = MatrixField::constant(Mat::Zero(2, 2), v2(0.1, -1.0), v2(3.0, 7.0), 1e-3);
  for (const auto& m : assemble_whitney(d).at(x)) {
    CHECK(max_abs(m.topRightCorner(2, 1)) == 0.0);
    CHECK(max_abs(m.bottomLeftCorner(1, 2)) == 0.0);
  }
}

TEST_CASE("grid-sampled fields round-trip through files") {
  const ChartGrid grid(v2(0, 0), v2(1, 1), {9, 7});
  std::vector<Mat> values;
  for (int i = 0; i < grid.node_count(); ++i) {
    const VecN x = grid.node(i);
    Mat m(2, 1);
    m << std::sin(x(0)) * x(1), 0.1 / 3.0;
    values.push_back(m);
  }
  const MatrixField f = MatrixField::grid_sampled(grid, values, 3, "probe");
  const std::string path = "chart_manifold_probe.field";
  save_grid_field(path, f);
  const MatrixField back = load_grid_field(path);
  std::remove(path.c_str());
  CHECK(back.interpolation_order() == 3);
  for (int i = 0; i < grid.node_count(); ++i) CHECK(max_abs(back(grid.node(i)) - values[i]) == 0.0);
  // cubic interpolation reproduces the smooth field between nodes
  CHECK(std::abs(back(v2(0.51, 0.33))(0, 0) - std::sin(0.51) * 0.33) < 1e-4);
}

TEST_CASE("derivatives near the domain edge use shifted stencils") {
  const VecN lo = VecN::Zero(1), hi = VecN::Ones(1);
  const MatrixField quartic = MatrixField::closed_form(
      1, 1, [](const VecN& x) { return Eigen::MatrixXd::Constant(1, 1, std::pow(x(0), 4) - x(0)); }, lo, hi, 0.1,
      "quartic");
  for (double t : {0.0, 0.05, 0.5, 0.93, 1.0}) {
    CAPTURE(t);
    const VecN x = VecN::Constant(1, t);
    CHECK(quartic.derivative(x, 0)(0, 0) == doctest::Approx(4 * t * t * t - 1).epsilon(1e-10));
  }
  const MatrixField tiny = MatrixField::closed_form(
      1, 1, [](const VecN&) { return Eigen::MatrixXd::Zero(1, 1); }, lo, VecN::Constant(1, 0.3), 0.1, "tiny");
  CHECK_THROWS_AS(tiny.derivative(VecN::Constant(1, 0.1), 0), Error);
}
