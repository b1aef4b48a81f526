#include <cmath>

#include "doctest.h"
#include "gstim/homogeneous_models.hpp"
#include "oracles.hpp"

using namespace gstim;
using Mat = Eigen::MatrixXd;

namespace {

std::vector<ModelSpace> catalog_models() {
  std::vector<ModelSpace> m;
  m.push_back(ModelSpace::space_form(0, 3, 0));
  m.push_back(ModelSpace::space_form(1, 2, 0));
  m.push_back(ModelSpace::space_form(-1, 2, 0));
  m.push_back(ModelSpace::space_form(1, 3, 1));
  m.push_back(ModelSpace::space_form(-0.5, 3, 0));
  m.push_back(ModelSpace::complex_space_form(1, 2, 0));
  m.push_back(ModelSpace::complex_space_form(-2, 4, 0));
  m.push_back(ModelSpace::complex_space_form(0, 4, 2));
  m.push_back(ModelSpace::lie_group(named_lie_algebra("heisenberg", 0.5)));
  m.push_back(ModelSpace::lie_group(named_lie_algebra("so3", 0)));
  m.push_back(ModelSpace::lie_group(named_lie_algebra("affine_line", 0)));
  m.push_back(ModelSpace::e_kappa_tau(0, 0.5));
  m.push_back(ModelSpace::e_kappa_tau(1, 0.3));
  m.push_back(ModelSpace::e_kappa_tau(-1, 0.7));
  m.push_back(ModelSpace::product({ModelSpace::space_form(-1, 2, 0), ModelSpace::space_form(0, 1, 0)}));
  m.push_back(ModelSpace::product({ModelSpace::space_form(1, 2, 0), ModelSpace::space_form(-1, 2, 0)}));
  return m;
}

// Compares a(q u, q v) with q b(u, v) q^-1 on basis pairs.
double curvature_gap(const CharacteristicTensors& a, const CharacteristicTensors& b, const Mat& q) {
  const int n = a.dim;
  const Mat qi = q.inverse();
  double d = 0.0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      const VecN u = VecN::Unit(n, i), v = VecN::Unit(n, j);
      d = std::max(d, max_abs(a.curvature(q * u, q * v) - q * b.curvature(u, v) * qi));
    }
  return d;
}

// Moves the last coordinate (the line factor) to the front, where E(kappa, tau) keeps its vertical field.
Mat line_first() {
  Mat q = Mat::Zero(3, 3);
  q(0, 2) = 1.0;
  q(1, 0) = 1.0;
  q(2, 1) = 1.0;
  return q;
}

}  // namespace

TEST_CASE("catalog validates") {
  for (const auto& m : catalog_models()) {
    CAPTURE(m.describe());
    CHECK_NOTHROW(validate_model(m));
    CHECK(space_matches_model(m, standard_space(m)));
    CHECK(model_structure_kind(m) == standard_space(m).kind);
  }
  CHECK_THROWS_AS(validate_model(ModelSpace::complex_space_form(1, 3, 0)), Error);
}

TEST_CASE("broken Jacobi identity is rejected") {
  std::vector<std::vector<VecN>> table(3, std::vector<VecN>(3, VecN::Zero(3)));
  auto set = [&](int i, int j, VecN v) {
    table[i][j] = v;
    table[j][i] = -v;
  };
  set(0, 1, VecN::Unit(3, 0));
  set(1, 2, VecN::Unit(3, 1));
  set(0, 2, VecN::Unit(3, 1));
  CHECK_THROWS_AS(validate_model(ModelSpace::lie_group(LieAlgebraData::from_brackets("bad", table))), Error);
}

TEST_CASE("space form curvature") {
  const double c = -0.7;
  const ModelSpace m = ModelSpace::space_form(c, 4, 1);
  const StructuredSpace z = standard_space(m);
  const auto ct = characteristic_tensors(m, z);
  std::mt19937_64 rng(21);
  for (int t = 0; t < 10; ++t) {
    const VecN u = oracle::random_vector(rng, 4), v = oracle::random_vector(rng, 4), w = oracle::random_vector(rng, 4);
    const VecN expect = c * ((v.dot(z.form * w)) * u - (u.dot(z.form * w)) * v);
    CHECK(max_abs(ct.curvature(u, v) * w - expect) < 1e-12);
    CHECK(ct.torsion(u, v).norm() < 1e-14);
    CHECK(ct.inner(u).norm() < 1e-14);
  }
}

TEST_CASE("characteristic tensors transfer along isomorphisms") {
  std::mt19937_64 rng(22);
  for (const auto& m : catalog_models()) {
    CAPTURE(m.describe());
    const StructuredSpace z0 = standard_space(m);
    Mat q = Mat::Identity(m.dim, m.dim) + 0.3 * oracle::random_matrix(rng, m.dim, m.dim);
    const StructuredSpace z = push_forward(z0, q);
    const auto c0 = characteristic_tensors(m, z0);
    const auto c1 = characteristic_tensors(m, z);
    const Mat qi = q.inverse();
    const VecN u = oracle::random_vector(rng, m.dim), v = oracle::random_vector(rng, m.dim);
    CHECK(max_abs(c1.curvature(q * u, q * v) - q * c0.curvature(u, v) * qi) < 1e-10);
    CHECK(max_abs(c1.torsion(q * u, q * v) - q * c0.torsion(u, v)) < 1e-10);
  }
}

TEST_CASE("Koszul connection is torsion free and metric") {
  for (const char* name : {"heisenberg", "so3", "affine_line"}) {
    CAPTURE(name);
    const LieAlgebraData alg = named_lie_algebra(name, 0.4);
    const auto gam = koszul_gamma(alg);
    const int n = alg.dim();
    for (int i = 0; i < n; ++i) {
      CHECK(max_abs(gam[i].transpose() * alg.inner + alg.inner * gam[i]) < 1e-12);
      for (int j = 0; j < n; ++j) {
        const VecN lhs = gam[i].col(j) - gam[j].col(i);
        CHECK(max_abs(lhs - alg.bracket(VecN::Unit(n, i), VecN::Unit(n, j))) < 1e-12);
      }
    }
  }
}

TEST_CASE("E(kappa, tau) degenerates to products and Berger spheres") {
  std::mt19937_64 rng(23);
  for (double kappa : {-1.0, 0.5, 2.0}) {
    const ModelSpace e = ModelSpace::e_kappa_tau(kappa, 0.0);
    const ModelSpace p = ModelSpace::product({ModelSpace::space_form(kappa, 2, 0), ModelSpace::space_form(0, 1, 0)});
    CHECK(curvature_gap(characteristic_tensors(e, standard_space(e)), characteristic_tensors(p, standard_space(p)), line_first()) < 1e-12);
  }
  for (double tau : {0.3, 1.0}) {
    const ModelSpace e = ModelSpace::e_kappa_tau(4 * tau * tau, tau);
    const ModelSpace s = ModelSpace::space_form(tau * tau, 3, 0);
    CHECK(curvature_gap(characteristic_tensors(e, standard_space(e)), characteristic_tensors(s, standard_space(s)), Mat::Identity(3, 3)) < 1e-12);
  }
}

TEST_CASE("admissible projection") {
  std::mt19937_64 rng(24);
  for (const auto& m : catalog_models()) {
    CAPTURE(m.describe());
    const StructuredSpace z = standard_space(m);
    const VecN u = oracle::random_vector(rng, m.dim);
    const Mat x = oracle::random_matrix(rng, m.dim, m.dim);
    const Mat p = project_admissible(m, u, x);
    CHECK(max_abs(project_admissible(m, u, p) - p) < 1e-12);
    const Mat rep = inner_torsion_representative(m, u);
    CHECK(quotient_project(z, p - rep).norm() < 1e-12);
  }
}

TEST_CASE("realizations reproduce the characteristic tensors") {
  std::mt19937_64 rng(25);
  std::normal_distribution<double> nd;
  for (const auto& m : catalog_models()) {
    CAPTURE(m.describe());
    const auto target = realize_target(m);
    const StructuredSpace z = standard_space(m);
    const auto ct = characteristic_tensors(m, z);
    const int n = m.dim;
    VecN u(n);
    for (int i = 0; i < n; ++i) u(i) = 0.4 * nd(rng);
    const VecN s = flow_constant(*target, target->base_state(), u, 0.3 * random_algebra_element(z, rng));
    CHECK(target->structure_defect(s) < 1e-10);
    const auto rt = realization_tensors(*target, s);
    for (int k = 0; k < n * n; ++k) {
      CHECK(max_abs(rt.curvature_blocks[k] - ct.curvature_blocks[k]) < 1e-8);
      CHECK(max_abs(rt.torsion_vectors[k] - ct.torsion_vectors[k]) < 1e-8);
    }
    for (int i = 0; i < n; ++i) CHECK((quotient_project(z, rt.christoffel[i]) - ct.inner_basis[i]).norm() < 1e-8);
    // velocity and lambda_of are inverse on the admissible space
    const Mat x = oracle::random_matrix(rng, n, n);
    const auto [u2, x2] = target->lambda_of(s, target->velocity(s, u, x));
    CHECK(max_abs(u2 - u) < 1e-10);
    CHECK(max_abs(x2 - project_admissible(m, u, x)) < 1e-10);
    // frames carry the standard form
    const Mat f = target->frame(s);
    CHECK(max_abs(target->frame_form() - z.form) < 1e-14);
    CHECK(target->distance(s, s) == 0.0);
    CHECK(f.cols() == n);
  }
}

TEST_CASE("matrix and coordinate Lie group realizations agree") {
  const ModelSpace m = ModelSpace::lie_group(named_lie_algebra("heisenberg", 0.5));
  const auto a = realize_target(m);
  const auto b = realize_lie_group_in_coordinates(m);
  const auto ta = realization_tensors(*a, a->base_state());
  const auto tb = realization_tensors(*b, b->base_state());
  for (std::size_t k = 0; k < ta.curvature_blocks.size(); ++k) {
    CHECK(max_abs(ta.curvature_blocks[k] - tb.curvature_blocks[k]) < 1e-8);
    CHECK(max_abs(ta.torsion_vectors[k] - tb.torsion_vectors[k]) < 1e-8);
  }
}
