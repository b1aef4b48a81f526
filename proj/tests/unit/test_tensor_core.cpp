#include "doctest.h"
#include "gstim/tensor_core.hpp"
#include "oracles.hpp"

using namespace gstim;

TEST_CASE("ad_conjugate matches explicit conjugation") {
  std::mt19937_64 rng(1);
  const Eigen::MatrixXd x = oracle::random_matrix(rng, 3, 3);
  CHECK(max_abs(ad_conjugate(Eigen::MatrixXd::Identity(3, 3), x) - x) == 0.0);
  CHECK(max_abs(ad_conjugate(2.0 * Eigen::MatrixXd::Identity(3, 3), x) - x) < 1e-15);
  for (int t = 0; t < 20; ++t) {
    const Eigen::MatrixXd p = oracle::random_matrix(rng, 4, 4) + 2.0 * Eigen::MatrixXd::Identity(4, 4);
    const Eigen::MatrixXd y = oracle::random_matrix(rng, 4, 4);
    CHECK(max_abs(ad_conjugate(p, y) - p * y * oracle::gauss_jordan_inverse(p)) < 1e-12);
  }
}

TEST_CASE("ad_conjugate is a Lie algebra homomorphism") {
  std::mt19937_64 rng(2);
  for (int t = 0; t < 20; ++t) {
    const Eigen::MatrixXd p = oracle::random_matrix(rng, 4, 4) + 2.0 * Eigen::MatrixXd::Identity(4, 4);
    const Eigen::MatrixXd a = oracle::random_matrix(rng, 4, 4), b = oracle::random_matrix(rng, 4, 4);
    CHECK(max_abs(ad_conjugate(p, commutator(a, b)) - commutator(ad_conjugate(p, a), ad_conjugate(p, b))) < 1e-10);
  }
}

TEST_CASE("ad_conjugate rejects singular frames") {
  Eigen::MatrixXd p = Eigen::MatrixXd::Identity(3, 3);
  p(2, 2) = 0.0;
  try {
    ad_conjugate(p, Eigen::MatrixXd::Identity(3, 3));
    FAIL("expected SingularFrame");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::SingularFrame);
  }
}

TEST_CASE("transpose_wrt") {
  std::mt19937_64 rng(3);
  const Eigen::MatrixXd t = oracle::random_matrix(rng, 3, 3);
  CHECK(max_abs(transpose_wrt(Bilinear::minkowski(3, 0), t) - t.transpose()) == 0.0);

  const Bilinear mk = Bilinear::minkowski(3, 1);
  Eigen::MatrixXd e13 = Eigen::MatrixXd::Zero(3, 3);
  e13(0, 2) = 1.0;
  Eigen::MatrixXd expect = Eigen::MatrixXd::Zero(3, 3);
  expect(2, 0) = -1.0;
  const Eigen::MatrixXd ts = transpose_wrt(mk, e13);
  CHECK(max_abs(ts - expect) < 1e-15);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      const Eigen::VectorXd v = Eigen::VectorXd::Unit(3, i), w = Eigen::VectorXd::Unit(3, j);
      CHECK(mk(e13 * v, w) == doctest::Approx(mk(v, ts * w)));
    }

  // g-antisymmetric maps go to their negatives
  const Eigen::MatrixXd a = oracle::random_matrix(rng, 3, 3);
  const Eigen::MatrixXd anti = a - transpose_wrt(mk, a);
  CHECK(max_abs(transpose_wrt(mk, anti) + anti) < 1e-14);
}

TEST_CASE("transpose_wrt properties on random forms") {
  std::mt19937_64 rng(4);
  for (int t = 0; t < 20; ++t) {
    // well-conditioned congruent copies of the Minkowski form of index 2
    const Eigen::MatrixXd q = Eigen::MatrixXd::Identity(4, 4) + 0.3 * oracle::random_matrix(rng, 4, 4);
    const Eigen::MatrixXd form = q.transpose() * Bilinear::minkowski(4, 2).matrix() * q;
    const Bilinear b(form, 2);
    const Eigen::MatrixXd x = oracle::random_matrix(rng, 4, 4), y = oracle::random_matrix(rng, 4, 4);
    CHECK(max_abs(transpose_wrt(b, transpose_wrt(b, x)) - x) < 1e-12);
    CHECK(max_abs(transpose_wrt(b, x * y) - transpose_wrt(b, y) * transpose_wrt(b, x)) < 1e-10);
  }
}

TEST_CASE("Bilinear validates signature and degeneracy") {
  Eigen::MatrixXd m = Eigen::MatrixXd::Identity(3, 3);
  m(2, 2) = -1.0;
  CHECK(Bilinear(m, 1).negative() == 1);
  CHECK(Bilinear::inferred(m).negative() == 1);
  CHECK_THROWS_AS(Bilinear(m, 0), Error);
  m(2, 2) = 0.0;
  try {
    Bilinear(m, 0);
    FAIL("expected DegenerateForm");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::DegenerateForm);
  }
  // symmetrized exactly on construction
  Eigen::MatrixXd s = Eigen::MatrixXd::Identity(2, 2);
  s(0, 1) = 0.25;
  s(1, 0) = 0.25 + 1e-14;
  const Bilinear b(s, 0);
  CHECK(b.matrix()(0, 1) == b.matrix()(1, 0));
}

TEST_CASE("cross_product and orthonormalize") {
  const Eigen::Matrix3d id = Eigen::Matrix3d::Identity();
  const Eigen::VectorXd e0 = Eigen::VectorXd::Unit(3, 0), e1 = Eigen::VectorXd::Unit(3, 1);
  CHECK(max_abs(cross_product(id, 1, e0, e1) - Eigen::VectorXd::Unit(3, 2)) < 1e-15);
  CHECK(max_abs(cross_product(id, -1, e0, e1) + Eigen::VectorXd::Unit(3, 2)) < 1e-15);

  std::mt19937_64 rng(5);
  const Eigen::MatrixXd gram = Bilinear::minkowski(4, 1).matrix();
  const Eigen::MatrixXd q = orthonormalize(gram, Eigen::MatrixXd::Identity(4, 4) + 0.1 * oracle::random_matrix(rng, 4, 4), 4);
  CHECK(max_abs(q.transpose() * gram * q - gram) < 1e-12);
}
