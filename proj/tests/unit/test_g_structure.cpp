#include <cmath>

#include "../support/sample_spaces.hpp"
#include "doctest.h"
#include "gstim/homogeneous_models.hpp"
#include "oracles.hpp"

using namespace gstim;
using Mat = Eigen::MatrixXd;

namespace {

VecN v3(double a, double b, double c) {
  VecN v(3);
  v << a, b, c;
  return v;
}

}  // namespace

TEST_CASE("quotient kernel is the structure algebra") {
  std::mt19937_64 rng(11);
  for (const auto& [name, z] : samples::skewed_spaces(rng)) {
    CAPTURE(name);
    validate_space(z);
    for (int t = 0; t < 50; ++t) {
      const EndoMatrix x = random_algebra_element(z, rng);
      CHECK(quotient_project(z, x).norm() < 1e-12);
      // the algebra projection is idempotent and lands in the kernel
      const EndoMatrix r = oracle::random_matrix(rng, z.dim, z.dim);
      const EndoMatrix p = algebra_projection(z, r);
      CHECK(max_abs(algebra_projection(z, p) - p) < 1e-10);
      CHECK(quotient_project(z, p).norm() < 1e-10);
      CHECK(quotient_project(z, r).norm() > 1e-6);
    }
  }
}

TEST_CASE("quotient examples") {
  const StructuredSpace sub = StructuredSpace::subbundle(2, Mat::Identity(2, 1));
  Mat e21 = Mat::Zero(2, 2);
  e21(1, 0) = 1.0;
  const QuotientRepr q = quotient_project(sub, e21);
  CHECK(q.norm() == doctest::Approx(1.0));

  const StructuredSpace ortho = StructuredSpace::orthonormal(Mat::Identity(3, 3), 0);
  Mat a = Mat::Zero(3, 3);
  a(0, 1) = 1.0;
  a(1, 0) = -1.0;
  CHECK(quotient_project(ortho, a).norm() == 0.0);

  // complex-linear and antisymmetric
  const Mat j = standard_complex_structure(4);
  const StructuredSpace un = StructuredSpace::unitary(Mat::Identity(4, 4), 0, j);
  std::mt19937_64 rng(12);
  const Mat m = oracle::random_matrix(rng, 4, 4);
  Mat x = m - m.transpose();
  x = 0.5 * (x - j * x * j);
  CHECK(quotient_project(un, x).norm() < 1e-15);
}

TEST_CASE("validate_space rejects inconsistent data") {
  Mat j = standard_complex_structure(4);
  j(0, 0) = 0.1;
  CHECK_THROWS_AS(validate_space(StructuredSpace::almost_complex(j)), Error);
  CHECK_THROWS_AS(validate_space(StructuredSpace::metric_unit_section(Mat::Identity(3, 3), 0, 2.0 * VecN::Unit(3, 0))),
                  Error);
}

TEST_CASE("structure frames carry the standard structure") {
  std::mt19937_64 rng(13);
  for (const auto& [name, z] : samples::skewed_spaces(rng)) {
    CAPTURE(name);
    const Mat p = structure_frame(z);
    CHECK(structure_defect(z, p) < 1e-10);
  }
}

// Source-side charts of the Heisenberg group in fibration coordinates.
namespace {

constexpr double kTau = 0.5;

Mat nil_frame(const VecN& x) {
  Mat e(3, 3);
  e.col(0) << 1.0, 0.0, -kTau * x(1);
  e.col(1) << 0.0, 1.0, kTau * x(0);
  e.col(2) << 0.0, 0.0, 1.0;
  return e;
}

MetricField nil_metric() {
  return {MatrixField::closed_form(
              3, 3,
              [](const VecN& x) {
                const Mat ei = nil_frame(x).inverse();
                return Mat(ei.transpose() * ei);
              },
              VecN::Constant(3, -1.0), VecN::Constant(3, 1.0), 1e-3, "nil"),
          0};
}

}  // namespace

TEST_CASE("inner torsion: Levi-Civita preserves the orthonormal structure") {
  const MetricField g = nil_metric();
  GStructureSpec spec;
  spec.kind = StructureKind::Orthonormal;
  spec.rank = 3;
  spec.form = g.source;
  const ConnectionField lc = levi_civita_connection(g);
  CHECK(inner_torsion(spec, lc, v3(0.2, -0.1, 0.3), v3(0.5, 0.2, -0.7)).norm() < 1e-9);
}

TEST_CASE("inner torsion: vertical field of Nil3") {
  const MetricField g = nil_metric();
  const ConnectionField lc = levi_civita_connection(g);
  GStructureSpec spec;
  spec.kind = StructureKind::OrientedUnitVector3D;
  spec.rank = 3;
  spec.form = g.source;
  spec.unit = MatrixField::constant(VecN::Unit(3, 2), VecN::Constant(3, -1.0), VecN::Constant(3, 1.0), 1e-3);
  spec.orientation = 1;
  std::mt19937_64 rng(14);
  for (int t = 0; t < 10; ++t) {
    const VecN x = 0.5 * oracle::random_vector(rng, 3), v = oracle::random_vector(rng, 3);
    const QuotientRepr it = inner_torsion(spec, lc, x, v);
    const VecN expect = kTau * cross_product(g.source(x), 1, v, VecN::Unit(3, 2));
    CHECK(max_abs(it.parts[1] - expect) < 1e-8);
    CHECK(max_abs(it.parts[0]) < 1e-8);
  }
}

TEST_CASE("inner torsion: trivial frame recovers the Koszul Christoffels") {
  const MetricField g = nil_metric();
  const ConnectionField lc = levi_civita_connection(g);
  const MatrixField s = g.source.derived(3, 3, nil_frame, "left-invariant frame");
  GStructureSpec spec;
  spec.kind = StructureKind::TrivialFrame;
  spec.rank = 3;
  spec.frame = s;
  const LieAlgebraData alg = named_lie_algebra("heisenberg", kTau);
  const auto gam = koszul_gamma(alg);
  std::mt19937_64 rng(15);
  for (int t = 0; t < 10; ++t) {
    const VecN x = 0.5 * oracle::random_vector(rng, 3), v = oracle::random_vector(rng, 3);
    const QuotientRepr it = inner_torsion(spec, lc, x, v);
    const Mat sx = s(x);
    const VecN a = sx.inverse() * v;
    Mat expect = Mat::Zero(3, 3);
    for (int i = 0; i < 3; ++i) expect += a(i) * gam[i];
    CHECK(max_abs(it.parts[0] - sx * expect * sx.inverse()) < 1e-8);
    // the definition-level form through christoffel_of_frame
    const auto cf = christoffel_of_frame(lc, s, x);
    Mat direct = Mat::Zero(3, 3);
    for (int i = 0; i < 3; ++i) direct += v(i) * cf[i];
    CHECK(max_abs(it.parts[0] - direct) < 1e-12);
  }
}

TEST_CASE("inner torsion: closed form against the frame definition") {
  // A connection that does not preserve the metric: Levi-Civita plus a symmetric endomorphism.
  const MetricField g = nil_metric();
  const ConnectionField lc = levi_civita_connection(g);
  const MatrixField blocks = lc.field().derived(3, 9, [lc](const VecN& x) {
    Mat m = lc.field()(x);
    m(0, 0) += 0.3 * x(1);
    m(1, 5) += 0.2;
    m(2, 7) -= 0.1 * x(0);
    return m;
  });
  const ConnectionField conn(3, 3, blocks);
  GStructureSpec spec;
  spec.kind = StructureKind::Orthonormal;
  spec.rank = 3;
  spec.form = g.source;
  // Orthonormal frame section: the left-invariant frame.
  const MatrixField s = g.source.derived(3, 3, nil_frame);
  std::mt19937_64 rng(16);
  for (int t = 0; t < 10; ++t) {
    const VecN x = 0.5 * oracle::random_vector(rng, 3), v = oracle::random_vector(rng, 3);
    const auto cf = christoffel_of_frame(conn, s, x);
    Mat gamma = Mat::Zero(3, 3);
    for (int i = 0; i < 3; ++i) gamma += v(i) * cf[i];
    const QuotientRepr viaframe = quotient_project(spec, gamma, x);
    CHECK((inner_torsion(spec, conn, x, v) - viaframe).norm() < 1e-8);
  }
}

TEST_CASE("inner torsion of a product is the direct sum") {
  const MetricField g = nil_metric();
  const ConnectionField lc = levi_civita_connection(g);
  const VecN lo = VecN::Constant(3, -1.0), hi = VecN::Constant(3, 1.0);
  GStructureSpec a;
  a.kind = StructureKind::Orthonormal;
  a.rank = 2;
  a.form = MatrixField::constant(Mat::Identity(2, 2), lo, hi, 1e-3);
  GStructureSpec b;
  b.kind = StructureKind::UnitSection;
  b.rank = 1;
  b.unit = MatrixField::constant(VecN::Unit(1, 0), lo, hi, 1e-3);
  GStructureSpec prod;
  prod.kind = StructureKind::Product;
  prod.rank = 3;
  prod.split = g.source.derived(3, 3, nil_frame);
  prod.children = {a, b};
  const VecN x = v3(0.1, 0.2, -0.3), v = v3(0.4, -0.6, 0.2);
  const QuotientRepr it = inner_torsion(prod, lc, x, v);
  // In split coordinates the Christoffel map is s^-1 (Gamma s + ds).
  const Mat s = prod.split(x);
  Mat w = lc.gamma(x, v) * s + prod.split.directional(x, v);
  w = s.inverse() * w;
  const QuotientRepr pa = quotient_project(a.at(x), w.topLeftCorner(2, 2));
  const QuotientRepr pb = quotient_project(b.at(x), w.bottomRightCorner(1, 1));
  CHECK(max_abs(it.parts[0] - pa.parts[0]) < 1e-8);
  CHECK(max_abs(it.parts[1] - pb.parts[0]) < 1e-8);
  CHECK(max_abs(it.parts[2] - w.topRightCorner(2, 1)) < 1e-8);
  CHECK(max_abs(it.parts[3] - w.bottomLeftCorner(1, 2)) < 1e-8);
}
