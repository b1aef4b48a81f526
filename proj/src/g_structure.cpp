#include "gstim/g_structure.hpp"

#include <cmath>
#include <sstream>

namespace gstim {

const char* structure_kind_name(StructureKind kind) {
  switch (kind) {
    case StructureKind::TrivialFrame: return "trivial_frame";
    case StructureKind::Orthonormal: return "orthonormal";
    case StructureKind::Subbundle: return "subbundle";
    case StructureKind::AdaptedOrthonormal: return "adapted_orthonormal";
    case StructureKind::UnitSection: return "unit_section";
    case StructureKind::AlmostComplex: return "almost_complex";
    case StructureKind::Unitary: return "unitary";
    case StructureKind::OrientedUnitVector3D: return "oriented_unit_vector_3d";
    case StructureKind::Product: return "product";
  }
  return "unknown";
}

StructureKind structure_kind_from_name(const std::string& name) {
  for (StructureKind k : primitive_structure_kinds())
    if (name == structure_kind_name(k)) return k;
  if (name == "product") return StructureKind::Product;
  throw Error(ErrorKind::ConfigError, "unknown G-structure variant '" + name + "'");
}

const std::vector<StructureKind>& primitive_structure_kinds() {
  static const std::vector<StructureKind> kinds = {
      StructureKind::TrivialFrame,  StructureKind::Orthonormal, StructureKind::Subbundle,
      StructureKind::AdaptedOrthonormal, StructureKind::UnitSection, StructureKind::AlmostComplex,
      StructureKind::Unitary,       StructureKind::OrientedUnitVector3D};
  return kinds;
}

// ------------------------------------------------------------ constructors

StructuredSpace StructuredSpace::trivial_frame(const Eigen::MatrixXd& frame) {
  StructuredSpace z;
  z.kind = StructureKind::TrivialFrame;
  z.dim = static_cast<int>(frame.rows());
  z.frame = frame;
  return z;
}

StructuredSpace StructuredSpace::orthonormal(const Eigen::MatrixXd& form, int index) {
  StructuredSpace z;
  z.kind = StructureKind::Orthonormal;
  z.dim = static_cast<int>(form.rows());
  z.form = form;
  z.index = index;
  return z;
}

StructuredSpace StructuredSpace::subbundle(int dim, const Eigen::MatrixXd& basis) {
  StructuredSpace z;
  z.kind = StructureKind::Subbundle;
  z.dim = dim;
  z.subspace = basis;
  return z;
}

StructuredSpace StructuredSpace::adapted_orthonormal(const Eigen::MatrixXd& form, int index,
                                                     const Eigen::MatrixXd& basis, int subspace_index) {
  StructuredSpace z = orthonormal(form, index);
  z.kind = StructureKind::AdaptedOrthonormal;
  z.subspace = basis;
  z.subspace_index = subspace_index;
  return z;
}

StructuredSpace StructuredSpace::unit_section(const VecN& unit) {
  StructuredSpace z;
  z.kind = StructureKind::UnitSection;
  z.dim = static_cast<int>(unit.size());
  z.unit = unit;
  return z;
}

StructuredSpace StructuredSpace::metric_unit_section(const Eigen::MatrixXd& form, int index, const VecN& unit) {
  StructuredSpace z = orthonormal(form, index);
  z.kind = StructureKind::UnitSection;
  z.unit = unit;
  z.metric = true;
  return z;
}

StructuredSpace StructuredSpace::almost_complex(const Eigen::MatrixXd& j) {
  StructuredSpace z;
  z.kind = StructureKind::AlmostComplex;
  z.dim = static_cast<int>(j.rows());
  z.complex = j;
  return z;
}

StructuredSpace StructuredSpace::unitary(const Eigen::MatrixXd& form, int index, const Eigen::MatrixXd& j) {
  StructuredSpace z = orthonormal(form, index);
  z.kind = StructureKind::Unitary;
  z.complex = j;
  return z;
}

StructuredSpace StructuredSpace::oriented_unit_vector(const Eigen::MatrixXd& form, const VecN& unit,
                                                      int orientation) {
  StructuredSpace z = orthonormal(form, 0);
  z.kind = StructureKind::OrientedUnitVector3D;
  z.unit = unit;
  z.metric = true;
  z.orientation = orientation;
  return z;
}

StructuredSpace StructuredSpace::product(const Eigen::MatrixXd& split, std::vector<StructuredSpace> children) {
  StructuredSpace z;
  z.kind = StructureKind::Product;
  z.dim = static_cast<int>(split.rows());
  z.split = split;
  z.children = std::move(children);
  return z;
}

std::vector<int> StructuredSpace::child_offsets() const {
  std::vector<int> off;
  int o = 0;
  for (const auto& c : children) {
    off.push_back(o);
    o += c.dim;
  }
  off.push_back(o);
  return off;
}

// ------------------------------------------------------------ standard data

Eigen::MatrixXd standard_complex_structure(int dim) {
  if (dim % 2 != 0) throw Error(ErrorKind::ShapeError, "complex structure needs even dimension");
  const int l = dim / 2;
  Eigen::MatrixXd j = Eigen::MatrixXd::Zero(dim, dim);
  j.bottomLeftCorner(l, l) = Eigen::MatrixXd::Identity(l, l);
  j.topRightCorner(l, l) = -Eigen::MatrixXd::Identity(l, l);
  return j;
}

Eigen::MatrixXd standard_hermitian_form(int dim, int index) {
  if (dim % 2 != 0 || index % 2 != 0) throw Error(ErrorKind::ShapeError, "hermitian form needs even dim and index");
  const int l = dim / 2;
  const int s = index / 2;
  Eigen::MatrixXd g = Eigen::MatrixXd::Identity(dim, dim);
  for (int i = l - s; i < l; ++i) {
    g(i, i) = -1.0;
    g(l + i, l + i) = -1.0;
  }
  return g;
}

namespace {

Eigen::MatrixXd minkowski_matrix(int dim, int neg) { return Bilinear::minkowski(dim, neg).matrix(); }

Eigen::MatrixXd adapted_standard_form(const StructuredSpace& z) {
  const int l = static_cast<int>(z.subspace.cols());
  Eigen::MatrixXd g = Eigen::MatrixXd::Zero(z.dim, z.dim);
  g.topLeftCorner(l, l) = minkowski_matrix(l, z.subspace_index);
  g.bottomRightCorner(z.dim - l, z.dim - l) = minkowski_matrix(z.dim - l, z.index - z.subspace_index);
  return g;
}

Eigen::MatrixXd gram_restrict(const Eigen::MatrixXd& g, const Eigen::MatrixXd& basis) {
  return basis.transpose() * g * basis;
}

/// G-orthogonal projector onto span(basis).
Eigen::MatrixXd orthogonal_projector(const Eigen::MatrixXd& g, const Eigen::MatrixXd& basis) {
  const Eigen::MatrixXd gf = gram_restrict(g, basis);
  return basis * checked_inverse(gf, "subspace gram") * basis.transpose() * g;
}

}  // namespace

StructuredSpace standard_space_like(const StructuredSpace& z) {
  const int k = z.dim;
  switch (z.kind) {
    case StructureKind::TrivialFrame:
      return StructuredSpace::trivial_frame(Eigen::MatrixXd::Identity(k, k));
    case StructureKind::Orthonormal:
      return StructuredSpace::orthonormal(minkowski_matrix(k, z.index), z.index);
    case StructureKind::Subbundle: {
      const int l = static_cast<int>(z.subspace.cols());
      return StructuredSpace::subbundle(k, Eigen::MatrixXd::Identity(k, l));
    }
    case StructureKind::AdaptedOrthonormal: {
      const int l = static_cast<int>(z.subspace.cols());
      return StructuredSpace::adapted_orthonormal(adapted_standard_form(z), z.index, Eigen::MatrixXd::Identity(k, l),
                                                  z.subspace_index);
    }
    case StructureKind::UnitSection: {
      if (!z.metric) return StructuredSpace::unit_section(VecN::Unit(k, 0));
      const bool spacelike = z.unit.dot(z.form * z.unit) > 0;
      return StructuredSpace::metric_unit_section(minkowski_matrix(k, z.index), z.index,
                                                  VecN::Unit(k, spacelike ? 0 : k - 1));
    }
    case StructureKind::AlmostComplex:
      return StructuredSpace::almost_complex(standard_complex_structure(k));
    case StructureKind::Unitary:
      return StructuredSpace::unitary(standard_hermitian_form(k, z.index), z.index, standard_complex_structure(k));
    case StructureKind::OrientedUnitVector3D:
      return StructuredSpace::oriented_unit_vector(Eigen::MatrixXd::Identity(3, 3), VecN::Unit(3, 0), 1);
    case StructureKind::Product: {
      std::vector<StructuredSpace> ch;
      for (const auto& c : z.children) ch.push_back(standard_space_like(c));
      return StructuredSpace::product(Eigen::MatrixXd::Identity(k, k), std::move(ch));
    }
  }
  throw Error(ErrorKind::SpecViolation, "unknown structure kind");
}

// -------------------------------------------------------------- validation

void validate_space(const StructuredSpace& z, double tol) {
  auto fail = [&](const std::string& msg) {
    throw Error(ErrorKind::SpecViolation, std::string(structure_kind_name(z.kind)) + ": " + msg);
  };
  auto check_form = [&]() {
    if (z.form.rows() != z.dim || z.form.cols() != z.dim) fail("form has the wrong size");
    if (max_abs(z.form - z.form.transpose()) > tol) fail("form is not symmetric");
    Bilinear(z.form, z.index);
  };
  switch (z.kind) {
    case StructureKind::TrivialFrame:
      if (z.frame.rows() != z.dim || z.frame.cols() != z.dim) fail("frame has the wrong size");
      checked_inverse(z.frame, "structure frame");
      break;
    case StructureKind::Orthonormal:
      check_form();
      break;
    case StructureKind::Subbundle:
    case StructureKind::AdaptedOrthonormal: {
      if (z.subspace.rows() != z.dim || z.subspace.cols() < 1 || z.subspace.cols() >= z.dim)
        fail("subspace basis has the wrong size");
      if (rcond(z.subspace) < 1e-10) fail("subspace basis is degenerate");
      if (z.kind == StructureKind::AdaptedOrthonormal) {
        check_form();
        Bilinear(gram_restrict(z.form, z.subspace), z.subspace_index);
      }
      break;
    }
    case StructureKind::UnitSection:
      if (z.unit.size() != z.dim) fail("section has the wrong size");
      if (z.unit.norm() < tol) fail("section vanishes");
      if (z.metric) {
        check_form();
        if (std::abs(std::abs(z.unit.dot(z.form * z.unit)) - 1.0) > tol) fail("section is not unit length");
      }
      break;
    case StructureKind::AlmostComplex:
    case StructureKind::Unitary: {
      if (z.complex.rows() != z.dim || z.dim % 2 != 0) fail("complex structure has the wrong size");
      const Eigen::MatrixXd id = Eigen::MatrixXd::Identity(z.dim, z.dim);
      if (max_abs(z.complex * z.complex + id) > tol) fail("J^2 != -I");
      if (z.kind == StructureKind::Unitary) {
        check_form();
        if (max_abs(z.complex.transpose() * z.form + z.form * z.complex) > tol) fail("J is not antisymmetric");
      }
      break;
    }
    case StructureKind::OrientedUnitVector3D:
      if (z.dim != 3) fail("needs dimension 3");
      check_form();
      if (z.index != 0) fail("needs a positive definite form");
      if (std::abs(z.unit.dot(z.form * z.unit) - 1.0) > tol) fail("unit vector is not unit length");
      if (z.orientation != 1 && z.orientation != -1) fail("orientation must be +1 or -1");
      break;
    case StructureKind::Product: {
      if (z.split.rows() != z.dim || z.split.cols() != z.dim) fail("split basis has the wrong size");
      checked_inverse(z.split, "split basis");
      if (z.child_offsets().back() != z.dim) fail("children dimensions do not add up");
      for (const auto& c : z.children) validate_space(c, tol);
      break;
    }
  }
}

// ----------------------------------------------------------- QuotientRepr

double QuotientRepr::norm() const {
  double m = 0.0;
  for (const auto& p : parts) m = std::max(m, max_abs(p));
  return m;
}

QuotientRepr QuotientRepr::operator-(const QuotientRepr& other) const {
  if (kind != other.kind || parts.size() != other.parts.size())
    throw Error(ErrorKind::SpecViolation, "quotient classes of different variants");
  QuotientRepr out = *this;
  for (size_t i = 0; i < parts.size(); ++i) out.parts[i] -= other.parts[i];
  return out;
}

QuotientRepr QuotientRepr::operator+(const QuotientRepr& other) const { return *this - other.scaled(-1.0); }

QuotientRepr QuotientRepr::scaled(double s) const {
  QuotientRepr out = *this;
  for (auto& p : out.parts) p *= s;
  return out;
}

namespace {

/// Basis [F | coordinate completion] used for the quotient E/F without a metric.
Eigen::MatrixXd adapted_basis(const StructuredSpace& z) { return complete_basis(z.subspace); }

EndoMatrix sym_part(const StructuredSpace& z, const EndoMatrix& t) { return 0.5 * (t + transpose_wrt(z.form, t)); }
EndoMatrix antisym_part(const StructuredSpace& z, const EndoMatrix& t) {
  return 0.5 * (t - transpose_wrt(z.form, t));
}

}  // namespace

QuotientRepr quotient_project(const StructuredSpace& z, const EndoMatrix& t) {
  if (t.rows() != z.dim || t.cols() != z.dim) throw Error(ErrorKind::ShapeError, "endomorphism has the wrong size");
  QuotientRepr q;
  q.kind = z.kind;
  switch (z.kind) {
    case StructureKind::TrivialFrame:
      q.parts = {t};
      break;
    case StructureKind::Orthonormal:
      q.parts = {sym_part(z, t)};
      break;
    case StructureKind::Subbundle: {
      const int l = static_cast<int>(z.subspace.cols());
      const Eigen::MatrixXd b = adapted_basis(z);
      const Eigen::MatrixXd img = b.partialPivLu().solve(t * z.subspace);
      q.parts = {img.bottomRows(z.dim - l)};
      break;
    }
    case StructureKind::AdaptedOrthonormal: {
      const Eigen::MatrixXd perp = Eigen::MatrixXd::Identity(z.dim, z.dim) - orthogonal_projector(z.form, z.subspace);
      q.parts = {sym_part(z, t), perp * antisym_part(z, t) * z.subspace};
      break;
    }
    case StructureKind::UnitSection:
      if (z.metric)
        q.parts = {sym_part(z, t), antisym_part(z, t) * z.unit};
      else
        q.parts = {t * z.unit};
      break;
    case StructureKind::AlmostComplex:
      q.parts = {commutator(t, z.complex)};
      break;
    case StructureKind::Unitary:
      q.parts = {sym_part(z, t), 0.5 * commutator(t - transpose_wrt(z.form, t), z.complex)};
      break;
    case StructureKind::OrientedUnitVector3D:
      q.parts = {sym_part(z, t), antisym_part(z, t) * z.unit};
      break;
    case StructureKind::Product: {
      const Eigen::MatrixXd tb = z.split.partialPivLu().solve(t * z.split);
      const auto off = z.child_offsets();
      const int nc = static_cast<int>(z.children.size());
      for (int c = 0; c < nc; ++c) {
        const int o = off[c];
        const int d = z.children[c].dim;
        const QuotientRepr sub = quotient_project(z.children[c], tb.block(o, o, d, d));
        q.parts.insert(q.parts.end(), sub.parts.begin(), sub.parts.end());
      }
      for (int a = 0; a < nc; ++a)
        for (int b = 0; b < nc; ++b)
          if (a != b) q.parts.push_back(tb.block(off[a], off[b], z.children[a].dim, z.children[b].dim));
      break;
    }
  }
  return q;
}

QuotientRepr zero_quotient(const StructuredSpace& z) {
  return quotient_project(z, EndoMatrix::Zero(z.dim, z.dim));
}

// ----------------------------------------------------------- structure algebra

EndoMatrix algebra_projection(const StructuredSpace& z, const EndoMatrix& x) {
  const int k = z.dim;
  switch (z.kind) {
    case StructureKind::TrivialFrame:
      return EndoMatrix::Zero(k, k);
    case StructureKind::Orthonormal:
      return antisym_part(z, x);
    case StructureKind::Subbundle: {
      const int l = static_cast<int>(z.subspace.cols());
      const Eigen::MatrixXd b = adapted_basis(z);
      Eigen::MatrixXd xb = b.partialPivLu().solve(x * b);
      xb.bottomLeftCorner(k - l, l).setZero();
      return b * xb * b.inverse();
    }
    case StructureKind::AdaptedOrthonormal: {
      const int l = static_cast<int>(z.subspace.cols());
      const Eigen::MatrixXd p = structure_frame(z);
      Eigen::MatrixXd ab = p.partialPivLu().solve(antisym_part(z, x) * p);
      ab.bottomLeftCorner(k - l, l).setZero();
      ab.topRightCorner(l, k - l).setZero();
      return p * ab * p.inverse();
    }
    case StructureKind::UnitSection:
    case StructureKind::OrientedUnitVector3D: {
      if (!z.metric) {
        // Kill the image of the section: X - (X eps) eps^T / |eps|^2.
        return x - (x * z.unit) * z.unit.transpose() / z.unit.squaredNorm();
      }
      const EndoMatrix a = antisym_part(z, x);
      const VecN ae = a * z.unit;
      const VecN ge = z.form * z.unit;
      const VecN gae = z.form * ae;
      const double nn = z.unit.dot(ge);
      return a - (ae * ge.transpose() - z.unit * gae.transpose()) / nn;
    }
    case StructureKind::AlmostComplex:
      return 0.5 * (x - z.complex * x * z.complex);
    case StructureKind::Unitary: {
      const EndoMatrix a = antisym_part(z, x);
      return 0.5 * (a - z.complex * a * z.complex);
    }
    case StructureKind::Product: {
      const Eigen::MatrixXd binv = z.split.inverse();
      const Eigen::MatrixXd xb = binv * x * z.split;
      Eigen::MatrixXd out = Eigen::MatrixXd::Zero(k, k);
      const auto off = z.child_offsets();
      for (size_t c = 0; c < z.children.size(); ++c) {
        const int d = z.children[c].dim;
        out.block(off[c], off[c], d, d) = algebra_projection(z.children[c], xb.block(off[c], off[c], d, d));
      }
      return z.split * out * binv;
    }
  }
  throw Error(ErrorKind::SpecViolation, "unknown structure kind");
}

EndoMatrix random_algebra_element(const StructuredSpace& z, std::mt19937_64& rng) {
  std::normal_distribution<double> nd(0.0, 1.0);
  EndoMatrix x(z.dim, z.dim);
  for (int i = 0; i < z.dim; ++i)
    for (int j = 0; j < z.dim; ++j) x(i, j) = nd(rng);
  return algebra_projection(z, x);
}

// ------------------------------------------------------------- frames

namespace {

Eigen::MatrixXd complex_orthonormal(const StructuredSpace& z) {
  const int k = z.dim;
  const int l = k / 2;
  const Eigen::MatrixXd& g = z.form;
  const Eigen::MatrixXd& j = z.complex;
  std::vector<VecN> pos, neg;
  std::vector<std::pair<VecN, double>> done;
  for (int c = 0; c < k && static_cast<int>(done.size()) < l; ++c) {
    VecN v = VecN::Unit(k, c);
    for (const auto& [f, sign] : done) {
      const VecN jf = j * f;
      v -= sign * f.dot(g * v) * f + sign * jf.dot(g * v) * jf;
    }
    const double nn = v.dot(g * v);
    if (std::abs(nn) < 1e-10) continue;
    const double sign = nn > 0 ? 1.0 : -1.0;
    v /= std::sqrt(std::abs(nn));
    done.emplace_back(v, sign);
    (sign > 0 ? pos : neg).push_back(v);
  }
  if (static_cast<int>(done.size()) < l) throw Error(ErrorKind::DegenerateForm, "complex Gram-Schmidt failed");
  Eigen::MatrixXd p(k, k);
  int col = 0;
  for (const auto& v : pos) p.col(col++) = v;
  for (const auto& v : neg) p.col(col++) = v;
  for (int i = 0; i < l; ++i) p.col(l + i) = j * p.col(i);
  return p;
}

Eigen::MatrixXd complex_basis(const StructuredSpace& z) {
  const int k = z.dim;
  const int l = k / 2;
  Eigen::MatrixXd f(k, 0);
  for (int c = 0; c < k && f.cols() < l; ++c) {
    Eigen::MatrixXd trial(k, 2 * (f.cols() + 1));
    const int m = static_cast<int>(f.cols());
    trial.leftCols(m) = f;
    trial.col(m) = VecN::Unit(k, c);
    trial.middleCols(m + 1, m) = z.complex * f;
    trial.col(2 * m + 1) = z.complex * VecN::Unit(k, c);
    if (rcond(trial) > 1e-6) {
      Eigen::MatrixXd nf(k, m + 1);
      nf.leftCols(m) = f;
      nf.col(m) = VecN::Unit(k, c);
      f = nf;
    }
  }
  if (f.cols() < l) throw Error(ErrorKind::SingularFrame, "could not build a complex basis");
  Eigen::MatrixXd p(k, k);
  p.leftCols(l) = f;
  p.rightCols(l) = z.complex * f;
  return p;
}

}  // namespace

Eigen::MatrixXd structure_frame(const StructuredSpace& z) {
  const int k = z.dim;
  const Eigen::MatrixXd id = Eigen::MatrixXd::Identity(k, k);
  switch (z.kind) {
    case StructureKind::TrivialFrame:
      return z.frame;
    case StructureKind::Orthonormal:
      return orthonormalize(z.form, id, k);
    case StructureKind::Subbundle:
      return adapted_basis(z);
    case StructureKind::AdaptedOrthonormal: {
      const int l = static_cast<int>(z.subspace.cols());
      const Eigen::MatrixXd q1 = orthonormalize(z.form, z.subspace, l);
      const Eigen::MatrixXd perp = id - orthogonal_projector(z.form, z.subspace);
      const Eigen::MatrixXd q2 = orthonormalize(z.form, perp, k - l);
      Eigen::MatrixXd p(k, k);
      p << q1, q2;
      return p;
    }
    case StructureKind::UnitSection:
    case StructureKind::OrientedUnitVector3D: {
      if (!z.metric) return complete_basis(z.unit);
      const double nn = z.unit.dot(z.form * z.unit);
      const Eigen::MatrixXd perp = id - z.unit * (z.form * z.unit).transpose() / nn;
      const Eigen::MatrixXd rest = orthonormalize(z.form, perp, k - 1);
      Eigen::MatrixXd p(k, k);
      if (nn > 0)
        p << z.unit, rest;
      else
        p << rest, z.unit;
      if (z.kind == StructureKind::OrientedUnitVector3D && p.determinant() * z.orientation < 0)
        p.col(k - 1) *= -1.0;
      return p;
    }
    case StructureKind::AlmostComplex:
      return complex_basis(z);
    case StructureKind::Unitary:
      return complex_orthonormal(z);
    case StructureKind::Product: {
      Eigen::MatrixXd blocks = Eigen::MatrixXd::Zero(k, k);
      const auto off = z.child_offsets();
      for (size_t c = 0; c < z.children.size(); ++c) {
        const int d = z.children[c].dim;
        blocks.block(off[c], off[c], d, d) = structure_frame(z.children[c]);
      }
      return z.split * blocks;
    }
  }
  throw Error(ErrorKind::SpecViolation, "unknown structure kind");
}

double structure_defect(const StructuredSpace& z, const Eigen::MatrixXd& p) {
  const StructuredSpace s = standard_space_like(z);
  double d = 0.0;
  if (p.rows() != z.dim || p.cols() != z.dim) throw Error(ErrorKind::ShapeError, "frame has the wrong size");
  switch (z.kind) {
    case StructureKind::TrivialFrame:
      return max_abs(p - z.frame);
    case StructureKind::Orthonormal:
      return max_abs(p.transpose() * z.form * p - s.form);
    case StructureKind::Subbundle:
    case StructureKind::AdaptedOrthonormal: {
      const int l = static_cast<int>(z.subspace.cols());
      // p must carry the leading coordinate plane into span(F).
      const Eigen::MatrixXd img = p.leftCols(l);
      const Eigen::MatrixXd coef = z.subspace.colPivHouseholderQr().solve(img);
      d = max_abs(img - z.subspace * coef);
      if (z.kind == StructureKind::AdaptedOrthonormal) d = std::max(d, max_abs(p.transpose() * z.form * p - s.form));
      return d;
    }
    case StructureKind::UnitSection:
      d = max_abs(p * s.unit - z.unit);
      if (z.metric) d = std::max(d, max_abs(p.transpose() * z.form * p - s.form));
      return d;
    case StructureKind::AlmostComplex:
      return max_abs(p * s.complex - z.complex * p);
    case StructureKind::Unitary:
      return std::max(max_abs(p * s.complex - z.complex * p), max_abs(p.transpose() * z.form * p - s.form));
    case StructureKind::OrientedUnitVector3D:
      d = std::max(max_abs(p * s.unit - z.unit), max_abs(p.transpose() * z.form * p - s.form));
      if (p.determinant() * z.orientation < 0) d = std::max(d, 1.0);
      return d;
    case StructureKind::Product: {
      const Eigen::MatrixXd pb = z.split.partialPivLu().solve(p);
      const auto off = z.child_offsets();
      Eigen::MatrixXd rest = pb;
      for (size_t c = 0; c < z.children.size(); ++c) {
        const int dd = z.children[c].dim;
        d = std::max(d, structure_defect(z.children[c], pb.block(off[c], off[c], dd, dd)));
        rest.block(off[c], off[c], dd, dd).setZero();
      }
      return std::max(d, max_abs(rest));
    }
  }
  return d;
}

StructuredSpace push_forward(const StructuredSpace& z, const Eigen::MatrixXd& q) {
  const Eigen::MatrixXd qi = checked_inverse(q, "push-forward map");
  StructuredSpace w = z;
  if (z.form.size() > 0) w.form = qi.transpose() * z.form * qi;
  if (z.frame.size() > 0) w.frame = q * z.frame;
  if (z.subspace.size() > 0) w.subspace = q * z.subspace;
  if (z.unit.size() > 0) w.unit = q * z.unit;
  if (z.complex.size() > 0) w.complex = q * z.complex * qi;
  if (z.kind == StructureKind::OrientedUnitVector3D && q.determinant() < 0) w.orientation = -z.orientation;
  if (z.split.size() > 0) w.split = q * z.split;
  return w;
}

// ---------------------------------------------------------- bundle level

StructuredSpace GStructureSpec::at(const VecN& x) const {
  switch (kind) {
    case StructureKind::TrivialFrame:
      return StructuredSpace::trivial_frame(frame(x));
    case StructureKind::Orthonormal:
      return StructuredSpace::orthonormal(form(x), index);
    case StructureKind::Subbundle:
      return StructuredSpace::subbundle(rank, subspace(x));
    case StructureKind::AdaptedOrthonormal:
      return StructuredSpace::adapted_orthonormal(form(x), index, subspace(x), subspace_index);
    case StructureKind::UnitSection:
      if (metric) return StructuredSpace::metric_unit_section(form(x), index, unit(x).col(0));
      return StructuredSpace::unit_section(unit(x).col(0));
    case StructureKind::AlmostComplex:
      return StructuredSpace::almost_complex(complex(x));
    case StructureKind::Unitary:
      return StructuredSpace::unitary(form(x), index, complex(x));
    case StructureKind::OrientedUnitVector3D:
      return StructuredSpace::oriented_unit_vector(form(x), unit(x).col(0), orientation);
    case StructureKind::Product: {
      std::vector<StructuredSpace> ch;
      for (const auto& c : children) ch.push_back(c.at(x));
      return StructuredSpace::product(split(x), std::move(ch));
    }
  }
  throw Error(ErrorKind::SpecViolation, "unknown structure kind");
}

QuotientRepr quotient_project(const GStructureSpec& spec, const EndoMatrix& t, const VecN& x) {
  const StructuredSpace z = spec.at(x);
  validate_space(z);
  return quotient_project(z, t);
}

namespace {

/// Half the metric endomorphism K with g(K a, b) = (nabla_v g)(a, b).
EndoMatrix metric_endo(const GStructureSpec& spec, const ConnectionField& conn, const VecN& x, const VecN& v) {
  const EndoMatrix n = covariant_derivative_form(conn, spec.form, x, v);
  return spec.form(x).partialPivLu().solve(n);
}

}  // namespace

QuotientRepr inner_torsion(const GStructureSpec& spec, const ConnectionField& conn, const VecN& x, const VecN& v) {
  if (conn.rank() != spec.rank) throw Error(ErrorKind::ShapeError, "connection rank differs from structure rank");
  const StructuredSpace z = spec.at(x);
  validate_space(z);
  QuotientRepr q;
  q.kind = spec.kind;
  switch (spec.kind) {
    case StructureKind::TrivialFrame: {
      const auto gam = christoffel_of_frame(conn, spec.frame, x);
      EndoMatrix t = EndoMatrix::Zero(spec.rank, spec.rank);
      for (int i = 0; i < conn.dim(); ++i) t += v(i) * gam[i];
      q.parts = {t};
      break;
    }
    case StructureKind::Orthonormal:
      q.parts = {-0.5 * metric_endo(spec, conn, x, v)};
      break;
    case StructureKind::Subbundle: {
      const int l = static_cast<int>(z.subspace.cols());
      const Eigen::MatrixXd df = spec.subspace.directional(x, v) + conn.gamma(x, v) * z.subspace;
      const Eigen::MatrixXd img = adapted_basis(z).partialPivLu().solve(df);
      q.parts = {img.bottomRows(spec.rank - l)};
      break;
    }
    case StructureKind::AdaptedOrthonormal: {
      const EndoMatrix k = metric_endo(spec, conn, x, v);
      const Eigen::MatrixXd perp =
          Eigen::MatrixXd::Identity(spec.rank, spec.rank) - orthogonal_projector(z.form, z.subspace);
      const Eigen::MatrixXd df = spec.subspace.directional(x, v) + conn.gamma(x, v) * z.subspace;
      q.parts = {-0.5 * k, perp * df + 0.5 * perp * k * z.subspace};
      break;
    }
    case StructureKind::UnitSection:
    case StructureKind::OrientedUnitVector3D: {
      const VecN de = covariant_derivative_section(conn, spec.unit, x, v);
      if (!spec.metric && spec.kind == StructureKind::UnitSection) {
        q.parts = {de};
      } else {
        const EndoMatrix k = metric_endo(spec, conn, x, v);
        q.parts = {-0.5 * k, de + 0.5 * k * z.unit};
      }
      break;
    }
    case StructureKind::AlmostComplex:
      q.parts = {covariant_derivative_endo(conn, spec.complex, x, v)};
      break;
    case StructureKind::Unitary: {
      const EndoMatrix k = metric_endo(spec, conn, x, v);
      q.parts = {-0.5 * k, covariant_derivative_endo(conn, spec.complex, x, v) + 0.5 * commutator(k, z.complex)};
      break;
    }
    case StructureKind::Product: {
      const int n = conn.dim();
      const int m = spec.rank;
      const MatrixField split = spec.split;
      const ConnectionField full = conn;
      // Christoffel matrices in the split trivialization, one block per axis.
      auto split_gamma = [split, full, n, m](const VecN& y) {
        const Eigen::MatrixXd b = split(y);
        const Eigen::MatrixXd binv = checked_inverse(b, "split basis");
        const auto gam = full.at(y);
        Eigen::MatrixXd out(m, m * n);
        for (int i = 0; i < n; ++i) out.middleCols(i * m, m) = binv * (split.derivative(y, i) + gam[i] * b);
        return out;
      };
      const Eigen::MatrixXd gb_all = split_gamma(x);
      EndoMatrix gb = EndoMatrix::Zero(m, m);
      for (int i = 0; i < n; ++i) gb += v(i) * gb_all.middleCols(i * m, m);
      const auto off = z.child_offsets();
      const int nc = static_cast<int>(spec.children.size());
      for (int c = 0; c < nc; ++c) {
        const int o = off[c];
        const int d = spec.children[c].rank;
        MatrixField child_blocks = conn.field().derived(
            d, d * n,
            [split_gamma, o, d, n, m](const VecN& y) {
              const Eigen::MatrixXd all = split_gamma(y);
              Eigen::MatrixXd out(d, d * n);
              for (int i = 0; i < n; ++i) out.middleCols(i * d, d) = all.block(o, i * m + o, d, d);
              return out;
            },
            "split block connection");
        const QuotientRepr sub = inner_torsion(spec.children[c], ConnectionField(n, d, child_blocks), x, v);
        q.parts.insert(q.parts.end(), sub.parts.begin(), sub.parts.end());
      }
      for (int a = 0; a < nc; ++a)
        for (int b = 0; b < nc; ++b)
          if (a != b) q.parts.push_back(gb.block(off[a], off[b], spec.children[a].rank, spec.children[b].rank));
      break;
    }
  }
  return q;
}

MatrixField structure_frame_field(const GStructureSpec& spec) {
  const MatrixField& base = spec.kind == StructureKind::Product        ? spec.split
                            : spec.kind == StructureKind::TrivialFrame ? spec.frame
                            : spec.form.valid()                        ? spec.form
                            : spec.subspace.valid()                    ? spec.subspace
                            : spec.unit.valid()                        ? spec.unit
                                                                       : spec.complex;
  const GStructureSpec copy = spec;
  return base.derived(
      spec.rank, spec.rank, [copy](const VecN& x) { return structure_frame(copy.at(x)); }, "structure frame");
}

}  // namespace gstim
