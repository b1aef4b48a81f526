#include "gstim/homogeneous_models.hpp"

#include <cmath>
#include <sstream>

namespace gstim {

// ------------------------------------------------------------ Lie algebras

VecN LieAlgebraData::bracket(const VecN& a, const VecN& b) const {
  VecN out = VecN::Zero(dim());
  for (int i = 0; i < dim(); ++i)
    if (a(i) != 0.0) out += a(i) * (ad[i] * b);
  return out;
}

LieAlgebraData LieAlgebraData::from_brackets(std::string name, const std::vector<std::vector<VecN>>& table) {
  LieAlgebraData g;
  g.name = std::move(name);
  const int n = static_cast<int>(table.size());
  g.ad.assign(n, Eigen::MatrixXd::Zero(n, n));
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) g.ad[i].col(j) = table[i][j];
  g.inner = Eigen::MatrixXd::Identity(n, n);
  g.base_frame = Eigen::MatrixXd::Identity(n, n);
  return g;
}

namespace {

Eigen::MatrixXd unit_matrix(int size, int r, int c) {
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(size, size);
  m(r, c) = 1.0;
  return m;
}

std::vector<std::vector<VecN>> zero_table(int n) {
  return std::vector<std::vector<VecN>>(n, std::vector<VecN>(n, VecN::Zero(n)));
}

}  // namespace

LieAlgebraData named_lie_algebra(const std::string& name, double parameter) {
  if (name == "heisenberg") {
    const double tau = parameter;
    auto t = zero_table(3);
    t[0][1] = 2.0 * tau * VecN::Unit(3, 2);
    t[1][0] = -t[0][1];
    LieAlgebraData g = LieAlgebraData::from_brackets("heisenberg", t);
    if (tau != 0.0)
      g.representation = {unit_matrix(3, 0, 1), unit_matrix(3, 1, 2), unit_matrix(3, 0, 2) / (2.0 * tau)};
    else
      g.representation = {unit_matrix(4, 0, 3), unit_matrix(4, 1, 3), unit_matrix(4, 2, 3)};
    return g;
  }
  if (name == "so3") {
    auto t = zero_table(3);
    for (int i = 0; i < 3; ++i) {
      const int j = (i + 1) % 3;
      const int k = (i + 2) % 3;
      t[i][j] = VecN::Unit(3, k);
      t[j][i] = -VecN::Unit(3, k);
    }
    LieAlgebraData g = LieAlgebraData::from_brackets("so3", t);
    for (int i = 0; i < 3; ++i) {
      const int j = (i + 1) % 3;
      const int k = (i + 2) % 3;
      Eigen::MatrixXd l = Eigen::MatrixXd::Zero(3, 3);
      l(k, j) = 1.0;
      l(j, k) = -1.0;
      g.representation.push_back(l);
    }
    return g;
  }
  if (name == "abelian") {
    const int n = static_cast<int>(parameter);
    if (n < 1) throw Error(ErrorKind::ConfigError, "abelian algebra needs a positive dimension");
    LieAlgebraData g = LieAlgebraData::from_brackets("abelian", zero_table(n));
    for (int i = 0; i < n; ++i) g.representation.push_back(unit_matrix(n + 1, i, n));
    return g;
  }
  if (name == "affine_line") {
    auto t = zero_table(2);
    t[0][1] = VecN::Unit(2, 1);
    t[1][0] = -VecN::Unit(2, 1);
    LieAlgebraData g = LieAlgebraData::from_brackets("affine_line", t);
    g.representation = {unit_matrix(2, 0, 0), unit_matrix(2, 0, 1)};
    return g;
  }
  throw Error(ErrorKind::ConfigError, "unknown Lie algebra '" + name + "'");
}

// ------------------------------------------------------------ model space

const char* model_kind_name(ModelKind kind) {
  switch (kind) {
    case ModelKind::SpaceForm: return "spaceform";
    case ModelKind::ComplexSpaceForm: return "complexspaceform";
    case ModelKind::LieGroup: return "liegroup";
    case ModelKind::EKappaTau: return "ekappatau";
    case ModelKind::Product: return "product";
  }
  return "unknown";
}

ModelSpace ModelSpace::space_form(double c, int dim, int index) {
  ModelSpace m;
  m.kind = ModelKind::SpaceForm;
  m.curvature = c;
  m.dim = dim;
  m.index = index;
  return m;
}

ModelSpace ModelSpace::complex_space_form(double c, int dim, int index) {
  ModelSpace m = space_form(c, dim, index);
  m.kind = ModelKind::ComplexSpaceForm;
  return m;
}

ModelSpace ModelSpace::lie_group(LieAlgebraData algebra) {
  ModelSpace m;
  m.kind = ModelKind::LieGroup;
  m.dim = algebra.dim();
  m.lie = std::move(algebra);
  return m;
}

ModelSpace ModelSpace::e_kappa_tau(double kappa, double tau) {
  ModelSpace m;
  m.kind = ModelKind::EKappaTau;
  m.dim = 3;
  m.kappa = kappa;
  m.tau = tau;
  return m;
}

ModelSpace ModelSpace::product(std::vector<ModelSpace> children) {
  ModelSpace m;
  m.kind = ModelKind::Product;
  for (const auto& c : children) {
    m.dim += c.dim;
    m.index += c.index;
  }
  m.children = std::move(children);
  return m;
}

std::string ModelSpace::describe() const {
  std::ostringstream os;
  switch (kind) {
    case ModelKind::SpaceForm:
      os << "SpaceForm(c=" << curvature << ", dim=" << dim << ", index=" << index << ")";
      break;
    case ModelKind::ComplexSpaceForm:
      os << "ComplexSpaceForm(c=" << curvature << ", dim=" << dim << ", index=" << index << ")";
      break;
    case ModelKind::LieGroup:
      os << "LieGroup(" << lie.name << ", dim=" << dim << ")";
      break;
    case ModelKind::EKappaTau:
      os << "EKappaTau(kappa=" << kappa << ", tau=" << tau << ")";
      break;
    case ModelKind::Product: {
      os << "Product(";
      for (size_t i = 0; i < children.size(); ++i) os << (i ? ", " : "") << children[i].describe();
      os << ")";
      break;
    }
  }
  return os.str();
}

void validate_model(const ModelSpace& model, double tol) {
  auto fail = [&](const std::string& msg) { throw Error(ErrorKind::SpecViolation, model.describe() + ": " + msg); };
  switch (model.kind) {
    case ModelKind::SpaceForm:
      if (model.dim < 1 || model.index < 0 || model.index > model.dim) fail("bad dimension or index");
      break;
    case ModelKind::ComplexSpaceForm:
      if (model.dim < 2 || model.dim % 2 || model.index % 2 || model.index > model.dim) fail("bad dimension or index");
      if (model.curvature != 0.0 && model.index != 0)
        throw Error(ErrorKind::UnsupportedModel, "indefinite complex space forms with c != 0 are not realized");
      break;
    case ModelKind::LieGroup: {
      const auto& g = model.lie;
      const int n = g.dim();
      if (n < 1) fail("empty algebra");
      for (int i = 0; i < n; ++i) {
        if (g.ad[i].rows() != n || g.ad[i].cols() != n) fail("structure constants have the wrong shape");
        for (int j = 0; j < n; ++j)
          if (max_abs(g.ad[i].col(j) + g.ad[j].col(i)) > tol) fail("bracket is not antisymmetric");
      }
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
          for (int k = 0; k < n; ++k) {
            const VecN ei = VecN::Unit(n, i), ej = VecN::Unit(n, j), ek = VecN::Unit(n, k);
            const VecN jac = g.bracket(ei, g.bracket(ej, ek)) + g.bracket(ej, g.bracket(ek, ei)) +
                             g.bracket(ek, g.bracket(ei, ej));
            if (max_abs(jac) > tol) fail("Jacobi identity fails");
          }
      Bilinear::inferred(g.inner);
      if (g.base_frame.rows() != n || g.base_frame.cols() != n) fail("base frame has the wrong shape");
      checked_inverse(g.base_frame, "base frame");
      if (!g.representation.empty()) {
        if (static_cast<int>(g.representation.size()) != n) fail("representation size mismatch");
        for (int i = 0; i < n; ++i)
          for (int j = 0; j < n; ++j) {
            Eigen::MatrixXd rhs = Eigen::MatrixXd::Zero(g.representation[0].rows(), g.representation[0].cols());
            for (int k = 0; k < n; ++k) rhs += g.ad[i](k, j) * g.representation[k];
            if (max_abs(commutator(g.representation[i], g.representation[j]) - rhs) > tol)
              fail("matrix representation does not respect brackets");
          }
      }
      break;
    }
    case ModelKind::EKappaTau:
      if (model.dim != 3 || model.index != 0) fail("E(kappa,tau) is three-dimensional and Riemannian");
      break;
    case ModelKind::Product: {
      if (model.children.size() < 2) fail("product needs at least two factors");
      int d = 0, r = 0;
      for (const auto& c : model.children) {
        validate_model(c, tol);
        d += c.dim;
        r += c.index;
      }
      if (d != model.dim || r != model.index) fail("dimensions or indices do not add up");
      break;
    }
  }
}

StructureKind model_structure_kind(const ModelSpace& model) {
  switch (model.kind) {
    case ModelKind::SpaceForm: return StructureKind::Orthonormal;
    case ModelKind::ComplexSpaceForm: return StructureKind::Unitary;
    case ModelKind::LieGroup: return StructureKind::TrivialFrame;
    case ModelKind::EKappaTau: return StructureKind::OrientedUnitVector3D;
    case ModelKind::Product: return StructureKind::Product;
  }
  return StructureKind::Orthonormal;
}

StructuredSpace standard_space(const ModelSpace& model) {
  const int n = model.dim;
  switch (model.kind) {
    case ModelKind::SpaceForm:
      return StructuredSpace::orthonormal(Bilinear::minkowski(n, model.index).matrix(), model.index);
    case ModelKind::ComplexSpaceForm:
      return StructuredSpace::unitary(standard_hermitian_form(n, model.index), model.index,
                                      standard_complex_structure(n));
    case ModelKind::LieGroup:
      return StructuredSpace::trivial_frame(Eigen::MatrixXd::Identity(n, n));
    case ModelKind::EKappaTau:
      return StructuredSpace::oriented_unit_vector(Eigen::MatrixXd::Identity(3, 3), VecN::Unit(3, 0), 1);
    case ModelKind::Product: {
      std::vector<StructuredSpace> ch;
      for (const auto& c : model.children) ch.push_back(standard_space(c));
      return StructuredSpace::product(Eigen::MatrixXd::Identity(n, n), std::move(ch));
    }
  }
  throw Error(ErrorKind::SpecViolation, "unknown model");
}

bool space_matches_model(const ModelSpace& model, const StructuredSpace& z) {
  if (z.dim != model.dim || z.kind != model_structure_kind(model)) return false;
  switch (model.kind) {
    case ModelKind::SpaceForm:
    case ModelKind::ComplexSpaceForm:
      return z.index == model.index;
    case ModelKind::Product: {
      if (z.children.size() != model.children.size()) return false;
      for (size_t i = 0; i < z.children.size(); ++i)
        if (!space_matches_model(model.children[i], z.children[i])) return false;
      return true;
    }
    default:
      return true;
  }
}

// ------------------------------------------------------ Koszul connection

std::vector<EndoMatrix> koszul_from_brackets(const std::vector<Eigen::MatrixXd>& ad, const Eigen::MatrixXd& gram) {
  const int n = static_cast<int>(ad.size());
  if (std::abs(gram.determinant()) < default_tolerances().degenerate_det)
    throw Error(ErrorKind::DegenerateForm, "Koszul formula needs a nondegenerate inner product");
  const Eigen::MatrixXd ginv = gram.inverse();
  auto br = [&](int i, int j) -> VecN { return ad[i].col(j); };
  auto ip = [&](const VecN& a, const VecN& b) { return a.dot(gram * b); };
  std::vector<EndoMatrix> out(n, EndoMatrix::Zero(n, n));
  for (int i = 0; i < n; ++i) {
    const VecN x = VecN::Unit(n, i);
    for (int j = 0; j < n; ++j) {
      const VecN y = VecN::Unit(n, j);
      VecN lowered(n);
      for (int k = 0; k < n; ++k) {
        const VecN z = VecN::Unit(n, k);
        lowered(k) = 0.5 * (-ip(x, br(j, k)) + ip(y, br(k, i)) + ip(z, br(i, j)));
      }
      out[i].col(j) = ginv * lowered;
    }
  }
  return out;
}

std::vector<EndoMatrix> koszul_gamma(const LieAlgebraData& algebra) {
  return koszul_from_brackets(algebra.ad, algebra.inner);
}

// --------------------------------------------------- characteristic tensors

EndoMatrix CharacteristicTensors::curvature(const VecN& v, const VecN& w) const {
  EndoMatrix out = EndoMatrix::Zero(dim, dim);
  for (int i = 0; i < dim; ++i)
    for (int j = 0; j < dim; ++j)
      if (v(i) * w(j) != 0.0) out += v(i) * w(j) * curvature_blocks[i * dim + j];
  return out;
}

VecN CharacteristicTensors::torsion(const VecN& v, const VecN& w) const {
  VecN out = VecN::Zero(dim);
  for (int i = 0; i < dim; ++i)
    for (int j = 0; j < dim; ++j)
      if (v(i) * w(j) != 0.0) out += v(i) * w(j) * torsion_vectors[i * dim + j];
  return out;
}

QuotientRepr CharacteristicTensors::inner(const VecN& v) const {
  QuotientRepr out = inner_basis[0].scaled(v(0));
  for (int i = 1; i < dim; ++i) out = out + inner_basis[i].scaled(v(i));
  return out;
}

namespace {

struct LieTensors {
  std::vector<EndoMatrix> inner;      // In_o(e_i)
  std::vector<VecN> torsion;          // T_o(e_i, e_j)
  std::vector<EndoMatrix> curvature;  // R_o(e_i, e_j)
};

LieTensors lie_tensors(const LieAlgebraData& g) {
  const int n = g.dim();
  const auto gam = koszul_gamma(g);
  const Eigen::MatrixXd& p0 = g.base_frame;
  const Eigen::MatrixXd p0i = checked_inverse(p0, "base frame");
  auto gamma_of = [&](const VecN& a) {
    EndoMatrix m = EndoMatrix::Zero(n, n);
    for (int i = 0; i < n; ++i) m += a(i) * gam[i];
    return m;
  };
  LieTensors t;
  for (int i = 0; i < n; ++i) t.inner.push_back(p0i * gamma_of(p0.col(i)) * p0);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      const VecN a = p0.col(i), b = p0.col(j);
      const VecN ab = g.bracket(a, b);
      t.torsion.push_back(p0i * (gamma_of(a) * b - gamma_of(b) * a - ab));
      t.curvature.push_back(p0i * (commutator(gamma_of(a), gamma_of(b)) - gamma_of(ab)) * p0);
    }
  return t;
}

}  // namespace

CharacteristicTensors characteristic_tensors(const ModelSpace& model, const StructuredSpace& z) {
  if (!space_matches_model(model, z))
    throw Error(ErrorKind::SpecViolation, std::string("space with ") + structure_kind_name(z.kind) +
                                              " structure does not fit " + model.describe());
  const int n = z.dim;
  CharacteristicTensors ct;
  ct.dim = n;
  ct.curvature_blocks.assign(n * n, EndoMatrix::Zero(n, n));
  ct.torsion_vectors.assign(n * n, VecN::Zero(n));
  const QuotientRepr zero = zero_quotient(z);
  ct.inner_basis.assign(n, zero);
  switch (model.kind) {
    case ModelKind::SpaceForm: {
      const Eigen::MatrixXd& g = z.form;
      const double c = model.curvature;
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
          const VecN ei = VecN::Unit(n, i), ej = VecN::Unit(n, j);
          ct.curvature_blocks[i * n + j] = c * (ei * (g * ej).transpose() - ej * (g * ei).transpose());
        }
      break;
    }
    case ModelKind::ComplexSpaceForm: {
      const Eigen::MatrixXd& g = z.form;
      const Eigen::MatrixXd& jj = z.complex;
      const double c = model.curvature;
      for (int i = 0; i < n; ++i)
        for (int k = 0; k < n; ++k) {
          const VecN z1 = VecN::Unit(n, i), z2 = VecN::Unit(n, k);
          // Matrix of z3 -> R(z1, z2) z3.
          const Eigen::RowVectorXd g1 = (g * z1).transpose();
          const Eigen::RowVectorXd g2 = (g * z2).transpose();
          const Eigen::MatrixXd m = z2 * g1 - z1 * g2 - (jj * z2) * (g1 * jj) + (jj * z1) * (g2 * jj) -
                                    2.0 * z1.dot(g * jj * z2) * jj;
          ct.curvature_blocks[i * n + k] = -0.25 * c * m;
        }
      break;
    }
    case ModelKind::LieGroup: {
      const LieTensors t = lie_tensors(model.lie);
      const Eigen::MatrixXd& p = z.frame;
      const Eigen::MatrixXd pi = checked_inverse(p, "structure frame");
      for (int a = 0; a < n; ++a) {
        EndoMatrix in = EndoMatrix::Zero(n, n);
        for (int i = 0; i < n; ++i) in += pi(i, a) * t.inner[i];
        ct.inner_basis[a] = quotient_project(z, p * in * pi);
      }
      for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b) {
          EndoMatrix r = EndoMatrix::Zero(n, n);
          VecN tv = VecN::Zero(n);
          for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) {
              const double w = pi(i, a) * pi(j, b);
              if (w == 0.0) continue;
              r += w * t.curvature[i * n + j];
              tv += w * t.torsion[i * n + j];
            }
          ct.curvature_blocks[a * n + b] = p * r * pi;
          ct.torsion_vectors[a * n + b] = p * tv;
        }
      break;
    }
    case ModelKind::EKappaTau: {
      const Eigen::MatrixXd& g = z.form;
      const VecN& xi = z.unit;
      const double a = model.kappa - 3.0 * model.tau * model.tau;
      const double b = model.kappa - 4.0 * model.tau * model.tau;
      const Eigen::RowVectorXd gxi = (g * xi).transpose();
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
          const VecN v = VecN::Unit(n, i), w = VecN::Unit(n, j);
          const Eigen::RowVectorXd gv = (g * v).transpose();
          const Eigen::RowVectorXd gw = (g * w).transpose();
          const double vx = gxi.dot(v), wx = gxi.dot(w);
          // u -> (kappa-3tau^2)(<w,u>v - <v,u>w)
          //      - (kappa-4tau^2)(<w,xi><u,xi>v + <w,u><v,xi>xi - <v,u><w,xi>xi - <v,xi><u,xi>w)
          const Eigen::MatrixXd m = a * (v * gw - w * gv) -
                                    b * (wx * v * gxi + vx * xi * gw - wx * xi * gv - vx * w * gxi);
          ct.curvature_blocks[i * n + j] = m;
        }
      Eigen::Matrix3d g3 = g;
      for (int i = 0; i < n; ++i) {
        QuotientRepr q = zero;
        q.parts[1] = model.tau * cross_product(g3, z.orientation, VecN::Unit(3, i), xi);
        ct.inner_basis[i] = q;
      }
      break;
    }
    case ModelKind::Product: {
      const Eigen::MatrixXd& bs = z.split;
      const Eigen::MatrixXd bi = checked_inverse(bs, "split basis");
      const auto off = z.child_offsets();
      const int nc = static_cast<int>(z.children.size());
      std::vector<CharacteristicTensors> sub;
      for (int c = 0; c < nc; ++c) sub.push_back(characteristic_tensors(model.children[c], z.children[c]));
      for (int i = 0; i < n; ++i) {
        const VecN ai = bi.col(i);
        QuotientRepr q;
        q.kind = StructureKind::Product;
        for (int c = 0; c < nc; ++c) {
          const QuotientRepr s = sub[c].inner(ai.segment(off[c], z.children[c].dim));
          q.parts.insert(q.parts.end(), s.parts.begin(), s.parts.end());
        }
        for (size_t p = q.parts.size(); p < zero.parts.size(); ++p) q.parts.push_back(zero.parts[p]);
        ct.inner_basis[i] = q;
        for (int j = 0; j < n; ++j) {
          const VecN aj = bi.col(j);
          Eigen::MatrixXd r = Eigen::MatrixXd::Zero(n, n);
          VecN tv = VecN::Zero(n);
          for (int c = 0; c < nc; ++c) {
            const int d = z.children[c].dim;
            r.block(off[c], off[c], d, d) = sub[c].curvature(ai.segment(off[c], d), aj.segment(off[c], d));
            tv.segment(off[c], d) = sub[c].torsion(ai.segment(off[c], d), aj.segment(off[c], d));
          }
          ct.curvature_blocks[i * n + j] = bs * r * bi;
          ct.torsion_vectors[i * n + j] = bs * tv;
        }
      }
      break;
    }
  }
  return ct;
}

// ------------------------------------------------------ admissible space

EndoMatrix inner_torsion_representative(const ModelSpace& model, const VecN& u) {
  const int n = model.dim;
  switch (model.kind) {
    case ModelKind::SpaceForm:
    case ModelKind::ComplexSpaceForm:
      return EndoMatrix::Zero(n, n);
    case ModelKind::LieGroup: {
      const LieTensors t = lie_tensors(model.lie);
      EndoMatrix m = EndoMatrix::Zero(n, n);
      for (int i = 0; i < n; ++i) m += u(i) * t.inner[i];
      return m;
    }
    case ModelKind::EKappaTau: {
      const VecN e = VecN::Unit(3, 0);
      const Eigen::Vector3d a = Eigen::Vector3d(u(0), u(1), u(2)).cross(Eigen::Vector3d(1, 0, 0));
      return model.tau * (VecN(a) * e.transpose() - e * VecN(a).transpose());
    }
    case ModelKind::Product: {
      EndoMatrix m = EndoMatrix::Zero(n, n);
      int o = 0;
      for (const auto& c : model.children) {
        m.block(o, o, c.dim, c.dim) = inner_torsion_representative(c, u.segment(o, c.dim));
        o += c.dim;
      }
      return m;
    }
  }
  return EndoMatrix::Zero(n, n);
}

EndoMatrix project_admissible(const ModelSpace& model, const VecN& u, const EndoMatrix& x) {
  const EndoMatrix rep = inner_torsion_representative(model, u);
  return rep + algebra_projection(standard_space(model), x - rep);
}

}  // namespace gstim
