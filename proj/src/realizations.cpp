// Concrete models of the target frame bundles.

#include "gstim/homogeneous_models.hpp"

#include <unsupported/Eigen/MatrixFunctions>

#include <cmath>
#include <complex>
#include <functional>

namespace gstim {

namespace {

using CMat = Eigen::MatrixXcd;

Eigen::MatrixXd as_matrix(const VecN& v, int rows, int cols) {
  return Eigen::Map<const Eigen::MatrixXd>(v.data(), rows, cols);
}

VecN as_vector(const Eigen::MatrixXd& m) { return Eigen::Map<const VecN>(m.data(), m.size()); }

Eigen::MatrixXd block_diagonal(const std::vector<Eigen::MatrixXd>& blocks) {
  int r = 0, c = 0;
  for (const auto& b : blocks) {
    r += static_cast<int>(b.rows());
    c += static_cast<int>(b.cols());
  }
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(r, c);
  r = c = 0;
  for (const auto& b : blocks) {
    out.block(r, c, b.rows(), b.cols()) = b;
    r += static_cast<int>(b.rows());
    c += static_cast<int>(b.cols());
  }
  return out;
}

// Newton-Schulz step towards the group preserving eta: F <- F (3I - eta F^T eta F) / 2.
Eigen::MatrixXd pseudo_orthogonal_polish(const Eigen::MatrixXd& f, const Eigen::MatrixXd& eta, int sweeps = 2) {
  Eigen::MatrixXd out = f;
  const Eigen::MatrixXd id = Eigen::MatrixXd::Identity(f.cols(), f.cols());
  for (int i = 0; i < sweeps; ++i) out = out * (3.0 * id - eta * out.transpose() * eta * out) * 0.5;
  return out;
}

// Pulls a nearly structure-preserving frame of a standard space back onto the
// structure group.
Eigen::MatrixXd polish_frame(const StructuredSpace& z, const Eigen::MatrixXd& h) {
  switch (z.kind) {
    case StructureKind::TrivialFrame:
      return h;
    case StructureKind::Orthonormal:
      return pseudo_orthogonal_polish(h, z.form);
    case StructureKind::Unitary: {
      const Eigen::MatrixXd lin = 0.5 * (h - z.complex * h * z.complex);
      return pseudo_orthogonal_polish(lin, z.form);
    }
    case StructureKind::OrientedUnitVector3D: {
      Eigen::MatrixXd out = Eigen::MatrixXd::Identity(3, 3);
      out.bottomRightCorner(2, 2) = pseudo_orthogonal_polish(h.bottomRightCorner(2, 2), Eigen::MatrixXd::Identity(2, 2));
      return out;
    }
    case StructureKind::Product: {
      Eigen::MatrixXd out = Eigen::MatrixXd::Zero(h.rows(), h.cols());
      const auto off = z.child_offsets();
      for (size_t c = 0; c < z.children.size(); ++c) {
        const int d = z.children[c].dim;
        out.block(off[c], off[c], d, d) = polish_frame(z.children[c], h.block(off[c], off[c], d, d));
      }
      return out;
    }
    default:
      return h;
  }
}

// ------------------------------------------------ pseudo-spheres in R^{n+1}

class QuadricRealization final : public TargetRealization {
 public:
  explicit QuadricRealization(ModelSpace model) : model_(std::move(model)) {
    const int n = model_.dim;
    sign_ = model_.curvature > 0 ? 1.0 : -1.0;
    radius_ = 1.0 / std::sqrt(std::abs(model_.curvature));
    form_ = Bilinear::minkowski(n, model_.index).matrix();
    eta_ = Eigen::MatrixXd::Zero(n + 1, n + 1);
    eta_(0, 0) = sign_;
    eta_.bottomRightCorner(n, n) = form_;
    std_ = standard_space(model_);
  }

  std::string name() const override { return model_.curvature > 0 ? "pseudo_sphere" : "hyperboloid"; }
  const ModelSpace& model() const override { return model_; }
  int state_size() const override { return (dim() + 1) * (dim() + 1); }
  int ambient_dim() const override { return dim() + 1; }
  VecN base_state() const override { return as_vector(Eigen::MatrixXd::Identity(dim() + 1, dim() + 1)); }

  Eigen::MatrixXd algebra_element(const VecN& u, const EndoMatrix& x) const {
    const int n = dim();
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n + 1, n + 1);
    for (int j = 0; j < n; ++j) {
      a(j + 1, 0) = u(j) / radius_;
      a(0, j + 1) = -sign_ * form_(j, j) * u(j) / radius_;
    }
    a.bottomRightCorner(n, n) = algebra_projection(std_, x);
    return a;
  }

  VecN velocity(const VecN& state, const VecN& u, const EndoMatrix& x) const override {
    const int m = dim() + 1;
    return as_vector(as_matrix(state, m, m) * algebra_element(u, x));
  }

  std::pair<VecN, EndoMatrix> lambda_of(const VecN& state, const VecN& dstate) const override {
    const int n = dim(), m = n + 1;
    const Eigen::MatrixXd f = as_matrix(state, m, m);
    const Eigen::MatrixXd a = f.partialPivLu().solve(as_matrix(dstate, m, m));
    return {radius_ * a.block(1, 0, n, 1).col(0), a.bottomRightCorner(n, n)};
  }

  VecN reproject(const VecN& state) const override {
    const int m = dim() + 1;
    return as_vector(pseudo_orthogonal_polish(as_matrix(state, m, m), eta_));
  }

  double structure_defect(const VecN& state) const override {
    const int m = dim() + 1;
    const Eigen::MatrixXd f = as_matrix(state, m, m);
    return max_abs(f.transpose() * eta_ * f - eta_);
  }

  VecN point(const VecN& state) const override {
    const int m = dim() + 1;
    return radius_ * as_matrix(state, m, m).col(0);
  }
  Eigen::MatrixXd frame(const VecN& state) const override {
    const int m = dim() + 1;
    return as_matrix(state, m, m).rightCols(dim());
  }
  Eigen::MatrixXd frame_form() const override { return form_; }

  VecN act_frame(const VecN& state, const Eigen::MatrixXd& h) const override {
    const int m = dim() + 1;
    Eigen::MatrixXd f = as_matrix(state, m, m);
    f.rightCols(dim()) = f.rightCols(dim()) * h;
    return as_vector(f);
  }

  double distance(const VecN& a, const VecN& b) const override { return max_abs(a - b); }

  VecN display_coords(const VecN& state) const override {
    const VecN p = point(state);
    if (sign_ > 0 && p.size() <= 3) return p;
    // Stereographic projection from -e0 (Poincare ball for the hyperboloid).
    return p.tail(dim()) / (1.0 + p(0) / radius_);
  }

 private:
  ModelSpace model_;
  StructuredSpace std_;
  double sign_ = 1.0;
  double radius_ = 1.0;
  Eigen::MatrixXd form_;
  Eigen::MatrixXd eta_;
};

// ------------------------------------- complex projective / hyperbolic space

class ComplexQuadricRealization final : public TargetRealization {
 public:
  explicit ComplexQuadricRealization(ModelSpace model) : model_(std::move(model)) {
    m_ = model_.dim / 2;
    sign_ = model_.curvature > 0 ? 1.0 : -1.0;
    radius_ = 2.0 / std::sqrt(std::abs(model_.curvature));
    eta_ = Eigen::VectorXd::Ones(m_ + 1);
    eta_(0) = sign_;
    std_ = standard_space(model_);
  }

  std::string name() const override { return model_.curvature > 0 ? "complex_projective" : "complex_hyperbolic"; }
  const ModelSpace& model() const override { return model_; }
  int state_size() const override { return 2 * (m_ + 1) * (m_ + 1); }
  int ambient_dim() const override { return 2 * (m_ + 1) * (m_ + 1); }
  VecN base_state() const override { return pack(CMat::Identity(m_ + 1, m_ + 1)); }

  VecN velocity(const VecN& state, const VecN& u, const EndoMatrix& x) const override {
    const int k = m_ + 1;
    const EndoMatrix xp = algebra_projection(std_, x);
    CMat a = CMat::Zero(k, k);
    CMat xc(m_, m_);
    for (int i = 0; i < m_; ++i)
      for (int j = 0; j < m_; ++j) xc(i, j) = {xp(i, j), xp(m_ + i, j)};
    const std::complex<double> a00 = -xc.trace() / static_cast<double>(k);
    a(0, 0) = a00;
    for (int j = 0; j < m_; ++j) {
      const std::complex<double> aj0(u(j) / radius_, u(m_ + j) / radius_);
      a(j + 1, 0) = aj0;
      a(0, j + 1) = -sign_ * std::conj(aj0);
    }
    a.bottomRightCorner(m_, m_) = xc + a00 * CMat::Identity(m_, m_);
    return pack(unpack(state) * a);
  }

  std::pair<VecN, EndoMatrix> lambda_of(const VecN& state, const VecN& dstate) const override {
    const CMat a = unpack(state).partialPivLu().solve(unpack(dstate));
    const int n = 2 * m_;
    VecN u(n);
    EndoMatrix x(n, n);
    for (int j = 0; j < m_; ++j) {
      u(j) = radius_ * a(j + 1, 0).real();
      u(m_ + j) = radius_ * a(j + 1, 0).imag();
    }
    for (int i = 0; i < m_; ++i)
      for (int j = 0; j < m_; ++j) {
        std::complex<double> c = a(i + 1, j + 1);
        if (i == j) c -= a(0, 0);
        x(i, j) = c.real();
        x(m_ + i, m_ + j) = c.real();
        x(m_ + i, j) = c.imag();
        x(i, m_ + j) = -c.imag();
      }
    return {u, x};
  }

  VecN reproject(const VecN& state) const override {
    CMat g = unpack(state);
    const CMat id = CMat::Identity(m_ + 1, m_ + 1);
    const CMat eta = eta_.cast<std::complex<double>>().asDiagonal();
    for (int i = 0; i < 2; ++i) g = g * (3.0 * id - eta * g.adjoint() * eta * g) * 0.5;
    return pack(g);
  }

  double structure_defect(const VecN& state) const override {
    const CMat g = unpack(state);
    const CMat eta = eta_.cast<std::complex<double>>().asDiagonal();
    return (g.adjoint() * eta * g - eta).cwiseAbs().maxCoeff();
  }

  VecN point(const VecN& state) const override {
    const CMat g = unpack(state);
    const CMat eta = eta_.cast<std::complex<double>>().asDiagonal();
    return pack(sign_ * g.col(0) * g.col(0).adjoint() * eta);
  }

  Eigen::MatrixXd frame(const VecN& state) const override {
    const CMat g = unpack(state);
    const CMat eta = eta_.cast<std::complex<double>>().asDiagonal();
    const std::complex<double> i1(0.0, 1.0);
    Eigen::MatrixXd out(ambient_dim(), 2 * m_);
    for (int j = 0; j < m_; ++j) {
      const CMat re = g.col(j + 1) * g.col(0).adjoint() + g.col(0) * g.col(j + 1).adjoint();
      const CMat im = i1 * (g.col(j + 1) * g.col(0).adjoint() - g.col(0) * g.col(j + 1).adjoint());
      out.col(j) = pack(sign_ * re * eta / radius_);
      out.col(m_ + j) = pack(sign_ * im * eta / radius_);
    }
    return out;
  }
  Eigen::MatrixXd frame_form() const override { return std_.form; }

  VecN act_frame(const VecN& state, const Eigen::MatrixXd& h) const override {
    const Eigen::MatrixXd& j0 = std_.complex;
    if (max_abs(h * j0 - j0 * h) > 1e-9)
      throw Error(ErrorKind::FrameNotInStructure, "frame change is not complex linear");
    CMat hc(m_, m_);
    for (int i = 0; i < m_; ++i)
      for (int j = 0; j < m_; ++j) hc(i, j) = {h(i, j), h(m_ + i, j)};
    CMat g = unpack(state);
    g.rightCols(m_) = g.rightCols(m_) * hc;
    return pack(g);
  }

  double distance(const VecN& a, const VecN& b) const override { return max_abs(a - b); }

  VecN display_coords(const VecN& state) const override {
    const VecN p = point(state);
    if (m_ != 1) return p;
    const CMat pm = unpack(p);
    // Bloch sphere coordinates of the projector.
    VecN out(3);
    out << 2.0 * pm(1, 0).real(), 2.0 * pm(1, 0).imag(), (pm(0, 0) - pm(1, 1)).real();
    return out;
  }

 private:
  VecN pack(const CMat& c) const {
    VecN out(2 * c.size());
    out.head(c.size()) = as_vector(c.real());
    out.tail(c.size()) = as_vector(c.imag());
    return out;
  }
  CMat unpack(const VecN& v) const {
    const int k = m_ + 1;
    CMat c(k, k);
    c.real() = as_matrix(v.head(k * k), k, k);
    c.imag() = as_matrix(v.tail(k * k), k, k);
    return c;
  }

  ModelSpace model_;
  StructuredSpace std_;
  int m_ = 1;
  double sign_ = 1.0;
  double radius_ = 1.0;
  Eigen::VectorXd eta_;
};

// --------------------------------------- frame fields on a coordinate space

// State (y, H): y a point in coordinates, H a frame relative to a fixed frame
// field E(y) of the target whose connection matrices are gamma_e(y, a).
class FrameFieldRealization : public TargetRealization {
 public:
  explicit FrameFieldRealization(ModelSpace model) : model_(std::move(model)) { std_ = standard_space(model_); }

  const ModelSpace& model() const override { return model_; }
  int state_size() const override { return point_size() + dim() * dim(); }
  int ambient_dim() const override { return point_size(); }
  VecN base_state() const override {
    VecN s(state_size());
    s.head(point_size()) = base_point();
    s.tail(dim() * dim()) = as_vector(Eigen::MatrixXd::Identity(dim(), dim()));
    return s;
  }

  virtual int point_size() const = 0;
  virtual VecN base_point() const = 0;
  virtual Eigen::MatrixXd frame_field(const VecN& y) const = 0;
  virtual EndoMatrix gamma_e(const VecN& y, const VecN& a) const = 0;

  VecN velocity(const VecN& state, const VecN& u, const EndoMatrix& x) const override {
    const int n = dim(), m = point_size();
    const VecN y = state.head(m);
    const Eigen::MatrixXd h = as_matrix(state.tail(n * n), n, n);
    const EndoMatrix xp = project_admissible(model_, u, x);
    const VecN hu = h * u;
    VecN out(state_size());
    out.head(m) = frame_field(y) * hu;
    out.tail(n * n) = as_vector(h * xp - gamma_e(y, hu) * h);
    return out;
  }

  std::pair<VecN, EndoMatrix> lambda_of(const VecN& state, const VecN& dstate) const override {
    const int n = dim(), m = point_size();
    const VecN y = state.head(m);
    const Eigen::MatrixXd h = as_matrix(state.tail(n * n), n, n);
    const Eigen::MatrixXd hd = as_matrix(dstate.tail(n * n), n, n);
    const VecN hu = frame_field(y).colPivHouseholderQr().solve(VecN(dstate.head(m)));
    const Eigen::PartialPivLU<Eigen::MatrixXd> lu(h);
    const VecN u = lu.solve(hu);
    return {u, lu.solve(hd + gamma_e(y, hu) * h)};
  }

  VecN reproject(const VecN& state) const override {
    const int n = dim();
    VecN out = state;
    out.tail(n * n) = as_vector(polish_frame(std_, as_matrix(state.tail(n * n), n, n)));
    return out;
  }

  EndoMatrix christoffel(const VecN& state, const VecN& u) const override {
    const int n = dim();
    const Eigen::MatrixXd h = as_matrix(state.tail(n * n), n, n);
    return h.partialPivLu().solve(gamma_e(state.head(point_size()), h * u) * h);
  }

  double structure_defect(const VecN& state) const override {
    const int n = dim();
    return gstim::structure_defect(std_, as_matrix(state.tail(n * n), n, n));
  }

  VecN point(const VecN& state) const override { return state.head(point_size()); }
  Eigen::MatrixXd frame(const VecN& state) const override {
    const int n = dim();
    return frame_field(state.head(point_size())) * as_matrix(state.tail(n * n), n, n);
  }

  VecN act_frame(const VecN& state, const Eigen::MatrixXd& h) const override {
    const int n = dim();
    VecN out = state;
    out.tail(n * n) = as_vector(as_matrix(state.tail(n * n), n, n) * h);
    return out;
  }

  double distance(const VecN& a, const VecN& b) const override { return max_abs(a - b); }
  VecN display_coords(const VecN& state) const override { return point(state); }

 protected:
  ModelSpace model_;
  StructuredSpace std_;
};

// Euclidean (or flat Hermitian) space: y = position, E = identity.
class AffineRealization final : public FrameFieldRealization {
 public:
  using FrameFieldRealization::FrameFieldRealization;
  std::string name() const override { return "affine"; }
  int point_size() const override { return dim(); }
  VecN base_point() const override { return VecN::Zero(dim()); }
  Eigen::MatrixXd frame_field(const VecN&) const override { return Eigen::MatrixXd::Identity(dim(), dim()); }
  EndoMatrix gamma_e(const VecN&, const VecN&) const override { return EndoMatrix::Zero(dim(), dim()); }
  Eigen::MatrixXd frame_form() const override { return std_.form; }
};

// E(kappa, tau) in fibration coordinates (x, y, z) with the orthonormal frame
// (E3, E1, E2), E3 the unit Killing field along the fibres.
class FibrationRealization final : public FrameFieldRealization {
 public:
  using FrameFieldRealization::FrameFieldRealization;
  std::string name() const override { return "fibration_coordinates"; }
  int point_size() const override { return 3; }
  VecN base_point() const override { return VecN::Zero(3); }

  Eigen::MatrixXd frame_field(const VecN& p) const override {
    const double k = model_.kappa, t = model_.tau;
    const double mu = 1.0 + 0.25 * k * (p(0) * p(0) + p(1) * p(1));
    Eigen::MatrixXd e(3, 3);
    e.col(0) << 0.0, 0.0, 1.0;
    e.col(1) << mu, 0.0, -t * p(1);
    e.col(2) << 0.0, mu, t * p(0);
    return e;
  }

  EndoMatrix gamma_e(const VecN& p, const VecN& a) const override {
    const double k = model_.kappa, t = model_.tau;
    // [E1, E2] = -(k/2) y E1 + (k/2) x E2 + 2 tau E3 in the order (E3, E1, E2).
    std::vector<Eigen::MatrixXd> ad(3, Eigen::MatrixXd::Zero(3, 3));
    VecN b12(3);
    b12 << 2.0 * t, -0.5 * k * p(1), 0.5 * k * p(0);
    ad[1].col(2) = b12;
    ad[2].col(1) = -b12;
    const auto gam = koszul_from_brackets(ad, Eigen::MatrixXd::Identity(3, 3));
    return a(0) * gam[0] + a(1) * gam[1] + a(2) * gam[2];
  }

  Eigen::MatrixXd frame_form() const override { return Eigen::MatrixXd::Identity(3, 3); }
};

// Lie group with left-invariant frame p0 e_i. Points are either matrices of a
// representation or exponential coordinates of the second kind.
class LieFrameRealization final : public FrameFieldRealization {
 public:
  LieFrameRealization(ModelSpace model, bool use_representation)
      : FrameFieldRealization(std::move(model)), use_rep_(use_representation) {
    const auto& g = model_.lie;
    const int n = g.dim();
    gam_ = koszul_gamma(g);
    p0_ = g.base_frame;
    p0i_ = checked_inverse(p0_, "base frame");
    for (int i = 0; i < n; ++i) {
      EndoMatrix m = EndoMatrix::Zero(n, n);
      for (int k = 0; k < n; ++k) m += p0_(k, i) * gam_[k];
      inner_.push_back(p0i_ * m * p0_);
    }
    if (use_rep_) {
      rep_size_ = static_cast<int>(g.representation[0].rows());
      for (int r = 0; r < rep_size_; ++r)
        for (int c = 0; c < rep_size_; ++c)
          for (const auto& b : g.representation)
            if (b(r, c) != 0.0) {
              support_.push_back(c * rep_size_ + r);
              break;
            }
    }
  }

  std::string name() const override { return use_rep_ ? "matrix_group" : "second_kind_coordinates"; }
  int point_size() const override { return use_rep_ ? rep_size_ * rep_size_ : dim(); }
  VecN base_point() const override {
    if (use_rep_) return as_vector(Eigen::MatrixXd::Identity(rep_size_, rep_size_));
    return VecN::Zero(dim());
  }

  Eigen::MatrixXd frame_field(const VecN& y) const override {
    const int n = dim();
    if (use_rep_) {
      const Eigen::MatrixXd gm = as_matrix(y, rep_size_, rep_size_);
      Eigen::MatrixXd e(point_size(), n);
      for (int i = 0; i < n; ++i) e.col(i) = as_vector(gm * rep(p0_.col(i)));
      return e;
    }
    // Column k of m: algebra coordinates of the left-invariant field d/dt_k.
    Eigen::MatrixXd m(n, n);
    for (int k = 0; k < n; ++k) {
      VecN col = VecN::Unit(n, k);
      for (int j = k + 1; j < n; ++j) col = (Eigen::MatrixXd(-y(j) * model_.lie.ad[j])).exp() * col;
      m.col(k) = col;
    }
    return m.partialPivLu().solve(p0_);
  }

  EndoMatrix gamma_e(const VecN&, const VecN& a) const override {
    EndoMatrix m = EndoMatrix::Zero(dim(), dim());
    for (int i = 0; i < dim(); ++i) m += a(i) * inner_[i];
    return m;
  }

  Eigen::MatrixXd frame_form() const override { return p0_.transpose() * model_.lie.inner * p0_; }

  VecN display_coords(const VecN& state) const override {
    if (!use_rep_) return point(state);
    VecN out(support_.size());
    const Eigen::MatrixXd gm = as_matrix(point(state), rep_size_, rep_size_);
    for (size_t i = 0; i < support_.size(); ++i) out(i) = gm(support_[i]);
    return out;
  }

 private:
  Eigen::MatrixXd rep(const VecN& a) const {
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(rep_size_, rep_size_);
    for (int i = 0; i < dim(); ++i) m += a(i) * model_.lie.representation[i];
    return m;
  }

  bool use_rep_;
  int rep_size_ = 0;
  std::vector<EndoMatrix> gam_;
  std::vector<EndoMatrix> inner_;
  Eigen::MatrixXd p0_, p0i_;
  std::vector<int> support_;
};

// ------------------------------------------------------------- products

class ProductRealization final : public TargetRealization {
 public:
  explicit ProductRealization(ModelSpace model) : model_(std::move(model)) {
    for (const auto& c : model_.children) parts_.push_back(realize_target(c));
  }

  std::string name() const override {
    std::string s = "product(";
    for (size_t i = 0; i < parts_.size(); ++i) s += (i ? "," : "") + parts_[i]->name();
    return s + ")";
  }
  const ModelSpace& model() const override { return model_; }
  int state_size() const override {
    int s = 0;
    for (const auto& p : parts_) s += p->state_size();
    return s;
  }
  int ambient_dim() const override {
    int s = 0;
    for (const auto& p : parts_) s += p->ambient_dim();
    return s;
  }
  VecN base_state() const override {
    return concat([&](size_t i) { return parts_[i]->base_state(); });
  }

  VecN velocity(const VecN& state, const VecN& u, const EndoMatrix& x) const override {
    const EndoMatrix xp = project_admissible(model_, u, x);
    int so = 0, d = 0;
    VecN out(state_size());
    for (const auto& p : parts_) {
      const int ss = p->state_size(), n = p->dim();
      out.segment(so, ss) = p->velocity(state.segment(so, ss), u.segment(d, n), xp.block(d, d, n, n));
      so += ss;
      d += n;
    }
    return out;
  }

  std::pair<VecN, EndoMatrix> lambda_of(const VecN& state, const VecN& dstate) const override {
    VecN u(dim());
    EndoMatrix x = EndoMatrix::Zero(dim(), dim());
    int so = 0, d = 0;
    for (const auto& p : parts_) {
      const int ss = p->state_size(), n = p->dim();
      auto [uc, xc] = p->lambda_of(state.segment(so, ss), dstate.segment(so, ss));
      u.segment(d, n) = uc;
      x.block(d, d, n, n) = xc;
      so += ss;
      d += n;
    }
    return {u, x};
  }

  VecN reproject(const VecN& state) const override {
    return map_states(state, [&](size_t i, const VecN& s) { return parts_[i]->reproject(s); });
  }

  double structure_defect(const VecN& state) const override {
    double d = 0.0;
    int so = 0;
    for (const auto& p : parts_) {
      d = std::max(d, p->structure_defect(state.segment(so, p->state_size())));
      so += p->state_size();
    }
    return d;
  }

  VecN point(const VecN& state) const override {
    std::vector<VecN> pts;
    int so = 0;
    for (const auto& p : parts_) {
      pts.push_back(p->point(state.segment(so, p->state_size())));
      so += p->state_size();
    }
    return concat([&](size_t i) { return pts[i]; });
  }

  Eigen::MatrixXd frame(const VecN& state) const override {
    std::vector<Eigen::MatrixXd> fr;
    int so = 0;
    for (const auto& p : parts_) {
      fr.push_back(p->frame(state.segment(so, p->state_size())));
      so += p->state_size();
    }
    return block_diagonal(fr);
  }

  Eigen::MatrixXd frame_form() const override {
    std::vector<Eigen::MatrixXd> f;
    for (const auto& p : parts_) f.push_back(p->frame_form());
    return block_diagonal(f);
  }

  VecN act_frame(const VecN& state, const Eigen::MatrixXd& h) const override {
    Eigen::MatrixXd rest = h;
    std::vector<int> off;
    int d = 0;
    for (const auto& p : parts_) {
      off.push_back(d);
      rest.block(d, d, p->dim(), p->dim()).setZero();
      d += p->dim();
    }
    if (max_abs(rest) > 1e-9)
      throw Error(ErrorKind::FrameNotInStructure, "frame change does not respect the product splitting");
    return map_states(state, [&](size_t i, const VecN& s) {
      const int n = parts_[i]->dim();
      return parts_[i]->act_frame(s, h.block(off[i], off[i], n, n));
    });
  }

  double distance(const VecN& a, const VecN& b) const override { return max_abs(a - b); }

  EndoMatrix christoffel(const VecN& state, const VecN& u) const override {
    std::vector<Eigen::MatrixXd> blocks;
    int so = 0, d = 0;
    for (const auto& p : parts_) {
      blocks.push_back(p->christoffel(state.segment(so, p->state_size()), u.segment(d, p->dim())));
      so += p->state_size();
      d += p->dim();
    }
    return block_diagonal(blocks);
  }

  VecN display_coords(const VecN& state) const override {
    std::vector<VecN> pts;
    int so = 0;
    for (const auto& p : parts_) {
      pts.push_back(p->display_coords(state.segment(so, p->state_size())));
      so += p->state_size();
    }
    return concat([&](size_t i) { return pts[i]; });
  }

 private:
  template <class F>
  VecN concat(F get) const {
    std::vector<VecN> pieces;
    int total = 0;
    for (size_t i = 0; i < parts_.size(); ++i) {
      pieces.push_back(get(i));
      total += static_cast<int>(pieces.back().size());
    }
    VecN out(total);
    int o = 0;
    for (const auto& p : pieces) {
      out.segment(o, p.size()) = p;
      o += static_cast<int>(p.size());
    }
    return out;
  }

  template <class F>
  VecN map_states(const VecN& state, F f) const {
    VecN out(state.size());
    int so = 0;
    for (size_t i = 0; i < parts_.size(); ++i) {
      const int ss = parts_[i]->state_size();
      out.segment(so, ss) = f(i, VecN(state.segment(so, ss)));
      so += ss;
    }
    return out;
  }

  ModelSpace model_;
  std::vector<std::unique_ptr<TargetRealization>> parts_;
};

}  // namespace

EndoMatrix TargetRealization::christoffel(const VecN& state, const VecN& u) const {
  return lambda_of(state, velocity(state, u, EndoMatrix::Zero(dim(), dim()))).second;
}

std::unique_ptr<TargetRealization> realize_target(const ModelSpace& model) {
  validate_model(model);
  switch (model.kind) {
    case ModelKind::SpaceForm:
      if (model.curvature == 0.0) return std::make_unique<AffineRealization>(model);
      return std::make_unique<QuadricRealization>(model);
    case ModelKind::ComplexSpaceForm:
      if (model.curvature == 0.0) return std::make_unique<AffineRealization>(model);
      return std::make_unique<ComplexQuadricRealization>(model);
    case ModelKind::LieGroup:
      if (!model.lie.representation.empty()) return std::make_unique<LieFrameRealization>(model, true);
      return realize_lie_group_in_coordinates(model);
    case ModelKind::EKappaTau:
      return std::make_unique<FibrationRealization>(model);
    case ModelKind::Product:
      return std::make_unique<ProductRealization>(model);
  }
  throw Error(ErrorKind::UnsupportedModel, "no realization for " + model.describe());
}

std::unique_ptr<TargetRealization> realize_lie_group_in_coordinates(const ModelSpace& model) {
  if (model.kind != ModelKind::LieGroup) throw Error(ErrorKind::UnsupportedModel, "not a Lie group model");
  if (model.dim > 10)
    throw Error(ErrorKind::UnsupportedModel, "Lie algebras above dimension 10 need a matrix representation");
  validate_model(model);
  return std::make_unique<LieFrameRealization>(model, false);
}

// ----------------------------------------------------- numerical tensors

namespace {

// Directional derivative of v along w at s: five-point central stencil.
VecN directional_derivative(const std::function<VecN(const VecN&)>& v, const VecN& s, const VecN& w, double eps) {
  return (v(s - 2.0 * eps * w) - 8.0 * v(s - eps * w) + 8.0 * v(s + eps * w) - v(s + 2.0 * eps * w)) / (12.0 * eps);
}

}  // namespace

RealizationTensors realization_tensors(const TargetRealization& target, const VecN& state, double step) {
  const int n = target.dim();
  const EndoMatrix zero = EndoMatrix::Zero(n, n);
  std::vector<std::function<VecN(const VecN&)>> fields;
  std::vector<EndoMatrix> omegas;
  for (int i = 0; i < n; ++i) {
    const VecN e = VecN::Unit(n, i);
    fields.emplace_back([&target, e, zero](const VecN& s) { return target.velocity(s, e, zero); });
    omegas.push_back(target.lambda_of(state, fields.back()(state)).second);
  }
  RealizationTensors out;
  out.curvature_blocks.assign(n * n, zero);
  out.torsion_vectors.assign(n * n, VecN::Zero(n));
  for (int i = 0; i < n; ++i) out.christoffel.push_back(target.christoffel(state, VecN::Unit(n, i)));
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      const VecN vi = fields[i](state), vj = fields[j](state);
      const VecN br = directional_derivative(fields[j], state, vi, step) -
                      directional_derivative(fields[i], state, vj, step);
      const auto [tb, wb] = target.lambda_of(state, br);
      const VecN ui = VecN::Unit(n, i), uj = VecN::Unit(n, j);
      const VecN tor = -tb + omegas[i] * uj - omegas[j] * ui;
      const EndoMatrix cur = -wb + commutator(omegas[i], omegas[j]);
      out.torsion_vectors[i * n + j] = tor;
      out.torsion_vectors[j * n + i] = -tor;
      out.curvature_blocks[i * n + j] = cur;
      out.curvature_blocks[j * n + i] = -cur;
    }
  return out;
}

VecN flow_constant(const TargetRealization& target, const VecN& state, const VecN& u, const EndoMatrix& x,
                   int steps) {
  const double h = 1.0 / steps;
  VecN s = state;
  for (int k = 0; k < steps; ++k) {
    const VecN k1 = target.velocity(s, u, x);
    const VecN k2 = target.velocity(s + 0.5 * h * k1, u, x);
    const VecN k3 = target.velocity(s + 0.5 * h * k2, u, x);
    const VecN k4 = target.velocity(s + h * k3, u, x);
    s += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    s = target.reproject(s);
  }
  return s;
}

}  // namespace gstim
