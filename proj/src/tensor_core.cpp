#include "gstim/tensor_core.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include <cmath>
#include <sstream>

namespace gstim {

const char* error_kind_name(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::SingularFrame: return "SingularFrame";
    case ErrorKind::DegenerateForm: return "DegenerateForm";
    case ErrorKind::OutOfDomain: return "OutOfDomain";
    case ErrorKind::ShapeError: return "ShapeError";
    case ErrorKind::SpecViolation: return "SpecViolation";
    case ErrorKind::UnsupportedModel: return "UnsupportedModel";
    case ErrorKind::FrameNotInStructure: return "FrameNotInStructure";
    case ErrorKind::ResidualGate: return "ResidualGate";
    case ErrorKind::IntegrationDiverged: return "IntegrationDiverged";
    case ErrorKind::ConfigError: return "ConfigError";
  }
  return "Unknown";
}

Error::Error(ErrorKind kind, const std::string& what)
    : std::runtime_error(std::string(error_kind_name(kind)) + ": " + what), kind_(kind) {}

const Tolerances& default_tolerances() {
  static const Tolerances tol{};
  return tol;
}

Bilinear::Bilinear(const Eigen::MatrixXd& m, int negative) {
  if (m.rows() != m.cols()) throw Error(ErrorKind::ShapeError, "bilinear form must be square");
  m_ = 0.5 * (m + m.transpose());
  negative_ = negative;
  if (std::abs(m_.determinant()) < default_tolerances().degenerate_det)
    throw Error(ErrorKind::DegenerateForm, "bilinear form is degenerate");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m_);
  const double scale = std::max(1.0, es.eigenvalues().cwiseAbs().maxCoeff());
  int neg = 0;
  for (int i = 0; i < es.eigenvalues().size(); ++i) {
    const double ev = es.eigenvalues()(i);
    if (std::abs(ev) < default_tolerances().signature * scale)
      throw Error(ErrorKind::DegenerateForm, "bilinear form has a near-zero eigenvalue");
    if (ev < 0) ++neg;
  }
  if (neg != negative) {
    std::ostringstream os;
    os << "declared index " << negative << " but eigenvalues give " << neg;
    throw Error(ErrorKind::SpecViolation, os.str());
  }
}

Bilinear Bilinear::inferred(const Eigen::MatrixXd& m) {
  Eigen::MatrixXd s = 0.5 * (m + m.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(s);
  int neg = 0;
  for (int i = 0; i < es.eigenvalues().size(); ++i)
    if (es.eigenvalues()(i) < 0) ++neg;
  return Bilinear(s, neg);
}

Bilinear Bilinear::minkowski(int dim, int negative) {
  Eigen::MatrixXd m = Eigen::MatrixXd::Identity(dim, dim);
  for (int i = dim - negative; i < dim; ++i) m(i, i) = -1.0;
  return Bilinear(m, negative);
}

double rcond(const Eigen::MatrixXd& m) {
  if (m.rows() == 0) return 1.0;
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(m);
  const auto& sv = svd.singularValues();
  const double top = sv(0);
  if (top == 0.0) return 0.0;
  return sv(sv.size() - 1) / top;
}

Eigen::MatrixXd checked_inverse(const Eigen::MatrixXd& m, const char* what) {
  if (m.rows() != m.cols()) throw Error(ErrorKind::ShapeError, std::string(what) + " is not square");
  if (!m.allFinite() || rcond(m) < default_tolerances().singular_rcond)
    throw Error(ErrorKind::SingularFrame, std::string(what) + " is singular");
  return m.partialPivLu().inverse();
}

EndoMatrix ad_conjugate(const LinMap& p, const EndoMatrix& x) {
  if (p.cols() != x.rows() || x.rows() != x.cols())
    throw Error(ErrorKind::ShapeError, "ad_conjugate dimension mismatch");
  return p * x * checked_inverse(p);
}

EndoMatrix transpose_wrt(const Eigen::MatrixXd& b, const EndoMatrix& t) {
  if (b.rows() != t.rows() || t.rows() != t.cols())
    throw Error(ErrorKind::ShapeError, "transpose_wrt dimension mismatch");
  if (std::abs(b.determinant()) < default_tolerances().degenerate_det)
    throw Error(ErrorKind::DegenerateForm, "transpose_wrt needs a nondegenerate form");
  return b.partialPivLu().solve(t.transpose() * b);
}

EndoMatrix transpose_wrt(const Bilinear& b, const EndoMatrix& t) { return transpose_wrt(b.matrix(), t); }

EndoMatrix commutator(const EndoMatrix& a, const EndoMatrix& b) { return a * b - b * a; }

VecN cross_product(const Eigen::Matrix3d& gram, int orientation, const VecN& a, const VecN& b) {
  const Eigen::Vector3d a3 = a.head<3>();
  const Eigen::Vector3d b3 = b.head<3>();
  const double det = gram.determinant();
  if (det <= 0) throw Error(ErrorKind::DegenerateForm, "cross product needs a positive definite form");
  // In coordinates, <a x b, c> = vol(a, b, c) = orientation * sqrt(det G) * det[a b c].
  const Eigen::Vector3d raw = a3.cross(b3);
  return static_cast<double>(orientation) * std::sqrt(det) * gram.ldlt().solve(raw);
}

Eigen::MatrixXd orthonormalize(const Eigen::MatrixXd& gram, const Eigen::MatrixXd& candidates,
                               int count) {
  std::vector<VecN> pos;
  std::vector<VecN> neg;
  std::vector<std::pair<VecN, double>> done;
  for (int c = 0; c < candidates.cols() && static_cast<int>(done.size()) < count; ++c) {
    VecN v = candidates.col(c);
    const double scale = std::max(1e-300, std::abs(v.dot(gram * v)) + v.squaredNorm());
    for (const auto& [b, sign] : done) v -= sign * b.dot(gram * v) * b;
    const double nn = v.dot(gram * v);
    if (std::abs(nn) < 1e-10 * scale) continue;
    const double sign = nn > 0 ? 1.0 : -1.0;
    v /= std::sqrt(std::abs(nn));
    done.emplace_back(v, sign);
    (sign > 0 ? pos : neg).push_back(v);
  }
  if (static_cast<int>(done.size()) < count)
    throw Error(ErrorKind::DegenerateForm, "orthonormalization ran out of independent vectors");
  Eigen::MatrixXd out(gram.rows(), count);
  int col = 0;
  for (const auto& v : pos) out.col(col++) = v;
  for (const auto& v : neg) out.col(col++) = v;
  return out;
}

Eigen::MatrixXd complete_basis(const Eigen::MatrixXd& lead) {
  const int dim = static_cast<int>(lead.rows());
  Eigen::MatrixXd out(dim, dim);
  int filled = static_cast<int>(lead.cols());
  out.leftCols(filled) = lead;
  for (int i = 0; i < dim && filled < dim; ++i) {
    Eigen::MatrixXd trial(dim, filled + 1);
    trial.leftCols(filled) = out.leftCols(filled);
    trial.col(filled) = Eigen::VectorXd::Unit(dim, i);
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(trial);
    const auto& sv = svd.singularValues();
    if (sv(sv.size() - 1) > 1e-3 * sv(0)) {
      out.col(filled) = trial.col(filled);
      ++filled;
    }
  }
  if (filled < dim) throw Error(ErrorKind::SingularFrame, "could not complete basis");
  return out;
}

double max_abs(const Eigen::MatrixXd& m) { return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff(); }

}  // namespace gstim
