#pragma once

#include <Eigen/Dense>

#include <stdexcept>
#include <string>
#include <vector>

namespace gstim {

using VecN = Eigen::VectorXd;
using LinMap = Eigen::MatrixXd;
using EndoMatrix = Eigen::MatrixXd;

enum class ErrorKind {
  SingularFrame,
  DegenerateForm,
  OutOfDomain,
  ShapeError,
  SpecViolation,
  UnsupportedModel,
  FrameNotInStructure,
  ResidualGate,
  IntegrationDiverged,
  ConfigError,
};

const char* error_kind_name(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what);
  ErrorKind kind() const { return kind_; }

 private:
  ErrorKind kind_;
};

/// Numerical thresholds shared across the library. Callers may copy and
/// adjust a Tolerances value; the defaults are the documented ones.
struct Tolerances {
  double singular_rcond = 1e-12;
  double degenerate_det = 1e-12;
  double signature = 1e-9;
  double spec_valid = 1e-10;
  double frame_drift = 1e-6;
  double residual_gate = 1e-6;
};

const Tolerances& default_tolerances();

/// Symmetric bilinear form with a declared signature.
class Bilinear {
 public:
  Bilinear() = default;
  /// Symmetrizes `m` exactly and checks the eigenvalue sign counts against
  /// `negative` (the index). Throws DegenerateForm or SpecViolation.
  Bilinear(const Eigen::MatrixXd& m, int negative);
  /// Infers the index from the eigenvalues.
  static Bilinear inferred(const Eigen::MatrixXd& m);
  /// diag(1,...,1,-1,...,-1) with `negative` trailing minus signs.
  static Bilinear minkowski(int dim, int negative);

  const Eigen::MatrixXd& matrix() const { return m_; }
  int dim() const { return static_cast<int>(m_.rows()); }
  int positive() const { return dim() - negative_; }
  int negative() const { return negative_; }
  double operator()(const VecN& a, const VecN& b) const { return a.dot(m_ * b); }

 private:
  Eigen::MatrixXd m_;
  int negative_ = 0;
};

/// Reciprocal condition number estimate (smallest over largest singular value).
double rcond(const Eigen::MatrixXd& m);

/// Inverse that throws SingularFrame below the reciprocal condition threshold.
Eigen::MatrixXd checked_inverse(const Eigen::MatrixXd& m, const char* what = "frame");

EndoMatrix ad_conjugate(const LinMap& p, const EndoMatrix& x);

/// T* with B(Tv, w) = B(v, T* w).
EndoMatrix transpose_wrt(const Bilinear& b, const EndoMatrix& t);
EndoMatrix transpose_wrt(const Eigen::MatrixXd& b, const EndoMatrix& t);

EndoMatrix commutator(const EndoMatrix& a, const EndoMatrix& b);

/// Cross product on an oriented three dimensional space with Gram matrix
/// `gram`, expressed in the coordinates of the basis the Gram matrix refers
/// to. `orientation` is +1 when that basis is positively oriented.
VecN cross_product(const Eigen::Matrix3d& gram, int orientation, const VecN& a, const VecN& b);

/// Gram-Schmidt with respect to a possibly indefinite form. Columns of the
/// result are orthonormal: positive-norm vectors first, then negative ones.
/// Candidates are taken in order from `candidates` columns, skipping those
/// that are numerically dependent. Throws DegenerateForm if fewer than
/// `count` vectors can be produced.
Eigen::MatrixXd orthonormalize(const Eigen::MatrixXd& gram, const Eigen::MatrixXd& candidates,
                               int count);

/// Greedy completion of the columns of `lead` to a basis using coordinate
/// vectors, in index order.
Eigen::MatrixXd complete_basis(const Eigen::MatrixXd& lead);

double max_abs(const Eigen::MatrixXd& m);

}  // namespace gstim
