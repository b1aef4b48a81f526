#pragma once

#include "gstim/g_structure.hpp"

#include <memory>
#include <string>
#include <utility>
#include <vector>

namespace gstim {

/// A finite-dimensional real Lie algebra in a fixed basis, with an inner
/// product, a base frame p0: R^n -> algebra, and optionally a faithful
/// matrix representation of the basis elements.
struct LieAlgebraData {
  std::string name;
  std::vector<Eigen::MatrixXd> ad;  // ad[i](k, j) = structure constant c^k_ij
  Eigen::MatrixXd inner;            // Gram matrix of the inner product
  Eigen::MatrixXd base_frame;       // p0, columns are algebra coordinates
  std::vector<Eigen::MatrixXd> representation;

  int dim() const { return static_cast<int>(ad.size()); }
  VecN bracket(const VecN& a, const VecN& b) const;
  /// Builds ad from a bracket table: table[i][j] = coordinates of [E_i, E_j].
  static LieAlgebraData from_brackets(std::string name, const std::vector<std::vector<VecN>>& table);
};

/// Named algebras: heisenberg (parameter tau, [E1,E2] = 2 tau E3), so3,
/// abelian (parameter = dimension), affine_line ([E1,E2] = E2).
LieAlgebraData named_lie_algebra(const std::string& name, double parameter);

enum class ModelKind { SpaceForm, ComplexSpaceForm, LieGroup, EKappaTau, Product };

const char* model_kind_name(ModelKind kind);

struct ModelSpace {
  ModelKind kind = ModelKind::SpaceForm;
  double curvature = 0.0;  // c for space forms and complex space forms
  int dim = 0;             // total dimension
  int index = 0;           // index of the metric
  double kappa = 0.0;
  double tau = 0.0;
  LieAlgebraData lie;
  std::vector<ModelSpace> children;

  static ModelSpace space_form(double c, int dim, int index);
  static ModelSpace complex_space_form(double c, int dim, int index);
  static ModelSpace lie_group(LieAlgebraData algebra);
  static ModelSpace e_kappa_tau(double kappa, double tau);
  static ModelSpace product(std::vector<ModelSpace> children);

  std::string describe() const;
};

/// Checks the catalog invariants (Jacobi identity, index parity, sizes).
void validate_model(const ModelSpace& model, double tol = 1e-10);

/// The G-structure variant the model carries.
StructureKind model_structure_kind(const ModelSpace& model);
/// R^n with the model's standard G-structure.
StructuredSpace standard_space(const ModelSpace& model);
/// Whether z carries the model's kind of G-structure with matching sizes.
bool space_matches_model(const ModelSpace& model, const StructuredSpace& z);

/// Characteristic tensors transferred to a G-structured space, stored on the
/// coordinate basis of that space.
struct CharacteristicTensors {
  int dim = 0;
  std::vector<EndoMatrix> curvature_blocks;  // R(e_i, e_j) at [i * dim + j]
  std::vector<VecN> torsion_vectors;         // T(e_i, e_j) at [i * dim + j]
  std::vector<QuotientRepr> inner_basis;     // In(e_i)

  EndoMatrix curvature(const VecN& v, const VecN& w) const;
  VecN torsion(const VecN& v, const VecN& w) const;
  QuotientRepr inner(const VecN& v) const;
};

CharacteristicTensors characteristic_tensors(const ModelSpace& model, const StructuredSpace& z);

/// Christoffel map of the left-invariant Levi-Civita connection on the
/// algebra basis: column j of result[i] holds Gamma(E_i) E_j.
std::vector<EndoMatrix> koszul_gamma(const LieAlgebraData& algebra);
/// Same formula for an arbitrary frame with constant Gram matrix and the
/// given bracket coefficients.
std::vector<EndoMatrix> koszul_from_brackets(const std::vector<Eigen::MatrixXd>& ad, const Eigen::MatrixXd& gram);

/// A representative in gl(R^n) of the characteristic inner torsion at u, in
/// standard coordinates.
EndoMatrix inner_torsion_representative(const ModelSpace& model, const VecN& u);
/// Projects (u, X) onto the admissible space Z: X - In(u) is pushed into the
/// structure algebra.
EndoMatrix project_admissible(const ModelSpace& model, const VecN& u, const EndoMatrix& x);

/// Concrete model of the target's G-structure bundle. States are flattened
/// real vectors; a state determines a point of the target and a frame.
class TargetRealization {
 public:
  virtual ~TargetRealization() = default;

  virtual std::string name() const = 0;
  virtual const ModelSpace& model() const = 0;
  int dim() const { return model().dim; }
  virtual int state_size() const = 0;
  virtual int ambient_dim() const = 0;
  virtual VecN base_state() const = 0;

  /// Tangent vector to the state space whose lambda-value is the
  /// admissible projection of (u, X).
  virtual VecN velocity(const VecN& state, const VecN& u, const EndoMatrix& x) const = 0;
  /// Inverse of velocity on the admissible space.
  virtual std::pair<VecN, EndoMatrix> lambda_of(const VecN& state, const VecN& dstate) const = 0;

  virtual VecN reproject(const VecN& state) const = 0;
  /// Distance of the state from the realization (zero on valid states).
  virtual double structure_defect(const VecN& state) const = 0;

  virtual VecN point(const VecN& state) const = 0;
  /// Frame vectors in ambient coordinates, one column per standard basis vector.
  virtual Eigen::MatrixXd frame(const VecN& state) const = 0;
  /// Inner products of frame vectors: the standard form of the model.
  virtual Eigen::MatrixXd frame_form() const = 0;
  /// State whose frame is frame(state) composed with h (h acting on R^n).
  virtual VecN act_frame(const VecN& state, const Eigen::MatrixXd& h) const = 0;
  virtual double distance(const VecN& a, const VecN& b) const = 0;
  /// Low-dimensional coordinates for visualization.
  virtual VecN display_coords(const VecN& state) const = 0;
  /// Christoffel map of the target connection in the state's frame, in the
  /// direction of frame(u). Realizations without an independent frame field
  /// fall back to the omega-value of their horizontal velocity.
  virtual EndoMatrix christoffel(const VecN& state, const VecN& u) const;
};

std::unique_ptr<TargetRealization> realize_target(const ModelSpace& model);
/// Lie groups through exponential coordinates of the second kind, even when
/// a matrix representation exists.
std::unique_ptr<TargetRealization> realize_lie_group_in_coordinates(const ModelSpace& model);

/// Curvature and torsion of a realization at a state, computed from finite
/// differences of its velocity fields (structure equations).
struct RealizationTensors {
  std::vector<EndoMatrix> curvature_blocks;
  std::vector<VecN> torsion_vectors;
  std::vector<EndoMatrix> christoffel;  // christoffel(state, e_i)
};
RealizationTensors realization_tensors(const TargetRealization& target, const VecN& state, double step = 1e-3);

/// Integrates a constant lambda-value for unit time from `state`.
VecN flow_constant(const TargetRealization& target, const VecN& state, const VecN& u, const EndoMatrix& x,
                   int steps = 32);

}  // namespace gstim
