#pragma once

#include "gstim/chart_manifold.hpp"

#include <random>
#include <string>
#include <vector>

namespace gstim {

enum class StructureKind {
  TrivialFrame,
  Orthonormal,
  Subbundle,
  AdaptedOrthonormal,
  UnitSection,
  AlmostComplex,
  Unitary,
  OrientedUnitVector3D,
  Product,
};

const char* structure_kind_name(StructureKind kind);
StructureKind structure_kind_from_name(const std::string& name);
/// The eight primitive variants, in catalog order (Product is a combinator).
const std::vector<StructureKind>& primitive_structure_kinds();

/// A vector space of dimension `dim` carrying the auxiliary data that pins
/// down a G-structure: which members are meaningful depends on `kind`.
struct StructuredSpace {
  StructureKind kind = StructureKind::Orthonormal;
  int dim = 0;
  Eigen::MatrixXd form;       // Orthonormal, AdaptedOrthonormal, metric UnitSection, Unitary, OrientedUnitVector3D
  int index = 0;              // negative count of `form`
  Eigen::MatrixXd frame;      // TrivialFrame
  Eigen::MatrixXd subspace;   // Subbundle, AdaptedOrthonormal: basis columns
  int subspace_index = 0;     // AdaptedOrthonormal: index of the form on the subspace
  VecN unit;                  // UnitSection, OrientedUnitVector3D
  bool metric = false;        // UnitSection with a metric
  Eigen::MatrixXd complex;    // AlmostComplex, Unitary
  int orientation = 1;        // OrientedUnitVector3D: +1 if the coordinate basis is positive
  Eigen::MatrixXd split;      // Product: columns adapted to the splitting
  std::vector<StructuredSpace> children;  // Product, in split coordinates

  static StructuredSpace trivial_frame(const Eigen::MatrixXd& frame);
  static StructuredSpace orthonormal(const Eigen::MatrixXd& form, int index);
  static StructuredSpace subbundle(int dim, const Eigen::MatrixXd& basis);
  static StructuredSpace adapted_orthonormal(const Eigen::MatrixXd& form, int index, const Eigen::MatrixXd& basis,
                                             int subspace_index);
  static StructuredSpace unit_section(const VecN& unit);
  static StructuredSpace metric_unit_section(const Eigen::MatrixXd& form, int index, const VecN& unit);
  static StructuredSpace almost_complex(const Eigen::MatrixXd& j);
  static StructuredSpace unitary(const Eigen::MatrixXd& form, int index, const Eigen::MatrixXd& j);
  static StructuredSpace oriented_unit_vector(const Eigen::MatrixXd& form, const VecN& unit, int orientation);
  static StructuredSpace product(const Eigen::MatrixXd& split, std::vector<StructuredSpace> children);

  std::vector<int> child_offsets() const;
};

/// The canonical model of the same variant and dimensions: the structure
/// that frames in P compare against.
StructuredSpace standard_space_like(const StructuredSpace& z);

/// J0(v, w) = (-w, v) on R^{2l}.
Eigen::MatrixXd standard_complex_structure(int dim);
/// Form of index 2s on R^{2l} compatible with J0: signs (+..+ -..-) on each half.
Eigen::MatrixXd standard_hermitian_form(int dim, int index);

/// Throws SpecViolation if the auxiliary data violates its constraints.
void validate_space(const StructuredSpace& z, double tol = 1e-10);

/// Quotient class of an endomorphism modulo the structure algebra, in the
/// explicit complement of each variant. Product classes flatten as the
/// children's parts followed by the two off-diagonal blocks.
struct QuotientRepr {
  StructureKind kind = StructureKind::Orthonormal;
  std::vector<Eigen::MatrixXd> parts;

  double norm() const;
  QuotientRepr operator-(const QuotientRepr& other) const;
  QuotientRepr operator+(const QuotientRepr& other) const;
  QuotientRepr scaled(double s) const;
};

QuotientRepr quotient_project(const StructuredSpace& z, const EndoMatrix& t);
QuotientRepr zero_quotient(const StructuredSpace& z);

/// A linear projection of gl(Z) onto the structure algebra, built from each
/// variant's defining constraints.
EndoMatrix algebra_projection(const StructuredSpace& z, const EndoMatrix& x);
EndoMatrix random_algebra_element(const StructuredSpace& z, std::mt19937_64& rng);

/// A frame p: R^dim -> Z carrying the standard structure to the one on Z.
Eigen::MatrixXd structure_frame(const StructuredSpace& z);
/// How far p is from carrying the standard structure onto z (max norm).
double structure_defect(const StructuredSpace& z, const Eigen::MatrixXd& p);
/// Pushes the structure on z forward along an invertible map q: Z -> W.
StructuredSpace push_forward(const StructuredSpace& z, const Eigen::MatrixXd& q);

/// Bundle-level G-structure: the same variants with auxiliary data given as
/// fields over the chart. Product children use split-basis coordinates.
struct GStructureSpec {
  StructureKind kind = StructureKind::Orthonormal;
  int rank = 0;
  MatrixField form;
  int index = 0;
  MatrixField frame;
  MatrixField subspace;
  int subspace_index = 0;
  MatrixField unit;
  bool metric = false;
  MatrixField complex;
  int orientation = 1;
  MatrixField split;
  std::vector<GStructureSpec> children;

  StructuredSpace at(const VecN& x) const;
};

QuotientRepr quotient_project(const GStructureSpec& spec, const EndoMatrix& t, const VecN& x);

/// Inner torsion of the structure under the connection, from the closed form
/// of each variant (covariant derivatives of the auxiliary data).
QuotientRepr inner_torsion(const GStructureSpec& spec, const ConnectionField& conn, const VecN& x, const VecN& v);

/// The frame section x -> structure_frame(spec.at(x)).
MatrixField structure_frame_field(const GStructureSpec& spec);

}  // namespace gstim
