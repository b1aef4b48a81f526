#pragma once

#include "gstim/tensor_core.hpp"

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace gstim {

/// Rectangular sampled coordinate domain. Nodes are flattened with axis 0
/// varying fastest.
class ChartGrid {
 public:
  ChartGrid() = default;
  ChartGrid(VecN coord_min, VecN coord_max, std::vector<int> samples);

  int dim() const { return static_cast<int>(samples_.size()); }
  const VecN& coord_min() const { return min_; }
  const VecN& coord_max() const { return max_; }
  const std::vector<int>& samples() const { return samples_; }
  double spacing(int axis) const;
  double min_spacing() const;
  int node_count() const;
  int flat_index(const std::vector<int>& idx) const;
  std::vector<int> multi_index(int flat) const;
  VecN node(const std::vector<int>& idx) const;
  VecN node(int flat) const { return node(multi_index(flat)); }
  bool contains(const VecN& x, double slack = 0.0) const;

 private:
  VecN min_, max_;
  std::vector<int> samples_;
};

/// Finite-difference weights for the derivative of order `deriv` at 0 from
/// samples at `offsets` (in units of the step), by Fornberg's recursion.
std::vector<double> finite_difference_weights(int deriv, const std::vector<double>& offsets);

/// Matrix-valued field on a chart: either a closed-form evaluator with a
/// box-shaped domain, or node values on a ChartGrid with Lagrange
/// interpolation of order 1 or 3.
class MatrixField {
 public:
  using Evaluator = std::function<Eigen::MatrixXd(const VecN&)>;

  MatrixField() = default;
  static MatrixField closed_form(int rows, int cols, Evaluator f, VecN domain_min, VecN domain_max,
                                 double fd_step, std::string name = {});
  static MatrixField grid_sampled(const ChartGrid& grid, std::vector<Eigen::MatrixXd> values,
                                  int order, std::string name = {});
  static MatrixField constant(const Eigen::MatrixXd& value, VecN domain_min, VecN domain_max,
                              double fd_step, std::string name = {});

  bool valid() const { return static_cast<bool>(impl_); }
  int rows() const;
  int cols() const;
  int dim() const;
  const std::string& name() const;
  bool is_grid_sampled() const;
  /// Step used for derivative stencils along `axis`.
  double fd_step(int axis) const;
  const VecN& domain_min() const;
  const VecN& domain_max() const;
  /// Grid and node values for grid-sampled fields.
  const ChartGrid& grid() const;
  const std::vector<Eigen::MatrixXd>& node_values() const;
  int interpolation_order() const;

  Eigen::MatrixXd operator()(const VecN& x) const;
  /// Five-point central derivative along a coordinate axis.
  Eigen::MatrixXd derivative(const VecN& x, int axis) const;
  Eigen::MatrixXd directional(const VecN& x, const VecN& v) const;

  /// A closed-form field evaluating `f` on the same domain and stencil as this one.
  MatrixField derived(int rows, int cols, Evaluator f, std::string name = {}) const;

 private:
  struct Impl;
  std::shared_ptr<const Impl> impl_;
};

struct MetricField {
  MatrixField source;
  int index = 0;

  /// The form at x, with nondegeneracy and index checked.
  Bilinear at(const VecN& x) const { return Bilinear(source(x), index); }
};

/// Christoffel data of a connection on a rank-`rank` bundle over an
/// n-dimensional chart, stored as a rank x (rank*n) field whose i-th block is
/// the matrix Gamma_i: column b of Gamma_i is nabla_{d_i} e_b.
class ConnectionField {
 public:
  ConnectionField() = default;
  ConnectionField(int dim, int rank, MatrixField blocks);
  static ConnectionField trivial(int dim, int rank, VecN domain_min, VecN domain_max, double fd_step);

  int dim() const { return dim_; }
  int rank() const { return rank_; }
  const MatrixField& field() const { return field_; }

  std::vector<EndoMatrix> at(const VecN& x) const;
  EndoMatrix gamma(const VecN& x, const VecN& v) const;
  std::vector<EndoMatrix> derivative(const VecN& x, int axis) const;

 private:
  int dim_ = 0;
  int rank_ = 0;
  MatrixField field_;
};

using ChristoffelValue = std::vector<EndoMatrix>;

ChristoffelValue levi_civita(const MetricField& metric, const VecN& x);
ConnectionField levi_civita_connection(const MetricField& metric);

/// All R(d_i, d_j), flattened as blocks[i * n + j].
std::vector<EndoMatrix> curvature_blocks(const ConnectionField& conn, const VecN& x);
EndoMatrix curvature_tensor(const ConnectionField& conn, const VecN& x, const VecN& v, const VecN& w);

/// T(v,w) = nabla_v(iota w) - nabla_w(iota v) - iota[v,w] for an m x n field iota.
VecN iota_torsion(const ConnectionField& conn, const MatrixField& iota, const VecN& x, const VecN& v,
                  const VecN& w);

/// Christoffel matrices of the connection relative to the frame field s,
/// one per coordinate axis, as endomorphisms of the fiber.
std::vector<EndoMatrix> christoffel_of_frame(const ConnectionField& conn, const MatrixField& s,
                                             const VecN& x);

/// Covariant derivatives of auxiliary tensors along v, in coordinates.
EndoMatrix covariant_derivative_form(const ConnectionField& conn, const MatrixField& form,
                                     const VecN& x, const VecN& v);
VecN covariant_derivative_section(const ConnectionField& conn, const MatrixField& section,
                                  const VecN& x, const VecN& v);
EndoMatrix covariant_derivative_endo(const ConnectionField& conn, const MatrixField& endo,
                                     const VecN& x, const VecN& v);

/// Immersion-problem data on the Whitney sum of TM and a trivialized rank-k
/// bundle. alpha0 is k x (n*n) with column i*n+j holding alpha0(d_i, d_j);
/// a0 is n x (n*k) with column i*k+b holding A0(d_i, e_b).
struct WhitneyData {
  ConnectionField tangent_conn;
  ConnectionField normal_conn;
  MatrixField alpha0;
  MatrixField a0;
  std::optional<MetricField> g;
  std::optional<MetricField> g0;

  int dim() const { return tangent_conn.dim(); }
  int normal_rank() const { return normal_conn.rank(); }
  int total_rank() const { return dim() + normal_rank(); }

  VecN alpha(const VecN& x, const VecN& v, const VecN& w) const;
  VecN weingarten(const VecN& x, const VecN& v, const VecN& e) const;
  /// Block diagonal form on the Whitney sum, if both metrics are present.
  Eigen::MatrixXd whitney_form(const VecN& x) const;
};

/// Checks ranks and field shapes; throws ShapeError.
void validate_whitney(const WhitneyData& data);

ConnectionField assemble_whitney(const WhitneyData& data);

struct WhitneyComponents {
  std::vector<EndoMatrix> tangent;  // n x n per axis
  std::vector<EndoMatrix> normal;   // k x k per axis
  std::vector<Eigen::MatrixXd> alpha;      // k x n per axis, column j = alpha(d_i, d_j)
  std::vector<Eigen::MatrixXd> weingarten; // n x k per axis, column b = A(d_i, e_b)
};

/// Splits a connection on TM + E0 into its four components at x.
WhitneyComponents whitney_components(const ConnectionField& hat, int n, int k, const VecN& x);

/// Grid-sampled field file: a short text header followed by one node per line.
void save_grid_field(const std::string& path, const MatrixField& field);
MatrixField load_grid_field(const std::string& path);

}  // namespace gstim
