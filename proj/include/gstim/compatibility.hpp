#pragma once

#include "gstim/homogeneous_models.hpp"

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

namespace gstim {

/// Everything the compatibility system and the solver need: Whitney data on
/// TM + E0, the G-structure on the Whitney sum and the target model.
struct ImmersionProblem {
  WhitneyData data;
  GStructureSpec spec;
  ModelSpace model;

  /// The assembled connection on TM + E0.
  ConnectionField hat() const { return assemble_whitney(data); }
};

/// Throws ShapeError / ConfigError when sizes or variant tags disagree.
void validate_problem(const ImmersionProblem& problem, const VecN& x);

/// A0 at x from g0(alpha0(v,w), e) = -g(A0(e) v, w), in the Whitney layout
/// (n x (n*k), column i*k+b = A0(d_i, e_b)).
Eigen::MatrixXd weingarten_from_alpha(const Eigen::MatrixXd& g, const Eigen::MatrixXd& g0,
                                      const Eigen::MatrixXd& alpha0);
/// The field x -> weingarten_from_alpha(g(x), g0(x), alpha0(x)).
MatrixField weingarten_field(const MetricField& g, const MetricField& g0, const MatrixField& alpha0);

/// Pointwise ingredients of every residual, evaluated once per node.
struct NodeTensors {
  int n = 0;
  int k = 0;
  std::vector<EndoMatrix> gamma;      // nabla, per axis
  std::vector<EndoMatrix> gamma0;     // nabla0, per axis
  std::vector<EndoMatrix> curvature;  // R(d_i, d_j) of nabla
  std::vector<EndoMatrix> curvature0; // R0(d_i, d_j)
  Eigen::MatrixXd alpha;              // k x (n*n)
  Eigen::MatrixXd weingarten;         // n x (n*k)
  std::vector<Eigen::MatrixXd> dalpha;       // per axis
  std::vector<Eigen::MatrixXd> dweingarten;  // per axis
  Eigen::MatrixXd g, g0;                     // empty without metrics
  CharacteristicTensors model;               // on the Whitney fibre
  StructuredSpace fibre;

  VecN alpha_of(const VecN& v, const VecN& w) const;
  VecN weingarten_of(const VecN& v, const VecN& e) const;
  VecN nabla_alpha(const VecN& v, const VecN& w, const VecN& u) const;
  VecN nabla_weingarten(const VecN& v, const VecN& w, const VecN& e) const;
  EndoMatrix gamma_of(const VecN& v) const;
  EndoMatrix gamma0_of(const VecN& v) const;
  EndoMatrix curvature_of(const VecN& v, const VecN& w) const;
  EndoMatrix curvature0_of(const VecN& v, const VecN& w) const;
  VecN torsion_of(const VecN& v, const VecN& w) const;
  /// Model curvature on the fibre applied to (v, w) and a fibre vector.
  VecN model_curvature(const VecN& v, const VecN& w, const VecN& z) const;
};

NodeTensors node_tensors(const ImmersionProblem& problem, const VecN& x);

// Residuals are model side minus data side. Vectors v, w, u, z are tangent
// (length n); e, e2 are fibre vectors of E0 (length k).

VecN gauss_residual(const NodeTensors& t, const VecN& v, const VecN& w, const VecN& u);
VecN ricci_residual(const NodeTensors& t, const VecN& v, const VecN& w, const VecN& e);
VecN codazzi_residual(const NodeTensors& t, const VecN& v, const VecN& w, const VecN& u);
VecN codazzi2_residual(const NodeTensors& t, const VecN& v, const VecN& w, const VecN& e);
std::pair<VecN, VecN> torsion_residuals(const NodeTensors& t, const VecN& v, const VecN& w);
QuotientRepr inner_torsion_residual(const ImmersionProblem& problem, const ConnectionField& hat,
                                    const NodeTensors& t, const VecN& x, const VecN& v);

// Metric forms; require g and g0.
double gauss_metric_residual(const NodeTensors& t, const VecN& v, const VecN& w, const VecN& u, const VecN& z);
double codazzi_metric_residual(const NodeTensors& t, const VecN& v, const VecN& w, const VecN& u, const VecN& e);
double ricci_metric_residual(const NodeTensors& t, const VecN& v, const VecN& w, const VecN& e, const VecN& e2);

// Convenience wrappers evaluating at x.
VecN gauss_residual(const ImmersionProblem& p, const VecN& x, const VecN& v, const VecN& w, const VecN& u);
VecN ricci_residual(const ImmersionProblem& p, const VecN& x, const VecN& v, const VecN& w, const VecN& e);
VecN codazzi_residual(const ImmersionProblem& p, const VecN& x, const VecN& v, const VecN& w, const VecN& u);
VecN codazzi2_residual(const ImmersionProblem& p, const VecN& x, const VecN& v, const VecN& w, const VecN& e);
std::pair<VecN, VecN> torsion_residuals(const ImmersionProblem& p, const VecN& x, const VecN& v, const VecN& w);
QuotientRepr inner_torsion_residual(const ImmersionProblem& p, const VecN& x, const VecN& v);

struct SamplingPlan {
  std::uint64_t seed = 0;
  int random_per_node = 8;
  int margin = 1;  // grid nodes skipped at each boundary
  int stride = 1;  // visit every stride-th node per axis
};

struct FamilyStats {
  std::string name;
  double max = 0.0;
  double rms = 0.0;
  long samples = 0;
  VecN worst_point;
  double sum_squares = 0.0;

  void add(double value, const VecN& x);
  void merge(const FamilyStats& other);
};

struct ResidualReport {
  std::vector<FamilyStats> families;
  long nodes = 0;
  SamplingPlan plan;

  const FamilyStats& family(const std::string& name) const;
  double max_residual() const;
  /// Families whose max exceeds tol, in report order.
  std::vector<std::string> violations(double tol) const;
  nlohmann::ordered_json to_json() const;
};

/// Names of the families, in report order. The metric forms are only
/// present when the data carries both metrics.
std::vector<std::string> residual_family_names(bool metric);

ResidualReport full_report(const ImmersionProblem& problem, const ChartGrid& grid, const SamplingPlan& plan);

}  // namespace gstim
