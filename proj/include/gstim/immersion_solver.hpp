#pragma once

#include "gstim/compatibility.hpp"

#include <optional>
#include <string>
#include <vector>

namespace gstim {

/// The pair (theta, omega) of the pulled-back canonical and connection forms.
struct LambdaValue {
  VecN theta;
  EndoMatrix omega;
};

/// lambda = s^*(theta, omega) for a frame section s of the G-structure on the
/// Whitney sum, evaluated at arbitrary chart points.
class LambdaField {
 public:
  LambdaField(ImmersionProblem problem, MatrixField frame);

  const ImmersionProblem& problem() const { return problem_; }
  const MatrixField& frame() const { return frame_; }
  const ConnectionField& hat() const { return hat_; }

  LambdaValue at(const VecN& x, const VecN& v) const;
  /// How far s(x) is from the G-structure at x.
  double frame_defect(const VecN& x) const;
  /// Distance of omega(v) from In_o(theta(v)) + g, measured in the quotient.
  double admissibility_defect(const VecN& x, const VecN& v) const;

 private:
  ImmersionProblem problem_;
  MatrixField frame_;
  ConnectionField hat_;
};

/// Checked evaluation: throws FrameNotInStructure if s(x) is off the structure.
LambdaValue build_lambda(const LambdaField& lambda, const VecN& x, const VecN& v, double tol = 1e-8);

struct IntegrationOptions {
  int refine = 2;              // RK4 steps per grid edge
  bool reproject = true;       // project back onto the realization after each step
  double drift_limit = 1e-6;   // SingularFrame above this, before re-projection
};

/// Integrates F^* lambda_target = lambda along the polygon through `path`,
/// returning the state at every vertex (the first is `start`).
std::vector<VecN> integrate_along_curve(const LambdaField& lambda, const TargetRealization& target,
                                        const VecN& start, const std::vector<VecN>& path,
                                        const IntegrationOptions& options = {});

struct VerificationReport {
  double differential = 0.0;      // |L_x restricted to TM - df|
  double pullback = 0.0;          // |f^* g_target - g|, when g is present
  bool has_pullback = false;
  double alpha_recovery = 0.0;    // |alpha recovered from dF - alpha0|
  double theta_recovery = 0.0;    // |theta recovered from dF - s^{-1}|
  double structure = 0.0;         // max structure defect of F over the grid
  std::vector<double> node_pullback;   // per node (differential if no metric)
  std::vector<double> node_structure;  // per node
};

struct ImmersionSolution {
  ChartGrid grid;
  std::vector<int> origin;
  std::vector<int> axis_order;
  std::vector<VecN> states;              // F(x) per node
  std::vector<VecN> points;              // f(x) per node
  std::vector<Eigen::MatrixXd> maps;     // L_x = F(x) s(x)^{-1} on ambient coordinates
  bool reprojected = true;
  VerificationReport verification;
};

struct SolveOptions {
  std::vector<int> origin;                 // default: centre node
  std::optional<Eigen::MatrixXd> sigma0;   // from Whitney coordinates to base-frame coordinates
  std::optional<VecN> initial_state;       // overrides sigma0
  std::vector<int> axis_order;             // default 0, 1, ..., n-1
  IntegrationOptions integration;
  bool force = false;
  bool gate = true;
  double residual_gate = 1e-6;
  SamplingPlan gate_plan{0, 2, 1, 4};
  bool verify = true;
};

/// Initial state F(x0) = sigma0 o s(x0); the canonical sigma0 maps s(x0) to
/// the base frame of the realization.
VecN initial_state(const LambdaField& lambda, const TargetRealization& target, const VecN& x0,
                   const std::optional<Eigen::MatrixXd>& sigma0);

/// Sweeps the first axis through the origin, then each further axis from all
/// nodes reached so far.
ImmersionSolution solve_grid(const LambdaField& lambda, const TargetRealization& target, const ChartGrid& grid,
                             const SolveOptions& options = {});

VerificationReport verify_solution(const ImmersionSolution& sol, const LambdaField& lambda,
                                   const TargetRealization& target);

/// Plaquette holonomy at the cell with lower corner `corner` in the plane of
/// axes (a, b): distance between the start state and the state after one
/// loop, divided by the cell area.
double holonomy_residual(const LambdaField& lambda, const TargetRealization& target, const ChartGrid& grid,
                         const std::vector<int>& corner, int a = 0, int b = 1, const VecN* start = nullptr,
                         const IntegrationOptions& options = {});

struct HolonomyScan {
  double max = 0.0;
  double mean = 0.0;
  std::vector<int> worst;
  long cells = 0;
};
/// Scans cells in the (0, 1) plane with the given stride.
HolonomyScan holonomy_scan(const LambdaField& lambda, const TargetRealization& target, const ChartGrid& grid,
                           int stride = 1, const IntegrationOptions& options = {});

/// Max node-wise distance between the base maps of two sweeps with opposite
/// axis orders, from the same origin and initial state.
double uniqueness_check(const LambdaField& lambda, const TargetRealization& target, const ChartGrid& grid,
                        SolveOptions options = {});

struct RigidAlignment {
  Eigen::MatrixXd rotation;
  VecN translation;
  double max_error = 0.0;
  double rms_error = 0.0;
};
/// Best rigid motion taking `from` onto `to` (points as columns). Reflections
/// are allowed unless `proper_only`: an orthonormal structure determines the
/// immersion only up to the full orthogonal group.
RigidAlignment kabsch_align(const Eigen::MatrixXd& from, const Eigen::MatrixXd& to, bool proper_only = false);

/// Grid surface as OBJ (display coordinates, quads for two-dimensional grids).
void export_obj(const std::string& path, const ImmersionSolution& sol, const TargetRealization& target);
/// One row per node: chart coordinates, base map, display coordinates and residuals.
void export_csv(const std::string& path, const ImmersionSolution& sol, const TargetRealization& target);

}  // namespace gstim
