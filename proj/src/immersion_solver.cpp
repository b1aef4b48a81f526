#include "gstim/immersion_solver.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>

namespace gstim {

// -------------------------------------------------------------- lambda

LambdaField::LambdaField(ImmersionProblem problem, MatrixField frame)
    : problem_(std::move(problem)), frame_(std::move(frame)) {
  hat_ = problem_.hat();
  const int m = problem_.data.total_rank();
  if (frame_.rows() != m || frame_.cols() != m) throw Error(ErrorKind::ShapeError, "frame section has the wrong size");
}

LambdaValue LambdaField::at(const VecN& x, const VecN& v) const {
  const int n = problem_.data.dim();
  const int m = problem_.data.total_rank();
  const Eigen::MatrixXd s = frame_(x);
  const Eigen::PartialPivLU<Eigen::MatrixXd> lu(s);
  if (rcond(s) < default_tolerances().singular_rcond) throw Error(ErrorKind::SingularFrame, "frame section is singular");
  VecN iv = VecN::Zero(m);
  iv.head(n) = v;
  LambdaValue out;
  out.theta = lu.solve(iv);
  out.omega = lu.solve(hat_.gamma(x, v) * s + frame_.directional(x, v));
  return out;
}

double LambdaField::frame_defect(const VecN& x) const {
  return structure_defect(problem_.spec.at(x), frame_(x));
}

double LambdaField::admissibility_defect(const VecN& x, const VecN& v) const {
  const LambdaValue l = at(x, v);
  const EndoMatrix rep = inner_torsion_representative(problem_.model, l.theta);
  return quotient_project(standard_space(problem_.model), l.omega - rep).norm();
}

LambdaValue build_lambda(const LambdaField& lambda, const VecN& x, const VecN& v, double tol) {
  const double d = lambda.frame_defect(x);
  if (!(d <= tol))
    throw Error(ErrorKind::FrameNotInStructure, "frame section leaves the G-structure (defect " + std::to_string(d) + ")");
  return lambda.at(x, v);
}

// ---------------------------------------------------------- integration

namespace {

VecN rk4_edge(const LambdaField& lambda, const TargetRealization& target, VecN s, const VecN& xa, const VecN& xb,
              const IntegrationOptions& opt) {
  const int steps = std::max(1, opt.refine);
  const VecN d = (xb - xa) / steps;
  for (int k = 0; k < steps; ++k) {
    const VecN a = xa + d * k;
    const LambdaValue l1 = lambda.at(a, d);
    const LambdaValue l2 = lambda.at(a + 0.5 * d, d);
    const LambdaValue l3 = lambda.at(a + d, d);
    const VecN k1 = target.velocity(s, l1.theta, l1.omega);
    const VecN k2 = target.velocity(s + 0.5 * k1, l2.theta, l2.omega);
    const VecN k3 = target.velocity(s + 0.5 * k2, l2.theta, l2.omega);
    const VecN k4 = target.velocity(s + k3, l3.theta, l3.omega);
    s += (k1 + 2.0 * k2 + 2.0 * k3 + k4) / 6.0;
    if (!s.allFinite()) throw Error(ErrorKind::IntegrationDiverged, "state became non-finite during integration");
    if (opt.reproject) {
      const double drift = target.structure_defect(s);
      if (!(drift <= opt.drift_limit))
        throw Error(ErrorKind::SingularFrame,
                    "frame drifted off the realization by " + std::to_string(drift) + " in one step");
      s = target.reproject(s);
    }
  }
  return s;
}

}  // namespace

std::vector<VecN> integrate_along_curve(const LambdaField& lambda, const TargetRealization& target,
                                        const VecN& start, const std::vector<VecN>& path,
                                        const IntegrationOptions& options) {
  std::vector<VecN> out{start};
  for (size_t i = 1; i < path.size(); ++i) out.push_back(rk4_edge(lambda, target, out.back(), path[i - 1], path[i], options));
  return out;
}

VecN initial_state(const LambdaField& lambda, const TargetRealization& target, const VecN& x0,
                   const std::optional<Eigen::MatrixXd>& sigma0) {
  const Eigen::MatrixXd s = lambda.frame()(x0);
  if (!sigma0) return target.base_state();
  if (sigma0->rows() != s.rows() || sigma0->cols() != s.cols())
    throw Error(ErrorKind::ShapeError, "initial map has the wrong size");
  return target.act_frame(target.base_state(), *sigma0 * s);
}

ImmersionSolution solve_grid(const LambdaField& lambda, const TargetRealization& target, const ChartGrid& grid,
                             const SolveOptions& options) {
  const ImmersionProblem& problem = lambda.problem();
  const int n = grid.dim();
  if (n != problem.data.dim()) throw Error(ErrorKind::ShapeError, "grid dimension differs from the source dimension");
  if (target.dim() != problem.data.total_rank())
    throw Error(ErrorKind::ShapeError, "target dimension differs from n + k");

  ImmersionSolution sol;
  sol.grid = grid;
  sol.origin = options.origin;
  if (sol.origin.empty())
    for (int a = 0; a < n; ++a) sol.origin.push_back(grid.samples()[a] / 2);
  sol.axis_order = options.axis_order;
  if (sol.axis_order.empty())
    for (int a = 0; a < n; ++a) sol.axis_order.push_back(a);
  const VecN x0 = grid.node(sol.origin);

  if (options.gate && !options.force) {
    const ResidualReport rep = full_report(problem, grid, options.gate_plan);
    if (!(rep.max_residual() <= options.residual_gate)) {
      const auto bad = rep.violations(options.residual_gate);
      throw Error(ErrorKind::ResidualGate, "compatibility residual " + std::to_string(rep.max_residual()) +
                                               " exceeds the gate (" + (bad.empty() ? "" : bad.front()) + ")");
    }
  }

  VecN start = options.initial_state ? *options.initial_state : initial_state(lambda, target, x0, options.sigma0);
  if (start.size() != target.state_size()) throw Error(ErrorKind::ShapeError, "initial state has the wrong size");
  IntegrationOptions integ = options.integration;
  integ.reproject = integ.reproject && target.structure_defect(start) < 1e-8;
  sol.reprojected = integ.reproject;
  if (integ.reproject) start = target.reproject(start);

  const int count = grid.node_count();
  sol.states.assign(count, VecN());
  std::vector<char> filled(count, 0);
  const int o = grid.flat_index(sol.origin);
  sol.states[o] = start;
  filled[o] = 1;
  std::vector<int> reached{o};

  for (int axis : sol.axis_order) {
    const std::vector<int> seeds = reached;
    for (int seed : seeds) {
      const std::vector<int> idx0 = grid.multi_index(seed);
      for (int dir : {+1, -1}) {
        std::vector<int> idx = idx0;
        VecN s = sol.states[seed];
        while (true) {
          const VecN xa = grid.node(idx);
          idx[axis] += dir;
          if (idx[axis] < 0 || idx[axis] >= grid.samples()[axis]) break;
          const int f = grid.flat_index(idx);
          if (filled[f]) {
            s = sol.states[f];
            continue;
          }
          s = rk4_edge(lambda, target, s, xa, grid.node(idx), integ);
          sol.states[f] = s;
          filled[f] = 1;
          reached.push_back(f);
        }
      }
    }
  }

  sol.points.resize(count);
  sol.maps.resize(count);
  for (int i = 0; i < count; ++i) {
    sol.points[i] = target.point(sol.states[i]);
    sol.maps[i] = target.frame(sol.states[i]) * checked_inverse(lambda.frame()(grid.node(i)), "frame section");
  }
  if (options.verify) sol.verification = verify_solution(sol, lambda, target);
  return sol;
}

// ------------------------------------------------------------ verification

namespace {

// Weights and node offsets of a derivative stencil along one axis, centred
// where possible and shifted inwards near the boundary.
std::pair<std::vector<int>, std::vector<double>> axis_stencil(int index, int samples, double h) {
  const int width = std::min(7, samples);
  int lo = index - width / 2;
  lo = std::max(0, std::min(lo, samples - width));
  std::vector<double> offs;
  std::vector<int> nodes;
  for (int j = 0; j < width; ++j) {
    nodes.push_back(lo + j);
    offs.push_back(static_cast<double>(lo + j - index));
  }
  std::vector<double> w = finite_difference_weights(1, offs);
  for (double& c : w) c /= h;
  return {nodes, w};
}

}  // namespace

VerificationReport verify_solution(const ImmersionSolution& sol, const LambdaField& lambda,
                                   const TargetRealization& target) {
  const ChartGrid& grid = sol.grid;
  const ImmersionProblem& problem = lambda.problem();
  const int n = grid.dim();
  const int k = problem.data.normal_rank();
  const int m = n + k;
  const int count = grid.node_count();
  const bool metric = problem.data.g.has_value();
  const Eigen::MatrixXd tform = target.frame_form();

  VerificationReport rep;
  rep.has_pullback = metric;
  rep.node_pullback.assign(count, 0.0);
  rep.node_structure.assign(count, 0.0);

  for (int node = 0; node < count; ++node) {
    const std::vector<int> idx = grid.multi_index(node);
    const VecN x = grid.node(idx);
    const VecN& state = sol.states[node];
    const Eigen::MatrixXd s = lambda.frame()(x);
    const Eigen::MatrixXd si = checked_inverse(s, "frame section");
    const Eigen::MatrixXd fr = target.frame(state);

    Eigen::MatrixXd df(sol.points[node].size(), n);
    std::vector<VecN> dstate(n);
    for (int a = 0; a < n; ++a) {
      const auto [nodes, w] = axis_stencil(idx[a], grid.samples()[a], grid.spacing(a));
      VecN dp = VecN::Zero(df.rows());
      VecN ds = VecN::Zero(state.size());
      std::vector<int> j = idx;
      for (size_t q = 0; q < nodes.size(); ++q) {
        j[a] = nodes[q];
        const int f = grid.flat_index(j);
        dp += w[q] * sol.points[f];
        ds += w[q] * sol.states[f];
      }
      df.col(a) = dp;
      dstate[a] = ds;
    }

    // (i) L restricted to TM against the numerical differential.
    const Eigen::MatrixXd l_tm = fr * si.leftCols(n);
    const double diff = max_abs(l_tm - df);
    rep.differential = std::max(rep.differential, diff);
    double node_check = diff;
    if (metric) {
      const Eigen::MatrixXd c = fr.colPivHouseholderQr().solve(df);
      const Eigen::MatrixXd pulled = c.transpose() * tform * c;
      const double pb = max_abs(pulled - problem.data.g->source(x));
      rep.pullback = std::max(rep.pullback, pb);
      node_check = pb;
    }
    rep.node_pullback[node] = node_check;

    // (ii) connection components recovered from dF.
    const Eigen::MatrixXd alpha = problem.data.alpha0(x);
    for (int a = 0; a < n; ++a) {
      const auto [theta, omega] = target.lambda_of(state, dstate[a]);
      const VecN expect = si.col(a);
      rep.theta_recovery = std::max(rep.theta_recovery, max_abs(theta - expect));
      const Eigen::MatrixXd hat = s * omega * si - lambda.frame().derivative(x, a) * si;
      const Eigen::MatrixXd rec = hat.block(n, 0, k, n);
      rep.alpha_recovery = std::max(rep.alpha_recovery, max_abs(rec - alpha.middleCols(a * n, n)));
    }
    (void)m;

    // (iii) structure preservation of the frame.
    const double sd = target.structure_defect(state);
    rep.node_structure[node] = sd;
    rep.structure = std::max(rep.structure, sd);
  }
  return rep;
}

// ---------------------------------------------------------------- holonomy

double holonomy_residual(const LambdaField& lambda, const TargetRealization& target, const ChartGrid& grid,
                         const std::vector<int>& corner, int a, int b, const VecN* start,
                         const IntegrationOptions& options) {
  std::vector<int> i1 = corner, i2 = corner, i3 = corner;
  i1[a] += 1;
  i2[a] += 1;
  i2[b] += 1;
  i3[b] += 1;
  for (const auto* id : {&i1, &i2, &i3})
    for (int d = 0; d < grid.dim(); ++d)
      if ((*id)[d] < 0 || (*id)[d] >= grid.samples()[d]) throw Error(ErrorKind::OutOfDomain, "plaquette leaves the grid");
  const VecN x0 = grid.node(corner);
  const std::vector<VecN> loop{x0, grid.node(i1), grid.node(i2), grid.node(i3), x0};
  VecN s0 = start ? *start : target.base_state();
  IntegrationOptions opt = options;
  opt.reproject = opt.reproject && target.structure_defect(s0) < 1e-8;
  const auto states = integrate_along_curve(lambda, target, s0, loop, opt);
  const double area = grid.spacing(a) * grid.spacing(b);
  return target.distance(states.front(), states.back()) / area;
}

HolonomyScan holonomy_scan(const LambdaField& lambda, const TargetRealization& target, const ChartGrid& grid,
                           int stride, const IntegrationOptions& options) {
  HolonomyScan scan;
  const int step = std::max(1, stride);
  double total = 0.0;
  std::vector<int> idx(grid.dim(), 0);
  for (int i = 0; i + 1 < grid.samples()[0]; i += step)
    for (int j = 0; j + 1 < grid.samples()[1]; j += step) {
      idx[0] = i;
      idx[1] = j;
      const double h = holonomy_residual(lambda, target, grid, idx, 0, 1, nullptr, options);
      total += h;
      ++scan.cells;
      if (h > scan.max || scan.worst.empty()) {
        scan.max = h;
        scan.worst = idx;
      }
    }
  scan.mean = scan.cells ? total / static_cast<double>(scan.cells) : 0.0;
  return scan;
}

double uniqueness_check(const LambdaField& lambda, const TargetRealization& target, const ChartGrid& grid,
                        SolveOptions options) {
  const int n = grid.dim();
  options.verify = false;
  std::vector<int> forward, backward;
  for (int a = 0; a < n; ++a) {
    forward.push_back(a);
    backward.push_back(n - 1 - a);
  }
  options.axis_order = forward;
  const ImmersionSolution s1 = solve_grid(lambda, target, grid, options);
  options.axis_order = backward;
  options.gate = false;
  const ImmersionSolution s2 = solve_grid(lambda, target, grid, options);
  double d = 0.0;
  for (size_t i = 0; i < s1.points.size(); ++i) d = std::max(d, max_abs(s1.points[i] - s2.points[i]));
  return d;
}

// --------------------------------------------------------------- alignment

RigidAlignment kabsch_align(const Eigen::MatrixXd& from, const Eigen::MatrixXd& to, bool proper_only) {
  if (from.rows() != to.rows() || from.cols() != to.cols() || from.cols() == 0)
    throw Error(ErrorKind::ShapeError, "point sets differ in shape");
  const VecN ca = from.rowwise().mean();
  const VecN cb = to.rowwise().mean();
  const Eigen::MatrixXd a = from.colwise() - ca;
  const Eigen::MatrixXd b = to.colwise() - cb;
  const Eigen::JacobiSVD<Eigen::MatrixXd> svd(b * a.transpose(), Eigen::ComputeFullU | Eigen::ComputeFullV);
  Eigen::MatrixXd d = Eigen::MatrixXd::Identity(from.rows(), from.rows());
  if (proper_only && (svd.matrixU() * svd.matrixV().transpose()).determinant() < 0) d(from.rows() - 1, from.rows() - 1) = -1.0;
  RigidAlignment out;
  out.rotation = svd.matrixU() * d * svd.matrixV().transpose();
  out.translation = cb - out.rotation * ca;
  const Eigen::MatrixXd moved = (out.rotation * from).colwise() + out.translation;
  const Eigen::VectorXd err = (moved - to).colwise().norm();
  out.max_error = err.maxCoeff();
  out.rms_error = std::sqrt(err.squaredNorm() / static_cast<double>(err.size()));
  return out;
}

// ------------------------------------------------------------------ export

namespace {

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorKind::ConfigError, "cannot write '" + path + "'");
  return out;
}

}  // namespace

void export_obj(const std::string& path, const ImmersionSolution& sol, const TargetRealization& target) {
  std::ofstream out = open_out(path);
  out << "# gstim surface, " << sol.grid.node_count() << " vertices\n";
  for (const auto& st : sol.states) {
    const VecN d = target.display_coords(st);
    out << "v";
    for (int c = 0; c < 3; ++c) out << ' ' << num(c < d.size() ? d(c) : 0.0);
    out << '\n';
  }
  if (sol.grid.dim() == 2) {
    const int nx = sol.grid.samples()[0], ny = sol.grid.samples()[1];
    for (int j = 0; j + 1 < ny; ++j)
      for (int i = 0; i + 1 < nx; ++i) {
        const int a = sol.grid.flat_index({i, j}) + 1;
        const int b = sol.grid.flat_index({i + 1, j}) + 1;
        const int c = sol.grid.flat_index({i + 1, j + 1}) + 1;
        const int d = sol.grid.flat_index({i, j + 1}) + 1;
        out << "f " << a << ' ' << b << ' ' << c << ' ' << d << '\n';
      }
  }
}

void export_csv(const std::string& path, const ImmersionSolution& sol, const TargetRealization& target) {
  std::ofstream out = open_out(path);
  const int n = sol.grid.dim();
  const int pd = sol.points.empty() ? 0 : static_cast<int>(sol.points[0].size());
  const int dd = sol.states.empty() ? 0 : static_cast<int>(target.display_coords(sol.states[0]).size());
  out << "node";
  for (int a = 0; a < n; ++a) out << ",x" << a;
  for (int c = 0; c < pd; ++c) out << ",f" << c;
  for (int c = 0; c < dd; ++c) out << ",d" << c;
  out << ",pullback_residual,structure_defect\n";
  for (int i = 0; i < sol.grid.node_count(); ++i) {
    const VecN x = sol.grid.node(i);
    const VecN d = target.display_coords(sol.states[i]);
    out << i;
    for (int a = 0; a < n; ++a) out << ',' << num(x(a));
    for (int c = 0; c < pd; ++c) out << ',' << num(sol.points[i](c));
    for (int c = 0; c < dd; ++c) out << ',' << num(d(c));
    const auto& v = sol.verification;
    out << ',' << num(v.node_pullback.empty() ? 0.0 : v.node_pullback[i]) << ','
        << num(v.node_structure.empty() ? 0.0 : v.node_structure[i]) << '\n';
  }
}

}  // namespace gstim
