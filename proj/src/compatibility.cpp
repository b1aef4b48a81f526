#include "gstim/compatibility.hpp"

#include <cmath>
#include <limits>
#include <random>

namespace gstim {

namespace {

VecN embed_tangent(const VecN& v, int k) {
  VecN z = VecN::Zero(v.size() + k);
  z.head(v.size()) = v;
  return z;
}

VecN embed_normal(const VecN& e, int n) {
  VecN z = VecN::Zero(n + e.size());
  z.tail(e.size()) = e;
  return z;
}

}  // namespace

void validate_problem(const ImmersionProblem& problem, const VecN& x) {
  validate_whitney(problem.data);
  const int m = problem.data.total_rank();
  if (problem.model.dim != m)
    throw Error(ErrorKind::ShapeError, "n + k = " + std::to_string(m) + " but the target has dimension " +
                                           std::to_string(problem.model.dim));
  if (problem.spec.rank != m) throw Error(ErrorKind::ShapeError, "G-structure rank differs from n + k");
  if (problem.spec.kind != model_structure_kind(problem.model))
    throw Error(ErrorKind::ConfigError, std::string("G-structure on the Whitney sum is ") +
                                            structure_kind_name(problem.spec.kind) + " but the target carries " +
                                            structure_kind_name(model_structure_kind(problem.model)));
  const StructuredSpace z = problem.spec.at(x);
  validate_space(z);
  if (!space_matches_model(problem.model, z))
    throw Error(ErrorKind::ConfigError, "G-structure data does not match " + problem.model.describe());
}

// ----------------------------------------------------------- Weingarten

Eigen::MatrixXd weingarten_from_alpha(const Eigen::MatrixXd& g, const Eigen::MatrixXd& g0,
                                      const Eigen::MatrixXd& alpha0) {
  const int n = static_cast<int>(g.rows());
  const int k = static_cast<int>(g0.rows());
  if (alpha0.rows() != k || alpha0.cols() != n * n) throw Error(ErrorKind::ShapeError, "alpha0 has the wrong shape");
  if (std::abs(g.determinant()) < default_tolerances().degenerate_det)
    throw Error(ErrorKind::DegenerateForm, "tangent metric is degenerate");
  if (std::abs(g0.determinant()) < default_tolerances().degenerate_det)
    throw Error(ErrorKind::DegenerateForm, "normal metric is degenerate");
  const Eigen::MatrixXd gi = g.inverse();
  Eigen::MatrixXd out(n, n * k);
  for (int b = 0; b < k; ++b) {
    // m(j, l) = g0(alpha0(d_j, d_l), e_b); A(e_b) = -g^{-1} m^T.
    Eigen::MatrixXd m(n, n);
    const Eigen::RowVectorXd row = g0.row(b);
    for (int j = 0; j < n; ++j)
      for (int l = 0; l < n; ++l) m(j, l) = row.dot(alpha0.col(j * n + l));
    const Eigen::MatrixXd a = -gi * m.transpose();
    for (int i = 0; i < n; ++i) out.col(i * k + b) = a.col(i);
  }
  return out;
}

MatrixField weingarten_field(const MetricField& g, const MetricField& g0, const MatrixField& alpha0) {
  const int n = g.source.rows();
  const int k = g0.source.rows();
  return alpha0.derived(
      n, n * k,
      [g, g0, alpha0](const VecN& x) {
        return weingarten_from_alpha(g.at(x).matrix(), g0.at(x).matrix(), alpha0(x));
      },
      "weingarten(" + alpha0.name() + ")");
}

// ------------------------------------------------------------ node data

VecN NodeTensors::alpha_of(const VecN& v, const VecN& w) const {
  VecN out = VecN::Zero(k);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) out += v(i) * w(j) * alpha.col(i * n + j);
  return out;
}

VecN NodeTensors::weingarten_of(const VecN& v, const VecN& e) const {
  VecN out = VecN::Zero(n);
  for (int i = 0; i < n; ++i)
    for (int b = 0; b < k; ++b) out += v(i) * e(b) * weingarten.col(i * k + b);
  return out;
}

EndoMatrix NodeTensors::gamma_of(const VecN& v) const {
  EndoMatrix out = EndoMatrix::Zero(n, n);
  for (int i = 0; i < n; ++i) out += v(i) * gamma[i];
  return out;
}

EndoMatrix NodeTensors::gamma0_of(const VecN& v) const {
  EndoMatrix out = EndoMatrix::Zero(k, k);
  for (int i = 0; i < n; ++i) out += v(i) * gamma0[i];
  return out;
}

EndoMatrix NodeTensors::curvature_of(const VecN& v, const VecN& w) const {
  EndoMatrix out = EndoMatrix::Zero(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) out += v(i) * w(j) * curvature[i * n + j];
  return out;
}

EndoMatrix NodeTensors::curvature0_of(const VecN& v, const VecN& w) const {
  EndoMatrix out = EndoMatrix::Zero(k, k);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) out += v(i) * w(j) * curvature0[i * n + j];
  return out;
}

VecN NodeTensors::torsion_of(const VecN& v, const VecN& w) const { return gamma_of(v) * w - gamma_of(w) * v; }

VecN NodeTensors::nabla_alpha(const VecN& v, const VecN& w, const VecN& u) const {
  VecN out = gamma0_of(v) * alpha_of(w, u) - alpha_of(gamma_of(v) * w, u) - alpha_of(w, gamma_of(v) * u);
  for (int a = 0; a < n; ++a) {
    if (v(a) == 0.0) continue;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) out += v(a) * w(i) * u(j) * dalpha[a].col(i * n + j);
  }
  return out;
}

VecN NodeTensors::nabla_weingarten(const VecN& v, const VecN& w, const VecN& e) const {
  VecN out = gamma_of(v) * weingarten_of(w, e) - weingarten_of(gamma_of(v) * w, e) -
             weingarten_of(w, gamma0_of(v) * e);
  for (int a = 0; a < n; ++a) {
    if (v(a) == 0.0) continue;
    for (int i = 0; i < n; ++i)
      for (int b = 0; b < k; ++b) out += v(a) * w(i) * e(b) * dweingarten[a].col(i * k + b);
  }
  return out;
}

VecN NodeTensors::model_curvature(const VecN& v, const VecN& w, const VecN& z) const {
  return model.curvature(embed_tangent(v, k), embed_tangent(w, k)) * z;
}

NodeTensors node_tensors(const ImmersionProblem& problem, const VecN& x) {
  const WhitneyData& d = problem.data;
  NodeTensors t;
  t.n = d.dim();
  t.k = d.normal_rank();
  t.gamma = d.tangent_conn.at(x);
  t.gamma0 = d.normal_conn.at(x);
  t.curvature = curvature_blocks(d.tangent_conn, x);
  t.curvature0 = curvature_blocks(d.normal_conn, x);
  t.alpha = d.alpha0(x);
  t.weingarten = d.a0(x);
  for (int a = 0; a < t.n; ++a) {
    t.dalpha.push_back(d.alpha0.derivative(x, a));
    t.dweingarten.push_back(d.a0.derivative(x, a));
  }
  if (d.g && d.g0) {
    t.g = d.g->at(x).matrix();
    t.g0 = d.g0->at(x).matrix();
  }
  t.fibre = problem.spec.at(x);
  t.model = characteristic_tensors(problem.model, t.fibre);
  return t;
}

// -------------------------------------------------------------- residuals

VecN gauss_residual(const NodeTensors& t, const VecN& v, const VecN& w, const VecN& u) {
  const VecN lhs = t.model_curvature(v, w, embed_tangent(u, t.k)).head(t.n);
  const VecN rhs = t.curvature_of(v, w) * u + t.weingarten_of(v, t.alpha_of(w, u)) -
                   t.weingarten_of(w, t.alpha_of(v, u));
  return lhs - rhs;
}

VecN ricci_residual(const NodeTensors& t, const VecN& v, const VecN& w, const VecN& e) {
  const VecN lhs = t.model_curvature(v, w, embed_normal(e, t.n)).tail(t.k);
  const VecN rhs = t.curvature0_of(v, w) * e + t.alpha_of(v, t.weingarten_of(w, e)) -
                   t.alpha_of(w, t.weingarten_of(v, e));
  return lhs - rhs;
}

VecN codazzi_residual(const NodeTensors& t, const VecN& v, const VecN& w, const VecN& u) {
  const VecN lhs = t.model_curvature(v, w, embed_tangent(u, t.k)).tail(t.k);
  const VecN rhs = t.nabla_alpha(v, w, u) - t.nabla_alpha(w, v, u) + t.alpha_of(t.torsion_of(v, w), u);
  return lhs - rhs;
}

VecN codazzi2_residual(const NodeTensors& t, const VecN& v, const VecN& w, const VecN& e) {
  const VecN lhs = t.model_curvature(v, w, embed_normal(e, t.n)).head(t.n);
  const VecN rhs = t.nabla_weingarten(v, w, e) - t.nabla_weingarten(w, v, e) +
                   t.weingarten_of(t.torsion_of(v, w), e);
  return lhs - rhs;
}

std::pair<VecN, VecN> torsion_residuals(const NodeTensors& t, const VecN& v, const VecN& w) {
  const VecN tb = t.model.torsion(embed_tangent(v, t.k), embed_tangent(w, t.k));
  return {tb.head(t.n) - t.torsion_of(v, w), tb.tail(t.k) - (t.alpha_of(v, w) - t.alpha_of(w, v))};
}

QuotientRepr inner_torsion_residual(const ImmersionProblem& problem, const ConnectionField& hat,
                                    const NodeTensors& t, const VecN& x, const VecN& v) {
  return t.model.inner(embed_tangent(v, t.k)) - inner_torsion(problem.spec, hat, x, v);
}

namespace {

void require_metrics(const NodeTensors& t) {
  if (t.g.size() == 0 || t.g0.size() == 0)
    throw Error(ErrorKind::ConfigError, "metric forms of the compatibility equations need g and g0");
}

Eigen::MatrixXd whitney_form(const NodeTensors& t) {
  Eigen::MatrixXd h = Eigen::MatrixXd::Zero(t.n + t.k, t.n + t.k);
  h.topLeftCorner(t.n, t.n) = t.g;
  h.bottomRightCorner(t.k, t.k) = t.g0;
  return h;
}

}  // namespace

double gauss_metric_residual(const NodeTensors& t, const VecN& v, const VecN& w, const VecN& u, const VecN& z) {
  require_metrics(t);
  const double lhs = embed_tangent(t.model_curvature(v, w, embed_tangent(u, t.k)).head(t.n), t.k)
                         .dot(whitney_form(t) * embed_tangent(z, t.k));
  const double rhs = (t.curvature_of(v, w) * u).dot(t.g * z) - t.alpha_of(w, u).dot(t.g0 * t.alpha_of(v, z)) +
                     t.alpha_of(v, u).dot(t.g0 * t.alpha_of(w, z));
  return lhs - rhs;
}

double codazzi_metric_residual(const NodeTensors& t, const VecN& v, const VecN& w, const VecN& u, const VecN& e) {
  require_metrics(t);
  const double lhs = t.model_curvature(v, w, embed_tangent(u, t.k)).dot(whitney_form(t) * embed_normal(e, t.n));
  const double rhs = (t.nabla_alpha(v, w, u) - t.nabla_alpha(w, v, u)).dot(t.g0 * e);
  return lhs - rhs;
}

double ricci_metric_residual(const NodeTensors& t, const VecN& v, const VecN& w, const VecN& e, const VecN& e2) {
  require_metrics(t);
  const double lhs = t.model_curvature(v, w, embed_normal(e, t.n)).dot(whitney_form(t) * embed_normal(e2, t.n));
  // Matrices of A0(e) and A0(e2) acting on T_xM.
  Eigen::MatrixXd ae(t.n, t.n), ae2(t.n, t.n);
  for (int i = 0; i < t.n; ++i) {
    ae.col(i) = t.weingarten_of(VecN::Unit(t.n, i), e);
    ae2.col(i) = t.weingarten_of(VecN::Unit(t.n, i), e2);
  }
  const Eigen::MatrixXd ae2_star = transpose_wrt(t.g, ae2);
  const double rhs = (t.curvature0_of(v, w) * e).dot(t.g0 * e2) + (ae * v).dot(t.g * (ae2_star * w)) -
                     (ae * w).dot(t.g * (ae2 * v));
  return lhs - rhs;
}

VecN gauss_residual(const ImmersionProblem& p, const VecN& x, const VecN& v, const VecN& w, const VecN& u) {
  return gauss_residual(node_tensors(p, x), v, w, u);
}
VecN ricci_residual(const ImmersionProblem& p, const VecN& x, const VecN& v, const VecN& w, const VecN& e) {
  return ricci_residual(node_tensors(p, x), v, w, e);
}
VecN codazzi_residual(const ImmersionProblem& p, const VecN& x, const VecN& v, const VecN& w, const VecN& u) {
  return codazzi_residual(node_tensors(p, x), v, w, u);
}
VecN codazzi2_residual(const ImmersionProblem& p, const VecN& x, const VecN& v, const VecN& w, const VecN& e) {
  return codazzi2_residual(node_tensors(p, x), v, w, e);
}
std::pair<VecN, VecN> torsion_residuals(const ImmersionProblem& p, const VecN& x, const VecN& v, const VecN& w) {
  return torsion_residuals(node_tensors(p, x), v, w);
}
QuotientRepr inner_torsion_residual(const ImmersionProblem& p, const VecN& x, const VecN& v) {
  return inner_torsion_residual(p, p.hat(), node_tensors(p, x), x, v);
}

// ----------------------------------------------------------------- report

void FamilyStats::add(double value, const VecN& x) {
  double a = std::abs(value);
  if (!std::isfinite(a)) a = std::numeric_limits<double>::infinity();
  if (samples == 0 || a > max) {
    max = a;
    worst_point = x;
  }
  sum_squares += a * a;
  ++samples;
  rms = std::sqrt(sum_squares / static_cast<double>(samples));
}

void FamilyStats::merge(const FamilyStats& other) {
  if (other.samples == 0) return;
  if (samples == 0 || other.max > max) {
    max = other.max;
    worst_point = other.worst_point;
  }
  sum_squares += other.sum_squares;
  samples += other.samples;
  rms = std::sqrt(sum_squares / static_cast<double>(samples));
}

const FamilyStats& ResidualReport::family(const std::string& name) const {
  for (const auto& f : families)
    if (f.name == name) return f;
  throw Error(ErrorKind::ConfigError, "no residual family named '" + name + "'");
}

double ResidualReport::max_residual() const {
  double m = 0.0;
  for (const auto& f : families) m = std::max(m, f.max);
  return m;
}

std::vector<std::string> ResidualReport::violations(double tol) const {
  std::vector<std::string> out;
  for (const auto& f : families)
    if (!(f.max <= tol)) out.push_back(f.name);
  return out;
}

nlohmann::ordered_json ResidualReport::to_json() const {
  nlohmann::ordered_json j;
  j["nodes"] = nodes;
  j["seed"] = plan.seed;
  j["random_per_node"] = plan.random_per_node;
  j["margin"] = plan.margin;
  j["stride"] = plan.stride;
  j["max_residual"] = max_residual();
  nlohmann::ordered_json fams = nlohmann::ordered_json::array();
  for (const auto& f : families) {
    nlohmann::ordered_json e;
    e["name"] = f.name;
    e["max"] = f.max;
    e["rms"] = f.rms;
    e["samples"] = f.samples;
    e["worst_point"] = std::vector<double>(f.worst_point.data(), f.worst_point.data() + f.worst_point.size());
    fams.push_back(e);
  }
  j["families"] = fams;
  return j;
}

std::vector<std::string> residual_family_names(bool metric) {
  std::vector<std::string> names = {"gauss",          "ricci",         "codazzi",      "codazzi_weingarten",
                                    "torsion_tangent", "torsion_normal", "inner_torsion"};
  if (metric) {
    names.push_back("gauss_metric");
    names.push_back("codazzi_metric");
    names.push_back("ricci_metric");
  }
  return names;
}

namespace {

struct TupleSource {
  std::mt19937_64 rng;
  std::uniform_real_distribution<double> dist{-1.0, 1.0};
  VecN next(int size) {
    VecN v(size);
    for (int i = 0; i < size; ++i) v(i) = dist(rng);
    return v;
  }
};

}  // namespace

ResidualReport full_report(const ImmersionProblem& problem, const ChartGrid& grid, const SamplingPlan& plan) {
  const int n = problem.data.dim();
  const int k = problem.data.normal_rank();
  if (grid.dim() != n) throw Error(ErrorKind::ShapeError, "grid dimension differs from the source dimension");
  validate_problem(problem, grid.node(0));
  const bool metric = problem.data.g.has_value() && problem.data.g0.has_value();
  ResidualReport report;
  report.plan = plan;
  for (const auto& name : residual_family_names(metric)) {
    FamilyStats f;
    f.name = name;
    report.families.push_back(f);
  }
  auto fam = [&](int i) -> FamilyStats& { return report.families[i]; };
  const ConnectionField hat = problem.hat();
  const int stride = std::max(1, plan.stride);

  for (long node = 0; node < grid.node_count(); ++node) {
    const std::vector<int> idx = grid.multi_index(node);
    bool keep = true;
    for (int a = 0; a < n; ++a) {
      const int s = grid.samples()[a];
      if (idx[a] < plan.margin || idx[a] >= s - plan.margin || (idx[a] - plan.margin) % stride != 0) keep = false;
    }
    if (!keep) continue;
    const VecN x = grid.node(node);
    const NodeTensors t = node_tensors(problem, x);
    ++report.nodes;

    auto eval = [&](const VecN& v, const VecN& w, const VecN& u, const VecN& z, const VecN& e, const VecN& e2,
                    bool with_single) {
      fam(0).add(max_abs(gauss_residual(t, v, w, u)), x);
      fam(1).add(max_abs(ricci_residual(t, v, w, e)), x);
      fam(2).add(max_abs(codazzi_residual(t, v, w, u)), x);
      fam(3).add(max_abs(codazzi2_residual(t, v, w, e)), x);
      const auto [tt, tn] = torsion_residuals(t, v, w);
      fam(4).add(max_abs(tt), x);
      fam(5).add(max_abs(tn), x);
      if (with_single) fam(6).add(inner_torsion_residual(problem, hat, t, x, v).norm(), x);
      if (metric) {
        fam(7).add(gauss_metric_residual(t, v, w, u, z), x);
        fam(8).add(codazzi_metric_residual(t, v, w, u, e), x);
        fam(9).add(ricci_metric_residual(t, v, w, e, e2), x);
      }
    };

    // Basis tuples: pairs i < j, cycling the remaining slots through the basis.
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j)
        for (int l = 0; l < n; ++l)
          for (int b = 0; b < k; ++b) {
            const VecN v = VecN::Unit(n, i), w = VecN::Unit(n, j), u = VecN::Unit(n, l);
            const VecN e = VecN::Unit(k, b), e2 = VecN::Unit(k, (b + 1) % k);
            eval(v, w, u, VecN::Unit(n, (l + 1) % n), e, e2, false);
          }
    for (int i = 0; i < n; ++i) fam(6).add(inner_torsion_residual(problem, hat, t, x, VecN::Unit(n, i)).norm(), x);

    TupleSource src{std::mt19937_64(plan.seed ^ (0x9e3779b97f4a7c15ULL * static_cast<std::uint64_t>(node + 1)))};
    for (int r = 0; r < plan.random_per_node; ++r) {
      const VecN v = src.next(n), w = src.next(n), u = src.next(n), z = src.next(n);
      const VecN e = src.next(k), e2 = src.next(k);
      eval(v, w, u, z, e, e2, true);
    }
  }
  if (report.nodes == 0) throw Error(ErrorKind::ConfigError, "sampling plan selects no grid nodes");
  return report;
}

}  // namespace gstim
