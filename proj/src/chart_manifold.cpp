#include "gstim/chart_manifold.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>

namespace gstim {

// ---------------------------------------------------------------- ChartGrid

ChartGrid::ChartGrid(VecN coord_min, VecN coord_max, std::vector<int> samples)
    : min_(std::move(coord_min)), max_(std::move(coord_max)), samples_(std::move(samples)) {
  if (min_.size() != max_.size() || static_cast<int>(samples_.size()) != min_.size())
    throw Error(ErrorKind::ShapeError, "chart grid bounds and sample counts disagree");
  for (int a = 0; a < dim(); ++a) {
    if (samples_[a] < 3) throw Error(ErrorKind::ShapeError, "chart grid needs at least 3 samples per axis");
    if (!(max_(a) > min_(a))) throw Error(ErrorKind::ShapeError, "chart grid max must exceed min");
  }
}

double ChartGrid::spacing(int axis) const {
  return (max_(axis) - min_(axis)) / static_cast<double>(samples_[axis] - 1);
}

double ChartGrid::min_spacing() const {
  double h = spacing(0);
  for (int a = 1; a < dim(); ++a) h = std::min(h, spacing(a));
  return h;
}

int ChartGrid::node_count() const {
  int c = 1;
  for (int s : samples_) c *= s;
  return c;
}

int ChartGrid::flat_index(const std::vector<int>& idx) const {
  int flat = 0;
  int stride = 1;
  for (int a = 0; a < dim(); ++a) {
    flat += idx[a] * stride;
    stride *= samples_[a];
  }
  return flat;
}

std::vector<int> ChartGrid::multi_index(int flat) const {
  std::vector<int> idx(dim());
  for (int a = 0; a < dim(); ++a) {
    idx[a] = flat % samples_[a];
    flat /= samples_[a];
  }
  return idx;
}

VecN ChartGrid::node(const std::vector<int>& idx) const {
  VecN x(dim());
  for (int a = 0; a < dim(); ++a) {
    // Hit the upper bound exactly at the last node.
    x(a) = idx[a] == samples_[a] - 1 ? max_(a) : min_(a) + spacing(a) * idx[a];
  }
  return x;
}

bool ChartGrid::contains(const VecN& x, double slack) const {
  for (int a = 0; a < dim(); ++a)
    if (x(a) < min_(a) - slack || x(a) > max_(a) + slack) return false;
  return true;
}

// ------------------------------------------------------------ FD weights

std::vector<double> finite_difference_weights(int deriv, const std::vector<double>& offsets) {
  const int n = static_cast<int>(offsets.size());
  // c[j][k]: weight of sample j for derivative k.
  std::vector<std::vector<double>> c(n, std::vector<double>(deriv + 1, 0.0));
  double c1 = 1.0;
  double c4 = offsets[0];
  c[0][0] = 1.0;
  for (int i = 1; i < n; ++i) {
    const int mn = std::min(i, deriv);
    double c2 = 1.0;
    const double c5 = c4;
    c4 = offsets[i];
    for (int j = 0; j < i; ++j) {
      const double c3 = offsets[i] - offsets[j];
      c2 *= c3;
      if (j == i - 1) {
        for (int k = mn; k >= 1; --k) c[i][k] = c1 * (k * c[i - 1][k - 1] - c5 * c[i - 1][k]) / c2;
        c[i][0] = -c1 * c5 * c[i - 1][0] / c2;
      }
      for (int k = mn; k >= 1; --k) c[j][k] = (c4 * c[j][k] - k * c[j][k - 1]) / c3;
      c[j][0] = c4 * c[j][0] / c3;
    }
    c1 = c2;
  }
  std::vector<double> w(n);
  for (int j = 0; j < n; ++j) w[j] = c[j][deriv];
  return w;
}

// ------------------------------------------------------------- MatrixField

struct MatrixField::Impl {
  int rows = 0;
  int cols = 0;
  std::string name;
  Evaluator f;
  VecN dmin, dmax;
  VecN steps;
  bool sampled = false;
  ChartGrid grid;
  std::vector<Eigen::MatrixXd> values;
  int order = 1;

  Eigen::MatrixXd interpolate(const VecN& x) const;
};

namespace {

constexpr double kStencil[4] = {1.0 / 12.0, -8.0 / 12.0, 8.0 / 12.0, -1.0 / 12.0};
constexpr double kOffsets[4] = {-2.0, -1.0, 1.0, 2.0};

void check_inside(const VecN& x, const VecN& lo, const VecN& hi, const std::string& name) {
  if (x.size() != lo.size()) throw Error(ErrorKind::ShapeError, "point dimension mismatch for field " + name);
  for (int a = 0; a < x.size(); ++a) {
    const double slack = 1e-12 * std::max(1.0, std::abs(hi(a) - lo(a)));
    if (!(x(a) >= lo(a) - slack && x(a) <= hi(a) + slack)) {
      std::ostringstream os;
      os << "point outside the domain of field '" << name << "' on axis " << a;
      throw Error(ErrorKind::OutOfDomain, os.str());
    }
  }
}

}  // namespace

Eigen::MatrixXd MatrixField::Impl::interpolate(const VecN& x) const {
  const int d = grid.dim();
  const int width = order == 3 ? 4 : 2;
  std::vector<std::vector<int>> nodes(d);
  std::vector<std::vector<double>> weights(d);
  for (int a = 0; a < d; ++a) {
    const int s = grid.samples()[a];
    const double h = grid.spacing(a);
    const double t = (x(a) - grid.coord_min()(a)) / h;
    int cell = std::clamp(static_cast<int>(std::floor(t)), 0, s - 2);
    int first = order == 3 ? cell - 1 : cell;
    first = std::clamp(first, 0, s - width);
    for (int i = 0; i < width; ++i) {
      double w = 1.0;
      for (int j = 0; j < width; ++j)
        if (j != i) w *= (t - (first + j)) / static_cast<double>(i - j);
      nodes[a].push_back(first + i);
      weights[a].push_back(w);
    }
  }
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(rows, cols);
  std::vector<int> pick(d, 0);
  while (true) {
    double w = 1.0;
    std::vector<int> idx(d);
    for (int a = 0; a < d; ++a) {
      w *= weights[a][pick[a]];
      idx[a] = nodes[a][pick[a]];
    }
    if (w != 0.0) out += w * values[grid.flat_index(idx)];
    int a = 0;
    while (a < d && ++pick[a] == width) pick[a++] = 0;
    if (a == d) break;
  }
  return out;
}

MatrixField MatrixField::closed_form(int rows, int cols, Evaluator f, VecN domain_min, VecN domain_max,
                                     double fd_step, std::string name) {
  if (domain_min.size() != domain_max.size()) throw Error(ErrorKind::ShapeError, "domain bounds disagree");
  auto impl = std::make_shared<Impl>();
  impl->rows = rows;
  impl->cols = cols;
  impl->name = std::move(name);
  impl->f = std::move(f);
  impl->dmin = std::move(domain_min);
  impl->dmax = std::move(domain_max);
  impl->steps = VecN::Constant(impl->dmin.size(), fd_step);
  MatrixField out;
  out.impl_ = std::move(impl);
  return out;
}

MatrixField MatrixField::grid_sampled(const ChartGrid& grid, std::vector<Eigen::MatrixXd> values, int order,
                                      std::string name) {
  if (order != 1 && order != 3) throw Error(ErrorKind::ShapeError, "interpolation order must be 1 or 3");
  if (static_cast<int>(values.size()) != grid.node_count())
    throw Error(ErrorKind::ShapeError, "grid-sampled values do not match the grid shape");
  if (order == 3)
    for (int s : grid.samples())
      if (s < 4) throw Error(ErrorKind::ShapeError, "cubic interpolation needs 4 samples per axis");
  auto impl = std::make_shared<Impl>();
  impl->rows = static_cast<int>(values.front().rows());
  impl->cols = static_cast<int>(values.front().cols());
  for (const auto& v : values)
    if (v.rows() != impl->rows || v.cols() != impl->cols)
      throw Error(ErrorKind::ShapeError, "grid-sampled values have inconsistent shapes");
  impl->name = std::move(name);
  impl->sampled = true;
  impl->grid = grid;
  impl->values = std::move(values);
  impl->order = order;
  impl->dmin = grid.coord_min();
  impl->dmax = grid.coord_max();
  impl->steps.resize(grid.dim());
  for (int a = 0; a < grid.dim(); ++a) impl->steps(a) = grid.spacing(a);
  MatrixField out;
  out.impl_ = std::move(impl);
  return out;
}

MatrixField MatrixField::constant(const Eigen::MatrixXd& value, VecN domain_min, VecN domain_max, double fd_step,
                                  std::string name) {
  return closed_form(
      static_cast<int>(value.rows()), static_cast<int>(value.cols()), [value](const VecN&) { return value; },
      std::move(domain_min), std::move(domain_max), fd_step, std::move(name));
}

int MatrixField::rows() const { return impl_->rows; }
int MatrixField::cols() const { return impl_->cols; }
int MatrixField::dim() const { return static_cast<int>(impl_->dmin.size()); }
const std::string& MatrixField::name() const { return impl_->name; }
bool MatrixField::is_grid_sampled() const { return impl_->sampled; }
double MatrixField::fd_step(int axis) const { return impl_->steps(axis); }
const VecN& MatrixField::domain_min() const { return impl_->dmin; }
const VecN& MatrixField::domain_max() const { return impl_->dmax; }
const ChartGrid& MatrixField::grid() const { return impl_->grid; }
const std::vector<Eigen::MatrixXd>& MatrixField::node_values() const { return impl_->values; }
int MatrixField::interpolation_order() const { return impl_->order; }

Eigen::MatrixXd MatrixField::operator()(const VecN& x) const {
  if (!impl_) throw Error(ErrorKind::ConfigError, "evaluating an empty field");
  check_inside(x, impl_->dmin, impl_->dmax, impl_->name);
  Eigen::MatrixXd v = impl_->sampled ? impl_->interpolate(x) : impl_->f(x);
  if (v.rows() != impl_->rows || v.cols() != impl_->cols)
    throw Error(ErrorKind::ShapeError, "field '" + impl_->name + "' returned a value of the wrong shape");
  return v;
}

Eigen::MatrixXd MatrixField::derivative(const VecN& x, int axis) const {
  const double h = impl_->steps(axis);
  Eigen::MatrixXd acc = Eigen::MatrixXd::Zero(impl_->rows, impl_->cols);
  const double below = (x(axis) - impl_->dmin(axis)) / h, above = (impl_->dmax(axis) - x(axis)) / h;
  if (below >= 2.0 - 1e-9 && above >= 2.0 - 1e-9) {
    for (int i = 0; i < 4; ++i) {
      VecN y = x;
      y(axis) += kOffsets[i] * h;
      acc += kStencil[i] * (*this)(y);
    }
    return acc / h;
  }
  // Near the edge of the domain: the same five nodes, shifted inwards.
  if (below + above < 4.0 - 1e-9) {
    std::ostringstream os;
    os << "domain of field '" << impl_->name << "' too short for a derivative on axis " << axis;
    throw Error(ErrorKind::OutOfDomain, os.str());
  }
  const double shift = below < 2.0 ? 2.0 - std::max(below, 0.0) : -(2.0 - std::max(above, 0.0));
  std::vector<double> offsets;
  for (int i = -2; i <= 2; ++i) offsets.push_back(i + shift);
  const std::vector<double> w = finite_difference_weights(1, offsets);
  for (int i = 0; i < 5; ++i) {
    VecN y = x;
    y(axis) += offsets[i] * h;
    acc += w[i] * (*this)(y);
  }
  return acc / h;
}

Eigen::MatrixXd MatrixField::directional(const VecN& x, const VecN& v) const {
  Eigen::MatrixXd acc = Eigen::MatrixXd::Zero(impl_->rows, impl_->cols);
  for (int a = 0; a < v.size(); ++a)
    if (v(a) != 0.0) acc += v(a) * derivative(x, a);
  return acc;
}

MatrixField MatrixField::derived(int rows, int cols, Evaluator f, std::string name) const {
  auto impl = std::make_shared<Impl>();
  impl->rows = rows;
  impl->cols = cols;
  impl->name = std::move(name);
  impl->f = std::move(f);
  impl->dmin = impl_->dmin;
  impl->dmax = impl_->dmax;
  impl->steps = impl_->steps;
  MatrixField out;
  out.impl_ = std::move(impl);
  return out;
}

// --------------------------------------------------------- ConnectionField

ConnectionField::ConnectionField(int dim, int rank, MatrixField blocks)
    : dim_(dim), rank_(rank), field_(std::move(blocks)) {
  if (field_.rows() != rank || field_.cols() != rank * dim)
    throw Error(ErrorKind::ShapeError, "connection field must be rank x (rank*dim)");
}

ConnectionField ConnectionField::trivial(int dim, int rank, VecN domain_min, VecN domain_max, double fd_step) {
  return ConnectionField(dim, rank,
                         MatrixField::constant(Eigen::MatrixXd::Zero(rank, rank * dim), std::move(domain_min),
                                               std::move(domain_max), fd_step, "trivial connection"));
}

namespace {

std::vector<EndoMatrix> split_blocks(const Eigen::MatrixXd& m, int dim, int rank) {
  std::vector<EndoMatrix> out(dim);
  for (int i = 0; i < dim; ++i) out[i] = m.middleCols(i * rank, rank);
  return out;
}

}  // namespace

std::vector<EndoMatrix> ConnectionField::at(const VecN& x) const { return split_blocks(field_(x), dim_, rank_); }

EndoMatrix ConnectionField::gamma(const VecN& x, const VecN& v) const {
  const Eigen::MatrixXd m = field_(x);
  EndoMatrix out = EndoMatrix::Zero(rank_, rank_);
  for (int i = 0; i < dim_; ++i) out += v(i) * m.middleCols(i * rank_, rank_);
  return out;
}

std::vector<EndoMatrix> ConnectionField::derivative(const VecN& x, int axis) const {
  return split_blocks(field_.derivative(x, axis), dim_, rank_);
}

// ------------------------------------------------------------ Levi-Civita

ChristoffelValue levi_civita(const MetricField& metric, const VecN& x) {
  const int n = metric.source.rows();
  const Bilinear g = metric.at(x);
  const Eigen::MatrixXd ginv = g.matrix().inverse();
  std::vector<Eigen::MatrixXd> dg(n);
  for (int a = 0; a < n; ++a) dg[a] = metric.source.derivative(x, a);
  ChristoffelValue gamma(n, EndoMatrix::Zero(n, n));
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      // Lowered symbols [ij, l] = (d_i g_jl + d_j g_il - d_l g_ij) / 2.
      VecN lowered(n);
      for (int l = 0; l < n; ++l) lowered(l) = 0.5 * (dg[i](j, l) + dg[j](i, l) - dg[l](i, j));
      gamma[i].col(j) = ginv * lowered;
    }
  }
  return gamma;
}

ConnectionField levi_civita_connection(const MetricField& metric) {
  const int n = metric.source.rows();
  MatrixField blocks = metric.source.derived(
      n, n * n,
      [metric, n](const VecN& x) {
        const ChristoffelValue g = levi_civita(metric, x);
        Eigen::MatrixXd out(n, n * n);
        for (int i = 0; i < n; ++i) out.middleCols(i * n, n) = g[i];
        return out;
      },
      "levi-civita(" + metric.source.name() + ")");
  return ConnectionField(n, n, std::move(blocks));
}

// ------------------------------------------------------ curvature, torsion

std::vector<EndoMatrix> curvature_blocks(const ConnectionField& conn, const VecN& x) {
  const int n = conn.dim();
  const auto gamma = conn.at(x);
  std::vector<std::vector<EndoMatrix>> d(n);
  for (int a = 0; a < n; ++a) d[a] = conn.derivative(x, a);
  std::vector<EndoMatrix> out(n * n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (i == j) {
        out[i * n + j] = EndoMatrix::Zero(conn.rank(), conn.rank());
      } else if (j < i) {
        out[i * n + j] = -out[j * n + i];
      } else {
        out[i * n + j] = d[i][j] - d[j][i] + commutator(gamma[i], gamma[j]);
      }
    }
  }
  return out;
}

EndoMatrix curvature_tensor(const ConnectionField& conn, const VecN& x, const VecN& v, const VecN& w) {
  const int n = conn.dim();
  const auto blocks = curvature_blocks(conn, x);
  EndoMatrix out = EndoMatrix::Zero(conn.rank(), conn.rank());
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) out += (v(i) * w(j) - v(j) * w(i)) * blocks[i * n + j];
  return out;
}

VecN iota_torsion(const ConnectionField& conn, const MatrixField& iota, const VecN& x, const VecN& v,
                  const VecN& w) {
  const int n = conn.dim();
  const auto gamma = conn.at(x);
  const Eigen::MatrixXd io = iota(x);
  std::vector<Eigen::MatrixXd> d(n);
  for (int a = 0; a < n; ++a) d[a] = iota.derivative(x, a);
  VecN out = VecN::Zero(conn.rank());
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      const double c = v(i) * w(j) - v(j) * w(i);
      if (c == 0.0) continue;
      const VecN tij = d[i].col(j) + gamma[i] * io.col(j) - d[j].col(i) - gamma[j] * io.col(i);
      out += c * tij;
    }
  }
  return out;
}

std::vector<EndoMatrix> christoffel_of_frame(const ConnectionField& conn, const MatrixField& s, const VecN& x) {
  const auto gamma = conn.at(x);
  const Eigen::MatrixXd sinv = checked_inverse(s(x), "frame section");
  std::vector<EndoMatrix> out(conn.dim());
  for (int i = 0; i < conn.dim(); ++i) out[i] = gamma[i] + s.derivative(x, i) * sinv;
  return out;
}

EndoMatrix covariant_derivative_form(const ConnectionField& conn, const MatrixField& form, const VecN& x,
                                     const VecN& v) {
  const EndoMatrix gam = conn.gamma(x, v);
  const Eigen::MatrixXd g = form(x);
  return form.directional(x, v) - gam.transpose() * g - g * gam;
}

VecN covariant_derivative_section(const ConnectionField& conn, const MatrixField& section, const VecN& x,
                                  const VecN& v) {
  return section.directional(x, v).col(0) + conn.gamma(x, v) * section(x).col(0);
}

EndoMatrix covariant_derivative_endo(const ConnectionField& conn, const MatrixField& endo, const VecN& x,
                                     const VecN& v) {
  return endo.directional(x, v) + commutator(conn.gamma(x, v), endo(x));
}

// ------------------------------------------------------------ Whitney sum

VecN WhitneyData::alpha(const VecN& x, const VecN& v, const VecN& w) const {
  const int n = dim();
  const Eigen::MatrixXd a = alpha0(x);
  VecN out = VecN::Zero(normal_rank());
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      if (v(i) * w(j) != 0.0) out += v(i) * w(j) * a.col(i * n + j);
  return out;
}

VecN WhitneyData::weingarten(const VecN& x, const VecN& v, const VecN& e) const {
  const int n = dim();
  const int k = normal_rank();
  const Eigen::MatrixXd a = a0(x);
  VecN out = VecN::Zero(n);
  for (int i = 0; i < n; ++i)
    for (int b = 0; b < k; ++b)
      if (v(i) * e(b) != 0.0) out += v(i) * e(b) * a.col(i * k + b);
  return out;
}

Eigen::MatrixXd WhitneyData::whitney_form(const VecN& x) const {
  if (!g || !g0) throw Error(ErrorKind::SpecViolation, "whitney form needs both metrics");
  const int n = dim();
  const int k = normal_rank();
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(n + k, n + k);
  out.topLeftCorner(n, n) = g->at(x).matrix();
  out.bottomRightCorner(k, k) = g0->at(x).matrix();
  return out;
}

void validate_whitney(const WhitneyData& data) {
  const int n = data.tangent_conn.dim();
  const int k = data.normal_conn.rank();
  if (data.tangent_conn.rank() != n) throw Error(ErrorKind::ShapeError, "tangent connection rank must equal dim");
  if (data.normal_conn.dim() != n) throw Error(ErrorKind::ShapeError, "normal connection lives on another chart");
  if (data.alpha0.rows() != k || data.alpha0.cols() != n * n)
    throw Error(ErrorKind::ShapeError, "alpha0 must be k x (n*n)");
  if (data.a0.rows() != n || data.a0.cols() != n * k) throw Error(ErrorKind::ShapeError, "A0 must be n x (n*k)");
  if (data.g && data.g->source.rows() != n) throw Error(ErrorKind::ShapeError, "metric g has the wrong size");
  if (data.g0 && data.g0->source.rows() != k) throw Error(ErrorKind::ShapeError, "metric g0 has the wrong size");
}

ConnectionField assemble_whitney(const WhitneyData& data) {
  validate_whitney(data);
  const int n = data.dim();
  const int k = data.normal_rank();
  const int m = n + k;
  MatrixField blocks = data.tangent_conn.field().derived(
      m, m * n,
      [data, n, k, m](const VecN& x) {
        const Eigen::MatrixXd gt = data.tangent_conn.field()(x);
        const Eigen::MatrixXd gn = data.normal_conn.field()(x);
        const Eigen::MatrixXd al = data.alpha0(x);
        const Eigen::MatrixXd we = data.a0(x);
        Eigen::MatrixXd out(m, m * n);
        for (int i = 0; i < n; ++i) {
          auto blk = out.middleCols(i * m, m);
          blk.topLeftCorner(n, n) = gt.middleCols(i * n, n);
          blk.topRightCorner(n, k) = we.middleCols(i * k, k);
          blk.bottomLeftCorner(k, n) = al.middleCols(i * n, n);
          blk.bottomRightCorner(k, k) = gn.middleCols(i * k, k);
        }
        return out;
      },
      "whitney connection");
  return ConnectionField(n, m, std::move(blocks));
}

WhitneyComponents whitney_components(const ConnectionField& hat, int n, int k, const VecN& x) {
  if (hat.rank() != n + k || hat.dim() != n) throw Error(ErrorKind::ShapeError, "not a Whitney-sum connection");
  WhitneyComponents c;
  for (const auto& g : hat.at(x)) {
    c.tangent.push_back(g.topLeftCorner(n, n));
    c.weingarten.push_back(g.topRightCorner(n, k));
    c.alpha.push_back(g.bottomLeftCorner(k, n));
    c.normal.push_back(g.bottomRightCorner(k, k));
  }
  return c;
}

// ---------------------------------------------------------------- file I/O

void save_grid_field(const std::string& path, const MatrixField& field) {
  if (!field.is_grid_sampled()) throw Error(ErrorKind::ConfigError, "only grid-sampled fields can be saved");
  std::ofstream os(path);
  if (!os) throw Error(ErrorKind::ConfigError, "cannot write " + path);
  const ChartGrid& g = field.grid();
  os << std::setprecision(17);
  os << "gstim-field 1\n";
  os << "name " << (field.name().empty() ? "unnamed" : field.name()) << "\n";
  os << "dims " << g.dim() << "\n";
  os << "shape";
  for (int s : g.samples()) os << ' ' << s;
  os << "\nvalue_shape " << field.rows() << ' ' << field.cols() << "\n";
  os << "order " << field.interpolation_order() << "\n";
  os << "coord_min";
  for (int a = 0; a < g.dim(); ++a) os << ' ' << g.coord_min()(a);
  os << "\ncoord_max";
  for (int a = 0; a < g.dim(); ++a) os << ' ' << g.coord_max()(a);
  os << "\ndata\n";
  for (const auto& v : field.node_values()) {
    bool first = true;
    for (int r = 0; r < v.rows(); ++r)
      for (int c = 0; c < v.cols(); ++c) {
        os << (first ? "" : " ") << v(r, c);
        first = false;
      }
    os << "\n";
  }
}

MatrixField load_grid_field(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw Error(ErrorKind::ConfigError, "cannot read " + path);
  auto expect = [&](const std::string& key) {
    std::string k;
    is >> k;
    if (k != key) throw Error(ErrorKind::ConfigError, "field file: expected '" + key + "', got '" + k + "'");
  };
  expect("gstim-field");
  int version = 0;
  is >> version;
  if (version != 1) throw Error(ErrorKind::ConfigError, "field file: unsupported version");
  std::string name;
  expect("name");
  is >> name;
  int dims = 0;
  expect("dims");
  is >> dims;
  if (dims <= 0 || dims > 8) throw Error(ErrorKind::ConfigError, "field file: bad dims");
  std::vector<int> shape(dims);
  expect("shape");
  for (auto& s : shape) is >> s;
  int rows = 0, cols = 0, order = 0;
  expect("value_shape");
  is >> rows >> cols;
  expect("order");
  is >> order;
  VecN lo(dims), hi(dims);
  expect("coord_min");
  for (int a = 0; a < dims; ++a) is >> lo(a);
  expect("coord_max");
  for (int a = 0; a < dims; ++a) is >> hi(a);
  expect("data");
  ChartGrid grid(lo, hi, shape);
  std::vector<Eigen::MatrixXd> values(grid.node_count(), Eigen::MatrixXd(rows, cols));
  for (auto& v : values)
    for (int r = 0; r < rows; ++r)
      for (int c = 0; c < cols; ++c)
        if (!(is >> v(r, c))) throw Error(ErrorKind::ConfigError, "field file: truncated data");
  if (!is) throw Error(ErrorKind::ConfigError, "field file: malformed");
  return MatrixField::grid_sampled(grid, std::move(values), order, name);
}

}  // namespace gstim
