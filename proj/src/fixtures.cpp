#include "gstim/fixtures.hpp"

#include <cmath>
#include <numbers>

namespace gstim {

namespace {

using Mat = Eigen::MatrixXd;
constexpr double kPi = std::numbers::pi;
// Nested stencils (Christoffels from the metric, curvature from the
// Christoffels) stay near 1e-10 at this step.
constexpr double kStep = 1e-3;
// Closed-form domains extend past the grid so that exported fields can be
// sampled on a padded grid.
constexpr double kPad = 0.35;

struct Box {
  VecN lo, hi;
  std::vector<int> samples;
};

struct Builder {
  Box box;
  VecN dlo, dhi;
  int n, k;

  Builder(Box b, int k_, double pad = kPad) : box(std::move(b)), k(k_) {
    n = static_cast<int>(box.lo.size());
    dlo = box.lo.array() - pad;
    dhi = box.hi.array() + pad;
  }

  MatrixField field(int rows, int cols, MatrixField::Evaluator f, std::string name) const {
    return MatrixField::closed_form(rows, cols, std::move(f), dlo, dhi, kStep, std::move(name));
  }
  MatrixField constant(const Mat& m, std::string name) const {
    return MatrixField::constant(m, dlo, dhi, kStep, std::move(name));
  }
};

Mat block_diag(const Mat& a, const Mat& b) {
  Mat out = Mat::Zero(a.rows() + b.rows(), a.cols() + b.cols());
  out.topLeftCorner(a.rows(), a.cols()) = a;
  out.bottomRightCorner(b.rows(), b.cols()) = b;
  return out;
}

/// Alpha0 with the requested deformations applied.
MatrixField deform_alpha(const Builder& b, MatrixField alpha, const FixtureOptions& opt) {
  if (opt.alpha_scale == 1.0 && opt.alpha_bump == 0.0 && opt.alpha_antisym == 0.0) return alpha;
  const int n = b.n, k = b.k;
  const VecN centre = 0.5 * (b.box.lo + b.box.hi);
  const double width = 0.25 * (b.box.hi - b.box.lo).maxCoeff();
  return b.field(
      k, n * n,
      [=](const VecN& x) {
        Mat a = opt.alpha_scale * alpha(x);
        if (opt.alpha_bump != 0.0)
          a(0, 0) += opt.alpha_bump * std::exp(-(x - centre).squaredNorm() / (width * width));
        if (opt.alpha_antisym != 0.0) {
          a(0, 1) += opt.alpha_antisym;
          a(0, n) -= opt.alpha_antisym;
        }
        return a;
      },
      "alpha0*");
}

MatrixField deform_normal(const Builder& b, MatrixField blocks, const FixtureOptions& opt) {
  if (opt.normal_twist == 0.0) return blocks;
  if (b.k < 2) throw Error(ErrorKind::ConfigError, "normal_twist needs a normal bundle of rank at least 2");
  const int k = b.k;
  return b.field(
      k, k * b.n,
      [=](const VecN& x) {
        Mat m = blocks(x);
        const double d = opt.normal_twist * std::sin(x(1));
        m(1, 0) += d;
        m(0, 1) -= d;
        return m;
      },
      "normal connection*");
}

/// Fills the Whitney data from a tangent metric, a constant normal metric,
/// alpha0 and the normal connection blocks, applying the deformations.
WhitneyData whitney(const Builder& b, const MatrixField& g, const Mat& g0, int g0_index, MatrixField alpha,
                    MatrixField normal_blocks, const FixtureOptions& opt, int g_index = 0) {
  WhitneyData d;
  d.g = MetricField{g, g_index};
  d.g0 = MetricField{b.constant(g0, "g0"), g0_index};
  d.tangent_conn = levi_civita_connection(*d.g);
  d.normal_conn = ConnectionField(b.n, b.k, deform_normal(b, std::move(normal_blocks), opt));
  d.alpha0 = deform_alpha(b, std::move(alpha), opt);
  d.a0 = weingarten_field(*d.g, *d.g0, d.alpha0);
  return d;
}

GStructureSpec orthonormal_spec(const Builder& b, const WhitneyData& d) {
  GStructureSpec s;
  s.kind = StructureKind::Orthonormal;
  s.rank = b.n + b.k;
  s.form = b.field(s.rank, s.rank, [d](const VecN& x) { return d.whitney_form(x); }, "whitney form");
  s.index = d.g->index + d.g0->index;
  return s;
}

ChartGrid make_grid(const Box& box, const FixtureOptions& opt) {
  std::vector<int> samples = opt.samples.empty() ? box.samples : opt.samples;
  if (static_cast<int>(samples.size()) != box.lo.size())
    throw Error(ErrorKind::ShapeError, "grid samples do not match the chart dimension");
  return ChartGrid(box.lo, box.hi, samples);
}

VecN vec2(double a, double b) {
  VecN v(2);
  v << a, b;
  return v;
}

VecN flatten(const Mat& m) { return Eigen::Map<const VecN>(m.data(), m.size()); }

/// State (point, H) of a frame-field realization with frame E(point) H = l.
std::function<VecN(const VecN&)> frame_field_state(const ModelSpace& model, std::function<VecN(const VecN&)> point,
                                                   std::function<Mat(const VecN&)> ambient) {
  std::shared_ptr<const TargetRealization> target = realize_target(model);
  return [=](const VecN& x) {
    VecN s = target->base_state();
    const VecN p = point(x);
    s.head(p.size()) = p;
    const Mat e = target->frame(s);  // E(p), since the base frame part is the identity
    const Mat h = e.partialPivLu().solve(ambient(x));
    s.tail(h.size()) = flatten(h);
    return s;
  };
}

// ------------------------------------------------------------------ fixtures

Fixture flat_plane(const FixtureOptions& opt) {
  const Box box{vec2(-1, -1), vec2(1, 1), {21, 21}};
  const Builder b(box, 1);
  Fixture f;
  f.description = "flat plane z = 0 in Euclidean space";
  f.grid = make_grid(box, opt);
  const WhitneyData d = whitney(b, b.constant(Mat::Identity(2, 2), "g"), Mat::Identity(1, 1), 0,
                                b.constant(Mat::Zero(1, 4), "alpha0"), b.constant(Mat::Zero(1, 2), "nabla0"), opt);
  f.problem = {d, orthonormal_spec(b, d), ModelSpace::space_form(0.0, 3, 0)};
  f.frame = b.constant(Mat::Identity(3, 3), "frame");
  f.exact_point = [](const VecN& x) {
    VecN p(3);
    p << x(0), x(1), 0.0;
    return p;
  };
  f.exact_state = frame_field_state(f.problem.model, f.exact_point, [](const VecN&) { return Mat::Identity(3, 3); });
  return f;
}

Fixture sphere(const FixtureOptions& opt) {
  const Box box{vec2(0.3, 0.0), vec2(kPi - 0.3, kPi), {41, 41}};
  const Builder b(box, 1, 0.25);
  Fixture f;
  f.description = "unit sphere in Euclidean space, polar chart";
  f.grid = make_grid(box, opt);
  const MatrixField g = b.field(2, 2, [](const VecN& x) {
    Mat m = Mat::Identity(2, 2);
    m(1, 1) = std::sin(x(0)) * std::sin(x(0));
    return m;
  }, "round metric");
  // alpha0 = g along the inward normal
  const MatrixField alpha = b.field(1, 4, [g](const VecN& x) {
    const Mat m = g(x);
    return Mat(Eigen::Map<const Mat>(m.data(), 1, 4));
  }, "alpha0");
  const WhitneyData d = whitney(b, g, Mat::Identity(1, 1), 0, alpha, b.constant(Mat::Zero(1, 2), "nabla0"), opt);
  f.problem = {d, orthonormal_spec(b, d), ModelSpace::space_form(0.0, 3, 0)};
  f.frame = b.field(3, 3, [](const VecN& x) {
    Mat s = Mat::Identity(3, 3);
    s(1, 1) = 1.0 / std::sin(x(0));
    return s;
  }, "frame");
  f.exact_point = [](const VecN& x) {
    VecN p(3);
    p << std::sin(x(0)) * std::cos(x(1)), std::sin(x(0)) * std::sin(x(1)), std::cos(x(0));
    return p;
  };
  f.exact_state = frame_field_state(f.problem.model, f.exact_point, [](const VecN& x) {
    const double st = std::sin(x(0)), ct = std::cos(x(0)), sp = std::sin(x(1)), cp = std::cos(x(1));
    Mat h(3, 3);
    h.col(0) << ct * cp, ct * sp, -st;
    h.col(1) << -sp, cp, 0.0;
    h.col(2) << -st * cp, -st * sp, -ct;
    return h;
  });
  return f;
}

/// Clifford-type flat torus in the unit sphere of dimension 3 or 4.
Fixture clifford(const FixtureOptions& opt, int k) {
  const Box box{vec2(0, 0), vec2(kPi, kPi), {31, 31}};
  const Builder b(box, k);
  Fixture f;
  f.grid = make_grid(box, opt);
  const double r = 1.0 / std::sqrt(2.0);
  // only the normal inside the great 3-sphere bends
  Mat a = Mat::Zero(k, 4);
  a(0, 0) = -0.5;
  a(0, 3) = 0.5;
  const WhitneyData d = whitney(b, b.constant(0.5 * Mat::Identity(2, 2), "g"), Mat::Identity(k, k), 0,
                                b.constant(a, "alpha0"), b.constant(Mat::Zero(k, 2 * k), "nabla0"), opt);
  f.problem = {d, orthonormal_spec(b, d), ModelSpace::space_form(1.0, 2 + k, 0)};
  Mat s = Mat::Identity(2 + k, 2 + k);
  s(0, 0) = s(1, 1) = std::sqrt(2.0);
  f.frame = b.constant(s, "frame");
  const int m = 3 + k;
  f.exact_point = [=](const VecN& x) {
    VecN p = VecN::Zero(m);
    p.head(4) << r * std::cos(x(0)), r * std::sin(x(0)), r * std::cos(x(1)), r * std::sin(x(1));
    return p;
  };
  f.exact_state = [=](const VecN& x) {
    const double cu = std::cos(x(0)), su = std::sin(x(0)), cv = std::cos(x(1)), sv = std::sin(x(1));
    Mat q = Mat::Zero(m, m);
    q.col(0).head(4) << r * cu, r * su, r * cv, r * sv;
    q.col(1).head(4) << -su, cu, 0.0, 0.0;
    q.col(2).head(4) << 0.0, 0.0, -sv, cv;
    q.col(3).head(4) << r * cu, r * su, -r * cv, -r * sv;
    if (k == 2) q(4, 4) = 1.0;
    return flatten(q);
  };
  return f;
}

Fixture h2_slice(const FixtureOptions& opt) {
  const Box box{vec2(-1.0, 0.5), vec2(1.0, 2.0), {41, 41}};
  const Builder b(box, 1);
  Fixture f;
  f.description = "totally geodesic slice H2 x {0} in H2 x R, upper half-plane chart";
  f.grid = make_grid(box, opt);
  const MatrixField g = b.field(2, 2, [](const VecN& x) { return Mat(Mat::Identity(2, 2) / (x(1) * x(1))); },
                                "hyperbolic metric");
  const WhitneyData d = whitney(b, g, Mat::Identity(1, 1), 0, b.constant(Mat::Zero(1, 4), "alpha0"),
                                b.constant(Mat::Zero(1, 2), "nabla0"), opt);
  GStructureSpec h2;
  h2.kind = StructureKind::Orthonormal;
  h2.rank = 2;
  h2.form = g;
  GStructureSpec line;
  line.kind = StructureKind::Orthonormal;
  line.rank = 1;
  line.form = b.constant(Mat::Identity(1, 1), "line form");
  GStructureSpec spec;
  spec.kind = StructureKind::Product;
  spec.rank = 3;
  spec.split = b.constant(Mat::Identity(3, 3), "split");
  spec.children = {h2, line};
  f.problem = {d, spec,
               ModelSpace::product({ModelSpace::space_form(-1.0, 2, 0), ModelSpace::space_form(0.0, 1, 0)})};
  f.frame = b.field(3, 3, [](const VecN& x) {
    Mat s = Mat::Identity(3, 3);
    s(0, 0) = s(1, 1) = x(1);
    return s;
  }, "frame");
  auto hyperboloid = [](const VecN& x) {
    const double u = x(0), y = x(1), q = u * u + y * y;
    VecN p(3);
    p << (q + 1.0) / (2.0 * y), u / y, (q - 1.0) / (2.0 * y);
    return p;
  };
  f.exact_point = [=](const VecN& x) {
    VecN p = VecN::Zero(4);
    p.head(3) = hyperboloid(x);
    return p;
  };
  f.exact_state = [=](const VecN& x) {
    const double u = x(0), y = x(1);
    Mat q(3, 3);
    q.col(0) = hyperboloid(x);
    // y * d/du and y * d/dy of the hyperboloid point
    q.col(1) << u, 1.0, u;
    q.col(2) << (y * y - u * u - 1.0) / (2.0 * y), -u / y, (y * y - u * u + 1.0) / (2.0 * y);
    VecN s(9 + 2);
    s.head(9) = flatten(q);
    s(9) = 0.0;
    s(10) = 1.0;
    return s;
  };
  return f;
}

constexpr double kNilTau = 0.5;
constexpr double kNilRadius = 1.0;

/// Common Whitney data of the vertical cylinder of radius r in Nil3, with
/// chart (phi, t).
WhitneyData nil_cylinder_data(const Builder& b, const FixtureOptions& opt) {
  const double r = kNilRadius, t = kNilTau;
  Mat g(2, 2);
  g << r * r + t * t * r * r * r * r, -t * r * r, -t * r * r, 1.0;
  Mat a = Mat::Zero(1, 4);
  a(0, 0) = -r * (1.0 + 2.0 * t * t * r * r);
  a(0, 1) = a(0, 2) = t * r;
  return whitney(b, b.constant(g, "cylinder metric"), Mat::Identity(1, 1), 0, b.constant(a, "alpha0"),
                 b.constant(Mat::Zero(1, 2), "nabla0"), opt);
}

VecN nil_point(const VecN& x) {
  VecN p(3);
  p << kNilRadius * std::cos(x(0)), kNilRadius * std::sin(x(0)), x(1);
  return p;
}

/// Ambient images of the coordinate vectors and the unit normal.
Mat nil_ambient(const VecN& x) {
  const double r = kNilRadius, c = std::cos(x(0)), s = std::sin(x(0));
  Mat l(3, 3);
  l.col(0) << -r * s, r * c, 0.0;
  l.col(1) << 0.0, 0.0, 1.0;
  l.col(2) << c, s, 0.0;
  return l;
}

Fixture nil_cylinder(const FixtureOptions& opt) {
  const Box box{vec2(0.0, -1.0), vec2(kPi, 1.0), {41, 41}};
  const Builder b(box, 1);
  Fixture f;
  f.description = "vertical cylinder of radius 1 in Nil3 (tau = 1/2)";
  f.grid = make_grid(box, opt);
  const WhitneyData d = nil_cylinder_data(b, opt);
  GStructureSpec spec;
  spec.kind = StructureKind::OrientedUnitVector3D;
  spec.rank = 3;
  spec.form = b.field(3, 3, [d](const VecN& x) { return d.whitney_form(x); }, "whitney form");
  VecN xi = VecN::Zero(3);
  xi(1) = 1.0;
  spec.unit = b.constant(xi, "vertical field");
  spec.orientation = 1;
  f.problem = {d, spec, ModelSpace::e_kappa_tau(0.0, kNilTau)};
  const double r = kNilRadius;
  Mat s = Mat::Zero(3, 3);
  s.col(0) << 0.0, 1.0, 0.0;
  s.col(1) << 1.0 / r, kNilTau * r, 0.0;
  s.col(2) << 0.0, 0.0, -1.0;
  f.frame = b.constant(s, "frame");
  f.exact_point = nil_point;
  f.exact_state = frame_field_state(f.problem.model, nil_point, [s](const VecN& x) { return Mat(nil_ambient(x) * s); });
  return f;
}

Fixture nil_cylinder_lie(const FixtureOptions& opt) {
  const Box box{vec2(0.0, -1.0), vec2(kPi, 1.0), {41, 41}};
  const Builder b(box, 1);
  Fixture f;
  f.description = "vertical cylinder in Nil3 as the Heisenberg group with a left-invariant frame";
  f.grid = make_grid(box, opt);
  const WhitneyData d = nil_cylinder_data(b, opt);
  const double r = kNilRadius, t = kNilTau;
  // Left-invariant frame (E1, E2, E3) restricted to the cylinder.
  const MatrixField s = b.field(3, 3, [=](const VecN& x) {
    const double c = std::cos(x(0)), sn = std::sin(x(0));
    Mat m(3, 3);
    m.col(0) << -sn / r, -sn * t * r, c;
    m.col(1) << c / r, c * t * r, sn;
    m.col(2) << 0.0, 1.0, 0.0;
    return m;
  }, "frame");
  GStructureSpec spec;
  spec.kind = StructureKind::TrivialFrame;
  spec.rank = 3;
  spec.frame = s;
  f.problem = {d, spec, ModelSpace::lie_group(named_lie_algebra("heisenberg", t))};
  f.frame = s;
  auto group = [=](const VecN& x) {
    const VecN p = nil_point(x);
    Mat m = Mat::Identity(3, 3);
    m(0, 1) = p(0);
    m(1, 2) = p(1);
    m(0, 2) = (p(2) + t * p(0) * p(1)) / (2.0 * t);
    return m;
  };
  f.exact_point = [=](const VecN& x) { return flatten(group(x)); };
  f.exact_state = [=](const VecN& x) {
    VecN st(9 + 9);
    st.head(9) = flatten(group(x));
    st.tail(9) = flatten(Mat::Identity(3, 3));
    return st;
  };
  return f;
}

Fixture cp1_in_cp2(const FixtureOptions& opt) {
  const Box box{vec2(0.3, 0.0), vec2(kPi - 0.3, kPi), {21, 21}};
  const Builder b(box, 2, 0.25);
  Fixture f;
  f.description = "complex projective line in the complex projective plane (holomorphic curvature 1)";
  f.grid = make_grid(box, opt);
  const MatrixField g = b.field(2, 2, [](const VecN& x) {
    Mat m = Mat::Identity(2, 2);
    m(1, 1) = std::sin(x(0)) * std::sin(x(0));
    return m;
  }, "round metric");
  const Mat j0 = standard_complex_structure(2);
  const MatrixField nabla0 = b.field(2, 4, [j0](const VecN& x) {
    Mat m = Mat::Zero(2, 4);
    m.rightCols(2) = 0.5 * std::cos(x(0)) * j0;
    return m;
  }, "nabla0");
  const WhitneyData d = whitney(b, g, Mat::Identity(2, 2), 0, b.constant(Mat::Zero(2, 4), "alpha0"), nabla0, opt);
  GStructureSpec spec;
  spec.kind = StructureKind::Unitary;
  spec.rank = 4;
  spec.form = b.field(4, 4, [d](const VecN& x) { return d.whitney_form(x); }, "whitney form");
  spec.complex = b.field(4, 4, [j0](const VecN& x) {
    Mat jt(2, 2);
    jt << 0.0, -std::sin(x(0)), 1.0 / std::sin(x(0)), 0.0;
    return block_diag(jt, j0);
  }, "complex structure");
  f.problem = {d, spec, ModelSpace::complex_space_form(1.0, 4, 0)};
  f.frame = b.field(4, 4, [](const VecN& x) {
    Mat s = Mat::Zero(4, 4);
    s(0, 0) = 1.0;
    s(2, 1) = 1.0;
    s(1, 2) = 1.0 / std::sin(x(0));
    s(3, 3) = 1.0;
    return s;
  }, "frame");
  f.fd_limited = true;
  return f;
}

}  // namespace

const std::vector<std::string>& fixture_names() {
  static const std::vector<std::string> names{"flat_plane_in_r3", "sphere_in_r3",   "clifford_torus_in_s3",
                                              "flat_torus_in_s4", "h2_in_h2xr",     "cylinder_in_nil3",
                                              "cylinder_in_nil3_lie", "cp1_in_cp2"};
  return names;
}

Fixture make_fixture(const std::string& name, const FixtureOptions& options) {
  Fixture f;
  if (name == "flat_plane_in_r3") f = flat_plane(options);
  else if (name == "sphere_in_r3") f = sphere(options);
  else if (name == "clifford_torus_in_s3") {
    f = clifford(options, 1);
    f.description = "Clifford torus in the unit 3-sphere";
  } else if (name == "flat_torus_in_s4") {
    f = clifford(options, 2);
    f.description = "flat torus in a totally geodesic 3-sphere of the unit 4-sphere";
  } else if (name == "h2_in_h2xr") f = h2_slice(options);
  else if (name == "cylinder_in_nil3") f = nil_cylinder(options);
  else if (name == "cylinder_in_nil3_lie") f = nil_cylinder_lie(options);
  else if (name == "cp1_in_cp2") f = cp1_in_cp2(options);
  else throw Error(ErrorKind::ConfigError, "unknown fixture '" + name + "'");
  f.name = name;
  return f;
}

}  // namespace gstim
