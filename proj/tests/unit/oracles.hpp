#pragma once

// Independent reference implementations used as test oracles. They avoid
// the library's own helpers on purpose.

#include <Eigen/Dense>
#include <cmath>
#include <random>
#include <utility>
#include <vector>

namespace oracle {

/// Inverse by Gauss-Jordan elimination with partial pivoting.
inline Eigen::MatrixXd gauss_jordan_inverse(Eigen::MatrixXd a) {
  const int n = static_cast<int>(a.rows());
  Eigen::MatrixXd inv = Eigen::MatrixXd::Identity(n, n);
  for (int c = 0; c < n; ++c) {
    int piv = c;
    for (int r = c + 1; r < n; ++r)
      if (std::abs(a(r, c)) > std::abs(a(piv, c))) piv = r;
    a.row(c).swap(a.row(piv));
    inv.row(c).swap(inv.row(piv));
    const double d = a(c, c);
    a.row(c) /= d;
    inv.row(c) /= d;
    for (int r = 0; r < n; ++r)
      if (r != c) {
        const double f = a(r, c);
        a.row(r) -= f * a.row(c);
        inv.row(r) -= f * inv.row(c);
      }
  }
  return inv;
}

inline Eigen::MatrixXd random_matrix(std::mt19937_64& rng, int r, int c) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Eigen::MatrixXd m(r, c);
  for (int i = 0; i < r; ++i)
    for (int j = 0; j < c; ++j) m(i, j) = u(rng);
  return m;
}

inline Eigen::VectorXd random_vector(std::mt19937_64& rng, int n) { return random_matrix(rng, n, 1).col(0); }

/// Christoffel symbols of the second kind from a metric evaluator, by
/// second-order central differences of the metric; gamma[k](i, j) = Gamma^k_ij.
template <class Metric>
std::vector<Eigen::MatrixXd> christoffel_symbols(const Metric& g, const Eigen::VectorXd& x, double h = 1e-5) {
  const int n = static_cast<int>(x.size());
  std::vector<Eigen::MatrixXd> dg(n);
  for (int a = 0; a < n; ++a) {
    Eigen::VectorXd p = x, m = x;
    p(a) += h;
    m(a) -= h;
    dg[a] = (g(p) - g(m)) / (2 * h);
  }
  const Eigen::MatrixXd gi = g(x).inverse();
  std::vector<Eigen::MatrixXd> out(n, Eigen::MatrixXd::Zero(n, n));
  for (int k = 0; k < n; ++k)
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        double s = 0.0;
        for (int l = 0; l < n; ++l) s += gi(k, l) * (dg[i](l, j) + dg[j](l, i) - dg[l](i, j));
        out[k](i, j) = 0.5 * s;
      }
  return out;
}

}  // namespace oracle
