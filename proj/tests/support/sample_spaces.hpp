#pragma once

// Non-standard instances of every G-structure variant, obtained by pushing
// the standard model forward along a random invertible map.

#include <random>
#include <string>
#include <utility>
#include <vector>

#include "gstim/g_structure.hpp"

namespace samples {

using gstim::StructuredSpace;
using Mat = Eigen::MatrixXd;

inline Mat near_identity(std::mt19937_64& rng, int n, double spread = 0.4) {
  std::uniform_real_distribution<double> u(-spread, spread);
  Mat q = Mat::Identity(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) q(i, j) += u(rng);
  return q;
}

inline Mat minkowski(int n, int neg) {
  Mat m = Mat::Identity(n, n);
  for (int i = n - neg; i < n; ++i) m(i, i) = -1.0;
  return m;
}

/// Standard models of the eight primitive variants and one product.
inline std::vector<std::pair<std::string, StructuredSpace>> standard_spaces() {
  std::vector<std::pair<std::string, StructuredSpace>> out;
  out.emplace_back("trivial_frame", StructuredSpace::trivial_frame(Mat::Identity(3, 3)));
  out.emplace_back("orthonormal", StructuredSpace::orthonormal(minkowski(4, 1), 1));
  out.emplace_back("subbundle", StructuredSpace::subbundle(4, Mat::Identity(4, 2)));
  out.emplace_back("adapted_orthonormal",
                   StructuredSpace::adapted_orthonormal(minkowski(4, 1), 1, Mat::Identity(4, 2), 0));
  out.emplace_back("unit_section", StructuredSpace::unit_section(Eigen::VectorXd::Unit(3, 0)));
  out.emplace_back("metric_unit_section",
                   StructuredSpace::metric_unit_section(Mat::Identity(3, 3), 0, Eigen::VectorXd::Unit(3, 0)));
  out.emplace_back("almost_complex", StructuredSpace::almost_complex(gstim::standard_complex_structure(4)));
  out.emplace_back("unitary", StructuredSpace::unitary(gstim::standard_hermitian_form(4, 2), 2,
                                                       gstim::standard_complex_structure(4)));
  out.emplace_back("oriented_unit_vector_3d",
                   StructuredSpace::oriented_unit_vector(Mat::Identity(3, 3), Eigen::VectorXd::Unit(3, 0), 1));
  out.emplace_back("product",
                   StructuredSpace::product(Mat::Identity(3, 3),
                                            {StructuredSpace::orthonormal(Mat::Identity(2, 2), 0),
                                             StructuredSpace::unit_section(Eigen::VectorXd::Unit(1, 0))}));
  return out;
}

/// The same list pushed forward along random maps.
inline std::vector<std::pair<std::string, StructuredSpace>> skewed_spaces(std::mt19937_64& rng) {
  auto out = standard_spaces();
  for (auto& [name, z] : out) z = gstim::push_forward(z, near_identity(rng, z.dim));
  return out;
}

}  // namespace samples
