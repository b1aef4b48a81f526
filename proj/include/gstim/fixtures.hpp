#pragma once

#include "gstim/compatibility.hpp"

#include <functional>
#include <string>
#include <vector>

namespace gstim {

/// Deformations applied to a fixture's second fundamental form or normal
/// connection. The Weingarten form is always recomputed from alpha0, so the
/// metric-compatibility pieces stay exact and only the curvature equations
/// see the perturbation.
struct FixtureOptions {
  std::vector<int> samples;    // grid size, empty for the fixture default
  double alpha_scale = 1.0;    // alpha0 -> alpha_scale * alpha0
  double alpha_bump = 0.0;     // adds a Gaussian bump to alpha0(d_0, d_0) along e_0
  double alpha_antisym = 0.0;  // adds +-delta e_0 to alpha0(d_0, d_1), alpha0(d_1, d_0)
  double normal_twist = 0.0;   // adds delta sin(x_1) J to the normal connection along d_0 (k >= 2)

  bool perturbed() const {
    return alpha_scale != 1.0 || alpha_bump != 0.0 || alpha_antisym != 0.0 || normal_twist != 0.0;
  }
};

struct Fixture {
  std::string name;
  std::string description;
  ChartGrid grid;
  ImmersionProblem problem;
  MatrixField frame;  // a section of the G-structure on the Whitney sum
  /// Closed-form immersion in the coordinates of the realization's points,
  /// when known. exact_state gives F(x) = L_x s(x) in the realization's
  /// state layout.
  std::function<VecN(const VecN&)> exact_point;
  std::function<VecN(const VecN&)> exact_state;
  /// Residual families are limited by nested finite differences rather
  /// than by rounding.
  bool fd_limited = false;
};

const std::vector<std::string>& fixture_names();
Fixture make_fixture(const std::string& name, const FixtureOptions& options = {});

}  // namespace gstim
