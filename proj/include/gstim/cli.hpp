#pragma once

#include "gstim/fixtures.hpp"
#include "gstim/immersion_solver.hpp"

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

namespace gstim {

/// One run, read from a single JSON document. Closed-form fields come from
/// the fixture registry; grid-sampled field files may replace some of them.
struct RunConfig {
  std::string fixture;
  FixtureOptions options;
  std::optional<nlohmann::json> model;      // overrides the fixture's target model
  std::optional<std::string> structure;     // expected G-structure variant
  std::string alpha0_file, normal_connection_file, frame_file;
  std::vector<int> origin;
  std::string sigma0 = "canonical";         // canonical | exact | matrix
  std::optional<Eigen::MatrixXd> sigma0_matrix;
  double check_tol = 1e-6;
  double gate_tol = 1e-6;
  double verify_tol = 1e-2;
  double structure_tol = 1e-7;
  SamplingPlan sampling;
  int refine = 2;
  bool force = false;
  std::string out_dir = "gstim_out";
};

/// Throws ConfigError on unknown keys, wrong types or missing fields.
RunConfig parse_config(const nlohmann::json& doc);
RunConfig load_config(const std::string& path);

/// Model from its JSON description, e.g. {"family": "spaceform", "c": 1, "dim": 3}.
ModelSpace model_from_json(const nlohmann::json& j);

/// Fixture with configured perturbations, field files and model override applied.
Fixture build_fixture(const RunConfig& config);

// Subcommands return the process exit code: 0 success, 1 mathematical
// failure (residual gate, verification), 2 configuration error.
int cmd_check(const RunConfig& config, std::ostream& out, std::ostream& err);
int cmd_solve(const RunConfig& config, std::ostream& out, std::ostream& err);
int cmd_export(const RunConfig& config, std::ostream& out, std::ostream& err);
int cmd_catalog(const std::string& model, bool json, std::ostream& out, std::ostream& err);

/// Full command line: subcommand, config path and the override flags.
int run_cli(int argc, char** argv, std::ostream& out, std::ostream& err);

}  // namespace gstim
