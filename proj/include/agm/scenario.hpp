#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "agm/audit.hpp"
#include "agm/paths.hpp"

namespace agm {

struct PathSpec {
  Point x0;
  Eigen::VectorXd l0;
  double t_end = 1.0;
  int steps = 512;
  double defect_tol = 1e-6;
};

struct ExplicitInstanceSpec {
  int e = 0;
  std::vector<std::string> psi, sigma, mu, nu;       // expression strings
  std::vector<std::vector<std::string>> F;           // n x n expression strings
};

struct ToleranceSpec {
  double algebraic = 1e-10;
  double derivative = 1e-8;
  double algebraic_fd = 1e-6;
  double derivative_fd = 1e-4;
};

struct ReadingSpec {
  std::optional<int> a12, nu_hat, a18, a19;
};

/// Parsed scenario file. Exactly one of `connection`+`instance` or
/// `generator` is present; expression strings are validated against n at
/// load time.
struct Scenario {
  int n = 2;
  int theta = 1;
  std::optional<std::map<std::string, std::string>> connection;  // "i,j,k" (1-based) -> expr
  std::optional<ExplicitInstanceSpec> instance;
  std::optional<GeneratorParams> generator;
  int grid_count = 50;
  std::uint64_t grid_seed = 1;
  Eigen::MatrixX2d grid_bounds;
  double fd_step = 1e-4;
  ToleranceSpec tolerances;
  CurvatureMode curvature = CurvatureMode::Paper;
  ReadingSpec readings;
  std::optional<PathSpec> path;
  std::string digest;  // fnv1a-64 of the raw file bytes
};

struct ScenarioError : std::runtime_error {
  ScenarioError(const std::string& what, std::vector<std::string> errs)
      : std::runtime_error(what), errors(std::move(errs)) {}
  std::vector<std::string> errors;  // every violation, not just the first
};

Scenario load_scenario(const std::filesystem::path& file);
Scenario parse_scenario(const std::string& json_text, const std::string& digest);

struct RealizedScenario {
  ConnectionField L;
  MappingInstance inst;
  Grid grid;
};

/// Builds the connection, instance and grid. Generator scenarios synthesize
/// and validate the instance here.
RealizedScenario realize(const Scenario& s);

/// Audit options implied by the scenario plus a mode selection.
AuditOptions audit_options(const Scenario& s, DerivMode mode, CurvatureMode curvature);

std::string fnv1a_hex(const std::string& bytes);

}  // namespace agm
