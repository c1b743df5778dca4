#pragma once

#include "clairaut/expression.hpp"
#include "clairaut/submersion.hpp"

#include <random>

namespace clairaut {

struct ScenarioFlags {
  std::optional<bool> conformal;
  std::optional<bool> clairaut;
  std::optional<bool> umbilical;
  std::optional<bool> harmonic;
  std::optional<double> einstein_lambda_f;
};

/// Symbolic description of a submersion scenario; everything the file
/// format can express, kept around for exact serialization.
struct ScenarioDefinition {
  std::string name;
  int m = 0;  // total dimension
  int n = 0;  // base dimension
  std::vector<std::vector<expr::Expr>> g_total;    // m x m
  std::vector<std::vector<expr::Expr>> g_base;     // n x n
  std::vector<expr::Expr> map_components;          // n entries over x1..xm
  std::vector<std::vector<expr::Expr>> vertical;   // m-n frame fields, m comps each
  std::vector<std::vector<expr::Expr>> horizontal; // n frame fields, m comps each
  expr::Expr lambda;                               // optional analytic dilation
  expr::Expr f;                                    // optional Clairaut potential
  ScenarioFlags flags;
  std::vector<std::pair<double, double>> box;      // m coordinate ranges
};

/// A realized scenario: the symbolic definition plus executable geometry
/// with exact derivatives wired through the expression engine.
struct SubmersionScenario {
  ScenarioDefinition def;
  SmoothSubmersionMap map;
  std::optional<DilationField> dilation;
  std::optional<ScalarField> clairaut_f;

  const std::string& name() const { return def.name; }
  const ChartManifold& total() const { return map.total; }
  const ChartManifold& base() const { return map.base; }
};

/// Builds evaluators and analytic partials from the symbolic definition.
/// Does not validate; see validate_scenario.
SubmersionScenario realize(const ScenarioDefinition& def);

/// Checks every structural invariant (metric symmetry and positivity,
/// jacobian rank, frame orthogonality, kernel annihilation, dilation
/// positivity, flag consistency) at 16 deterministic low-discrepancy
/// points seeded by the scenario name hash. Throws ValidationError naming
/// the violated invariant and the witness point.
void validate_scenario(const SubmersionScenario& scenario);

/// Deterministic low-discrepancy points in the sample box (Halton
/// sequence offset by the FNV-1a hash of the scenario name).
std::vector<Vec> validation_points(const ScenarioDefinition& def, int count = 16);

/// Uniform points in the sample box from the given generator.
std::vector<Vec> sample_points(const SubmersionScenario& scenario, int count,
                               std::mt19937_64& rng);

double uniform_double(std::mt19937_64& rng);  // [0,1) with 53 bits

// --- builders -------------------------------------------------------------

SubmersionScenario build_example2();

/// Doubly warped product M1 x_{lam,f1} M2 with metric
/// lam(y)^2 g1 + f1(x)^2 g2 and the first projection as the submersion.
/// Factor data use each factor's own chart variables.
struct DoublyWarpedSpec {
  std::string name;
  int m1 = 0, m2 = 0;
  std::vector<std::vector<expr::Expr>> g1, g2;
  expr::Expr f1;
  expr::Expr lam;
  std::vector<std::pair<double, double>> box;  // total-chart ranges, m1+m2 entries
  std::optional<double> einstein_lambda_f;
  std::optional<bool> harmonic;
};

SubmersionScenario build_doubly_warped(const DoublyWarpedSpec& spec);

/// Surface of revolution with profile r(t): metric dt^2 + r(t)^2 dphi^2,
/// projection onto the t axis, dilation 1 and potential log r.
SubmersionScenario build_surface_of_revolution(const expr::Expr& profile,
                                               std::pair<double, double> t_range,
                                               std::pair<double, double> phi_range,
                                               const std::string& name = "surface_of_revolution");

// --- registry ---------------------------------------------------------------

std::vector<std::string> registry_names();
SubmersionScenario make_scenario(const std::string& name);

// --- file format ------------------------------------------------------------

SubmersionScenario parse_scenario_text(const std::string& text, const std::string& origin);
SubmersionScenario load_scenario(const std::string& path);
std::string serialize_scenario(const ScenarioDefinition& def);

}  // namespace clairaut
