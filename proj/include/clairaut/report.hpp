#pragma once

#include "clairaut/clairaut_lab.hpp"
#include "clairaut/scenario.hpp"

#include <json.hpp>

#include <cstdint>

namespace clairaut {

using Json = nlohmann::ordered_json;

struct RunConfig {
  std::string scenario;  // registry name
  std::string file;      // or a scenario file path (takes precedence)
  int points = 20;
  int geodesics = 10;
  double step = 1e-3;
  double t_end = 1.0;
  std::uint64_t seed = 42;
  std::string out;
  std::string format = "text";  // text | json | csv
};

SubmersionScenario resolve_scenario(const RunConfig& config);

/// Seeded sample points and unit-speed non-horizontal geodesic starts.
std::vector<Vec> seeded_points(const SubmersionScenario& scn, int count, std::uint64_t seed);
std::vector<GeodesicState> seeded_geodesic_starts(const SubmersionScenario& scn, int count,
                                                  std::uint64_t seed, double min_sin_omega = 0.1);

// Individual checks; each returns the shared schema
// {check, scenario, points, residual_max, residual_mean, tolerance, pass, ...}.
Json conformal_check(const SubmersionScenario& scn, const std::vector<Vec>& pts);
Json umbilical_check(const SubmersionScenario& scn, const std::vector<Vec>& pts);
Json clairaut_condition_check(const SubmersionScenario& scn, const std::vector<Vec>& pts);
Json invariant_drift_check(const SubmersionScenario& scn, const RunConfig& config);
Json tension_check(const SubmersionScenario& scn, const std::vector<Vec>& pts);
Json a_formula_check(const SubmersionScenario& scn, const std::vector<Vec>& pts);
Json second_fundamental_check(const SubmersionScenario& scn, const std::vector<Vec>& pts);
Json mean_curvature_check(const SubmersionScenario& scn, const std::vector<Vec>& pts);
Json vertical_curvature_check(const SubmersionScenario& scn, const std::vector<Vec>& pts);
Json ricci_check(const SubmersionScenario& scn, const std::vector<Vec>& pts);

/// The `check` subcommand: conformal, umbilical, Clairaut condition,
/// invariant drift, tension.
Json run_check(const SubmersionScenario& scn, const RunConfig& config);

/// The `curvature` subcommand: the vertical curvature identity and, when the scenario
/// declares an Einstein constant, the Ricci identity.
Json run_curvature(const SubmersionScenario& scn, const RunConfig& config);

/// The `report` subcommand: every check.
Json run_report(const SubmersionScenario& scn, const RunConfig& config);

/// 0 when every declared expectation matches the observed verdict, else 1.
int expectation_exit_code(const SubmersionScenario& scn, const Json& report);

std::string render_text(const Json& report);

}  // namespace clairaut
