#include "clairaut/report.hpp"

#include <cmath>
#include <sstream>

namespace clairaut {

namespace {

Json base_report(const char* check, const SubmersionScenario& scn, const std::vector<Vec>& pts) {
  Json j;
  j["check"] = check;
  j["scenario"] = scn.name();
  Json points = Json::array();
  for (const Vec& p : pts) {
    Json q = Json::array();
    for (int i = 0; i < p.size(); ++i) q.push_back(p[i]);
    points.push_back(q);
  }
  j["points"] = points;
  return j;
}

void fill_residuals(Json& j, const std::vector<double>& residuals, double tolerance) {
  double mx = 0.0, sum = 0.0;
  for (double r : residuals) {
    mx = std::max(mx, r);
    sum += r;
  }
  j["residual_max"] = mx;
  j["residual_mean"] = residuals.empty() ? 0.0 : sum / static_cast<double>(residuals.size());
  j["tolerance"] = tolerance;
  j["pass"] = mx <= tolerance;
}

DilationField scenario_dilation(const SubmersionScenario& scn) {
  return scn.dilation ? *scn.dilation : estimate_dilation(scn.map);
}

}  // namespace

SubmersionScenario resolve_scenario(const RunConfig& config) {
  if (!config.file.empty()) return load_scenario(config.file);
  if (config.scenario.empty()) throw ArgumentError("no scenario selected");
  return make_scenario(config.scenario);
}

std::vector<Vec> seeded_points(const SubmersionScenario& scn, int count, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  return sample_points(scn, count, rng);
}

std::vector<GeodesicState> seeded_geodesic_starts(const SubmersionScenario& scn, int count,
                                                  std::uint64_t seed, double min_sin_omega) {
  std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ull);
  std::vector<GeodesicState> starts;
  const int m = scn.def.m;
  int guard = 0;
  while (static_cast<int>(starts.size()) < count) {
    if (++guard > 1000 * count)
      throw NumericError("could not find non-horizontal unit-speed starts in the sample box");
    Vec p(m), v(m);
    for (int i = 0; i < m; ++i) {
      auto [lo, hi] = scn.def.box[i];
      p[i] = lo + (hi - lo) * uniform_double(rng);
    }
    for (int i = 0; i < m; ++i) v[i] = 2.0 * uniform_double(rng) - 1.0;
    Mat g = metric_at(scn.total(), p);
    double speed2 = v.dot(g * v);
    if (speed2 < 1e-8) continue;
    v /= std::sqrt(speed2);
    GeodesicState s{0.0, p, v};
    if (std::sin(angle_omega(scn.map, s)) < min_sin_omega) continue;
    starts.push_back(s);
  }
  return starts;
}

Json conformal_check(const SubmersionScenario& scn, const std::vector<Vec>& pts) {
  Json j = base_report("conformal", scn, pts);
  ConformalityReport rep = check_conformal(scn.map, pts,
                                           scn.dilation ? std::optional<DilationField>(*scn.dilation)
                                                        : std::nullopt);
  j["residual_max"] = rep.residual_max;
  j["residual_mean"] = rep.residual_mean;
  j["tolerance"] = rep.tolerance;
  j["pass"] = rep.conformal;
  if (scn.dilation) {
    // compare the pointwise estimate against the declared dilation
    DilationField est = estimate_dilation(scn.map);
    double err = 0.0;
    for (const Vec& p : pts)
      err = std::max(err, std::abs(est.lambda.eval(p) - scn.dilation->lambda.eval(p)));
    j["dilation_error"] = err;
  }
  return j;
}

Json umbilical_check(const SubmersionScenario& scn, const std::vector<Vec>& pts) {
  Json j = base_report("umbilical", scn, pts);
  std::vector<double> residuals;
  for (const Vec& p : pts) residuals.push_back(umbilical_residual(scn.map, p));
  fill_residuals(j, residuals, 1e-6);
  return j;
}

Json clairaut_condition_check(const SubmersionScenario& scn, const std::vector<Vec>& pts) {
  Json j = base_report("clairaut_condition", scn, pts);
  if (!scn.clairaut_f) {
    j["note"] = "no potential f declared; check skipped";
    j["pass"] = nullptr;
    return j;
  }
  DilationField dil = scenario_dilation(scn);
  std::vector<double> residuals;
  for (const Vec& p : pts)
    residuals.push_back(clairaut_condition_residual(scn.map, dil, *scn.clairaut_f, p));
  fill_residuals(j, residuals, 1e-6);
  return j;
}

Json invariant_drift_check(const SubmersionScenario& scn, const RunConfig& config) {
  Json j;
  j["check"] = "invariant_drift";
  j["scenario"] = scn.name();
  if (!scn.clairaut_f) {
    j["note"] = "no potential f declared; check skipped";
    j["pass"] = nullptr;
    return j;
  }
  auto starts = seeded_geodesic_starts(scn, config.geodesics, config.seed);
  std::vector<double> drifts;
  Json per = Json::array();
  for (const auto& s0 : starts) {
    GeodesicTrace trace = integrate(scn.total(), s0, config.t_end, config.step);
    InvariantTrace inv = clairaut_invariant_trace(scn.map, *scn.clairaut_f, trace);
    drifts.push_back(inv.drift);
    per.push_back(inv.drift);
  }
  j["points"] = per;  // per-geodesic drifts
  fill_residuals(j, drifts, 1e-5);
  j["geodesics"] = config.geodesics;
  j["step"] = config.step;
  j["t_end"] = config.t_end;
  return j;
}

Json tension_check(const SubmersionScenario& scn, const std::vector<Vec>& pts) {
  Json j = base_report("tension", scn, pts);
  DilationField dil = scenario_dilation(scn);
  std::vector<double> residuals;
  for (const Vec& p : pts) residuals.push_back(tension_field(scn.map, dil, p).residual);
  fill_residuals(j, residuals, 1e-5);

  if (scn.clairaut_f) {
    try {
      HarmonicityResult h = harmonicity_check(scn.map, dil, *scn.clairaut_f, pts);
      j["harmonic"] = h.harmonic;
      j["harmonic_verdicts_agree"] = h.verdicts_agree;
      j["tension_max"] = h.tension_max;
    } catch (const PreconditionError& e) {
      j["harmonic"] = nullptr;
      j["harmonic_note"] = e.what();
    }
  }
  return j;
}

Json a_formula_check(const SubmersionScenario& scn, const std::vector<Vec>& pts) {
  Json j = base_report("a_formula", scn, pts);
  DilationField dil = scenario_dilation(scn);
  std::vector<double> residuals;
  for (const Vec& p : pts) {
    double r = 0.0;
    for (const auto& x : scn.map.horizontal_frame)
      for (const auto& y : scn.map.horizontal_frame)
        r = std::max(r, a_formula_residual(scn.map, dil, x, y, p));
    residuals.push_back(r);
  }
  fill_residuals(j, residuals, 1e-5);
  return j;
}

Json second_fundamental_check(const SubmersionScenario& scn, const std::vector<Vec>& pts) {
  Json j = base_report("second_fundamental_form", scn, pts);
  DilationField dil = scenario_dilation(scn);
  std::vector<double> residuals;
  for (const Vec& p : pts) {
    double r = 0.0;
    for (const auto& x : scn.map.horizontal_frame)
      for (const auto& y : scn.map.horizontal_frame)
        r = std::max(r, second_fundamental_form(scn.map, dil, x, y, p).residual);
    residuals.push_back(r);
  }
  fill_residuals(j, residuals, 1e-5);
  return j;
}

Json mean_curvature_check(const SubmersionScenario& scn, const std::vector<Vec>& pts) {
  Json j = base_report("mean_curvature_formula", scn, pts);
  if (!scn.clairaut_f) {
    j["note"] = "no potential f declared; check skipped";
    j["pass"] = nullptr;
    return j;
  }
  DilationField dil = scenario_dilation(scn);
  std::vector<double> residuals;
  double div_res = 0.0;
  for (const Vec& p : pts) {
    MeanCurvatureCheck c = mean_curvature_formula_check(scn.map, dil, *scn.clairaut_f, p);
    residuals.push_back(c.h_residual);
    div_res = std::max(div_res, c.div_residual);
  }
  fill_residuals(j, residuals, 1e-6);
  j["divergence_residual_max"] = div_res;
  return j;
}

Json vertical_curvature_check(const SubmersionScenario& scn, const std::vector<Vec>& pts) {
  Json j = base_report("vertical_curvature_identity", scn, pts);
  if (!scn.clairaut_f) {
    j["note"] = "no potential f declared; check skipped";
    j["pass"] = nullptr;
    return j;
  }
  if (scn.def.m - scn.def.n < 2) {
    j["note"] = "identity is trivial for fibers of dimension < 2";
    j["pass"] = true;
    j["residual_max"] = 0.0;
    j["residual_mean"] = 0.0;
    j["tolerance"] = 1e-3;
    return j;
  }
  DilationField dil = scenario_dilation(scn);
  std::vector<double> residuals;
  Json terms = Json::array();
  for (const Vec& p : pts) {
    CurvatureIdentityReport rep = vertical_curvature_identity_residual(scn.map, dil, *scn.clairaut_f, p);
    residuals.push_back(rep.residual);
    Json t;
    for (const auto& [k, v] : rep.terms) t[k] = v;
    terms.push_back(t);
  }
  fill_residuals(j, residuals, 1e-3);
  j["terms"] = terms;
  j["note"] = "trailing free horizontal index summed over l = 1..n";
  return j;
}

Json ricci_check(const SubmersionScenario& scn, const std::vector<Vec>& pts) {
  Json j = base_report("ricci_identity", scn, pts);
  if (!scn.clairaut_f) {
    j["note"] = "no potential f declared; check skipped";
    j["pass"] = nullptr;
    return j;
  }
  if (scn.def.m - scn.def.n < 2) {
    j["note"] = "Ricci identity is trivial for fibers of dimension < 2";
    j["pass"] = true;
    j["residual_max"] = 0.0;
    j["residual_mean"] = 0.0;
    j["tolerance"] = 1e-3;
    return j;
  }
  DilationField dil = scenario_dilation(scn);
  std::vector<double> residuals;
  for (const Vec& p : pts) {
    double r = 0.0;
    for (int i = 0; i < scn.def.m - scn.def.n; ++i) {
      CurvatureIdentityReport rep = ricci_identity_residual(scn.map, dil, *scn.clairaut_f, p, i,
                                                            scn.def.flags.einstein_lambda_f);
      r = std::max(r, rep.residual);
    }
    residuals.push_back(r);
  }
  fill_residuals(j, residuals, 1e-3);
  return j;
}

namespace {

Json wrap(const SubmersionScenario& scn, const RunConfig& config, Json checks) {
  Json j;
  j["schema"] = 1;
  j["scenario"] = scn.name();
  j["seed"] = config.seed;
  j["points"] = config.points;
  j["checks"] = std::move(checks);
  return j;
}

}  // namespace

Json run_check(const SubmersionScenario& scn, const RunConfig& config) {
  auto pts = seeded_points(scn, config.points, config.seed);
  Json checks = Json::array();
  checks.push_back(conformal_check(scn, pts));
  checks.push_back(umbilical_check(scn, pts));
  checks.push_back(clairaut_condition_check(scn, pts));
  checks.push_back(invariant_drift_check(scn, config));
  checks.push_back(tension_check(scn, pts));
  return wrap(scn, config, std::move(checks));
}

Json run_curvature(const SubmersionScenario& scn, const RunConfig& config) {
  auto pts = seeded_points(scn, config.points, config.seed);
  Json checks = Json::array();
  checks.push_back(vertical_curvature_check(scn, pts));
  if (scn.def.flags.einstein_lambda_f) checks.push_back(ricci_check(scn, pts));
  return wrap(scn, config, std::move(checks));
}

Json run_report(const SubmersionScenario& scn, const RunConfig& config) {
  auto pts = seeded_points(scn, config.points, config.seed);
  Json checks = Json::array();
  checks.push_back(conformal_check(scn, pts));
  checks.push_back(umbilical_check(scn, pts));
  checks.push_back(clairaut_condition_check(scn, pts));
  checks.push_back(invariant_drift_check(scn, config));
  checks.push_back(tension_check(scn, pts));
  checks.push_back(a_formula_check(scn, pts));
  checks.push_back(second_fundamental_check(scn, pts));
  checks.push_back(mean_curvature_check(scn, pts));
  checks.push_back(vertical_curvature_check(scn, pts));
  if (scn.def.flags.einstein_lambda_f) checks.push_back(ricci_check(scn, pts));
  return wrap(scn, config, std::move(checks));
}

int expectation_exit_code(const SubmersionScenario& scn, const Json& report) {
  // expected flags match observed verdicts; checks without a declared
  // expectation (and the drift diagnostic) are informational
  // a check that is absent from this report, or reported n/a, is not
  // comparable and does not fail the expectation gate
  auto observed = [&](const std::string& name) -> std::optional<bool> {
    for (const auto& c : report.at("checks")) {
      if (c.at("check") != name) continue;
      if (name == "tension") {
        if (c.contains("harmonic") && c.at("harmonic").is_boolean())
          return c.at("harmonic").get<bool>();
        return std::nullopt;
      }
      if (c.contains("pass") && c.at("pass").is_boolean()) return c.at("pass").get<bool>();
    }
    return std::nullopt;
  };
  const auto& flags = scn.def.flags;
  struct Pair {
    std::optional<bool> expected, got;
  };
  std::vector<Pair> pairs = {{flags.conformal, observed("conformal")},
                             {flags.umbilical, observed("umbilical")},
                             {flags.clairaut, observed("clairaut_condition")},
                             {flags.harmonic, observed("tension")}};
  for (const auto& [expected, got] : pairs) {
    if (!expected || !got) continue;
    if (*expected != *got) return 1;
  }
  return 0;
}

std::string render_text(const Json& report) {
  std::ostringstream out;
  out << "scenario " << report.at("scenario").get<std::string>() << " (seed "
      << report.at("seed") << ")\n";
  for (const auto& c : report.at("checks")) {
    out << "  " << c.at("check").get<std::string>() << ": ";
    if (c.contains("pass") && c.at("pass").is_boolean())
      out << (c.at("pass").get<bool>() ? "pass" : "FAIL");
    else
      out << "n/a";
    if (c.contains("residual_max"))
      out << "  residual_max=" << c.at("residual_max").dump()
          << " tol=" << c.at("tolerance").dump();
    if (c.contains("harmonic")) {
      out << "  harmonic=";
      if (c.at("harmonic").is_boolean())
        out << (c.at("harmonic").get<bool>() ? "true" : "false");
      else
        out << "n/a";
    }
    if (c.contains("note")) out << "  (" << c.at("note").get<std::string>() << ")";
    out << "\n";
  }
  return out.str();
}

}  // namespace clairaut
