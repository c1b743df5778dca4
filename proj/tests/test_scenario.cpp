#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "clairaut/clairaut_lab.hpp"
#include "clairaut/scenario.hpp"

#include <cmath>
#include <fstream>

using namespace clairaut;

namespace {

Vec v2(double a, double b) {
  Vec v(2);
  v << a, b;
  return v;
}

std::string scenario_path(const std::string& name) {
  return std::string(SCENARIO_DIR) + "/" + name + ".scenario";
}

// residual fingerprint used to compare two realizations of one scenario
std::vector<double> fingerprint(const SubmersionScenario& scn) {
  std::vector<double> out;
  DilationField dil = scn.dilation ? *scn.dilation : estimate_dilation(scn.map);
  for (const Vec& p : validation_points(scn.def, 6)) {
    ConformalityReport rep = check_conformal(scn.map, {p});
    out.push_back(rep.residual_max);
    out.push_back(rep.lambdas.front());
    out.push_back(umbilical_residual(scn.map, p));
    if (scn.clairaut_f)
      out.push_back(clairaut_condition_residual(scn.map, dil, *scn.clairaut_f, p));
    out.push_back(tension_field(scn.map, dil, p).residual);
  }
  return out;
}

}  // namespace

TEST_CASE("registry contains the required scenarios") {
  auto names = registry_names();
  for (const char* required : {"euclidean_product", "example2", "doubly_warped_default",
                               "surface_of_revolution_default", "perturbed_nonclairaut"})
    CHECK(std::find(names.begin(), names.end(), required) != names.end());
  CHECK(std::is_sorted(names.begin(), names.end()));
  for (const auto& name : names) CHECK(make_scenario(name).name() == name);
  CHECK_THROWS_AS(make_scenario("missing_name"), ArgumentError);
}

TEST_CASE("every built-in round-trips through the file format") {
  for (const auto& name : registry_names()) {
    CAPTURE(name);
    SubmersionScenario built = make_scenario(name);
    std::string text = serialize_scenario(built.def);
    SubmersionScenario reloaded = parse_scenario_text(text, name);
    auto a = fingerprint(built);
    auto b = fingerprint(reloaded);
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) CHECK(std::abs(a[i] - b[i]) <= 1e-12);
  }
}

TEST_CASE("the shipped scenario files match the builders") {
  for (const auto& name : registry_names()) {
    CAPTURE(name);
    SubmersionScenario from_file = load_scenario(scenario_path(name));
    SubmersionScenario built = make_scenario(name);
    CHECK(from_file.name() == built.name());
    auto a = fingerprint(built);
    auto b = fingerprint(from_file);
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) CHECK(std::abs(a[i] - b[i]) <= 1e-12);
  }
}

TEST_CASE("example2 golden checks hold on the file path too") {
  SubmersionScenario scn = load_scenario(scenario_path("example2"));
  for (const Vec& p : validation_points(scn.def, 8)) {
    ConformalityReport rep = check_conformal(scn.map, {p});
    CHECK(rep.lambdas.front() == doctest::Approx(std::exp(-p[1])).epsilon(1e-12));
    const VectorField& u = scn.map.vertical_frame[0];
    Vec tuu = tensor_T(scn.map, u, u, p).output.components;
    double e = std::exp(-p[1]);
    CHECK(tuu[0] == doctest::Approx(-e * e).epsilon(1e-9));
    Vec grad = gradient(scn.total(), *scn.clairaut_f, p).components;
    CHECK(grad[0] == doctest::Approx(e * e).epsilon(1e-12));
  }
}

TEST_CASE("parser rejects malformed files with located errors") {
  CHECK_THROWS_AS(parse_scenario_text("[total]\ndim = 2\ng_1_1 = 1 +\n", "bad"), ValidationError);
  CHECK_THROWS_AS(parse_scenario_text("[bogus]\n", "bad"), ValidationError);
  CHECK_THROWS_AS(parse_scenario_text("dim = 2\n", "bad"), ValidationError);

  // missing pieces
  std::string incomplete = "[total]\ndim = 2\ng_1_1 = 1\ng_2_2 = 1\n[base]\ndim = 1\ng_1_1 = 1\n";
  CHECK_THROWS_AS(parse_scenario_text(incomplete, "bad"), ValidationError);
}

TEST_CASE("validation rejects inconsistent declarations") {
  std::string base =
      "name = t\n[total]\ndim = 2\ng_1_1 = 1\ng_2_2 = 1\nGOFF\n[base]\ndim = 1\ng_1_1 = 1\n"
      "[map]\nF_1 = x1\n[frames]\nvertical_1 = 0, 1\nhorizontal_1 = 1, 0\n"
      "[sample_box]\nx1 = -1, 1\nx2 = -1, 1\n";

  // contradictory symmetric entries -> metric symmetry violation
  std::string asym = base;
  asym.replace(asym.find("GOFF"), 4, "g_1_2 = x1\ng_2_1 = x2");
  try {
    parse_scenario_text(asym, "asym");
    FAIL("expected a validation error");
  } catch (const ValidationError& e) {
    CHECK(std::string(e.what()).find("symmetric") != std::string::npos);
  }

  // indefinite metric -> positive-definiteness violation with a witness
  std::string negdef = base;
  negdef.replace(negdef.find("g_1_1 = 1"), 9, "g_1_1 = -1");
  negdef.replace(negdef.find("GOFF"), 4, "");
  try {
    parse_scenario_text(negdef, "negdef");
    FAIL("expected a validation error");
  } catch (const ValidationError& e) {
    std::string msg = e.what();
    CHECK(msg.find("positive-definite") != std::string::npos);
    CHECK(msg.find("at point") != std::string::npos);
  }

  // frame not in the kernel
  std::string badframe = base;
  badframe.replace(badframe.find("GOFF"), 4, "");
  badframe.replace(badframe.find("vertical_1 = 0, 1"), 17, "vertical_1 = 1, 1");
  CHECK_THROWS_AS(parse_scenario_text(badframe, "badframe"), ValidationError);

  // box missing one coordinate
  std::string nobox = base;
  nobox.replace(nobox.find("GOFF"), 4, "");
  nobox.replace(nobox.find("x2 = -1, 1\n"), 11, "");
  CHECK_THROWS_AS(parse_scenario_text(nobox, "nobox"), ValidationError);
}

TEST_CASE("a declared potential defaults the Clairaut expectation") {
  std::string text =
      "name = t\n[total]\ndim = 2\ng_1_1 = 1\ng_2_2 = 1\n[base]\ndim = 1\ng_1_1 = 1\n"
      "[map]\nF_1 = x1\n[frames]\nvertical_1 = 0, 1\nhorizontal_1 = 1, 0\n"
      "[clairaut]\nf = 0\n[sample_box]\nx1 = -1, 1\nx2 = -1, 1\n";
  SubmersionScenario scn = parse_scenario_text(text, "t");
  CHECK(scn.def.flags.clairaut.value_or(false));

  // an explicit negative declaration wins (negative test scenarios)
  std::string neg = text;
  neg.replace(neg.find("[clairaut]"), 10, "[flags]\nclairaut = false\n[clairaut]");
  SubmersionScenario scn2 = parse_scenario_text(neg, "t2");
  CHECK(!scn2.def.flags.clairaut.value());
}

TEST_CASE("doubly warped builder: product degeneration and domain errors") {
  DoublyWarpedSpec spec;
  spec.name = "product_check";
  spec.m1 = 1;
  spec.m2 = 1;
  spec.g1 = {{expr::constant(1.0)}};
  spec.g2 = {{expr::constant(1.0)}};
  spec.f1 = expr::constant(1.0);
  spec.lam = expr::constant(1.0);
  spec.box = {{-1.0, 1.0}, {-1.0, 1.0}};
  SubmersionScenario prod = build_doubly_warped(spec);

  Vec p = v2(0.3, -0.4);
  ConformalityReport rep = check_conformal(prod.map, {p});
  CHECK(rep.lambdas.front() == doctest::Approx(1.0));
  const VectorField& u = prod.map.vertical_frame[0];
  const VectorField& x = prod.map.horizontal_frame[0];
  CHECK(tensor_T(prod.map, u, u, p).output.components.lpNorm<Eigen::Infinity>() < 1e-12);
  CHECK(tensor_A(prod.map, x, x, p).output.components.lpNorm<Eigen::Infinity>() < 1e-12);

  DoublyWarpedSpec bad = spec;
  bad.name = "bad_warp";
  bad.f1 = expr::parse("x1", 1);  // vanishes inside the box
  CHECK_THROWS_AS(build_doubly_warped(bad), DomainError);
}

TEST_CASE("surface of revolution builder") {
  CHECK_THROWS_AS(
      build_surface_of_revolution(expr::parse("x1", 1), {-1.0, 1.0}, {0.0, 3.0}, "bad_profile"),
      DomainError);

  SubmersionScenario cyl =
      build_surface_of_revolution(expr::constant(1.0), {-1.0, 1.0}, {0.0, 3.0}, "cylinder");
  CHECK(cyl.def.flags.harmonic.value());
  SubmersionScenario cat = make_scenario("surface_of_revolution_default");
  CHECK(!cat.def.flags.harmonic.value());
}

TEST_CASE("validation points are deterministic per scenario name") {
  SubmersionScenario a = build_example2();
  auto p1 = validation_points(a.def);
  auto p2 = validation_points(a.def);
  REQUIRE(p1.size() == 16);
  for (std::size_t i = 0; i < p1.size(); ++i)
    CHECK((p1[i] - p2[i]).lpNorm<Eigen::Infinity>() == 0.0);

  // a different name shifts the sequence
  ScenarioDefinition other = a.def;
  other.name = "example2_renamed";
  auto p3 = validation_points(other);
  bool all_same = true;
  for (std::size_t i = 0; i < p1.size(); ++i)
    all_same = all_same && (p1[i] - p3[i]).lpNorm<Eigen::Infinity>() == 0.0;
  CHECK(!all_same);
}

TEST_CASE("load_scenario reports missing files as input errors") {
  CHECK_THROWS_AS(load_scenario("/nonexistent/path.scenario"), ArgumentError);
}
