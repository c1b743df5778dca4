#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "clairaut/clairaut_lab.hpp"
#include "clairaut/scenario.hpp"

#include <cmath>
#include <random>

using namespace clairaut;

namespace {

Vec v2(double a, double b) {
  Vec v(2);
  v << a, b;
  return v;
}

std::vector<Vec> points(const SubmersionScenario& scn, int count, unsigned seed = 42) {
  std::mt19937_64 rng(seed);
  return sample_points(scn, count, rng);
}

// non-umbilical check target: two fiber directions warped differently
SubmersionScenario anisotropic_fiber_scenario() {
  ScenarioDefinition def;
  def.name = "anisotropic_fibers";
  def.m = 3;
  def.n = 1;
  auto zero = expr::constant(0.0);
  def.g_total = {{expr::constant(1.0), zero, zero},
                 {zero, expr::parse("exp(2*x1)", 3), zero},
                 {zero, zero, expr::parse("exp(4*x1)", 3)}};
  def.g_base = {{expr::constant(1.0)}};
  def.map_components = {expr::variable(0)};
  def.vertical = {{zero, expr::constant(1.0), zero}, {zero, zero, expr::constant(1.0)}};
  def.horizontal = {{expr::constant(1.0), zero, zero}};
  def.lambda = expr::constant(1.0);
  def.box = {{-0.5, 0.5}, {-0.5, 0.5}, {-0.5, 0.5}};
  SubmersionScenario scn = realize(def);
  validate_scenario(scn);
  return scn;
}

}  // namespace

TEST_CASE("split reproduces the declared spans orthonormally") {
  SubmersionScenario scn = build_example2();
  for (const Vec& p : points(scn, 8)) {
    VerticalHorizontalSplit s = split(scn.map, p);
    REQUIRE(s.vertical.size() == 1);
    REQUIRE(s.horizontal.size() == 1);
    Mat g = metric_at(scn.total(), p);
    // vertical is collinear with e1 - e2, horizontal with e1 + e2
    Vec u = s.vertical[0];
    CHECK(u[0] == doctest::Approx(-u[1]).epsilon(1e-12));
    Vec x = s.horizontal[0];
    CHECK(x[0] == doctest::Approx(x[1]).epsilon(1e-12));
    CHECK(u.dot(g * u) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(x.dot(g * x) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(std::abs(u.dot(g * x)) < 1e-12);
    CHECK((map_jacobian(scn.map, p) * u).lpNorm<Eigen::Infinity>() < 1e-12);
  }
}

TEST_CASE("split on a product is block diagonal") {
  SubmersionScenario scn = make_scenario("euclidean_product");
  Vec p = Vec::Zero(4);
  VerticalHorizontalSplit s = split(scn.map, p);
  for (const Vec& u : s.vertical) {
    CHECK(std::abs(u[0]) < 1e-14);
    CHECK(std::abs(u[1]) < 1e-14);
  }
  for (const Vec& x : s.horizontal) {
    CHECK(std::abs(x[2]) < 1e-14);
    CHECK(std::abs(x[3]) < 1e-14);
  }
}

TEST_CASE("rank deficiency raises not-a-submersion") {
  ScenarioDefinition def;
  def.name = "rank_drop";
  def.m = 2;
  def.n = 1;
  def.g_total = {{expr::constant(1.0), expr::constant(0.0)},
                 {expr::constant(0.0), expr::constant(1.0)}};
  def.g_base = {{expr::constant(1.0)}};
  def.map_components = {expr::parse("x1^2", 2)};  // differential vanishes at x1 = 0
  def.vertical = {{expr::constant(0.0), expr::constant(1.0)}};
  def.horizontal = {{expr::constant(1.0), expr::constant(0.0)}};
  def.box = {{-1.0, 1.0}, {-1.0, 1.0}};
  SubmersionScenario scn = realize(def);
  CHECK_THROWS_AS(split(scn.map, v2(0.0, 0.3)), NotASubmersionError);
}

TEST_CASE("conformality estimates the published dilations") {
  SubmersionScenario ex2 = build_example2();
  auto pts = points(ex2, 20);
  ConformalityReport rep = check_conformal(ex2.map, pts);
  CHECK(rep.conformal);
  CHECK(rep.residual_max < 1e-12);
  for (std::size_t i = 0; i < pts.size(); ++i)
    CHECK(rep.lambdas[i] == doctest::Approx(std::exp(-pts[i][1])).epsilon(1e-12));

  // Riemannian product: dilation identically one
  SubmersionScenario prod = make_scenario("euclidean_product");
  auto ppts = points(prod, 6);
  ConformalityReport prep = check_conformal(prod.map, ppts);
  CHECK(prep.conformal);
  for (double l : prep.lambdas) CHECK(l == doctest::Approx(1.0).epsilon(1e-13));

  // doubly warped projection: dilation 1/lam(q)
  SubmersionScenario dw = make_scenario("doubly_warped_conformal");
  auto dpts = points(dw, 10);
  ConformalityReport drep = check_conformal(dw.map, dpts);
  CHECK(drep.conformal);
  for (std::size_t i = 0; i < dpts.size(); ++i)
    CHECK(drep.lambdas[i] == doctest::Approx(std::exp(-dpts[i][1] / 4.0)).epsilon(1e-10));
}

TEST_CASE("T tensor golden values") {
  SubmersionScenario scn = build_example2();
  const VectorField& u = scn.map.vertical_frame[0];  // e1 - e2
  for (const Vec& p : points(scn, 12)) {
    Vec tuu = tensor_T(scn.map, u, u, p).output.components;
    double e = std::exp(-p[1]);
    // -e^{-x2} X with X = e1 + e2 = e^{-x2} (d1 + d2)
    CHECK(tuu[0] == doctest::Approx(-e * e).epsilon(1e-9));
    CHECK(tuu[1] == doctest::Approx(-e * e).epsilon(1e-9));
  }
}

TEST_CASE("T vanishes on a Riemannian product") {
  SubmersionScenario prod = make_scenario("euclidean_product");
  for (const Vec& p : points(prod, 4))
    for (const auto& u : prod.map.vertical_frame)
      for (const auto& w : prod.map.vertical_frame)
        CHECK(tensor_T(prod.map, u, w, p).output.components.lpNorm<Eigen::Infinity>() < 1e-10);
}

TEST_CASE("doubly warped fibers are umbilical with the stated normal") {
  SubmersionScenario dw = make_scenario("doubly_warped_default");
  ScalarField logf1 = *dw.clairaut_f;  // log f1
  for (const Vec& p : points(dw, 10)) {
    VerticalHorizontalSplit s = split(dw.map, p);
    Mat g = metric_at(dw.total(), p);
    Vec grad = gradient(dw.total(), logf1, p).components;
    Vec gradh = horizontal_part(dw.total(), s, grad);
    const VectorField& u = dw.map.vertical_frame[0];
    Vec uval = u.eval(p);
    double guu = uval.dot(g * uval);
    Vec tuu = tensor_T(dw.map, u, u, p).output.components;
    CHECK((tuu + guu * gradh).lpNorm<Eigen::Infinity>() < 1e-6);
    CHECK(umbilical_residual(dw.map, p) < 1e-9);
  }
}

TEST_CASE("A tensor: products, skewness, restriction") {
  SubmersionScenario prod = make_scenario("euclidean_product");
  for (const Vec& p : points(prod, 4))
    for (const auto& x : prod.map.horizontal_frame)
      for (const auto& y : prod.map.horizontal_frame)
        CHECK(tensor_A(prod.map, x, y, p).output.components.lpNorm<Eigen::Infinity>() < 1e-10);

  SubmersionScenario ex2 = build_example2();
  Vec p = v2(0.3, -0.4);
  Mat g = metric_at(ex2.total(), p);
  VectorField xf = orthonormal_horizontal_field(ex2.map, 0);
  VectorField uf = orthonormal_vertical_field(ex2.map, 0);

  // skew-symmetry g(A_X Y, V) = -g(Y, A_X V)
  Vec axx = tensor_A(ex2.map, xf, xf, p).output.components;
  Vec axu = tensor_A(ex2.map, xf, uf, p).output.components;
  double lhs = axx.dot(g * uf.eval(p));
  double rhs = -xf.eval(p).dot(g * axu);
  CHECK(lhs == doctest::Approx(rhs).epsilon(1e-8));

  // A_E = A_{HE}: adding a vertical part to the first argument changes nothing
  VectorField mixed;
  mixed.eval = [&](const Vec& q) { return Vec(xf.eval(q) + 0.7 * uf.eval(q)); };
  Vec a1 = tensor_A(ex2.map, mixed, xf, p).output.components;
  Vec a2 = tensor_A(ex2.map, xf, xf, p).output.components;
  CHECK((a1 - a2).lpNorm<Eigen::Infinity>() < 1e-8);

  // T_E = T_{vE} mirror: horizontal garbage in the first slot is ignored
  VectorField mixed_t;
  mixed_t.eval = [&](const Vec& q) { return Vec(uf.eval(q) + 0.7 * xf.eval(q)); };
  Vec t1 = tensor_T(ex2.map, mixed_t, xf, p).output.components;
  Vec t2 = tensor_T(ex2.map, uf, xf, p).output.components;
  CHECK((t1 - t2).lpNorm<Eigen::Infinity>() < 1e-8);
}

TEST_CASE("T is symmetric on vertical pairs and skew as an operator") {
  SubmersionScenario dw4 = make_scenario("doubly_warped_4d");
  Vec p = (Vec(4) << 0.2, -0.3, 0.4, 0.1).finished();
  VectorField u1 = orthonormal_vertical_field(dw4.map, 0);
  VectorField u2 = orthonormal_vertical_field(dw4.map, 1);
  Vec t12 = tensor_T(dw4.map, u1, u2, p).output.components;
  Vec t21 = tensor_T(dw4.map, u2, u1, p).output.components;
  CHECK((t12 - t21).lpNorm<Eigen::Infinity>() < 1e-6);

  Mat g = metric_at(dw4.total(), p);
  VectorField x1 = orthonormal_horizontal_field(dw4.map, 0);
  Vec tu1u2 = t12;
  Vec tu1x = tensor_T(dw4.map, u1, x1, p).output.components;
  double lhs = tu1u2.dot(g * x1.eval(p));
  double rhs = -u2.eval(p).dot(g * tu1x);
  CHECK(lhs == doctest::Approx(rhs).epsilon(1e-6));
}

TEST_CASE("O'Neill outputs live in the stated distributions") {
  SubmersionScenario dw4 = make_scenario("doubly_warped_4d");
  for (const Vec& p : points(dw4, 5)) {
    VerticalHorizontalSplit s = split(dw4.map, p);
    Mat g = metric_at(dw4.total(), p);
    VectorField u1 = orthonormal_vertical_field(dw4.map, 0);
    VectorField u2 = orthonormal_vertical_field(dw4.map, 1);
    Vec t = tensor_T(dw4.map, u1, u2, p).output.components;
    for (const Vec& u : s.vertical) CHECK(std::abs(t.dot(g * u)) < 1e-8);

    VectorField x1 = orthonormal_horizontal_field(dw4.map, 0);
    VectorField x2 = orthonormal_horizontal_field(dw4.map, 1);
    Vec a = tensor_A(dw4.map, x1, x2, p).output.components;
    for (const Vec& x : s.horizontal) CHECK(std::abs(a.dot(g * x)) < 1e-8);
  }
}

TEST_CASE("A formula residual (conformal fundamental identity)") {
  SubmersionScenario ex2 = build_example2();
  for (const Vec& p : points(ex2, 10))
    CHECK(a_formula_residual(ex2.map, *ex2.dilation, ex2.map.horizontal_frame[0],
                             ex2.map.horizontal_frame[0], p) < 1e-6);

  // fiber-varying dilation: A_X Y = -g(X,Y) grad_v log(lam)
  SubmersionScenario dw = make_scenario("doubly_warped_conformal");
  for (const Vec& p : points(dw, 10)) {
    const VectorField& x = dw.map.horizontal_frame[0];
    CHECK(a_formula_residual(dw.map, *dw.dilation, x, x, p) < 1e-6);

    VerticalHorizontalSplit s = split(dw.map, p);
    Mat g = metric_at(dw.total(), p);
    Vec axy = tensor_A(dw.map, x, x, p).output.components;
    // grad_v log lam where lam(y) = exp(y/4): d/dy log lam = 1/4
    ScalarField loglam;
    loglam.eval = [](const Vec& q) { return q[1] / 4.0; };
    loglam.partials = [](const Vec&) { return Vec(v2(0.0, 0.25)); };
    Vec gl = vertical_part(dw.total(), s, gradient(dw.total(), loglam, p).components);
    double gxx = x.eval(p).dot(g * x.eval(p));
    CHECK((axy + gxx * gl).lpNorm<Eigen::Infinity>() < 1e-5);
  }

  // fiber-constant dilation: A_X Y = 1/2 v[X,Y] (= 0 for coordinate lifts)
  SubmersionScenario dwc = make_scenario("doubly_warped_default");
  for (const Vec& p : points(dwc, 6)) {
    const VectorField& x = dwc.map.horizontal_frame[0];
    Vec bracket = lie_bracket(x, x, p, 1e-6);
    Vec axy = tensor_A(dwc.map, x, x, p).output.components;
    CHECK((axy - 0.5 * bracket).lpNorm<Eigen::Infinity>() < 1e-9);
  }
}

TEST_CASE("mean curvature matches the published values") {
  SubmersionScenario prod = make_scenario("euclidean_product");
  for (const Vec& p : points(prod, 4))
    CHECK(mean_curvature(prod.map, p).components.lpNorm<Eigen::Infinity>() < 1e-10);

  SubmersionScenario ex2 = build_example2();
  for (const Vec& p : points(ex2, 6)) {
    VectorField up = orthonormal_vertical_field(ex2.map, 0);
    Vec tuu = tensor_T(ex2.map, up, up, p).output.components;
    Vec h = mean_curvature(ex2.map, p).components;
    CHECK((h - tuu).lpNorm<Eigen::Infinity>() < 1e-10);
    // horizontal within tolerance
    VerticalHorizontalSplit s = split(ex2.map, p);
    Mat g = metric_at(ex2.total(), p);
    CHECK(std::abs(h.dot(g * s.vertical[0])) < 1e-8);
  }

  SubmersionScenario dw = make_scenario("doubly_warped_default");
  for (const Vec& p : points(dw, 6)) {
    Vec h = mean_curvature(dw.map, p).components;
    Vec grad = gradient(dw.total(), *dw.clairaut_f, p).components;
    CHECK((h + grad).lpNorm<Eigen::Infinity>() < 1e-6);
  }
}

TEST_CASE("umbilical residual separates products from anisotropic fibers") {
  SubmersionScenario prod = make_scenario("euclidean_product");
  CHECK(umbilical_residual(prod.map, Vec::Zero(4)) < 1e-10);

  SubmersionScenario bad = anisotropic_fiber_scenario();
  Vec p = (Vec(3) << 0.2, 0.1, -0.1).finished();
  CHECK(umbilical_residual(bad.map, p) > 1e-3);
  CHECK_THROWS_AS(infer_mean_curvature_potential(bad.map, {p}), PreconditionError);
}

TEST_CASE("second fundamental form: direct vs conformal closed form") {
  for (const std::string& name :
       {std::string("example2"), std::string("doubly_warped_default"),
        std::string("doubly_warped_conformal"), std::string("surface_of_revolution_default")}) {
    SubmersionScenario scn = make_scenario(name);
    DilationField dil = scn.dilation ? *scn.dilation : estimate_dilation(scn.map);
    for (const Vec& p : points(scn, 6)) {
      for (const auto& x : scn.map.horizontal_frame)
        for (const auto& y : scn.map.horizontal_frame) {
          SecondFundamentalForm sff = second_fundamental_form(scn.map, dil, x, y, p);
          CHECK(sff.residual < 1e-5);
        }
    }
  }

  // Riemannian submersion, basic fields: the conformal form vanishes
  SubmersionScenario sor = make_scenario("surface_of_revolution_default");
  for (const Vec& p : points(sor, 4)) {
    SecondFundamentalForm sff = second_fundamental_form(
        sor.map, *sor.dilation, sor.map.horizontal_frame[0], sor.map.horizontal_frame[0], p);
    CHECK(sff.conformal.lpNorm<Eigen::Infinity>() < 1e-12);
    CHECK(sff.direct.lpNorm<Eigen::Infinity>() < 1e-7);
  }
}

TEST_CASE("non-basic horizontal fields are rejected") {
  SubmersionScenario ex2 = build_example2();
  VectorField not_basic;
  not_basic.name = "e1+e2";
  not_basic.eval = [](const Vec& q) {
    return Vec(v2(std::exp(-q[1]), std::exp(-q[1])));
  };
  Vec p = v2(0.2, 0.1);
  CHECK_THROWS_AS(second_fundamental_form(ex2.map, *ex2.dilation, not_basic, not_basic, p),
                  NotBasicError);
}

TEST_CASE("tension field: trace against the closed form") {
  for (const std::string& name : registry_names()) {
    SubmersionScenario scn = make_scenario(name);
    DilationField dil = scn.dilation ? *scn.dilation : estimate_dilation(scn.map);
    for (const Vec& p : points(scn, 4)) {
      TensionField tau = tension_field(scn.map, dil, p);
      CHECK(tau.residual < 1e-5);
    }
  }

  SubmersionScenario prod = make_scenario("euclidean_product");
  TensionField tau = tension_field(prod.map, *prod.dilation, Vec::Zero(4));
  CHECK(tau.trace_value.lpNorm<Eigen::Infinity>() < 1e-9);

  // homothetic fiber-constant case: tau = (m-n) F*(grad f)
  SubmersionScenario dw = make_scenario("doubly_warped_default");
  for (const Vec& p : points(dw, 5)) {
    TensionField t = tension_field(dw.map, *dw.dilation, p);
    Vec grad = gradient(dw.total(), *dw.clairaut_f, p).components;
    Vec expect = map_jacobian(dw.map, p) * grad;  // (m-n) = 1
    CHECK((t.trace_value - expect).lpNorm<Eigen::Infinity>() < 1e-6);
  }
}

TEST_CASE("harmonicity verdicts and preconditions") {
  SubmersionScenario prod = make_scenario("euclidean_product");
  auto ppts = points(prod, 6);
  HarmonicityResult hp = harmonicity_check(prod.map, *prod.dilation, *prod.clairaut_f, ppts);
  CHECK(hp.harmonic);
  CHECK(hp.verdicts_agree);

  SubmersionScenario dw = make_scenario("doubly_warped_default");
  auto dpts = points(dw, 6);
  HarmonicityResult hd = harmonicity_check(dw.map, *dw.dilation, *dw.clairaut_f, dpts);
  CHECK(!hd.harmonic);
  CHECK(hd.verdicts_agree);
  // residual reports (m-n) |F* grad f|
  double expect = 0.0;
  for (const Vec& p : dpts) {
    Vec grad = gradient(dw.total(), *dw.clairaut_f, p).components;
    Vec push = map_jacobian(dw.map, p) * grad;
    Mat gb = metric_at(dw.base(), dw.map.map(p));
    expect = std::max(expect, std::sqrt(push.dot(gb * push)));
  }
  CHECK(hd.residual == doctest::Approx(expect).epsilon(1e-9));

  // the hypotheses fail for the conformal-plane example: named precondition
  SubmersionScenario ex2 = build_example2();
  auto epts = points(ex2, 4);
  try {
    harmonicity_check(ex2.map, *ex2.dilation, *ex2.clairaut_f, epts);
    FAIL("expected a precondition error");
  } catch (const PreconditionError& e) {
    CHECK(std::string(e.what()).find("homothetic") != std::string::npos);
  }
}

TEST_CASE("dilation residual stays below 1e-8 on conformal scenarios") {
  for (const std::string& name : registry_names()) {
    SubmersionScenario scn = make_scenario(name);
    if (!scn.def.flags.conformal.value_or(false)) continue;
    ConformalityReport rep = check_conformal(scn.map, points(scn, 10),
                                             scn.dilation ? std::optional<DilationField>(*scn.dilation)
                                                          : std::nullopt);
    CHECK(rep.conformal);
  }
}
