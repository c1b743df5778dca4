#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "clairaut/geodesic.hpp"
#include "oracles.hpp"

#include <cmath>
#include <random>
#include <sstream>
#include <thread>

using namespace clairaut;

namespace {

ChartManifold euclidean(int dim) {
  ChartManifold man;
  man.dim = dim;
  man.name = "euclidean";
  man.metric.dim = dim;
  man.metric.eval = [dim](const Vec&) { return Mat::Identity(dim, dim); };
  man.metric.partials = [dim](const Vec&) { return std::vector<Mat>(dim, Mat::Zero(dim, dim)); };
  return man;
}

ChartManifold example2_manifold() {
  ChartManifold man;
  man.dim = 2;
  man.name = "example2.total";
  man.metric.dim = 2;
  man.metric.eval = [](const Vec& x) {
    Mat g = Mat::Zero(2, 2);
    g(0, 0) = g(1, 1) = std::exp(2.0 * x[1]);
    return g;
  };
  man.metric.partials = [](const Vec& x) {
    std::vector<Mat> dg(2, Mat::Zero(2, 2));
    dg[1](0, 0) = dg[1](1, 1) = 2.0 * std::exp(2.0 * x[1]);
    return dg;
  };
  return man;
}

ChartManifold sphere() {
  ChartManifold man;
  man.dim = 2;
  man.name = "sphere";
  man.metric.dim = 2;
  man.metric.eval = [](const Vec& x) {
    Mat g = Mat::Zero(2, 2);
    g(0, 0) = 1.0;
    g(1, 1) = std::sin(x[0]) * std::sin(x[0]);
    return g;
  };
  man.metric.partials = [](const Vec& x) {
    std::vector<Mat> dg(2, Mat::Zero(2, 2));
    dg[0](1, 1) = 2.0 * std::sin(x[0]) * std::cos(x[0]);
    return dg;
  };
  return man;
}

Vec v2(double a, double b) {
  Vec v(2);
  v << a, b;
  return v;
}

constexpr double kPi = 3.14159265358979323846;

}  // namespace

TEST_CASE("geodesic right-hand side") {
  ChartManifold flat = euclidean(2);
  GeodesicState s{0.0, v2(0.2, 0.4), v2(1.0, -0.5)};
  auto [dp, dv] = geodesic_rhs(flat, s);
  CHECK((dp - s.velocity).lpNorm<Eigen::Infinity>() == 0.0);
  CHECK(dv.lpNorm<Eigen::Infinity>() == 0.0);

  // against the published symbol table: dv = (-2 v1 v2, v1^2 - v2^2)
  ChartManifold man = example2_manifold();
  GeodesicState t{0.0, v2(0.0, 0.0), v2(0.7, -0.2)};
  auto [tp, tv] = geodesic_rhs(man, t);
  CHECK(tv[0] == doctest::Approx(-2.0 * 0.7 * -0.2).epsilon(1e-13));
  CHECK(tv[1] == doctest::Approx(0.7 * 0.7 - 0.2 * 0.2).epsilon(1e-13));
}

TEST_CASE("geodesic rhs agrees with the covariant-derivative correction") {
  ChartManifold man = example2_manifold();
  std::mt19937 rng(23);
  std::uniform_real_distribution<double> c(-1.0, 1.0);
  for (int k = 0; k < 10; ++k) {
    GeodesicState s{0.0, v2(c(rng), c(rng)), v2(c(rng), c(rng))};
    auto [dp, dv] = geodesic_rhs(man, s);
    VectorField frozen;
    frozen.eval = [&s](const Vec&) { return s.velocity; };
    frozen.jacobian = [](const Vec&) { return Mat::Zero(2, 2); };
    Vec corr = covariant_derivative(man, {s.point, s.velocity}, frozen).components;
    CHECK((dv + corr).lpNorm<Eigen::Infinity>() < 1e-12);
  }
}

TEST_CASE("straight line in the plane") {
  ChartManifold flat = euclidean(2);
  GeodesicTrace trace = integrate(flat, {0.0, v2(0, 0), v2(1, 0)}, 1.0, 1e-3);
  CHECK(trace.back().point[0] == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(std::abs(trace.back().point[1]) < 1e-12);
  CHECK(max_speed_drift(flat, trace) < 1e-12);
}

TEST_CASE("great circle reaches the antipode") {
  ChartManifold sph = sphere();
  // equator start, unit tangent along the equator
  GeodesicState s0{0.0, v2(kPi / 2.0, 0.3), v2(0.0, 1.0)};
  GeodesicTrace trace = integrate(sph, s0, kPi, 1e-3);
  Vec expect = oracle::great_circle_equator(0.3, kPi);
  CHECK((trace.back().point - expect).lpNorm<Eigen::Infinity>() < 1e-6);
  CHECK(max_speed_drift(sph, trace) < 1e-8);
}

TEST_CASE("speed conservation on the conformal plane") {
  ChartManifold man = example2_manifold();
  std::mt19937 rng(41);
  std::uniform_real_distribution<double> c(-0.8, 0.8);
  for (int k = 0; k < 5; ++k) {
    Vec p = v2(c(rng), c(rng));
    Vec v = v2(c(rng), c(rng));
    Mat g = metric_at(man, p);
    v /= std::sqrt(v.dot(g * v));
    GeodesicTrace trace = integrate(man, {0.0, p, v}, 1.0, 1e-3);
    CHECK(max_speed_drift(man, trace) <= 1e-8);
  }
}

TEST_CASE("fourth-order step-halving convergence") {
  ChartManifold man = example2_manifold();
  GeodesicState s0{0.0, v2(0.1, -0.2), v2(0.9, 0.35)};
  Vec e1 = integrate(man, s0, 1.0, 4e-2).back().point;
  Vec e2 = integrate(man, s0, 1.0, 2e-2).back().point;
  Vec e3 = integrate(man, s0, 1.0, 1e-2).back().point;
  double ratio = (e1 - e2).norm() / (e2 - e3).norm();
  CHECK(ratio >= 8.0);
}

TEST_CASE("time reversal returns to the start") {
  ChartManifold man = example2_manifold();
  GeodesicState s0{0.0, v2(0.3, 0.2), v2(-0.5, 0.8)};
  GeodesicTrace fwd = integrate(man, s0, 1.0, 1e-3);
  GeodesicState back{0.0, fwd.back().point, -fwd.back().velocity};
  GeodesicTrace rev = integrate(man, back, 1.0, 1e-3);
  CHECK((rev.back().point - s0.point).lpNorm<Eigen::Infinity>() < 1e-6);
}

TEST_CASE("exponential map") {
  ChartManifold flat = euclidean(2);
  Vec p = v2(0.4, -0.1);
  CHECK((exponential_map(flat, p, {p, v2(0, 0)}, 3.0) - p).lpNorm<Eigen::Infinity>() == 0.0);
  Vec q = exponential_map(flat, p, {p, v2(0.3, 0.5)}, 2.0);
  CHECK((q - (p + 2.0 * v2(0.3, 0.5))).lpNorm<Eigen::Infinity>() < 1e-10);

  ChartManifold sph = sphere();
  Vec e = v2(kPi / 2.0, 1.0);
  Vec periodic = exponential_map(sph, e, {e, v2(0.0, 1.0)}, 2.0 * kPi, 1e-3);
  CHECK(std::abs(periodic[0] - e[0]) < 1e-5);
  CHECK(std::abs(periodic[1] - e[1] - 2.0 * kPi) < 1e-5);  // same point on the chart lift

  // negative time runs the reversed geodesic
  Vec neg = exponential_map(flat, p, {p, v2(0.3, 0.5)}, -2.0);
  CHECK((neg - (p - 2.0 * v2(0.3, 0.5))).lpNorm<Eigen::Infinity>() < 1e-10);
}

TEST_CASE("bad arguments are rejected") {
  ChartManifold flat = euclidean(2);
  GeodesicState s0{0.0, v2(0, 0), v2(1, 0)};
  CHECK_THROWS_AS(integrate(flat, s0, 1.0, 0.0), ArgumentError);
  CHECK_THROWS_AS(integrate(flat, s0, -1.0, 1e-3), ArgumentError);
  GeodesicState nan_state{0.0, v2(std::nan(""), 0), v2(1, 0)};
  CHECK_THROWS(integrate(flat, nan_state, 1.0, 1e-3));
}

TEST_CASE("metric singularity reports the failure time") {
  // metric degenerates as x1 -> 1
  ChartManifold man;
  man.dim = 1;
  man.name = "degenerate";
  man.metric.dim = 1;
  man.metric.eval = [](const Vec& x) {
    Mat g(1, 1);
    g(0, 0) = 1.0 - x[0];
    return g;
  };
  Vec p(1), v(1);
  p << 0.0;
  v << 1.0;
  try {
    integrate(man, {0.0, p, v}, 2.0, 1e-3);
    FAIL("expected divergence");
  } catch (const IntegrationDivergedError& e) {
    CHECK(e.fail_time > 0.0);
    CHECK(e.fail_time <= 2.0);
  }
}

TEST_CASE("trace invariants") {
  ChartManifold man = example2_manifold();
  GeodesicTrace trace = integrate(man, {0.0, v2(0, 0), v2(0.6, 0.4)}, 0.5, 1e-3);
  for (std::size_t i = 1; i < trace.states.size(); ++i)
    CHECK(trace.states[i].t > trace.states[i - 1].t);
  CHECK(trace.back().t == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(trace.speed0 == doctest::Approx(speed_squared(man, trace.front())));
}

TEST_CASE("csv export uses 17 significant digits and round-trips") {
  ChartManifold man = example2_manifold();
  GeodesicTrace trace = integrate(man, {0.0, v2(0.1, 0.2), v2(0.5, -0.3)}, 0.01, 1e-3);
  std::ostringstream out;
  write_trace_csv(out, man, trace);
  std::istringstream in(out.str());
  std::string header;
  std::getline(in, header);
  CHECK(header == "t,x1,x2,v1,v2,speed2");
  std::string line;
  std::getline(in, line);  // initial state
  std::getline(in, line);  // first step
  std::istringstream row(line);
  std::string cell;
  std::getline(row, cell, ',');
  CHECK(std::stod(cell) == trace.states[1].t);
  std::getline(row, cell, ',');
  CHECK(std::stod(cell) == trace.states[1].point[0]);  // bit-exact round trip
}

TEST_CASE("parallel integration is deterministic") {
  ChartManifold man = example2_manifold();
  GeodesicState s0{0.0, v2(0.2, -0.4), v2(0.3, 0.9)};
  GeodesicTrace a, b;
  std::thread ta([&] { a = integrate(man, s0, 1.0, 1e-3); });
  std::thread tb([&] { b = integrate(man, s0, 1.0, 1e-3); });
  ta.join();
  tb.join();
  REQUIRE(a.states.size() == b.states.size());
  for (std::size_t i = 0; i < a.states.size(); ++i)
    CHECK((a.states[i].point - b.states[i].point).lpNorm<Eigen::Infinity>() == 0.0);
}
