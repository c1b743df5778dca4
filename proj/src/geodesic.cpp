#include "clairaut/geodesic.hpp"

#include <cmath>
#include <cstdio>
#include <ostream>

namespace clairaut {

double speed_squared(const ChartManifold& man, const GeodesicState& s) {
  TangentVector v{s.point, s.velocity};
  return metric_inner(man, v, v);
}

std::pair<Vec, Vec> geodesic_rhs(const ChartManifold& man, const GeodesicState& s) {
  ChristoffelTensor gam = christoffel(man, s.point);
  Vec acc(man.dim);
  for (int k = 0; k < man.dim; ++k) acc[k] = -s.velocity.dot(gam.values[k] * s.velocity);
  return {s.velocity, acc};
}

namespace {

void rk4_step(const ChartManifold& man, GeodesicState& s, double h) {
  auto [k1p, k1v] = geodesic_rhs(man, s);
  GeodesicState s2{s.t + 0.5 * h, s.point + 0.5 * h * k1p, s.velocity + 0.5 * h * k1v};
  auto [k2p, k2v] = geodesic_rhs(man, s2);
  GeodesicState s3{s.t + 0.5 * h, s.point + 0.5 * h * k2p, s.velocity + 0.5 * h * k2v};
  auto [k3p, k3v] = geodesic_rhs(man, s3);
  GeodesicState s4{s.t + h, s.point + h * k3p, s.velocity + h * k3v};
  auto [k4p, k4v] = geodesic_rhs(man, s4);
  s.point += (h / 6.0) * (k1p + 2.0 * k2p + 2.0 * k3p + k4p);
  s.velocity += (h / 6.0) * (k1v + 2.0 * k2v + 2.0 * k3v + k4v);
  s.t += h;
}

}  // namespace

GeodesicTrace integrate(const ChartManifold& man, const GeodesicState& initial, double t_end,
                        double step, double speed_tolerance) {
  if (!(step > 0.0)) throw ArgumentError("integration step must be positive");
  if (!(t_end > initial.t)) throw ArgumentError("t_end must exceed the initial time");
  require_finite(initial.point, "initial point");
  require_finite(initial.velocity, "initial velocity");

  long n = std::max<long>(1, std::lround((t_end - initial.t) / step));
  double h = (t_end - initial.t) / static_cast<double>(n);

  GeodesicTrace trace;
  trace.step = h;
  trace.speed0 = speed_squared(man, initial);
  trace.states.reserve(static_cast<std::size_t>(n) + 1);
  trace.states.push_back(initial);

  GeodesicState s = initial;
  double step_scale = std::pow(h / 1e-3, 4);
  for (long i = 0; i < n; ++i) {
    try {
      rk4_step(man, s, h);
    } catch (const SingularMetricError& e) {
      throw IntegrationDivergedError(
          std::string("metric singularity at t = ") + std::to_string(s.t) + ": " + e.what(), s.t);
    }
    if (!s.point.allFinite() || !s.velocity.allFinite())
      throw IntegrationDivergedError("geodesic state became non-finite at t = " +
                                         std::to_string(s.t),
                                     s.t);
    double drift = std::abs(speed_squared(man, s) - trace.speed0);
    double allowed = speed_tolerance * std::max(1.0, s.t - initial.t) * std::max(1.0, step_scale);
    if (drift > 100.0 * allowed && drift > 1e-12)
      throw IntegrationDivergedError("speed drift " + std::to_string(drift) +
                                         " exceeds 100x tolerance at t = " + std::to_string(s.t),
                                     s.t);
    trace.states.push_back(s);
  }
  return trace;
}

Vec exponential_map(const ChartManifold& man, const Vec& p, const TangentVector& v, double t,
                    double step) {
  if ((p - v.base).lpNorm<Eigen::Infinity>() > 0.0)
    throw ArgumentError("exponential map vector is not based at p");
  if (t == 0.0 || v.components.lpNorm<Eigen::Infinity>() == 0.0) return p;
  GeodesicState s0{0.0, p, v.components};
  if (t < 0.0) {
    s0.velocity = -s0.velocity;
    t = -t;
  }
  return integrate(man, s0, t, step).back().point;
}

double max_speed_drift(const ChartManifold& man, const GeodesicTrace& trace) {
  double drift = 0.0;
  for (const auto& s : trace.states)
    drift = std::max(drift, std::abs(speed_squared(man, s) - trace.speed0));
  return drift;
}

void write_trace_csv(std::ostream& out, const ChartManifold& man, const GeodesicTrace& trace) {
  const int m = man.dim;
  out << "t";
  for (int i = 1; i <= m; ++i) out << ",x" << i;
  for (int i = 1; i <= m; ++i) out << ",v" << i;
  out << ",speed2\n";
  char buf[32];
  auto put = [&](double v, char lead) {
    if (lead) out << lead;
    std::snprintf(buf, sizeof buf, "%.17g", v);
    out << buf;
  };
  for (const auto& s : trace.states) {
    put(s.t, 0);
    for (int i = 0; i < m; ++i) put(s.point[i], ',');
    for (int i = 0; i < m; ++i) put(s.velocity[i], ',');
    put(speed_squared(man, s), ',');
    out << "\n";
  }
}

}  // namespace clairaut
