#pragma once

#include "clairaut/chart_geometry.hpp"

#include <iosfwd>

namespace clairaut {

struct GeodesicState {
  double t = 0.0;
  Vec point;
  Vec velocity;
};

/// Time-ordered samples of one integrated geodesic.
struct GeodesicTrace {
  std::vector<GeodesicState> states;
  double step = 0.0;
  double speed0 = 0.0;  // initial |alpha'|^2_g

  const GeodesicState& front() const { return states.front(); }
  const GeodesicState& back() const { return states.back(); }
};

double speed_squared(const ChartManifold& man, const GeodesicState& s);

/// d(point) = velocity, d(velocity)^k = -Gamma^k_ij v^i v^j.
std::pair<Vec, Vec> geodesic_rhs(const ChartManifold& man, const GeodesicState& s);

/// Classical fixed-step 4th-order integration. The step count is chosen so
/// the final sample lands on t_end; speed drift is monitored against
/// speed_tolerance (per unit time at step 1e-3) and aborts at 100x.
GeodesicTrace integrate(const ChartManifold& man, const GeodesicState& initial, double t_end,
                        double step, double speed_tolerance = 1e-8);

/// Endpoint of the geodesic with alpha(0) = p, alpha'(0) = v at time t.
Vec exponential_map(const ChartManifold& man, const Vec& p, const TangentVector& v, double t,
                    double step = 1e-3);

double max_speed_drift(const ChartManifold& man, const GeodesicTrace& trace);

/// Columns t, x1..xm, v1..vm, speed2; 17 significant digits.
void write_trace_csv(std::ostream& out, const ChartManifold& man, const GeodesicTrace& trace);

}  // namespace clairaut
