#include "clairaut/clairaut_lab.hpp"

#include <cmath>
#include <cstdio>
#include <ostream>

namespace clairaut {

namespace {

double g_norm(const Mat& g, const Vec& v) { return std::sqrt(std::max(0.0, v.dot(g * v))); }

double clamp01(double x) { return std::min(1.0, std::max(0.0, x)); }

}  // namespace

double angle_omega(const SmoothSubmersionMap& F, const GeodesicState& s) {
  Mat g = metric_at(F.total, s.point);
  double speed2 = s.velocity.dot(g * s.velocity);
  if (std::sqrt(std::max(0.0, speed2)) <= 1e-12)
    throw ArgumentError("angle of a zero velocity is undefined");
  VerticalHorizontalSplit sp = split(F, s.point);
  Vec v = vertical_part(F.total, sp, s.velocity);
  Vec h = horizontal_part(F.total, sp, s.velocity);
  double vert2 = v.dot(g * v);
  if (vert2 <= 0.0) return 0.0;
  if (h.dot(g * h) <= 0.0) return 1.5707963267948966;
  return std::asin(clamp01(std::sqrt(vert2 / speed2)));
}

double clairaut_condition_residual(const SmoothSubmersionMap& F, const DilationField& dilation,
                                   const ScalarField& f, const Vec& p) {
  VerticalHorizontalSplit s = split(F, p);
  Mat g = metric_at(F.total, p);
  double lam = dilation.lambda.eval(p);
  ScalarField inv2 = inverse_square_dilation(dilation);
  Vec grad_inv_v = vertical_part(F.total, s, gradient(F.total, inv2, p).components);
  Vec grad_f = gradient(F.total, f, p).components;

  double residual = 0.0;
  for (std::size_t i = 0; i < s.vertical.size(); ++i) {
    VectorField ui = orthonormal_vertical_field(F, static_cast<int>(i));
    Vec tuu = tensor_T(F, ui, ui, p).output.components;
    const Vec& u = s.vertical[i];
    double guu = u.dot(g * u);
    double u_inv = u.dot(g * grad_inv_v);
    for (const Vec& x : s.horizontal) {
      double lhs = tuu.dot(g * x);
      double rhs = -guu * x.dot(g * grad_f) - 0.5 * lam * lam * x.dot(g * x) * u_inv;
      residual = std::max(residual, std::abs(lhs - rhs));
    }
  }
  return residual;
}

InvariantTrace clairaut_invariant_trace(const SmoothSubmersionMap& F, const ScalarField& f,
                                        const GeodesicTrace& trace) {
  InvariantTrace out;
  out.times.reserve(trace.states.size());
  double lo = 0.0, hi = 0.0;
  bool first = true;
  for (const auto& s : trace.states) {
    double w = angle_omega(F, s);
    double sin_w = clamp01(std::sin(w));
    double value = std::exp(f.eval(s.point)) * sin_w;
    out.times.push_back(s.t);
    out.omegas.push_back(w);
    out.values.push_back(value);
    if (first || value < lo) lo = value;
    if (first || value > hi) hi = value;
    first = false;
  }
  out.drift = hi - lo;
  return out;
}

void write_invariant_csv(std::ostream& out, const InvariantTrace& trace) {
  out << "t,omega,invariant\n";
  char buf[32];
  auto put = [&](double v) {
    std::snprintf(buf, sizeof buf, "%.17g", v);
    out << buf;
  };
  for (std::size_t i = 0; i < trace.times.size(); ++i) {
    put(trace.times[i]);
    out << ",";
    put(trace.omegas[i]);
    out << ",";
    put(trace.values[i]);
    out << "\n";
  }
}

namespace {

// d/dt of the split velocity components along the trace by central
// differences on neighbouring samples.
Vec trace_component_rate(const SmoothSubmersionMap& F, const GeodesicTrace& trace,
                         std::size_t index, bool vertical) {
  if (index == 0 || index + 1 >= trace.states.size())
    throw ArgumentError("geodesic condition residuals need an interior trace sample");
  const auto& prev = trace.states[index - 1];
  const auto& next = trace.states[index + 1];
  auto part = [&](const GeodesicState& s) {
    VerticalHorizontalSplit sp = split(F, s.point);
    return vertical ? vertical_part(F.total, sp, s.velocity)
                    : horizontal_part(F.total, sp, s.velocity);
  };
  return (part(next) - part(prev)) / (next.t - prev.t);
}

}  // namespace

std::pair<double, double> geodesic_condition_residuals(const SmoothSubmersionMap& F,
                                                       const GeodesicTrace& trace,
                                                       std::size_t index) {
  const GeodesicState& s = trace.states.at(index);
  const Vec& p = s.point;
  VerticalHorizontalSplit sp = split(F, p);
  Mat g = metric_at(F.total, p);
  Vec u = vertical_part(F.total, sp, s.velocity);
  Vec x = horizontal_part(F.total, sp, s.velocity);

  VectorField uf = projected_constant_field(F, s.velocity, true);
  VectorField xf = projected_constant_field(F, s.velocity, false);

  // nabla_{alpha'} U along the curve: dU/dt + Gamma(alpha', U).
  ChristoffelTensor gam = christoffel(F.total, p);
  auto covariant_rate = [&](const Vec& rate, const Vec& comp) {
    Vec out = rate;
    for (int k = 0; k < F.m(); ++k) out[k] += s.velocity.dot(gam.values[k] * comp);
    return out;
  };
  Vec nab_u = covariant_rate(trace_component_rate(F, trace, index, true), u);
  Vec nab_x = covariant_rate(trace_component_rate(F, trace, index, false), x);

  // vertical condition: A_X X + T_U X + v(nabla_{alpha'} U)
  Vec axx = tensor_A(F, xf, xf, p).output.components;
  Vec tux = tensor_T(F, uf, xf, p).output.components;
  Vec vert_expr = axx + tux + vertical_part(F.total, sp, nab_u);

  // horizontal condition: H(nabla_{alpha'} X) + A_X U + T_U U, which equals
  // H nabla_X X + 2 A_X U + T_U U for the velocity-component extension.
  Vec axu = tensor_A(F, xf, uf, p).output.components;
  Vec tuu = tensor_T(F, uf, uf, p).output.components;
  Vec horz_expr = horizontal_part(F.total, sp, nab_x) + axu + tuu;

  return {g_norm(g, vert_expr), g_norm(g, horz_expr)};
}

ProjectedGeodesicReport projected_geodesic_residual(const SmoothSubmersionMap& F,
                                                    const DilationField& dilation,
                                                    const GeodesicTrace& trace) {
  ProjectedGeodesicReport report;
  ScalarField inv2 = inverse_square_dilation(dilation);
  for (const auto& s : trace.states) {
    const Vec& p = s.point;
    VerticalHorizontalSplit sp = split(F, p);
    Mat g = metric_at(F.total, p);
    Mat gb = metric_at(F.base, F.map(p));
    Mat jac = map_jacobian(F, p);
    Vec u = vertical_part(F.total, sp, s.velocity);
    Vec x = horizontal_part(F.total, sp, s.velocity);

    VectorField uf = projected_constant_field(F, s.velocity, true);
    VectorField xf = projected_constant_field(F, s.velocity, false);

    double lam = dilation.lambda.eval(p);
    double lam2 = lam * lam;
    double x_inv = directional_derivative(inv2, TangentVector{p, x}, F.total.metric.derivative_step);
    Vec grad_h = horizontal_part(F.total, sp, gradient(F.total, inv2, p).components);

    Vec axu = tensor_A(F, xf, uf, p).output.components;
    Vec tuu = tensor_T(F, uf, uf, p).output.components;
    Vec lhs = lam2 * x_inv * (jac * x) + jac * (2.0 * axu + tuu);
    Vec rhs = 0.5 * lam2 * x.dot(g * x) * (jac * grad_h);
    report.residual_max = std::max(report.residual_max, g_norm(gb, lhs - rhs));

    Vec axx = tensor_A(F, xf, xf, p).output.components;
    report.axx_norm_max = std::max(report.axx_norm_max, g_norm(g, axx));

    double vert2 = u.dot(g * u);
    double speed2 = s.velocity.dot(g * s.velocity);
    if (vert2 <= 1e-12 * std::max(1.0, speed2)) {
      // horizontal sample: the two-term specialization applies
      Vec cor = x_inv * (jac * x) - 0.5 * x.dot(g * x) * (jac * grad_h);
      report.cor_residual_max = std::max(report.cor_residual_max, g_norm(gb, cor));
      ++report.horizontal_samples;
    }
  }
  return report;
}

MeanCurvatureCheck mean_curvature_formula_check(const SmoothSubmersionMap& F,
                                                const DilationField& dilation,
                                                const ScalarField& f, const Vec& p) {
  const int m = F.m(), n = F.n();
  MeanCurvatureCheck out;
  VerticalHorizontalSplit s = split(F, p);
  Mat g = metric_at(F.total, p);
  ScalarField inv2 = inverse_square_dilation(dilation);
  double lam = dilation.lambda.eval(p);

  TangentVector h_direct = mean_curvature(F, p);

  Vec grad_f = gradient(F.total, f, p).components;
  Vec grad_inv_v = vertical_part(F.total, s, gradient(F.total, inv2, p).components);
  Vec h_formula = -grad_f;
  for (const Vec& u : s.vertical) {
    double c = u.dot(g * grad_inv_v);
    for (const Vec& x : s.horizontal)
      h_formula -= lam * lam / (2.0 * (m - n)) * c * x;
  }
  out.h_residual = g_norm(g, h_direct.components - h_formula);

  // horizontal divergence of H against the stated closed form
  SmoothSubmersionMap Fc = F;
  VectorField h_field;
  h_field.name = "H";
  h_field.eval = [Fc](const Vec& q) { return mean_curvature(Fc, q).components; };
  double div_h = 0.0;
  double lap_h_f = 0.0;
  for (std::size_t j = 0; j < s.horizontal.size(); ++j) {
    TangentVector xj{p, s.horizontal[j]};
    div_h += metric_inner(F.total, covariant_derivative(F.total, xj, h_field), xj);
    lap_h_f += hessian(F.total, f, xj, xj);
  }
  DilationField dil = dilation;
  ScalarField fiber_rate;
  fiber_rate.name = "sum g(U_i, grad_v 1/lambda^2)";
  fiber_rate.eval = [Fc, dil](const Vec& q) {
    VerticalHorizontalSplit sq = split(Fc, q);
    Mat gq = metric_at(Fc.total, q);
    Vec gv = vertical_part(Fc.total, sq,
                           gradient(Fc.total, inverse_square_dilation(dil), q).components);
    double acc = 0.0;
    for (const Vec& u : sq.vertical) acc += u.dot(gq * gv);
    return acc;
  };
  double sum_rate = 0.0;
  for (const Vec& x : s.horizontal)
    sum_rate += directional_derivative(fiber_rate, TangentVector{p, x},
                                       F.total.metric.derivative_step);
  double rhs = -lap_h_f - (n * lam * lam / (m - n)) * sum_rate;
  out.div_residual = std::abs(div_h - rhs);
  return out;
}

double vertical_scalar_curvature(const SmoothSubmersionMap& F, const Vec& p) {
  VerticalHorizontalSplit s = split(F, p);
  const int k = static_cast<int>(s.vertical.size());
  if (k < 2) return 0.0;
  double sum = 0.0;
  for (int i = 0; i < k; ++i)
    for (int j = 0; j < k; ++j) {
      if (i == j) continue;
      sum += sectional_curvature(F.total, p, TangentVector{p, s.vertical[i]},
                                 TangentVector{p, s.vertical[j]});
    }
  return sum;
}

ChartManifold fiber_chart(const SmoothSubmersionMap& F, const Vec& p) {
  const int m = F.m();
  const int k = m - F.n();
  SmoothSubmersionMap Fc = F;
  Vec base_point = p;

  // psi(u): flow of sum_i u_i V_i from p over unit parameter, with the
  // variational system integrated alongside so the induced metric
  // h_ab(u) = g(dpsi/du_a, dpsi/du_b) stays smooth in u.
  auto induced = [Fc, base_point, k, m](const Vec& u) {
    Vec z = base_point;
    Mat J = Mat::Zero(m, k);
    const int steps = 8;
    double h = 1.0 / steps;
    auto field_sum = [&](const Vec& q) {
      Vec w = Vec::Zero(m);
      for (int i = 0; i < k; ++i) w += u[i] * Fc.vertical_frame[i].eval(q);
      return w;
    };
    auto rhs = [&](const Vec& q, const Mat& Jq, Vec& dq, Mat& dJ) {
      dq = field_sum(q);
      dJ = Mat::Zero(m, k);
      Mat dsum = Mat::Zero(m, m);
      for (int i = 0; i < k; ++i) {
        dJ.col(i) += Fc.vertical_frame[i].eval(q);
        dsum += u[i] * field_jacobian(Fc.vertical_frame[i], q, Fc.total.metric.derivative_step);
      }
      dJ += dsum * Jq;
    };
    Vec k1q(m), k2q(m), k3q(m), k4q(m);
    Mat k1j, k2j, k3j, k4j;
    for (int s = 0; s < steps; ++s) {
      rhs(z, J, k1q, k1j);
      rhs(z + 0.5 * h * k1q, J + 0.5 * h * k1j, k2q, k2j);
      rhs(z + 0.5 * h * k2q, J + 0.5 * h * k2j, k3q, k3j);
      rhs(z + h * k3q, J + h * k3j, k4q, k4j);
      z += (h / 6.0) * (k1q + 2.0 * k2q + 2.0 * k3q + k4q);
      J += (h / 6.0) * (k1j + 2.0 * k2j + 2.0 * k3j + k4j);
    }
    Mat g = metric_at(Fc.total, z);
    Mat out = J.transpose() * g * J;
    return Mat(0.5 * (out + out.transpose()));
  };

  ChartManifold fiber;
  fiber.dim = k;
  fiber.name = F.total.name + ".fiber";
  fiber.metric.dim = k;
  fiber.metric.derivative_step = 1e-6;
  fiber.metric.eval = induced;
  return fiber;
}

double fiber_scalar_curvature(const SmoothSubmersionMap& F, const Vec& p) {
  ChartManifold fiber = fiber_chart(F, p);
  const int k = fiber.dim;
  if (k < 2) return 0.0;
  Vec origin = Vec::Zero(k);
  auto frame = orthonormal_frame(fiber, origin);
  double sum = 0.0;
  for (int i = 0; i < k; ++i)
    for (int j = 0; j < k; ++j) {
      if (i == j) continue;
      sum += sectional_curvature(fiber, origin, TangentVector{origin, frame[i]},
                                 TangentVector{origin, frame[j]});
    }
  return sum;
}

Vec fiber_ricci_diagonal(const SmoothSubmersionMap& F, const Vec& p) {
  ChartManifold fiber = fiber_chart(F, p);
  const int k = fiber.dim;
  Vec origin = Vec::Zero(k);
  auto frame = orthonormal_frame(fiber, origin);
  Vec ric = Vec::Zero(k);
  for (int i = 0; i < k; ++i)
    for (int j = 0; j < k; ++j) {
      if (i == j) continue;
      ric[i] += sectional_curvature(fiber, origin, TangentVector{origin, frame[i]},
                                    TangentVector{origin, frame[j]});
    }
  return ric;
}

namespace {

struct LambdaDerivatives {
  double lam = 0.0;
  double grad_h_f_norm2 = 0.0;     // |grad_H f|^2_g
  double grad_h_inv_norm2 = 0.0;   // |grad_H 1/lambda^2|^2_g
  double cross = 0.0;              // g(grad f, grad_H 1/lambda^2)
  double sum_x_inv = 0.0;          // sum_l X_l(1/lambda^2)
  Vec u_inv;                       // U_i(1/lambda^2) per vertical index
};

LambdaDerivatives lambda_derivatives(const SmoothSubmersionMap& F, const DilationField& dilation,
                                     const ScalarField& f, const Vec& p,
                                     const VerticalHorizontalSplit& s) {
  LambdaDerivatives out;
  Mat g = metric_at(F.total, p);
  ScalarField inv2 = inverse_square_dilation(dilation);
  out.lam = dilation.lambda.eval(p);
  Vec grad_f = gradient(F.total, f, p).components;
  Vec grad_inv = gradient(F.total, inv2, p).components;
  Vec grad_f_h = horizontal_part(F.total, s, grad_f);
  Vec grad_inv_h = horizontal_part(F.total, s, grad_inv);
  out.grad_h_f_norm2 = grad_f_h.dot(g * grad_f_h);
  out.grad_h_inv_norm2 = grad_inv_h.dot(g * grad_inv_h);
  out.cross = grad_f.dot(g * grad_inv_h);
  out.u_inv = Vec::Zero(static_cast<int>(s.vertical.size()));
  for (std::size_t i = 0; i < s.vertical.size(); ++i)
    out.u_inv[static_cast<int>(i)] = s.vertical[i].dot(g * grad_inv);
  for (const Vec& x : s.horizontal) out.sum_x_inv += x.dot(g * grad_inv);
  return out;
}

}  // namespace

CurvatureIdentityReport vertical_curvature_identity_residual(const SmoothSubmersionMap& F,
                                                    const DilationField& dilation,
                                                    const ScalarField& f, const Vec& p) {
  const int fibers = F.m() - F.n();
  CurvatureIdentityReport report;
  if (fibers < 2) {
    report.trivial = true;
    report.note = "identity is trivial for fibers of dimension < 2";
    return report;
  }
  VerticalHorizontalSplit s = split(F, p);
  LambdaDerivatives d = lambda_derivatives(F, dilation, f, p, s);
  double lam2 = d.lam * d.lam;
  double lam4 = lam2 * lam2;

  report.lhs = vertical_scalar_curvature(F, p);
  double khat = fiber_scalar_curvature(F, p);
  double bracket = lam2 * d.grad_h_f_norm2 - 0.25 * lam4 * d.grad_h_inv_norm2 + lam2 * d.cross;
  double tail = 0.0;
  for (int i = 0; i < fibers; ++i) tail += d.sum_x_inv * d.u_inv[i];
  tail *= 0.5 * lam4 * (fibers - 1);
  report.rhs = khat - fibers * (fibers - 1) * bracket - tail;
  report.residual = std::abs(report.lhs - report.rhs);
  report.terms = {{"K_v", report.lhs},
                  {"Khat", khat},
                  {"grad_H_f_term", lam2 * d.grad_h_f_norm2},
                  {"grad_H_inv_term", 0.25 * lam4 * d.grad_h_inv_norm2},
                  {"cross_term", lam2 * d.cross},
                  {"free_index_term", tail}};
  report.note = "trailing free horizontal index summed over l = 1..n";
  return report;
}

CurvatureIdentityReport ricci_identity_residual(const SmoothSubmersionMap& F,
                                                const DilationField& dilation,
                                                const ScalarField& f, const Vec& p, int i,
                                                std::optional<double> declared_lambda_f) {
  const int fibers = F.m() - F.n();
  CurvatureIdentityReport report;
  if (fibers < 2) {
    report.trivial = true;
    report.note = "Ricci identity is trivial for fibers of dimension < 2";
    return report;
  }
  if (i < 0 || i >= fibers) throw ArgumentError("vertical index out of range");

  Vec ric_hat = fiber_ricci_diagonal(F, p);
  double anisotropy = ric_hat.maxCoeff() - ric_hat.minCoeff();
  if (anisotropy > 1e-4 * std::max(1.0, ric_hat.lpNorm<Eigen::Infinity>()))
    throw PreconditionError("fibers are not Einstein: measured Ricci anisotropy " +
                            std::to_string(anisotropy));
  double lambda_f = declared_lambda_f ? *declared_lambda_f : ric_hat[i];
  if (declared_lambda_f &&
      std::abs(ric_hat[i] - *declared_lambda_f) > 1e-4 * std::max(1.0, std::abs(*declared_lambda_f)))
    throw PreconditionError("declared Einstein constant " + std::to_string(*declared_lambda_f) +
                            " does not match the measured fiber Ricci " +
                            std::to_string(ric_hat[i]));

  VerticalHorizontalSplit s = split(F, p);
  LambdaDerivatives d = lambda_derivatives(F, dilation, f, p, s);
  double lam2 = d.lam * d.lam;
  double lam4 = lam2 * lam2;

  double sum_sec = 0.0;
  for (int j = 0; j < fibers; ++j) {
    if (j == i) continue;
    sum_sec += sectional_curvature(F.total, p, TangentVector{p, s.vertical[i]},
                                   TangentVector{p, s.vertical[j]});
  }
  report.lhs = (fibers - 1) * sum_sec;

  double bracket = lam2 * d.grad_h_f_norm2 - 0.25 * lam4 * d.grad_h_inv_norm2 + lam2 * d.cross;
  double u_sum = 0.0;
  for (int j = 0; j < fibers; ++j)
    if (j != i) u_sum += d.u_inv[j];
  double tail = (fibers - 1) * 0.25 * lam4 * ((fibers - 1) * d.u_inv[i] + u_sum) * d.sum_x_inv;
  report.rhs = lambda_f - (fibers - 1) * (fibers - 1) * bracket - tail;
  report.residual = std::abs(report.lhs - report.rhs);
  report.terms = {{"Ric_v", report.lhs},
                  {"lambda_f", lambda_f},
                  {"bracket", bracket},
                  {"free_index_term", tail}};
  report.note = declared_lambda_f ? "lambda_f declared by scenario"
                                  : "lambda_f measured from the fiber Ricci tensor";
  return report;
}

PotentialEstimate infer_mean_curvature_potential(const SmoothSubmersionMap& F,
                                                 const std::vector<Vec>& points,
                                                 double umbilical_tolerance) {
  if (points.empty()) throw ArgumentError("potential inference needs sample points");
  for (const Vec& p : points) {
    double u = umbilical_residual(F, p);
    if (u > umbilical_tolerance)
      throw PreconditionError("fibers are not umbilical within tolerance (residual " +
                              std::to_string(u) + ")");
  }
  PotentialEstimate out;
  SmoothSubmersionMap Fc = F;
  // 1-form omega_i = -g_ij H^j whose closedness certifies a local potential
  auto one_form = [Fc](const Vec& q) {
    Mat g = metric_at(Fc.total, q);
    return Vec(-(g * mean_curvature(Fc, q).components));
  };
  const int m = F.m();
  for (const Vec& p : points) {
    out.gradients.push_back(Vec(-mean_curvature(F, p).components));
    double h = 1e-5;
    Mat domega(m, m);
    for (int i = 0; i < m; ++i) {
      Vec pp = p, pm = p;
      pp[i] += h;
      pm[i] -= h;
      domega.col(i) = (one_form(pp) - one_form(pm)) / (2.0 * h);
    }
    for (int i = 0; i < m; ++i)
      for (int j = i + 1; j < m; ++j)
        out.closedness_residual =
            std::max(out.closedness_residual, std::abs(domega(j, i) - domega(i, j)));
  }
  return out;
}

}  // namespace clairaut
