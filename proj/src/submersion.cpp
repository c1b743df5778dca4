#include "clairaut/submersion.hpp"

#include <algorithm>
#include <cmath>

namespace clairaut {

namespace {

double fd_step(double base_step, double coord) {
  return base_step * std::max(1.0, std::abs(coord));
}

Vec project_onto(const Mat& g, const std::vector<Vec>& basis, const Vec& v) {
  Vec out = Vec::Zero(v.size());
  for (const Vec& e : basis) out += e.dot(g * v) * e;
  return out;
}

// q -> projection of w(q) onto the vertical (resp. horizontal) space at q.
VectorField projected_field_of(const SmoothSubmersionMap& F, const VectorField& w, bool vertical) {
  SmoothSubmersionMap Fc = F;
  VectorField wf = w;
  VectorField out;
  out.name = (vertical ? std::string("v(") : std::string("H(")) + w.name + ")";
  out.eval = [Fc, wf, vertical](const Vec& q) {
    VerticalHorizontalSplit s = split(Fc, q);
    Vec val = wf.eval(q);
    return vertical ? vertical_part(Fc.total, s, val) : horizontal_part(Fc.total, s, val);
  };
  return out;
}

}  // namespace

Mat map_jacobian(const SmoothSubmersionMap& F, const Vec& p) {
  if (F.jacobian) return F.jacobian(p);
  const int m = F.m();
  Mat jac(F.n(), m);
  for (int i = 0; i < m; ++i) {
    double h = fd_step(F.total.metric.derivative_step, p[i]);
    Vec pp = p, pm = p;
    pp[i] += h;
    pm[i] -= h;
    jac.col(i) = (F.map(pp) - F.map(pm)) / (2.0 * h);
  }
  return jac;
}

Vec pushforward(const SmoothSubmersionMap& F, const TangentVector& v) {
  return map_jacobian(F, v.base) * v.components;
}

VerticalHorizontalSplit split(const SmoothSubmersionMap& F, const Vec& p) {
  const int m = F.m(), n = F.n();
  Mat jac = map_jacobian(F, p);
  Eigen::ColPivHouseholderQR<Mat> qr(jac.transpose());
  qr.setThreshold(1e-9);
  if (qr.rank() < n)
    throw NotASubmersionError("map differential has rank " + std::to_string(qr.rank()) +
                              " < " + std::to_string(n) + " at sampled point");

  Mat g = metric_at(F.total, p);
  std::vector<Vec> seeds;
  seeds.reserve(m);
  for (const auto& vf : F.vertical_frame) seeds.push_back(vf.eval(p));
  for (const auto& hf : F.horizontal_frame) seeds.push_back(hf.eval(p));
  if (static_cast<int>(seeds.size()) != m)
    throw ArgumentError("declared frames do not span the tangent space");
  std::vector<Vec> basis = gram_schmidt(g, seeds);

  VerticalHorizontalSplit out;
  out.at = p;
  out.vertical.assign(basis.begin(), basis.begin() + (m - n));
  out.horizontal.assign(basis.begin() + (m - n), basis.end());
  for (const Vec& u : out.vertical)
    if ((jac * u).lpNorm<Eigen::Infinity>() > 1e-9 * std::max(1.0, jac.lpNorm<Eigen::Infinity>()))
      throw ValidationError("declared vertical frame is not annihilated by the differential");
  return out;
}

Vec vertical_part(const ChartManifold& man, const VerticalHorizontalSplit& s, const Vec& v) {
  return project_onto(metric_at(man, s.at), s.vertical, v);
}

Vec horizontal_part(const ChartManifold& man, const VerticalHorizontalSplit& s, const Vec& v) {
  return project_onto(metric_at(man, s.at), s.horizontal, v);
}

DilationField estimate_dilation(const SmoothSubmersionMap& F) {
  DilationField out;
  out.analytic = false;
  out.lambda.name = "lambda(estimated)";
  SmoothSubmersionMap Fc = F;
  out.lambda.eval = [Fc](const Vec& q) {
    VerticalHorizontalSplit s = split(Fc, q);
    const Vec& x = s.horizontal.front();
    Vec fx = map_jacobian(Fc, q) * x;
    Mat gb = metric_at(Fc.base, Fc.map(q));
    double num = fx.dot(gb * fx);
    if (!(num > 0.0)) throw NumericError("zero-norm pushforward of a horizontal unit vector");
    return std::sqrt(num);  // g(x,x) = 1 for the orthonormal basis vector
  };
  return out;
}

ScalarField inverse_square_dilation(const DilationField& d) {
  ScalarField out;
  out.name = "1/lambda^2";
  ScalarField lam = d.lambda;
  out.eval = [lam](const Vec& q) {
    double l = lam.eval(q);
    if (!(l > 0.0)) throw DomainError("dilation must be positive");
    return 1.0 / (l * l);
  };
  if (lam.partials) {
    out.partials = [lam](const Vec& q) {
      double l = lam.eval(q);
      return Vec(-2.0 / (l * l * l) * lam.partials(q));
    };
  }
  return out;
}

ConformalityReport check_conformal(const SmoothSubmersionMap& F, const std::vector<Vec>& points,
                                   const std::optional<DilationField>& analytic) {
  if (points.empty()) throw ArgumentError("conformality check needs at least one point");
  ConformalityReport report;
  report.dilation = analytic ? *analytic : estimate_dilation(F);
  report.tolerance = 1e-8;
  double sum = 0.0;
  for (const Vec& p : points) {
    VerticalHorizontalSplit s = split(F, p);
    Mat jac = map_jacobian(F, p);
    Mat gb = metric_at(F.base, F.map(p));
    Mat g = metric_at(F.total, p);
    double lam = report.dilation.lambda.eval(p);
    double lam2 = lam * lam;
    report.lambdas.push_back(lam);
    double res = 0.0;
    for (std::size_t i = 0; i < s.horizontal.size(); ++i)
      for (std::size_t j = i; j < s.horizontal.size(); ++j) {
        Vec fi = jac * s.horizontal[i];
        Vec fj = jac * s.horizontal[j];
        double lhs = fi.dot(gb * fj);
        double rhs = lam2 * s.horizontal[i].dot(g * s.horizontal[j]);
        res = std::max(res, std::abs(lhs - rhs));
      }
    report.points.push_back(p);
    report.residual_max = std::max(report.residual_max, res);
    sum += res;
  }
  report.residual_mean = sum / static_cast<double>(points.size());
  double scale = std::max(1.0, *std::max_element(report.lambdas.begin(), report.lambdas.end()));
  report.conformal = report.residual_max <= report.tolerance * scale * scale;
  return report;
}

VectorField projected_constant_field(const SmoothSubmersionMap& F, const Vec& components,
                                     bool vertical) {
  SmoothSubmersionMap Fc = F;
  Vec frozen = components;
  VectorField out;
  out.name = vertical ? "v(const)" : "H(const)";
  out.eval = [Fc, frozen, vertical](const Vec& q) {
    VerticalHorizontalSplit s = split(Fc, q);
    return vertical ? vertical_part(Fc.total, s, frozen) : horizontal_part(Fc.total, s, frozen);
  };
  return out;
}

VectorField orthonormal_vertical_field(const SmoothSubmersionMap& F, int i) {
  SmoothSubmersionMap Fc = F;
  VectorField out;
  out.name = "U" + std::to_string(i + 1);
  out.eval = [Fc, i](const Vec& q) { return split(Fc, q).vertical.at(i); };
  return out;
}

VectorField orthonormal_horizontal_field(const SmoothSubmersionMap& F, int i) {
  SmoothSubmersionMap Fc = F;
  VectorField out;
  out.name = "X" + std::to_string(i + 1);
  out.eval = [Fc, i](const Vec& q) { return split(Fc, q).horizontal.at(i); };
  return out;
}

namespace {

// Shared body of the O'Neill tensors: first argument projected to the
// stated distribution, derivative split into the two projected summands.
ONeillValue oneill(const SmoothSubmersionMap& F, const VectorField& e, const VectorField& w,
                   const Vec& p, bool first_vertical) {
  VerticalHorizontalSplit s = split(F, p);
  Vec dir = first_vertical ? vertical_part(F.total, s, e.eval(p))
                           : horizontal_part(F.total, s, e.eval(p));
  TangentVector along{p, dir};

  VectorField w_vert = projected_field_of(F, w, true);
  VectorField w_horz = projected_field_of(F, w, false);

  TangentVector d_vert = covariant_derivative(F.total, along, w_vert);
  TangentVector d_horz = covariant_derivative(F.total, along, w_horz);

  ONeillValue out;
  out.at = p;
  out.kind = first_vertical ? 'T' : 'A';
  out.output = TangentVector{p, horizontal_part(F.total, s, d_vert.components) +
                                    vertical_part(F.total, s, d_horz.components)};
  return out;
}

}  // namespace

ONeillValue tensor_T(const SmoothSubmersionMap& F, const VectorField& e, const VectorField& w,
                     const Vec& p) {
  return oneill(F, e, w, p, true);
}

ONeillValue tensor_A(const SmoothSubmersionMap& F, const VectorField& e, const VectorField& w,
                     const Vec& p) {
  return oneill(F, e, w, p, false);
}

double a_formula_residual(const SmoothSubmersionMap& F, const DilationField& dilation,
                          const VectorField& x, const VectorField& y, const Vec& p) {
  ONeillValue axy = tensor_A(F, x, y, p);
  VerticalHorizontalSplit s = split(F, p);
  Mat g = metric_at(F.total, p);

  Vec bracket = lie_bracket(x, y, p, F.total.metric.derivative_step);
  Vec v_bracket = vertical_part(F.total, s, bracket);

  ScalarField inv2 = inverse_square_dilation(dilation);
  Vec grad_inv = gradient(F.total, inv2, p).components;
  Vec v_grad = vertical_part(F.total, s, grad_inv);

  double lam = dilation.lambda.eval(p);
  double gxy = x.eval(p).dot(g * y.eval(p));
  Vec formula = 0.5 * (v_bracket - lam * lam * gxy * v_grad);

  Vec diff = axy.output.components - formula;
  return std::sqrt(std::max(0.0, diff.dot(g * diff)));
}

TangentVector mean_curvature(const SmoothSubmersionMap& F, const Vec& p) {
  const int fibers = F.m() - F.n();
  Vec sum = Vec::Zero(F.m());
  for (int i = 0; i < fibers; ++i) {
    VectorField ui = orthonormal_vertical_field(F, i);
    sum += tensor_T(F, ui, ui, p).output.components;
  }
  return TangentVector{p, sum / static_cast<double>(fibers)};
}

double umbilical_residual(const SmoothSubmersionMap& F, const Vec& p) {
  const int fibers = F.m() - F.n();
  TangentVector h = mean_curvature(F, p);
  Mat g = metric_at(F.total, p);
  double res = 0.0;
  for (int i = 0; i < fibers; ++i)
    for (int j = i; j < fibers; ++j) {
      VectorField ui = orthonormal_vertical_field(F, i);
      VectorField uj = orthonormal_vertical_field(F, j);
      Vec tij = tensor_T(F, ui, uj, p).output.components;
      Vec expect = (i == j) ? h.components : Vec(Vec::Zero(F.m()));
      Vec diff = tij - expect;
      res = std::max(res, std::sqrt(std::max(0.0, diff.dot(g * diff))));
    }
  return res;
}

void require_basic(const SmoothSubmersionMap& F, const VectorField& x, const Vec& p, double tol) {
  VerticalHorizontalSplit s = split(F, p);
  Vec fx0 = map_jacobian(F, p) * x.eval(p);
  double scale = std::max(1.0, fx0.lpNorm<Eigen::Infinity>());
  for (const Vec& u : s.vertical) {
    double h = 1e-4;
    Vec pp = p + h * u, pm = p - h * u;
    Vec d = (map_jacobian(F, pp) * x.eval(pp) - map_jacobian(F, pm) * x.eval(pm)) / (2.0 * h);
    if (d.lpNorm<Eigen::Infinity>() > tol * scale)
      throw NotBasicError("field '" + x.name + "' is not basic: F* varies along the fiber (rate " +
                          std::to_string(d.lpNorm<Eigen::Infinity>()) + ")");
  }
}

Vec map_second_fundamental(const SmoothSubmersionMap& F, const VectorField& x,
                           const VectorField& y, const Vec& p) {
  // W(q) = J(q) y(q) are the components of F* y along F; then
  // (nabla F*)(x,y) = x(W) + Gamma^B(F*x, W) - F*(nabla_x y).
  SmoothSubmersionMap Fc = F;
  VectorField yf = y;
  VectorField w;
  w.eval = [Fc, yf](const Vec& q) { return Vec(map_jacobian(Fc, q) * yf.eval(q)); };

  const int n = F.n();
  Vec xw = Vec::Zero(n);
  for (int i = 0; i < F.m(); ++i) {
    double xi = x.eval(p)[i];
    if (xi == 0.0) continue;
    double h = fd_step(F.total.metric.derivative_step, p[i]);
    Vec pp = p, pm = p;
    pp[i] += h;
    pm[i] -= h;
    xw += xi * (w.eval(pp) - w.eval(pm)) / (2.0 * h);
  }

  Vec fx = map_jacobian(F, p) * x.eval(p);
  Vec wp = w.eval(p);
  ChristoffelTensor gam_b = christoffel(F.base, F.map(p));
  Vec corr(n);
  for (int k = 0; k < n; ++k) corr[k] = fx.dot(gam_b.values[k] * wp);

  TangentVector nab_xy = covariant_derivative(F.total, TangentVector{p, x.eval(p)}, y);
  Vec fnab = map_jacobian(F, p) * nab_xy.components;
  return xw + corr - fnab;
}

SecondFundamentalForm second_fundamental_form(const SmoothSubmersionMap& F,
                                              const DilationField& dilation, const VectorField& x,
                                              const VectorField& y, const Vec& p) {
  require_basic(F, x, p);
  require_basic(F, y, p);

  SecondFundamentalForm out;
  out.at = p;
  out.direct = map_second_fundamental(F, x, y, p);

  // -(lambda^2/2) { X(1/l^2) F*Y + Y(1/l^2) F*X - g(X,Y) F*(grad_H 1/l^2) }
  ScalarField inv2 = inverse_square_dilation(dilation);
  double lam = dilation.lambda.eval(p);
  double lam2 = lam * lam;
  Mat jac = map_jacobian(F, p);
  Vec xp = x.eval(p), yp = y.eval(p);
  Mat g = metric_at(F.total, p);
  double step = F.total.metric.derivative_step;
  double x_inv = directional_derivative(inv2, TangentVector{p, xp}, step);
  double y_inv = directional_derivative(inv2, TangentVector{p, yp}, step);
  VerticalHorizontalSplit s = split(F, p);
  Vec grad_h = horizontal_part(F.total, s, gradient(F.total, inv2, p).components);
  out.conformal =
      -(lam2 / 2.0) * (x_inv * (jac * yp) + y_inv * (jac * xp) - xp.dot(g * yp) * (jac * grad_h));

  Mat gb = metric_at(F.base, F.map(p));
  Vec diff = out.direct - out.conformal;
  out.residual = std::sqrt(std::max(0.0, diff.dot(gb * diff)));
  return out;
}

TensionField tension_field(const SmoothSubmersionMap& F, const DilationField& dilation,
                           const Vec& p) {
  const int m = F.m(), n = F.n();
  TensionField out;
  out.at = p;

  // trace over the orthonormal split frame; (nabla F*) is tensorial, so the
  // smooth orthonormal-field extensions are a legitimate basis choice.
  Vec trace = Vec::Zero(n);
  for (int i = 0; i < m - n; ++i) {
    VectorField ui = orthonormal_vertical_field(F, i);
    trace += map_second_fundamental(F, ui, ui, p);
  }
  for (int j = 0; j < n; ++j) {
    VectorField xj = orthonormal_horizontal_field(F, j);
    trace += map_second_fundamental(F, xj, xj, p);
  }
  out.trace_value = trace;

  ScalarField inv2 = inverse_square_dilation(dilation);
  double lam = dilation.lambda.eval(p);
  VerticalHorizontalSplit s = split(F, p);
  Vec grad_h = horizontal_part(F.total, s, gradient(F.total, inv2, p).components);
  Mat jac = map_jacobian(F, p);
  TangentVector h = mean_curvature(F, p);
  out.closed_form = (n - 2) * (lam * lam / 2.0) * (jac * grad_h) -
                    static_cast<double>(m - n) * (jac * h.components);

  Mat gb = metric_at(F.base, F.map(p));
  Vec diff = out.trace_value - out.closed_form;
  out.residual = std::sqrt(std::max(0.0, diff.dot(gb * diff)));
  return out;
}

HarmonicityResult harmonicity_check(const SmoothSubmersionMap& F, const DilationField& dilation,
                                    const ScalarField& f, const std::vector<Vec>& points,
                                    double tolerance) {
  ScalarField inv2 = inverse_square_dilation(dilation);
  double homothetic_max = 0.0, fiber_max = 0.0;
  for (const Vec& p : points) {
    VerticalHorizontalSplit s = split(F, p);
    Vec grad_inv = gradient(F.total, inv2, p).components;
    Mat g = metric_at(F.total, p);
    Vec h = horizontal_part(F.total, s, grad_inv);
    Vec v = vertical_part(F.total, s, grad_inv);
    homothetic_max = std::max(homothetic_max, std::sqrt(std::max(0.0, h.dot(g * h))));
    fiber_max = std::max(fiber_max, std::sqrt(std::max(0.0, v.dot(g * v))));
  }
  if (homothetic_max > tolerance)
    throw PreconditionError(
        "harmonicity characterization needs a homothetic submersion: |grad_H 1/lambda^2| = " +
        std::to_string(homothetic_max));
  if (fiber_max > tolerance)
    throw PreconditionError(
        "harmonicity characterization needs lambda constant on fibers: |grad_v 1/lambda^2| = " +
        std::to_string(fiber_max));

  HarmonicityResult out;
  for (const Vec& p : points) {
    VerticalHorizontalSplit s = split(F, p);
    Mat g = metric_at(F.total, p);
    Vec gf = gradient(F.total, f, p).components;
    Vec hgf = horizontal_part(F.total, s, gf);
    out.gradient_max = std::max(out.gradient_max, std::sqrt(std::max(0.0, hgf.dot(g * hgf))));

    TensionField tau = tension_field(F, dilation, p);
    Mat gb = metric_at(F.base, F.map(p));
    out.tension_max = std::max(
        out.tension_max, std::sqrt(std::max(0.0, tau.trace_value.dot(gb * tau.trace_value))));

    Vec fgf = map_jacobian(F, p) * gf;
    out.residual = std::max(out.residual, static_cast<double>(F.m() - F.n()) *
                                              std::sqrt(std::max(0.0, fgf.dot(gb * fgf))));
  }
  bool by_gradient = out.gradient_max <= tolerance;
  bool by_tension = out.tension_max <= tolerance * std::max(1.0, static_cast<double>(F.m() - F.n()));
  out.verdicts_agree = (by_gradient == by_tension);
  out.harmonic = by_gradient;
  return out;
}

}  // namespace clairaut
