#include "clairaut/chart_geometry.hpp"

#include <cmath>

namespace clairaut {

namespace {

constexpr double kSymmetryTol = 1e-12;

double fd_step(double base_step, double coord) {
  return base_step * std::max(1.0, std::abs(coord));
}

}  // namespace

Mat metric_at(const ChartManifold& man, const Vec& p) {
  if (p.size() != man.dim) throw ArgumentError("point dimension does not match manifold");
  if (!p.allFinite()) throw ArgumentError("chart point has non-finite coordinates");
  Mat g = man.metric.eval(p);
  if (g.rows() != man.dim || g.cols() != man.dim)
    throw EvaluationError("metric evaluator returned wrong shape");
  if (!g.allFinite()) throw NumericError("metric has non-finite entries");
  double scale = std::max(1.0, g.lpNorm<Eigen::Infinity>());
  if ((g - g.transpose()).lpNorm<Eigen::Infinity>() > kSymmetryTol * scale)
    throw ValidationError("metric is not symmetric at sampled point");
  return 0.5 * (g + g.transpose());
}

Mat metric_inverse_at(const ChartManifold& man, const Vec& p) {
  Mat g = metric_at(man, p);
  Eigen::LLT<Mat> llt(g);
  if (llt.info() != Eigen::Success)
    throw SingularMetricError("metric is not positive-definite at sampled point");
  return llt.solve(Mat::Identity(man.dim, man.dim));
}

std::vector<Mat> metric_partials_at(const ChartManifold& man, const Vec& p) {
  const int m = man.dim;
  if (man.metric.partials) {
    auto dg = man.metric.partials(p);
    if (static_cast<int>(dg.size()) != m)
      throw EvaluationError("metric partials returned wrong shape");
    return dg;
  }
  std::vector<Mat> dg(m);
  for (int k = 0; k < m; ++k) {
    double h = fd_step(man.metric.derivative_step, p[k]);
    Vec pp = p, pm = p;
    pp[k] += h;
    pm[k] -= h;
    dg[k] = (man.metric.eval(pp) - man.metric.eval(pm)) / (2.0 * h);
  }
  return dg;
}

double metric_inner(const ChartManifold& man, const TangentVector& u, const TangentVector& v) {
  require_same_base(u, v);
  if (u.components.size() != man.dim || v.components.size() != man.dim)
    throw ArgumentError("tangent vector dimension mismatch");
  Mat g = metric_at(man, u.base);
  double val = u.components.dot(g * v.components);
  if (!std::isfinite(val)) throw NumericError("metric inner product is non-finite");
  return val;
}

double metric_norm(const ChartManifold& man, const TangentVector& u) {
  return std::sqrt(std::max(0.0, metric_inner(man, u, u)));
}

ChristoffelTensor christoffel(const ChartManifold& man, const Vec& p) {
  const int m = man.dim;
  Mat ginv = metric_inverse_at(man, p);
  std::vector<Mat> dg = metric_partials_at(man, p);
  ChristoffelTensor out;
  out.at = p;
  out.values.assign(m, Mat::Zero(m, m));
  for (int k = 0; k < m; ++k)
    for (int i = 0; i < m; ++i)
      for (int j = i; j < m; ++j) {
        double sum = 0.0;
        for (int l = 0; l < m; ++l)
          sum += ginv(k, l) * (dg[i](j, l) + dg[j](i, l) - dg[l](i, j));
        out.values[k](i, j) = 0.5 * sum;
        out.values[k](j, i) = out.values[k](i, j);
      }
  return out;
}

Mat field_jacobian(const VectorField& field, const Vec& p, double step) {
  if (field.jacobian) return field.jacobian(p);
  const int m = static_cast<int>(p.size());
  Vec f0 = field.eval(p);
  Mat jac(f0.size(), m);
  for (int i = 0; i < m; ++i) {
    double h = fd_step(step, p[i]);
    Vec pp = p, pm = p;
    pp[i] += h;
    pm[i] -= h;
    Vec fp, fm;
    try {
      fp = field.eval(pp);
      fm = field.eval(pm);
    } catch (const std::exception& e) {
      throw EvaluationError(std::string("field evaluation failed inside difference stencil: ") +
                            e.what());
    }
    if (!fp.allFinite() || !fm.allFinite())
      throw EvaluationError("field evaluation non-finite inside difference stencil");
    jac.col(i) = (fp - fm) / (2.0 * h);
  }
  return jac;
}

TangentVector covariant_derivative(const ChartManifold& man, const TangentVector& along,
                                   const VectorField& field) {
  const Vec& p = along.base;
  ChristoffelTensor gam = christoffel(man, p);
  Mat jac = field_jacobian(field, p, man.metric.derivative_step);
  Vec fp = field.eval(p);
  Vec out = jac * along.components;
  for (int k = 0; k < man.dim; ++k) out[k] += along.components.dot(gam.values[k] * fp);
  return TangentVector{p, out};
}

TangentVector riemann_curvature(const ChartManifold& man, const Vec& p, const TangentVector& x,
                                const TangentVector& y, const TangentVector& z) {
  const int m = man.dim;
  ChristoffelTensor gam = christoffel(man, p);
  // dGam[i][k](j,l) -> d_i Gamma^k_jl ; one central difference per direction.
  std::vector<std::vector<Mat>> dgam(m);
  for (int i = 0; i < m; ++i) {
    double h = fd_step(1e-5, p[i]);
    Vec pp = p, pm = p;
    pp[i] += h;
    pm[i] -= h;
    ChristoffelTensor gp = christoffel(man, pp);
    ChristoffelTensor gm = christoffel(man, pm);
    dgam[i].resize(m);
    for (int k = 0; k < m; ++k) dgam[i][k] = (gp.values[k] - gm.values[k]) / (2.0 * h);
  }
  // R(x,y)z^l = (d_i Gam^l_jk - d_j Gam^l_ik + Gam^l_ip Gam^p_jk - Gam^l_jp Gam^p_ik) x^i y^j z^k
  Vec out = Vec::Zero(m);
  for (int l = 0; l < m; ++l) {
    double acc = 0.0;
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < m; ++j) {
        if (x.components[i] == 0.0 && y.components[j] == 0.0) continue;
        for (int k = 0; k < m; ++k) {
          double term = dgam[i][l](j, k) - dgam[j][l](i, k);
          for (int q = 0; q < m; ++q)
            term += gam.values[l](i, q) * gam.values[q](j, k) -
                    gam.values[l](j, q) * gam.values[q](i, k);
          acc += term * x.components[i] * y.components[j] * z.components[k];
        }
      }
    out[l] = acc;
  }
  return TangentVector{p, out};
}

double sectional_curvature(const ChartManifold& man, const Vec& p, const TangentVector& u,
                           const TangentVector& v) {
  Mat g = metric_at(man, p);
  double guu = u.components.dot(g * u.components);
  double gvv = v.components.dot(g * v.components);
  double guv = u.components.dot(g * v.components);
  double den = guu * gvv - guv * guv;
  if (den < 1e-14) throw DegeneratePlaneError("sectional curvature of a degenerate plane");
  TangentVector rv = riemann_curvature(man, p, u, v, v);
  return rv.components.dot(g * u.components) / den;
}

double directional_derivative(const ScalarField& f, const TangentVector& dir, double step) {
  if (f.partials) return f.partials(dir.base).dot(dir.components);
  const Vec& p = dir.base;
  double acc = 0.0;
  for (int i = 0; i < p.size(); ++i) {
    if (dir.components[i] == 0.0) continue;
    double h = fd_step(step, p[i]);
    Vec pp = p, pm = p;
    pp[i] += h;
    pm[i] -= h;
    acc += dir.components[i] * (f.eval(pp) - f.eval(pm)) / (2.0 * h);
  }
  return acc;
}

TangentVector gradient(const ChartManifold& man, const ScalarField& f, const Vec& p) {
  const int m = man.dim;
  Vec df(m);
  if (f.partials) {
    df = f.partials(p);
  } else {
    for (int i = 0; i < m; ++i) {
      double h = fd_step(man.metric.derivative_step, p[i]);
      Vec pp = p, pm = p;
      pp[i] += h;
      pm[i] -= h;
      df[i] = (f.eval(pp) - f.eval(pm)) / (2.0 * h);
    }
  }
  Mat g = metric_at(man, p);
  Eigen::LLT<Mat> llt(g);
  if (llt.info() != Eigen::Success)
    throw SingularMetricError("metric is not positive-definite at sampled point");
  return TangentVector{p, llt.solve(df)};
}

VectorField gradient_field(const ChartManifold& man, const ScalarField& f) {
  VectorField out;
  out.name = "grad(" + f.name + ")";
  out.eval = [man, f](const Vec& q) { return gradient(man, f, q).components; };
  return out;
}

std::vector<Vec> gram_schmidt(const Mat& g, const std::vector<Vec>& seeds) {
  std::vector<Vec> basis;
  basis.reserve(seeds.size());
  for (const Vec& seed : seeds) {
    Vec v = seed;
    for (const Vec& e : basis) v -= e.dot(g * v) * e;
    double norm2 = v.dot(g * v);
    if (!(norm2 > 0.0) || std::sqrt(norm2) < 1e-12)
      throw DegenerateFrameError("Gram-Schmidt produced a vector of norm below 1e-12");
    basis.push_back(v / std::sqrt(norm2));
  }
  return basis;
}

std::vector<Vec> orthonormal_frame(const ChartManifold& man, const Vec& p) {
  Mat g = metric_at(man, p);
  std::vector<Vec> axes;
  for (int i = 0; i < man.dim; ++i) axes.push_back(Vec::Unit(man.dim, i));
  return gram_schmidt(g, axes);
}

double divergence(const ChartManifold& man, const VectorField& field, const Vec& p) {
  auto frame = orthonormal_frame(man, p);
  double out = 0.0;
  for (const Vec& e : frame) {
    TangentVector dir{p, e};
    TangentVector de = covariant_derivative(man, dir, field);
    out += metric_inner(man, de, dir);
  }
  return out;
}

double laplacian(const ChartManifold& man, const ScalarField& f, const Vec& p) {
  return divergence(man, gradient_field(man, f), p);
}

double hessian(const ChartManifold& man, const ScalarField& f, const TangentVector& u,
               const TangentVector& v) {
  require_same_base(u, v);
  TangentVector du = covariant_derivative(man, u, gradient_field(man, f));
  return metric_inner(man, du, v);
}

Vec lie_bracket(const VectorField& x, const VectorField& y, const Vec& p, double step) {
  Mat jx = field_jacobian(x, p, step);
  Mat jy = field_jacobian(y, p, step);
  return jy * x.eval(p) - jx * y.eval(p);
}

}  // namespace clairaut
