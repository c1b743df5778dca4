#pragma once

#include "clairaut/types.hpp"

namespace clairaut {

/// Metric tensor field over one global chart. `partials`, when present,
/// returns the exact entries d g_ij / d x_k as a dim-long list of matrices
/// and takes precedence over central finite differences of `eval`.
struct MetricField {
  int dim = 0;
  std::function<Mat(const Vec&)> eval;
  std::function<std::vector<Mat>(const Vec&)> partials;
  double derivative_step = 1e-6;
};

struct ChartManifold {
  int dim = 0;
  MetricField metric;
  std::string name;
};

/// Levi-Civita symbols at one point; values[k](i,j) = Gamma^k_ij.
struct ChristoffelTensor {
  Vec at;
  std::vector<Mat> values;
};

/// Evaluates the metric with symmetry and finiteness checks.
Mat metric_at(const ChartManifold& man, const Vec& p);

/// d g_ij / d x_k, analytic when supplied, otherwise central differences
/// with step derivative_step * max(1, |x_k|).
std::vector<Mat> metric_partials_at(const ChartManifold& man, const Vec& p);

/// Inverse metric via Cholesky; throws SingularMetricError off the cone.
Mat metric_inverse_at(const ChartManifold& man, const Vec& p);

double metric_inner(const ChartManifold& man, const TangentVector& u, const TangentVector& v);
double metric_norm(const ChartManifold& man, const TangentVector& u);

/// Gamma^k_ij = 1/2 g^{kl} (d_i g_jl + d_j g_il - d_l g_ij).
ChristoffelTensor christoffel(const ChartManifold& man, const Vec& p);

/// (nabla_along field)^k = along^i d_i field^k + Gamma^k_ij along^i field^j.
TangentVector covariant_derivative(const ChartManifold& man, const TangentVector& along,
                                   const VectorField& field);

/// R(x,y)z from Christoffel symbols and their first finite differences.
TangentVector riemann_curvature(const ChartManifold& man, const Vec& p, const TangentVector& x,
                                const TangentVector& y, const TangentVector& z);

/// sec(u,v) = g(R(u,v)v, u) / (g(u,u) g(v,v) - g(u,v)^2).
double sectional_curvature(const ChartManifold& man, const Vec& p, const TangentVector& u,
                           const TangentVector& v);

/// Metric gradient: solves g x = df so that g(grad f, X) = X(f).
TangentVector gradient(const ChartManifold& man, const ScalarField& f, const Vec& p);

/// The metric gradient of f packaged as a field evaluable near any point.
VectorField gradient_field(const ChartManifold& man, const ScalarField& f);

/// div X = sum_k g(nabla_{e_k} X, e_k) over the Gram-Schmidt frame built
/// from coordinate axes in index order.
double divergence(const ChartManifold& man, const VectorField& field, const Vec& p);

double laplacian(const ChartManifold& man, const ScalarField& f, const Vec& p);

/// Hess f(u,v) = g(nabla_u grad f, v).
double hessian(const ChartManifold& man, const ScalarField& f, const TangentVector& u,
               const TangentVector& v);

/// Gram-Schmidt with respect to the inner product g, in the order given.
/// Throws DegenerateFrameError when a projected vector drops below 1e-12.
std::vector<Vec> gram_schmidt(const Mat& g, const std::vector<Vec>& seeds);

/// g-orthonormal frame from the coordinate axes at p.
std::vector<Vec> orthonormal_frame(const ChartManifold& man, const Vec& p);

/// Directional derivative of a scalar function along a tangent vector,
/// analytic when partials are available.
double directional_derivative(const ScalarField& f, const TangentVector& dir, double step);

/// d field^k / d x_i as a matrix (rows k, cols i); analytic or central FD.
Mat field_jacobian(const VectorField& field, const Vec& p, double step);

/// Lie bracket [X,Y]^k = X^i d_i Y^k - Y^i d_i X^k.
Vec lie_bracket(const VectorField& x, const VectorField& y, const Vec& p, double step);

}  // namespace clairaut
