#pragma once

#include "clairaut/chart_geometry.hpp"

namespace clairaut {

/// A smooth submersion F: total -> base, given by chart expressions, with
/// declared smooth frame fields spanning ker F* and its g-orthogonal
/// complement. Horizontal frame fields are required to be basic; the
/// analyzer verifies the frame invariants rather than deriving frames.
struct SmoothSubmersionMap {
  ChartManifold total;
  ChartManifold base;
  std::function<Vec(const Vec&)> map;       // m -> n components
  std::function<Mat(const Vec&)> jacobian;  // optional analytic n x m
  std::vector<VectorField> vertical_frame;
  std::vector<VectorField> horizontal_frame;

  int m() const { return total.dim; }
  int n() const { return base.dim; }
};

Mat map_jacobian(const SmoothSubmersionMap& F, const Vec& p);

/// Pushforward F_* v expressed in base chart components at F(p).
Vec pushforward(const SmoothSubmersionMap& F, const TangentVector& v);

/// g-orthonormal bases of ker F* and its complement at one point, built by
/// Gram-Schmidt over the declared frames in declared order.
struct VerticalHorizontalSplit {
  Vec at;
  std::vector<Vec> vertical;
  std::vector<Vec> horizontal;
};

VerticalHorizontalSplit split(const SmoothSubmersionMap& F, const Vec& p);

Vec vertical_part(const ChartManifold& man, const VerticalHorizontalSplit& s, const Vec& v);
Vec horizontal_part(const ChartManifold& man, const VerticalHorizontalSplit& s, const Vec& v);

/// The conformal scale factor lambda(p) in g'(F*X, F*Y) = lambda^2 g(X, Y).
struct DilationField {
  ScalarField lambda;
  bool analytic = false;
};

/// Pointwise estimate of lambda from the first horizontal direction.
DilationField estimate_dilation(const SmoothSubmersionMap& F);

/// 1/lambda^2 as a scalar field (with exact partials when lambda has them).
ScalarField inverse_square_dilation(const DilationField& d);

struct ConformalityReport {
  DilationField dilation;
  std::vector<Vec> points;
  std::vector<double> lambdas;
  double residual_max = 0.0;
  double residual_mean = 0.0;
  double tolerance = 0.0;
  bool conformal = false;
};

/// Checks g'(F*X, F*Y) = lambda^2 g(X, Y) over all horizontal pairs at the
/// sampled points; lambda estimated from the first horizontal basis vector
/// unless the scenario supplies it analytically.
ConformalityReport check_conformal(const SmoothSubmersionMap& F, const std::vector<Vec>& points,
                                   const std::optional<DilationField>& analytic = {});

struct ONeillValue {
  Vec at;
  char kind = 'T';
  TangentVector output;
};

/// T_E W = H nabla_{vE} vW + v nabla_{vE} H W.
ONeillValue tensor_T(const SmoothSubmersionMap& F, const VectorField& e, const VectorField& w,
                     const Vec& p);

/// A_E W = H nabla_{HE} vW + v nabla_{HE} H W.
ONeillValue tensor_A(const SmoothSubmersionMap& F, const VectorField& e, const VectorField& w,
                     const Vec& p);

/// | A_X Y - 1/2 { v[X,Y] - lambda^2 g(X,Y) grad_v(1/lambda^2) } |_g.
double a_formula_residual(const SmoothSubmersionMap& F, const DilationField& dilation,
                          const VectorField& x, const VectorField& y, const Vec& p);

/// i-th vertical (resp. horizontal) vector of the orthonormal split,
/// extended as a smooth field so it can be differentiated.
VectorField orthonormal_vertical_field(const SmoothSubmersionMap& F, int i);
VectorField orthonormal_horizontal_field(const SmoothSubmersionMap& F, int i);

/// Extends a single tangent vector to a smooth field by projecting its
/// frozen components onto the vertical (resp. horizontal) distribution.
VectorField projected_constant_field(const SmoothSubmersionMap& F, const Vec& components,
                                     bool vertical);

/// H = 1/(m-n) sum_i T_{U_i} U_i over the orthonormal vertical basis.
TangentVector mean_curvature(const SmoothSubmersionMap& F, const Vec& p);

/// max over vertical orthonormal pairs of | T_{U_i} U_j - delta_ij H |_g.
double umbilical_residual(const SmoothSubmersionMap& F, const Vec& p);

/// Verifies that F* X is constant along fiber directions at p.
void require_basic(const SmoothSubmersionMap& F, const VectorField& x, const Vec& p,
                   double tol = 1e-6);

/// Second fundamental form of the map, computed two ways: directly through
/// the pullback connection, (nabla F*)(X,Y) = nabla^B_{F*X} F*Y - F*(nabla_X Y),
/// and through the conformal closed form in terms of lambda.
struct SecondFundamentalForm {
  Vec at;
  Vec direct;     // base chart components at F(p)
  Vec conformal;  // base chart components at F(p)
  double residual = 0.0;
};

SecondFundamentalForm second_fundamental_form(const SmoothSubmersionMap& F,
                                              const DilationField& dilation, const VectorField& x,
                                              const VectorField& y, const Vec& p);

/// (nabla F*)(X,Y) by the pullback route; tensorial, so any smooth
/// extension of the arguments gives the same value.
Vec map_second_fundamental(const SmoothSubmersionMap& F, const VectorField& x,
                           const VectorField& y, const Vec& p);

struct TensionField {
  Vec at;
  Vec trace_value;  // sum_k (nabla F*)(e_k, e_k) over a g-orthonormal frame
  Vec closed_form;  // (n-2) lambda^2/2 F*(grad_H 1/lambda^2) - (m-n) F*(H)
  double residual = 0.0;
};

TensionField tension_field(const SmoothSubmersionMap& F, const DilationField& dilation,
                           const Vec& p);

struct HarmonicityResult {
  bool harmonic = false;
  double gradient_max = 0.0;  // max_p |H grad f|_g
  double tension_max = 0.0;   // max_p |tau(F)|_g'
  double residual = 0.0;      // (m-n) max_p |F* grad f|_g'
  bool verdicts_agree = false;
};

/// Requires the submersion homothetic with fiber-constant dilation, then
/// tests harmonicity both through grad f and through the tension field.
HarmonicityResult harmonicity_check(const SmoothSubmersionMap& F, const DilationField& dilation,
                                    const ScalarField& f, const std::vector<Vec>& points,
                                    double tolerance = 1e-6);

}  // namespace clairaut
