#include "clairaut/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

namespace clairaut {

namespace ex = clairaut::expr;

namespace {

Mat eval_matrix(const std::vector<std::vector<ex::Expr>>& entries, const Vec& x) {
  const int k = static_cast<int>(entries.size());
  Mat out(k, k);
  for (int i = 0; i < k; ++i)
    for (int j = 0; j < k; ++j) out(i, j) = ex::eval(entries[i][j], x);
  return out;
}

MetricField metric_from_exprs(const std::vector<std::vector<ex::Expr>>& entries, int dim) {
  MetricField metric;
  metric.dim = dim;
  metric.eval = [entries](const Vec& x) { return eval_matrix(entries, x); };
  std::vector<std::vector<std::vector<ex::Expr>>> partials(dim);
  for (int k = 0; k < dim; ++k) {
    partials[k].resize(dim);
    for (int i = 0; i < dim; ++i) {
      partials[k][i].resize(dim);
      for (int j = 0; j < dim; ++j) partials[k][i][j] = ex::differentiate(entries[i][j], k);
    }
  }
  metric.partials = [partials, dim](const Vec& x) {
    std::vector<Mat> out(dim);
    for (int k = 0; k < dim; ++k) out[k] = eval_matrix(partials[k], x);
    return out;
  };
  return metric;
}

VectorField field_from_exprs(const std::vector<ex::Expr>& comps, int dim,
                             const std::string& name) {
  VectorField out;
  out.name = name;
  out.eval = [comps](const Vec& x) {
    Vec v(static_cast<int>(comps.size()));
    for (int k = 0; k < v.size(); ++k) v[k] = ex::eval(comps[k], x);
    return v;
  };
  std::vector<std::vector<ex::Expr>> jac(comps.size());
  for (std::size_t k = 0; k < comps.size(); ++k) {
    jac[k].resize(dim);
    for (int i = 0; i < dim; ++i) jac[k][i] = ex::differentiate(comps[k], i);
  }
  out.jacobian = [jac, dim](const Vec& x) {
    Mat m(static_cast<int>(jac.size()), dim);
    for (int k = 0; k < m.rows(); ++k)
      for (int i = 0; i < dim; ++i) m(k, i) = ex::eval(jac[k][i], x);
    return m;
  };
  return out;
}

ScalarField scalar_from_expr(const ex::Expr& e, int dim, const std::string& name) {
  ScalarField out;
  out.name = name;
  out.eval = [e](const Vec& x) { return ex::eval(e, x); };
  std::vector<ex::Expr> grad(dim);
  for (int i = 0; i < dim; ++i) grad[i] = ex::differentiate(e, i);
  out.partials = [grad, dim](const Vec& x) {
    Vec v(dim);
    for (int i = 0; i < dim; ++i) v[i] = ex::eval(grad[i], x);
    return v;
  };
  return out;
}

std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

double halton(std::uint64_t index, std::uint64_t base) {
  double f = 1.0, r = 0.0;
  while (index > 0) {
    f /= static_cast<double>(base);
    r += f * static_cast<double>(index % base);
    index /= base;
  }
  return r;
}

constexpr std::uint64_t kPrimes[] = {2, 3, 5, 7, 11, 13, 17, 19, 23, 29};

std::vector<std::vector<ex::Expr>> zero_matrix(int k) {
  std::vector<std::vector<ex::Expr>> out(k);
  for (int i = 0; i < k; ++i) {
    out[i].resize(k);
    for (int j = 0; j < k; ++j) out[i][j] = ex::constant(0.0);
  }
  return out;
}

std::vector<std::vector<ex::Expr>> identity_matrix(int k) {
  auto out = zero_matrix(k);
  for (int i = 0; i < k; ++i) out[i][i] = ex::constant(1.0);
  return out;
}

}  // namespace

double uniform_double(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

SubmersionScenario realize(const ScenarioDefinition& def) {
  SubmersionScenario scn;
  scn.def = def;
  const int m = def.m, n = def.n;
  if (m < 1 || n < 1 || n >= m)
    throw ValidationError("scenario '" + def.name + "': need 1 <= n < m, got m=" +
                          std::to_string(m) + " n=" + std::to_string(n));

  scn.map.total.dim = m;
  scn.map.total.name = def.name + ".total";
  scn.map.total.metric = metric_from_exprs(def.g_total, m);
  scn.map.base.dim = n;
  scn.map.base.name = def.name + ".base";
  scn.map.base.metric = metric_from_exprs(def.g_base, n);

  auto comps = def.map_components;
  scn.map.map = [comps](const Vec& x) {
    Vec y(static_cast<int>(comps.size()));
    for (int a = 0; a < y.size(); ++a) y[a] = ex::eval(comps[a], x);
    return y;
  };
  std::vector<std::vector<ex::Expr>> jac(n);
  for (int a = 0; a < n; ++a) {
    jac[a].resize(m);
    for (int i = 0; i < m; ++i) jac[a][i] = ex::differentiate(def.map_components[a], i);
  }
  scn.map.jacobian = [jac, m, n](const Vec& x) {
    Mat out(n, m);
    for (int a = 0; a < n; ++a)
      for (int i = 0; i < m; ++i) out(a, i) = ex::eval(jac[a][i], x);
    return out;
  };

  for (std::size_t i = 0; i < def.vertical.size(); ++i)
    scn.map.vertical_frame.push_back(
        field_from_exprs(def.vertical[i], m, "vertical_" + std::to_string(i + 1)));
  for (std::size_t i = 0; i < def.horizontal.size(); ++i)
    scn.map.horizontal_frame.push_back(
        field_from_exprs(def.horizontal[i], m, "horizontal_" + std::to_string(i + 1)));

  if (def.lambda) {
    DilationField d;
    d.analytic = true;
    d.lambda = scalar_from_expr(def.lambda, m, "lambda");
    scn.dilation = d;
  }
  if (def.f) scn.clairaut_f = scalar_from_expr(def.f, m, "f");

  // A supplied potential certifies the Clairaut expectation unless the
  // scenario explicitly declares otherwise (negative scenarios do).
  if (scn.clairaut_f && !scn.def.flags.clairaut) scn.def.flags.clairaut = true;
  return scn;
}

std::vector<Vec> validation_points(const ScenarioDefinition& def, int count) {
  if (static_cast<int>(def.box.size()) != def.m)
    throw ValidationError("scenario '" + def.name + "': sample box must list all " +
                          std::to_string(def.m) + " coordinate ranges");
  std::uint64_t offset = fnv1a(def.name) % 1024 + 1;
  std::vector<Vec> points;
  points.reserve(count);
  for (int k = 0; k < count; ++k) {
    Vec p(def.m);
    for (int i = 0; i < def.m; ++i) {
      auto [lo, hi] = def.box[i];
      p[i] = lo + (hi - lo) * halton(offset + k, kPrimes[i % 10]);
    }
    points.push_back(p);
  }
  return points;
}

std::vector<Vec> sample_points(const SubmersionScenario& scn, int count, std::mt19937_64& rng) {
  std::vector<Vec> points;
  points.reserve(count);
  for (int k = 0; k < count; ++k) {
    Vec p(scn.def.m);
    for (int i = 0; i < scn.def.m; ++i) {
      auto [lo, hi] = scn.def.box[i];
      p[i] = lo + (hi - lo) * uniform_double(rng);
    }
    points.push_back(p);
  }
  return points;
}

void validate_scenario(const SubmersionScenario& scn) {
  const auto& def = scn.def;
  auto where = [&](const Vec& p) {
    std::ostringstream out;
    out << " at point (";
    for (int i = 0; i < p.size(); ++i) out << (i ? ", " : "") << p[i];
    out << ")";
    return out.str();
  };
  if (static_cast<int>(def.map_components.size()) != def.n)
    throw ValidationError("scenario '" + def.name + "': map must have n components");
  if (static_cast<int>(def.vertical.size()) != def.m - def.n)
    throw ValidationError("scenario '" + def.name + "': need m-n vertical frame fields");
  if (static_cast<int>(def.horizontal.size()) != def.n)
    throw ValidationError("scenario '" + def.name + "': need n horizontal frame fields");

  for (const Vec& p : validation_points(def)) {
    Mat g;
    try {
      g = metric_at(scn.map.total, p);
    } catch (const ValidationError&) {
      throw ValidationError("scenario '" + def.name + "': total metric is not symmetric" +
                            where(p));
    }
    Eigen::SelfAdjointEigenSolver<Mat> eig(g);
    if (eig.eigenvalues().minCoeff() <= 0.0)
      throw ValidationError("scenario '" + def.name + "': total metric is not positive-definite" +
                            where(p));

    Vec q = scn.map.map(p);
    if (!q.allFinite())
      throw ValidationError("scenario '" + def.name + "': map is not finite" + where(p));
    Mat gb = metric_at(scn.map.base, q);
    Eigen::SelfAdjointEigenSolver<Mat> eigb(gb);
    if (eigb.eigenvalues().minCoeff() <= 0.0)
      throw ValidationError("scenario '" + def.name + "': base metric is not positive-definite" +
                            where(p));

    Mat jac = map_jacobian(scn.map, p);
    Eigen::ColPivHouseholderQR<Mat> qr(jac.transpose());
    qr.setThreshold(1e-9);
    if (qr.rank() < def.n)
      throw ValidationError("scenario '" + def.name + "': map differential drops rank" + where(p));

    double jscale = std::max(1.0, jac.lpNorm<Eigen::Infinity>());
    for (const auto& vf : scn.map.vertical_frame) {
      Vec v = vf.eval(p);
      if ((jac * v).lpNorm<Eigen::Infinity>() > 1e-9 * jscale * std::max(1.0, v.lpNorm<Eigen::Infinity>()))
        throw ValidationError("scenario '" + def.name + "': vertical frame field " + vf.name +
                              " is not annihilated by the differential" + where(p));
      for (const auto& hf : scn.map.horizontal_frame) {
        Vec h = hf.eval(p);
        double ip = v.dot(g * h);
        double scale = std::max(1.0, std::sqrt(v.dot(g * v)) * std::sqrt(h.dot(g * h)));
        if (std::abs(ip) > 1e-9 * scale)
          throw ValidationError("scenario '" + def.name + "': frames " + vf.name + " and " +
                                hf.name + " are not g-orthogonal" + where(p));
      }
    }
    for (const auto& hf : scn.map.horizontal_frame) {
      try {
        require_basic(scn.map, hf, p);
      } catch (const NotBasicError& e) {
        throw ValidationError("scenario '" + def.name + "': " + e.what() + where(p));
      }
    }

    if (scn.dilation) {
      double lam = scn.dilation->lambda.eval(p);
      if (!(lam > 0.0))
        throw ValidationError("scenario '" + def.name + "': dilation is not positive" + where(p));
    }
    if (scn.clairaut_f && !std::isfinite(scn.clairaut_f->eval(p)))
      throw ValidationError("scenario '" + def.name + "': potential f is not finite" + where(p));
  }
}

// --- builders ---------------------------------------------------------------

namespace {

ex::Expr pe(const std::string& src, int nvars) { return ex::parse(src, nvars); }

}  // namespace

SubmersionScenario build_example2() {
  ScenarioDefinition def;
  def.name = "example2";
  def.m = 2;
  def.n = 1;
  def.g_total = zero_matrix(2);
  def.g_total[0][0] = pe("exp(2*x2)", 2);
  def.g_total[1][1] = pe("exp(2*x2)", 2);
  def.g_base = identity_matrix(1);
  def.map_components = {pe("(x1 + x2)/sqrt(2)", 2)};
  def.vertical = {{pe("exp(-x2)", 2), pe("-exp(-x2)", 2)}};
  def.horizontal = {{ex::constant(1.0), ex::constant(1.0)}};  // d1 + d2, the basic lift
  def.lambda = pe("exp(-x2)", 2);
  def.f = pe("x1 + x2", 2);
  def.flags.conformal = true;
  def.flags.clairaut = true;
  def.flags.umbilical = true;
  def.box = {{-1.2, 1.2}, {-1.2, 1.2}};
  SubmersionScenario scn = realize(def);
  validate_scenario(scn);
  return scn;
}

SubmersionScenario build_doubly_warped(const DoublyWarpedSpec& spec) {
  const int m1 = spec.m1, m2 = spec.m2, m = m1 + m2;
  ScenarioDefinition def;
  def.name = spec.name;
  def.m = m;
  def.n = m1;

  ex::Expr lam_total = ex::shift_variables(spec.lam, m1);  // lam lives on M2
  ex::Expr f1_total = spec.f1;                             // f1 lives on M1 (vars already x1..)
  ex::Expr lam2 = ex::mul(lam_total, lam_total);
  ex::Expr f12 = ex::mul(f1_total, f1_total);

  def.g_total = zero_matrix(m);
  for (int i = 0; i < m1; ++i)
    for (int j = 0; j < m1; ++j) def.g_total[i][j] = ex::mul(lam2, spec.g1[i][j]);
  for (int i = 0; i < m2; ++i)
    for (int j = 0; j < m2; ++j)
      def.g_total[m1 + i][m1 + j] = ex::mul(f12, ex::shift_variables(spec.g2[i][j], m1));

  def.g_base = spec.g1;
  for (int a = 0; a < m1; ++a) def.map_components.push_back(ex::variable(a));
  for (int i = 0; i < m2; ++i) {
    std::vector<ex::Expr> comp(m, ex::constant(0.0));
    comp[m1 + i] = ex::constant(1.0);
    def.vertical.push_back(comp);
  }
  for (int j = 0; j < m1; ++j) {
    std::vector<ex::Expr> comp(m, ex::constant(0.0));
    comp[j] = ex::constant(1.0);
    def.horizontal.push_back(comp);
  }

  // the dilation of the first projection is 1/lam(q)
  def.lambda = ex::div(ex::constant(1.0), lam_total);
  def.f = ex::log(f1_total);
  def.flags.conformal = true;
  def.flags.umbilical = true;
  // The Clairaut invariant holds exactly when the dilation is constant on
  // fibers, i.e. when lam is constant on M2.
  def.flags.clairaut = ex::depends_on_nothing(spec.lam);
  def.flags.harmonic = spec.harmonic;
  def.flags.einstein_lambda_f = spec.einstein_lambda_f;
  def.box = spec.box;

  SubmersionScenario scn = realize(def);
  for (const Vec& p : validation_points(def)) {
    if (!(ex::eval(f1_total, p) > 0.0))
      throw DomainError("doubly warped product needs f1 > 0 on the sample box");
    if (!(ex::eval(lam_total, p) > 0.0))
      throw DomainError("doubly warped product needs lam > 0 on the sample box");
  }
  validate_scenario(scn);
  return scn;
}

SubmersionScenario build_surface_of_revolution(const expr::Expr& profile,
                                               std::pair<double, double> t_range,
                                               std::pair<double, double> phi_range,
                                               const std::string& name) {
  ScenarioDefinition def;
  def.name = name;
  def.m = 2;
  def.n = 1;
  def.g_total = zero_matrix(2);
  def.g_total[0][0] = ex::constant(1.0);
  def.g_total[1][1] = ex::mul(profile, profile);
  def.g_base = identity_matrix(1);
  def.map_components = {ex::variable(0)};
  def.vertical = {{ex::constant(0.0), ex::constant(1.0)}};
  def.horizontal = {{ex::constant(1.0), ex::constant(0.0)}};
  def.lambda = ex::constant(1.0);
  def.f = ex::log(profile);
  def.flags.conformal = true;
  def.flags.clairaut = true;
  def.flags.umbilical = true;
  def.flags.harmonic = ex::depends_on_nothing(profile);
  def.box = {t_range, phi_range};

  SubmersionScenario scn = realize(def);
  for (const Vec& p : validation_points(def))
    if (!(ex::eval(profile, p) > 0.0))
      throw DomainError("surface of revolution needs a positive profile on the sample box");
  validate_scenario(scn);
  return scn;
}

// --- registry ---------------------------------------------------------------

namespace {

SubmersionScenario build_perturbed_nonclairaut() {
  ScenarioDefinition def;
  def.name = "perturbed_nonclairaut";
  def.m = 2;
  def.n = 1;
  def.g_total = zero_matrix(2);
  def.g_total[0][0] = pe("exp(2*x2)*(1 + 0.1*sin(x1))", 2);
  def.g_total[1][1] = pe("exp(2*x2)", 2);
  def.g_base = identity_matrix(1);
  def.map_components = {pe("(x1 + x2)/sqrt(2)", 2)};
  def.vertical = {{ex::constant(1.0), ex::constant(-1.0)}};
  // g-orthogonal complement of (1,-1), scaled so the pushforward is the
  // constant sqrt(2) (a basic field).
  def.horizontal = {{pe("2/(2 + 0.1*sin(x1))", 2), pe("(2 + 0.2*sin(x1))/(2 + 0.1*sin(x1))", 2)}};
  def.f = pe("x1^2", 2);
  def.flags.conformal = true;  // n = 1: a single horizontal direction is always conformal
  def.flags.clairaut = false;  // the metric perturbation breaks the tensor identity
  def.flags.umbilical = true;  // one-dimensional fibers
  def.box = {{-1.2, 1.2}, {-1.2, 1.2}};
  SubmersionScenario scn = realize(def);
  validate_scenario(scn);
  return scn;
}

SubmersionScenario build_registry_entry(const std::string& name) {
  if (name == "example2") return build_example2();
  if (name == "perturbed_nonclairaut") return build_perturbed_nonclairaut();
  if (name == "euclidean_product") {
    DoublyWarpedSpec spec;
    spec.name = "euclidean_product";
    spec.m1 = 2;
    spec.m2 = 2;
    spec.g1 = identity_matrix(2);
    spec.g2 = identity_matrix(2);
    spec.f1 = ex::constant(1.0);
    spec.lam = ex::constant(1.0);
    spec.box = {{-1.0, 1.0}, {-1.0, 1.0}, {-1.0, 1.0}, {-1.0, 1.0}};
    spec.einstein_lambda_f = 0.0;
    spec.harmonic = true;
    return build_doubly_warped(spec);
  }
  if (name == "doubly_warped_default") {
    DoublyWarpedSpec spec;
    spec.name = "doubly_warped_default";
    spec.m1 = 1;
    spec.m2 = 1;
    spec.g1 = identity_matrix(1);
    spec.g2 = identity_matrix(1);
    spec.f1 = pe("(exp(x1) + exp(-x1))/2", 1);
    spec.lam = ex::constant(2.0);
    spec.box = {{-1.0, 1.0}, {-1.0, 1.0}};
    spec.harmonic = false;  // f = log cosh is not horizontally constant
    return build_doubly_warped(spec);
  }
  if (name == "doubly_warped_conformal") {
    DoublyWarpedSpec spec;
    spec.name = "doubly_warped_conformal";
    spec.m1 = 1;
    spec.m2 = 1;
    spec.g1 = identity_matrix(1);
    spec.g2 = identity_matrix(1);
    spec.f1 = pe("(exp(x1) + exp(-x1))/2", 1);
    spec.lam = pe("exp(x1/4)", 1);  // fiber-varying dilation
    spec.box = {{-1.0, 1.0}, {-1.0, 1.0}};
    return build_doubly_warped(spec);
  }
  if (name == "doubly_warped_4d") {
    DoublyWarpedSpec spec;
    spec.name = "doubly_warped_4d";
    spec.m1 = 2;
    spec.m2 = 2;
    spec.g1 = identity_matrix(2);
    spec.g2 = identity_matrix(2);
    spec.f1 = pe("exp(0.3*x1 + 0.2*x2)", 2);
    spec.lam = ex::constant(1.0);
    spec.box = {{-1.0, 1.0}, {-1.0, 1.0}, {-1.0, 1.0}, {-1.0, 1.0}};
    spec.einstein_lambda_f = 0.0;  // scaled flat fibers stay Ricci-flat
    spec.harmonic = false;
    return build_doubly_warped(spec);
  }
  if (name == "warped_sphere_einstein") {
    DoublyWarpedSpec spec;
    spec.name = "warped_sphere_einstein";
    spec.m1 = 2;
    spec.m2 = 2;
    spec.g1 = identity_matrix(2);
    spec.g2 = zero_matrix(2);
    spec.g2[0][0] = ex::constant(1.0);
    spec.g2[1][1] = pe("sin(x1)^2", 2);  // round sphere away from the poles
    // the warp keeps unit-speed fiber excursions well inside (0, pi)
    spec.f1 = pe("2*exp(0.2*x1 + 0.1*x2)", 2);
    spec.lam = ex::constant(1.0);
    spec.box = {{-1.0, 1.0}, {-1.0, 1.0}, {1.2, 1.9}, {0.5, 2.5}};
    spec.harmonic = false;
    return build_doubly_warped(spec);
  }
  if (name == "surface_of_revolution_default")
    return build_surface_of_revolution(pe("(exp(x1) + exp(-x1))/2", 1), {-1.0, 1.0}, {0.0, 3.0},
                                       "surface_of_revolution_default");
  throw ArgumentError("unknown scenario '" + name + "'");
}

}  // namespace

std::vector<std::string> registry_names() {
  return {"doubly_warped_4d",      "doubly_warped_conformal", "doubly_warped_default",
          "euclidean_product",     "example2",                "perturbed_nonclairaut",
          "surface_of_revolution_default", "warped_sphere_einstein"};
}

SubmersionScenario make_scenario(const std::string& name) { return build_registry_entry(name); }

// --- file format ------------------------------------------------------------

namespace {

struct Line {
  int number;
  std::string key;
  std::string value;
};

std::string trim(const std::string& s) {
  std::size_t a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  std::size_t b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

}  // namespace

SubmersionScenario parse_scenario_text(const std::string& text, const std::string& origin) {
  ScenarioDefinition def;
  def.name = origin;

  std::map<std::string, std::vector<Line>> sections;
  std::string current;
  std::istringstream in(text);
  std::string raw;
  int lineno = 0;
  while (std::getline(in, raw)) {
    ++lineno;
    std::string line = trim(raw);
    if (line.empty() || line[0] == '#') continue;
    if (line.front() == '[') {
      if (line.back() != ']')
        throw ValidationError(origin + ":" + std::to_string(lineno) + ": unterminated section header");
      current = trim(line.substr(1, line.size() - 2));
      static const char* known[] = {"total", "base",     "map",   "frames",
                                    "dilation", "clairaut", "flags", "sample_box"};
      bool ok = false;
      for (const char* k : known) ok = ok || current == k;
      if (!ok)
        throw ValidationError(origin + ":" + std::to_string(lineno) + ": unknown section [" +
                              current + "]");
      continue;
    }
    std::size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw ValidationError(origin + ":" + std::to_string(lineno) + ": expected key = value");
    std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    if (current.empty()) {
      if (key == "name") {
        def.name = value;
        continue;
      }
      throw ValidationError(origin + ":" + std::to_string(lineno) +
                            ": entries must appear inside a section (except name)");
    }
    sections[current].push_back(Line{lineno, key, value});
  }

  auto get_dim = [&](const std::string& sec) {
    for (const auto& l : sections[sec])
      if (l.key == "dim") return std::stoi(l.value);
    throw ValidationError(origin + ": section [" + sec + "] is missing dim");
  };
  def.m = get_dim("total");
  def.n = get_dim("base");
  if (def.m < 1 || def.n < 1 || def.n >= def.m)
    throw ValidationError(origin + ": declared dims are inconsistent (need 1 <= n < m)");

  auto parse_expr_at = [&](const Line& l, int nvars) {
    try {
      return ex::parse(l.value, nvars);
    } catch (const ex::ParseError& e) {
      throw ValidationError(origin + ":" + std::to_string(l.number) + ": in '" + l.key +
                            "': " + e.what());
    }
  };

  auto parse_metric = [&](const std::string& sec, int dim) {
    auto g = zero_matrix(dim);
    std::vector<std::vector<bool>> seen(dim, std::vector<bool>(dim, false));
    for (const auto& l : sections[sec]) {
      if (l.key == "dim") continue;
      if (l.key.rfind("g_", 0) != 0)
        throw ValidationError(origin + ":" + std::to_string(l.number) + ": unexpected key '" +
                              l.key + "' in [" + sec + "]");
      std::size_t us = l.key.find('_', 2);
      if (us == std::string::npos)
        throw ValidationError(origin + ":" + std::to_string(l.number) + ": metric keys look like g_i_j");
      int i = std::stoi(l.key.substr(2, us - 2)) - 1;
      int j = std::stoi(l.key.substr(us + 1)) - 1;
      if (i < 0 || j < 0 || i >= dim || j >= dim)
        throw ValidationError(origin + ":" + std::to_string(l.number) + ": metric index out of range");
      g[i][j] = parse_expr_at(l, dim);
      seen[i][j] = true;
    }
    // mirror entries declared on one side only; contradictory pairs are
    // kept as written so the symmetry validation can flag them
    for (int i = 0; i < dim; ++i)
      for (int j = 0; j < dim; ++j)
        if (seen[i][j] && !seen[j][i]) g[j][i] = g[i][j];
    return g;
  };
  def.g_total = parse_metric("total", def.m);
  def.g_base = parse_metric("base", def.n);

  def.map_components.assign(def.n, nullptr);
  for (const auto& l : sections["map"]) {
    if (l.key.rfind("F_", 0) != 0)
      throw ValidationError(origin + ":" + std::to_string(l.number) + ": map keys look like F_a");
    int a = std::stoi(l.key.substr(2)) - 1;
    if (a < 0 || a >= def.n)
      throw ValidationError(origin + ":" + std::to_string(l.number) + ": map index out of range");
    def.map_components[a] = parse_expr_at(l, def.m);
  }
  for (int a = 0; a < def.n; ++a)
    if (!def.map_components[a])
      throw ValidationError(origin + ": map component F_" + std::to_string(a + 1) + " is missing");

  auto parse_frame_row = [&](const Line& l) {
    std::vector<ex::Expr> comps;
    std::string item;
    std::istringstream ss(l.value);
    while (std::getline(ss, item, ',')) {
      item = trim(item);
      if (item.empty())
        throw ValidationError(origin + ":" + std::to_string(l.number) + ": empty frame component");
      try {
        comps.push_back(ex::parse(item, def.m));
      } catch (const ex::ParseError& e) {
        throw ValidationError(origin + ":" + std::to_string(l.number) + ": in '" + l.key +
                              "': " + e.what());
      }
    }
    if (static_cast<int>(comps.size()) != def.m)
      throw ValidationError(origin + ":" + std::to_string(l.number) + ": frame fields need " +
                            std::to_string(def.m) + " components");
    return comps;
  };
  def.vertical.assign(def.m - def.n, {});
  def.horizontal.assign(def.n, {});
  for (const auto& l : sections["frames"]) {
    bool vert = l.key.rfind("vertical_", 0) == 0;
    bool horz = l.key.rfind("horizontal_", 0) == 0;
    if (!vert && !horz)
      throw ValidationError(origin + ":" + std::to_string(l.number) +
                            ": frame keys look like vertical_i or horizontal_j");
    int idx = std::stoi(l.key.substr(l.key.find('_') + 1)) - 1;
    auto& dst = vert ? def.vertical : def.horizontal;
    if (idx < 0 || idx >= static_cast<int>(dst.size()))
      throw ValidationError(origin + ":" + std::to_string(l.number) + ": frame index out of range");
    dst[idx] = parse_frame_row(l);
  }
  for (std::size_t i = 0; i < def.vertical.size(); ++i)
    if (def.vertical[i].empty())
      throw ValidationError(origin + ": vertical_" + std::to_string(i + 1) + " is missing");
  for (std::size_t i = 0; i < def.horizontal.size(); ++i)
    if (def.horizontal[i].empty())
      throw ValidationError(origin + ": horizontal_" + std::to_string(i + 1) + " is missing");

  for (const auto& l : sections["dilation"]) {
    if (l.key != "lambda")
      throw ValidationError(origin + ":" + std::to_string(l.number) + ": [dilation] holds lambda");
    def.lambda = parse_expr_at(l, def.m);
  }
  for (const auto& l : sections["clairaut"]) {
    if (l.key != "f")
      throw ValidationError(origin + ":" + std::to_string(l.number) + ": [clairaut] holds f");
    def.f = parse_expr_at(l, def.m);
  }
  for (const auto& l : sections["flags"]) {
    auto boolean = [&](const std::string& v) {
      if (v == "true") return true;
      if (v == "false") return false;
      throw ValidationError(origin + ":" + std::to_string(l.number) + ": flags are true or false");
    };
    if (l.key == "conformal")
      def.flags.conformal = boolean(l.value);
    else if (l.key == "clairaut")
      def.flags.clairaut = boolean(l.value);
    else if (l.key == "umbilical")
      def.flags.umbilical = boolean(l.value);
    else if (l.key == "harmonic")
      def.flags.harmonic = boolean(l.value);
    else if (l.key == "einstein_lambda_f")
      def.flags.einstein_lambda_f = std::stod(l.value);
    else
      throw ValidationError(origin + ":" + std::to_string(l.number) + ": unknown flag '" + l.key +
                            "'");
  }

  def.box.assign(def.m, {0.0, 0.0});
  std::vector<bool> box_seen(def.m, false);
  for (const auto& l : sections["sample_box"]) {
    if (l.key.size() < 2 || l.key[0] != 'x')
      throw ValidationError(origin + ":" + std::to_string(l.number) + ": box keys look like x_i");
    int i = std::stoi(l.key.substr(1)) - 1;
    if (i < 0 || i >= def.m)
      throw ValidationError(origin + ":" + std::to_string(l.number) + ": box index out of range");
    std::istringstream ss(l.value);
    std::string lo, hi;
    if (!std::getline(ss, lo, ',') || !std::getline(ss, hi))
      throw ValidationError(origin + ":" + std::to_string(l.number) + ": box entries are 'lo, hi'");
    def.box[i] = {std::stod(trim(lo)), std::stod(trim(hi))};
    if (!(def.box[i].first < def.box[i].second))
      throw ValidationError(origin + ":" + std::to_string(l.number) + ": box needs lo < hi");
    box_seen[i] = true;
  }
  for (int i = 0; i < def.m; ++i)
    if (!box_seen[i])
      throw ValidationError(origin + ": sample_box is missing x" + std::to_string(i + 1));

  SubmersionScenario scn = realize(def);
  validate_scenario(scn);
  return scn;
}

SubmersionScenario load_scenario(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ArgumentError("cannot open scenario file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_scenario_text(buf.str(), path);
}

std::string serialize_scenario(const ScenarioDefinition& def) {
  std::ostringstream out;
  out << "name = " << def.name << "\n";
  auto metric = [&](const char* sec, const std::vector<std::vector<ex::Expr>>& g, int dim) {
    out << "[" << sec << "]\n";
    out << "dim = " << dim << "\n";
    for (int i = 0; i < dim; ++i)
      for (int j = i; j < dim; ++j) {
        if (ex::is_constant(g[i][j], 0.0) && i != j) continue;
        out << "g_" << (i + 1) << "_" << (j + 1) << " = " << ex::to_string(g[i][j]) << "\n";
      }
  };
  metric("total", def.g_total, def.m);
  metric("base", def.g_base, def.n);
  out << "[map]\n";
  for (int a = 0; a < def.n; ++a)
    out << "F_" << (a + 1) << " = " << ex::to_string(def.map_components[a]) << "\n";
  out << "[frames]\n";
  auto frame = [&](const char* kind, const std::vector<std::vector<ex::Expr>>& rows) {
    for (std::size_t i = 0; i < rows.size(); ++i) {
      out << kind << "_" << (i + 1) << " = ";
      for (int k = 0; k < def.m; ++k) out << (k ? ", " : "") << ex::to_string(rows[i][k]);
      out << "\n";
    }
  };
  frame("vertical", def.vertical);
  frame("horizontal", def.horizontal);
  if (def.lambda) {
    out << "[dilation]\n";
    out << "lambda = " << ex::to_string(def.lambda) << "\n";
  }
  if (def.f) {
    out << "[clairaut]\n";
    out << "f = " << ex::to_string(def.f) << "\n";
  }
  out << "[flags]\n";
  auto flag = [&](const char* key, const std::optional<bool>& v) {
    if (v) out << key << " = " << (*v ? "true" : "false") << "\n";
  };
  flag("conformal", def.flags.conformal);
  flag("clairaut", def.flags.clairaut);
  flag("umbilical", def.flags.umbilical);
  flag("harmonic", def.flags.harmonic);
  if (def.flags.einstein_lambda_f) {
    out.precision(17);
    out << "einstein_lambda_f = " << *def.flags.einstein_lambda_f << "\n";
  }
  out << "[sample_box]\n";
  out.precision(17);
  for (int i = 0; i < def.m; ++i)
    out << "x" << (i + 1) << " = " << def.box[i].first << ", " << def.box[i].second << "\n";
  return out.str();
}

}  // namespace clairaut
