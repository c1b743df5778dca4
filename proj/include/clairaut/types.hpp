#pragma once

#include <Eigen/Dense>

#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace clairaut {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

/// Base class for all toolkit errors.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ArgumentError : public Error {
 public:
  using Error::Error;
};

class NumericError : public Error {
 public:
  using Error::Error;
};

class SingularMetricError : public Error {
 public:
  using Error::Error;
};

class DegenerateFrameError : public Error {
 public:
  using Error::Error;
};

class DegeneratePlaneError : public Error {
 public:
  using Error::Error;
};

class EvaluationError : public Error {
 public:
  using Error::Error;
};

class NotASubmersionError : public Error {
 public:
  using Error::Error;
};

class NotBasicError : public Error {
 public:
  using Error::Error;
};

class PreconditionError : public Error {
 public:
  using Error::Error;
};

class DomainError : public Error {
 public:
  using Error::Error;
};

class ValidationError : public Error {
 public:
  using Error::Error;
};

class IntegrationDivergedError : public Error {
 public:
  IntegrationDivergedError(const std::string& what, double fail_time)
      : Error(what), fail_time(fail_time) {}
  double fail_time;
};

/// A point in a single global chart; coordinates are plain Eigen vectors.
using ChartPoint = Vec;

/// A tangent vector attached to a chart point.
struct TangentVector {
  Vec base;
  Vec components;
};

/// A smooth vector field given by its component functions over the chart.
/// `jacobian`, when present, returns d(components_k)/d(x_i) as an m x m
/// matrix (row k, column i) and takes precedence over finite differences.
struct VectorField {
  std::function<Vec(const Vec&)> eval;
  std::function<Mat(const Vec&)> jacobian;
  std::string name;

  TangentVector at(const Vec& p) const { return TangentVector{p, eval(p)}; }
};

/// A smooth scalar field; `partials`, when present, is the exact gradient
/// of the coordinate expression (not the metric gradient).
struct ScalarField {
  std::function<double(const Vec&)> eval;
  std::function<Vec(const Vec&)> partials;
  std::string name;
};

inline void require_finite(const Vec& v, const char* what) {
  if (!v.allFinite()) throw NumericError(std::string(what) + ": non-finite entries");
}

inline void require_same_base(const TangentVector& u, const TangentVector& v) {
  if (u.base.size() != v.base.size() || (u.base - v.base).lpNorm<Eigen::Infinity>() > 0.0)
    throw ArgumentError("tangent vectors attached to different base points");
}

}  // namespace clairaut
