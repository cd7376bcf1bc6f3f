#pragma once

#include <cstddef>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <tuple>
#include <variant>
#include <vector>

#include "hus/numerics.hpp"

namespace hus {

/// A single coordinate chart standing in for the manifold.
struct Domain {
  std::size_t dim = 0;
  DomainFn contains;
  std::string description;

  static Domain whole_space(std::size_t n);
  /// Open positive orthant, every coordinate > 0.
  static Domain positive_orthant(std::size_t n);
};

enum class FieldKind { euler, affine, rotation, bump, geodesic, custom };

const char* to_string(FieldKind kind);
std::optional<FieldKind> field_kind_from_string(const std::string& name);

using FlowFn = std::function<Point(double, const Point&)>;

struct VectorField {
  Domain domain;
  FieldFn eval;
  /// Exact flow (t, x) -> Phi(t, x) for families where it is known.
  std::optional<FlowFn> closed_form_flow;
  FieldKind kind = FieldKind::custom;

  std::size_t dim() const { return domain.dim; }
};

// ---------------------------------------------------------------------------
// Catalog parameters. Each struct is one field family.

/// g(x) = (numerator . x) / (denominator . x), or a constant when both are empty.
struct HomogeneousRatio {
  double constant = 1.0;
  std::vector<double> numerator;
  std::vector<double> denominator;

  bool operator==(const HomogeneousRatio&) const = default;
};

/// x -> g(x) x on the positive orthant.
struct EulerParams {
  std::size_t dim = 1;
  HomogeneousRatio g;
  /// Overrides `g` when set (API only; not expressible in config files).
  std::function<double(const Point&)> custom_g;

  bool operator==(const EulerParams& o) const {
    return dim == o.dim && g == o.g && !custom_g && !o.custom_g;
  }
};

/// x -> M x + v with M v = 0. `matrix` is row-major n x n.
struct AffineParams {
  std::size_t dim = 1;
  std::vector<double> matrix;
  std::vector<double> offset;

  bool operator==(const AffineParams&) const = default;
};

/// Block-diagonal skew field on R^{2k}: block i is rate_i * (-y, x).
struct RotationParams {
  std::vector<double> rates;

  bool operator==(const RotationParams&) const = default;
};

/// x -> direction * exp(1 - 1/(1 - r^2)), r = |x - center| / radius, zero for r >= 1.
struct BumpParams {
  std::vector<double> center;
  double radius = 1.0;
  std::vector<double> direction;

  bool operator==(const BumpParams&) const = default;
};

enum class MetricKind { flat, conformal_gaussian };

/// Christoffel symbols Gamma^i_{j,j'} at a base point, flattened as [i][j][j'].
using ChristoffelFn = std::function<std::vector<double>(const Point&)>;

/// Geodesic spray on the tangent bundle of a k-dimensional chart.
/// conformal_gaussian: metric exp(2 phi) delta with phi = amplitude * exp(-|x|^2 / width^2).
struct GeodesicParams {
  std::size_t base_dim = 1;
  MetricKind metric = MetricKind::flat;
  double amplitude = 0.0;
  double width = 1.0;
  /// Overrides `metric` when set (API only).
  ChristoffelFn custom_christoffel;

  bool operator==(const GeodesicParams& o) const {
    return base_dim == o.base_dim && metric == o.metric && amplitude == o.amplitude &&
           width == o.width && !custom_christoffel && !o.custom_christoffel;
  }
};

using FieldSpec = std::variant<EulerParams, AffineParams, RotationParams, BumpParams, GeodesicParams>;

FieldKind kind_of(const FieldSpec& spec);
std::size_t dim_of(const FieldSpec& spec);

/// Builds a field from the catalog. Throws InvalidParams when the family's hypothesis
/// fails (M v != 0, g not homogeneous of degree zero, malformed sizes).
VectorField catalog_field(const FieldSpec& spec);

/// Wraps an arbitrary field; no closed-form flow.
VectorField custom_field(Domain domain, FieldFn eval);

/// Christoffel symbols of exp(2 phi) delta for phi = amplitude * exp(-|x|^2 / width^2).
std::vector<double> conformal_gaussian_christoffel(const Point& x, double amplitude, double width);

/// Matrix exponential e^{tM} (row-major n x n).
std::vector<double> matrix_exponential(const std::vector<double>& matrix, std::size_t n, double t);

// ---------------------------------------------------------------------------

/// Flow Phi(t, x) of a vector field. Uses the closed form when present unless
/// `force_numerical` is set. Orbits are cached per (basepoint, direction); copies share
/// the cache, which is guarded by a mutex, so concurrent evaluation is safe.
class FlowMap {
 public:
  FlowMap(std::shared_ptr<const VectorField> field, Tolerances tol, bool force_numerical = false);
  FlowMap(const VectorField& field, Tolerances tol, bool force_numerical = false)
      : FlowMap(std::make_shared<const VectorField>(field), tol, force_numerical) {}

  const VectorField& field() const { return *field_; }
  std::shared_ptr<const VectorField> field_ptr() const { return field_; }
  const Tolerances& tolerances() const { return tol_; }
  bool uses_closed_form() const { return field_->closed_form_flow.has_value() && !force_numerical_; }

  Point flow_at(double t, const Point& x) const;

  /// Numerical orbit of x covering at least [0, t] (t may be negative). Cached.
  std::shared_ptr<const Trajectory> orbit(const Point& x, double t) const;

  std::size_t cache_size() const;
  void clear_cache() const;

 private:
  struct Cache {
    std::mutex mutex;
    std::map<std::pair<Point, int>, std::shared_ptr<const Trajectory>> orbits;
  };

  std::shared_ptr<const VectorField> field_;
  Tolerances tol_;
  bool force_numerical_;
  std::shared_ptr<Cache> cache_;
};

/// Evaluates s -> Phi(s, x) along one orbit, growing the stored trajectories on demand.
class OrbitCursor {
 public:
  OrbitCursor(FlowMap flow, Point x);

  const Point& basepoint() const { return x_; }
  Point at(double s);

 private:
  FlowMap flow_;
  Point x_;
  std::shared_ptr<const Trajectory> forward_, backward_;
};

inline Point flow_at(const FlowMap& flow, double t, const Point& x) { return flow.flow_at(t, x); }

struct SemigroupSample {
  double t = 0.0;
  double s = 0.0;
  Point x;
};

/// max |Phi(t+s, x) - Phi(t, Phi(s, x))| (Euclidean) over the samples.
double check_semigroup(const FlowMap& flow, const std::vector<SemigroupSample>& samples);

}  // namespace hus
