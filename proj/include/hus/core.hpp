#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <optional>
#include <vector>

#include "hus/geometry.hpp"
#include "hus/numerics.hpp"

namespace hus {

using ValueFn = std::function<Value(const Point&)>;
/// m x n complex Jacobian, one row per value component.
using JacobianFn = std::function<std::vector<Value>(const Point&)>;

enum class NormKind { max_modulus, euclidean };

double value_norm(const Value& v, NormKind norm);

/// Epsilon / |Re lambda|. Throws InvalidLambda when Re lambda == 0.
double hus_bound(double epsilon, Complex lambda);

/// The equation V y = lambda y + f on a field's domain, with the norm of the target C^m.
class StabilityProblem {
 public:
  StabilityProblem(std::shared_ptr<const VectorField> field, Complex lambda, ValueFn forcing,
                   std::size_t value_dim, NormKind norm = NormKind::max_modulus);

  const VectorField& field() const { return *field_; }
  std::shared_ptr<const VectorField> field_ptr() const { return field_; }
  Complex lambda() const { return lambda_; }
  const ValueFn& forcing() const { return forcing_; }
  std::size_t value_dim() const { return value_dim_; }
  NormKind norm() const { return norm_; }
  int omega_sign() const { return lambda_.real() > 0 ? 1 : -1; }

  double norm_of(const Value& v) const { return value_norm(v, norm_); }

 private:
  std::shared_ptr<const VectorField> field_;
  Complex lambda_;
  ValueFn forcing_;
  std::size_t value_dim_;
  NormKind norm_;
};

/// A function y : M -> C^m, optionally with its Jacobian.
struct CandidateSolution {
  ValueFn value;
  JacobianFn gradient;

  bool has_gradient() const { return static_cast<bool>(gradient); }
};

/// Largest entrywise gap between the analytic Jacobian and a central-difference one.
double gradient_discrepancy(const CandidateSolution& y, const std::vector<Point>& points,
                            double step = 1e-6);

/// alpha(x) = V y(x) - lambda y(x) - f(x). V y comes from the Jacobian when present,
/// else from a central difference of s -> y(Phi(s, x)) at s = 0.
ValueFn residual_field(const StabilityProblem& problem, const CandidateSolution& y,
                       const FlowMap& flow);

// ---------------------------------------------------------------------------

struct Lemma1Options {
  std::size_t prepass_nodes = 32;
  /// sup |a - b| is estimated on [a0_time - w, a0_time + w].
  double window_half_width = 5.0;
  std::size_t window_samples = 1001;
};

struct Lemma1Result {
  std::function<Value(double)> b;
  double sup_distance_estimate = 0.0;
  /// max |alpha| over every node the construction touched.
  double epsilon_estimate = 0.0;
  double u_max = 0.0;
};

/// The unique solution b of b' = lambda b + h that stays at bounded distance from a:
///   b(t) = e^{lambda (t - t0)} [ int_{t0}^t h(s) e^{-lambda (s - t0)} ds
///                               + int_{t0}^omega alpha(s) e^{-lambda (s - t0)} ds + a(t0) ]
/// with alpha = a' - lambda a - h and t0 = a0_time. Times on the omega side of t0 are
/// re-anchored at t itself so the prefactor never amplifies quadrature error.
Lemma1Result lemma1_correct(const CurveFn& a, const CurveFn& h, Complex lambda, double a0_time,
                            const Tolerances& tol, const Lemma1Options& options = {});

// ---------------------------------------------------------------------------

struct CorrectionOptions {
  std::size_t prepass_nodes = 32;
  /// Extra points where |alpha| enters epsilon_measured.
  std::vector<Point> verification_points;
  /// A-priori epsilon; ValidationError when the measured defect exceeds it.
  std::optional<double> epsilon_cap;
  /// Lower limit for the declared quadrature bound u_max.
  double u_max_floor = 0.0;
};

struct CorrectionResult {
  /// z, evaluated lazily anywhere in the domain.
  ValueFn corrected;
  std::vector<Point> eval_points;
  std::vector<Value> y_values;
  std::vector<Value> z_values;
  /// Estimated sup |alpha| over `sample_count` samples (eval points, orbit nodes).
  double epsilon_measured = 0.0;
  /// epsilon_measured / |Re lambda|.
  double bound = 0.0;
  /// max over eval points of |y - z|.
  double distance_measured = 0.0;
  int omega_sign = 1;
  std::size_t sample_count = 0;
  double u_max = 0.0;
  double horizon = 0.0;
};

/// z(x) = y(x) + int_0^omega alpha(Phi(s, x)) e^{-lambda s} ds at every eval point.
CorrectionResult theorem1_correct(const StabilityProblem& problem, const CandidateSolution& y,
                                  const FlowMap& flow, const std::vector<Point>& eval_points,
                                  const Tolerances& tol, const CorrectionOptions& options = {});

/// The corrected function as a candidate (no Jacobian), e.g. to correct it again.
CandidateSolution as_candidate(const CorrectionResult& result);

struct CompatibilitySample {
  double t = 0.0;
  Point x;
};

/// Lemma-1 solution b_x along the orbit of x: a = y o Phi(., x), h = f o Phi(., x).
Lemma1Result orbit_lemma1(const StabilityProblem& problem, const CandidateSolution& y,
                          const FlowMap& flow, const Point& x, const Tolerances& tol);

/// max over samples of |z(Phi(t, x)) - b_x(t)|.
double check_flow_compatibility(const StabilityProblem& problem, const CandidateSolution& y,
                                const FlowMap& flow, const CorrectionResult& result,
                                const std::vector<CompatibilitySample>& samples,
                                const Tolerances& tol);

}  // namespace hus
