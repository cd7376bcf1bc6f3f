#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "hus/core.hpp"
#include "hus/geometry.hpp"
#include "hus/numerics.hpp"

namespace hus {

enum class PerturbationShape { constant, sinusoidal, bump, random_smoothed };

const char* to_string(PerturbationShape shape);
std::optional<PerturbationShape> perturbation_shape_from_string(const std::string& name);

/// A smooth function p with ||p||_inf <= magnitude, added to an exact solution.
///
/// constant:        p = magnitude
/// sinusoidal:      p_c = magnitude sin(frequency x_axis + c/2) w(x)
/// bump:            p = magnitude exp(1 - 1/(1 - r^2)), r = |x - center| / radius
/// random_smoothed: p_c = sum_k a_k sin(kappa_k . x + phi_k) w(x), sum |a_k| = magnitude
///
/// w is the Gaussian window exp(-|x - center|^2 / (2 envelope_width^2)), or 1 when
/// envelope_width == 0. The window keeps V p bounded for fields of linear growth.
struct PerturbationSpec {
  PerturbationShape shape = PerturbationShape::constant;
  double magnitude = 0.0;
  std::uint64_t seed = 0;
  std::size_t axis = 0;
  double frequency = 1.0;
  /// Empty means the origin.
  std::vector<double> center;
  double radius = 1.0;
  double envelope_width = 0.0;
  std::size_t modes = 6;

  bool operator==(const PerturbationSpec&) const = default;
};

/// Value and Jacobian of a generated perturbation.
CandidateSolution make_perturbation(const PerturbationSpec& spec, std::size_t dim,
                                    std::size_t value_dim);

enum class ExactKind { zero, constant, sine };

/// Closed-form seed solutions. sine: y_c = amplitude_c sin(x_axis).
struct ExactSolutionSpec {
  ExactKind kind = ExactKind::zero;
  /// One entry per value component (constant value or sine amplitude).
  std::vector<Complex> values;
  std::size_t axis = 0;

  bool operator==(const ExactSolutionSpec&) const = default;
};

enum class ForcingKind { zero, constant, induced };

/// induced: f = V y_e - lambda y_e, computed from the seed's Jacobian.
struct ForcingSpec {
  ForcingKind kind = ForcingKind::zero;
  std::vector<Complex> values;

  bool operator==(const ForcingSpec&) const = default;
};

/// Tensor grid over a box plus a Halton supplement inside the same box.
struct GridSpec {
  std::vector<double> lower;
  std::vector<double> upper;
  std::vector<std::size_t> counts;
  std::size_t halton = 0;

  std::vector<Point> points() const;
  /// True when x sits on a face of the box.
  bool on_boundary(const Point& x) const;

  bool operator==(const GridSpec&) const = default;
};

struct FlowQuery {
  Point x0;
  double t_start = 0.0;
  double t_end = 1.0;
  std::size_t samples = 5;

  bool operator==(const FlowQuery&) const = default;
};

struct Thresholds {
  double residual = 1e-5;
  double flow_compat = 1e-5;
  double semigroup = 1e-6;
  double idempotence = 1e-5;
  /// Bound slack in units of quad_tol.
  double bound_quad_multiple = 10.0;

  bool operator==(const Thresholds&) const = default;
};

struct ExperimentConfig {
  FieldSpec field = RotationParams{{1.0}};
  Complex lambda{1.0, 0.0};
  std::size_t value_dim = 1;
  NormKind norm = NormKind::max_modulus;
  ForcingSpec forcing;
  std::optional<ExactSolutionSpec> exact_solution;
  PerturbationSpec perturbation;
  GridSpec grid;
  Tolerances tolerances;
  std::pair<double, double> eval_window{-2.0, 2.0};
  std::size_t compat_points = 3;
  std::size_t compat_times = 5;
  std::size_t idempotence_points = 2;
  std::size_t semigroup_samples = 20;
  Thresholds thresholds;
  /// Used by the `flow` subcommand; an empty x0 means unset.
  FlowQuery flow;

  /// Throws ValidationError (Re lambda = 0, grid outside the domain, sizes) or
  /// InvalidParams from the field catalog.
  void validate() const;

  bool operator==(const ExperimentConfig&) const = default;
};

/// Field, flow and problem assembled from a config.
struct Setup {
  std::shared_ptr<const VectorField> field;
  FlowMap flow;
  StabilityProblem problem;
  CandidateSolution exact;
};

Setup build_setup(const ExperimentConfig& config);

/// y = y_exact + p. Throws InvalidConfig when the seed's residual exceeds 1e-8 on the grid.
CandidateSolution make_candidate(const ExperimentConfig& config, const StabilityProblem& problem,
                                 const FlowMap& flow);

struct SupEstimate {
  double value = 0.0;
  Point argmax;
  std::size_t samples = 0;
};

SupEstimate estimate_sup_norm(const ValueFn& fn, const std::vector<Point>& points, NormKind norm);
SupEstimate estimate_sup_norm(const ValueFn& fn, const GridSpec& grid, NormKind norm);

struct CorrectionSummary {
  double epsilon_measured = 0.0;
  double bound = 0.0;
  double distance_measured = 0.0;
  int omega_sign = 1;
  std::size_t sample_count = 0;
  double u_max = 0.0;
  double horizon = 0.0;
  double y_sup = 0.0;
  double z_sup = 0.0;
  std::size_t eval_point_count = 0;
};

CorrectionSummary summarize(const CorrectionResult& result, const StabilityProblem& problem);

struct BoundCheck {
  bool pass = false;
  /// bound + slack - distance; negative on failure.
  double margin = 0.0;
};

struct VerificationReport {
  CorrectionSummary correction;
  double residual_of_z_max = 0.0;
  BoundCheck bound_check;
  double bound_slack = 0.0;
  double flow_compat_max_defect = 0.0;
  double semigroup_max_defect = 0.0;
  double idempotence_defect = 0.0;
  Thresholds thresholds;
  std::map<std::string, double> wall_times;
  std::size_t sample_count = 0;
  std::vector<std::string> warnings;

  /// Verdicts recomputed from the numeric fields.
  std::map<std::string, bool> verdicts() const;
  bool all_pass() const;
};

VerificationReport run_experiment(const ExperimentConfig& config);

/// Corrected solution on the config's grid plus its summary (the `correct` subcommand).
struct CorrectionRun {
  std::vector<Point> points;
  std::vector<Value> z_values;
  CorrectionSummary summary;
  BoundCheck bound_check;
};

CorrectionRun run_correction(const ExperimentConfig& config);

/// Default sample box for a field: [0.5, 2]^n on the orthant, [-2, 2]^n elsewhere.
GridSpec default_grid(const FieldSpec& field);

/// Built-in showcase configs: tightness witness, periodic corollary, Euler field.
std::vector<std::pair<std::string, ExperimentConfig>> demo_configs();

}  // namespace hus
