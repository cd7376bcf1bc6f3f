#pragma once

#include <complex>
#include <cstddef>
#include <functional>
#include <vector>

namespace hus {

using Complex = std::complex<double>;
/// A point of a coordinate domain in R^n.
using Point = std::vector<double>;
/// A value in the target space C^m.
using Value = std::vector<Complex>;

using FieldFn = std::function<Point(const Point&)>;
using DomainFn = std::function<bool(const Point&)>;
using CurveFn = std::function<Value(double)>;

/// Max of component moduli.
double max_modulus(const Value& v);
double euclidean_norm(const Point& x);
double max_abs(const Point& x);

struct Tolerances {
  double ode_rel = 1e-12;
  double ode_abs = 1e-13;
  double quad_tol = 1e-9;
  double fd_step_scale = 1e-5;

  /// Throws InvalidParams unless every field is in (0, 1e-2] (fd_step_scale only needs > 0).
  void validate() const;

  bool operator==(const Tolerances&) const = default;
};

/// u(s) e^{-lambda s} integrated from 0 toward omega = sign(Re lambda) * infinity.
class DampedIntegrand {
 public:
  DampedIntegrand(CurveFn u, Complex lambda);

  const CurveFn& u() const { return u_; }
  Complex lambda() const { return lambda_; }
  /// +1 when Re lambda > 0 (omega = +inf), -1 otherwise.
  int omega_sign() const { return lambda_.real() > 0 ? 1 : -1; }

 private:
  CurveFn u_;
  Complex lambda_;
};

/// Horizon T beyond which the tail u_max e^{-|Re lambda| T} / |Re lambda| is at most quad_tol / 2.
/// Clamped to [1, 1e4].
double truncation_horizon(double u_max, Complex lambda, double quad_tol);

struct QuadratureResult {
  Value value;
  double horizon = 0.0;
  std::size_t panels = 0;
  std::size_t evaluations = 0;
  /// Largest |u(s)| seen at any node.
  double max_sample = 0.0;
};

Value quad_exp_decay(const DampedIntegrand& integrand, double u_max, const Tolerances& tol);
QuadratureResult quad_exp_decay_detailed(const DampedIntegrand& integrand, double u_max,
                                         const Tolerances& tol);

/// Composite 8-point Gauss-Legendre over [a, b] with adaptive panel bisection until the summed
/// halving estimate is at most `abs_tol`. `a > b` is allowed (oriented integral).
Value integrate_panels(const CurveFn& fn, double a, double b, double abs_tol,
                       std::size_t initial_panels = 1);

/// Nodes of the composite 8-point rule with `panels` equal panels on [a, b], in order.
std::vector<double> panel_nodes(double a, double b, std::size_t panels);

/// Central difference (c(t+h) - c(t-h)) / 2h with h = scale * max(1, |t|).
Value directional_derivative(const CurveFn& curve_value, double t, double scale);

/// Dense-output trajectory from an embedded Runge-Kutta 5(4) integration.
class Trajectory {
 public:
  Trajectory(Point x0, double direction);

  double t_final() const { return times_.back(); }
  const Point& initial() const { return states_.front(); }
  const Point& final_state() const { return states_.back(); }
  std::size_t steps() const { return times_.size() - 1; }
  const std::vector<double>& times() const { return times_; }
  const std::vector<Point>& states() const { return states_; }

  /// Interpolated state at time t; t must lie between 0 and t_final().
  Point at(double t) const;

  // Used by the integrator.
  void push_step(double t1, Point x1, std::vector<Point> dense);

 private:
  double direction_;
  std::vector<double> times_;
  std::vector<Point> states_;
  // Five coefficient vectors per step for the continuous extension.
  std::vector<std::vector<Point>> dense_;
};

/// Integrates x' = field(x) from x(0) = x0 to t_final (either sign) with the
/// Dormand-Prince 5(4) pair and PI step control. Throws DomainExit when an accepted
/// state fails `contains`, StepUnderflow when the step collapses.
Trajectory solve_ivp(const FieldFn& field, const Point& x0, double t_final, const Tolerances& tol,
                     const DomainFn& contains = {});

}  // namespace hus
