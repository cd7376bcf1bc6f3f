#include "hus/core.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>
#include <utility>

#include "hus/errors.hpp"

namespace hus {

double value_norm(const Value& v, NormKind norm) {
  if (norm == NormKind::max_modulus) return max_modulus(v);
  double s = 0.0;
  for (const auto& c : v) s += std::norm(c);
  return std::sqrt(s);
}

double hus_bound(double epsilon, Complex lambda) {
  if (lambda.real() == 0.0) {
    throw InvalidLambda("stability requires Re(lambda) != 0");
  }
  return epsilon / std::abs(lambda.real());
}

StabilityProblem::StabilityProblem(std::shared_ptr<const VectorField> field, Complex lambda,
                                   ValueFn forcing, std::size_t value_dim, NormKind norm)
    : field_(std::move(field)),
      lambda_(lambda),
      forcing_(std::move(forcing)),
      value_dim_(value_dim),
      norm_(norm) {
  if (!field_) throw InvalidParams("stability problem needs a vector field");
  if (lambda_.real() == 0.0) {
    throw InvalidLambda("Re(lambda) = 0: the stability constant 1/|Re lambda| does not exist");
  }
  if (value_dim_ == 0) throw InvalidParams("value dimension must be >= 1");
  if (!forcing_) {
    forcing_ = [m = value_dim_](const Point&) { return Value(m, Complex{}); };
  }
}

double gradient_discrepancy(const CandidateSolution& y, const std::vector<Point>& points,
                            double step) {
  if (!y.has_gradient()) return 0.0;
  double worst = 0.0;
  for (const auto& x : points) {
    const auto jac = y.gradient(x);
    for (std::size_t j = 0; j < x.size(); ++j) {
      Point xp = x, xm = x;
      xp[j] += step;
      xm[j] -= step;
      const Value vp = y.value(xp), vm = y.value(xm);
      for (std::size_t i = 0; i < vp.size(); ++i) {
        const Complex fd = (vp[i] - vm[i]) / (2.0 * step);
        worst = std::max(worst, std::abs(fd - jac.at(i).at(j)));
      }
    }
  }
  return worst;
}

ValueFn residual_field(const StabilityProblem& problem, const CandidateSolution& y,
                       const FlowMap& flow) {
  const Complex lambda = problem.lambda();
  const ValueFn forcing = problem.forcing();
  const double scale = flow.tolerances().fd_step_scale;
  return [y, flow, lambda, forcing, scale](const Point& x) {
    Value vy;
    const Value yx = y.value(x);
    if (y.has_gradient()) {
      const Point v = flow.field().eval(x);
      const auto jac = y.gradient(x);
      vy.assign(yx.size(), Complex{});
      for (std::size_t i = 0; i < yx.size(); ++i) {
        for (std::size_t j = 0; j < v.size(); ++j) vy[i] += jac[i][j] * v[j];
      }
    } else {
      vy = directional_derivative([&](double s) { return y.value(flow.flow_at(s, x)); }, 0.0,
                                  scale);
    }
    const Value fx = forcing(x);
    for (std::size_t i = 0; i < vy.size(); ++i) vy[i] -= lambda * yx[i] + fx[i];
    return vy;
  };
}

// ---------------------------------------------------------------------------

namespace {

void add_into(Value& acc, const Value& v) {
  for (std::size_t i = 0; i < acc.size(); ++i) acc[i] += v[i];
}

Value scaled(Value v, Complex factor) {
  for (auto& c : v) c *= factor;
  return v;
}

// Orbit times sampled before the quadrature: the nodes of the initial panel layout over the
// horizon that a unit bound would need, or at least `min_nodes` of them.
std::vector<double> prepass_times(double eps, Complex lambda, const Tolerances& tol,
                                  std::size_t min_nodes) {
  const double horizon = truncation_horizon(std::max(eps, 1.0), lambda, tol.quad_tol);
  const double sign = lambda.real() > 0 ? 1.0 : -1.0;
  const auto panels = std::max(static_cast<std::size_t>(std::ceil(horizon / 2.0)), (min_nodes + 7) / 8);
  return panel_nodes(0.0, sign * horizon, panels);
}

// Half-line damped integral of alpha starting at `start`, checked against u_max.
QuadratureResult damped_from(const CurveFn& alpha, double start, Complex lambda, double u_max,
                             const Tolerances& tol) {
  return quad_exp_decay_detailed(
      DampedIntegrand([&alpha, start](double r) { return alpha(start + r); }, lambda), u_max, tol);
}

}  // namespace

Lemma1Result lemma1_correct(const CurveFn& a, const CurveFn& h, Complex lambda, double a0_time,
                            const Tolerances& tol, const Lemma1Options& options) {
  if (lambda.real() == 0.0) throw InvalidLambda("Re(lambda) = 0: no bounded correction exists");
  tol.validate();
  const double sign = lambda.real() > 0 ? 1.0 : -1.0;
  const double t0 = a0_time;

  Lemma1Result result;
  CurveFn alpha = [a, h, lambda, fd = tol.fd_step_scale](double s) {
    Value d = directional_derivative(a, s, fd);
    const Value as = a(s), hs = h(s);
    for (std::size_t i = 0; i < d.size(); ++i) d[i] -= lambda * as[i] + hs[i];
    return d;
  };

  // Pre-pass: sample alpha toward omega to size the truncation horizon.
  double eps = max_modulus(alpha(t0));
  double pre_max = eps;
  for (double s : prepass_times(eps, lambda, tol, options.prepass_nodes)) {
    pre_max = std::max(pre_max, max_modulus(alpha(t0 + s)));
  }
  const double u_max = std::max(1.5 * pre_max, tol.quad_tol);
  eps = pre_max;

  const auto tail = damped_from(alpha, t0, lambda, u_max, tol);
  eps = std::max(eps, tail.max_sample);
  Value anchor = a(t0);
  add_into(anchor, tail.value);

  auto b = [a, h, alpha, lambda, sign, t0, anchor, u_max, tol](double t) -> Value {
    if (t == t0) return anchor;
    if (sign * (t - t0) > 0.0) {
      // omega side: the same formula anchored at t
      Value v = a(t);
      add_into(v, damped_from(alpha, t, lambda, u_max, tol).value);
      return v;
    }
    const auto initial = static_cast<std::size_t>(std::ceil(std::abs(t - t0) / 2.0));
    const Value forced = integrate_panels(
        [&](double s) { return scaled(h(s), std::exp(-lambda * (s - t0))); }, t0, t, tol.quad_tol,
        std::max<std::size_t>(initial, 1));
    Value v = anchor;
    add_into(v, forced);
    return scaled(std::move(v), std::exp(lambda * (t - t0)));
  };

  result.b = b;
  result.u_max = u_max;
  result.epsilon_estimate = eps;
  if (options.window_samples > 0) {
    const double w = options.window_half_width;
    const std::size_t n = options.window_samples;
    double sup = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double t =
          n == 1 ? t0 : t0 - w + 2.0 * w * static_cast<double>(i) / static_cast<double>(n - 1);
      Value d = a(t);
      const Value bt = b(t);
      for (std::size_t k = 0; k < d.size(); ++k) d[k] -= bt[k];
      sup = std::max(sup, max_modulus(d));
    }
    result.sup_distance_estimate = sup;
  }
  return result;
}

// ---------------------------------------------------------------------------

namespace {

struct PointCorrection {
  Value z;
  double max_alpha = 0.0;
  std::size_t evaluations = 0;
};

PointCorrection correct_point(const ValueFn& alpha, const CandidateSolution& y, const FlowMap& flow,
                              const Point& x, Complex lambda, NormKind norm, double u_max,
                              const Tolerances& tol) {
  OrbitCursor cursor(flow, x);
  PointCorrection out;
  const auto q = quad_exp_decay_detailed(DampedIntegrand(
                                             [&](double s) {
                                               Value a = alpha(cursor.at(s));
                                               out.max_alpha = std::max(out.max_alpha, value_norm(a, norm));
                                               return a;
                                             },
                                             lambda),
                                         u_max, tol);
  out.z = y.value(x);
  add_into(out.z, q.value);
  out.evaluations = q.evaluations;
  return out;
}

}  // namespace

CorrectionResult theorem1_correct(const StabilityProblem& problem, const CandidateSolution& y,
                                  const FlowMap& flow, const std::vector<Point>& eval_points,
                                  const Tolerances& tol, const CorrectionOptions& options) {
  tol.validate();
  const Complex lambda = problem.lambda();
  const NormKind norm = problem.norm();
  const int sign = problem.omega_sign();
  const ValueFn alpha = residual_field(problem, y, flow);

  CorrectionResult result;
  result.omega_sign = sign;
  result.eval_points = eval_points;

  // Every |alpha| sample feeds the epsilon estimate. Norms dominate the max modulus,
  // so the same running max is a valid basis for the quadrature bound.
  double eps = 0.0;
  std::size_t samples = 0;
  for (const auto& x : eval_points) {
    eps = std::max(eps, problem.norm_of(alpha(x)));
    ++samples;
  }
  for (const auto& x : options.verification_points) {
    eps = std::max(eps, problem.norm_of(alpha(x)));
    ++samples;
  }

  // Pre-pass along each orbit toward omega; sizes u_max and hence the horizon T.
  const auto times = prepass_times(eps, lambda, tol, options.prepass_nodes);
  for (const auto& x : eval_points) {
    OrbitCursor cursor(flow, x);
    for (double s : times) {
      eps = std::max(eps, problem.norm_of(alpha(cursor.at(s))));
      ++samples;
    }
  }
  const double u_max = std::max({1.5 * eps, tol.quad_tol, options.u_max_floor});
  result.u_max = u_max;
  result.horizon = truncation_horizon(u_max, lambda, tol.quad_tol);

  for (const auto& x : eval_points) {
    auto pc = correct_point(alpha, y, flow, x, lambda, norm, u_max, tol);
    eps = std::max(eps, pc.max_alpha);
    samples += pc.evaluations;
    result.y_values.push_back(y.value(x));
    result.z_values.push_back(std::move(pc.z));
  }

  if (options.epsilon_cap && eps > *options.epsilon_cap) {
    std::ostringstream msg;
    msg << "measured residual " << eps << " exceeds the asserted epsilon " << *options.epsilon_cap;
    throw ValidationError(msg.str());
  }

  result.epsilon_measured = eps;
  result.bound = hus_bound(eps, lambda);
  result.sample_count = samples;
  for (std::size_t i = 0; i < eval_points.size(); ++i) {
    Value d = result.y_values[i];
    for (std::size_t k = 0; k < d.size(); ++k) d[k] -= result.z_values[i][k];
    result.distance_measured = std::max(result.distance_measured, problem.norm_of(d));
  }

  // Off the sampled orbits |alpha| may exceed u_max; the bound is widened in fixed steps so
  // that z stays a smooth function of x wherever the first attempt succeeds.
  result.corrected = [alpha, y, flow, lambda, norm, u_max, tol](const Point& x) {
    double bound = u_max;
    for (int attempt = 0;; ++attempt) {
      try {
        return correct_point(alpha, y, flow, x, lambda, norm, bound, tol).z;
      } catch (const BoundViolated&) {
        if (attempt == 3) throw;
        bound *= 4.0;
      }
    }
  };
  return result;
}

CandidateSolution as_candidate(const CorrectionResult& result) {
  return CandidateSolution{result.corrected, {}};
}

Lemma1Result orbit_lemma1(const StabilityProblem& problem, const CandidateSolution& y,
                          const FlowMap& flow, const Point& x, const Tolerances& tol) {
  auto cursor = std::make_shared<OrbitCursor>(flow, x);
  const ValueFn forcing = problem.forcing();
  CurveFn a = [cursor, y](double s) { return y.value(cursor->at(s)); };
  CurveFn h = [cursor, forcing](double s) { return forcing(cursor->at(s)); };
  Lemma1Options opts;
  opts.window_samples = 0;
  return lemma1_correct(a, h, problem.lambda(), 0.0, tol, opts);
}

double check_flow_compatibility(const StabilityProblem& problem, const CandidateSolution& y,
                                const FlowMap& flow, const CorrectionResult& result,
                                const std::vector<CompatibilitySample>& samples,
                                const Tolerances& tol) {
  std::map<Point, Lemma1Result> per_orbit;
  double worst = 0.0;
  for (const auto& smp : samples) {
    auto it = per_orbit.find(smp.x);
    if (it == per_orbit.end()) {
      it = per_orbit.emplace(smp.x, orbit_lemma1(problem, y, flow, smp.x, tol)).first;
    }
    const Value bx = it->second.b(smp.t);
    const Value z = result.corrected(flow.flow_at(smp.t, smp.x));
    Value d = z;
    for (std::size_t k = 0; k < d.size(); ++k) d[k] -= bx[k];
    worst = std::max(worst, problem.norm_of(d));
  }
  return worst;
}

}  // namespace hus
