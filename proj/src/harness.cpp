#include "hus/harness.hpp"

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include "hus/errors.hpp"

namespace hus {

const char* to_string(PerturbationShape shape) {
  switch (shape) {
    case PerturbationShape::constant: return "constant";
    case PerturbationShape::sinusoidal: return "sinusoidal";
    case PerturbationShape::bump: return "bump";
    case PerturbationShape::random_smoothed: return "random_smoothed";
  }
  return "constant";
}

std::optional<PerturbationShape> perturbation_shape_from_string(const std::string& name) {
  for (auto s : {PerturbationShape::constant, PerturbationShape::sinusoidal, PerturbationShape::bump,
                 PerturbationShape::random_smoothed}) {
    if (name == to_string(s)) return s;
  }
  return std::nullopt;
}

namespace {

using Jacobian = std::vector<Value>;

Jacobian zero_jacobian(std::size_t m, std::size_t n) { return Jacobian(m, Value(n, Complex{})); }

// Gaussian window and its gradient; width 0 disables it.
struct Window {
  Point center;
  double width = 0.0;

  double value(const Point& x) const {
    if (width == 0.0) return 1.0;
    double r2 = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) r2 += (x[i] - center[i]) * (x[i] - center[i]);
    return std::exp(-r2 / (2.0 * width * width));
  }
  Point gradient(const Point& x, double w) const {
    Point g(x.size(), 0.0);
    if (width == 0.0) return g;
    for (std::size_t i = 0; i < x.size(); ++i) g[i] = -(x[i] - center[i]) / (width * width) * w;
    return g;
  }
};

struct Mode {
  double amplitude;
  Point wave;
  double phase;
};

}  // namespace

CandidateSolution make_perturbation(const PerturbationSpec& spec, std::size_t dim,
                                    std::size_t value_dim) {
  const double m = spec.magnitude;
  const std::size_t n = dim;
  const Point center = spec.center.empty() ? Point(n, 0.0) : spec.center;
  const Window window{center, spec.envelope_width};

  switch (spec.shape) {
    case PerturbationShape::constant:
      return {[m, value_dim](const Point&) { return Value(value_dim, Complex{m, 0.0}); },
              [value_dim, n](const Point&) { return zero_jacobian(value_dim, n); }};

    case PerturbationShape::sinusoidal: {
      const std::size_t axis = spec.axis;
      const double k = spec.frequency;
      auto value = [=](const Point& x) {
        const double w = window.value(x);
        Value v(value_dim);
        for (std::size_t c = 0; c < value_dim; ++c) {
          v[c] = m * std::sin(k * x[axis] + 0.5 * static_cast<double>(c)) * w;
        }
        return v;
      };
      auto grad = [=](const Point& x) {
        const double w = window.value(x);
        const Point gw = window.gradient(x, w);
        Jacobian jac = zero_jacobian(value_dim, n);
        for (std::size_t c = 0; c < value_dim; ++c) {
          const double arg = k * x[axis] + 0.5 * static_cast<double>(c);
          const double s = std::sin(arg), co = std::cos(arg);
          for (std::size_t j = 0; j < n; ++j) jac[c][j] = m * s * gw[j];
          jac[c][axis] += m * k * co * w;
        }
        return jac;
      };
      return {value, grad};
    }

    case PerturbationShape::bump: {
      const double rad = spec.radius;
      auto r2_of = [center, rad](const Point& x) {
        double r2 = 0.0;
        for (std::size_t i = 0; i < x.size(); ++i) {
          const double u = (x[i] - center[i]) / rad;
          r2 += u * u;
        }
        return r2;
      };
      auto value = [=](const Point& x) {
        const double r2 = r2_of(x);
        const double phi = r2 < 1.0 ? std::exp(1.0 - 1.0 / (1.0 - r2)) : 0.0;
        return Value(value_dim, Complex{m * phi, 0.0});
      };
      auto grad = [=](const Point& x) {
        Jacobian jac = zero_jacobian(value_dim, n);
        const double r2 = r2_of(x);
        if (r2 >= 1.0) return jac;
        const double phi = std::exp(1.0 - 1.0 / (1.0 - r2));
        const double factor = -2.0 * m * phi / ((1.0 - r2) * (1.0 - r2) * rad * rad);
        for (std::size_t c = 0; c < value_dim; ++c) {
          for (std::size_t j = 0; j < n; ++j) jac[c][j] = factor * (x[j] - center[j]);
        }
        return jac;
      };
      return {value, grad};
    }

    case PerturbationShape::random_smoothed: {
      std::mt19937_64 rng(spec.seed);
      std::uniform_real_distribution<double> unit(-1.0, 1.0);
      std::uniform_real_distribution<double> wave(-2.0, 2.0);
      std::uniform_real_distribution<double> phase(0.0, 2.0 * std::numbers::pi);
      std::vector<std::vector<Mode>> modes(value_dim);
      for (auto& comp : modes) {
        double total = 0.0;
        for (std::size_t k = 0; k < std::max<std::size_t>(spec.modes, 1); ++k) {
          Mode md{unit(rng), Point(n), 0.0};
          for (auto& kj : md.wave) kj = wave(rng);
          md.phase = phase(rng);
          total += std::abs(md.amplitude);
          comp.push_back(std::move(md));
        }
        for (auto& md : comp) md.amplitude *= total > 0.0 ? m / total : 0.0;
      }
      auto value = [=](const Point& x) {
        const double w = window.value(x);
        Value v(value_dim);
        for (std::size_t c = 0; c < value_dim; ++c) {
          double s = 0.0;
          for (const auto& md : modes[c]) {
            double arg = md.phase;
            for (std::size_t j = 0; j < n; ++j) arg += md.wave[j] * x[j];
            s += md.amplitude * std::sin(arg);
          }
          v[c] = s * w;
        }
        return v;
      };
      auto grad = [=](const Point& x) {
        const double w = window.value(x);
        const Point gw = window.gradient(x, w);
        Jacobian jac = zero_jacobian(value_dim, n);
        for (std::size_t c = 0; c < value_dim; ++c) {
          for (const auto& md : modes[c]) {
            double arg = md.phase;
            for (std::size_t j = 0; j < n; ++j) arg += md.wave[j] * x[j];
            const double s = std::sin(arg), co = std::cos(arg);
            for (std::size_t j = 0; j < n; ++j) {
              jac[c][j] += md.amplitude * (co * md.wave[j] * w + s * gw[j]);
            }
          }
        }
        return jac;
      };
      return {value, grad};
    }
  }
  throw InvalidParams("unknown perturbation shape");
}

// ---------------------------------------------------------------------------

namespace {

constexpr std::array<unsigned, 16> kPrimes = {2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53};

double radical_inverse(std::size_t index, unsigned base) {
  double inv = 1.0 / base, f = inv, r = 0.0;
  while (index > 0) {
    r += f * static_cast<double>(index % base);
    index /= base;
    f *= inv;
  }
  return r;
}

}  // namespace

std::vector<Point> GridSpec::points() const {
  const std::size_t n = lower.size();
  std::vector<Point> out;
  if (n == 0) return out;
  std::size_t total = 1;
  for (auto c : counts) total *= c;
  out.reserve(total + halton);
  std::vector<std::size_t> idx(n, 0);
  for (std::size_t k = 0; k < total; ++k) {
    Point x(n);
    for (std::size_t i = 0; i < n; ++i) {
      x[i] = counts[i] == 1 ? 0.5 * (lower[i] + upper[i])
                            : lower[i] + (upper[i] - lower[i]) * static_cast<double>(idx[i]) /
                                             static_cast<double>(counts[i] - 1);
    }
    out.push_back(std::move(x));
    for (std::size_t i = n; i-- > 0;) {
      if (++idx[i] < counts[i]) break;
      idx[i] = 0;
    }
  }
  for (std::size_t k = 1; k <= halton; ++k) {
    Point x(n);
    for (std::size_t i = 0; i < n; ++i) {
      x[i] = lower[i] + (upper[i] - lower[i]) * radical_inverse(k, kPrimes[i % kPrimes.size()]);
    }
    out.push_back(std::move(x));
  }
  return out;
}

bool GridSpec::on_boundary(const Point& x) const {
  for (std::size_t i = 0; i < x.size() && i < lower.size(); ++i) {
    if (lower[i] == upper[i]) continue;
    const double tol = 1e-12 * std::max(1.0, std::abs(upper[i] - lower[i]));
    if (std::abs(x[i] - lower[i]) <= tol || std::abs(x[i] - upper[i]) <= tol) return true;
  }
  return false;
}

// ---------------------------------------------------------------------------

void ExperimentConfig::validate() const {
  auto fail = [](const std::string& what) { throw ValidationError(what); };
  if (lambda.real() == 0.0) {
    fail("lambda.re = 0 violates the stability hypothesis Re(lambda) != 0");
  }
  if (!std::isfinite(lambda.real()) || !std::isfinite(lambda.imag())) fail("lambda must be finite");
  VectorField f;
  try {
    f = catalog_field(field);
  } catch (const InvalidParams& e) {
    fail(std::string("field: ") + e.what());
  }
  const std::size_t n = f.dim();
  if (value_dim == 0) fail("value_dim must be >= 1");
  try {
    tolerances.validate();
  } catch (const InvalidParams& e) {
    fail(e.what());
  }

  if (grid.lower.size() != n || grid.upper.size() != n || grid.counts.size() != n) {
    fail("grid lower/upper/counts must each have " + std::to_string(n) + " entries");
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (!(grid.lower[i] <= grid.upper[i])) fail("grid lower must not exceed upper");
    if (grid.counts[i] == 0) fail("grid counts must be >= 1");
  }
  const auto pts = grid.points();
  if (pts.empty()) fail("grid produces no sample points");
  for (const auto& x : pts) {
    if (!f.domain.contains(x)) fail("grid point outside the field's domain " + f.domain.description);
  }

  const auto& p = perturbation;
  if (!(p.magnitude >= 0.0)) fail("perturbation.magnitude must be >= 0");
  if (!p.center.empty() && p.center.size() != n) fail("perturbation.center has the wrong dimension");
  if (p.shape == PerturbationShape::sinusoidal && p.axis >= n) fail("perturbation.axis out of range");
  if (!(p.radius > 0.0)) fail("perturbation.radius must be positive");
  if (!(p.envelope_width >= 0.0)) fail("perturbation.envelope_width must be >= 0");

  if (exact_solution) {
    const auto& e = *exact_solution;
    if (e.kind != ExactKind::zero && e.values.size() != value_dim) {
      fail("exact_solution values must have value_dim entries");
    }
    if (e.kind == ExactKind::sine && e.axis >= n) fail("exact_solution.axis out of range");
  }
  if (forcing.kind == ForcingKind::constant && forcing.values.size() != value_dim) {
    fail("forcing values must have value_dim entries");
  }
  if (!(eval_window.first <= eval_window.second)) fail("eval_window must be ordered");
  if (!flow.x0.empty() && flow.x0.size() != n) fail("flow.x0 has the wrong dimension");
  if (flow.samples < 2) fail("flow.samples must be >= 2");
}

namespace {

CandidateSolution exact_seed(const ExperimentConfig& config, std::size_t n) {
  const std::size_t m = config.value_dim;
  const ExactSolutionSpec e = config.exact_solution.value_or(ExactSolutionSpec{});
  switch (e.kind) {
    case ExactKind::zero:
      return {[m](const Point&) { return Value(m, Complex{}); },
              [m, n](const Point&) { return zero_jacobian(m, n); }};
    case ExactKind::constant:
      return {[v = e.values](const Point&) { return v; },
              [m, n](const Point&) { return zero_jacobian(m, n); }};
    case ExactKind::sine:
      return {[v = e.values, a = e.axis](const Point& x) {
                Value out = v;
                for (auto& c : out) c *= std::sin(x[a]);
                return out;
              },
              [v = e.values, a = e.axis, m, n](const Point& x) {
                Jacobian jac = zero_jacobian(m, n);
                for (std::size_t c = 0; c < m; ++c) jac[c][a] = v[c] * std::cos(x[a]);
                return jac;
              }};
  }
  throw InvalidConfig("unknown exact solution kind");
}

}  // namespace

Setup build_setup(const ExperimentConfig& config) {
  config.validate();
  auto field = std::make_shared<const VectorField>(catalog_field(config.field));
  FlowMap flow(field, config.tolerances);
  const std::size_t m = config.value_dim;
  CandidateSolution exact = exact_seed(config, field->dim());

  // Without a seed the zero function is the exact solution, so f is zero too.
  ValueFn forcing;
  const ForcingKind kind = config.exact_solution ? config.forcing.kind : ForcingKind::zero;
  switch (kind) {
    case ForcingKind::zero:
      forcing = [m](const Point&) { return Value(m, Complex{}); };
      break;
    case ForcingKind::constant:
      forcing = [v = config.forcing.values](const Point&) { return v; };
      break;
    case ForcingKind::induced:
      forcing = [exact, field, lambda = config.lambda](const Point& x) {
        const Point v = field->eval(x);
        const auto jac = exact.gradient(x);
        Value y = exact.value(x);
        for (std::size_t i = 0; i < y.size(); ++i) {
          Complex vy{};
          for (std::size_t j = 0; j < v.size(); ++j) vy += jac[i][j] * v[j];
          y[i] = vy - lambda * y[i];
        }
        return y;
      };
      break;
  }
  StabilityProblem problem(field, config.lambda, forcing, m, config.norm);
  return Setup{field, flow, problem, exact};
}

CandidateSolution make_candidate(const ExperimentConfig& config, const StabilityProblem& problem,
                                 const FlowMap& flow) {
  const std::size_t n = problem.field().dim();
  CandidateSolution exact = exact_seed(config, n);
  const auto alpha = residual_field(problem, exact, flow);
  for (const auto& x : config.grid.points()) {
    const double r = problem.norm_of(alpha(x));
    if (!(r <= 1e-8)) {
      std::ostringstream msg;
      msg << "exact_solution is not exact: residual " << r << " at a grid point";
      throw InvalidConfig(msg.str());
    }
  }
  const CandidateSolution p = make_perturbation(config.perturbation, n, config.value_dim);
  return {[exact, p](const Point& x) {
            Value v = exact.value(x);
            const Value pv = p.value(x);
            for (std::size_t i = 0; i < v.size(); ++i) v[i] += pv[i];
            return v;
          },
          [exact, p](const Point& x) {
            auto j = exact.gradient(x);
            const auto pj = p.gradient(x);
            for (std::size_t i = 0; i < j.size(); ++i) {
              for (std::size_t k = 0; k < j[i].size(); ++k) j[i][k] += pj[i][k];
            }
            return j;
          }};
}

SupEstimate estimate_sup_norm(const ValueFn& fn, const std::vector<Point>& points, NormKind norm) {
  SupEstimate est;
  for (const auto& x : points) {
    const double v = value_norm(fn(x), norm);
    if (est.argmax.empty() || v > est.value) {
      est.value = v;
      est.argmax = x;
    }
    ++est.samples;
  }
  return est;
}

SupEstimate estimate_sup_norm(const ValueFn& fn, const GridSpec& grid, NormKind norm) {
  return estimate_sup_norm(fn, grid.points(), norm);
}

CorrectionSummary summarize(const CorrectionResult& result, const StabilityProblem& problem) {
  CorrectionSummary s;
  s.epsilon_measured = result.epsilon_measured;
  s.bound = result.bound;
  s.distance_measured = result.distance_measured;
  s.omega_sign = result.omega_sign;
  s.sample_count = result.sample_count;
  s.u_max = result.u_max;
  s.horizon = result.horizon;
  s.eval_point_count = result.eval_points.size();
  for (const auto& v : result.y_values) s.y_sup = std::max(s.y_sup, problem.norm_of(v));
  for (const auto& v : result.z_values) s.z_sup = std::max(s.z_sup, problem.norm_of(v));
  return s;
}

std::map<std::string, bool> VerificationReport::verdicts() const {
  return {
      {"bound", correction.distance_measured <= correction.bound + bound_slack},
      {"residual_of_z", residual_of_z_max <= thresholds.residual},
      {"flow_compat", flow_compat_max_defect <= thresholds.flow_compat},
      {"semigroup", semigroup_max_defect <= thresholds.semigroup},
      {"idempotence", idempotence_defect <= thresholds.idempotence},
  };
}

bool VerificationReport::all_pass() const {
  for (const auto& [name, ok] : verdicts()) {
    if (!ok) return false;
  }
  return true;
}

namespace {

// Re-raises a library error with the stage name prefixed, preserving its type.
template <typename F>
auto staged(const char* stage, F&& fn) -> decltype(fn()) {
  auto label = [stage](const std::exception& e) { return std::string("[") + stage + "] " + e.what(); };
  try {
    return fn();
  } catch (const DomainExit& e) {
    throw DomainExit(label(e));
  } catch (const StepUnderflow& e) {
    throw StepUnderflow(label(e));
  } catch (const BoundViolated& e) {
    throw BoundViolated(label(e));
  } catch (const QuadratureStall& e) {
    throw QuadratureStall(label(e));
  } catch (const InvalidLambda& e) {
    throw InvalidLambda(label(e));
  } catch (const InvalidParams& e) {
    throw InvalidParams(label(e));
  } catch (const InvalidConfig& e) {
    throw InvalidConfig(label(e));
  } catch (const ValidationError& e) {
    throw ValidationError(label(e));
  }
}

std::vector<std::size_t> spread_indices(std::size_t total, std::size_t want) {
  std::vector<std::size_t> idx;
  want = std::min(want, total);
  if (want == 0) return idx;
  if (want == 1) return {total / 2};
  for (std::size_t i = 0; i < want; ++i) idx.push_back(i * (total - 1) / (want - 1));
  return idx;
}

class StageClock {
 public:
  explicit StageClock(std::map<std::string, double>& sink) : sink_(sink) {}
  void lap(const std::string& name) {
    const auto now = std::chrono::steady_clock::now();
    sink_[name] = std::chrono::duration<double>(now - last_).count();
    last_ = now;
  }

 private:
  std::map<std::string, double>& sink_;
  std::chrono::steady_clock::time_point last_ = std::chrono::steady_clock::now();
};

}  // namespace

CorrectionRun run_correction(const ExperimentConfig& config) {
  const Setup setup = staged("build", [&] { return build_setup(config); });
  const auto y = staged("candidate", [&] { return make_candidate(config, setup.problem, setup.flow); });
  CorrectionRun run;
  run.points = config.grid.points();
  const auto result = staged("correction", [&] {
    return theorem1_correct(setup.problem, y, setup.flow, run.points, config.tolerances);
  });
  run.z_values = result.z_values;
  run.summary = summarize(result, setup.problem);
  const double slack = config.thresholds.bound_quad_multiple * config.tolerances.quad_tol;
  run.bound_check.margin = run.summary.bound + slack - run.summary.distance_measured;
  run.bound_check.pass = run.bound_check.margin >= 0.0;
  return run;
}

VerificationReport run_experiment(const ExperimentConfig& config) {
  VerificationReport report;
  report.thresholds = config.thresholds;
  report.bound_slack = config.thresholds.bound_quad_multiple * config.tolerances.quad_tol;
  StageClock clock(report.wall_times);

  const Setup setup = staged("build", [&] { return build_setup(config); });
  const auto& problem = setup.problem;
  const auto& flow = setup.flow;
  const auto& tol = config.tolerances;
  const auto y = staged("candidate", [&] { return make_candidate(config, problem, flow); });
  clock.lap("setup");

  const auto points = config.grid.points();
  const auto result =
      staged("correction", [&] { return theorem1_correct(problem, y, flow, points, tol); });
  report.correction = summarize(result, problem);
  report.sample_count = result.sample_count;
  report.bound_check.margin =
      report.correction.bound + report.bound_slack - report.correction.distance_measured;
  report.bound_check.pass = report.bound_check.margin >= 0.0;
  clock.lap("correction");

  // Where |y - z| peaks on the box boundary the sampled sup may be far from the true one.
  {
    double best = -1.0;
    std::size_t arg = 0;
    for (std::size_t i = 0; i < points.size(); ++i) {
      Value d = result.y_values[i];
      for (std::size_t k = 0; k < d.size(); ++k) d[k] -= result.z_values[i][k];
      const double v = problem.norm_of(d);
      if (v > best) {
        best = v;
        arg = i;
      }
    }
    if (best > report.bound_slack && config.grid.on_boundary(points[arg])) {
      report.warnings.push_back("sup of |y - z| attained on the sample-box boundary: possibly unbounded");
    }
  }

  const CandidateSolution z = as_candidate(result);
  report.residual_of_z_max = staged("verify-residual", [&] {
    const auto alpha_z = residual_field(problem, z, flow);
    return estimate_sup_norm(alpha_z, points, problem.norm()).value;
  });
  clock.lap("verify_residual");

  report.flow_compat_max_defect = staged("verify-compat", [&] {
    std::vector<CompatibilitySample> samples;
    const auto [lo, hi] = config.eval_window;
    const std::size_t nt = std::max<std::size_t>(config.compat_times, 1);
    for (auto i : spread_indices(points.size(), config.compat_points)) {
      for (std::size_t k = 0; k < nt; ++k) {
        const double t = nt == 1 ? 0.5 * (lo + hi)
                                 : lo + (hi - lo) * static_cast<double>(k) / static_cast<double>(nt - 1);
        samples.push_back({t, points[i]});
      }
    }
    return check_flow_compatibility(problem, y, flow, result, samples, tol);
  });
  clock.lap("verify_compat");

  report.semigroup_max_defect = staged("verify-semigroup", [&] {
    std::mt19937_64 rng(config.perturbation.seed ^ 0x9e3779b97f4a7c15ULL);
    std::uniform_real_distribution<double> time(config.eval_window.first, config.eval_window.second);
    std::uniform_int_distribution<std::size_t> pick(0, points.size() - 1);
    std::vector<SemigroupSample> samples;
    for (std::size_t i = 0; i < config.semigroup_samples; ++i) {
      SemigroupSample s;
      s.t = time(rng);
      s.s = time(rng);
      s.x = points[pick(rng)];
      samples.push_back(std::move(s));
    }
    return check_semigroup(flow, samples);
  });
  clock.lap("verify_semigroup");

  report.idempotence_defect = staged("verify-idempotence", [&] {
    std::vector<Point> subset;
    std::vector<Value> z_subset;
    for (auto i : spread_indices(points.size(), config.idempotence_points)) {
      subset.push_back(points[i]);
      z_subset.push_back(result.z_values[i]);
    }
    if (subset.empty()) return 0.0;
    // The residual of z is a difference quotient of a quadrature; its noise floor sits far
    // above quad_tol, so the second pass integrates to a tolerance set by the threshold.
    Tolerances second = tol;
    second.quad_tol = std::min(1e-2, std::max(tol.quad_tol, 1e-2 * config.thresholds.idempotence));
    // Residual noise below threshold * |Re lambda| cannot move z by more than the threshold.
    CorrectionOptions opts;
    opts.u_max_floor = config.thresholds.idempotence * std::abs(problem.lambda().real());
    const auto again = theorem1_correct(problem, z, flow, subset, second, opts);
    double worst = 0.0;
    for (std::size_t i = 0; i < subset.size(); ++i) {
      Value d = again.z_values[i];
      for (std::size_t k = 0; k < d.size(); ++k) d[k] -= z_subset[i][k];
      worst = std::max(worst, problem.norm_of(d));
    }
    return worst;
  });
  clock.lap("verify_idempotence");
  return report;
}

GridSpec default_grid(const FieldSpec& field) {
  const std::size_t n = dim_of(field);
  const bool orthant = kind_of(field) == FieldKind::euler;
  GridSpec g;
  g.lower.assign(n, orthant ? 0.5 : -2.0);
  g.upper.assign(n, 2.0);
  g.counts.assign(n, n <= 2 ? 5 : 3);
  g.halton = 8;
  return g;
}

std::vector<std::pair<std::string, ExperimentConfig>> demo_configs() {
  std::vector<std::pair<std::string, ExperimentConfig>> out;

  ExperimentConfig tight;
  tight.field = AffineParams{1, {0.0}, {1.0}};
  tight.lambda = {-2.0, 0.0};
  tight.perturbation.shape = PerturbationShape::constant;
  tight.perturbation.magnitude = 0.25;
  tight.perturbation.seed = 1;
  tight.grid = GridSpec{{-5.0}, {5.0}, {11}, 0};
  out.emplace_back("tightness", tight);

  ExperimentConfig periodic;
  periodic.field = RotationParams{{1.0}};
  periodic.lambda = {1.0, 0.0};
  periodic.perturbation.shape = PerturbationShape::bump;
  periodic.perturbation.magnitude = 0.1;
  periodic.perturbation.center = {0.0, 0.0};
  periodic.perturbation.radius = 1.5;
  periodic.grid = default_grid(periodic.field);
  out.emplace_back("periodic", periodic);

  ExperimentConfig euler;
  euler.field = EulerParams{2, HomogeneousRatio{1.0, {1.0, 0.0}, {1.0, 1.0}}, {}};
  euler.lambda = {2.0, 0.0};
  euler.perturbation.shape = PerturbationShape::sinusoidal;
  euler.perturbation.magnitude = 0.1;
  euler.perturbation.center = {1.0, 1.0};
  euler.perturbation.envelope_width = 1.0;
  euler.grid = default_grid(euler.field);
  out.emplace_back("euler", euler);
  return out;
}

}  // namespace hus
