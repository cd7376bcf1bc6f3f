#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "hus/config.hpp"
#include "hus/core.hpp"
#include "hus/errors.hpp"
#include "hus/geometry.hpp"
#include "hus/harness.hpp"

using namespace hus;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* format, double a, double b = 0.0, double c = 0.0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, format, a, b, c);
  return buf;
}

double sup_diff(const Value& a, const Value& b) {
  double m = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) m = std::max(m, std::abs(a[k] - b[k]));
  return m;
}

// ---------------------------------------------------------------------------
// The criterion-2 matrix, shared with criteria 3, 5 and 9.

struct MatrixRun {
  std::string label;
  ExperimentConfig config;
  VerificationReport report;
  double linearity = 0.0;
  std::string error;
};

std::vector<std::pair<std::string, ExperimentConfig>> catalog_configs() {
  std::vector<std::pair<std::string, ExperimentConfig>> out;
  auto base = [](FieldSpec field, PerturbationShape shape) {
    ExperimentConfig c;
    c.field = std::move(field);
    c.grid = default_grid(c.field);
    c.perturbation.shape = shape;
    c.perturbation.seed = 11;
    c.perturbation.envelope_width = 1.0;
    return c;
  };

  auto euler = base(EulerParams{2, HomogeneousRatio{1.0, {1.0, 0.0}, {1.0, 1.0}}, {}}, PerturbationShape::sinusoidal);
  euler.perturbation.center = {1.0, 1.0};
  out.emplace_back("euler", euler);

  out.emplace_back("affine", base(AffineParams{2, {1, 0, 0, -1}, {0, 0}}, PerturbationShape::sinusoidal));
  out.emplace_back("rotation", base(RotationParams{{1.0}}, PerturbationShape::sinusoidal));

  auto bump = base(BumpParams{{0.0, 0.0}, 2.0, {1.0, 0.5}}, PerturbationShape::bump);
  bump.perturbation.radius = 1.5;
  bump.perturbation.envelope_width = 0.0;
  out.emplace_back("bump", bump);

  GeodesicParams geo;
  geo.base_dim = 2;
  geo.metric = MetricKind::conformal_gaussian;
  geo.amplitude = 0.3;
  geo.width = 1.0;
  out.emplace_back("geodesic", base(geo, PerturbationShape::sinusoidal));
  return out;
}

// |T(y1 + y2) - T(y1) - T(y2)| at the first grid points, with f = 0 so T is linear.
double linearity_defect(const ExperimentConfig& config) {
  const auto setup = build_setup(config);
  const auto y1 = make_candidate(config, setup.problem, setup.flow);
  PerturbationSpec other = config.perturbation;
  other.seed += 1;
  other.shape = PerturbationShape::random_smoothed;
  other.envelope_width = 1.0;
  const auto y2 = make_perturbation(other, dim_of(config.field), config.value_dim);
  const CandidateSolution sum{[&](const Point& x) {
                                Value a = y1.value(x);
                                const Value b = y2.value(x);
                                for (std::size_t k = 0; k < a.size(); ++k) a[k] += b[k];
                                return a;
                              },
                              [&](const Point& x) {
                                auto a = y1.gradient(x);
                                const auto b = y2.gradient(x);
                                for (std::size_t i = 0; i < a.size(); ++i) {
                                  for (std::size_t k = 0; k < a[i].size(); ++k) a[i][k] += b[i][k];
                                }
                                return a;
                              }};
  auto points = config.grid.points();
  points.resize(std::min<std::size_t>(points.size(), 3));
  const auto& tol = config.tolerances;
  const auto r1 = theorem1_correct(setup.problem, y1, setup.flow, points, tol);
  const auto r2 = theorem1_correct(setup.problem, y2, setup.flow, points, tol);
  const auto r12 = theorem1_correct(setup.problem, sum, setup.flow, points, tol);
  double worst = 0.0;
  for (std::size_t i = 0; i < points.size(); ++i) {
    Value d = r12.z_values[i];
    for (std::size_t k = 0; k < d.size(); ++k) d[k] -= r1.z_values[i][k] + r2.z_values[i][k];
    worst = std::max(worst, setup.problem.norm_of(d));
  }
  return worst;
}

std::vector<MatrixRun> run_matrix(double& matrix_seconds) {
  std::vector<MatrixRun> runs;
  const auto start = Clock::now();
  for (const auto& [name, base] : catalog_configs()) {
    for (Complex lambda : {Complex{2, 0}, Complex{-2, 0}, Complex{0.5, 1}, Complex{-0.5, 0}}) {
      for (double magnitude : {0.01, 0.1}) {
        MatrixRun run;
        run.config = base;
        run.config.lambda = lambda;
        run.config.perturbation.magnitude = magnitude;
        run.label = name + " lambda=" + fmt("%g%+gi", lambda.real(), lambda.imag()) + fmt(" m=%g", magnitude);
        try {
          run.report = run_experiment(run.config);
        } catch (const Error& e) {
          run.error = e.what();
        }
        runs.push_back(std::move(run));
      }
    }
  }
  matrix_seconds = seconds_since(start);
  return runs;
}

// ---------------------------------------------------------------------------

Outcome criterion1() {
  const auto start = Clock::now();
  const Tolerances tol;
  auto zero = [](double) { return Value{0.0}; };
  double worst = 0.0;
  auto sweep = [&](const Lemma1Result& r, const std::function<Complex(double)>& oracle) {
    for (int k = 0; k <= 200; ++k) {
      const double t = -5.0 + 0.05 * k;
      worst = std::max(worst, std::abs(r.b(t)[0] - oracle(t)));
    }
  };
  sweep(lemma1_correct([](double t) { return Value{std::sin(t)}; }, zero, {-1.0, 0.0}, 0.0, tol),
        [](double) { return Complex{0.0}; });
  sweep(lemma1_correct([](double) { return Value{0.75}; }, zero, {-2.0, 0.0}, 0.0, tol),
        [](double) { return Complex{0.0}; });
  // (cos t + sin t) / 2 solves a' = -a + cos t exactly.
  auto exact = [](double t) { return Complex{0.5 * (std::cos(t) + std::sin(t))}; };
  sweep(lemma1_correct([&](double t) { return Value{exact(t)}; }, [](double t) { return Value{std::cos(t)}; },
                       {-1.0, 0.0}, 0.0, tol),
        exact);
  const double secs = seconds_since(start);
  return {worst <= 1e-6 && secs < 1.0, fmt("max |b - oracle| = %.3g over [-5, 5], %.3f s", worst, secs)};
}

Outcome criterion2(const std::vector<MatrixRun>& runs, double secs) {
  double worst_margin = INFINITY;
  std::string failures;
  for (const auto& r : runs) {
    if (!r.error.empty()) {
      failures += " [" + r.label + ": " + r.error + "]";
      continue;
    }
    const auto& c = r.report.correction;
    const double margin = c.bound + 1e-5 - c.distance_measured;
    worst_margin = std::min(worst_margin, margin);
    if (margin < 0) failures += " [" + r.label + "]";
  }
  return {failures.empty() && secs < 30.0,
          fmt("%g runs, min(bound + 1e-5 - distance) = %.3g, %.2f s", static_cast<double>(runs.size()),
              worst_margin, secs) +
              failures};
}

Outcome criterion3(const std::vector<MatrixRun>& runs) {
  double worst = 0.0;
  bool ok = true;
  for (const auto& r : runs) {
    if (!r.error.empty()) {
      ok = false;
      continue;
    }
    worst = std::max(worst, r.report.residual_of_z_max);
  }
  return {ok && worst <= 1e-5, fmt("max residual of z = %.3g", worst)};
}

Outcome criterion4() {
  ExperimentConfig c;
  c.field = AffineParams{1, {0.0}, {1.0}};
  c.lambda = {-2.0, 0.0};
  c.perturbation.shape = PerturbationShape::constant;
  c.perturbation.magnitude = 0.3;
  c.grid = GridSpec{{-5.0}, {5.0}, {21}, 0};
  const auto run = run_correction(c);
  const double ratio = run.summary.distance_measured / run.summary.bound;
  return {ratio >= 0.99 && ratio <= 1.01, fmt("distance / bound = %.9f", ratio)};
}

Outcome criterion5(const std::vector<MatrixRun>& runs) {
  double worst = 0.0;
  std::size_t count = 0;
  bool ok = true;
  for (const auto& r : runs) {
    const auto kind = kind_of(r.config.field);
    if (kind != FieldKind::affine && kind != FieldKind::rotation) continue;
    if (!r.error.empty()) {
      ok = false;
      continue;
    }
    worst = std::max(worst, r.report.flow_compat_max_defect);
    ++count;
  }
  return {ok && count > 0 && worst <= 1e-5,
          fmt("max |z(Phi(t, x)) - b_x(t)| = %.3g over %g runs, |t| <= 2", worst, static_cast<double>(count))};
}

Outcome criterion6() {
  ExperimentConfig c;
  c.field = RotationParams{{1.0}};
  c.lambda = {1.0, 0.0};
  c.perturbation.shape = PerturbationShape::bump;
  c.perturbation.magnitude = 0.1;
  c.perturbation.center = {0.5, 0.0};
  c.perturbation.radius = 1.0;
  c.grid = default_grid(c.field);
  const auto r = run_experiment(c);
  const auto& s = r.correction;
  const bool ok = s.z_sup <= 1e-5 && s.y_sup <= s.epsilon_measured + 1e-5;
  return {ok, fmt("sup|z| = %.3g, sup|y| = %.4g, epsilon = %.4g", s.z_sup, s.y_sup, s.epsilon_measured)};
}

Outcome criterion7() {
  const Tolerances tol;
  double worst = 0.0;

  const EulerParams euler{2, HomogeneousRatio{1.0, {1.0, 0.0}, {1.0, 1.0}}, {}};
  const AffineParams affine{2, {0.3, -1.0, 1.0, 0.3}, {0.0, 0.0}};
  const AffineParams shear{3, {0, 1, 0, 0, 0, 0, 0, 0, 0}, {0.0, 0.0, 0.5}};
  for (const FieldSpec& spec : {FieldSpec{euler}, FieldSpec{affine}, FieldSpec{shear}}) {
    const auto field = std::make_shared<const VectorField>(catalog_field(spec));
    const FlowMap numerical(field, tol, true);
    const std::size_t n = field->dim();
    const bool orthant = kind_of(spec) == FieldKind::euler;
    // Points with |x| <= 2 (inside the orthant for Euler fields).
    std::vector<Point> pts;
    for (int i = 0; i < 4; ++i) {
      Point x(n);
      for (std::size_t k = 0; k < n; ++k) {
        const double u = std::cos(1.3 * i + 0.7 * k);
        x[k] = orthant ? 0.6 + 0.6 * std::abs(u) : 1.1 * u;
      }
      pts.push_back(x);
    }
    for (const auto& x : pts) {
      for (int j = 0; j <= 12; ++j) {
        const double t = -3.0 + 0.5 * j;
        Point oracle;
        if (orthant) {
          // e^{t g(x)} x with g = x1 / (x1 + x2).
          const double g = x[0] / (x[0] + x[1]);
          oracle = {std::exp(t * g) * x[0], std::exp(t * g) * x[1]};
        } else {
          const auto& p = std::get<AffineParams>(spec);
          const auto e = matrix_exponential(p.matrix, n, t);
          oracle.assign(n, 0.0);
          for (std::size_t r = 0; r < n; ++r) {
            for (std::size_t c = 0; c < n; ++c) oracle[r] += e[r * n + c] * x[c];
            oracle[r] += t * p.offset[r];
          }
        }
        const auto got = numerical.flow_at(t, x);
        for (std::size_t k = 0; k < n; ++k) worst = std::max(worst, std::abs(got[k] - oracle[k]));
      }
    }
  }

  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> time(-1.5, 1.5);
  double semigroup = 0.0;
  GeodesicParams geo;
  geo.base_dim = 2;
  geo.metric = MetricKind::conformal_gaussian;
  geo.amplitude = 0.3;
  const std::vector<FieldSpec> fields{euler, affine, RotationParams{{1.0, 2.0}}, BumpParams{{0, 0}, 2.0, {1.0, 0.5}}, geo};
  for (std::size_t f = 0; f < fields.size(); ++f) {
    const auto field = std::make_shared<const VectorField>(catalog_field(fields[f]));
    const FlowMap numerical(field, tol, true);
    const std::size_t n = field->dim();
    const bool orthant = kind_of(fields[f]) == FieldKind::euler;
    std::uniform_real_distribution<double> coord(orthant ? 0.5 : -1.0, orthant ? 1.4 : 1.0);
    std::vector<SemigroupSample> samples;
    for (int i = 0; i < 100; ++i) {
      SemigroupSample s;
      s.t = time(rng);
      s.s = time(rng);
      s.x.resize(n);
      for (auto& v : s.x) v = coord(rng);
      samples.push_back(std::move(s));
    }
    semigroup = std::max(semigroup, check_semigroup(numerical, samples));
  }
  return {worst <= 1e-7 && semigroup <= 1e-6,
          fmt("max |numerical - closed form| = %.3g, semigroup defect = %.3g (5 fields x 100 triples)", worst,
              semigroup)};
}

Outcome criterion8() {
  const Tolerances tol;
  const Complex lambda{-0.5, 1.0};
  auto a = [](double t) { return Complex{std::cos(2 * t), 0.3 * std::sin(t)}; };
  auto f = [](double t) { return Complex{0.2 * std::cos(t), 0.0}; };
  const auto field = std::make_shared<const VectorField>(catalog_field(AffineParams{1, {0.0}, {1.0}}));
  const StabilityProblem p(field, lambda, [f](const Point& x) { return Value{f(x[0])}; }, 1);
  const FlowMap flow(field, tol);
  std::vector<Point> pts;
  for (int k = 0; k < 50; ++k) pts.push_back({-4.0 + 8.0 * k / 49.0});
  const CandidateSolution y{[a](const Point& x) { return Value{a(x[0])}; }, {}};
  const auto t1 = theorem1_correct(p, y, flow, pts, tol);
  const auto l1 = lemma1_correct([a](double t) { return Value{a(t)}; }, [f](double t) { return Value{f(t)}; },
                                 lambda, 0.0, tol);
  double worst = 0.0;
  for (std::size_t i = 0; i < pts.size(); ++i) worst = std::max(worst, sup_diff(t1.z_values[i], l1.b(pts[i][0])));
  return {worst <= 1e-6, fmt("max |theorem1 - lemma1| = %.3g at 50 times", worst)};
}

Outcome criterion9(std::vector<MatrixRun>& runs) {
  double idem = 0.0, lin = 0.0;
  bool ok = true;
  for (auto& r : runs) {
    if (!r.error.empty()) {
      ok = false;
      continue;
    }
    idem = std::max(idem, r.report.idempotence_defect);
    try {
      r.linearity = linearity_defect(r.config);
    } catch (const Error& e) {
      ok = false;
      std::printf("  linearity failed for %s: %s\n", r.label.c_str(), e.what());
      continue;
    }
    lin = std::max(lin, r.linearity);
  }
  return {ok && idem <= 1e-5 && lin <= 1e-5, fmt("idempotence defect = %.3g, linearity defect = %.3g", idem, lin)};
}

Outcome criterion10() {
  const auto configs = catalog_configs();
  bool same = true;
  for (std::size_t i = 0; i < 3; ++i) {
    auto c = configs[i].second;
    c.perturbation.magnitude = 0.1;
    const auto a = report_to_json(run_experiment(c)).dump(2);
    const auto b = report_to_json(run_experiment(c)).dump(2);
    same = same && a == b;
  }
  return {same, same ? "reports identical byte for byte (3 configs)" : "reports differ"};
}

}  // namespace

int main() {
  int failures = 0;
  auto report = [&](int id, const char* name, const std::function<Outcome()>& fn) {
    Outcome o;
    try {
      o = fn();
    } catch (const std::exception& e) {
      o = {false, std::string("error: ") + e.what()};
    }
    if (!o.pass) ++failures;
    std::printf("criterion %2d %-28s %s  %s\n", id, name, o.pass ? "PASS" : "FAIL", o.detail.c_str());
    std::fflush(stdout);
  };

  double matrix_seconds = 0.0;
  auto runs = run_matrix(matrix_seconds);

  report(1, "lemma-1 oracles", criterion1);
  report(2, "theorem-1 bound", [&] { return criterion2(runs, matrix_seconds); });
  report(3, "exactness of correction", [&] { return criterion3(runs); });
  report(4, "tightness", criterion4);
  report(5, "flow compatibility", [&] { return criterion5(runs); });
  report(6, "periodic corollary", criterion6);
  report(7, "flow oracles", criterion7);
  report(8, "reduction consistency", criterion8);
  report(9, "idempotence and linearity", [&] { return criterion9(runs); });
  report(10, "determinism", criterion10);

  std::printf("%d of 10 criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
