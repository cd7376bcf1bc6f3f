#include <cmath>
#include <numbers>

#include "doctest.h"
#include "hus/core.hpp"
#include "hus/errors.hpp"

using namespace hus;

namespace {

std::shared_ptr<const VectorField> line_field() {
  return std::make_shared<const VectorField>(catalog_field(AffineParams{1, {0.0}, {1.0}}));
}

std::shared_ptr<const VectorField> rotation_field() {
  return std::make_shared<const VectorField>(catalog_field(RotationParams{{1.0}}));
}

ValueFn zero_forcing(std::size_t m = 1) {
  return [m](const Point&) { return Value(m, Complex{}); };
}

CandidateSolution from_curve(std::function<Complex(double)> f) {
  return {[f](const Point& x) { return Value{f(x[0])}; }, {}};
}

std::vector<Point> line_points(double lo, double hi, int n) {
  std::vector<Point> pts;
  for (int k = 0; k < n; ++k) pts.push_back({lo + (hi - lo) * k / (n - 1)});
  return pts;
}

}  // namespace

TEST_CASE("hus_bound") {
  CHECK(hus_bound(0.0, {1.0, 0.0}) == 0.0);
  CHECK(hus_bound(0.1, {2.0, 1.0}) == doctest::Approx(0.05));
  CHECK(hus_bound(1.0, {-0.5, 0.0}) == doctest::Approx(2.0));
  CHECK_THROWS_AS(hus_bound(1.0, {0.0, 2.0}), InvalidLambda);
}

TEST_CASE("value norms") {
  const Value v{Complex{3.0, 4.0}, Complex{0.0, -1.0}};
  CHECK(value_norm(v, NormKind::max_modulus) == doctest::Approx(5.0));
  CHECK(value_norm(v, NormKind::euclidean) == doctest::Approx(std::sqrt(26.0)));
}

TEST_CASE("stability problem rejects Re lambda = 0") {
  CHECK_THROWS_AS(StabilityProblem(line_field(), {0.0, 1.0}, {}, 1), InvalidLambda);
  const StabilityProblem p(line_field(), {-0.5, 1.0}, {}, 2);
  CHECK(p.omega_sign() == -1);
  CHECK(p.forcing()({0.0}) == Value(2, Complex{}));
}

TEST_CASE("residual field examples") {
  SUBCASE("exact zero solution") {
    const StabilityProblem p(rotation_field(), {1.0, 0.0}, zero_forcing(), 1);
    const FlowMap flow(p.field_ptr(), Tolerances{});
    const CandidateSolution y{[](const Point&) { return Value{0.0}; }, {}};
    CHECK(max_modulus(residual_field(p, y, flow)({0.4, -1.0})) <= 1e-8);
  }
  SUBCASE("euler field with y = x^2") {
    const auto field = std::make_shared<const VectorField>(catalog_field(EulerParams{1, {}, {}}));
    const StabilityProblem p(field, {1.0, 0.0}, zero_forcing(), 1);
    const FlowMap flow(field, Tolerances{});
    CandidateSolution y{[](const Point& x) { return Value{x[0] * x[0]}; }, {}};
    const auto fd = residual_field(p, y, flow);
    y.gradient = [](const Point& x) { return std::vector<Value>{Value{2.0 * x[0]}}; };
    const auto analytic = residual_field(p, y, flow);
    for (double x : {0.5, 1.0, 1.7, 3.0}) {
      CHECK(std::abs(fd({x})[0] - x * x) <= 1e-6 * std::max(1.0, x * x));
      CHECK(std::abs(analytic({x})[0] - x * x) <= 1e-12 * std::max(1.0, x * x));
    }
  }
  SUBCASE("rotation field with a constant") {
    const StabilityProblem p(rotation_field(), {1.0, 0.0}, zero_forcing(), 1);
    const FlowMap flow(p.field_ptr(), Tolerances{});
    const CandidateSolution y{[](const Point&) { return Value{Complex{0.3, -0.2}}; }, {}};
    const auto r = residual_field(p, y, flow)({1.0, 1.5});
    CHECK(std::abs(r[0] - Complex{-0.3, 0.2}) <= 1e-10);
  }
}

TEST_CASE("gradient discrepancy") {
  CandidateSolution y{[](const Point& x) { return Value{std::sin(x[0]) * x[1]}; },
                      [](const Point& x) {
                        return std::vector<Value>{Value{std::cos(x[0]) * x[1], std::sin(x[0])}};
                      }};
  CHECK(gradient_discrepancy(y, {{0.1, 0.2}, {1.0, -2.0}}) <= 1e-4);
  y.gradient = [](const Point&) { return std::vector<Value>{Value{1.0, 1.0}}; };
  CHECK(gradient_discrepancy(y, {{0.1, 0.2}}) > 0.1);
}

TEST_CASE("lemma 1 witnesses") {
  const Tolerances tol;
  auto zero = [](double) { return Value{0.0}; };

  SUBCASE("exact input is returned unchanged") {
    // a = (cos t + sin t) / 2 solves a' = -a + cos t.
    const Complex lambda{-1.0, 0.0};
    auto a = [](double t) { return Value{0.5 * (std::cos(t) + std::sin(t))}; };
    auto h = [](double t) { return Value{std::cos(t)}; };
    const auto r = lemma1_correct(a, h, lambda, 0.0, tol);
    for (double t = -5.0; t <= 5.0; t += 0.25) CHECK(std::abs(r.b(t)[0] - a(t)[0]) <= 10 * tol.quad_tol);
    CHECK(r.sup_distance_estimate <= 10 * tol.quad_tol);
  }
  SUBCASE("sine with lambda = -1 corrects to zero") {
    const auto r = lemma1_correct([](double t) { return Value{std::sin(t)}; }, zero, {-1.0, 0.0}, 0.0, tol);
    for (double t = -5.0; t <= 5.0; t += 0.1) CHECK(std::abs(r.b(t)[0]) <= 1e-6);
    CHECK(r.sup_distance_estimate == doctest::Approx(1.0).epsilon(1e-4));
    CHECK(r.epsilon_estimate <= std::sqrt(2.0) + 1e-9);
    CHECK(r.sup_distance_estimate <= r.epsilon_estimate / 1.0 + 10 * tol.quad_tol);
  }
  SUBCASE("constant with lambda = -2 attains the bound") {
    const double c = 0.75;
    const auto r = lemma1_correct([c](double) { return Value{c}; }, zero, {-2.0, 0.0}, 0.0, tol);
    for (double t = -5.0; t <= 5.0; t += 0.1) CHECK(std::abs(r.b(t)[0]) <= 1e-6);
    CHECK(r.epsilon_estimate == doctest::Approx(2 * c));
    CHECK(r.sup_distance_estimate / (r.epsilon_estimate / 2.0) == doctest::Approx(1.0).epsilon(1e-6));
  }
  SUBCASE("complex lambda, forcing, and the ODE residual of b") {
    // a = sin t + 1, h = 1, lambda = 0.5 + 2i. Unique bounded solution: b = -h / lambda.
    const Complex lambda{0.5, 2.0};
    auto a = [](double t) { return Value{std::sin(t) + 1.0}; };
    auto h = [](double) { return Value{1.0}; };
    const auto r = lemma1_correct(a, h, lambda, 0.0, tol);
    for (double t = -3.0; t <= 3.0; t += 0.5) {
      CHECK(std::abs(r.b(t)[0] + 1.0 / lambda) <= 1e-7);
      const auto db = directional_derivative(r.b, t, 1e-4);
      CHECK(std::abs(db[0] - lambda * r.b(t)[0] - 1.0) <= 1e-6);
    }
  }
  CHECK_THROWS_AS(lemma1_correct(zero, zero, {0.0, 1.0}, 0.0, tol), InvalidLambda);
}

TEST_CASE("theorem 1 on the line reduces to lemma 1") {
  const Tolerances tol;
  const Complex lambda{-0.5, 1.0};
  auto a = [](double t) { return Complex{std::cos(2 * t), 0.3 * std::sin(t)}; };
  auto f = [](double t) { return Complex{0.2 * std::cos(t), 0.0}; };
  const StabilityProblem p(line_field(), lambda, [f](const Point& x) { return Value{f(x[0])}; }, 1);
  const FlowMap flow(p.field_ptr(), tol);
  const auto pts = line_points(-3.0, 3.0, 13);
  const auto res = theorem1_correct(p, from_curve(a), flow, pts, tol);
  const auto l1 = lemma1_correct([a](double t) { return Value{a(t)}; }, [f](double t) { return Value{f(t)}; },
                                 lambda, 0.0, tol);
  for (std::size_t i = 0; i < pts.size(); ++i) {
    CHECK(std::abs(res.z_values[i][0] - l1.b(pts[i][0])[0]) <= 1e-6);
  }
  CHECK(res.bound == doctest::Approx(res.epsilon_measured / 0.5));
  CHECK(res.distance_measured <= res.bound + 10 * tol.quad_tol);
}

TEST_CASE("theorem 1 against the unique bounded solution") {
  // V = d/dt, y' = lambda y + f with constant f has the unique bounded solution -f / lambda.
  const Tolerances tol;
  const Complex lambda{2.0, -1.0}, f0{0.4, 0.1};
  const StabilityProblem p(line_field(), lambda, [f0](const Point&) { return Value{f0}; }, 1);
  const FlowMap flow(p.field_ptr(), tol);
  auto y = from_curve([&](double t) { return -f0 / lambda + 0.3 * std::sin(t) * std::exp(-t * t); });
  const auto res = theorem1_correct(p, y, flow, line_points(-2.0, 2.0, 9), tol);
  for (const auto& z : res.z_values) CHECK(std::abs(z[0] + f0 / lambda) <= 1e-7);
  CHECK(res.omega_sign == 1);
}

TEST_CASE("theorem 1: exact input and periodic fields") {
  const Tolerances tol;
  SUBCASE("exact y is a fixed point") {
    const StabilityProblem p(rotation_field(), {-1.0, 0.5}, zero_forcing(), 1);
    const FlowMap flow(p.field_ptr(), tol);
    const CandidateSolution y{[](const Point&) { return Value{0.0}; }, {}};
    const auto res = theorem1_correct(p, y, flow, {{0.5, 0.5}, {-1.0, 2.0}}, tol);
    CHECK(res.distance_measured <= 10 * tol.quad_tol);
  }
  SUBCASE("rotation with f = 0 forces z = 0") {
    const StabilityProblem p(rotation_field(), {1.0, 0.0}, zero_forcing(), 1);
    const FlowMap flow(p.field_ptr(), tol);
    const CandidateSolution y{[](const Point& x) { return Value{0.1 * std::sin(x[0]) * std::cos(x[1])}; }, {}};
    const auto res = theorem1_correct(p, y, flow, {{0.5, 0.5}, {-1.0, 2.0}, {1.5, -0.2}}, tol);
    for (const auto& z : res.z_values) CHECK(std::abs(z[0]) <= 1e-5);
    CHECK(res.distance_measured <= res.bound + 10 * tol.quad_tol);
  }
}

TEST_CASE("theorem 1: idempotence, linearity, epsilon cap") {
  const Tolerances tol;
  const StabilityProblem p(rotation_field(), {-0.5, 1.0}, zero_forcing(2), 2);
  const FlowMap flow(p.field_ptr(), tol);
  const CandidateSolution y1{
      [](const Point& x) { return Value{std::sin(x[0]), Complex{0.0, x[1] * x[0]} * 0.1}; },
      [](const Point& x) {
        return std::vector<Value>{Value{std::cos(x[0]), 0.0}, Value{Complex{0.0, 0.1 * x[1]}, Complex{0.0, 0.1 * x[0]}}};
      }};
  const CandidateSolution y2{[](const Point& x) { return Value{0.2, std::cos(x[0] + x[1])}; }, {}};
  const CandidateSolution sum{[&](const Point& x) {
                                auto a = y1.value(x), b = y2.value(x);
                                return Value{a[0] + b[0], a[1] + b[1]};
                              },
                              {}};
  const std::vector<Point> pts{{0.3, -0.4}, {1.0, 1.0}};
  const auto r1 = theorem1_correct(p, y1, flow, pts, tol);
  const auto r2 = theorem1_correct(p, y2, flow, pts, tol);
  const auto r12 = theorem1_correct(p, sum, flow, pts, tol);
  Tolerances loose = tol;
  loose.quad_tol = 1e-7;
  const auto again = theorem1_correct(p, as_candidate(r1), flow, pts, loose);
  for (std::size_t i = 0; i < pts.size(); ++i) {
    for (std::size_t c = 0; c < 2; ++c) {
      CHECK(std::abs(r12.z_values[i][c] - r1.z_values[i][c] - r2.z_values[i][c]) <= 2 * 10 * tol.quad_tol);
      CHECK(std::abs(again.z_values[i][c] - r1.z_values[i][c]) <= 1e-5);
    }
  }
  CorrectionOptions cap;
  cap.epsilon_cap = 1e-3;
  CHECK_THROWS_AS(theorem1_correct(p, y1, flow, pts, tol, cap), ValidationError);
}

TEST_CASE("flow compatibility and orbit uniqueness") {
  const Tolerances tol;
  const auto field = std::make_shared<const VectorField>(catalog_field(AffineParams{2, {1, 0, 0, -1}, {0, 0}}));
  const StabilityProblem p(field, {2.0, 0.0}, zero_forcing(), 1);
  const FlowMap flow(field, tol);
  const CandidateSolution y{[](const Point& x) {
                              return Value{0.1 * std::sin(x[0]) * std::exp(-0.5 * (x[0] * x[0] + x[1] * x[1]))};
                            },
                            {}};
  const Point x{0.5, -0.7};
  const auto res = theorem1_correct(p, y, flow, {x}, tol);
  CHECK(check_flow_compatibility(p, y, flow, res, {{0.0, x}}, tol) <= 1e-12);
  std::vector<CompatibilitySample> samples;
  for (double t = -2.0; t <= 2.0; t += 0.5) samples.push_back({t, x});
  CHECK(check_flow_compatibility(p, y, flow, res, samples, tol) <= 1e-5);

  const double tau = 0.8;
  const auto bx = orbit_lemma1(p, y, flow, x, tol);
  const auto by = orbit_lemma1(p, y, flow, flow.flow_at(tau, x), tol);
  for (double t = -1.5; t <= 1.0; t += 0.5) CHECK(std::abs(by.b(t)[0] - bx.b(t + tau)[0]) <= 1e-6);
}

TEST_CASE("correction detects unbounded residuals") {
  const Tolerances tol;
  const StabilityProblem p(line_field(), {1.0, 0.0}, zero_forcing(), 1);
  const FlowMap flow(p.field_ptr(), tol);
  // alpha = 2t - t^2 grows without bound toward omega = +inf.
  const auto y = from_curve([](double t) { return Complex{t * t, 0.0}; });
  CHECK_THROWS_AS(theorem1_correct(p, y, flow, {{0.0}}, tol), BoundViolated);
}
