#include "hus/numerics.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <sstream>
#include <utility>

#include "hus/errors.hpp"

namespace hus {

double max_modulus(const Value& v) {
  double m = 0.0;
  for (const auto& c : v) m = std::max(m, std::abs(c));
  return m;
}

double euclidean_norm(const Point& x) {
  double s = 0.0;
  for (double xi : x) s += xi * xi;
  return std::sqrt(s);
}

double max_abs(const Point& x) {
  double m = 0.0;
  for (double xi : x) m = std::max(m, std::abs(xi));
  return m;
}

void Tolerances::validate() const {
  auto check = [](double v, const char* name, bool capped) {
    if (!(v > 0.0) || !std::isfinite(v)) {
      throw InvalidParams(std::string("tolerance ") + name + " must be strictly positive");
    }
    if (capped && v > 1e-2) {
      throw InvalidParams(std::string("tolerance ") + name + " must not exceed 1e-2");
    }
  };
  check(ode_rel, "ode_rel", true);
  check(ode_abs, "ode_abs", true);
  check(quad_tol, "quad_tol", true);
  check(fd_step_scale, "fd_step_scale", false);
}

DampedIntegrand::DampedIntegrand(CurveFn u, Complex lambda) : u_(std::move(u)), lambda_(lambda) {
  if (lambda_.real() == 0.0) {
    throw InvalidLambda("Re(lambda) must be nonzero for the damped half-line integral");
  }
}

double truncation_horizon(double u_max, Complex lambda, double quad_tol) {
  const double a = std::abs(lambda.real());
  if (a == 0.0) throw InvalidLambda("Re(lambda) must be nonzero");
  if (!(u_max > 0.0)) return 1.0;
  const double t = std::log(2.0 * u_max / (quad_tol * a)) / a;
  return std::clamp(t, 1.0, 1e4);
}

namespace {

constexpr std::array<double, 4> kGaussNodes = {0.1834346424956498, 0.5255324099163290,
                                               0.7966664774136267, 0.9602898564975363};
constexpr std::array<double, 4> kGaussWeights = {0.3626837833783620, 0.3137066458778873,
                                                 0.2223810344533745, 0.1012285362903763};

void accumulate(Value& acc, const Value& v, Complex w) {
  if (acc.empty()) acc.assign(v.size(), Complex{});
  if (acc.size() != v.size()) throw InvalidParams("integrand changed its value dimension");
  for (std::size_t i = 0; i < v.size(); ++i) acc[i] += w * v[i];
}

// Composite 8-point rule; `fn` receives (s, weight) and must return the weighted value.
template <typename F>
Value gauss_composite(F&& fn, double a, double b, std::size_t panels) {
  Value acc;
  const double width = (b - a) / static_cast<double>(panels);
  const double half = 0.5 * width;
  for (std::size_t p = 0; p < panels; ++p) {
    const double mid = a + (static_cast<double>(p) + 0.5) * width;
    for (std::size_t k = 0; k < kGaussNodes.size(); ++k) {
      for (double sign : {-1.0, 1.0}) {
        const double s = mid + sign * half * kGaussNodes[k];
        accumulate(acc, fn(s), half * kGaussWeights[k]);
      }
    }
  }
  return acc;
}

double difference(const Value& a, const Value& b) {
  if (a.size() != b.size()) return std::numeric_limits<double>::infinity();
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

constexpr std::size_t kMaxRefinements = 14;
// Noisy integrands never meet the tolerance; the budget turns that into a prompt stall.
constexpr std::size_t kSegmentBudgetBase = 256;
constexpr std::size_t kSegmentBudgetPerPanel = 64;

struct Segment {
  double a = 0.0;
  double b = 0.0;
  Value whole;
  Value left;
  Value right;
  double error = 0.0;

  Value refined() const {
    Value v = left;
    for (std::size_t i = 0; i < v.size(); ++i) v[i] += right[i];
    return v;
  }
};

// Adaptive bisection: the segment with the largest halving estimate is split until the
// estimates sum to at most abs_tol. Segments may be halved kMaxRefinements times.
template <typename F>
std::pair<Value, std::size_t> refine_until(F&& fn, double a, double b, double abs_tol,
                                           std::size_t panels) {
  panels = std::max<std::size_t>(panels, 1);
  auto finish = [&](Segment& seg) {
    const double mid = 0.5 * (seg.a + seg.b);
    seg.left = gauss_composite(fn, seg.a, mid, 1);
    seg.right = gauss_composite(fn, mid, seg.b, 1);
    seg.error = difference(seg.refined(), seg.whole);
  };

  std::vector<Segment> segs(panels);
  const double width = (b - a) / static_cast<double>(panels);
  for (std::size_t p = 0; p < panels; ++p) {
    auto& seg = segs[p];
    seg.a = a + static_cast<double>(p) * width;
    seg.b = p + 1 == panels ? b : a + static_cast<double>(p + 1) * width;
    seg.whole = gauss_composite(fn, seg.a, seg.b, 1);
    finish(seg);
  }
  const double min_width = std::abs(width) / static_cast<double>(std::size_t{1} << kMaxRefinements);
  const std::size_t max_segments = kSegmentBudgetBase + kSegmentBudgetPerPanel * panels;

  while (true) {
    double total = 0.0;
    std::size_t worst = 0;
    for (std::size_t i = 0; i < segs.size(); ++i) {
      total += segs[i].error;
      if (segs[i].error > segs[worst].error) worst = i;
    }
    if (total <= abs_tol) break;
    const Segment parent = segs[worst];
    const double mid = 0.5 * (parent.a + parent.b);
    if (std::abs(mid - parent.a) < min_width || segs.size() >= max_segments) {
      std::ostringstream msg;
      msg << "panel refinement did not reach " << abs_tol << " on [" << a << ", " << b
          << "] (estimate " << total << " after " << segs.size() << " panels)";
      throw QuadratureStall(msg.str());
    }
    Segment left{parent.a, mid, parent.left, {}, {}, 0.0};
    Segment right{mid, parent.b, parent.right, {}, {}, 0.0};
    finish(left);
    finish(right);
    segs[worst] = std::move(left);
    segs.insert(segs.begin() + static_cast<std::ptrdiff_t>(worst) + 1, std::move(right));
  }

  // Summed in interval order so results do not depend on refinement history.
  Value total;
  for (const auto& seg : segs) {
    const Value v = seg.refined();
    if (total.empty()) total.assign(v.size(), Complex{});
    for (std::size_t i = 0; i < v.size(); ++i) total[i] += v[i];
  }
  return {std::move(total), segs.size()};
}

}  // namespace

Value integrate_panels(const CurveFn& fn, double a, double b, double abs_tol,
                       std::size_t initial_panels) {
  if (a == b) {
    Value v = fn(a);
    std::fill(v.begin(), v.end(), Complex{});
    return v;
  }
  return refine_until([&](double s) { return fn(s); }, a, b, abs_tol, initial_panels).first;
}

QuadratureResult quad_exp_decay_detailed(const DampedIntegrand& integrand, double u_max,
                                         const Tolerances& tol) {
  const Complex lambda = integrand.lambda();
  const double horizon = truncation_horizon(u_max, lambda, tol.quad_tol);
  const double end = integrand.omega_sign() * horizon;

  QuadratureResult result;
  result.horizon = horizon;
  const double limit = 1.1 * u_max;
  auto weighted = [&](double s) {
    Value v = integrand.u()(s);
    const double m = max_modulus(v);
    ++result.evaluations;
    result.max_sample = std::max(result.max_sample, m);
    if (m > limit) {
      std::ostringstream msg;
      msg << "|u(" << s << ")| = " << m << " exceeds the declared bound " << u_max
          << " by more than 10%";
      throw BoundViolated(msg.str());
    }
    const Complex damp = std::exp(-lambda * s);
    for (auto& c : v) c *= damp;
    return v;
  };
  const auto initial = static_cast<std::size_t>(std::ceil(horizon / 2.0));
  auto [value, panels] = refine_until(weighted, 0.0, end, 0.5 * tol.quad_tol, initial);
  result.value = std::move(value);
  result.panels = panels;
  return result;
}

Value quad_exp_decay(const DampedIntegrand& integrand, double u_max, const Tolerances& tol) {
  return quad_exp_decay_detailed(integrand, u_max, tol).value;
}

std::vector<double> panel_nodes(double a, double b, std::size_t panels) {
  panels = std::max<std::size_t>(panels, 1);
  std::vector<double> nodes;
  nodes.reserve(8 * panels);
  const double width = (b - a) / static_cast<double>(panels);
  for (std::size_t p = 0; p < panels; ++p) {
    const double mid = a + (static_cast<double>(p) + 0.5) * width;
    for (auto it = kGaussNodes.rbegin(); it != kGaussNodes.rend(); ++it) nodes.push_back(mid - 0.5 * width * *it);
    for (double g : kGaussNodes) nodes.push_back(mid + 0.5 * width * g);
  }
  return nodes;
}

Value directional_derivative(const CurveFn& curve_value, double t, double scale) {
  const double h = scale * std::max(1.0, std::abs(t));
  Value plus = curve_value(t + h);
  const Value minus = curve_value(t - h);
  if (plus.size() != minus.size()) throw InvalidParams("curve changed its value dimension");
  const double inv = 1.0 / (2.0 * h);
  for (std::size_t i = 0; i < plus.size(); ++i) plus[i] = (plus[i] - minus[i]) * inv;
  return plus;
}

// ---------------------------------------------------------------------------
// Dormand-Prince 5(4)

namespace {

namespace dp {
constexpr double c2 = 1.0 / 5.0, c3 = 3.0 / 10.0, c4 = 4.0 / 5.0, c5 = 8.0 / 9.0;
constexpr double a21 = 1.0 / 5.0;
constexpr double a31 = 3.0 / 40.0, a32 = 9.0 / 40.0;
constexpr double a41 = 44.0 / 45.0, a42 = -56.0 / 15.0, a43 = 32.0 / 9.0;
constexpr double a51 = 19372.0 / 6561.0, a52 = -25360.0 / 2187.0, a53 = 64448.0 / 6561.0,
                 a54 = -212.0 / 729.0;
constexpr double a61 = 9017.0 / 3168.0, a62 = -355.0 / 33.0, a63 = 46732.0 / 5247.0,
                 a64 = 49.0 / 176.0, a65 = -5103.0 / 18656.0;
constexpr double a71 = 35.0 / 384.0, a73 = 500.0 / 1113.0, a74 = 125.0 / 192.0,
                 a75 = -2187.0 / 6784.0, a76 = 11.0 / 84.0;
constexpr double e1 = 71.0 / 57600.0, e3 = -71.0 / 16695.0, e4 = 71.0 / 1920.0,
                 e5 = -17253.0 / 339200.0, e6 = 22.0 / 525.0, e7 = -1.0 / 40.0;
// Continuous extension (Hairer, Norsett & Wanner).
constexpr double d1 = -12715105075.0 / 11282082432.0, d3 = 87487479700.0 / 32700410799.0,
                 d4 = -10690763975.0 / 1880347072.0, d5 = 701980252875.0 / 199316789632.0,
                 d6 = -1453857185.0 / 822651844.0, d7 = 69997945.0 / 29380423.0;
}  // namespace dp

bool all_finite(const Point& x) {
  return std::all_of(x.begin(), x.end(), [](double v) { return std::isfinite(v); });
}

}  // namespace

Trajectory::Trajectory(Point x0, double direction) : direction_(direction < 0 ? -1.0 : 1.0) {
  times_.push_back(0.0);
  states_.push_back(std::move(x0));
}

void Trajectory::push_step(double t1, Point x1, std::vector<Point> dense) {
  times_.push_back(t1);
  states_.push_back(std::move(x1));
  dense_.push_back(std::move(dense));
}

Point Trajectory::at(double t) const {
  const double tau = direction_ * t;
  const double tau_end = direction_ * times_.back();
  if (tau < 0.0 || tau > tau_end) {
    std::ostringstream msg;
    msg << "time " << t << " outside the integrated window [0, " << times_.back() << "]";
    throw std::out_of_range(msg.str());
  }
  if (t == 0.0) return states_.front();
  if (tau == tau_end) return states_.back();
  // first stored time strictly beyond tau
  auto it = std::upper_bound(times_.begin(), times_.end(), t, [this](double value, double elem) {
    return direction_ * value < direction_ * elem;
  });
  const auto step = static_cast<std::size_t>(std::distance(times_.begin(), it)) - 1;
  const double t0 = times_[step];
  const double h = times_[step + 1] - t0;
  const double theta = (t - t0) / h;
  const double theta1 = 1.0 - theta;
  const auto& r = dense_[step];
  Point x(r[0].size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    x[i] = r[0][i] + theta * (r[1][i] + theta1 * (r[2][i] + theta * (r[3][i] + theta1 * r[4][i])));
  }
  return x;
}

Trajectory solve_ivp(const FieldFn& field, const Point& x0, double t_final, const Tolerances& tol,
                     const DomainFn& contains) {
  tol.validate();
  if (contains && !contains(x0)) throw DomainExit("initial point lies outside the field's domain");
  const double sign = t_final < 0 ? -1.0 : 1.0;
  Trajectory traj(x0, sign);
  const double span = std::abs(t_final);
  if (span == 0.0) return traj;

  const std::size_t n = x0.size();
  auto rhs = [&](const Point& x) {
    Point f = field(x);
    if (f.size() != n) throw InvalidParams("field returned a vector of the wrong dimension");
    if (sign < 0) {
      for (auto& v : f) v = -v;
    }
    return f;
  };
  auto scaled_norm = [&](const Point& v, const Point& ref) {
    double m = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      m = std::max(m, std::abs(v[i]) / (tol.ode_abs + tol.ode_rel * std::abs(ref[i])));
    }
    return m;
  };

  Point x = x0;
  Point k1 = rhs(x);

  // Initial step guess.
  double h;
  {
    const double d0 = scaled_norm(x, x);
    const double d1 = scaled_norm(k1, x);
    double h0 = (d0 < 1e-5 || d1 < 1e-5) ? 1e-6 : 0.01 * d0 / d1;
    h0 = std::min(h0, span);
    Point x1(n);
    for (std::size_t i = 0; i < n; ++i) x1[i] = x[i] + h0 * k1[i];
    Point f1 = rhs(x1);
    for (std::size_t i = 0; i < n; ++i) f1[i] -= k1[i];
    const double d2 = scaled_norm(f1, x) / h0;
    const double dm = std::max(d1, d2);
    const double h1 = dm <= 1e-15 ? std::max(1e-6, h0 * 1e-3) : std::pow(0.01 / dm, 0.2);
    h = std::min({100.0 * h0, h1, span});
  }

  constexpr double beta = 0.04;
  constexpr double expo1 = 0.2 - beta * 0.75;
  constexpr double safe = 0.9;
  constexpr double facc1 = 5.0;  // max shrink 1/5
  constexpr double facc2 = 0.1;  // max growth 10
  constexpr std::size_t max_steps = 2'000'000;
  double facold = 1e-4;
  bool last_rejected = false;

  double tau = 0.0;
  Point k2, k3, k4, k5, k6, k7, tmp(n), x_new(n);
  std::size_t attempts = 0;
  while (tau < span) {
    if (++attempts > max_steps) throw StepUnderflow("step budget exhausted before reaching t_final");
    if (h < 16.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, tau)) {
      std::ostringstream msg;
      msg << "step size underflow at t = " << sign * tau << " (possible blow-up or stiffness)";
      throw StepUnderflow(msg.str());
    }
    bool final_step = false;
    if (tau + 1.01 * h >= span) {
      h = span - tau;
      final_step = true;
    }
    using namespace dp;
    for (std::size_t i = 0; i < n; ++i) tmp[i] = x[i] + h * a21 * k1[i];
    k2 = rhs(tmp);
    for (std::size_t i = 0; i < n; ++i) tmp[i] = x[i] + h * (a31 * k1[i] + a32 * k2[i]);
    k3 = rhs(tmp);
    for (std::size_t i = 0; i < n; ++i) tmp[i] = x[i] + h * (a41 * k1[i] + a42 * k2[i] + a43 * k3[i]);
    k4 = rhs(tmp);
    for (std::size_t i = 0; i < n; ++i)
      tmp[i] = x[i] + h * (a51 * k1[i] + a52 * k2[i] + a53 * k3[i] + a54 * k4[i]);
    k5 = rhs(tmp);
    for (std::size_t i = 0; i < n; ++i)
      tmp[i] = x[i] + h * (a61 * k1[i] + a62 * k2[i] + a63 * k3[i] + a64 * k4[i] + a65 * k5[i]);
    k6 = rhs(tmp);
    for (std::size_t i = 0; i < n; ++i)
      x_new[i] = x[i] + h * (a71 * k1[i] + a73 * k3[i] + a74 * k4[i] + a75 * k5[i] + a76 * k6[i]);
    k7 = rhs(x_new);

    double err = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double e =
          h * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] + e6 * k6[i] + e7 * k7[i]);
      const double sk = tol.ode_abs + tol.ode_rel * std::max(std::abs(x[i]), std::abs(x_new[i]));
      err = std::max(err, std::abs(e) / sk);
    }
    if (!std::isfinite(err) || !all_finite(x_new)) {
      h *= 0.2;
      last_rejected = true;
      continue;
    }

    const double fac11 = std::pow(err, expo1);
    if (err <= 1.0) {
      double fac = fac11 / std::pow(facold, beta);
      fac = std::clamp(fac / safe, facc2, facc1);
      double h_new = h / fac;
      if (last_rejected) h_new = std::min(h_new, h);
      facold = std::max(err, 1e-4);

      std::vector<Point> dense(5, Point(n));
      for (std::size_t i = 0; i < n; ++i) {
        const double ydiff = x_new[i] - x[i];
        const double bspl = h * k1[i] - ydiff;
        dense[0][i] = x[i];
        dense[1][i] = ydiff;
        dense[2][i] = bspl;
        dense[3][i] = ydiff - h * k7[i] - bspl;
        dense[4][i] =
            h * (d1 * k1[i] + d3 * k3[i] + d4 * k4[i] + d5 * k5[i] + d6 * k6[i] + d7 * k7[i]);
      }
      tau = final_step ? span : tau + h;
      if (contains && !contains(x_new)) {
        std::ostringstream msg;
        msg << "trajectory left the domain at t = " << sign * tau;
        throw DomainExit(msg.str());
      }
      traj.push_step(sign * tau, x_new, std::move(dense));
      x = x_new;
      k1 = k7;
      h = h_new;
      last_rejected = false;
    } else {
      h /= std::min(facc1, fac11 / safe);
      last_rejected = true;
    }
  }
  return traj;
}

}  // namespace hus
