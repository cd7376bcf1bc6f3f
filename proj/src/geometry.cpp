#include "hus/geometry.hpp"

#include <Eigen/Dense>
#include <unsupported/Eigen/MatrixFunctions>

#include <algorithm>
#include <cmath>
#include <sstream>
#include <utility>

#include "hus/errors.hpp"

namespace hus {

Domain Domain::whole_space(std::size_t n) {
  return Domain{n, [n](const Point& x) { return x.size() == n; }, "R^" + std::to_string(n)};
}

Domain Domain::positive_orthant(std::size_t n) {
  return Domain{n,
                [n](const Point& x) {
                  return x.size() == n &&
                         std::all_of(x.begin(), x.end(), [](double v) { return v > 0.0; });
                },
                "R^" + std::to_string(n) + "_+"};
}

const char* to_string(FieldKind kind) {
  switch (kind) {
    case FieldKind::euler: return "euler";
    case FieldKind::affine: return "affine";
    case FieldKind::rotation: return "rotation";
    case FieldKind::bump: return "bump";
    case FieldKind::geodesic: return "geodesic";
    case FieldKind::custom: return "custom";
  }
  return "custom";
}

std::optional<FieldKind> field_kind_from_string(const std::string& name) {
  for (auto k : {FieldKind::euler, FieldKind::affine, FieldKind::rotation, FieldKind::bump,
                 FieldKind::geodesic, FieldKind::custom}) {
    if (name == to_string(k)) return k;
  }
  return std::nullopt;
}

FieldKind kind_of(const FieldSpec& spec) {
  switch (spec.index()) {
    case 0: return FieldKind::euler;
    case 1: return FieldKind::affine;
    case 2: return FieldKind::rotation;
    case 3: return FieldKind::bump;
    default: return FieldKind::geodesic;
  }
}

std::size_t dim_of(const FieldSpec& spec) {
  struct Visitor {
    std::size_t operator()(const EulerParams& p) const { return p.dim; }
    std::size_t operator()(const AffineParams& p) const { return p.dim; }
    std::size_t operator()(const RotationParams& p) const { return 2 * p.rates.size(); }
    std::size_t operator()(const BumpParams& p) const { return p.center.size(); }
    std::size_t operator()(const GeodesicParams& p) const { return 2 * p.base_dim; }
  };
  return std::visit(Visitor{}, spec);
}

std::vector<double> matrix_exponential(const std::vector<double>& matrix, std::size_t n, double t) {
  Eigen::MatrixXd m(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) m(i, j) = t * matrix[i * n + j];
  }
  const Eigen::MatrixXd e = m.exp();
  std::vector<double> out(n * n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) out[i * n + j] = e(i, j);
  }
  return out;
}

std::vector<double> conformal_gaussian_christoffel(const Point& x, double amplitude, double width) {
  const std::size_t k = x.size();
  double r2 = 0.0;
  for (double xi : x) r2 += xi * xi;
  const double phi = amplitude * std::exp(-r2 / (width * width));
  Point grad(k);
  for (std::size_t i = 0; i < k; ++i) grad[i] = -2.0 * x[i] / (width * width) * phi;

  // Gamma^i_{jl} = delta_ij d_l phi + delta_il d_j phi - delta_jl d_i phi
  std::vector<double> gamma(k * k * k, 0.0);
  for (std::size_t i = 0; i < k; ++i) {
    for (std::size_t j = 0; j < k; ++j) {
      for (std::size_t l = 0; l < k; ++l) {
        double g = 0.0;
        if (i == j) g += grad[l];
        if (i == l) g += grad[j];
        if (j == l) g -= grad[i];
        gamma[(i * k + j) * k + l] = g;
      }
    }
  }
  return gamma;
}

namespace {

[[noreturn]] void invalid(const std::string& what) { throw InvalidParams(what); }

void require_size(const std::vector<double>& v, std::size_t n, const char* name) {
  if (v.size() != n) {
    std::ostringstream msg;
    msg << name << " has " << v.size() << " entries, expected " << n;
    invalid(msg.str());
  }
}

VectorField make_euler(const EulerParams& p) {
  if (p.dim == 0) invalid("euler field needs dim >= 1");
  std::function<double(const Point&)> g;
  if (p.custom_g) {
    g = p.custom_g;
  } else if (p.g.numerator.empty() && p.g.denominator.empty()) {
    g = [c = p.g.constant](const Point&) { return c; };
  } else {
    require_size(p.g.numerator, p.dim, "euler g numerator");
    require_size(p.g.denominator, p.dim, "euler g denominator");
    const bool nonneg = std::all_of(p.g.denominator.begin(), p.g.denominator.end(),
                                    [](double b) { return b >= 0.0; });
    const bool some_pos = std::any_of(p.g.denominator.begin(), p.g.denominator.end(),
                                      [](double b) { return b > 0.0; });
    if (!nonneg || !some_pos) invalid("euler g denominator must be nonnegative and nonzero");
    g = [a = p.g.numerator, b = p.g.denominator](const Point& x) {
      double num = 0.0, den = 0.0;
      for (std::size_t i = 0; i < x.size(); ++i) {
        num += a[i] * x[i];
        den += b[i] * x[i];
      }
      return num / den;
    };
  }

  // Sampled degree-zero homogeneity check.
  const std::size_t n = p.dim;
  for (std::size_t s = 0; s < 5; ++s) {
    Point x(n);
    for (std::size_t i = 0; i < n; ++i) x[i] = 0.25 + std::fmod(0.618 * static_cast<double>(s * n + i + 1), 2.0);
    const double g0 = g(x);
    for (double scale : {0.37, 2.9, 41.0}) {
      Point y = x;
      for (auto& v : y) v *= scale;
      if (!(std::abs(g(y) - g0) <= 1e-8 * std::max(1.0, std::abs(g0)))) {
        invalid("euler g is not homogeneous of degree zero (g(tx) != g(x))");
      }
    }
  }

  VectorField f;
  f.kind = FieldKind::euler;
  f.domain = Domain::positive_orthant(n);
  f.eval = [g](const Point& x) {
    const double gx = g(x);
    Point v = x;
    for (auto& c : v) c *= gx;
    return v;
  };
  f.closed_form_flow = [g](double t, const Point& x) {
    const double scale = std::exp(t * g(x));
    Point y = x;
    for (auto& c : y) c *= scale;
    return y;
  };
  return f;
}

VectorField make_affine(const AffineParams& p) {
  const std::size_t n = p.dim;
  if (n == 0) invalid("affine field needs dim >= 1");
  require_size(p.matrix, n * n, "affine matrix");
  require_size(p.offset, n, "affine offset");
  double mv = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double row = 0.0;
    for (std::size_t j = 0; j < n; ++j) row += p.matrix[i * n + j] * p.offset[j];
    mv = std::max(mv, std::abs(row));
  }
  if (mv > 1e-12) {
    std::ostringstream msg;
    msg << "affine field requires M v = 0, got |Mv| = " << mv;
    invalid(msg.str());
  }

  VectorField f;
  f.kind = FieldKind::affine;
  f.domain = Domain::whole_space(n);
  f.eval = [m = p.matrix, v = p.offset, n](const Point& x) {
    Point out = v;
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) out[i] += m[i * n + j] * x[j];
    }
    return out;
  };
  f.closed_form_flow = [m = p.matrix, v = p.offset, n](double t, const Point& x) {
    const auto e = matrix_exponential(m, n, t);
    Point out(n);
    for (std::size_t i = 0; i < n; ++i) {
      double s = t * v[i];
      for (std::size_t j = 0; j < n; ++j) s += e[i * n + j] * x[j];
      out[i] = s;
    }
    return out;
  };
  return f;
}

VectorField make_rotation(const RotationParams& p) {
  if (p.rates.empty()) invalid("rotation field needs at least one angular rate");
  const std::size_t n = 2 * p.rates.size();
  VectorField f;
  f.kind = FieldKind::rotation;
  f.domain = Domain::whole_space(n);
  f.eval = [r = p.rates](const Point& x) {
    Point v(x.size());
    for (std::size_t b = 0; b < r.size(); ++b) {
      v[2 * b] = -r[b] * x[2 * b + 1];
      v[2 * b + 1] = r[b] * x[2 * b];
    }
    return v;
  };
  f.closed_form_flow = [r = p.rates](double t, const Point& x) {
    Point y(x.size());
    for (std::size_t b = 0; b < r.size(); ++b) {
      const double c = std::cos(r[b] * t), s = std::sin(r[b] * t);
      y[2 * b] = c * x[2 * b] - s * x[2 * b + 1];
      y[2 * b + 1] = s * x[2 * b] + c * x[2 * b + 1];
    }
    return y;
  };
  return f;
}

VectorField make_bump(const BumpParams& p) {
  const std::size_t n = p.center.size();
  if (n == 0) invalid("bump field needs a center");
  require_size(p.direction, n, "bump direction");
  if (!(p.radius > 0.0)) invalid("bump radius must be positive");
  VectorField f;
  f.kind = FieldKind::bump;
  f.domain = Domain::whole_space(n);
  f.eval = [c = p.center, d = p.direction, rad = p.radius](const Point& x) {
    double r2 = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
      const double u = (x[i] - c[i]) / rad;
      r2 += u * u;
    }
    const double w = r2 < 1.0 ? std::exp(1.0 - 1.0 / (1.0 - r2)) : 0.0;
    Point v = d;
    for (auto& e : v) e *= w;
    return v;
  };
  return f;
}

VectorField make_geodesic(const GeodesicParams& p) {
  const std::size_t k = p.base_dim;
  if (k == 0) invalid("geodesic field needs base_dim >= 1");
  ChristoffelFn gamma;
  if (p.custom_christoffel) {
    gamma = p.custom_christoffel;
  } else if (p.metric == MetricKind::conformal_gaussian) {
    if (!(p.width > 0.0)) invalid("conformal metric width must be positive");
    gamma = [a = p.amplitude, w = p.width](const Point& x) {
      return conformal_gaussian_christoffel(x, a, w);
    };
  }

  VectorField f;
  f.kind = FieldKind::geodesic;
  f.domain = Domain::whole_space(2 * k);
  f.eval = [gamma, k](const Point& z) {
    Point out(2 * k, 0.0);
    for (std::size_t i = 0; i < k; ++i) out[i] = z[k + i];
    if (!gamma) return out;
    const Point base(z.begin(), z.begin() + static_cast<std::ptrdiff_t>(k));
    const auto g = gamma(base);
    if (g.size() != k * k * k) throw InvalidParams("Christoffel function returned wrong size");
    for (std::size_t i = 0; i < k; ++i) {
      double acc = 0.0;
      for (std::size_t j = 0; j < k; ++j) {
        for (std::size_t l = 0; l < k; ++l) acc += g[(i * k + j) * k + l] * z[k + j] * z[k + l];
      }
      out[k + i] = -acc;
    }
    return out;
  };
  const bool flat = !p.custom_christoffel &&
                    (p.metric == MetricKind::flat || p.amplitude == 0.0);
  if (flat) {
    f.closed_form_flow = [k](double t, const Point& z) {
      Point y = z;
      for (std::size_t i = 0; i < k; ++i) y[i] += t * z[k + i];
      return y;
    };
  }
  return f;
}

}  // namespace

VectorField catalog_field(const FieldSpec& spec) {
  struct Visitor {
    VectorField operator()(const EulerParams& p) const { return make_euler(p); }
    VectorField operator()(const AffineParams& p) const { return make_affine(p); }
    VectorField operator()(const RotationParams& p) const { return make_rotation(p); }
    VectorField operator()(const BumpParams& p) const { return make_bump(p); }
    VectorField operator()(const GeodesicParams& p) const { return make_geodesic(p); }
  };
  return std::visit(Visitor{}, spec);
}

VectorField custom_field(Domain domain, FieldFn eval) {
  VectorField f;
  f.domain = std::move(domain);
  f.eval = std::move(eval);
  f.kind = FieldKind::custom;
  return f;
}

// ---------------------------------------------------------------------------

namespace {
constexpr double kShortArc = 1e-2;
constexpr std::size_t kCacheLimit = 4096;
}  // namespace

FlowMap::FlowMap(std::shared_ptr<const VectorField> field, Tolerances tol, bool force_numerical)
    : field_(std::move(field)),
      tol_(tol),
      force_numerical_(force_numerical),
      cache_(std::make_shared<Cache>()) {
  if (!field_) throw InvalidParams("FlowMap needs a field");
  tol_.validate();
}

Point FlowMap::flow_at(double t, const Point& x) const {
  const auto& dom = field_->domain;
  if (!dom.contains(x)) throw DomainExit("flow basepoint lies outside " + dom.description);
  if (t == 0.0) return x;
  if (uses_closed_form()) {
    Point y = (*field_->closed_form_flow)(t, x);
    if (!dom.contains(y)) {
      std::ostringstream msg;
      msg << "flow left " << dom.description << " at t = " << t;
      throw DomainExit(msg.str());
    }
    return y;
  }
  if (std::abs(t) <= kShortArc) {
    return solve_ivp(field_->eval, x, t, tol_, dom.contains).final_state();
  }
  return orbit(x, t)->at(t);
}

std::shared_ptr<const Trajectory> FlowMap::orbit(const Point& x, double t) const {
  const int dir = t < 0 ? -1 : 1;
  auto key = std::make_pair(x, dir);
  double reach = std::abs(t);
  {
    std::lock_guard lock(cache_->mutex);
    auto it = cache_->orbits.find(key);
    if (it != cache_->orbits.end()) {
      const double have = std::abs(it->second->t_final());
      if (have >= reach) return it->second;
      // grow geometrically so incremental requests stay linear in total work
      reach = std::max(reach, 2.0 * have);
    }
  }
  auto traj = std::make_shared<const Trajectory>(
      solve_ivp(field_->eval, x, dir * reach, tol_, field_->domain.contains));
  std::lock_guard lock(cache_->mutex);
  if (cache_->orbits.size() >= kCacheLimit) cache_->orbits.clear();
  auto& slot = cache_->orbits[std::move(key)];
  if (!slot || std::abs(slot->t_final()) < std::abs(t)) slot = traj;
  return traj;
}

std::size_t FlowMap::cache_size() const {
  std::lock_guard lock(cache_->mutex);
  return cache_->orbits.size();
}

void FlowMap::clear_cache() const {
  std::lock_guard lock(cache_->mutex);
  cache_->orbits.clear();
}

OrbitCursor::OrbitCursor(FlowMap flow, Point x) : flow_(std::move(flow)), x_(std::move(x)) {}

Point OrbitCursor::at(double s) {
  if (s == 0.0) return x_;
  if (flow_.uses_closed_form()) return flow_.flow_at(s, x_);
  auto& traj = s > 0 ? forward_ : backward_;
  if (!traj || std::abs(traj->t_final()) < std::abs(s)) {
    const double have = traj ? std::abs(traj->t_final()) : 0.0;
    const double reach = std::max({std::abs(s), 2.0 * have, 1.0});
    traj = flow_.orbit(x_, s > 0 ? reach : -reach);
  }
  return traj->at(s);
}

double check_semigroup(const FlowMap& flow, const std::vector<SemigroupSample>& samples) {
  double worst = 0.0;
  for (const auto& smp : samples) {
    if (smp.t == 0.0 && smp.s == 0.0) continue;
    const Point direct = flow.flow_at(smp.t + smp.s, smp.x);
    const Point composed = flow.flow_at(smp.t, flow.flow_at(smp.s, smp.x));
    Point diff(direct.size());
    for (std::size_t i = 0; i < diff.size(); ++i) diff[i] = direct[i] - composed[i];
    worst = std::max(worst, euclidean_norm(diff));
  }
  return worst;
}

}  // namespace hus
