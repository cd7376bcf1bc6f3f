#include "hus/config.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <set>
#include <sstream>

#include "hus/errors.hpp"

namespace hus {

using nlohmann::json;

namespace {

[[noreturn]] void fail_at(const std::string& path, const std::string& what) {
  throw ParseError("config: " + (path.empty() ? std::string("<root>") : path) + ": " + what);
}

std::string join(const std::string& path, const std::string& key) {
  return path.empty() ? key : path + "." + key;
}

/// Object reader that remembers which keys were consumed so leftovers can be rejected.
class ObjectReader {
 public:
  ObjectReader(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) fail_at(path_, "expected an object");
  }

  bool has(const std::string& key) const { return j_.contains(key) && !j_.at(key).is_null(); }

  const json& at(const std::string& key) {
    seen_.insert(key);
    if (!j_.contains(key)) fail_at(join(path_, key), "missing required key");
    return j_.at(key);
  }

  const json* find(const std::string& key) {
    seen_.insert(key);
    auto it = j_.find(key);
    return it == j_.end() ? nullptr : &*it;
  }

  std::string path(const std::string& key) const { return join(path_, key); }

  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it) {
      if (!seen_.count(it.key())) fail_at(join(path_, it.key()), "unknown key");
    }
  }

 private:
  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

double read_double(const json& j, const std::string& path) {
  if (!j.is_number()) fail_at(path, "expected a number");
  return j.get<double>();
}

std::size_t read_size(const json& j, const std::string& path) {
  if (!j.is_number_integer() || (j.is_number_integer() && !j.is_number_unsigned() && j.get<long long>() < 0)) {
    fail_at(path, "expected a nonnegative integer");
  }
  return j.get<std::size_t>();
}

std::uint64_t read_u64(const json& j, const std::string& path) {
  if (!j.is_number_integer() || (!j.is_number_unsigned() && j.get<long long>() < 0)) {
    fail_at(path, "expected a nonnegative 64-bit integer");
  }
  return j.get<std::uint64_t>();
}

std::string read_string(const json& j, const std::string& path) {
  if (!j.is_string()) fail_at(path, "expected a string");
  return j.get<std::string>();
}

std::vector<double> read_doubles(const json& j, const std::string& path) {
  if (!j.is_array()) fail_at(path, "expected an array of numbers");
  std::vector<double> out;
  for (std::size_t i = 0; i < j.size(); ++i) out.push_back(read_double(j[i], path + "[" + std::to_string(i) + "]"));
  return out;
}

std::vector<std::size_t> read_sizes(const json& j, const std::string& path) {
  if (!j.is_array()) fail_at(path, "expected an array of integers");
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < j.size(); ++i) out.push_back(read_size(j[i], path + "[" + std::to_string(i) + "]"));
  return out;
}

/// A complex number is [re, im] or a bare real.
Complex read_complex(const json& j, const std::string& path) {
  if (j.is_number()) return {j.get<double>(), 0.0};
  if (!j.is_array() || j.size() != 2) fail_at(path, "expected [re, im]");
  return {read_double(j[0], path + "[0]"), read_double(j[1], path + "[1]")};
}

std::vector<Complex> read_complexes(const json& j, const std::string& path) {
  if (!j.is_array()) fail_at(path, "expected an array of [re, im] pairs");
  std::vector<Complex> out;
  for (std::size_t i = 0; i < j.size(); ++i) out.push_back(read_complex(j[i], path + "[" + std::to_string(i) + "]"));
  return out;
}

json complexes_to_json(const std::vector<Complex>& values) {
  json arr = json::array();
  for (const auto& c : values) arr.push_back(json::array({c.real(), c.imag()}));
  return arr;
}

// ---------------------------------------------------------------------------

FieldSpec read_field(const json& j, const std::string& path) {
  ObjectReader r(j, path);
  const std::string kind_name = read_string(r.at("kind"), r.path("kind"));
  auto kind = field_kind_from_string(kind_name);
  if (!kind || *kind == FieldKind::custom) fail_at(r.path("kind"), "unknown field kind '" + kind_name + "'");

  FieldSpec spec;
  switch (*kind) {
    case FieldKind::euler: {
      EulerParams p;
      p.dim = read_size(r.at("dim"), r.path("dim"));
      if (const json* g = r.find("g")) {
        ObjectReader gr(*g, r.path("g"));
        if (auto* c = gr.find("constant")) p.g.constant = read_double(*c, gr.path("constant"));
        if (auto* n = gr.find("numerator")) p.g.numerator = read_doubles(*n, gr.path("numerator"));
        if (auto* d = gr.find("denominator")) p.g.denominator = read_doubles(*d, gr.path("denominator"));
        gr.finish();
      }
      spec = p;
      break;
    }
    case FieldKind::affine: {
      AffineParams p;
      const json& m = r.at("matrix");
      const std::string mpath = r.path("matrix");
      if (!m.is_array()) fail_at(mpath, "expected an array of rows");
      p.dim = m.size();
      for (std::size_t i = 0; i < m.size(); ++i) {
        auto row = read_doubles(m[i], mpath + "[" + std::to_string(i) + "]");
        if (row.size() != p.dim) fail_at(mpath + "[" + std::to_string(i) + "]", "matrix must be square");
        p.matrix.insert(p.matrix.end(), row.begin(), row.end());
      }
      if (const json* v = r.find("offset")) {
        p.offset = read_doubles(*v, r.path("offset"));
      } else {
        p.offset.assign(p.dim, 0.0);
      }
      spec = p;
      break;
    }
    case FieldKind::rotation: {
      RotationParams p;
      p.rates = read_doubles(r.at("rates"), r.path("rates"));
      spec = p;
      break;
    }
    case FieldKind::bump: {
      BumpParams p;
      p.center = read_doubles(r.at("center"), r.path("center"));
      if (auto* rad = r.find("radius")) p.radius = read_double(*rad, r.path("radius"));
      p.direction = read_doubles(r.at("direction"), r.path("direction"));
      spec = p;
      break;
    }
    case FieldKind::geodesic: {
      GeodesicParams p;
      p.base_dim = read_size(r.at("base_dim"), r.path("base_dim"));
      if (auto* m = r.find("metric")) {
        const std::string name = read_string(*m, r.path("metric"));
        if (name == "flat") {
          p.metric = MetricKind::flat;
        } else if (name == "conformal_gaussian") {
          p.metric = MetricKind::conformal_gaussian;
        } else {
          fail_at(r.path("metric"), "unknown metric '" + name + "' (flat | conformal_gaussian)");
        }
      }
      if (auto* a = r.find("amplitude")) p.amplitude = read_double(*a, r.path("amplitude"));
      if (auto* w = r.find("width")) p.width = read_double(*w, r.path("width"));
      spec = p;
      break;
    }
    case FieldKind::custom:
      break;
  }
  r.finish();
  return spec;
}

json field_to_json(const FieldSpec& spec) {
  return std::visit(
      [](const auto& p) -> json {
        using T = std::decay_t<decltype(p)>;
        json j;
        if constexpr (std::is_same_v<T, EulerParams>) {
          j["kind"] = "euler";
          j["dim"] = p.dim;
          j["g"] = {{"constant", p.g.constant}, {"numerator", p.g.numerator}, {"denominator", p.g.denominator}};
        } else if constexpr (std::is_same_v<T, AffineParams>) {
          j["kind"] = "affine";
          json rows = json::array();
          for (std::size_t i = 0; i < p.dim; ++i) {
            json row = json::array();
            for (std::size_t k = 0; k < p.dim; ++k) row.push_back(p.matrix.at(i * p.dim + k));
            rows.push_back(row);
          }
          j["matrix"] = rows;
          j["offset"] = p.offset;
        } else if constexpr (std::is_same_v<T, RotationParams>) {
          j["kind"] = "rotation";
          j["rates"] = p.rates;
        } else if constexpr (std::is_same_v<T, BumpParams>) {
          j["kind"] = "bump";
          j["center"] = p.center;
          j["radius"] = p.radius;
          j["direction"] = p.direction;
        } else {
          j["kind"] = "geodesic";
          j["base_dim"] = p.base_dim;
          j["metric"] = p.metric == MetricKind::flat ? "flat" : "conformal_gaussian";
          j["amplitude"] = p.amplitude;
          j["width"] = p.width;
        }
        return j;
      },
      spec);
}

const char* to_string(ExactKind k) {
  switch (k) {
    case ExactKind::zero: return "zero";
    case ExactKind::constant: return "constant";
    case ExactKind::sine: return "sine";
  }
  return "zero";
}

const char* to_string(ForcingKind k) {
  switch (k) {
    case ForcingKind::zero: return "zero";
    case ForcingKind::constant: return "constant";
    case ForcingKind::induced: return "induced";
  }
  return "zero";
}

const char* to_string(NormKind k) { return k == NormKind::max_modulus ? "max_modulus" : "euclidean"; }

ExperimentConfig config_from_json(const json& doc) {
  ExperimentConfig c;
  ObjectReader r(doc, "");

  c.field = read_field(r.at("field"), "field");

  {
    const json& l = r.at("lambda");
    if (l.is_object()) {
      ObjectReader lr(l, "lambda");
      double re = read_double(lr.at("re"), "lambda.re");
      double im = 0.0;
      if (auto* i = lr.find("im")) im = read_double(*i, "lambda.im");
      lr.finish();
      c.lambda = {re, im};
    } else {
      c.lambda = read_complex(l, "lambda");
    }
  }

  if (auto* v = r.find("value_dim")) c.value_dim = read_size(*v, "value_dim");
  if (auto* v = r.find("norm")) {
    const std::string name = read_string(*v, "norm");
    if (name == "max_modulus") {
      c.norm = NormKind::max_modulus;
    } else if (name == "euclidean") {
      c.norm = NormKind::euclidean;
    } else {
      fail_at("norm", "unknown norm '" + name + "' (max_modulus | euclidean)");
    }
  }

  if (auto* f = r.find("forcing")) {
    ObjectReader fr(*f, "forcing");
    const std::string name = read_string(fr.at("kind"), "forcing.kind");
    if (name == "zero") {
      c.forcing.kind = ForcingKind::zero;
    } else if (name == "constant") {
      c.forcing.kind = ForcingKind::constant;
    } else if (name == "induced") {
      c.forcing.kind = ForcingKind::induced;
    } else {
      fail_at("forcing.kind", "unknown forcing kind '" + name + "' (zero | constant | induced)");
    }
    if (auto* vals = fr.find("values")) c.forcing.values = read_complexes(*vals, "forcing.values");
    fr.finish();
  }

  if (auto* e = r.find("exact_solution"); e && !e->is_null()) {
    ObjectReader er(*e, "exact_solution");
    ExactSolutionSpec s;
    const std::string name = read_string(er.at("kind"), "exact_solution.kind");
    if (name == "zero") {
      s.kind = ExactKind::zero;
    } else if (name == "constant") {
      s.kind = ExactKind::constant;
    } else if (name == "sine") {
      s.kind = ExactKind::sine;
    } else {
      fail_at("exact_solution.kind", "unknown exact solution kind '" + name + "' (zero | constant | sine)");
    }
    if (auto* vals = er.find("values")) s.values = read_complexes(*vals, "exact_solution.values");
    if (auto* a = er.find("axis")) s.axis = read_size(*a, "exact_solution.axis");
    er.finish();
    c.exact_solution = s;
  }

  if (auto* p = r.find("perturbation")) {
    ObjectReader pr(*p, "perturbation");
    auto& s = c.perturbation;
    const std::string name = read_string(pr.at("shape"), "perturbation.shape");
    auto shape = perturbation_shape_from_string(name);
    if (!shape) fail_at("perturbation.shape", "unknown shape '" + name + "' (constant | sinusoidal | bump | random_smoothed)");
    s.shape = *shape;
    if (auto* v = pr.find("magnitude")) s.magnitude = read_double(*v, "perturbation.magnitude");
    if (auto* v = pr.find("seed")) s.seed = read_u64(*v, "perturbation.seed");
    if (auto* v = pr.find("axis")) s.axis = read_size(*v, "perturbation.axis");
    if (auto* v = pr.find("frequency")) s.frequency = read_double(*v, "perturbation.frequency");
    if (auto* v = pr.find("center")) s.center = read_doubles(*v, "perturbation.center");
    if (auto* v = pr.find("radius")) s.radius = read_double(*v, "perturbation.radius");
    if (auto* v = pr.find("envelope_width")) s.envelope_width = read_double(*v, "perturbation.envelope_width");
    if (auto* v = pr.find("modes")) s.modes = read_size(*v, "perturbation.modes");
    pr.finish();
    if (s.magnitude < 0.0) fail_at("perturbation.magnitude", "must be >= 0");
  }

  c.grid = default_grid(c.field);
  if (auto* g = r.find("grid")) {
    ObjectReader gr(*g, "grid");
    if (auto* v = gr.find("lower")) c.grid.lower = read_doubles(*v, "grid.lower");
    if (auto* v = gr.find("upper")) c.grid.upper = read_doubles(*v, "grid.upper");
    if (auto* v = gr.find("counts")) c.grid.counts = read_sizes(*v, "grid.counts");
    if (auto* v = gr.find("halton")) c.grid.halton = read_size(*v, "grid.halton");
    gr.finish();
  }

  if (auto* t = r.find("tolerances")) {
    ObjectReader tr(*t, "tolerances");
    auto& tol = c.tolerances;
    if (auto* v = tr.find("ode_rel")) tol.ode_rel = read_double(*v, "tolerances.ode_rel");
    if (auto* v = tr.find("ode_abs")) tol.ode_abs = read_double(*v, "tolerances.ode_abs");
    if (auto* v = tr.find("quad_tol")) tol.quad_tol = read_double(*v, "tolerances.quad_tol");
    if (auto* v = tr.find("fd_step_scale")) tol.fd_step_scale = read_double(*v, "tolerances.fd_step_scale");
    tr.finish();
  }

  if (auto* w = r.find("eval_window")) {
    auto win = read_doubles(*w, "eval_window");
    if (win.size() != 2) fail_at("eval_window", "expected [t_min, t_max]");
    c.eval_window = {win[0], win[1]};
  }

  if (auto* ch = r.find("checks")) {
    ObjectReader cr(*ch, "checks");
    if (auto* v = cr.find("compat_points")) c.compat_points = read_size(*v, "checks.compat_points");
    if (auto* v = cr.find("compat_times")) c.compat_times = read_size(*v, "checks.compat_times");
    if (auto* v = cr.find("idempotence_points")) c.idempotence_points = read_size(*v, "checks.idempotence_points");
    if (auto* v = cr.find("semigroup_samples")) c.semigroup_samples = read_size(*v, "checks.semigroup_samples");
    cr.finish();
  }

  if (auto* th = r.find("thresholds")) {
    ObjectReader tr(*th, "thresholds");
    auto& t = c.thresholds;
    if (auto* v = tr.find("residual")) t.residual = read_double(*v, "thresholds.residual");
    if (auto* v = tr.find("flow_compat")) t.flow_compat = read_double(*v, "thresholds.flow_compat");
    if (auto* v = tr.find("semigroup")) t.semigroup = read_double(*v, "thresholds.semigroup");
    if (auto* v = tr.find("idempotence")) t.idempotence = read_double(*v, "thresholds.idempotence");
    if (auto* v = tr.find("bound_quad_multiple")) t.bound_quad_multiple = read_double(*v, "thresholds.bound_quad_multiple");
    tr.finish();
  }

  if (auto* fl = r.find("flow")) {
    ObjectReader fr(*fl, "flow");
    if (auto* v = fr.find("x0")) c.flow.x0 = read_doubles(*v, "flow.x0");
    if (auto* v = fr.find("t_start")) c.flow.t_start = read_double(*v, "flow.t_start");
    if (auto* v = fr.find("t_end")) c.flow.t_end = read_double(*v, "flow.t_end");
    if (auto* v = fr.find("samples")) c.flow.samples = read_size(*v, "flow.samples");
    fr.finish();
  }

  r.finish();
  return c;
}

json parse_json_text(const std::string& text) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    std::size_t line = 1, column = 1;
    const std::size_t stop = std::min<std::size_t>(e.byte == 0 ? 0 : e.byte - 1, text.size());
    for (std::size_t i = 0; i < stop; ++i) {
      if (text[i] == '\n') {
        ++line;
        column = 1;
      } else {
        ++column;
      }
    }
    std::string what = e.what();
    const auto colon = what.rfind(": ");
    if (colon != std::string::npos) what = what.substr(colon + 2);
    throw ParseError("config: line " + std::to_string(line) + ", column " + std::to_string(column) + ": " + what);
  }
}

}  // namespace

ExperimentConfig parse_config(const std::string& text) {
  ExperimentConfig config = config_from_json(parse_json_text(text));
  config.validate();
  return config;
}

json config_to_json(const ExperimentConfig& c) {
  json j;
  j["field"] = field_to_json(c.field);
  j["lambda"] = {{"re", c.lambda.real()}, {"im", c.lambda.imag()}};
  j["value_dim"] = c.value_dim;
  j["norm"] = to_string(c.norm);
  j["forcing"] = {{"kind", to_string(c.forcing.kind)}, {"values", complexes_to_json(c.forcing.values)}};
  if (c.exact_solution) {
    j["exact_solution"] = {{"kind", to_string(c.exact_solution->kind)},
                           {"values", complexes_to_json(c.exact_solution->values)},
                           {"axis", c.exact_solution->axis}};
  } else {
    j["exact_solution"] = nullptr;
  }
  const auto& p = c.perturbation;
  j["perturbation"] = {{"shape", to_string(p.shape)}, {"magnitude", p.magnitude},   {"seed", p.seed},
                       {"axis", p.axis},              {"frequency", p.frequency},   {"center", p.center},
                       {"radius", p.radius},          {"envelope_width", p.envelope_width},
                       {"modes", p.modes}};
  j["grid"] = {{"lower", c.grid.lower}, {"upper", c.grid.upper}, {"counts", c.grid.counts}, {"halton", c.grid.halton}};
  j["tolerances"] = {{"ode_rel", c.tolerances.ode_rel},
                     {"ode_abs", c.tolerances.ode_abs},
                     {"quad_tol", c.tolerances.quad_tol},
                     {"fd_step_scale", c.tolerances.fd_step_scale}};
  j["eval_window"] = {c.eval_window.first, c.eval_window.second};
  j["checks"] = {{"compat_points", c.compat_points},
                 {"compat_times", c.compat_times},
                 {"idempotence_points", c.idempotence_points},
                 {"semigroup_samples", c.semigroup_samples}};
  j["thresholds"] = {{"residual", c.thresholds.residual},
                     {"flow_compat", c.thresholds.flow_compat},
                     {"semigroup", c.thresholds.semigroup},
                     {"idempotence", c.thresholds.idempotence},
                     {"bound_quad_multiple", c.thresholds.bound_quad_multiple}};
  j["flow"] = {{"x0", c.flow.x0}, {"t_start", c.flow.t_start}, {"t_end", c.flow.t_end}, {"samples", c.flow.samples}};
  return j;
}

std::string serialize_config(const ExperimentConfig& config) { return config_to_json(config).dump(2) + "\n"; }

std::string apply_overrides(const std::string& text, const std::vector<std::string>& overrides) {
  if (overrides.empty()) return text;
  json doc = config_to_json(config_from_json(parse_json_text(text)));
  for (const auto& item : overrides) {
    const auto eq = item.find('=');
    if (eq == std::string::npos || eq == 0) throw ParseError("override '" + item + "': expected key=value");
    const std::string key = item.substr(0, eq);
    const std::string raw = item.substr(eq + 1);

    json::json_pointer ptr;
    std::stringstream ss(key);
    std::string part;
    while (std::getline(ss, part, '.')) ptr /= part;
    // Array elements are addressed by index, so numeric segments resolve naturally.
    if (!doc.contains(ptr)) throw ParseError("override '" + key + "': unknown key");

    json value;
    try {
      value = json::parse(raw);
    } catch (const json::parse_error&) {
      value = raw;
    }
    doc[ptr] = value;
  }
  return doc.dump(2) + "\n";
}

// ---------------------------------------------------------------------------

json summary_to_json(const CorrectionSummary& s, const BoundCheck& check) {
  return {{"epsilon_measured", s.epsilon_measured},
          {"bound", s.bound},
          {"distance_measured", s.distance_measured},
          {"omega_sign", s.omega_sign},
          {"sample_count", s.sample_count},
          {"u_max", s.u_max},
          {"horizon", s.horizon},
          {"y_sup", s.y_sup},
          {"z_sup", s.z_sup},
          {"eval_point_count", s.eval_point_count},
          {"bound_check", {{"pass", check.pass}, {"margin", check.margin}}}};
}

json report_to_json(const VerificationReport& r, bool include_timings) {
  json j;
  json corr = summary_to_json(r.correction, r.bound_check);
  corr.erase("bound_check");
  j["correction"] = corr;
  j["residual_of_z_max"] = r.residual_of_z_max;
  j["bound_check"] = {{"pass", r.bound_check.pass}, {"margin", r.bound_check.margin}};
  j["bound_slack"] = r.bound_slack;
  j["flow_compat_max_defect"] = r.flow_compat_max_defect;
  j["semigroup_max_defect"] = r.semigroup_max_defect;
  j["idempotence_defect"] = r.idempotence_defect;
  j["thresholds"] = {{"residual", r.thresholds.residual},
                     {"flow_compat", r.thresholds.flow_compat},
                     {"semigroup", r.thresholds.semigroup},
                     {"idempotence", r.thresholds.idempotence},
                     {"bound_quad_multiple", r.thresholds.bound_quad_multiple}};
  if (include_timings) j["wall_times"] = r.wall_times;
  j["sample_count"] = r.sample_count;
  j["warnings"] = r.warnings;
  j["verdicts"] = r.verdicts();
  j["all_pass"] = r.all_pass();
  return j;
}

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string report_to_csv(const VerificationReport& r) {
  std::ostringstream out;
  out << "metric,value\n";
  auto row = [&](const char* name, double v) { out << name << ',' << format_double(v) << '\n'; };
  row("epsilon_measured", r.correction.epsilon_measured);
  row("bound", r.correction.bound);
  row("distance_measured", r.correction.distance_measured);
  row("bound_margin", r.bound_check.margin);
  row("residual_of_z_max", r.residual_of_z_max);
  row("flow_compat_max_defect", r.flow_compat_max_defect);
  row("semigroup_max_defect", r.semigroup_max_defect);
  row("idempotence_defect", r.idempotence_defect);
  row("sample_count", static_cast<double>(r.sample_count));
  for (const auto& [name, ok] : r.verdicts()) out << "verdict_" << name << ',' << (ok ? 1 : 0) << '\n';
  return out.str();
}

void write_samples_csv(std::ostream& out, const std::vector<Point>& points, const std::vector<Value>& values) {
  const std::size_t n = points.empty() ? 0 : points.front().size();
  const std::size_t m = values.empty() ? 0 : values.front().size();
  std::string sep;
  for (std::size_t i = 1; i <= n; ++i) {
    out << sep << 'x' << i;
    sep = ",";
  }
  for (std::size_t c = 1; c <= m; ++c) {
    out << sep << "re_" << c << ",im_" << c;
    sep = ",";
  }
  out << '\n';
  for (std::size_t k = 0; k < points.size(); ++k) {
    sep.clear();
    for (double x : points[k]) {
      out << sep << format_double(x);
      sep = ",";
    }
    for (const auto& v : values.at(k)) {
      out << sep << format_double(v.real()) << ',' << format_double(v.imag());
      sep = ",";
    }
    out << '\n';
  }
}

void write_file_atomic(const std::string& path, const std::string& content) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    if (!f) throw Error("cannot open '" + tmp + "' for writing");
    f << content;
    f.flush();
    if (!f) throw Error("write to '" + tmp + "' failed");
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp, ec);
    throw Error("cannot rename onto '" + path + "'");
  }
}

}  // namespace hus
