#include "hus/cli.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "hus/config.hpp"
#include "hus/errors.hpp"
#include "hus/geometry.hpp"
#include "hus/harness.hpp"

namespace hus {

namespace {

struct Common {
  std::string config_path;
  std::string output_path;
  std::string format = "json";
  std::vector<std::string> overrides;
  bool timings = false;
};

std::string read_text(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw ParseError("cannot read config file '" + path + "'");
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

ExperimentConfig load_config(const Common& c) {
  return parse_config(apply_overrides(read_text(c.config_path), c.overrides));
}

void emit(const Common& c, const std::string& content, std::ostream& out) {
  if (c.output_path.empty()) {
    out << content;
  } else {
    write_file_atomic(c.output_path, content);
  }
}

std::string samples_json(const std::vector<Point>& points, const std::vector<Value>& values) {
  nlohmann::json arr = nlohmann::json::array();
  for (std::size_t i = 0; i < points.size(); ++i) {
    nlohmann::json v = nlohmann::json::array();
    for (const auto& c : values[i]) v.push_back({c.real(), c.imag()});
    arr.push_back({{"x", points[i]}, {"z", v}});
  }
  return arr.dump();
}

int cmd_correct(const Common& c, std::ostream& out) {
  const auto config = load_config(c);
  const auto run = run_correction(config);
  if (c.format == "csv") {
    std::ostringstream ss;
    write_samples_csv(ss, run.points, run.z_values);
    emit(c, ss.str(), out);
  } else {
    nlohmann::json j;
    j["summary"] = summary_to_json(run.summary, run.bound_check);
    j["samples"] = nlohmann::json::parse(samples_json(run.points, run.z_values));
    emit(c, j.dump(2) + "\n", out);
  }
  return run.bound_check.pass ? exit_pass : exit_verification_failed;
}

int cmd_verify(const Common& c, std::ostream& out) {
  const auto config = load_config(c);
  const auto report = run_experiment(config);
  if (c.format == "csv") {
    emit(c, report_to_csv(report), out);
  } else {
    emit(c, report_to_json(report, c.timings).dump(2) + "\n", out);
  }
  return report.all_pass() ? exit_pass : exit_verification_failed;
}

struct FlowFlags {
  std::vector<double> x0;
  std::optional<double> t_start, t_end;
  std::optional<std::size_t> samples;
  bool numerical = false;
};

int cmd_flow(const Common& c, const FlowFlags& f, std::ostream& out) {
  const auto config = load_config(c);
  FlowQuery q = config.flow;
  if (!f.x0.empty()) q.x0 = f.x0;
  if (f.t_start) q.t_start = *f.t_start;
  if (f.t_end) q.t_end = *f.t_end;
  if (f.samples) q.samples = *f.samples;
  const auto field = std::make_shared<const VectorField>(catalog_field(config.field));
  if (q.x0.size() != field->dim()) {
    throw ValidationError("flow.x0 has " + std::to_string(q.x0.size()) + " entries, field dimension is " +
                          std::to_string(field->dim()));
  }
  if (!field->domain.contains(q.x0)) throw ValidationError("flow.x0 lies outside the field's domain");
  if (q.samples < 1) throw ValidationError("flow.samples must be >= 1");

  const FlowMap flow(field, config.tolerances, f.numerical);
  std::vector<double> times;
  std::vector<Point> states;
  for (std::size_t k = 0; k < q.samples; ++k) {
    const double t = q.samples == 1 ? q.t_end
                                    : q.t_start + (q.t_end - q.t_start) * static_cast<double>(k) /
                                                      static_cast<double>(q.samples - 1);
    times.push_back(t);
    states.push_back(flow.flow_at(t, q.x0));
  }

  std::ostringstream ss;
  if (c.format == "csv") {
    ss << 't';
    for (std::size_t i = 1; i <= field->dim(); ++i) ss << ",x" << i;
    ss << '\n';
    for (std::size_t k = 0; k < times.size(); ++k) {
      ss << format_double(times[k]);
      for (double v : states[k]) ss << ',' << format_double(v);
      ss << '\n';
    }
  } else {
    nlohmann::json j;
    j["closed_form"] = flow.uses_closed_form();
    j["t"] = times;
    j["x"] = states;
    ss << j.dump(2) << '\n';
  }
  emit(c, ss.str(), out);
  return exit_pass;
}

int cmd_demo(const Common& c, std::ostream& out) {
  struct Row {
    std::string name;
    VerificationReport report;
    std::string criterion;
    bool pass = false;
  };
  std::vector<Row> rows;
  for (const auto& [name, config] : demo_configs()) {
    Row r{name, run_experiment(config), "", false};
    const auto& s = r.report.correction;
    char buf[96];
    if (name == "tightness") {
      const double ratio = s.bound > 0 ? s.distance_measured / s.bound : 0.0;
      std::snprintf(buf, sizeof buf, "distance/bound = %.6f (>= 0.99)", ratio);
      r.pass = ratio >= 0.99 && ratio <= 1.01;
    } else if (name == "periodic") {
      std::snprintf(buf, sizeof buf, "sup|z| = %.3e (<= 1e-5)", s.z_sup);
      r.pass = s.z_sup <= 1e-5 && s.y_sup <= s.epsilon_measured + 1e-5;
    } else {
      std::snprintf(buf, sizeof buf, "bound margin = %.3e", r.report.bound_check.margin);
      r.pass = r.report.bound_check.pass;
    }
    r.criterion = buf;
    r.pass = r.pass && r.report.all_pass();
    rows.push_back(std::move(r));
  }

  std::ostringstream ss;
  if (c.format == "json") {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& r : rows) {
      arr.push_back({{"name", r.name}, {"check", r.criterion}, {"pass", r.pass},
                     {"report", report_to_json(r.report, c.timings)}});
    }
    ss << arr.dump(2) << '\n';
  } else {
    char line[256];
    std::snprintf(line, sizeof line, "%-10s %12s %12s %12s  %-36s %s\n", "demo", "epsilon", "bound",
                  "distance", "check", "verdict");
    ss << line;
    for (const auto& r : rows) {
      const auto& s = r.report.correction;
      std::snprintf(line, sizeof line, "%-10s %12.5e %12.5e %12.5e  %-36s %s\n", r.name.c_str(),
                    s.epsilon_measured, s.bound, s.distance_measured, r.criterion.c_str(),
                    r.pass ? "PASS" : "FAIL");
      ss << line;
    }
  }
  emit(c, ss.str(), out);
  const bool all = std::all_of(rows.begin(), rows.end(), [](const Row& r) { return r.pass; });
  return all ? exit_pass : exit_verification_failed;
}

int cmd_catalog(const Common& c, std::ostream& out) {
  struct Entry {
    const char* kind;
    const char* vector_field;
    std::vector<std::pair<const char*, const char*>> params;
  };
  const std::vector<Entry> entries = {
      {"euler", "x -> g(x) x on the positive orthant, g homogeneous of degree 0",
       {{"dim", "integer n"}, {"g.constant", "real, used when numerator/denominator are empty"},
        {"g.numerator", "n reals a, g = (a.x)/(b.x)"}, {"g.denominator", "n reals b >= 0, not all zero"}}},
      {"affine", "x -> M x + v on R^n with M v = 0",
       {{"matrix", "n rows of n reals"}, {"offset", "n reals v"}}},
      {"rotation", "block rotation on R^{2k}, block i is rate_i (-y, x)", {{"rates", "k reals"}}},
      {"bump", "compactly supported bump times a constant direction",
       {{"center", "n reals"}, {"radius", "real > 0"}, {"direction", "n reals"}}},
      {"geodesic", "geodesic spray on the tangent bundle of R^k (state x, v)",
       {{"base_dim", "integer k"}, {"metric", "flat | conformal_gaussian"},
        {"amplitude", "real, conformal factor exp(2 A exp(-|x|^2/w^2))"}, {"width", "real w > 0"}}},
  };
  std::ostringstream ss;
  if (c.format == "json") {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& e : entries) {
      nlohmann::json params = nlohmann::json::object();
      for (const auto& [k, v] : e.params) params[k] = v;
      arr.push_back({{"kind", e.kind}, {"field", e.vector_field}, {"params", params}});
    }
    ss << arr.dump(2) << '\n';
  } else {
    for (const auto& e : entries) {
      ss << e.kind << ": " << e.vector_field << '\n';
      for (const auto& [k, v] : e.params) ss << "  " << k << ": " << v << '\n';
    }
  }
  emit(c, ss.str(), out);
  return exit_pass;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Hyers-Ulam stability experiments for V y = lambda y + f"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "Show help for every subcommand");

  Common common;
  FlowFlags flow_flags;

  auto add_common = [&](CLI::App* sub, bool needs_config, const std::string& default_format) {
    auto* opt = sub->add_option("-c,--config", common.config_path, "Experiment config (JSON)");
    if (needs_config) opt->required()->check(CLI::ExistingFile);
    sub->add_option("-o,--output", common.output_path, "Write output here instead of stdout");
    sub->add_option("-f,--format", common.format, "Output format")
        ->check(CLI::IsMember({"json", "csv", "table"}))
        ->default_str(default_format);
    sub->add_flag("--timings", common.timings, "Include per-stage wall times in JSON reports");
    if (needs_config) {
      sub->add_option("-s,--set", common.overrides, "Override a config key: path.to.key=value")
          ->allow_extra_args(false);
    }
  };

  auto* correct = app.add_subcommand("correct", "Correct the candidate and write z on the sample grid");
  add_common(correct, true, "json");
  auto* verify = app.add_subcommand("verify", "Run the full verification and write a report");
  add_common(verify, true, "json");
  auto* flow = app.add_subcommand("flow", "Sample the flow of the config's field along one orbit");
  add_common(flow, true, "csv");
  flow->add_option("--x0", flow_flags.x0, "Starting point (overrides flow.x0)")->expected(1, -1);
  flow->add_option("--t-start", flow_flags.t_start, "First sample time");
  flow->add_option("--t-end", flow_flags.t_end, "Last sample time");
  flow->add_option("--samples", flow_flags.samples, "Number of sample times");
  flow->add_flag("--numerical", flow_flags.numerical, "Integrate numerically even when a closed form exists");
  auto* demo = app.add_subcommand("demo", "Run the built-in showcase configs and print a summary table");
  add_common(demo, false, "table");
  auto* catalog = app.add_subcommand("catalog", "List vector-field kinds and their parameters");
  add_common(catalog, false, "table");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? exit_pass : exit_usage;
  }

  for (auto* sub : {correct, verify, flow}) {
    if (sub->parsed() && common.format == "table") {
      err << "error: --format table is only available for demo and catalog\n";
      return exit_usage;
    }
  }
  if ((demo->parsed() || catalog->parsed()) && common.format == "csv") {
    err << "error: --format csv is not available for " << (demo->parsed() ? "demo" : "catalog") << '\n';
    return exit_usage;
  }
  if ((demo->parsed() || catalog->parsed()) && !common.config_path.empty()) {
    err << "error: " << (demo->parsed() ? "demo" : "catalog") << " takes no config\n";
    return exit_usage;
  }
  // Default format per subcommand when the user did not pass one.
  auto defaulted = [&](CLI::App* sub, const char* fmt) {
    if (sub->parsed() && sub->get_option("--format")->count() == 0) common.format = fmt;
  };
  defaulted(correct, "json");
  defaulted(verify, "json");
  defaulted(flow, "csv");
  defaulted(demo, "table");
  defaulted(catalog, "table");

  try {
    if (correct->parsed()) return cmd_correct(common, out);
    if (verify->parsed()) return cmd_verify(common, out);
    if (flow->parsed()) return cmd_flow(common, flow_flags, out);
    if (demo->parsed()) return cmd_demo(common, out);
    if (catalog->parsed()) return cmd_catalog(common, out);
  } catch (const NumericalError& e) {
    err << "numerical error: " << e.what() << '\n';
    return exit_numerical;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return exit_usage;
  }
  err << "error: no subcommand\n";
  return exit_usage;
}

}  // namespace hus
