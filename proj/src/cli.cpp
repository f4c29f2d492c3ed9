#include "fracheat/cli.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <memory>
#include <sstream>
#include <tuple>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "fracheat/errors.hpp"
#include "fracheat/fracode.hpp"
#include "fracheat/io.hpp"
#include "fracheat/parallel.hpp"
#include "fracheat/pdesolver.hpp"
#include "fracheat/specfun.hpp"
#include "fracheat/verify.hpp"

namespace fracheat {

namespace {

using nlohmann::json;

// Raised for anything the user must fix; maps to exit code 2.
class UsageError : public Error {
 public:
  using Error::Error;
};

std::string utc_stamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

// ---------------------------------------------------------------------------
// Parameters: flag > config file > default, each value tagged with its source.

enum class Kind { real, integer, text, real_list };

using Check = std::function<std::string(const json&)>;

struct ParamSpec {
  std::string name;
  Kind kind;
  json fallback;
  std::string help;
  Check check;
};

Check open_closed(double lo, double hi) {
  return [=](const json& v) {
    const double x = v.get<double>();
    return x > lo && x <= hi ? "" : "(" + format_number(lo) + "," + format_number(hi) + "]";
  };
}

Check positive() {
  return [](const json& v) { return v.get<double>() > 0.0 ? "" : "(0,inf)"; };
}

Check greater_than(double lo) {
  return [=](const json& v) { return v.get<double>() > lo ? "" : "(" + format_number(lo) + ",inf)"; };
}

Check at_least(long long lo) {
  return [=](const json& v) { return v.get<long long>() >= lo ? "" : "[" + std::to_string(lo) + ",inf)"; };
}

Check finite() {
  return [](const json& v) { return std::isfinite(v.get<double>()) ? "" : "finite reals"; };
}

Check one_of(std::vector<std::string> options) {
  return [options](const json& v) {
    const auto s = v.get<std::string>();
    if (std::find(options.begin(), options.end(), s) != options.end()) return std::string();
    std::string joined;
    for (const auto& o : options) joined += (joined.empty() ? "" : "|") + o;
    return "{" + joined + "}";
  };
}

Check each(Check inner) {
  return [inner](const json& v) {
    for (const auto& x : v) {
      const std::string msg = inner(x);
      if (!msg.empty()) return msg;
    }
    return std::string();
  };
}

double parse_real(const std::string& flag, const std::string& text) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(text, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != text.size()) throw UsageError("--" + flag + " expects a real number; got '" + text + "'");
  return v;
}

long long parse_integer(const std::string& flag, const std::string& text) {
  std::size_t used = 0;
  long long v = 0;
  try {
    v = std::stoll(text, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != text.size()) throw UsageError("--" + flag + " expects an integer; got '" + text + "'");
  return v;
}

json from_flag(const ParamSpec& spec, const std::string& text) {
  switch (spec.kind) {
    case Kind::real:
      return parse_real(spec.name, text);
    case Kind::integer:
      return parse_integer(spec.name, text);
    case Kind::text:
      return text;
    case Kind::real_list: {
      json list = json::array();
      std::stringstream ss(text);
      std::string item;
      while (std::getline(ss, item, ',')) list.push_back(parse_real(spec.name, item));
      return list;
    }
  }
  return nullptr;
}

json from_file(const ParamSpec& spec, const json& v) {
  const std::string where = "config key '" + spec.name + "'";
  switch (spec.kind) {
    case Kind::real:
      if (!v.is_number()) throw UsageError(where + " must be a number");
      return v.get<double>();
    case Kind::integer:
      if (!v.is_number_integer()) throw UsageError(where + " must be an integer");
      return v;
    case Kind::text:
      if (!v.is_string()) throw UsageError(where + " must be a string");
      return v;
    case Kind::real_list: {
      json list = json::array();
      if (v.is_number()) {
        list.push_back(v.get<double>());
        return list;
      }
      if (!v.is_array()) throw UsageError(where + " must be a number or an array of numbers");
      for (const auto& x : v) {
        if (!x.is_number()) throw UsageError(where + " must contain only numbers");
        list.push_back(x.get<double>());
      }
      return list;
    }
  }
  return nullptr;
}

class Parameters {
 public:
  void add(CLI::App* app, ParamSpec spec) {
    auto& slot = raw_[spec.name];
    options_[spec.name] = app->add_option("--" + spec.name, slot, spec.help);
    specs_.push_back(std::move(spec));
  }

  void resolve(const std::optional<std::string>& config_path) {
    json file = json::object();
    if (config_path) {
      std::ifstream in(*config_path);
      if (!in) throw UsageError("--config: cannot open '" + *config_path + "'");
      try {
        file = json::parse(in);
      } catch (const json::parse_error& e) {
        throw UsageError("--config: invalid JSON in '" + *config_path + "': " + e.what());
      }
      if (!file.is_object()) throw UsageError("--config: expected a flat JSON object");
      for (const auto& [key, value] : file.items()) {
        const bool known = std::any_of(specs_.begin(), specs_.end(), [&](const ParamSpec& s) { return s.name == key; });
        if (!known) throw UsageError("--config: unknown key '" + key + "'");
        if (value.is_object()) throw UsageError("--config: key '" + key + "' must not be nested");
      }
    }
    for (const auto& spec : specs_) {
      json value;
      std::string source;
      if (options_.at(spec.name)->count() > 0) {
        value = from_flag(spec, raw_.at(spec.name));
        source = "flag";
      } else if (file.contains(spec.name)) {
        value = from_file(spec, file.at(spec.name));
        source = "file";
      } else {
        value = spec.fallback;
        source = "default";
      }
      if (spec.check && !value.is_null()) {
        const std::string range = spec.check(value);
        if (!range.empty()) {
          throw UsageError("--" + spec.name + " must lie in " + range + "; got " + value.dump());
        }
      }
      values_[spec.name] = value;
      provenance_[spec.name] = {{"value", value}, {"source", source}};
    }
  }

  double real(const std::string& n) const { return values_.at(n).get<double>(); }
  long long integer(const std::string& n) const { return values_.at(n).get<long long>(); }
  std::string text(const std::string& n) const { return values_.at(n).get<std::string>(); }
  bool has(const std::string& n) const { return !values_.at(n).is_null(); }
  std::vector<double> list(const std::string& n) const { return values_.at(n).get<std::vector<double>>(); }
  const json& provenance() const { return provenance_; }

 private:
  std::vector<ParamSpec> specs_;
  std::map<std::string, std::string> raw_;
  std::map<std::string, CLI::Option*> options_;
  json values_ = json::object();
  json provenance_ = json::object();
};

// ---------------------------------------------------------------------------
// Subcommand plumbing

struct Outputs {
  std::optional<std::string> config;
  std::optional<std::string> out;
  std::optional<std::string> summary;
  std::optional<std::string> snapshots;
};

struct Command {
  CLI::App* app = nullptr;
  Parameters params;
  Outputs outputs;
};

json manifest(const std::string& name, const Command& cmd, const std::string& started_at) {
  json outputs = json::object();
  auto put = [&](const char* key, const std::optional<std::string>& v) {
    outputs[key] = v ? json(*v) : json(nullptr);
  };
  put("config", cmd.outputs.config);
  put("out", cmd.outputs.out);
  put("summary", cmd.outputs.summary);
  put("snapshots", cmd.outputs.snapshots);
  return {{"subcommand", name},
          {"parameters", cmd.params.provenance()},
          {"outputs", outputs},
          {"version", FRACHEAT_VERSION},
          {"started_at", started_at}};
}

// Writes to the named file, or to `fallback` when no path was given.
void emit(const std::optional<std::string>& path, const std::string& flag, std::ostream& fallback,
          const std::function<void(std::ostream&)>& write) {
  if (!path) {
    write(fallback);
    return;
  }
  std::ofstream file(*path, std::ios::binary);
  if (!file) throw UsageError(flag + ": cannot open '" + *path + "' for writing");
  write(file);
  if (!file) throw UsageError(flag + ": write to '" + *path + "' failed");
}

void add_outputs(Command& cmd, bool snapshots) {
  cmd.app->add_option("--config", cmd.outputs.config, "flat JSON file of parameter values");
  cmd.app->add_option("--out", cmd.outputs.out, "primary output file (default: standard output)");
  cmd.app->add_option("--summary", cmd.outputs.summary, "JSON summary file");
  if (snapshots) cmd.app->add_option("--snapshots", cmd.outputs.snapshots, "snapshot CSV file");
}

void add_stepping(Parameters& p, CLI::App* app) {
  p.add(app, {"dt0", Kind::real, 1e-3, "initial step", positive()});
  p.add(app, {"dt_min", Kind::real, 1e-100, "smallest admissible step", positive()});
  p.add(app, {"growth_cap", Kind::real, 0.05, "max relative growth per step", positive()});
  p.add(app, {"threshold", Kind::real, 1e6, "blow-up threshold M", positive()});
}

SolverConfig solver_config(const Parameters& p) {
  SolverConfig cfg;
  cfg.alpha = p.real("alpha");
  cfg.p = p.real("p");
  cfg.nx = static_cast<int>(p.integer("nx"));
  cfg.dt0 = p.real("dt0");
  cfg.dt_min = p.real("dt_min");
  cfg.growth_cap = p.real("growth_cap");
  cfg.threshold = p.real("threshold");
  cfg.horizon = p.real("horizon");
  cfg.newton_tol = p.real("newton_tol");
  cfg.newton_max_iter = static_cast<int>(p.integer("newton_max_iter"));
  cfg.snapshot_stride = static_cast<std::size_t>(p.integer("stride"));
  cfg.x_cut = p.real("x_cut");
  cfg.max_steps = static_cast<std::size_t>(p.integer("max_steps"));
  if (cfg.dt_min > cfg.dt0) throw UsageError("--dt_min must not exceed --dt0");
  try {
    cfg.ic = build_quadratic_profile(cfg.p, p.real("a"));
  } catch (const NoCompatibleProfile& e) {
    throw UsageError(std::string("--a: ") + e.what());
  }
  try {
    cfg.validate();
  } catch (const ConfigError& e) {
    throw UsageError(e.what());
  }
  return cfg;
}

// ---------------------------------------------------------------------------
// Subcommands

int run_mlf(Command& cmd, std::ostream& out, std::ostream&, const std::string&) {
  const Parameters& p = cmd.params;
  const double v = mittag_leffler(p.real("alpha"), p.real("r"), p.real("z"));
  emit(cmd.outputs.out, "--out", out, [&](std::ostream& o) { o << format_number(v) << '\n'; });
  return exit_ok;
}

int run_fode(Command& cmd, std::ostream& out, std::ostream& err, const std::string& started) {
  const Parameters& p = cmd.params;
  FodeConfig cfg;
  cfg.alpha = p.real("alpha");
  cfg.p = p.real("p");
  cfg.n0 = p.real("n0");
  cfg.dt0 = p.real("dt0");
  cfg.dt_min = p.real("dt_min");
  cfg.growth_cap = p.real("growth_cap");
  cfg.threshold = p.real("threshold");
  cfg.horizon = p.real("horizon");
  if (cfg.dt_min > cfg.dt0) throw UsageError("--dt_min must not exceed --dt0");
  if (!(cfg.threshold > cfg.n0)) throw UsageError("--threshold must exceed --n0");

  const FodeResult res = solve_fode_blowup(cfg);
  emit(cmd.outputs.out, "--out", out, [&](std::ostream& o) { write_fode_csv(o, res); });

  json summary;
  summary["manifest"] = manifest("fode", cmd, started);
  summary["verdict"] = to_string(res.report.verdict);
  summary["t_cross"] = json_number(res.report.t_cross);
  summary["t_estimate"] = json_number(res.report.t_estimate);
  summary["t_estimate_note"] = "heuristic: classical rate ansatz n ~ A (T - t)^(-1/(p-1))";
  summary["bound_time"] = json_number(fractional_bound_time(cfg.alpha, cfg.p, cfg.n0));
  summary["steps_accepted"] = res.grid.steps_count();
  summary["steps_rejected"] = res.steps_rejected;
  summary["warnings"] = res.report.warnings;
  emit(cmd.outputs.summary, "--summary", err, [&](std::ostream& o) { o << dump_json(summary); });
  return res.report.verdict == Verdict::inconclusive ? exit_numerical : exit_ok;
}

int run_solve(Command& cmd, std::ostream& out, std::ostream& err, const std::string& started) {
  const SolverConfig cfg = solver_config(cmd.params);
  const RunResult res = run(cfg);
  emit(cmd.outputs.out, "--out", out, [&](std::ostream& o) { write_run_csv(o, res.history); });
  if (cmd.outputs.snapshots) {
    emit(cmd.outputs.snapshots, "--snapshots", out,
         [&](std::ostream& o) { write_snapshots_csv(o, res.history, cfg.snapshot_stride); });
  }

  json summary = to_json(res.report);
  summary["manifest"] = manifest("solve", cmd, started);
  summary["config"] = to_json(cfg);
  summary["steps_accepted"] = res.history.grid().steps_count();
  summary["steps_rejected"] = res.history.steps_rejected();
  emit(cmd.outputs.summary, "--summary", err, [&](std::ostream& o) { o << dump_json(summary); });
  return res.report.verdict == Verdict::inconclusive ? exit_numerical : exit_ok;
}

std::vector<SuiteCell> grid_cells(const Parameters& p) {
  const SuiteConfig base = p.text("grid") == "small" ? small_suite() : default_suite();
  std::vector<double> alphas, ps, as;
  for (const auto& c : base.cells) {
    if (std::find(alphas.begin(), alphas.end(), c.alpha) == alphas.end()) alphas.push_back(c.alpha);
    if (std::find(ps.begin(), ps.end(), c.p) == ps.end()) ps.push_back(c.p);
    if (std::find(as.begin(), as.end(), c.a) == as.end()) as.push_back(c.a);
  }
  if (p.has("alpha")) alphas = p.list("alpha");
  if (p.has("p")) ps = p.list("p");
  if (p.has("a")) as = p.list("a");
  std::vector<SuiteCell> cells;
  for (double alpha : alphas) {
    for (double pp : ps) {
      for (double a : as) cells.push_back({alpha, pp, a});
    }
  }
  std::sort(cells.begin(), cells.end(), [](const SuiteCell& l, const SuiteCell& r) {
    return std::tie(l.alpha, l.p, l.a) < std::tie(r.alpha, r.p, r.a);
  });
  return cells;
}

void add_grid_params(Command& cmd) {
  Parameters& p = cmd.params;
  CLI::App* app = cmd.app;
  p.add(app, {"grid", Kind::text, "default", "base grid", one_of({"default", "small"})});
  p.add(app, {"alpha", Kind::real_list, nullptr, "comma-separated alpha values", each(open_closed(0.0, 1.0))});
  p.add(app, {"p", Kind::real_list, nullptr, "comma-separated p values", each(positive())});
  p.add(app, {"a", Kind::real_list, nullptr, "comma-separated profile base values", each(positive())});
  p.add(app, {"nx", Kind::integer, 201, "mesh nodes", at_least(3)});
  p.add(app, {"horizon", Kind::real, 1.0, "final time", positive()});
  p.add(app, {"threshold", Kind::real, 1e6, "blow-up threshold M", positive()});
  p.add(app, {"growth_cap", Kind::real, 0.05, "max relative growth per step", positive()});
  p.add(app, {"dt0", Kind::real, 1e-3, "initial step", positive()});
  p.add(app, {"jobs", Kind::integer, 0, "concurrent runs (0: all processors)", at_least(0)});
}

struct SweepRow {
  SuiteCell cell;
  std::optional<double> l0;
  std::optional<BlowUpReport> report;
  std::optional<double> bound_time;
  std::string error;
};

std::string csv_field(const std::optional<double>& v) { return v ? format_number(*v) : ""; }

std::string csv_text(std::string s) {
  std::replace(s.begin(), s.end(), ',', ';');
  std::replace(s.begin(), s.end(), '\n', ' ');
  return s;
}

int run_sweep(Command& cmd, std::ostream& out, std::ostream& err, const std::string& started) {
  const Parameters& p = cmd.params;
  const std::vector<SuiteCell> cells = grid_cells(p);
  SolverConfig base;
  base.nx = static_cast<int>(p.integer("nx"));
  base.horizon = p.real("horizon");
  base.threshold = p.real("threshold");
  base.growth_cap = p.real("growth_cap");
  base.dt0 = p.real("dt0");

  const auto rows = parallel_map(cells.size(), static_cast<unsigned>(p.integer("jobs")), [&](std::size_t i) {
    SweepRow row;
    row.cell = cells[i];
    try {
      SolverConfig cfg = base;
      cfg.alpha = row.cell.alpha;
      cfg.p = row.cell.p;
      cfg.ic = build_quadratic_profile(cfg.p, row.cell.a);
      const RunResult res = run(cfg);
      row.l0 = mass(res.history.snapshot(0), res.history.mesh());
      row.report = res.report;
      if (cfg.p > 1.0) row.bound_time = fractional_bound_time(cfg.alpha, cfg.p, *row.l0);
    } catch (const NoCompatibleProfile&) {
      row.error = "no-compatible-profile";
    } catch (const Error& e) {
      row.error = e.what();
    }
    return row;
  });

  std::size_t failures = 0;
  emit(cmd.outputs.out, "--out", out, [&](std::ostream& o) {
    o << "alpha,p,a,l0,verdict,t_cross,t_estimate,bound_time,argmax_always_rightmost,interior_sup,error\n";
    for (const auto& r : rows) {
      o << format_number(r.cell.alpha) << ',' << format_number(r.cell.p) << ',' << format_number(r.cell.a) << ','
        << csv_field(r.l0) << ',';
      if (r.report) {
        o << to_string(r.report->verdict) << ',' << csv_field(r.report->t_cross) << ','
          << csv_field(r.report->t_estimate) << ',' << csv_field(r.bound_time) << ','
          << (r.report->argmax_always_rightmost ? "true" : "false") << ','
          << format_number(r.report->interior_sup);
      } else {
        o << ",,,,,";
      }
      o << ',' << csv_text(r.error) << '\n';
    }
  });
  for (const auto& r : rows) failures += r.error.empty() ? 0 : 1;

  if (cmd.outputs.summary) {
    json summary;
    summary["manifest"] = manifest("sweep", cmd, started);
    summary["rows"] = rows.size();
    summary["failed_rows"] = failures;
    emit(cmd.outputs.summary, "--summary", err, [&](std::ostream& o) { o << dump_json(summary); });
  }
  return exit_ok;
}

int run_verify(Command& cmd, std::ostream& out, std::ostream& err, const std::string& started) {
  const Parameters& p = cmd.params;
  SuiteConfig suite;
  suite.cells = grid_cells(p);
  suite.nx = static_cast<int>(p.integer("nx"));
  suite.horizon = p.real("horizon");
  suite.threshold = p.real("threshold");
  suite.growth_cap = p.real("growth_cap");
  suite.dt0 = p.real("dt0");
  suite.jobs = static_cast<unsigned>(p.integer("jobs"));

  const VerificationReport report = run_full_suite(suite);
  json j = to_json(report);
  j["manifest"] = manifest("verify", cmd, started);
  emit(cmd.outputs.out, "--out", out, [&](std::ostream& o) { o << dump_json(j); });
  if (cmd.outputs.summary) {
    json summary;
    summary["manifest"] = j["manifest"];
    summary["pass"] = report.pass();
    summary["entries"] = report.entries.size();
    emit(cmd.outputs.summary, "--summary", err, [&](std::ostream& o) { o << dump_json(summary); });
  }
  for (const auto& e : report.entries) {
    if (!e.pass()) err << "check failed: " << e.key << (e.error.empty() ? "" : " (" + e.error + ")") << '\n';
  }
  if (!report.dichotomy.pass) err << "check failed: dichotomy\n";
  return report.pass() ? exit_ok : exit_check_failed;
}

}  // namespace

int parse_and_dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  const std::string started = utc_stamp();
  CLI::App app{"Time-fractional heat equation with a nonlinear boundary flux", "fracheat"};
  app.require_subcommand(1);
  app.set_version_flag("--version", FRACHEAT_VERSION);

  std::map<std::string, Command> commands;
  using Runner = int (*)(Command&, std::ostream&, std::ostream&, const std::string&);
  std::map<std::string, Runner> runners{
      {"mlf", run_mlf}, {"fode", run_fode}, {"solve", run_solve}, {"sweep", run_sweep}, {"verify", run_verify}};

  {
    Command& c = commands["mlf"];
    c.app = app.add_subcommand("mlf", "Mittag-Leffler function E_{alpha,r}(z)");
    c.params.add(c.app, {"alpha", Kind::real, 1.0, "order", open_closed(0.0, 2.0)});
    c.params.add(c.app, {"r", Kind::real, 1.0, "second parameter", positive()});
    c.params.add(c.app, {"z", Kind::real, 0.0, "argument", finite()});
    add_outputs(c, false);
  }
  {
    Command& c = commands["fode"];
    c.app = app.add_subcommand("fode", "scalar fractional ODE D^alpha n = n^p");
    c.params.add(c.app, {"alpha", Kind::real, 0.5, "order", open_closed(0.0, 1.0)});
    c.params.add(c.app, {"p", Kind::real, 2.0, "exponent", greater_than(1.0)});
    c.params.add(c.app, {"n0", Kind::real, 1.0, "initial value", positive()});
    c.params.add(c.app, {"horizon", Kind::real, 1e3, "final time", positive()});
    add_stepping(c.params, c.app);
    add_outputs(c, false);
  }
  {
    Command& c = commands["solve"];
    c.app = app.add_subcommand("solve", "adaptive run of the boundary blow-up problem");
    c.params.add(c.app, {"alpha", Kind::real, 0.5, "order", open_closed(0.0, 1.0)});
    c.params.add(c.app, {"p", Kind::real, 2.0, "boundary exponent", positive()});
    c.params.add(c.app, {"a", Kind::real, 0.1, "profile base value", positive()});
    c.params.add(c.app, {"nx", Kind::integer, 201, "mesh nodes", at_least(3)});
    c.params.add(c.app, {"horizon", Kind::real, 1e3, "final time", positive()});
    add_stepping(c.params, c.app);
    c.params.add(c.app, {"newton_tol", Kind::real, 1e-10, "Newton residual tolerance", positive()});
    c.params.add(c.app, {"newton_max_iter", Kind::integer, 50, "Newton iteration budget", at_least(1)});
    c.params.add(c.app, {"stride", Kind::integer, 1, "snapshot stride", at_least(1)});
    c.params.add(c.app, {"x_cut", Kind::real, 0.9, "interior cut for localization", open_closed(0.0, 1.0)});
    c.params.add(c.app, {"max_steps", Kind::integer, 100000, "accepted step budget", at_least(1)});
    add_outputs(c, true);
  }
  {
    Command& c = commands["sweep"];
    c.app = app.add_subcommand("sweep", "cross product of (alpha, p, a) runs as one CSV");
    add_grid_params(c);
    add_outputs(c, false);
  }
  {
    Command& c = commands["verify"];
    c.app = app.add_subcommand("verify", "run every applicable check over a grid; JSON report");
    add_grid_params(c);
    add_outputs(c, false);
  }

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? exit_ok : exit_usage;
  }

  for (auto& [name, cmd] : commands) {
    if (!cmd.app->parsed()) continue;
    try {
      cmd.params.resolve(cmd.outputs.config);
      return runners.at(name)(cmd, out, err, started);
    } catch (const UsageError& e) {
      err << "usage error: " << e.what() << '\n';
      return exit_usage;
    } catch (const ConfigError& e) {
      err << "usage error: " << e.what() << '\n';
      return exit_usage;
    } catch (const Error& e) {
      err << "numerical failure: " << e.what() << '\n';
      return exit_numerical;
    }
  }
  return exit_usage;
}

int parse_and_dispatch(const std::vector<std::string>& args) { return parse_and_dispatch(args, std::cout, std::cerr); }

}  // namespace fracheat
