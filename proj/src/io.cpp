#include "fracheat/io.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>

namespace fracheat {

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.15g", v);
  return buf;
}

nlohmann::json json_number(double v) {
  if (!std::isfinite(v)) return nullptr;
  // Round first so the shortest round-trip form has at most 15 digits.
  return std::strtod(format_number(v).c_str(), nullptr);
}

nlohmann::json json_number(const std::optional<double>& v) {
  if (!v) return nullptr;
  return json_number(*v);
}

void write_run_csv(std::ostream& out, const RunHistory& history) {
  out << "t,dt,max_u,u_at_x0,u_at_x1,mass,newton_iters\n";
  const int last = history.mesh().nx() - 1;
  for (std::size_t n = 0; n < history.size(); ++n) {
    const auto& u = history.snapshot(n);
    const auto& rec = history.records()[n];
    out << format_number(history.grid().time(n)) << ',' << format_number(rec.dt) << ','
        << format_number(rec.max_u) << ',' << format_number(u[0]) << ',' << format_number(u[last]) << ','
        << format_number(mass(u, history.mesh())) << ',' << rec.newton_iters << '\n';
  }
}

void write_snapshots_csv(std::ostream& out, const RunHistory& history, std::size_t stride) {
  if (stride == 0) stride = 1;
  const Mesh& mesh = history.mesh();
  for (int i = 0; i < mesh.nx(); ++i) out << (i ? "," : "") << format_number(mesh.node(i));
  out << '\n';
  for (std::size_t n = 0; n < history.size(); ++n) {
    if (n % stride != 0 && n + 1 != history.size()) continue;
    out << format_number(history.grid().time(n));
    const auto& u = history.snapshot(n);
    for (Eigen::Index i = 0; i < u.size(); ++i) out << ',' << format_number(u[i]);
    out << '\n';
  }
}

void write_fode_csv(std::ostream& out, const FodeResult& result) {
  out << "t,n,dt\n";
  for (std::size_t k = 0; k < result.values.size(); ++k) {
    const double dt = k == 0 ? 0.0 : result.grid.step(k - 1);
    out << format_number(result.grid.time(k)) << ',' << format_number(result.values[k]) << ','
        << format_number(dt) << '\n';
  }
}

nlohmann::json to_json(const BlowUpReport& report) {
  nlohmann::json j;
  j["verdict"] = to_string(report.verdict);
  j["t_cross"] = json_number(report.t_cross);
  j["t_estimate"] = json_number(report.t_estimate);
  j["t_estimate_note"] = "heuristic: classical rate ansatz u ~ A (T - t)^(-1/(p-1))";
  j["argmax_always_rightmost"] = report.argmax_always_rightmost;
  j["argmax_degenerate"] = report.argmax_degenerate;
  j["interior_sup"] = json_number(report.interior_sup);
  j["x_cut"] = json_number(report.x_cut);
  j["warnings"] = report.warnings;
  return j;
}

nlohmann::json to_json(const SolverConfig& cfg) {
  nlohmann::json j;
  j["alpha"] = json_number(cfg.alpha);
  j["p"] = json_number(cfg.p);
  if (cfg.ic.family() == ProfileFamily::quadratic) {
    j["profile"] = "quadratic";
    j["a"] = json_number(cfg.ic.a());
    j["b"] = json_number(cfg.ic.b());
  } else {
    j["profile"] = "tabulated";
  }
  j["nx"] = cfg.nx;
  j["dt0"] = json_number(cfg.dt0);
  j["dt_min"] = json_number(cfg.dt_min);
  j["growth_cap"] = json_number(cfg.growth_cap);
  j["threshold"] = json_number(cfg.threshold);
  j["horizon"] = json_number(cfg.horizon);
  j["newton_tol"] = json_number(cfg.newton_tol);
  j["newton_max_iter"] = cfg.newton_max_iter;
  j["stride"] = cfg.snapshot_stride;
  j["x_cut"] = json_number(cfg.x_cut);
  j["max_steps"] = cfg.max_steps;
  return j;
}

nlohmann::json to_json(const CheckRecord& c) {
  nlohmann::json j;
  j["name"] = c.name;
  j["statement"] = c.statement;
  j["applicable"] = c.applicable;
  j["pass"] = c.pass;
  j["degenerate"] = c.degenerate;
  j["measure"] = json_number(c.measure);
  j["measure_kind"] = c.measure_kind;
  j["detail"] = c.detail;
  return j;
}

nlohmann::json to_json(const SuiteTolerances& tol) {
  nlohmann::json j;
  j["mass_rel"] = json_number(tol.mass_rel);
  j["ordering_slack"] = json_number(tol.ordering_slack);
  j["envelope_rel"] = json_number(tol.envelope_rel);
  j["monotone_rel"] = json_number(tol.monotone_rel);
  j["caputo_rel"] = json_number(tol.caputo_rel);
  return j;
}

nlohmann::json to_json(const VerificationReport& report) {
  nlohmann::json j;
  j["tolerances"] = to_json(report.tol);
  j["pass"] = report.pass();
  j["dichotomy"] = to_json(report.dichotomy);
  nlohmann::json entries = nlohmann::json::array();
  for (const auto& e : report.entries) {
    nlohmann::json je;
    je["key"] = e.key;
    je["alpha"] = json_number(e.cell.alpha);
    je["p"] = json_number(e.cell.p);
    je["a"] = json_number(e.cell.a);
    je["l0"] = json_number(e.l0);
    je["pass"] = e.pass();
    je["error"] = e.error.empty() ? nlohmann::json(nullptr) : nlohmann::json(e.error);
    je["report"] = e.report ? to_json(*e.report) : nlohmann::json(nullptr);
    nlohmann::json checks = nlohmann::json::array();
    for (const auto& c : e.checks) checks.push_back(to_json(c));
    je["checks"] = checks;
    entries.push_back(je);
  }
  j["entries"] = entries;
  return j;
}

std::string dump_json(const nlohmann::json& j) { return j.dump(2) + "\n"; }

}  // namespace fracheat
