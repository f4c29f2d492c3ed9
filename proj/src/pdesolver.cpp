#include "fracheat/pdesolver.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <boost/math/tools/roots.hpp>

#include "fracheat/errors.hpp"
#include "fracheat/fracode.hpp"
#include "fracheat/step_control.hpp"
#include "fracheat/tridiagonal.hpp"

namespace fracheat {

// ---------------------------------------------------------------------------
// Mesh and initial data

Mesh::Mesh(int nx) : nx_(nx), h_(0.0) {
  if (nx < 3) throw ConfigError("nx must be >= 3");
  h_ = 1.0 / static_cast<double>(nx - 1);
}

Eigen::VectorXd Mesh::nodes() const {
  Eigen::VectorXd x(nx_);
  for (int i = 0; i < nx_; ++i) x[i] = node(i);
  return x;
}

InitialCondition InitialCondition::quadratic(double a, double b) {
  InitialCondition ic;
  ic.family_ = ProfileFamily::quadratic;
  ic.a_ = a;
  ic.b_ = b;
  return ic;
}

InitialCondition InitialCondition::tabulated(Eigen::VectorXd values) {
  if (values.size() < 3) throw ConfigError("tabulated profile needs at least 3 nodes");
  InitialCondition ic;
  ic.family_ = ProfileFamily::tabulated;
  ic.table_ = std::move(values);
  return ic;
}

Eigen::VectorXd InitialCondition::sample(const Mesh& mesh) const {
  if (family_ == ProfileFamily::tabulated) {
    if (table_.size() != mesh.nx()) {
      throw ConfigError("tabulated profile has " + std::to_string(table_.size()) +
                        " nodes but nx = " + std::to_string(mesh.nx()));
    }
    return table_;
  }
  const Eigen::VectorXd x = mesh.nodes();
  return (a_ + b_ * x.array().square()).matrix();
}

InitialCondition build_quadratic_profile(double p, double a) {
  if (!(a > 0.0)) throw DomainError("build_quadratic_profile: requires a > 0");
  if (!(p > 0.0)) throw DomainError("build_quadratic_profile: requires p > 0");
  if (p == 1.0) return InitialCondition::quadratic(a, a);

  auto f = [&](double b) { return std::pow(a + b, p) - 2.0 * b; };
  double hi;
  if (p > 1.0) {
    // f is convex with its minimum where p (a + b)^{p-1} = 2.
    hi = std::pow(2.0 / p, 1.0 / (p - 1.0)) - a;
    if (!(hi > 0.0) || f(hi) > 0.0) {
      throw NoCompatibleProfile("no-compatible-profile: 2b = (a + b)^p has no root b >= 0 for p = " +
                                std::to_string(p) + ", a = " + std::to_string(a));
    }
    if (f(hi) == 0.0) return InitialCondition::quadratic(a, hi);
  } else {
    hi = 1.0;
    while (f(hi) > 0.0) hi *= 2.0;
  }
  boost::uintmax_t max_iter = 200;
  const auto [lo_b, hi_b] = boost::math::tools::toms748_solve(
      f, 0.0, hi, f(0.0), f(hi), boost::math::tools::eps_tolerance<double>(50), max_iter);
  return InitialCondition::quadratic(a, 0.5 * (lo_b + hi_b));
}

ProfileVerdict validate_profile(const InitialCondition& ic, double p, double compat_tol) {
  ProfileVerdict v;
  if (ic.family() == ProfileFamily::quadratic) {
    const double a = ic.a();
    const double b = ic.b();
    v.positive = a > 0.0 && a + b > 0.0;
    v.zero_profile = a == 0.0 && b == 0.0;
    v.left_residual = 0.0;
    const double right_value = a + b;
    v.right_residual = std::abs(2.0 * b - std::pow(std::max(right_value, 0.0), p));
    v.monotone = b >= 0.0;
    v.convex = b >= 0.0;
  } else {
    const Eigen::VectorXd& u = ic.table();
    const Eigen::Index n = u.size();
    const double h = 1.0 / static_cast<double>(n - 1);
    const double scale = u.cwiseAbs().maxCoeff();
    const double tol = 1e-12 * scale;
    v.positive = u.minCoeff() > 0.0;
    v.zero_profile = (u.array() == 0.0).all();
    const double left = (-3.0 * u[0] + 4.0 * u[1] - u[2]) / (2.0 * h);
    const double right = (3.0 * u[n - 1] - 4.0 * u[n - 2] + u[n - 3]) / (2.0 * h);
    v.left_residual = std::abs(left);
    v.right_residual = std::abs(right - std::pow(std::max(u[n - 1], 0.0), p));
    v.monotone = true;
    v.convex = true;
    for (Eigen::Index i = 0; i + 1 < n; ++i) {
      if (u[i + 1] - u[i] < -tol) v.monotone = false;
    }
    for (Eigen::Index i = 1; i + 1 < n; ++i) {
      if (u[i + 1] - 2.0 * u[i] + u[i - 1] < -tol) v.convex = false;
    }
  }
  v.left_compatible = v.left_residual <= compat_tol;
  v.right_compatible = v.right_residual <= compat_tol;
  return v;
}

// ---------------------------------------------------------------------------
// Configuration

void SolverConfig::validate() const {
  if (!(alpha > 0.0 && alpha <= 1.0)) {
    throw ConfigError("alpha must lie in (0,1]; got " + std::to_string(alpha));
  }
  if (!(p > 0.0)) throw ConfigError("p must be > 0; got " + std::to_string(p));
  if (nx < 3) throw ConfigError("nx must be >= 3");
  if (!(dt0 > 0.0)) throw ConfigError("dt0 must be > 0");
  if (!(dt_min > 0.0 && dt_min <= dt0)) throw ConfigError("dt_min must satisfy 0 < dt_min <= dt0");
  if (!(growth_cap > 0.0)) throw ConfigError("growth_cap must be > 0");
  if (!(horizon > 0.0)) throw ConfigError("horizon must be > 0");
  if (!(newton_tol > 0.0) || newton_max_iter < 1) throw ConfigError("newton tolerances must be positive");
  if (snapshot_stride < 1) throw ConfigError("stride must be >= 1");

  const ProfileVerdict pv = validate_profile(ic, p, compat_tol);
  if (!pv.zero_profile && !pv.pass()) {
    throw ConfigError("initial profile is not positive and compatible (u0'(0) residual " +
                      std::to_string(pv.left_residual) + ", u0'(1) - u0(1)^p residual " +
                      std::to_string(pv.right_residual) + ")");
  }
  const double max_u0 = ic.sample(mesh()).maxCoeff();
  if (!(threshold > max_u0)) throw ConfigError("threshold must exceed the maximum of the initial data");
}

// ---------------------------------------------------------------------------
// History

RunHistory::RunHistory(Mesh mesh, Eigen::VectorXd initial) : mesh_(mesh) {
  if (initial.size() != mesh_.nx()) throw DomainError("RunHistory: initial snapshot has wrong length");
  records_.push_back({0.0, 0, initial.maxCoeff()});
  snapshots_.push_back(std::move(initial));
}

void RunHistory::append(double dt, Eigen::VectorXd u, int newton_iters) {
  if (u.size() != mesh_.nx()) throw DomainError("RunHistory: snapshot has wrong length");
  if (!u.allFinite() || u.minCoeff() < 0.0) {
    throw DomainError("RunHistory: snapshot values must be finite and nonnegative");
  }
  grid_.push_step(dt);
  records_.push_back({dt, newton_iters, u.maxCoeff()});
  snapshots_.push_back(std::move(u));
}

std::vector<double> RunHistory::node_series(int i) const {
  std::vector<double> out;
  out.reserve(snapshots_.size());
  for (const auto& s : snapshots_) out.push_back(s[i]);
  return out;
}

std::vector<double> RunHistory::max_series() const {
  std::vector<double> out;
  out.reserve(records_.size());
  for (const auto& r : records_) out.push_back(r.max_u);
  return out;
}

// ---------------------------------------------------------------------------
// Implicit step

AdvanceResult advance(const RunHistory& history, const SolverConfig& cfg, double dt) {
  if (!(dt >= cfg.dt_min)) throw DomainError("advance: dt below dt_min");
  const Mesh& mesh = history.mesh();
  const int nx = mesh.nx();
  const int last = nx - 1;
  const double h = mesh.h();
  const double ih2 = 1.0 / (h * h);
  const double p = cfg.p;
  const Eigen::VectorXd& prev = history.back();

  // Weight of the new step and the memory term of all earlier ones.
  double w;
  Eigen::VectorXd memory = Eigen::VectorXd::Zero(nx);
  if (cfg.alpha == 1.0) {
    w = 1.0 / dt;
  } else {
    std::vector<double> steps(history.grid().steps().begin(), history.grid().steps().end());
    steps.push_back(dt);
    const Eigen::VectorXd weights = l1_weights_from_steps(cfg.alpha, steps);
    const std::size_t n = steps.size();
    w = weights[static_cast<Eigen::Index>(n - 1)];
    const auto& snaps = history.snapshots();
    for (std::size_t j = 0; j + 1 < n; ++j) {
      memory.noalias() += weights[static_cast<Eigen::Index>(j)] * (snaps[j + 1] - snaps[j]);
    }
  }

  auto flux = [p](double v) { return v > 0.0 ? std::pow(v, p) : 0.0; };
  auto flux_slope = [p](double v) { return v > 0.0 ? p * std::pow(v, p - 1.0) : 0.0; };

  Eigen::VectorXd u = prev;
  Eigen::VectorXd residual(nx);
  Eigen::VectorXd lower = Eigen::VectorXd::Constant(nx, -ih2);
  Eigen::VectorXd diag = Eigen::VectorXd::Constant(nx, w + 2.0 * ih2);
  Eigen::VectorXd upper = Eigen::VectorXd::Constant(nx, -ih2);
  upper[0] = -2.0 * ih2;
  lower[last] = -2.0 * ih2;

  for (int it = 0;; ++it) {
    double err = 0.0;
    for (int i = 0; i < nx; ++i) {
      const double left = i == 0 ? u[1] : u[i - 1];
      const double right = i == last ? u[last - 1] : u[i + 1];
      double lap = (left - 2.0 * u[i] + right) * ih2;
      double scale = w * (std::abs(u[i]) + std::abs(prev[i])) + std::abs(memory[i]) +
                     (std::abs(left) + 2.0 * std::abs(u[i]) + std::abs(right)) * ih2;
      if (i == last) {
        const double g = 2.0 * flux(u[i]) / h;
        lap += g;
        scale += g;
      }
      residual[i] = w * (u[i] - prev[i]) + memory[i] - lap;
      err = std::max(err, std::abs(residual[i]) / std::max(1.0, scale));
    }
    if (!std::isfinite(err)) throw NewtonDivergence("advance: non-finite residual");
    if (err <= cfg.newton_tol) return {u, it};
    if (it >= cfg.newton_max_iter) throw NewtonDivergence("advance: Newton iteration budget exhausted");

    diag[last] = w + 2.0 * ih2 - 2.0 * flux_slope(u[last]) / h;
    Eigen::VectorXd delta;
    try {
      delta = solve_tridiagonal<double>(lower, diag, upper, -residual);
    } catch (const DomainError&) {
      throw NewtonDivergence("advance: singular Jacobian");
    }
    u += delta;
    if (!u.allFinite() || u.maxCoeff() > 1e3 * cfg.threshold) {
      throw NewtonDivergence("advance: Newton iterate left the admissible range");
    }
  }
}

// ---------------------------------------------------------------------------
// Drivers

RunResult run(const SolverConfig& cfg) {
  cfg.validate();
  const Mesh mesh = cfg.mesh();
  RunHistory history(mesh, cfg.ic.sample(mesh));
  StepController control(cfg.dt0, cfg.dt_min);
  bool inconclusive = false;
  std::vector<std::string> warnings;

  for (;;) {
    const double t = history.grid().back();
    const double prev_max = history.records().back().max_u;
    if (prev_max >= cfg.threshold || t >= cfg.horizon) break;
    if (history.size() > cfg.max_steps) {
      inconclusive = true;
      warnings.push_back("step budget exhausted before threshold or horizon");
      break;
    }
    if (control.underflow()) {
      inconclusive = true;
      warnings.push_back("step size fell below dt_min");
      break;
    }

    const double dt = control.propose(t, cfg.horizon);
    AdvanceResult step;
    try {
      step = advance(history, cfg, dt);
    } catch (const NewtonDivergence&) {
      control.reject();
      history.count_rejection();
      continue;
    }
    const double new_max = step.u.maxCoeff();
    if (step.u.minCoeff() < 0.0 || (prev_max > 0.0 && new_max - prev_max > cfg.growth_cap * prev_max)) {
      control.reject();
      history.count_rejection();
      continue;
    }
    history.append(dt, std::move(step.u), step.newton_iters);
    control.accept();
  }

  BlowUpReport report = detect_blowup(history, cfg);
  if (inconclusive && report.verdict != Verdict::yes) report.verdict = Verdict::inconclusive;
  report.warnings.insert(report.warnings.end(), warnings.begin(), warnings.end());
  const Localization loc = localize_blowup(history, cfg.x_cut);
  report.argmax_always_rightmost = loc.argmax_always_rightmost;
  report.argmax_degenerate = loc.degenerate;
  report.interior_sup = loc.interior_sup;
  report.x_cut = loc.x_cut;
  return {std::move(history), std::move(report)};
}

RunHistory run_fixed_steps(const SolverConfig& cfg, std::span<const double> steps) {
  cfg.validate();
  const Mesh mesh = cfg.mesh();
  RunHistory history(mesh, cfg.ic.sample(mesh));
  for (double dt : steps) {
    AdvanceResult step = advance(history, cfg, dt);
    history.append(dt, std::move(step.u), step.newton_iters);
  }
  return history;
}

BlowUpReport detect_blowup(const RunHistory& history, const SolverConfig& cfg) {
  BlowUpReport report;
  report.verdict = Verdict::no_within_horizon;
  const std::vector<double> maxima = history.max_series();
  const auto hit = std::find_if(maxima.begin(), maxima.end(), [&](double m) { return m >= cfg.threshold; });
  if (hit == maxima.end()) return report;

  const std::size_t cross = static_cast<std::size_t>(hit - maxima.begin());
  report.verdict = Verdict::yes;
  report.t_cross = history.grid().time(cross);

  TimeGrid prefix;
  for (std::size_t k = 0; k < cross; ++k) prefix.push_step(history.grid().step(k));
  const auto fitted = fit_blowup_time(prefix, std::span<const double>(maxima).first(cross + 1), cfg.p);
  if (fitted && *fitted >= *report.t_cross) {
    report.t_estimate = fitted;
  } else if (!(cfg.p > 1.0)) {
    report.warnings.push_back("rate ansatz undefined for p <= 1; t_estimate omitted");
  } else {
    report.warnings.push_back("rate-ansatz fit did not place T after the crossing; t_estimate dropped");
  }
  return report;
}

Localization localize_blowup(const RunHistory& history, double x_cut) {
  Localization loc;
  loc.x_cut = x_cut;
  loc.argmax_always_rightmost = true;
  const Mesh& mesh = history.mesh();
  const int last = mesh.nx() - 1;
  int cut_index = 0;
  while (cut_index + 1 <= last && mesh.node(cut_index + 1) <= x_cut + 1e-12) ++cut_index;

  for (const auto& u : history.snapshots()) {
    const double top = u.maxCoeff();
    int arg = last;
    while (arg > 0 && u[arg] != top) --arg;
    if (arg != last) loc.argmax_always_rightmost = false;
    if (arg == last && u[last - 1] == top) loc.degenerate = true;
    loc.interior_sup = std::max(loc.interior_sup, u.head(cut_index + 1).maxCoeff());
  }
  return loc;
}

double mass(const Eigen::Ref<const Eigen::VectorXd>& snapshot, const Mesh& mesh) {
  if (snapshot.size() != mesh.nx()) throw DomainError("mass: snapshot has wrong length");
  const Eigen::Index n = snapshot.size();
  return mesh.h() * (snapshot.sum() - 0.5 * (snapshot[0] + snapshot[n - 1]));
}

std::vector<double> mass_series(const RunHistory& history) {
  std::vector<double> out;
  out.reserve(history.size());
  for (const auto& s : history.snapshots()) out.push_back(mass(s, history.mesh()));
  return out;
}

}  // namespace fracheat
