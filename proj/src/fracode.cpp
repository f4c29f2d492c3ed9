#include "fracheat/fracode.hpp"

#include <cmath>
#include <string>

#include "fracheat/errors.hpp"
#include "fracheat/specfun.hpp"
#include "fracheat/step_control.hpp"

namespace fracheat {

// ---------------------------------------------------------------------------
// TimeGrid

TimeGrid::TimeGrid(std::vector<double> times) : times_(std::move(times)) {
  if (times_.empty() || times_[0] != 0.0) {
    throw DomainError("TimeGrid: first time stamp must be 0");
  }
  steps_.reserve(times_.size() - 1);
  for (std::size_t j = 1; j < times_.size(); ++j) {
    const double dt = times_[j] - times_[j - 1];
    if (!(dt > 0.0)) throw DomainError("TimeGrid: time stamps must be strictly increasing");
    steps_.push_back(dt);
  }
}

TimeGrid TimeGrid::uniform(double h, std::size_t steps) {
  if (!(h > 0.0)) throw DomainError("TimeGrid::uniform: step must be positive");
  TimeGrid g;
  for (std::size_t j = 0; j < steps; ++j) g.push_step(h);
  return g;
}

void TimeGrid::push_step(double dt) {
  if (!(dt > 0.0) || !std::isfinite(dt)) throw DomainError("TimeGrid: step must be positive");
  steps_.push_back(dt);
  times_.push_back(times_.back() + dt);
}

double TimeGrid::elapsed(std::size_t j, std::size_t n) const {
  double s = 0.0;
  for (std::size_t k = j; k < n; ++k) s += steps_[k];
  return s;
}

// ---------------------------------------------------------------------------
// L1 scheme

Eigen::VectorXd l1_weights_from_steps(double alpha, std::span<const double> steps) {
  if (!(alpha > 0.0 && alpha < 1.0)) {
    throw DomainError("l1_weights: alpha must lie in (0, 1); alpha = 1 uses the classical branch");
  }
  const std::size_t n = steps.size();
  if (n == 0) throw DomainError("l1_weights: need at least one step");

  const double beta = 1.0 - alpha;
  const double inv_gamma = 1.0 / gamma_fn(2.0 - alpha);
  Eigen::VectorXd w(static_cast<Eigen::Index>(n));

  // b = t_n - t_{j+1}, accumulated from the most recent step backwards.
  double b = 0.0;
  for (std::size_t jj = n; jj-- > 0;) {
    const double h = steps[jj];
    if (!(h > 0.0)) throw DomainError("l1_weights: steps must be positive");
    double diff;  // (b + h)^beta - b^beta
    if (b == 0.0) {
      diff = std::pow(h, beta);
    } else {
      diff = std::pow(b, beta) * std::expm1(beta * std::log1p(h / b));
    }
    w[static_cast<Eigen::Index>(jj)] = diff * inv_gamma / h;
    b += h;
  }
  return w;
}

Eigen::VectorXd l1_weights(double alpha, const TimeGrid& grid, std::size_t n) {
  if (n == 0 || n >= grid.size()) {
    throw DomainError("l1_weights: level index out of range");
  }
  return l1_weights_from_steps(alpha, grid.steps().first(n));
}

double discrete_caputo(double alpha, const TimeGrid& grid, std::span<const double> values, std::size_t n) {
  if (values.size() != grid.size()) throw DomainError("discrete_caputo: one value per level required");
  if (n == 0 || n >= grid.size()) throw DomainError("discrete_caputo: level index out of range");
  if (alpha == 1.0) return (values[n] - values[n - 1]) / grid.step(n - 1);
  const Eigen::VectorXd w = l1_weights(alpha, grid, n);
  double acc = 0.0;
  for (std::size_t j = 0; j < n; ++j) acc += w[static_cast<Eigen::Index>(j)] * (values[j + 1] - values[j]);
  return acc;
}

std::vector<double> discrete_caputo_series(double alpha, const TimeGrid& grid,
                                           std::span<const double> values) {
  std::vector<double> out(grid.size(), 0.0);
  for (std::size_t n = 1; n < grid.size(); ++n) out[n] = discrete_caputo(alpha, grid, values, n);
  return out;
}

double caputo_power_oracle(double alpha, double beta, double t) {
  if (!(alpha > 0.0 && alpha <= 1.0)) throw DomainError("caputo_power_oracle: alpha must lie in (0, 1]");
  if (!(beta > alpha - 1.0)) throw DomainError("caputo_power_oracle: requires beta > alpha - 1");
  if (!(t > 0.0)) throw DomainError("caputo_power_oracle: requires t > 0");
  return gamma_fn(beta + 1.0) * reciprocal_gamma(beta + 1.0 - alpha) * std::pow(t, beta - alpha);
}

// ---------------------------------------------------------------------------
// Scalar step

ScalarStep solve_scalar_step(double w, double history, double n_prev, double p, double cap,
                             double tol, int max_iter) {
  auto f = [&](double x) { return w * (x - n_prev) + history - std::pow(x, p); };

  double lo = n_prev;
  if (f(lo) > 0.0) {
    // Root lies below n_prev; only reachable with a non-monotone history.
    lo = 0.0;
    if (f(lo) > 0.0) throw NewtonDivergence("scalar step: no nonnegative root");
  }
  // f is concave with its maximum at (w/p)^{1/(p-1)}; the physical root is
  // the first sign change to the left of it.
  double hi = std::min(std::pow(w / p, 1.0 / (p - 1.0)), cap);
  if (!(hi > lo) || f(hi) < 0.0) {
    throw NewtonDivergence("scalar step: no root below the cap; step too large");
  }

  double x = n_prev;
  for (int it = 1; it <= max_iter; ++it) {
    const double fx = f(x);
    const double scale = w * std::abs(x) + w * n_prev + std::abs(history) + std::pow(x, p);
    if (std::abs(fx) <= tol * std::max(1.0, scale)) return {x, it - 1};
    if (fx < 0.0) {
      lo = x;
    } else {
      hi = x;
    }
    const double d = w - p * std::pow(x, p - 1.0);
    double next = x - fx / d;
    if (!(d > 0.0) || !(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (std::abs(next - x) <= 1e-15 * std::abs(x)) return {next, it};
    x = next;
  }
  throw NewtonDivergence("scalar step: Newton iteration budget exhausted");
}

// ---------------------------------------------------------------------------
// FODE driver

void FodeConfig::validate() const {
  if (!(alpha > 0.0 && alpha <= 1.0)) throw ConfigError("alpha must lie in (0,1]");
  if (!(p > 1.0)) throw ConfigError("p must be > 1");
  if (!(n0 > 0.0)) throw ConfigError("n0 must be > 0");
  if (!(dt_min > 0.0 && dt_min <= dt0)) throw ConfigError("dt0 must satisfy 0 < dt_min <= dt0");
  if (!(threshold > n0)) throw ConfigError("threshold must exceed n0");
  if (!(growth_cap > 0.0)) throw ConfigError("growth_cap must be > 0");
  if (!(horizon > 0.0)) throw ConfigError("horizon must be > 0");
  if (!(newton_tol > 0.0) || newton_max_iter < 1) throw ConfigError("newton tolerances must be positive");
}

FodeResult solve_fode_blowup(const FodeConfig& cfg) {
  cfg.validate();
  FodeResult out;
  out.values.push_back(cfg.n0);
  out.newton_iters.push_back(0);

  StepController control(cfg.dt0, cfg.dt_min);
  std::vector<double> steps;
  const double cap = 10.0 * cfg.threshold;

  for (;;) {
    const double t = out.grid.back();
    if (t >= cfg.horizon) {
      out.report.verdict = Verdict::no_within_horizon;
      break;
    }
    if (out.grid.steps_count() >= cfg.max_steps) {
      out.report.verdict = Verdict::inconclusive;
      out.report.warnings.push_back("step budget exhausted before threshold or horizon");
      break;
    }
    if (control.underflow()) {
      out.report.verdict = Verdict::inconclusive;
      out.report.warnings.push_back("step size fell below dt_min");
      break;
    }

    const double dt = control.propose(t, cfg.horizon);
    const double prev = out.values.back();
    double w;
    double history = 0.0;
    if (cfg.alpha == 1.0) {
      w = 1.0 / dt;
    } else {
      steps.assign(out.grid.steps().begin(), out.grid.steps().end());
      steps.push_back(dt);
      const Eigen::VectorXd weights = l1_weights_from_steps(cfg.alpha, steps);
      const std::size_t n = steps.size();
      w = weights[static_cast<Eigen::Index>(n - 1)];
      for (std::size_t j = 0; j + 1 < n; ++j) {
        history += weights[static_cast<Eigen::Index>(j)] * (out.values[j + 1] - out.values[j]);
      }
    }

    ScalarStep step{};
    try {
      step = solve_scalar_step(w, history, prev, cfg.p, cap, cfg.newton_tol, cfg.newton_max_iter);
    } catch (const NewtonDivergence&) {
      control.reject();
      ++out.steps_rejected;
      continue;
    }
    if ((step.value - prev) > cfg.growth_cap * prev) {
      control.reject();
      ++out.steps_rejected;
      continue;
    }

    out.grid.push_step(dt);
    out.values.push_back(step.value);
    out.newton_iters.push_back(step.iterations);
    control.accept();

    if (step.value >= cfg.threshold) {
      out.report.verdict = Verdict::yes;
      out.report.t_cross = out.grid.back();
      break;
    }
  }

  if (out.report.verdict == Verdict::yes) {
    auto fitted = fit_blowup_time(out.grid, out.values, cfg.p);
    if (fitted && *fitted >= *out.report.t_cross) {
      out.report.t_estimate = fitted;
    } else {
      out.report.warnings.push_back("rate-ansatz fit did not place T after the crossing; dropped");
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Closed forms

double classical_blowup_time(double p, double l0) {
  if (!(p > 1.0)) throw DomainError("classical_blowup_time: requires p > 1");
  if (!(l0 > 0.0)) throw DomainError("classical_blowup_time: requires l0 > 0");
  return std::pow(l0, 1.0 - p) / (p - 1.0);
}

double lower_solution_value(double alpha, double p, double l0, double t) {
  if (!(alpha > 0.0 && alpha <= 1.0)) throw DomainError("lower_solution_value: alpha must lie in (0, 1]");
  if (!(t >= 0.0)) throw DomainError("lower_solution_value: requires t >= 0");
  const double stretched = std::pow(t, alpha) / gamma_fn(1.0 + alpha);
  const double base = std::pow(l0, 1.0 - p) - (p - 1.0) * stretched;
  if (!(base > 0.0) || stretched >= classical_blowup_time(p, l0)) {
    throw PastBlowUpError("lower_solution_value: t = " + std::to_string(t) + " is past the blow-up time");
  }
  return std::pow(base, -1.0 / (p - 1.0));
}

double fractional_bound_time(double alpha, double p, double l0) {
  if (!(alpha > 0.0 && alpha <= 1.0)) throw DomainError("fractional_bound_time: alpha must lie in (0, 1]");
  if (!(p > 1.0)) throw DomainError("fractional_bound_time: requires p > 1");
  if (!(l0 > 0.0)) throw DomainError("fractional_bound_time: requires l0 > 0");
  return std::pow(gamma_fn(1.0 + alpha) * std::pow(l0, 1.0 - p) / (p - 1.0), 1.0 / alpha);
}

}  // namespace fracheat
