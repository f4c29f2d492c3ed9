#include "fracheat/verify.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <string>
#include <tuple>

#include "fracheat/errors.hpp"
#include "fracheat/fracode.hpp"
#include "fracheat/parallel.hpp"
#include "fracheat/specfun.hpp"

namespace fracheat {

namespace {

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.15g", v);
  return buf;
}

bool profile_meets_hypotheses(const Eigen::VectorXd& u0, double rel) {
  const double tol = rel * std::max(1.0, u0.cwiseAbs().maxCoeff());
  for (Eigen::Index i = 0; i + 1 < u0.size(); ++i) {
    if (u0[i + 1] - u0[i] < -tol) return false;
  }
  for (Eigen::Index i = 1; i + 1 < u0.size(); ++i) {
    if (u0[i + 1] - 2.0 * u0[i] + u0[i - 1] < -tol) return false;
  }
  return true;
}

// Discrete Caputo derivative of every node at level n, with the sum of the
// absolute contributions as a rounding scale.
void nodal_caputo(const RunHistory& history, double alpha, std::size_t n, Eigen::VectorXd& value,
                  Eigen::VectorXd& scale) {
  const auto& snaps = history.snapshots();
  const Eigen::Index nx = snaps[0].size();
  value.setZero(nx);
  scale.setZero(nx);
  if (alpha == 1.0) {
    const double dt = history.grid().step(n - 1);
    value = (snaps[n] - snaps[n - 1]) / dt;
    scale = (snaps[n].cwiseAbs() + snaps[n - 1].cwiseAbs()) / dt;
    return;
  }
  const Eigen::VectorXd w = l1_weights(alpha, history.grid(), n);
  for (std::size_t j = 0; j < n; ++j) {
    const double wj = w[static_cast<Eigen::Index>(j)];
    value.noalias() += wj * (snaps[j + 1] - snaps[j]);
    scale.noalias() += wj * (snaps[j + 1].cwiseAbs() + snaps[j].cwiseAbs());
  }
}

CheckRecord named(std::string name, std::string statement) {
  CheckRecord c;
  c.name = std::move(name);
  c.statement = std::move(statement);
  return c;
}

std::size_t crossing_index(const RunHistory& history, double threshold) {
  const auto& rec = history.records();
  for (std::size_t k = 0; k < rec.size(); ++k) {
    if (rec[k].max_u >= threshold) return k;
  }
  return rec.size();
}

}  // namespace

// ---------------------------------------------------------------------------
// Upper solution

void UpperSolutionParams::validate() const {
  if (!(C > 0.0)) throw DomainError("UpperSolutionParams: C must be > 0");
  if (!(L > 0.0)) throw DomainError("UpperSolutionParams: L must be > 0");
  if (!(alpha > 0.0 && alpha <= 1.0)) throw DomainError("UpperSolutionParams: alpha must lie in (0, 1]");
}

double upper_solution_envelope(const UpperSolutionParams& params, double x, double t) {
  params.validate();
  if (!(t >= 0.0)) throw DomainError("upper_solution_envelope: requires t >= 0");
  const double e = mittag_leffler(params.alpha, 1.0, params.K() * std::pow(t, params.alpha));
  return params.C * e * std::exp(params.L * x * x);
}

// ---------------------------------------------------------------------------
// Qualitative properties of the solution

Lemma31Result check_lemma31(const RunHistory& history, const SolverConfig& cfg, const SuiteTolerances& tol) {
  const Eigen::VectorXd& u0 = history.snapshot(0);
  if (!profile_meets_hypotheses(u0, tol.monotone_rel)) {
    throw HypothesisNotMet("check_lemma31: initial profile must satisfy u0' >= 0 and u0'' >= 0");
  }

  Lemma31Result r;
  r.positivity = named("positivity", "u > 0 for t > 0");
  r.monotone_x = named("monotone_in_x", "u_x >= 0");
  r.caputo_sign = named("caputo_sign", "Caputo derivative of u in t is > 0");
  r.monotone_t = named("monotone_in_t", "u nondecreasing in t (informational)");

  const std::size_t levels = history.size();
  const bool all_zero = std::all_of(history.snapshots().begin(), history.snapshots().end(),
                                    [](const Eigen::VectorXd& s) { return (s.array() == 0.0).all(); });

  // (i) strict positivity after t = 0.
  double min_u = std::numeric_limits<double>::infinity();
  for (std::size_t n = 1; n < levels; ++n) min_u = std::min(min_u, history.snapshot(n).minCoeff());
  if (levels < 2) min_u = u0.minCoeff();
  r.positivity.measure = min_u;
  r.positivity.measure_kind = "min_u";
  r.positivity.pass = min_u > 0.0;
  if (all_zero) {
    r.positivity.pass = true;
    r.positivity.degenerate = true;
    r.positivity.detail = "zero data: strict positivity fails, reported as degenerate pass";
  }

  // (ii) nondecreasing in x.
  double worst_x = std::numeric_limits<double>::infinity();
  bool ok_x = true;
  for (const auto& s : history.snapshots()) {
    const double scale = std::max(s.maxCoeff(), std::numeric_limits<double>::min());
    for (Eigen::Index i = 0; i + 1 < s.size(); ++i) {
      const double d = s[i + 1] - s[i];
      worst_x = std::min(worst_x, d / scale);
      if (d < -tol.monotone_rel * scale) ok_x = false;
    }
  }
  r.monotone_x.pass = ok_x;
  r.monotone_x.measure = worst_x;
  r.monotone_x.measure_kind = "min_dx_over_max_u";

  // (iii) discrete Caputo sign, and the separate time-monotonicity report.
  double worst_c = std::numeric_limits<double>::infinity();
  bool ok_c = true;
  double worst_t = std::numeric_limits<double>::infinity();
  bool ok_t = true;
  Eigen::VectorXd value, scale;
  for (std::size_t n = 1; n < levels; ++n) {
    nodal_caputo(history, cfg.alpha, n, value, scale);
    for (Eigen::Index i = 0; i < value.size(); ++i) {
      const double s = std::max(scale[i], std::numeric_limits<double>::min());
      worst_c = std::min(worst_c, value[i] / s);
      if (value[i] < -tol.caputo_rel * s) ok_c = false;
    }
    const Eigen::VectorXd& a = history.snapshot(n - 1);
    const Eigen::VectorXd& b = history.snapshot(n);
    for (Eigen::Index i = 0; i < a.size(); ++i) {
      const double s = std::max(std::abs(a[i]), std::numeric_limits<double>::min());
      worst_t = std::min(worst_t, (b[i] - a[i]) / s);
      if (b[i] - a[i] < -tol.monotone_rel * s) ok_t = false;
    }
  }
  if (levels < 2) worst_c = worst_t = 0.0;
  r.caputo_sign.pass = ok_c;
  r.caputo_sign.measure = worst_c;
  r.caputo_sign.measure_kind = "min_caputo_over_scale";
  if (all_zero) {
    r.caputo_sign.degenerate = true;
    r.caputo_sign.detail = "zero data: Caputo derivative vanishes identically";
  }
  r.monotone_t.pass = ok_t;
  r.monotone_t.measure = worst_t;
  r.monotone_t.measure_kind = "min_relative_increment";
  r.monotone_t.detail = "not coupled to the Caputo sign check";
  return r;
}

// ---------------------------------------------------------------------------
// Global existence for p <= 1

EnvelopeResult check_global_existence(const RunHistory& history, const SolverConfig& cfg,
                                      const SuiteTolerances& tol) {
  if (cfg.p > 1.0) throw NotApplicable("check_global_existence: requires p <= 1");
  UpperSolutionParams params;
  params.alpha = cfg.alpha;
  params.L = 1.0;
  params.C = std::max(1.0, history.snapshot(0).maxCoeff());

  EnvelopeResult r;
  r.domination = named("upper_solution", "u <= C E(K t^alpha) e^{L x^2}, L = 1, K = 6");
  r.boundary = named("upper_solution_boundary", "2 C L E e^L >= (C E e^L)^p");

  const Mesh& mesh = history.mesh();
  const Eigen::VectorXd x = mesh.nodes();
  const Eigen::ArrayXd shape = x.array().square().exp();
  bool dominated = true;
  bool boundary_ok = true;
  double min_margin = std::numeric_limits<double>::infinity();
  double min_boundary = std::numeric_limits<double>::infinity();
  double prev_ratio = std::numeric_limits<double>::infinity();
  r.ratio_nonincreasing = true;

  for (std::size_t n = 0; n < history.size(); ++n) {
    const double t = history.grid().time(n);
    double e;
    try {
      e = mittag_leffler(cfg.alpha, 1.0, params.K() * std::pow(t, cfg.alpha));
    } catch (const OverflowError&) {
      // The envelope exceeds every double; domination holds trivially.
      r.margins.push_back(1.0);
      r.envelope_overflow = true;
      continue;
    }
    const Eigen::ArrayXd v = params.C * e * shape;
    const Eigen::ArrayXd u = history.snapshot(n).array();
    const double margin = ((v - u) / v).minCoeff();
    const double ratio = (u / v).maxCoeff();
    r.margins.push_back(margin);
    min_margin = std::min(min_margin, margin);
    if ((u > v * (1.0 + tol.envelope_rel)).any()) dominated = false;
    if (ratio > prev_ratio * (1.0 + 1e-12)) r.ratio_nonincreasing = false;
    prev_ratio = ratio;
    r.u_over_v_max = std::max(r.u_over_v_max, ratio);

    const double base = params.C * e * std::exp(params.L);
    const double lhs = 2.0 * params.L * base;
    const double rhs = std::pow(base, cfg.p);
    min_boundary = std::min(min_boundary, (lhs - rhs) / lhs);
    if (lhs < rhs) boundary_ok = false;
  }

  r.domination.pass = dominated;
  r.domination.measure = min_margin;
  r.domination.measure_kind = "min_relative_margin";
  r.domination.detail = "C = " + fmt(params.C) + (r.ratio_nonincreasing ? "; u/v nonincreasing in t"
                                                                          : "; u/v increased at some step");
  if (r.envelope_overflow) r.domination.detail += "; envelope overflowed a double at late times";
  r.boundary.pass = boundary_ok;
  r.boundary.measure = min_boundary;
  r.boundary.measure_kind = "min_relative_margin";
  return r;
}

// ---------------------------------------------------------------------------
// Mass inequality for p > 1

MassResult check_mass_inequality(const RunHistory& history, const SolverConfig& cfg,
                                 const SuiteTolerances& tol) {
  if (!(cfg.p > 1.0)) throw NotApplicable("check_mass_inequality: requires p > 1");
  MassResult r;
  r.inequality = named("mass_inequality", "Caputo derivative of the mass >= mass^p");

  const std::vector<double> m = mass_series(history);
  const std::vector<double> right = history.node_series(history.mesh().nx() - 1);
  const std::size_t stop = crossing_index(history, cfg.threshold);
  bool ok = true;
  double worst = std::numeric_limits<double>::infinity();
  for (std::size_t n = 1; n < stop; ++n) {
    const double d = discrete_caputo(cfg.alpha, history.grid(), m, n);
    const double mp = std::pow(m[n], cfg.p);
    worst = std::min(worst, (d - mp) / mp);
    if (d < mp - tol.mass_rel * mp) ok = false;
    const double up = std::pow(right[n], cfg.p);
    r.identity_residual = std::max(r.identity_residual, std::abs(d - up) / up);
    ++r.levels_checked;
  }
  r.inequality.pass = ok && r.levels_checked > 0;
  r.inequality.measure = r.levels_checked > 0 ? worst : 0.0;
  r.inequality.measure_kind = "min_relative_excess";
  r.inequality.detail = "identity residual " + fmt(r.identity_residual);
  return r;
}

// ---------------------------------------------------------------------------
// Bound ordering for p > 1

OrderingResult check_bound_ordering(const RunHistory& history, const BlowUpReport& report,
                                   const SolverConfig& cfg, const SuiteTolerances& tol) {
  if (!(cfg.p > 1.0)) throw NotApplicable("check_bound_ordering: requires p > 1");
  if (report.verdict != Verdict::yes || !report.t_cross) {
    throw NotApplicable("check_bound_ordering: run did not blow up");
  }
  OrderingResult r;
  r.against_bound = named("bound_ordering", "t_cross <= (Gamma(1+alpha) l0^{1-p}/(p-1))^{1/alpha}");
  r.against_fode = named("fode_ordering", "t_cross(PDE) <= t_cross(scalar fractional ODE from l0)");

  const double tc = *report.t_cross;
  r.l0 = mass(history.snapshot(0), history.mesh());
  r.bound_time = fractional_bound_time(cfg.alpha, cfg.p, r.l0);
  r.against_bound.pass = tc <= r.bound_time * (1.0 + tol.ordering_slack);
  r.against_bound.measure = (r.bound_time - tc) / r.bound_time;
  r.against_bound.measure_kind = "relative_margin";
  r.against_bound.detail = "l0 = " + fmt(r.l0) + ", bound = " + fmt(r.bound_time);

  FodeConfig fc;
  fc.alpha = cfg.alpha;
  fc.p = cfg.p;
  fc.n0 = r.l0;
  fc.dt0 = std::min(cfg.dt0, r.bound_time * 1e-3);
  fc.growth_cap = cfg.growth_cap;
  fc.threshold = cfg.threshold;
  fc.horizon = 2.0 * r.bound_time;
  try {
    const FodeResult fr = solve_fode_blowup(fc);
    r.fode_t_cross = fr.report.t_cross;
  } catch (const Error& e) {
    r.against_fode.detail = e.what();
  }
  if (r.fode_t_cross) {
    r.against_fode.pass = tc <= *r.fode_t_cross * (1.0 + tol.ordering_slack);
    r.against_fode.measure = (*r.fode_t_cross - tc) / *r.fode_t_cross;
    r.against_fode.detail = "fode t_cross = " + fmt(*r.fode_t_cross);
  } else if (r.against_fode.detail.empty()) {
    r.against_fode.detail = "scalar ODE did not cross the threshold within twice the bound time";
  }
  r.against_fode.measure_kind = "relative_margin";
  return r;
}

// ---------------------------------------------------------------------------
// Suite

SuiteConfig default_suite() {
  SuiteConfig s;
  for (double alpha : {0.3, 0.5, 0.7, 1.0}) {
    for (double p : {0.5, 1.0, 2.0, 3.0}) s.cells.push_back({alpha, p, 0.48});
  }
  return s;
}

SuiteConfig small_suite() {
  SuiteConfig s;
  for (double alpha : {0.5, 1.0}) {
    for (double p : {1.0, 2.0}) s.cells.push_back({alpha, p, 0.48});
  }
  return s;
}

bool SuiteEntry::pass() const {
  if (!error.empty()) return false;
  return std::all_of(checks.begin(), checks.end(), [](const CheckRecord& c) { return !c.applicable || c.pass; });
}

bool VerificationReport::pass() const {
  return dichotomy.pass &&
         std::all_of(entries.begin(), entries.end(), [](const SuiteEntry& e) { return e.pass(); });
}

namespace {

SuiteEntry run_cell(const SuiteCell& cell, const SuiteConfig& suite) {
  SuiteEntry entry;
  entry.cell = cell;
  entry.key = "alpha=" + fmt(cell.alpha) + ",p=" + fmt(cell.p) + ",a=" + fmt(cell.a);
  try {
    SolverConfig cfg;
    cfg.alpha = cell.alpha;
    cfg.p = cell.p;
    cfg.ic = build_quadratic_profile(cell.p, cell.a);
    cfg.nx = suite.nx;
    cfg.horizon = suite.horizon;
    cfg.threshold = suite.threshold;
    cfg.growth_cap = suite.growth_cap;
    cfg.dt0 = suite.dt0;
    const RunResult res = run(cfg);
    entry.report = res.report;
    entry.l0 = mass(res.history.snapshot(0), res.history.mesh());

    const Lemma31Result lemma = check_lemma31(res.history, cfg, suite.tol);
    entry.checks.push_back(lemma.positivity);
    entry.checks.push_back(lemma.monotone_x);
    entry.checks.push_back(lemma.caputo_sign);
    CheckRecord info = lemma.monotone_t;
    info.applicable = false;
    entry.checks.push_back(info);

    if (cfg.p <= 1.0) {
      const EnvelopeResult env = check_global_existence(res.history, cfg, suite.tol);
      entry.checks.push_back(env.domination);
      entry.checks.push_back(env.boundary);
    } else {
      entry.checks.push_back(check_mass_inequality(res.history, cfg, suite.tol).inequality);
      if (res.report.verdict == Verdict::yes) {
        const OrderingResult ord = check_bound_ordering(res.history, res.report, cfg, suite.tol);
        entry.checks.push_back(ord.against_bound);
        entry.checks.push_back(ord.against_fode);

        CheckRecord loc = named("localization", "x = 1 is the only blow-up point");
        loc.pass = res.report.argmax_always_rightmost && res.report.interior_sup < 0.01 * cfg.threshold;
        loc.measure = res.report.interior_sup / cfg.threshold;
        loc.measure_kind = "interior_sup_over_threshold";
        loc.detail = std::string("argmax_always_rightmost = ") +
                     (res.report.argmax_always_rightmost ? "true" : "false");
        entry.checks.push_back(loc);
      }
    }
  } catch (const NoCompatibleProfile&) {
    entry.error = "no-compatible-profile";
  } catch (const Error& e) {
    entry.error = e.what();
  }
  return entry;
}

}  // namespace

VerificationReport run_full_suite(const SuiteConfig& suite) {
  VerificationReport report;
  report.tol = suite.tol;
  std::vector<SuiteCell> cells = suite.cells;
  std::sort(cells.begin(), cells.end(), [](const SuiteCell& l, const SuiteCell& r) {
    return std::tie(l.alpha, l.p, l.a) < std::tie(r.alpha, r.p, r.a);
  });
  report.entries = parallel_map(cells.size(), suite.jobs, [&](std::size_t i) { return run_cell(cells[i], suite); });

  report.dichotomy = named("dichotomy", "blow-up within the horizon iff p > 1");
  std::size_t mismatches = 0;
  for (const auto& e : report.entries) {
    const bool blew = e.report && e.report->verdict == Verdict::yes;
    const bool conclusive = e.report && e.report->verdict != Verdict::inconclusive;
    if (!e.error.empty() || !conclusive || blew != (e.cell.p > 1.0)) ++mismatches;
  }
  report.dichotomy.pass = mismatches == 0;
  report.dichotomy.measure = static_cast<double>(mismatches);
  report.dichotomy.measure_kind = "mismatching_cells";
  return report;
}

}  // namespace fracheat
