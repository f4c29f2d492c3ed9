#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "fracheat/pdesolver.hpp"

namespace fracheat {

/// Comparison tolerances used throughout the suite; echoed in report headers.
struct SuiteTolerances {
  double mass_rel = 0.05;
  double ordering_slack = 0.02;
  double envelope_rel = 1e-9;
  double monotone_rel = 1e-12;  // one-sided x-differences may dip to -monotone_rel * max_u
  double caputo_rel = 1e-9;     // discrete Caputo values may dip to -caputo_rel * scale
};

/// v(x, t) = C E_{alpha,1}(K t^alpha) e^{L x^2} with K = 4L^2 + 2L.
struct UpperSolutionParams {
  double C = 1.0;
  double L = 1.0;
  double alpha = 0.5;

  double K() const { return 4.0 * L * L + 2.0 * L; }
  void validate() const;
};

double upper_solution_envelope(const UpperSolutionParams& params, double x, double t);

struct CheckRecord {
  std::string name;
  std::string statement;  // the result it exercises
  bool pass = false;
  bool degenerate = false;
  bool applicable = true;
  double measure = 0.0;  // margin (>= 0 on pass) or residual, see `measure_kind`
  std::string measure_kind;
  std::string detail;
};

struct Lemma31Result {
  CheckRecord positivity;
  CheckRecord monotone_x;
  CheckRecord caputo_sign;
  CheckRecord monotone_t;  // informational only

  bool pass() const { return positivity.pass && monotone_x.pass && caputo_sign.pass; }
};

/// Throws HypothesisNotMet unless the initial snapshot is nondecreasing and
/// convex in x.
Lemma31Result check_lemma31(const RunHistory& history, const SolverConfig& cfg,
                            const SuiteTolerances& tol = {});

struct EnvelopeResult {
  CheckRecord domination;
  CheckRecord boundary;
  // Per level: min over nodes of (v - u) / v.
  std::vector<double> margins;
  // max over nodes of u / v is nonincreasing in t: the envelope outgrows the solution.
  bool ratio_nonincreasing = false;
  bool envelope_overflow = false;
  double u_over_v_max = 0.0;
};

/// Throws NotApplicable when p > 1.
EnvelopeResult check_global_existence(const RunHistory& history, const SolverConfig& cfg,
                                      const SuiteTolerances& tol = {});

struct MassResult {
  CheckRecord inequality;
  // Max over pre-crossing levels of |D m - u(1)^p| / u(1)^p.
  double identity_residual = 0.0;
  std::size_t levels_checked = 0;
};

/// Throws NotApplicable when p <= 1.
MassResult check_mass_inequality(const RunHistory& history, const SolverConfig& cfg,
                                 const SuiteTolerances& tol = {});

struct OrderingResult {
  CheckRecord against_bound;
  CheckRecord against_fode;
  double l0 = 0.0;
  double bound_time = 0.0;
  std::optional<double> fode_t_cross;
};

/// Throws NotApplicable unless the report has a crossing and p > 1.
OrderingResult check_bound_ordering(const RunHistory& history, const BlowUpReport& report,
                                   const SolverConfig& cfg, const SuiteTolerances& tol = {});

struct SuiteCell {
  double alpha;
  double p;
  double a;
};

struct SuiteConfig {
  std::vector<SuiteCell> cells;
  int nx = 201;
  double horizon = 1.0;
  double threshold = 1e6;
  double growth_cap = 0.05;
  double dt0 = 1e-3;
  unsigned jobs = 0;  // 0: hardware concurrency
  SuiteTolerances tol;
};

/// alpha {0.3, 0.5, 0.7, 1} x p {0.5, 1, 2, 3} at a = 0.48, horizon 1.
SuiteConfig default_suite();
/// alpha {0.5, 1} x p {1, 2}.
SuiteConfig small_suite();

struct SuiteEntry {
  SuiteCell cell;
  std::string key;
  std::string error;  // non-empty if the run could not be made
  std::optional<BlowUpReport> report;
  double l0 = 0.0;
  std::vector<CheckRecord> checks;

  bool pass() const;
};

struct VerificationReport {
  SuiteTolerances tol;
  std::vector<SuiteEntry> entries;  // sorted by key
  CheckRecord dichotomy;

  bool pass() const;
};

VerificationReport run_full_suite(const SuiteConfig& suite);

}  // namespace fracheat
