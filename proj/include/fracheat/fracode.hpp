#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "fracheat/blowup.hpp"
#include "fracheat/time_grid.hpp"

namespace fracheat {

// ---------------------------------------------------------------------------
// L1 discretization of the Caputo derivative on nonuniform grids
// ---------------------------------------------------------------------------

/// L1 weights w_{n,0..n-1} at level n of `grid`, for 0 < alpha < 1.
///
///   w_{n,j} = [(t_n - t_j)^{1-alpha} - (t_n - t_{j+1})^{1-alpha}]
///             / (Gamma(2 - alpha) (t_{j+1} - t_j))
///
/// The discrete Caputo derivative at t_n is sum_j w_{n,j} (u_{j+1} - u_j).
/// Weights are positive and increasing in j. Throws DomainError for
/// alpha = 1 (handled by the classical branch) or n outside [1, size).
Eigen::VectorXd l1_weights(double alpha, const TimeGrid& grid, std::size_t n);

/// Weights for the level reached after the last of `steps`.
Eigen::VectorXd l1_weights_from_steps(double alpha, std::span<const double> steps);

/// Discrete Caputo derivative of the samples `values` (one per level) at
/// level n. alpha = 1 gives the backward difference.
double discrete_caputo(double alpha, const TimeGrid& grid, std::span<const double> values, std::size_t n);

/// Discrete Caputo derivative at every level 1..size-1 (entry 0 is 0).
std::vector<double> discrete_caputo_series(double alpha, const TimeGrid& grid,
                                           std::span<const double> values);

/// Exact Caputo derivative of t^beta: Gamma(beta+1)/Gamma(beta+1-alpha) t^{beta-alpha}.
double caputo_power_oracle(double alpha, double beta, double t);

// ---------------------------------------------------------------------------
// Scalar fractional ODE  D^alpha n = n^p,  n(0) = n0
// ---------------------------------------------------------------------------

struct FodeConfig {
  double alpha = 0.5;  // (0, 1]
  double p = 2.0;      // > 1
  double n0 = 1.0;     // > 0
  double dt0 = 1e-3;
  double growth_cap = 0.05;
  double threshold = 1e6;
  double dt_min = 1e-100;
  double horizon = 1e3;
  double newton_tol = 1e-12;
  int newton_max_iter = 50;
  std::size_t max_steps = 200000;

  /// Throws ConfigError naming the offending field.
  void validate() const;
};

struct FodeResult {
  TimeGrid grid;
  std::vector<double> values;
  std::vector<int> newton_iters;
  std::size_t steps_rejected = 0;
  BlowUpReport report;
};

/// Implicit L1 (or backward Euler at alpha = 1) integration with
/// growth-limited adaptive steps until n >= threshold, t >= horizon, or the
/// step size underflows dt_min (inconclusive).
FodeResult solve_fode_blowup(const FodeConfig& cfg);

/// One implicit step: root of w (n - n_prev) + history = n^p on the branch
/// continuing from n_prev. Throws NewtonDivergence if no root exists below
/// the cap or the iteration budget runs out.
struct ScalarStep {
  double value;
  int iterations;
};
ScalarStep solve_scalar_step(double w, double history, double n_prev, double p, double cap,
                             double tol, int max_iter);

/// l0^{1-p} / (p - 1): blow-up time of l' = l^p, l(0) = l0.
double classical_blowup_time(double p, double l0);

/// Lower solution l(t^alpha / Gamma(1 + alpha)) built from the classical
/// solution. Throws PastBlowUpError at or beyond its divergence time.
double lower_solution_value(double alpha, double p, double l0, double t);

/// Divergence time of lower_solution_value:
/// (Gamma(1+alpha) l0^{1-p} / (p-1))^{1/alpha}.
double fractional_bound_time(double alpha, double p, double l0);

}  // namespace fracheat
