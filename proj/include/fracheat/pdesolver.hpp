#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "fracheat/blowup.hpp"
#include "fracheat/time_grid.hpp"

namespace fracheat {

/// Uniform nodes x_i = i h on [0, 1], i = 0..nx-1.
class Mesh {
 public:
  explicit Mesh(int nx);

  int nx() const { return nx_; }
  double h() const { return h_; }
  double node(int i) const { return i == nx_ - 1 ? 1.0 : i * h_; }
  Eigen::VectorXd nodes() const;

 private:
  int nx_;
  double h_;
};

enum class ProfileFamily { quadratic, tabulated };

/// Initial data u0: either a + b x^2 or a table of nodal values on the
/// uniform mesh with as many nodes as entries.
class InitialCondition {
 public:
  InitialCondition() = default;

  static InitialCondition quadratic(double a, double b);
  static InitialCondition tabulated(Eigen::VectorXd values);

  ProfileFamily family() const { return family_; }
  double a() const { return a_; }
  double b() const { return b_; }
  const Eigen::VectorXd& table() const { return table_; }

  /// Nodal values on `mesh`; a table must match the mesh size.
  Eigen::VectorXd sample(const Mesh& mesh) const;

 private:
  ProfileFamily family_ = ProfileFamily::quadratic;
  double a_ = 1.0;
  double b_ = 0.0;
  Eigen::VectorXd table_;
};

/// u0 = a + b x^2 with b the smallest nonnegative root of 2b = (a + b)^p,
/// so that u0'(0) = 0 and u0'(1) = u0(1)^p. Throws NoCompatibleProfile when
/// no such root exists (for p = 2 this happens for a > 1/2).
InitialCondition build_quadratic_profile(double p, double a);

struct ProfileVerdict {
  bool positive = false;
  bool zero_profile = false;  // identically zero; the solver accepts it as an exact fixed point
  bool left_compatible = false;
  bool right_compatible = false;
  bool monotone = false;  // u0' >= 0
  bool convex = false;    // u0'' >= 0
  double left_residual = 0.0;
  double right_residual = 0.0;

  bool pass() const { return positive && left_compatible && right_compatible; }
  bool lemma_hypotheses() const { return monotone && convex; }
};

/// Positivity and compatibility of u0 with exact derivatives for the
/// quadratic family and second-order one-sided differences for tables.
ProfileVerdict validate_profile(const InitialCondition& ic, double p, double compat_tol);

struct SolverConfig {
  double alpha = 0.5;  // (0, 1]; 1 selects backward Euler
  double p = 2.0;      // > 0
  InitialCondition ic;
  int nx = 201;
  double dt0 = 1e-3;
  double growth_cap = 0.05;
  double threshold = 1e6;
  double horizon = 1.0;
  double dt_min = 1e-100;
  double newton_tol = 1e-10;
  int newton_max_iter = 50;
  std::size_t snapshot_stride = 1;
  double x_cut = 0.9;
  std::size_t max_steps = 100000;
  double compat_tol = 1e-8;

  Mesh mesh() const { return Mesh(nx); }

  /// Throws ConfigError naming the offending field.
  void validate() const;
};

struct StepRecord {
  double dt = 0.0;
  int newton_iters = 0;
  double max_u = 0.0;
};

/// Every accepted level of a run. The L1 memory term needs all of them.
class RunHistory {
 public:
  RunHistory(Mesh mesh, Eigen::VectorXd initial);

  const Mesh& mesh() const { return mesh_; }
  const TimeGrid& grid() const { return grid_; }
  std::size_t size() const { return snapshots_.size(); }
  const Eigen::VectorXd& snapshot(std::size_t n) const { return snapshots_[n]; }
  const Eigen::VectorXd& back() const { return snapshots_.back(); }
  const std::vector<Eigen::VectorXd>& snapshots() const { return snapshots_; }
  const std::vector<StepRecord>& records() const { return records_; }

  std::size_t steps_rejected() const { return rejected_; }
  void count_rejection() { ++rejected_; }

  /// Throws DomainError on a non-finite or negative nodal value.
  void append(double dt, Eigen::VectorXd u, int newton_iters);

  std::vector<double> node_series(int i) const;
  std::vector<double> max_series() const;

 private:
  Mesh mesh_;
  TimeGrid grid_;
  std::vector<Eigen::VectorXd> snapshots_;
  std::vector<StepRecord> records_;
  std::size_t rejected_ = 0;
};

struct AdvanceResult {
  Eigen::VectorXd u;
  int newton_iters = 0;
};

/// Solves the fully implicit step of size dt from the last level of
/// `history`: L1 in time over the whole history, centered second
/// differences in space, even ghost node at x = 0 and the ghost relation
/// u_ghost = u_{nx-2} + 2h u_{nx-1}^p at x = 1. Newton iteration with a
/// tridiagonal solve per iterate, started from the previous level.
///
/// Throws NewtonDivergence; callers halve dt and retry.
AdvanceResult advance(const RunHistory& history, const SolverConfig& cfg, double dt);

struct RunResult {
  RunHistory history;
  BlowUpReport report;
};

/// Adaptive run until threshold crossing, horizon, or dt underflow.
RunResult run(const SolverConfig& cfg);

/// Advances through a prescribed step ladder without adaptivity.
RunHistory run_fixed_steps(const SolverConfig& cfg, std::span<const double> steps);

/// Verdict, crossing time and rate-ansatz estimate from the max-value series.
BlowUpReport detect_blowup(const RunHistory& history, const SolverConfig& cfg);

struct Localization {
  bool argmax_always_rightmost = false;
  bool degenerate = false;
  double interior_sup = 0.0;
  double x_cut = 0.9;
};

Localization localize_blowup(const RunHistory& history, double x_cut = 0.9);

/// Trapezoidal integral of the snapshot over [0, 1].
double mass(const Eigen::Ref<const Eigen::VectorXd>& snapshot, const Mesh& mesh);

std::vector<double> mass_series(const RunHistory& history);

}  // namespace fracheat
