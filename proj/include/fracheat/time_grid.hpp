#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace fracheat {

/// Strictly increasing time levels starting at 0.
///
/// Step sizes are stored alongside the accumulated times; differences
/// t_n - t_j are always rebuilt from the stored steps, so steps far below
/// ulp(t) keep their full relative precision.
class TimeGrid {
 public:
  TimeGrid() : times_{0.0} {}

  /// Throws DomainError unless times[0] == 0 and times is strictly increasing.
  explicit TimeGrid(std::vector<double> times);

  static TimeGrid uniform(double h, std::size_t steps);

  void push_step(double dt);

  std::size_t size() const { return times_.size(); }
  std::size_t steps_count() const { return steps_.size(); }
  double time(std::size_t n) const { return times_[n]; }
  double step(std::size_t j) const { return steps_[j]; }
  double back() const { return times_.back(); }

  std::span<const double> times() const { return times_; }
  std::span<const double> steps() const { return steps_; }

  /// t_n - t_j summed from the stored steps.
  double elapsed(std::size_t j, std::size_t n) const;

 private:
  std::vector<double> times_;
  std::vector<double> steps_;
};

}  // namespace fracheat
