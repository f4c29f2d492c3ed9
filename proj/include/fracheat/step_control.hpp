#pragma once

#include <algorithm>
#include <cstddef>

namespace fracheat {

/// Growth-limited step size control shared by the scalar and PDE drivers:
/// halve on rejection, grow by 1.2 after five consecutive accepts.
class StepController {
 public:
  static constexpr double kShrink = 0.5;
  static constexpr double kGrow = 1.2;
  static constexpr int kGrowAfter = 5;

  StepController(double dt0, double dt_min) : dt_(dt0), dt_min_(dt_min) {}

  // Step to attempt from time t, clipped so the horizon is hit exactly.
  double propose(double t, double horizon) const { return std::min(dt_, horizon - t); }

  void reject() {
    dt_ *= kShrink;
    streak_ = 0;
  }

  void accept() {
    if (++streak_ >= kGrowAfter) {
      dt_ *= kGrow;
      streak_ = 0;
    }
  }

  bool underflow() const { return dt_ < dt_min_; }
  double dt() const { return dt_; }

 private:
  double dt_;
  double dt_min_;
  int streak_ = 0;
};

}  // namespace fracheat
