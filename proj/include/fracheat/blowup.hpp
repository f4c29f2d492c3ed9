#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "fracheat/time_grid.hpp"

namespace fracheat {

enum class Verdict { yes, no_within_horizon, inconclusive };

std::string to_string(Verdict v);

struct BlowUpReport {
  Verdict verdict = Verdict::no_within_horizon;
  std::optional<double> t_cross;
  // Heuristic: fitted under the classical rate ansatz n ~ A (T - t)^{-1/(p-1)}.
  std::optional<double> t_estimate;
  bool argmax_always_rightmost = false;
  // Some snapshot had the maximum shared with the node left of x = 1.
  bool argmax_degenerate = false;
  double interior_sup = 0.0;
  double x_cut = 0.9;
  std::vector<std::string> warnings;
};

/// Least-squares fit of log n against log(T - t) over the last `window`
/// samples with the slope fixed at -1/(p-1); returns the fitted T.
///
/// Offsets T - t are assembled from the grid's stored steps. Returns nullopt
/// when p <= 1, fewer than three samples are available, or the fit does not
/// place T after the last sample.
std::optional<double> fit_blowup_time(const TimeGrid& grid, std::span<const double> values, double p,
                                      std::size_t window = 10);

}  // namespace fracheat
