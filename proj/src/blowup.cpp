#include "fracheat/blowup.hpp"

#include <cmath>

#include <boost/math/tools/minima.hpp>

namespace fracheat {

std::string to_string(Verdict v) {
  switch (v) {
    case Verdict::yes:
      return "yes";
    case Verdict::no_within_horizon:
      return "no-within-horizon";
    case Verdict::inconclusive:
      return "inconclusive";
  }
  return "unknown";
}

std::optional<double> fit_blowup_time(const TimeGrid& grid, std::span<const double> values, double p,
                                      std::size_t window) {
  if (!(p > 1.0) || values.size() != grid.size()) return std::nullopt;
  const std::size_t count = std::min(window, values.size());
  if (count < 3) return std::nullopt;

  const std::size_t last = values.size() - 1;
  const std::size_t first = values.size() - count;
  std::vector<double> tau(count);  // t_k - t_last <= 0
  std::vector<double> log_v(count);
  double suffix = 0.0;
  for (std::size_t k = last + 1; k-- > first;) {
    if (!(values[k] > 0.0)) return std::nullopt;
    tau[k - first] = -suffix;
    log_v[k - first] = std::log(values[k]);
    if (k > 0) suffix += grid.step(k - 1);
  }
  const double span = -tau.front();
  if (!(span > 0.0)) return std::nullopt;

  const double rate = 1.0 / (p - 1.0);

  // Starting guess from the linearized model v^{-(p-1)} = c0 + c1 tau.
  double s0 = span;
  {
    double mt = 0.0, mq = 0.0;
    std::vector<double> q(count);
    for (std::size_t i = 0; i < count; ++i) {
      q[i] = std::exp(-(p - 1.0) * log_v[i]);
      mt += tau[i];
      mq += q[i];
    }
    mt /= static_cast<double>(count);
    mq /= static_cast<double>(count);
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t i = 0; i < count; ++i) {
      sxy += (tau[i] - mt) * (q[i] - mq);
      sxx += (tau[i] - mt) * (tau[i] - mt);
    }
    const double c1 = sxy / sxx;
    const double c0 = mq - c1 * mt;
    if (c1 < 0.0 && c0 > 0.0) s0 = -c0 / c1;
  }

  // Log-space residual with the amplitude profiled out.
  auto sse = [&](double log_s) {
    const double s = std::exp(log_s);
    double mean = 0.0;
    std::vector<double> r(count);
    for (std::size_t i = 0; i < count; ++i) {
      r[i] = log_v[i] + rate * std::log(s - tau[i]);
      mean += r[i];
    }
    mean /= static_cast<double>(count);
    double acc = 0.0;
    for (double ri : r) acc += (ri - mean) * (ri - mean);
    return acc;
  };

  const double centre = std::log(s0);
  const auto [best, value] = boost::math::tools::brent_find_minima(sse, centre - 12.0, centre + 12.0, 50);
  (void)value;
  const double s = std::exp(best);
  if (!std::isfinite(s) || !(s > 0.0)) return std::nullopt;
  return grid.back() + s;
}

}  // namespace fracheat
