#include "fracheat/specfun.hpp"

#include <array>
#include <numbers>
#include <optional>
#include <string>

#include <boost/multiprecision/cpp_bin_float.hpp>

namespace fracheat {

namespace {

constexpr double kPi = std::numbers::pi;

// Lanczos approximation with g = 7, n = 9 (P. Godfrey's coefficient set).
// Published relative error is about 1e-15 on the positive real axis.
constexpr double kLanczosG = 7.0;
constexpr std::array<double, 9> kLanczosCoef = {
    0.99999999999980993,  676.5203681218851,     -1259.1392167224028,
    771.32342877765313,   -176.61502916214059,   12.507343278686905,
    -0.13857109526572012, 9.9843695780195716e-6, 1.5056327351493116e-7};

// Largest argument with a finite double Gamma.
constexpr double kGammaMaxArg = 171.62437695630272;

double lanczos_sum(double xm) {
  double a = kLanczosCoef[0];
  for (std::size_t i = 1; i < kLanczosCoef.size(); ++i) {
    a += kLanczosCoef[i] / (xm + static_cast<double>(i));
  }
  return a;
}

// sin(pi x) with exact zeros at the integers.
double sinpi(double x) {
  if (x == std::floor(x)) return 0.0;
  const double reduced = x - 2.0 * std::round(0.5 * x);  // in [-1, 1]
  return std::sin(kPi * reduced);
}

bool is_nonpositive_integer(double x) { return x <= 0.0 && x == std::floor(x); }

// Mittag-Leffler regime parameters.
constexpr double kSwitchRadius = 5.0;
// |z|^{1/alpha} beyond which the asymptotic expansion is tried first even
// inside the switch radius (small alpha).
constexpr double kAsymptoticScale = 40.0;
constexpr int kSeriesMaxTerms = 500;
constexpr double kSeriesRelTol = 1e-16;
// Fast path is rejected when |sum| < kCancellation * max|term|.
constexpr double kCancellation = 1e-4;
constexpr int kWideMaxTerms = 5000;
constexpr int kAsymptoticMaxTerms = 500;
constexpr double kAsymptoticTol = 1e-11;

std::optional<MlEvaluation> asymptotic_expansion(double alpha, double r, double z) {
  const double abs_z = std::abs(z);
  const double log_abs_z = std::log(abs_z);
  const double x = std::pow(abs_z, 1.0 / alpha);

  // Residues of the poles enclosed by the Hankel contour.
  double pole = 0.0;
  if (z > 0.0) {
    const double log_pole = ((1.0 - r) / alpha) * log_abs_z + x - std::log(alpha);
    if (log_pole > 709.7) {
      throw OverflowError("mittag_leffler: result overflows double (z = " + std::to_string(z) + ")");
    }
    pole = std::exp(log_pole);
    // alpha = 2 adds the real pole at -|z|^{1/2}.
    if (alpha == 2.0) pole += 0.5 * std::pow(x, 1.0 - r) * std::exp(-x) * std::cos((1.0 - r) * kPi);
  } else if (alpha >= 1.0) {
    // Conjugate pair at |z|^{1/alpha} e^{+-i pi/alpha}; they merge into one
    // real pole on the negative axis when alpha = 1.
    const double theta = kPi / alpha;
    const double weight = alpha == 1.0 ? 1.0 : 2.0;
    pole = (weight / alpha) * std::pow(x, 1.0 - r) * std::exp(x * std::cos(theta)) *
           std::cos((1.0 - r) * theta + x * std::sin(theta));
  }
  // With integer alpha and r every term past r - alpha k <= 0 vanishes.
  const bool terminating = alpha == std::floor(alpha) && r == std::floor(r);

  // Algebraic tail -sum_k z^{-k} / Gamma(r - alpha k), optimally truncated.
  double sum = 0.0;
  double compensation = 0.0;
  double prev_mag = std::numeric_limits<double>::infinity();
  double remainder = std::numeric_limits<double>::infinity();
  int k = 1;
  for (; k <= kAsymptoticMaxTerms; ++k) {
    const double y = r - alpha * k;
    if (terminating && y <= 0.0) {
      remainder = 0.0;
      break;
    }
    double log_mag;
    double coef_sign;
    if (y <= 0.0) {
      // 1/Gamma(y) = sin(pi y) Gamma(1 - y) / pi
      log_mag = log_gamma(1.0 - y) - std::log(kPi) - k * log_abs_z;
      coef_sign = sinpi(y);
    } else {
      log_mag = -log_gamma(y) - k * log_abs_z;
      coef_sign = 1.0;
    }
    const double mag = std::exp(log_mag);
    if (mag > prev_mag) {
      remainder = mag;
      break;
    }
    const double power_sign = (z < 0.0 && (k % 2 == 1)) ? -1.0 : 1.0;
    const double term = -power_sign * coef_sign * mag;
    const double t = sum + term;
    compensation += std::abs(sum) >= std::abs(term) ? (sum - t) + term : (term - t) + sum;
    sum = t;
    remainder = mag;
    prev_mag = mag;
    if (mag < 1e-17 * std::abs(pole + sum + compensation)) break;
  }

  const double total = pole + (sum + compensation);
  if (total == 0.0 || !std::isfinite(total) || remainder > kAsymptoticTol * std::abs(total)) {
    return std::nullopt;
  }
  return MlEvaluation{total, MlRegime::asymptotic, k};
}

template <typename Real>
std::optional<MlEvaluation> wide_series(double alpha, double r, double z) {
  const auto s = mittag_leffler_series<Real>(Real(alpha), Real(r), Real(z), kWideMaxTerms,
                                             Real(1e-25));
  if (!s.converged) return std::nullopt;
  // Keep at least 14 significant digits after cancellation.
  const Real headroom = boost::multiprecision::pow(Real(10), std::numeric_limits<Real>::digits10 - 14);
  if (boost::multiprecision::abs(s.value) * headroom < s.max_abs_term) return std::nullopt;
  return MlEvaluation{static_cast<double>(s.value), MlRegime::wide_series, s.terms};
}

}  // namespace

double gamma_fn(double x) {
  if (!std::isfinite(x)) throw DomainError("gamma_fn: non-finite argument");
  if (is_nonpositive_integer(x)) {
    throw PoleError("gamma_fn: pole at x = " + std::to_string(x));
  }
  if (x > kGammaMaxArg) throw OverflowError("gamma_fn: overflow for x = " + std::to_string(x));
  if (x == std::floor(x) && x <= 30.0) {
    // Exact factorials (rounded once past 22!).
    double f = 1.0;
    for (double k = 2.0; k < x; k += 1.0) f *= k;
    return f;
  }
  if (x < 0.5) {
    // Reflection: Gamma(x) Gamma(1 - x) = pi / sin(pi x)
    return kPi / (sinpi(x) * gamma_fn(1.0 - x));
  }
  const double xm = x - 1.0;
  const double t = xm + kLanczosG + 0.5;
  // t^(xm + 1/2) split in two halves so large x does not overflow early.
  const double half_power = std::pow(t, 0.5 * (xm + 0.5));
  return std::sqrt(2.0 * kPi) * half_power * (half_power * std::exp(-t)) * lanczos_sum(xm);
}

double log_gamma(double x) {
  if (!(x > 0.0) || !std::isfinite(x)) {
    throw DomainError("log_gamma: requires finite x > 0");
  }
  if (x < 0.5) {
    return std::log(kPi / std::abs(sinpi(x))) - log_gamma(1.0 - x);
  }
  const double xm = x - 1.0;
  const double t = xm + kLanczosG + 0.5;
  return 0.5 * std::log(2.0 * kPi) + (xm + 0.5) * std::log(t) - t + std::log(lanczos_sum(xm));
}

double reciprocal_gamma(double x) {
  if (!std::isfinite(x)) throw DomainError("reciprocal_gamma: non-finite argument");
  if (is_nonpositive_integer(x)) return 0.0;
  if (x > kGammaMaxArg) return std::exp(-log_gamma(x));
  if (x < 0.5 && 1.0 - x > kGammaMaxArg) {
    return sinpi(x) * std::exp(log_gamma(1.0 - x)) / kPi;
  }
  return 1.0 / gamma_fn(x);
}

void MittagLefflerQuery::validate() const {
  if (!(alpha > 0.0 && alpha <= 2.0)) {
    throw DomainError("mittag_leffler: alpha must lie in (0, 2]; got " + std::to_string(alpha));
  }
  if (!(r > 0.0) || !std::isfinite(r)) {
    throw DomainError("mittag_leffler: r must be > 0; got " + std::to_string(r));
  }
  if (!std::isfinite(z)) throw DomainError("mittag_leffler: z must be finite");
}

MlEvaluation mittag_leffler_detailed(const MittagLefflerQuery& q) {
  q.validate();
  const double alpha = q.alpha;
  const double r = q.r;
  const double z = q.z;

  if (z == 0.0) return {reciprocal_gamma(r), MlRegime::closed_form, 1};

  const double scale = std::pow(std::abs(z), 1.0 / alpha);
  const bool asymptotic_first = std::abs(z) > kSwitchRadius || scale >= kAsymptoticScale;
  if (asymptotic_first) {
    if (auto a = asymptotic_expansion(alpha, r, z)) return *a;
  }

  const auto fast = mittag_leffler_series<double>(alpha, r, z, kSeriesMaxTerms, kSeriesRelTol);
  if (fast.converged && std::isfinite(fast.value) &&
      (z > 0.0 || std::abs(fast.value) >= kCancellation * fast.max_abs_term)) {
    return {fast.value, MlRegime::series, fast.terms};
  }
  if (z > 0.0 && !std::isfinite(fast.value)) {
    throw OverflowError("mittag_leffler: result overflows double");
  }

  using boost::multiprecision::cpp_bin_float_50;
  using boost::multiprecision::cpp_bin_float_100;
  if (auto w = wide_series<cpp_bin_float_50>(alpha, r, z)) return *w;
  if (auto w = wide_series<cpp_bin_float_100>(alpha, r, z)) return *w;

  if (!asymptotic_first) {
    if (auto a = asymptotic_expansion(alpha, r, z)) return *a;
  }
  throw ConvergenceError("mittag_leffler: no regime converged for alpha = " + std::to_string(alpha) +
                         ", r = " + std::to_string(r) + ", z = " + std::to_string(z));
}

double mittag_leffler(const MittagLefflerQuery& q) { return mittag_leffler_detailed(q).value; }

double mittag_leffler(double alpha, double r, double z) {
  return mittag_leffler(MittagLefflerQuery{alpha, r, z});
}

}  // namespace fracheat
