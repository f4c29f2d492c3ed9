#include <doctest.h>

#include <cmath>
#include <random>
#include <thread>
#include <vector>

#include <Eigen/Dense>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/tools/toms748_solve.hpp>

#include "fracheat/errors.hpp"
#include "fracheat/fracode.hpp"
#include "fracheat/pdesolver.hpp"
#include "fracheat/specfun.hpp"
#include "fracheat/tridiagonal.hpp"

using namespace fracheat;

namespace {

SolverConfig baseline(double alpha = 0.5, double p = 2.0, double a = 0.1) {
  SolverConfig cfg;
  cfg.alpha = alpha;
  cfg.p = p;
  cfg.ic = build_quadratic_profile(p, a);
  cfg.horizon = 50.0;
  return cfg;
}

double max_diff(const Eigen::VectorXd& a, const Eigen::VectorXd& b) { return (a - b).cwiseAbs().maxCoeff(); }

}  // namespace

TEST_CASE("mesh spans [0, 1]") {
  for (int nx : {3, 4, 11, 201, 1000}) {
    const Mesh mesh(nx);
    CHECK(std::abs(mesh.h() * (nx - 1) - 1.0) <= 1e-15);
    CHECK(mesh.node(0) == 0.0);
    CHECK(mesh.node(nx - 1) == 1.0);
    const Eigen::VectorXd x = mesh.nodes();
    CHECK(x.size() == nx);
    for (int i = 1; i < nx; ++i) CHECK(x[i] > x[i - 1]);
  }
  CHECK_THROWS_AS(Mesh(2), ConfigError);
}

TEST_CASE("quadratic profile examples") {
  const InitialCondition ic = build_quadratic_profile(2.0, 0.1);
  const double want = (1.8 - std::sqrt(1.8 * 1.8 - 0.04)) / 2.0;
  CHECK(ic.b() == doctest::Approx(0.00557281).epsilon(1e-6));
  CHECK(std::abs(ic.b() - want) <= 1e-12);
  CHECK(build_quadratic_profile(1.0, 1.0).b() == 1.0);
  CHECK_THROWS_AS(build_quadratic_profile(2.0, 1.0), NoCompatibleProfile);
  CHECK_THROWS_AS(build_quadratic_profile(2.0, 0.51), NoCompatibleProfile);
  CHECK_NOTHROW(build_quadratic_profile(2.0, 0.5));
}

TEST_CASE("quadratic profiles satisfy compatibility and the lemma hypotheses") {
  for (double p : {0.3, 0.5, 1.0, 1.5, 2.0, 3.0}) {
    for (double a : {0.01, 0.1, 0.3, 0.48}) {
      const InitialCondition ic = build_quadratic_profile(p, a);
      INFO("p = " << p << ", a = " << a);
      CHECK(ic.b() >= 0.0);
      CHECK(std::abs(2.0 * ic.b() - std::pow(a + ic.b(), p)) <= 1e-12 * std::max(1.0, ic.b()));
      const ProfileVerdict v = validate_profile(ic, p, 1e-8);
      CHECK(v.pass());
      CHECK(v.lemma_hypotheses());
    }
  }
}

TEST_CASE("validate_profile rejects bad data") {
  const ProfileVerdict flat = validate_profile(InitialCondition::quadratic(0.7, 0.0), 2.0, 1e-8);
  CHECK(flat.positive);
  CHECK(flat.left_compatible);
  CHECK_FALSE(flat.right_compatible);
  CHECK_FALSE(flat.pass());

  const ProfileVerdict zero = validate_profile(InitialCondition::tabulated(Eigen::VectorXd::Zero(51)), 2.0, 1e-8);
  CHECK_FALSE(zero.positive);
  CHECK(zero.zero_profile);
  CHECK_FALSE(zero.pass());

  // A table sampled from a compatible profile passes up to the difference error.
  const Mesh mesh(2001);
  const InitialCondition ic = build_quadratic_profile(2.0, 0.1);
  const ProfileVerdict tab = validate_profile(InitialCondition::tabulated(ic.sample(mesh)), 2.0, 1e-8);
  CHECK(tab.pass());
  CHECK(tab.lemma_hypotheses());

  Eigen::VectorXd dip = ic.sample(mesh);
  dip[1000] -= 1e-3;
  CHECK_FALSE(validate_profile(InitialCondition::tabulated(dip), 2.0, 1e-8).monotone);
}

TEST_CASE("config validation names the field") {
  SolverConfig cfg = baseline();
  CHECK_NOTHROW(cfg.validate());
  auto fails_with = [](SolverConfig c, const char* field) {
    try {
      c.validate();
    } catch (const ConfigError& e) {
      return std::string(e.what()).find(field) != std::string::npos;
    }
    return false;
  };
  SolverConfig bad = cfg;
  bad.alpha = 1.5;
  CHECK(fails_with(bad, "alpha"));
  bad = cfg;
  bad.p = 0.0;
  CHECK(fails_with(bad, "p"));
  bad = cfg;
  bad.threshold = 0.05;
  CHECK(fails_with(bad, "threshold"));
  bad = cfg;
  bad.horizon = 0.0;
  CHECK(fails_with(bad, "horizon"));
  bad = cfg;
  bad.ic = InitialCondition::quadratic(0.5, 0.0);
  CHECK(fails_with(bad, "profile"));
  bad = cfg;
  bad.ic = InitialCondition::tabulated(Eigen::VectorXd::Ones(10));
  CHECK_THROWS(bad.validate());
}

TEST_CASE("trapezoid mass examples") {
  const Mesh mesh(101);
  CHECK(mass(Eigen::VectorXd::Constant(101, 2.5), mesh) == doctest::Approx(2.5).epsilon(1e-15));
  CHECK(std::abs(mass(mesh.nodes(), mesh) - 0.5) <= 1e-15);
  const Eigen::VectorXd sq = mesh.nodes().array().square();
  CHECK(std::abs(mass(sq, mesh) - 1.0 / 3.0) <= 1e-4);
  CHECK(std::abs(mass(sq, mesh) - 1.0 / 3.0 - mesh.h() * mesh.h() / 6.0) <= 1e-12);
  CHECK_THROWS_AS(mass(Eigen::VectorXd::Ones(7), mesh), DomainError);
}

TEST_CASE("Thomas solver agrees with a dense solve") {
  std::mt19937 rng(7);
  std::uniform_real_distribution<double> off(-1.0, 1.0);
  for (int n : {1, 2, 5, 40}) {
    Eigen::VectorXd lo(n), di(n), up(n), rhs(n);
    for (int i = 0; i < n; ++i) {
      lo[i] = off(rng);
      up[i] = off(rng);
      di[i] = 3.0 + off(rng);
      rhs[i] = off(rng);
    }
    Eigen::MatrixXd dense = Eigen::MatrixXd::Zero(n, n);
    for (int i = 0; i < n; ++i) {
      dense(i, i) = di[i];
      if (i > 0) dense(i, i - 1) = lo[i];
      if (i + 1 < n) dense(i, i + 1) = up[i];
    }
    const Eigen::VectorXd want = dense.partialPivLu().solve(rhs);
    const Eigen::VectorXd got = solve_tridiagonal<double>(lo, di, up, rhs);
    CHECK(max_diff(got, want) <= 1e-13);
  }
  Eigen::VectorXd z = Eigen::VectorXd::Zero(3);
  CHECK_THROWS_AS(solve_tridiagonal<double>(z, z, z, z), DomainError);
}

TEST_CASE("zero data is an exact fixed point for any step sequence") {
  std::mt19937 rng(11);
  std::uniform_real_distribution<double> logdt(-8.0, -1.0);
  for (double alpha : {0.3, 0.5, 1.0}) {
    for (double p : {0.5, 1.0, 2.0}) {
      SolverConfig cfg;
      cfg.alpha = alpha;
      cfg.p = p;
      cfg.nx = 41;
      cfg.ic = InitialCondition::tabulated(Eigen::VectorXd::Zero(41));
      std::vector<double> steps;
      for (int k = 0; k < 30; ++k) steps.push_back(std::pow(10.0, logdt(rng)));
      const RunHistory h = run_fixed_steps(cfg, steps);
      REQUIRE(h.size() == 31);
      for (const auto& s : h.snapshots()) CHECK((s.array() == 0.0).all());
    }
  }
}

TEST_CASE("classical branch converges at first order in dt") {
  SolverConfig cfg = baseline(1.0);
  cfg.nx = 51;
  auto level = [&](double dt, int n) {
    const std::vector<double> steps(n, dt);
    return run_fixed_steps(cfg, steps).back();
  };
  const double T = 0.01;
  const Eigen::VectorXd u1 = level(T, 1);
  const Eigen::VectorXd u2 = level(T / 2, 2);
  const Eigen::VectorXd u4 = level(T / 4, 4);
  const double e1 = max_diff(u1, u2);
  const double e2 = max_diff(u2, u4);
  INFO("e1 = " << e1 << ", e2 = " << e2);
  CHECK(e1 <= T);
  CHECK(e1 / e2 == doctest::Approx(2.0).epsilon(0.25));
}

TEST_CASE("L1 branch is continuous in alpha at 1") {
  SolverConfig near = baseline(0.999);
  SolverConfig one = baseline(1.0);
  near.nx = one.nx = 101;
  const std::vector<double> steps(100, 1e-3);
  const Eigen::VectorXd a = run_fixed_steps(near, steps).back();
  const Eigen::VectorXd b = run_fixed_steps(one, steps).back();
  const double d = max_diff(a, b);
  MESSAGE("alpha 0.999 vs 1 after 100 steps: " << d);
  CHECK(d <= 1e-2);
}

TEST_CASE("advance keeps the previous level for a vanishing step") {
  SolverConfig cfg = baseline(0.5);
  cfg.nx = 21;
  RunHistory h(cfg.mesh(), cfg.ic.sample(cfg.mesh()));
  const AdvanceResult step = advance(h, cfg, 1e-14);
  CHECK(max_diff(step.u, h.back()) <= 1e-9);
  CHECK((step.u.array() >= h.back().array()).all());
}

TEST_CASE("history rejects invalid levels") {
  const Mesh mesh(5);
  RunHistory h(mesh, Eigen::VectorXd::Ones(5));
  Eigen::VectorXd neg = Eigen::VectorXd::Ones(5);
  neg[2] = -1e-3;
  CHECK_THROWS_AS(h.append(0.1, neg, 1), DomainError);
  Eigen::VectorXd nan = Eigen::VectorXd::Ones(5);
  nan[0] = NAN;
  CHECK_THROWS_AS(h.append(0.1, nan, 1), DomainError);
  h.append(0.1, Eigen::VectorXd::Constant(5, 2.0), 3);
  CHECK(h.size() == 2);
  CHECK(h.grid().size() == 2);
  CHECK(h.records().back().max_u == 2.0);
}

TEST_CASE("run: p = 1 stays bounded and matches the modal expansion") {
  // Linear case: u = sum_j c_j E_alpha(lambda_j t^alpha) phi_j with phi = cosh(kx),
  // k tanh k = 1 (lambda = k^2), and phi = cos(mu x), mu tan mu = -1 (lambda = -mu^2).
  SolverConfig cfg = baseline(0.5, 1.0, 0.5);
  cfg.horizon = 1.0;
  const RunResult r = run(cfg);
  CHECK(r.report.verdict == Verdict::no_within_horizon);
  CHECK_FALSE(r.report.t_cross.has_value());
  CHECK(r.history.grid().back() == doctest::Approx(1.0).epsilon(1e-12));

  const auto u0 = [](double x) { return 0.5 + 0.5 * x * x; };
  boost::math::tools::eps_tolerance<double> tol(50);
  auto root = [&](auto f, double lo, double hi) {
    std::uintmax_t it = 200;
    const auto br = boost::math::tools::toms748_solve(f, lo, hi, tol, it);
    return 0.5 * (br.first + br.second);
  };
  auto project = [&](auto phi) {
    using boost::math::quadrature::gauss_kronrod;
    const double num = gauss_kronrod<double, 61>::integrate([&](double x) { return u0(x) * phi(x); }, 0.0, 1.0);
    const double den = gauss_kronrod<double, 61>::integrate([&](double x) { return phi(x) * phi(x); }, 0.0, 1.0);
    return num / den;
  };
  const double k = root([](double k) { return k * std::tanh(k) - 1.0; }, 0.5, 2.0);
  const double c0 = project([&](double x) { return std::cosh(k * x); });
  double right = c0 * mittag_leffler(cfg.alpha, 1.0, k * k) * std::cosh(k);
  double initial = c0 * std::cosh(k);
  for (int j = 1; j <= 400; ++j) {
    const double lo = (j - 0.5) * M_PI + 1e-12;
    const double mu = root([](double m) { return m * std::sin(m) + std::cos(m); }, lo, j * M_PI);
    const double c = project([&](double x) { return std::cos(mu * x); });
    right += c * mittag_leffler(cfg.alpha, 1.0, -mu * mu) * std::cos(mu);
    initial += c * std::cos(mu);
  }
  CHECK(initial == doctest::Approx(u0(1.0)).epsilon(1e-4));  // expansion is complete
  const double got = r.history.back()[cfg.nx - 1];
  MESSAGE("u(1, 1) solver " << got << ", modal oracle " << right);
  CHECK(std::abs(got - right) / right <= 0.02);
  CHECK(std::abs(r.history.back().maxCoeff() - got) <= 1e-12 * got);
}

TEST_CASE("run: baseline blow-up regression") {
  const SolverConfig cfg = baseline();
  const RunResult r = run(cfg);
  REQUIRE(r.report.verdict == Verdict::yes);
  REQUIRE(r.report.t_cross.has_value());
  MESSAGE("t_cross = " << *r.report.t_cross << ", interior_sup = " << r.report.interior_sup);
  CHECK(*r.report.t_cross == doctest::Approx(11.60216775).epsilon(1e-6));
  CHECK(*r.report.t_cross <= cfg.horizon);
  CHECK(r.history.back().maxCoeff() >= cfg.threshold);
  CHECK(r.report.argmax_always_rightmost);
  CHECK_FALSE(r.report.argmax_degenerate);
  CHECK(r.report.interior_sup < 0.01 * cfg.threshold);
  CHECK(r.report.interior_sup == doctest::Approx(5.40715).epsilon(1e-4));
  if (r.report.t_estimate) CHECK(*r.report.t_estimate >= *r.report.t_cross);
}

TEST_CASE("detect_blowup on bounded and single-snapshot histories") {
  SolverConfig cfg = baseline();
  const Mesh mesh(5);
  RunHistory single(mesh, Eigen::VectorXd::Constant(5, 0.5));
  BlowUpReport r = detect_blowup(single, cfg);
  CHECK(r.verdict == Verdict::no_within_horizon);
  CHECK_FALSE(r.t_estimate.has_value());

  RunHistory bounded(mesh, Eigen::VectorXd::Constant(5, 0.5));
  for (int k = 1; k <= 20; ++k) bounded.append(0.1, Eigen::VectorXd::Constant(5, 0.5 + 1.5 * k / 20.0), 1);
  r = detect_blowup(bounded, cfg);
  CHECK(r.verdict == Verdict::no_within_horizon);
  CHECK_FALSE(r.t_cross.has_value());
  CHECK_FALSE(r.t_estimate.has_value());
}

TEST_CASE("detect_blowup recovers T = 1 from n = 1 / (1 - t)") {
  SolverConfig cfg = baseline();
  const Mesh mesh(3);
  RunHistory h(mesh, Eigen::VectorXd::Constant(3, 1.0));
  double togo = 1.0;
  while (1.0 / togo < cfg.threshold) {
    const double dt = 0.1 * togo;
    togo *= 0.9;
    h.append(dt, Eigen::VectorXd::Constant(3, 1.0 / togo), 1);
  }
  const BlowUpReport r = detect_blowup(h, cfg);
  REQUIRE(r.verdict == Verdict::yes);
  REQUIRE(r.t_estimate.has_value());
  CHECK(*r.t_estimate == doctest::Approx(1.0).epsilon(0.01));
  CHECK(*r.t_estimate >= *r.t_cross);
}

TEST_CASE("detect_blowup omits the rate fit for p <= 1") {
  SolverConfig cfg = baseline(0.5, 1.0, 0.1);
  const Mesh mesh(3);
  RunHistory h(mesh, Eigen::VectorXd::Constant(3, 1.0));
  for (int k = 1; k <= 30; ++k) h.append(1.0, Eigen::VectorXd::Constant(3, std::exp(k)), 1);
  const BlowUpReport r = detect_blowup(h, cfg);
  CHECK(r.verdict == Verdict::yes);
  CHECK_FALSE(r.t_estimate.has_value());
  CHECK_FALSE(r.warnings.empty());
}

TEST_CASE("localization on synthetic snapshots") {
  const Mesh mesh(11);
  RunHistory mono(mesh, mesh.nodes());
  mono.append(0.1, 2.0 * mesh.nodes(), 1);
  const Localization a = localize_blowup(mono);
  CHECK(a.argmax_always_rightmost);
  CHECK_FALSE(a.degenerate);
  CHECK(a.interior_sup == doctest::Approx(1.8));

  RunHistory flat(mesh, Eigen::VectorXd::Constant(11, 3.0));
  const Localization b = localize_blowup(flat);
  CHECK(b.argmax_always_rightmost);
  CHECK(b.degenerate);

  Eigen::VectorXd bump = mesh.nodes();
  bump[5] = 4.0;
  RunHistory inner(mesh, mesh.nodes());
  inner.append(0.1, bump, 1);
  CHECK_FALSE(localize_blowup(inner).argmax_always_rightmost);
  CHECK(localize_blowup(inner, 0.4).interior_sup == doctest::Approx(0.4));
}

TEST_CASE("snapshots stay nonnegative and nondecreasing in x") {
  for (double alpha : {0.3, 0.5, 0.7, 1.0}) {
    for (double p : {0.5, 1.0, 2.0, 3.0}) {
      SolverConfig cfg = baseline(alpha, p, 0.48);
      cfg.horizon = 1.0;
      const RunResult r = run(cfg);
      INFO("alpha = " << alpha << ", p = " << p);
      CHECK(r.report.verdict == (p > 1.0 ? Verdict::yes : Verdict::no_within_horizon));
      bool nonneg = true, mono = true;
      for (const auto& s : r.history.snapshots()) {
        nonneg = nonneg && (s.array() >= 0.0).all();
        for (Eigen::Index i = 1; i < s.size(); ++i) mono = mono && s[i] >= s[i - 1];
      }
      CHECK(nonneg);
      CHECK(mono);
      CHECK(r.history.size() == r.history.grid().size());
    }
  }
}

TEST_CASE("discrete Caputo of the mass matches the boundary flux") {
  const SolverConfig cfg = baseline();
  const RunResult r = run(cfg);
  const std::vector<double> m = mass_series(r.history);
  const std::vector<double> right = r.history.node_series(cfg.nx - 1);
  double worst = 0.0;
  for (std::size_t n = 1; n < m.size() && right[n] < cfg.threshold; ++n) {
    const double d = discrete_caputo(cfg.alpha, r.history.grid(), m, n);
    const double flux = std::pow(right[n], cfg.p);
    worst = std::max(worst, std::abs(d - flux) / flux);
  }
  MESSAGE("worst relative residual " << worst);
  CHECK(worst <= 0.05);
}

TEST_CASE("baseline crossing time under space-time refinement") {
  SolverConfig coarse = baseline();
  SolverConfig fine = baseline();
  fine.nx = 2 * coarse.nx - 1;
  fine.growth_cap = coarse.growth_cap / 2;
  const double a = *run(coarse).report.t_cross;
  const double b = *run(fine).report.t_cross;
  MESSAGE("t_cross " << a << " -> " << b);
  CHECK(std::abs(a - b) / b <= 0.05);
}

TEST_CASE("classical crossing time under space-time refinement") {
  SolverConfig coarse = baseline(1.0);
  SolverConfig fine = baseline(1.0);
  fine.nx = 2 * coarse.nx - 1;
  fine.growth_cap = coarse.growth_cap / 2;
  fine.dt0 = coarse.dt0 / 2;
  const RunResult a = run(coarse);
  const RunResult b = run(fine);
  REQUIRE(a.report.verdict == Verdict::yes);
  REQUIRE(b.report.verdict == Verdict::yes);
  CHECK(std::abs(*a.report.t_cross - *b.report.t_cross) / *b.report.t_cross <= 0.05);
}

TEST_CASE("too small a step floor gives an inconclusive verdict") {
  SolverConfig cfg = baseline();
  cfg.dt_min = cfg.dt0;
  const RunResult r = run(cfg);
  CHECK(r.report.verdict == Verdict::inconclusive);
  CHECK_FALSE(r.report.warnings.empty());
}

TEST_CASE("independent runs are safe to execute concurrently") {
  SolverConfig cfg = baseline(0.7, 3.0, 0.48);
  cfg.horizon = 1.0;
  const double serial = *run(cfg).report.t_cross;
  std::vector<double> out(3);
  {
    std::vector<std::jthread> pool;
    for (int i = 0; i < 3; ++i) pool.emplace_back([&, i] { out[i] = *run(cfg).report.t_cross; });
  }
  for (double v : out) CHECK(v == serial);
}
