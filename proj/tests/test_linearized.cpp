#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <random>
#include <vector>

#include "fdlab/linearized.hpp"
#include "fdlab/profile.hpp"
#include "fdlab/steady.hpp"

using namespace fdlab;

namespace {

// every k-th node keeping r = 0 and the last node; node data stays exact, so
// residuals on the subsampled profile are truncation-dominated, far above the
// evaluation rounding floor
RadialProfile subsample(const RadialProfile& p, std::size_t stride) {
  std::vector<double> g, v, d;
  for (std::size_t i = 0; i < p.size(); i += stride) {
    g.push_back(p.grid[i]);
    v.push_back(p.values[i]);
    d.push_back(p.derivs[i]);
  }
  if ((p.size() - 1) % stride != 0) {
    g.push_back(p.grid.back());
    v.push_back(p.values.back());
    d.push_back(p.derivs.back());
  }
  return make_profile(std::move(g), std::move(v), std::move(d), p.meta);
}

LinearizedProfile coarsened(const LinearizedProfile& fine, std::size_t stride) {
  LinearizedProfile out;
  out.base = subsample(fine.base, stride);
  out.steady = fine.steady;
  out.alpha = fine.alpha;
  out.kappa = fine.kappa;
  out.gamma = fine.gamma;
  out.bound_lower = fine.bound_lower;
  out.bound_upper = fine.bound_upper;
  return out;
}

constexpr double kKappaA = 7.0 / 17.0;  // gamma = 6 exactly at n = 20, p = 3

// independently computed mode values (coupled high-order solve, rtol 1e-13,
// converged to ~1e-12): n = 20, p = 3, alpha = 1, kappa = 7/17
struct Oracle {
  double r, f;
};
constexpr Oracle kModeA[] = {
    {1.0, 9.011978216560e-01},  {2.0, 6.731116227088e-01},
    {5.0, 1.504732836515e-01},  {10.0, 1.074847204458e-02},
    {20.0, 2.805637951535e-04}, {50.0, 1.313378337337e-06},
    {100.0, 2.080241802139e-08}};

// n = 11, p = 7, alpha = 1, kappa = 1/1456 (half the admissible cap)
constexpr double kKappaB = 1.0 / 1456.0;
constexpr double kGammaB = 4.382148869802241;
constexpr Oracle kModeB[] = {{1.0, 7.462903011001e-01},
                             {5.0, 4.682775609304e-02},
                             {10.0, 4.510673256275e-03},
                             {100.0, 4.388888847445e-07},
                             {1000.0, 2.432547202340e-11}};

// f(r) r^6 at the last grid node r = 1e4 of the kappa = 7/17 profile
constexpr double kTailEnvelopeA = 2.0863212727e4;

}  // namespace

TEST_CASE("input validation and admissible window") {
  auto params = make_params(20, 3.0);
  const auto e = compute_exponents(params);
  CHECK_THROWS_AS(solve_f(params, 1.0, 0.0, 100.0), std::invalid_argument);
  CHECK_THROWS_AS(solve_f(params, 1.0, -0.1, 100.0), std::invalid_argument);
  CHECK_THROWS_AS(solve_f(params, 1.0, e.kappa0, 100.0), std::invalid_argument);
  CHECK_THROWS_WITH_AS(solve_f(params, 1.0, 0.7, 100.0),
                       doctest::Contains("0.58823529411764"),
                       std::invalid_argument);
  CHECK_THROWS_AS(solve_f(params, 0.0, kKappaA, 100.0), std::invalid_argument);
  CHECK_THROWS_AS(solve_f(params, -1.0, kKappaA, 100.0), std::invalid_argument);
  CHECK_THROWS_AS(solve_f(params, 1.0, kKappaA, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(solve_f(params, 1.0, kKappaA, 100.0, 1e-5),
                  std::invalid_argument);
  CHECK_THROWS_AS(solve_f(params, 1.0, kKappaA, 100.0, 1e-13),
                  std::invalid_argument);
  // complex tail exponents at n = 8: no admissible window at any kappa
  CHECK_THROWS_WITH_AS(solve_f(make_params(8, 3.0), 1.0, 0.1, 100.0),
                       doctest::Contains("window"), std::invalid_argument);
}

TEST_CASE("profile starts at exactly one with zero slope") {
  auto params = make_params(20, 3.0);
  const auto L = solve_f(params, 1.0, kKappaA, 1000.0);
  CHECK(L.base.grid[0] == 0.0);
  CHECK(L.base.values[0] == 1.0);
  CHECK(L.base.derivs[0] == 0.0);
  CHECK(L.base.r_max() == 1000.0);
  CHECK(L.base.meta.kind == ProfileKind::linearized);
  CHECK(L.base.meta.kappa == kKappaA);
  CHECK(L.steady.meta.kind == ProfileKind::steady_state);
  CHECK(L.steady.r_max() == 1000.0);
  CHECK(L.gamma == doctest::Approx(6.0).epsilon(1e-13));

  // deterministic: a repeated solve yields identical bytes
  const auto M = solve_f(params, 1.0, kKappaA, 1000.0);
  CHECK(M.base.values == L.base.values);
  CHECK(M.base.grid == L.base.grid);
}

TEST_CASE("centre values match an independently computed mode profile") {
  const auto L = solve_f(make_params(20, 3.0), 1.0, kKappaA, 1e4);
  for (const auto& o : kModeA)
    CHECK(L.base.eval(o.r) == doctest::Approx(o.f).epsilon(1e-7));
}

TEST_CASE("second family centre values match an independent solve") {
  auto params = make_params(11, 7.0);
  const auto e = compute_exponents(params);
  CHECK(e.kappa0 == doctest::Approx(1.0 / 728.0).epsilon(1e-12));
  const auto L = solve_f(params, 1.0, kKappaB, 1000.0);
  CHECK(L.gamma == doctest::Approx(kGammaB).epsilon(1e-13));
  for (const auto& o : kModeB)
    CHECK(L.base.eval(o.r) == doctest::Approx(o.f).epsilon(1e-7));
}

TEST_CASE("mode profiles stay positive across the admissible window") {
  auto params = make_params(20, 3.0);
  const auto e = compute_exponents(params);
  for (double frac : {0.1, 0.3, 0.5, 0.9}) {
    CAPTURE(frac);
    const auto L = solve_f(params, 1.0, frac * e.kappa0, 1e4);
    CHECK(L.gamma > e.gamma_lo);
    CHECK(L.gamma < e.gamma_hi);
    bool positive = true;
    for (double v : L.base.values) positive = positive && v > 0.0;
    CHECK(positive);
  }
}

TEST_CASE("fitted tail decay matches the exponent map within two percent") {
  auto params = make_params(20, 3.0);
  const auto e = compute_exponents(params);
  double prev = 0.0;
  for (double kappa : {0.1 * e.kappa0, 0.5 * e.kappa0, kKappaA, 0.9 * e.kappa0}) {
    CAPTURE(kappa);
    const auto L = solve_f(params, 1.0, kappa, 1e4);
    const auto fit = fit_tail(L.base, TailModel::single_power, 1e2, 1e4);
    const double gamma = gamma_of_kappa(e, kappa);
    CHECK(std::fabs(fit.exponent - gamma) <= 0.02 * gamma);
    CHECK(fit.exponent > prev);  // fitted decay inherits the map's monotonicity
    prev = fit.exponent;
  }

  // narrow-gap family: the two admissible tail rates differ by only ~0.24, so
  // the asymptotic regime needs a far-out window
  const auto LB = solve_f(make_params(11, 7.0), 1.0, kKappaB, 1e4);
  const auto fitB = fit_tail(LB.base, TailModel::single_power, 1e3, 1e4);
  CHECK(std::fabs(fitB.exponent - kGammaB) <= 0.02 * kGammaB);
}

TEST_CASE("tail envelope constants bound the profile on r > 1") {
  const auto L = solve_f(make_params(20, 3.0), 1.0, kKappaA, 1e4);
  CHECK(L.bound_lower > 0.0);
  CHECK(std::isfinite(L.bound_upper));
  CHECK(L.bound_upper > L.bound_lower);
  double lo = 0.0, hi = 0.0;
  bool first = true;
  for (std::size_t i = 0; i < L.base.size(); ++i) {
    const double r = L.base.grid[i];
    if (!(r > 1.0)) continue;
    const double t = L.base.values[i] * std::pow(r, L.gamma);
    lo = first ? t : std::min(lo, t);
    hi = first ? t : std::max(hi, t);
    first = false;
    // the envelope inequalities themselves
    CHECK(L.base.values[i] >= L.bound_lower * std::pow(r, -L.gamma) * (1 - 1e-12));
    CHECK(L.base.values[i] <= L.bound_upper * std::pow(r, -L.gamma) * (1 + 1e-12));
  }
  CHECK(lo == doctest::Approx(L.bound_lower).epsilon(1e-15));
  CHECK(hi == doctest::Approx(L.bound_upper).epsilon(1e-15));
  CHECK(L.bound_upper == doctest::Approx(kTailEnvelopeA).epsilon(1e-6));
  // the lower constant sits at the window's inner edge, near f(1)
  CHECK(L.bound_lower == doctest::Approx(9.012e-01).epsilon(5e-2));
  MESSAGE("envelope ratio sup/inf = ", L.bound_upper / L.bound_lower);
}

TEST_CASE("mode profile obeys the steady-state radial rescaling") {
  auto params = make_params(20, 3.0);
  const auto f1 = solve_f(params, 1.0, kKappaA, 2000.0);
  const auto fh = solve_f(params, 0.5, kKappaA, 1000.0);
  const auto f2 = solve_f(params, 2.0, kKappaA, 1000.0);
  // mu = alpha^{(p-1)/2} = alpha at p = 3
  for (double r : {0.05, 0.1, 0.5, 1.0, 2.0, 5.0, 10.0, 50.0, 100.0, 500.0, 900.0}) {
    CAPTURE(r);
    CHECK(fh.base.eval(r) == doctest::Approx(f1.base.eval(0.5 * r)).epsilon(1e-4));
    CHECK(f2.base.eval(r) == doctest::Approx(f1.base.eval(2.0 * r)).epsilon(1e-4));
  }
}

TEST_CASE("substitution residuals reproduce the certified defect") {
  auto params = make_params(20, 3.0);
  const double scale = (kKappaA + 1.0) * 3.0;  // potential at the centre, alpha = 1
  for (double tol : {1e-6, 1e-8, 1e-10}) {
    CAPTURE(tol);
    const auto L = solve_f(params, 1.0, kKappaA, 1000.0, tol);
    CHECK(substitution_check(L, 0.0) <= tol * scale);
  }
}

TEST_CASE("transformed residuals match the untransformed ones pointwise") {
  auto params = make_params(20, 3.0);
  const auto fine = solve_f(params, 1.0, kKappaA, 1000.0);
  CHECK_THROWS_AS(substitution_residuals(fine, -0.5), std::invalid_argument);

  // coarsened so truncation dominates the evaluation rounding floor
  const auto L = coarsened(fine, 8);
  const auto base = substitution_residuals(L, 0.0);
  for (double theta : {1.0, L.gamma}) {
    CAPTURE(theta);
    const auto trans = substitution_residuals(L, theta);
    REQUIRE(trans.size() == base.size());
    std::size_t bad = 0;
    for (std::size_t i = 0; i < base.size(); ++i) {
      if (!(std::fabs(trans[i]) <= 10.0 * std::fabs(base[i]) &&
            std::fabs(base[i]) <= 10.0 * std::fabs(trans[i])))
        ++bad;
    }
    CHECK(bad == 0);
  }
  // and at full resolution the maxima stay within an order of magnitude
  CHECK(substitution_check(fine, fine.gamma) <=
        10.0 * substitution_check(fine, 0.0));
}

TEST_CASE("far-field indicial value vanishes exactly at the mapped decay rate") {
  std::mt19937_64 rng(20250823);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (auto [n, p] : {std::pair<int, double>{20, 3.0}, {11, 7.0}, {13, 10.0}}) {
    CAPTURE(n);
    const auto e = compute_exponents(make_params(n, p));
    REQUIRE(e.rates_defined);
    const double plscale = 2.0 * e.pl_pm1;
    for (int i = 0; i < 60; ++i) {
      const double kappa = u(rng) * e.kappa0 * (1.0 - 1e-9);
      const double gamma = gamma_of_kappa(e, kappa);
      CHECK(std::fabs(tail_indicial_value(e, kappa, gamma)) <= 1e-11 * plscale);
      // the complementary root n - 2 - gamma
      CHECK(std::fabs(tail_indicial_value(e, kappa, n - 2.0 - gamma)) <=
            1e-11 * plscale);
      // positive at theta = 0, negative between the roots
      CHECK(tail_indicial_value(e, kappa, 0.0) > 0.0);
      CHECK(tail_indicial_value(e, kappa, 0.5 * (n - 2.0)) < 0.0);
    }
  }
  CHECK_THROWS_AS(tail_indicial_value(compute_exponents(make_params(3, 2.0)),
                                      0.1, 1.0),
                  std::invalid_argument);
}
