#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <fdlab/exponents.hpp>
#include <fdlab/pde.hpp>
#include <fdlab/rates.hpp>
#include <fdlab/steady.hpp>

#include <cmath>
#include <cstring>
#include <stdexcept>
#include <string>
#include <vector>

using namespace fdlab;

namespace {

// A trace whose two channels decay as exact exponentials around alpha.
EvolutionTrace synthetic_trace(double alpha, double a_center, double k_center,
                               double a_sup, double k_sup, double t_max,
                               double dt) {
  EvolutionTrace tr;
  tr.params = make_params(20, 3.0);
  tr.alpha = alpha;
  for (double t = 0.0; t <= t_max + 1e-12; t += dt) {
    tr.times.push_back(t);
    tr.center_values.push_back(alpha + a_center * std::exp(-k_center * t));
    tr.sup_deviation.push_back(a_sup * std::exp(-k_sup * t));
  }
  return tr;
}

// Small, fast experiment setup: the verdict mechanics are exercised here,
// the quantitative acceptance runs live in the acceptance battery.
ExperimentConfig tiny_config() {
  ExperimentConfig c;
  c.solver.R = 40.0;
  c.solver.nodes = 400;
  c.solver.dt_init = c.solver.dt_max = 0.05;  // lockstep for the two runs
  c.solver.newton_tol = 1e-12;
  c.t_end = 3.0;
  c.snapshot_count = 41;
  return c;
}

bool mentions(const std::exception& e, const char* needle) {
  return std::string(e.what()).find(needle) != std::string::npos;
}

}  // namespace

TEST_CASE("pure exponential is fitted to machine precision") {
  const auto tr = synthetic_trace(5.0, 3.0, 0.7, 2.0, 0.3, 20.0, 0.5);
  const RateFit fc = fit_rate(tr, Channel::center, 2.0, 18.0);
  CHECK(std::fabs(fc.rate - 0.7) < 1e-12);
  CHECK(std::fabs(fc.intercept - std::log(3.0)) < 1e-11);
  CHECK(fc.r_squared > 1.0 - 1e-12);
  CHECK(fc.r_squared <= 1.0);
  CHECK(fc.n_points == 33);  // t = 2, 2.5, ..., 18
  CHECK(fc.t_lo == doctest::Approx(2.0));
  CHECK(fc.t_hi == doctest::Approx(18.0));

  // channels are independent: the sup channel carries its own exponent
  const RateFit fs = fit_rate(tr, Channel::sup, 2.0, 18.0);
  CHECK(std::fabs(fs.rate - 0.3) < 1e-12);
}

TEST_CASE("constant trace fits slope zero with zero r squared") {
  EvolutionTrace tr = synthetic_trace(5.0, 0.0, 0.0, 0.0, 0.0, 20.0, 0.5);
  for (auto& c : tr.center_values) c = 5.0 + 1e-3;
  for (auto& s : tr.sup_deviation) s = 42.0;
  for (Channel ch : {Channel::center, Channel::sup}) {
    const RateFit f = fit_rate(tr, ch, 2.0, 18.0);
    CHECK(std::fabs(f.rate) < 1e-13);
    // zero variance carries no evidence of an exponential: r^2 is reported
    // as 0 so threshold-based callers flag the run INCONCLUSIVE
    CHECK(f.r_squared == 0.0);
  }
}

TEST_CASE("noisy exponential keeps the rate but loses perfect r squared") {
  auto tr = synthetic_trace(0.0, 3.0, 0.7, 3.0, 0.7, 20.0, 0.5);
  for (std::size_t k = 0; k < tr.sup_deviation.size(); ++k)
    tr.sup_deviation[k] *= (k % 2 == 0) ? 1.01 : 0.99;
  const RateFit f = fit_rate(tr, Channel::sup, 2.0, 18.0);
  CHECK(std::fabs(f.rate - 0.7) < 0.01);
  CHECK(f.r_squared < 1.0);
  CHECK(f.r_squared > 0.999);
}

TEST_CASE("fit window is validated and filters samples") {
  const auto tr = synthetic_trace(5.0, 3.0, 0.7, 2.0, 0.3, 20.0, 0.5);
  CHECK_THROWS_AS(fit_rate(tr, Channel::center, 2.0, 2.0),
                  std::invalid_argument);
  CHECK_THROWS_AS(fit_rate(tr, Channel::center, 5.0, 3.0),
                  std::invalid_argument);
  // fewer than 10 samples inside the window
  CHECK_THROWS_AS(fit_rate(tr, Channel::center, 16.4, 20.0),
                  std::runtime_error);

  // a corrupted sample outside the window must not affect the fit
  auto poisoned = tr;
  poisoned.sup_deviation.back() = -1.0;  // t = 20, outside [2, 18]
  const RateFit f = fit_rate(poisoned, Channel::sup, 2.0, 18.0);
  CHECK(std::fabs(f.rate - 0.3) < 1e-12);
}

TEST_CASE("non-positive deviation inside the window names the channel") {
  auto tr = synthetic_trace(5.0, 3.0, 0.7, 2.0, 0.3, 20.0, 0.5);
  tr.sup_deviation[20] = 0.0;  // t = 10
  try {
    fit_rate(tr, Channel::sup, 2.0, 18.0);
    CHECK(false);
  } catch (const std::runtime_error& e) {
    CHECK(mentions(e, "sup"));
  }
  tr.center_values[20] = 5.0;  // deviation exactly zero at t = 10
  try {
    fit_rate(tr, Channel::center, 2.0, 18.0);
    CHECK(false);
  } catch (const std::runtime_error& e) {
    CHECK(mentions(e, "center"));
  }
}

TEST_CASE("unequal channel lengths are rejected") {
  auto tr = synthetic_trace(5.0, 3.0, 0.7, 2.0, 0.3, 20.0, 0.5);
  tr.sup_deviation.pop_back();
  CHECK_THROWS_AS(fit_rate(tr, Channel::center, 2.0, 18.0),
                  std::invalid_argument);
}

TEST_CASE("enum names") {
  CHECK(std::strcmp(to_string(Channel::center), "center") == 0);
  CHECK(std::strcmp(to_string(Channel::sup), "sup") == 0);
  CHECK(std::strcmp(to_string(Direction::above), "above") == 0);
  CHECK(std::strcmp(to_string(Direction::below), "below") == 0);
  CHECK(std::strcmp(to_string(Verdict::PASS), "PASS") == 0);
  CHECK(std::strcmp(to_string(Verdict::FAIL), "FAIL") == 0);
  CHECK(std::strcmp(to_string(Verdict::INCONCLUSIVE), "INCONCLUSIVE") == 0);
}

TEST_CASE("rate experiment validates its inputs") {
  const Params P = make_params(20, 3.0);
  const auto cfg = tiny_config();
  // wrong regime: p = 1.4 at n = 20 has crossing steady states
  try {
    measure_convergence_rate(make_params(20, 1.4), 1.0, 0.1, 6.0,
                             Direction::above, cfg);
    CHECK(false);
  } catch (const std::invalid_argument& e) {
    CHECK(mentions(e, "INTERSECTING"));
  }
  // tail weight outside the admissible window
  CHECK_THROWS_AS(measure_convergence_rate(P, 1.0, 0.1, 2.0,
                                           Direction::above, cfg),
                  std::domain_error);
  CHECK_THROWS_AS(measure_convergence_rate(P, 1.0, 0.1, 9.5,
                                           Direction::above, cfg),
                  std::domain_error);
  CHECK_THROWS_AS(measure_convergence_rate(P, -1.0, 0.1, 6.0,
                                           Direction::above, cfg),
                  std::invalid_argument);
  CHECK_THROWS_AS(measure_convergence_rate(P, 1.0, 0.0, 6.0,
                                           Direction::above, cfg),
                  std::invalid_argument);
  auto few = cfg;
  few.snapshot_count = 4;
  CHECK_THROWS_AS(measure_convergence_rate(P, 1.0, 0.1, 6.0,
                                           Direction::above, few),
                  std::invalid_argument);
  auto bad_window = cfg;
  bad_window.window_lo = 2.5;
  bad_window.window_hi = 2.0;
  CHECK_THROWS_AS(measure_convergence_rate(P, 1.0, 0.1, 6.0,
                                           Direction::above, bad_window),
                  std::invalid_argument);
  auto beyond = cfg;
  beyond.window_lo = 1.0;
  beyond.window_hi = 10.0;  // past t_end = 3
  CHECK_THROWS_AS(measure_convergence_rate(P, 1.0, 0.1, 6.0,
                                           Direction::above, beyond),
                  std::invalid_argument);
}

TEST_CASE("verdict mechanics: r squared gate gives INCONCLUSIVE, not FAIL") {
  const Params P = make_params(20, 3.0);
  auto cfg = tiny_config();
  cfg.r2_threshold = 1.01;  // unreachable: any finite fit trips the gate
  const auto rep =
      measure_convergence_rate(P, 1.0, 0.1, 6.0, Direction::below, cfg);
  CHECK(rep.trace_status == TraceStatus::completed);
  CHECK(rep.verdict == Verdict::INCONCLUSIVE);
  CHECK(!rep.notes.empty());

  // the report echoes what was asked
  const ExponentSet e = compute_exponents(P);
  CHECK(rep.predicted_rate == doctest::Approx(kappa_of_gamma(e, 6.0)));
  CHECK(rep.gamma == 6.0);
  CHECK(rep.alpha == 1.0);
  CHECK(rep.b == 0.1);
  CHECK(rep.direction == Direction::below);
  CHECK(rep.t_end == 3.0);
  CHECK(rep.config_echo.solver.nodes == 400);
  CHECK(rep.tolerance_used == cfg.rate_tolerance);
}

TEST_CASE("verdict mechanics: wide tolerance passes on a clean small run") {
  const Params P = make_params(20, 3.0);
  auto cfg = tiny_config();
  cfg.rate_tolerance = 1e9;  // any finite rate is inside the band
  cfg.r2_threshold = 0.0;
  const auto rep =
      measure_convergence_rate(P, 1.0, 0.1, 6.0, Direction::below, cfg);
  CHECK(rep.verdict == Verdict::PASS);
}

TEST_CASE("sharpness check is one-sided on the centre channel") {
  const Params P = make_params(20, 3.0);
  auto cfg = tiny_config();
  cfg.rate_tolerance = 1e9;
  cfg.r2_threshold = 0.0;
  const auto pass =
      check_rate_sharpness(P, 1.0, 0.1, 6.0, Direction::below, cfg);
  CHECK(pass.verdict == Verdict::PASS);

  cfg.r2_threshold = 1.01;
  const auto inc =
      check_rate_sharpness(P, 1.0, 0.1, 6.0, Direction::below, cfg);
  CHECK(inc.verdict == Verdict::INCONCLUSIVE);
  CHECK(inc.notes.find("centre") != std::string::npos);
}

TEST_CASE("sweeps return reports in input order") {
  const Params P = make_params(20, 3.0);
  const std::vector<SweepPoint> pts = {
      {0.1, 7.0, Direction::below},
      {0.05, 4.0, Direction::above},
      {0.2, 6.0, Direction::below},
  };
  const auto reps = sweep_experiments(P, 1.0, pts, tiny_config());
  REQUIRE(reps.size() == pts.size());
  const ExponentSet e = compute_exponents(P);
  for (std::size_t i = 0; i < pts.size(); ++i) {
    CHECK(reps[i].gamma == pts[i].gamma);
    CHECK(reps[i].b == pts[i].b);
    CHECK(reps[i].direction == pts[i].direction);
    CHECK(reps[i].predicted_rate ==
          doctest::Approx(kappa_of_gamma(e, pts[i].gamma)));
  }
}

TEST_CASE("crossing data takes the nodewise envelope of the two branches") {
  const Params P = make_params(20, 1.4);
  const double alpha = 1.0, eps = 0.05, r_max = 200.0;
  const RadialProfile a = solve_phi(P, alpha, r_max, 1e-8);

  for (Direction side : {Direction::above, Direction::below}) {
    const RadialProfile d = crossing_data(P, alpha, eps, side, r_max);
    const double other = side == Direction::above ? alpha + eps : alpha - eps;
    const RadialProfile o = solve_phi(P, other, r_max, 1e-8);

    REQUIRE(d.size() >= a.size());
    CHECK(d.grid.front() == 0.0);
    CHECK(d.grid.back() == doctest::Approx(r_max));
    CHECK(d.values.front() == doctest::Approx(other));  // centre branch wins
    for (std::size_t i = 1; i < d.size(); ++i)
      CHECK(d.grid[i] > d.grid[i - 1]);

    int switches = 0;
    bool was_a = true;
    for (std::size_t i = 0; i < d.size(); ++i) {
      const double va = a.eval(d.grid[i]), vo = o.eval(d.grid[i]);
      const double want = side == Direction::above ? std::max(va, vo)
                                                   : std::min(va, vo);
      CHECK(d.values[i] == doctest::Approx(want).epsilon(1e-8));
      const bool is_a = side == Direction::above ? va >= vo : va <= vo;
      if (i > 0 && is_a != was_a) ++switches;
      was_a = is_a;
    }
    // the two branches genuinely cross inside [0, 50] in this regime
    CHECK(switches >= 2);
  }

  CHECK_THROWS_AS(crossing_data(P, 1.0, 0.0, Direction::above, r_max),
                  std::invalid_argument);
  CHECK_THROWS_AS(crossing_data(P, 1.0, 1.0, Direction::below, r_max),
                  std::invalid_argument);
}

TEST_CASE("instability driver rejects the ordered regime") {
  try {
    run_instability(make_params(20, 3.0), 1.0, 0.05, Direction::above,
                    SolverConfig{}, 10.0);
    CHECK(false);
  } catch (const std::invalid_argument& e) {
    CHECK(mentions(e, "ORDERED"));
  }
}

TEST_CASE("instability driver reports honestly on a short run") {
  SolverConfig s;
  s.R = 40.0;
  s.nodes = 500;
  const auto rep = run_instability(make_params(20, 1.4), 1.0, 0.05,
                                   Direction::above, s, 2.0);
  CHECK(rep.trace_status == TraceStatus::completed);
  CHECK(rep.side == Direction::above);
  CHECK(rep.eps == 0.05);
  // two time units move the centre by parts in a million: no factor 2 yet,
  // and the driver must say so instead of passing
  CHECK(rep.factor > 0.9);
  CHECK(rep.factor < 1.1);
  CHECK(rep.t_factor2 == -1.0);
  CHECK_FALSE(rep.pass);
}

TEST_CASE("map to original variables and back") {
  EvolutionTrace tr;
  tr.params = make_params(20, 3.0);  // m = 1/3
  tr.alpha = 1.0;
  for (double t : {0.0, 0.25, 1.0, 2.5, 7.0, 15.0})
    tr.times.push_back(t);
  for (double v : {1.0, 1.1, 0.9, 1.05, 0.97, 1.0})
    tr.center_values.push_back(v);
  tr.sup_deviation.assign(tr.times.size(), 0.1);

  const double m = 1.0 / 3.0, T = 2.0, q = 1.0 - m;
  const auto orig = to_original_variables(tr, m, T);
  REQUIRE(orig.tau.size() == tr.times.size());
  CHECK(orig.m == m);
  CHECK(orig.T == T);
  CHECK(orig.tau.front() == 0.0);  // t = 0 maps to tau = 0 exactly

  for (std::size_t k = 0; k < tr.times.size(); ++k) {
    const double t = tr.times[k];
    // forward formulas hold exactly
    CHECK(orig.tau[k] ==
          doctest::Approx(T * (1.0 - std::exp(-q * t))).epsilon(1e-15));
    const double expect_u = std::pow(q * (T - orig.tau[k]), 1.0 / q) *
                            std::pow(tr.center_values[k], 1.0 / m);
    CHECK(orig.center_u[k] == doctest::Approx(expect_u).epsilon(1e-14));
    CHECK(orig.tau[k] < T);

    // round trip: tau -> t to 1e-12, and t itself is echoed bit-for-bit
    CHECK(std::fabs(rescaled_time(orig.tau[k], m, T) - t) < 1e-12);
    CHECK(orig.t_echo[k] == t);

    // centre value recovers from the original variables
    CHECK(std::fabs(rescaled_center(orig.center_u[k], orig.tau[k], m, T) -
                    tr.center_values[k]) < 1e-12);
  }
}

TEST_CASE("frozen steady trace maps to the separable solution") {
  // v identically equal to alpha in rescaled time is exactly the separable
  // solution in original variables
  EvolutionTrace tr;
  tr.params = make_params(20, 3.0);
  tr.alpha = 1.3;
  for (double t : {0.0, 1.0, 5.0, 12.0, 30.0}) {
    tr.times.push_back(t);
    tr.center_values.push_back(1.3);
    tr.sup_deviation.push_back(0.0);
  }
  const double m = 1.0 / 3.0, T = 3.0, q = 1.0 - m;
  const auto orig = to_original_variables(tr, m, T);
  for (std::size_t k = 0; k < orig.tau.size(); ++k) {
    const double expect =
        std::pow(q * (T - orig.tau[k]), 1.0 / q) * std::pow(1.3, 1.0 / m);
    CHECK(std::fabs(orig.center_u[k] / expect - 1.0) < 1e-10);
  }
  // the prefactor kills the centre value as tau approaches T
  CHECK(orig.center_u.back() < 1e-12);
}

TEST_CASE("transform validates its arguments") {
  EvolutionTrace tr;
  tr.params = make_params(20, 3.0);
  tr.alpha = 1.0;
  tr.times = {0.0, 1.0};
  tr.center_values = {1.0, 1.0};
  tr.sup_deviation = {0.0, 0.0};

  CHECK_THROWS_AS(to_original_variables(tr, 0.5, 2.0),
                  std::invalid_argument);  // m disagrees with the trace
  CHECK_THROWS_AS(to_original_variables(tr, 1.5, 2.0), std::invalid_argument);
  CHECK_THROWS_AS(to_original_variables(tr, 1.0 / 3.0, 0.0),
                  std::invalid_argument);

  CHECK_THROWS_AS(rescaled_time(-0.1, 1.0 / 3.0, 2.0), std::invalid_argument);
  CHECK_THROWS_AS(rescaled_time(2.0, 1.0 / 3.0, 2.0), std::invalid_argument);
  CHECK(rescaled_time(0.0, 1.0 / 3.0, 2.0) == 0.0);
  CHECK_FALSE(std::signbit(rescaled_time(0.0, 1.0 / 3.0, 2.0)));
}
