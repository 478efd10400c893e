#include "fdlab/acceptance.hpp"

#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <functional>
#include <map>
#include <ostream>
#include <stdexcept>
#include <utility>

#include "fdlab/comparison.hpp"
#include "fdlab/exponents.hpp"
#include "fdlab/linearized.hpp"
#include "fdlab/pde.hpp"
#include "fdlab/profile.hpp"
#include "fdlab/rates.hpp"
#include "fdlab/steady.hpp"

namespace fdlab {
namespace {

std::string fmt(const char* f, ...) {
  char buf[512];
  va_list ap;
  va_start(ap, f);
  std::vsnprintf(buf, sizeof buf, f, ap);
  va_end(ap);
  return buf;
}

double rel_err(double got, double want) {
  return std::fabs(got - want) / std::fabs(want);
}

// The production measurement configuration with the fit window placed on the
// single-mode plateau: late enough that faster-decaying contaminants have
// died, early enough that both channels still sit far above the noise floor.
// Slow tails (gamma < 5) reach their plateau a little earlier.
ExperimentConfig tuned_rate_config(double gamma) {
  ExperimentConfig c;
  c.t_end = 20.0;
  c.window_lo = gamma < 5.0 ? 9.5 : 10.5;
  c.window_hi = 16.5;
  return c;
}

using RateCache = std::map<std::pair<double, int>, ExperimentReport>;

const ExperimentReport& rate_run(RateCache& cache, const Params& params,
                                 double gamma, Direction dir) {
  const auto key = std::make_pair(gamma, static_cast<int>(dir));
  auto it = cache.find(key);
  if (it == cache.end())
    it = cache
             .emplace(key, measure_convergence_rate(params, 1.0, 0.1, gamma,
                                                    dir, tuned_rate_config(
                                                             gamma)))
             .first;
  return it->second;
}

// ---------------------------------------------------------------------------
// Criteria
// ---------------------------------------------------------------------------

CriterionResult criterion_exponents() {
  CriterionResult c{1, "exponent identities", false, "", 0};
  const ExponentSet e = compute_exponents(make_params(20, 3.0));
  double worst = 0.0;
  worst = std::max(worst, rel_err(e.nu, 1.0));
  worst = std::max(worst, rel_err(e.L, std::sqrt(17.0)));
  worst = std::max(worst, rel_err(e.lambda1, (16.0 - std::sqrt(120.0)) / 2.0));
  worst = std::max(worst, rel_err(e.kappa0, 10.0 / 17.0));
  worst = std::max(worst, rel_err(kappa_of_gamma(e, 6.0), 7.0 / 17.0));
  worst = std::max(worst, rel_err(gamma_of_kappa(e, 7.0 / 17.0), 6.0));
  const ExponentSet e2 = compute_exponents(make_params(11, 7.0));
  const double l1_err = std::fabs(e2.lambda1 - 4.0);
  c.pass = worst <= 1e-10 && l1_err <= 1e-12;
  c.detail = fmt("max rel err %.1e (bound 1e-10); |lambda1(11,7)-4| = %.1e "
                 "(bound 1e-12)",
                 worst, l1_err);
  return c;
}

CriterionResult criterion_steady() {
  CriterionResult c{2, "steady-state family fidelity", false, "", 0};
  const Params P = make_params(20, 3.0);
  const ExponentSet e = compute_exponents(P);

  // exact power-law branch: closed-form derivatives, residual vs scale v^p
  double sing_res = 0.0;
  for (double r : {0.05, 0.5, 1.0, 10.0, 200.0}) {
    const double v = phi_singular(P, r);
    const double dv = phi_singular_deriv(P, r);
    const double d2v = e.nu * (e.nu + 1.0) * e.L * std::pow(r, -e.nu - 2.0);
    sing_res = std::max(sing_res, std::fabs(radial_ode_residual(P, r, v, dv,
                                                                d2v)) /
                                      std::pow(v, P.p));
  }

  // scaling family
  const RadialProfile phi1 = solve_phi(P, 1.0, 300.0);
  double scale_err = 0.0;
  for (double alpha : {0.5, 2.0}) {
    const RadialProfile phia = solve_phi(P, alpha, 100.0);
    const double s = std::pow(alpha, 0.5 * (P.p - 1.0));
    for (double r : {0.05, 0.3, 1.0, 3.0, 10.0, 40.0, 95.0}) {
      const double lhs = phia.eval(r);
      scale_err = std::max(scale_err,
                           std::fabs(lhs - alpha * phi1.eval(s * r)) / lhs);
    }
  }

  // two-term tail: leading coefficient, monotone a_alpha, scaling invariant
  const double power = 0.5 * e.lambda1 * (P.p - 1.0);
  double L_err = 0.0, inv_lo = 1e300, inv_hi = -1e300;
  bool decreasing = true;
  double prev_a = 1e300;
  for (double alpha : {0.5, 1.0, 2.0}) {
    const RadialProfile phi = solve_phi(P, alpha, 2000.0, 1e-10);
    const TailFit fit = fit_tail(phi, TailModel::two_term, 100.0, 1000.0, &e);
    L_err = std::max(L_err, rel_err(fit.leading_coefficient, e.L));
    if (fit.coefficient >= prev_a) decreasing = false;
    prev_a = fit.coefficient;
    const double inv = fit.coefficient * std::pow(alpha, power);
    inv_lo = std::min(inv_lo, inv);
    inv_hi = std::max(inv_hi, inv);
  }
  const double inv_spread = inv_hi / inv_lo - 1.0;

  c.pass = sing_res <= 1e-12 && scale_err <= 1e-6 && L_err <= 5e-3 &&
           decreasing && inv_spread <= 1e-2;
  c.detail = fmt("power-law residual %.1e (1e-12); scaling err %.1e (1e-6); "
                 "L err %.2f%% (0.5%%); a decreasing %s; invariant spread "
                 "%.2f%% (1%%)",
                 sing_res, scale_err, 100 * L_err, decreasing ? "yes" : "NO",
                 100 * inv_spread);
  return c;
}

CriterionResult criterion_modes() {
  CriterionResult c{3, "decaying-mode positivity and tail exponent", false,
                    "", 0};
  const Params P = make_params(20, 3.0);
  const ExponentSet e = compute_exponents(P);
  bool positive = true;
  double worst_gamma_err = 0.0;
  std::string cases;
  for (double frac : {0.1, 0.3, 0.5}) {
    const double kappa = frac * e.kappa0;
    const LinearizedProfile lp = solve_f(P, 1.0, kappa, 1e4);
    double fmin = 1e300;
    for (double v : lp.base.values) fmin = std::min(fmin, v);
    if (!(fmin > 0.0)) positive = false;
    const TailFit fit =
        fit_tail(lp.base, TailModel::single_power, 100.0, 1e4);
    const double g_err = rel_err(fit.exponent, lp.gamma);
    worst_gamma_err = std::max(worst_gamma_err, g_err);
    cases += fmt("%sk=%.1f k0: exp %.4f vs %.4f", cases.empty() ? "" : "; ",
                 frac, fit.exponent, lp.gamma);
  }
  c.pass = positive && worst_gamma_err <= 0.02;
  c.detail = fmt("positive %s; worst tail-exponent err %.2f%% (2%%) [%s]",
                 positive ? "yes" : "NO", 100 * worst_gamma_err,
                 cases.c_str());
  return c;
}

CriterionResult criterion_corner() {
  CriterionResult c{4, "corner barrier: elliptic sign and nonincreasing flow",
                    false, "", 0};
  const Params P = make_params(20, 3.0);
  const double kappa = 7.0 / 17.0;
  const CornerConstruction corner = find_corner_barrier(P, 1.0, kappa);
  const EllipticReport er = certify_elliptic(corner);

  SolverConfig cfg;
  cfg.R = 600.0;
  cfg.nodes = 6401;
  cfg.stretch = 0.25;  // resolve the eps-scale conical core
  cfg.boundary = BoundaryRule::pin_to_initial;
  for (int i = 0; i <= 10; ++i) cfg.snapshot_times.push_back(1.0 * i);
  const EvolutionTrace tr = evolve(cfg, P, corner.profile, 10.0);

  double worst_inc = -1e300;
  if (tr.status == TraceStatus::completed && tr.snapshots.size() == 11) {
    for (std::size_t s = 1; s < tr.snapshots.size(); ++s)
      for (std::size_t i = 0; i < tr.snapshots[s].size(); ++i)
        worst_inc = std::max(worst_inc, tr.snapshots[s].values[i] -
                                            tr.snapshots[s - 1].values[i]);
  }
  const bool flow_ok = tr.status == TraceStatus::completed &&
                       tr.snapshots.size() == 11 && worst_inc <= 1e-12;
  c.pass = er.pass && flow_ok;
  c.detail = fmt("A=%.4g eps=%.4g r_corner=%.4g; elliptic max residual %.1e "
                 "(1e-10) jump %s; flow max nodewise increase %.1e (1e-12) "
                 "over t<=10 [%s]",
                 corner.A, corner.eps, corner.r_corner, er.max_residual,
                 er.jump_sign_ok ? "ok" : "BAD", worst_inc,
                 to_string(tr.status));
  return c;
}

CriterionResult criterion_sign_suite() {
  CriterionResult c{5, "separated sub/supersolution sign suite", false, "",
                    0};
  const Params P = make_params(20, 3.0);
  const double kappa = 7.0 / 17.0;

  std::vector<double> rg;
  {
    const double l0 = std::log10(1e-2), l1 = std::log10(300.0);
    const int n = static_cast<int>(std::ceil((l1 - l0) * 120)) + 1;
    for (int i = 0; i < n; ++i)
      rg.push_back(std::pow(10.0, l0 + (l1 - l0) * i / (n - 1)));
    rg.back() = 300.0;
    rg.insert(rg.begin(), 0.0);
  }
  std::vector<double> tg;
  for (int i = 0; i <= 20; ++i) tg.push_back(0.5 * i);

  const auto ansatz = [&](AnsatzKind kind, double beta, double A) {
    SeparatedAnsatz a;
    a.kind = kind;
    a.alpha = 1.0;
    a.beta = beta;
    a.kappa = kappa;
    a.A = A;
    return a;
  };

  // added mode below the steady state: exact cancellation
  const ParabolicReport plus =
      certify_parabolic(P, ansatz(AnsatzKind::sub_plus, 1.0, 0.1), tg, rg);
  const bool plus_ok = plus.pass && plus.hypotheses_met &&
                       std::fabs(plus.extremal_residual) <= 1e-10;

  // subtracted mode clipped at zero
  const ParabolicReport maxed =
      certify_parabolic(P, ansatz(AnsatzKind::sub_max, 1.0, 2.0), tg, rg);
  const bool max_ok = maxed.pass && maxed.hypotheses_met;

  // subtracted mode above, smallness caps active
  const ParabolicReport minus =
      certify_parabolic(P, ansatz(AnsatzKind::super_minus, 0.5, 0.3), tg, rg);
  const bool minus_ok = minus.pass && minus.hypotheses_met && minus.super;

  // capped supersolution located by the prescribed search, amplitude seeded
  // from an actual from-above run
  RadialProfile v0 = make_initial_data(P, 1.0, DataKind::above, 0.1, 6.0, 0.0);
  SolverConfig cfg;
  cfg.R = 100.0;
  cfg.nodes = 2401;
  for (int i = 0; i <= 10; ++i) cfg.snapshot_times.push_back(0.5 * i);
  const EvolutionTrace tr = evolve(cfg, P, v0, 5.0);
  SeparatedAnsatz probe = ansatz(AnsatzKind::super_min, 2.1, 1.0);
  const AnsatzProfiles prof = solve_ansatz_profiles(P, probe, 700.0);
  const double A_env = mode_envelope(tr, prof.phi_alpha, prof.mode);
  const SeparatedAnsatz found =
      search_min_supersolution(P, 1.0, kappa, A_env, 0.0, tg, rg);
  const ParabolicReport capped = certify_parabolic(P, found, tg, rg);
  const bool capped_ok = capped.pass && capped.hypotheses_met && capped.super;

  c.pass = plus_ok && max_ok && minus_ok && capped_ok;
  c.detail = fmt("added-mode res %.1e (1e-10)%s; clipped %s; small-cap %s; "
                 "searched cutoff alpha'=%.4g A=%.3g %s",
                 plus.extremal_residual, plus_ok ? "" : " BAD",
                 max_ok ? "ok" : "BAD", minus_ok ? "ok" : "BAD",
                 found.alpha_prime, found.A, capped_ok ? "ok" : "BAD");
  return c;
}

CriterionResult criterion_rates(RateCache& cache) {
  CriterionResult c{6, "sharp convergence-rate reproduction", false, "", 0};
  const Params P = make_params(20, 3.0);
  bool all_pass = true;
  std::string cases;
  for (double gamma : {6.0, 4.5}) {
    for (Direction dir : {Direction::above, Direction::below}) {
      const ExperimentReport& r = rate_run(cache, P, gamma, dir);
      if (r.verdict != Verdict::PASS) all_pass = false;
      cases += fmt("%sg=%.1f %s: %.4f/%.4f r2=%.6f %s",
                   cases.empty() ? "" : " | ", gamma, to_string(dir),
                   r.center_channel.rate, r.predicted_rate,
                   r.center_channel.r_squared, to_string(r.verdict));
    }
  }

  // stability of the quoted fit under a halved step and a doubled box
  const ExperimentReport& base = rate_run(cache, P, 6.0, Direction::above);
  ExperimentConfig half = tuned_rate_config(6.0);
  half.solver.dt_init = half.solver.dt_max = 0.01;
  const ExperimentReport rh =
      measure_convergence_rate(P, 1.0, 0.1, 6.0, Direction::above, half);
  const double dt_shift =
      std::fabs(rh.center_channel.rate / base.center_channel.rate - 1.0);

  ExperimentConfig wide = tuned_rate_config(6.0);
  wide.solver.R = 1600.0;
  wide.solver.nodes = 8040;  // keeps the near-field spacing of the base grid
  const ExperimentReport rw =
      measure_convergence_rate(P, 1.0, 0.1, 6.0, Direction::above, wide);
  const double R_shift =
      std::fabs(rw.center_channel.rate / base.center_channel.rate - 1.0);

  c.pass = all_pass && dt_shift < 0.01 && R_shift < 0.02;
  c.detail = fmt("%s | dt/2 shift %.3f%% (<1%%) | 2R shift %.3f%% (<2%%)",
                 cases.c_str(), 100 * dt_shift, 100 * R_shift);
  return c;
}

CriterionResult criterion_monotone(RateCache& cache) {
  CriterionResult c{7, "rate monotonicity across tail weights", false, "", 0};
  const Params P = make_params(20, 3.0);
  bool increasing = true;
  double prev = -1e300;
  std::string cases;
  for (double gamma : {4.0, 5.0, 6.0, 7.0}) {
    const ExperimentReport& r = rate_run(cache, P, gamma, Direction::below);
    if (r.center_channel.rate <= prev) increasing = false;
    prev = r.center_channel.rate;
    cases += fmt("%sg=%.0f: %.4f", cases.empty() ? "" : ", ", gamma,
                 r.center_channel.rate);
  }
  c.pass = increasing;
  c.detail = fmt("fitted rates %s -> strictly increasing %s", cases.c_str(),
                 increasing ? "yes" : "NO");
  return c;
}

CriterionResult criterion_instability() {
  CriterionResult c{8, "instability dichotomy at the oscillatory exponent",
                    false, "", 0};
  const Params Q = make_params(20, 1.4);
  SolverConfig s;
  s.R = 100.0;
  s.nodes = 12000;  // the crossing-data kink needs this to seed cleanly

  const InstabilityReport above =
      run_instability(Q, 1.0, 0.05, Direction::above, s, 50.0);
  const InstabilityReport below =
      run_instability(Q, 1.0, 0.05, Direction::below, s, 50.0);

  c.pass = above.pass && below.pass;
  c.detail = fmt("above: factor %.3f (need >= 2 by t=50, crossed %s) "
                 "monotone %s; below: factor %.3f (need <= 0.5, crossed %s) "
                 "monotone %s",
                 above.factor, above.t_factor2 >= 0.0 ? "yes" : "no",
                 above.monotone ? "yes" : "NO", below.factor,
                 below.t_factor2 >= 0.0 ? "yes" : "no",
                 below.monotone ? "yes" : "NO");
  if (!c.pass)
    c.detail += " -- departure from the steady state is monotone on both "
                "sides but needs roughly t in [58, 63] to double or halve "
                "(grid refinement converges the t=50 factors to ~1.42 and "
                "~0.73, short of the targets); no rate is claimed for this "
                "regime";
  return c;
}

CriterionResult criterion_tail_bounds() {
  CriterionResult c{9, "tail gap and weighted-mode bounds", false, "", 0};
  const Params P = make_params(20, 3.0);
  const double kappa = 7.0 / 17.0;

  const TailGapResult gap =
      power_gap_lower_bound(P, 1.0, 2.0, 1.0, kappa, 1.0, 1.0);
  const bool gap_ok = gap.found && gap.c_fit > 0.0 && std::isfinite(gap.r0);

  const WeightBoundResult w = mode_weight_bound(P, 1.0, 1.0, kappa, 1e4);
  const WeightBoundResult w2 = mode_weight_bound(P, 1.0, 1.0, kappa, 2e4);
  const bool weight_ok = std::isfinite(w.C_fit) && w.arg_r < 0.5 * w.r_max &&
                         rel_err(w2.arg_r, w.arg_r) <= 0.01;

  c.pass = gap_ok && weight_ok;
  c.detail = fmt("gap c_fit=%.4g at r0=%.4g %s; weight C_fit=%.4g argmax "
                 "r=%.4g stable under 2x span %s",
                 gap.c_fit, gap.r0, gap_ok ? "ok" : "BAD", w.C_fit, w.arg_r,
                 weight_ok ? "ok" : "BAD");
  return c;
}

CriterionResult criterion_transform() {
  CriterionResult c{10, "time-change transform consistency", false, "", 0};
  const Params P = make_params(20, 3.0);
  const double T = 2.0;
  EvolutionTrace tr;
  tr.params = P;
  tr.alpha = 1.0;
  // horizon 10: beyond t ~ 12 the original time sits within a few ulps of T
  // and no double can carry enough of tau to invert back to t at 1e-12
  for (int i = 0; i <= 20; ++i) {
    tr.times.push_back(0.5 * i);
    tr.center_values.push_back(1.0);  // frozen at the steady centre value
    tr.sup_deviation.push_back(0.0);
  }
  const OriginalVariablesTrace ov = to_original_variables(tr, P.m, T);
  const double q = 1.0 - P.m;
  double sep_err = 0.0, rt_err = 0.0;
  for (std::size_t k = 0; k < ov.tau.size(); ++k) {
    const double expected = std::pow(q * (T - ov.tau[k]), 1.0 / q);
    sep_err = std::max(sep_err,
                       std::fabs(ov.center_u[k] - expected) / expected);
    rt_err = std::max(rt_err, std::fabs(rescaled_time(ov.tau[k], P.m, T) -
                                        tr.times[k]));
  }
  c.pass = sep_err < 1e-10 && rt_err <= 1e-12;
  c.detail = fmt("separable-form rel err %.1e (1e-10); time round trip %.1e "
                 "(1e-12)",
                 sep_err, rt_err);
  return c;
}

}  // namespace

std::vector<CriterionResult> run_acceptance_battery(std::ostream& out) {
  using clk = std::chrono::steady_clock;
  RateCache cache;
  const std::vector<std::function<CriterionResult()>> criteria = {
      [] { return criterion_exponents(); },
      [] { return criterion_steady(); },
      [] { return criterion_modes(); },
      [] { return criterion_corner(); },
      [] { return criterion_sign_suite(); },
      [&cache] { return criterion_rates(cache); },
      [&cache] { return criterion_monotone(cache); },
      [] { return criterion_instability(); },
      [] { return criterion_tail_bounds(); },
      [] { return criterion_transform(); },
  };

  std::vector<CriterionResult> results;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const auto t0 = clk::now();
    CriterionResult r;
    try {
      r = criteria[i]();
    } catch (const std::exception& e) {
      r.id = static_cast<int>(i) + 1;
      r.name = "criterion aborted";
      r.pass = false;
      r.detail = std::string("exception: ") + e.what();
    }
    r.seconds = std::chrono::duration<double>(clk::now() - t0).count();
    out << fmt("[%2d/10] %s %-52s %7.1f s | %s\n", r.id,
               r.pass ? "PASS" : "FAIL", r.name.c_str(), r.seconds,
               r.detail.c_str());
    out.flush();
    results.push_back(std::move(r));
  }
  return results;
}

int acceptance_main(std::ostream& out) {
  const std::vector<CriterionResult> results = run_acceptance_battery(out);
  int passed = 0;
  for (const CriterionResult& r : results) passed += r.pass ? 1 : 0;
  out << passed << "/" << results.size() << " criteria passed\n";
  out.flush();
  return passed == static_cast<int>(results.size()) ? 0 : 1;
}

}  // namespace fdlab
