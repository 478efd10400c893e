#include "fdlab/linearized.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>
#include <vector>

#include "fdlab/detail/quintic.hpp"
#include "fdlab/rk.hpp"
#include "fdlab/steady.hpp"

namespace fdlab {

namespace {

// Signed substitution residuals at the s-interval midpoints, shared between
// solver certification (theta = 0) and substitution_check. Node second and
// third s-derivatives come from the ODE itself, with the potential
// W = c phi^{p-1} and its log-derivative interpolated from the steady
// profile. The residual of the transformed equation divided by r^theta
// equals the untransformed residual identically; evaluating the transformed
// coefficients explicitly makes this an algebra check, not a tautology.
std::vector<long double> mode_residuals(const RadialProfile& f,
                                        const RadialProfile& phi, long double c,
                                        int n, long double p,
                                        long double theta) {
  const auto& r = f.grid;
  const auto& v = f.values;
  const auto& dv = f.has_derivs() ? f.derivs : f.slopes;
  std::vector<long double> out;
  out.reserve(r.size());
  const long double th = theta;
  for (std::size_t i = 0; i + 1 < r.size(); ++i) {
    if (r[i] == 0.0) continue;
    const long double s0 = std::log((long double)r[i]);
    const long double s1 = std::log((long double)r[i + 1]);
    const long double h = s1 - s0;
    long double q[2], fss[2], fsss[2], fv[2];
    for (int k = 0; k < 2; ++k) {
      const std::size_t j = i + k;
      const long double rj = r[j];
      const long double ph = phi.eval(r[j]);
      const long double dph = phi.eval_deriv(r[j]);
      const long double w = c * std::pow(ph, p - 1.0L);
      const long double rwp = c * (p - 1.0L) * std::pow(ph, p - 2.0L) * rj * dph;
      fv[k] = v[j];
      q[k] = rj * (long double)dv[j];
      fss[k] = -(n - 2) * q[k] - rj * rj * w * fv[k];
      fsss[k] = -(n - 2) * fss[k] -
                rj * rj * ((2.0L * w + rwp) * fv[k] + w * q[k]);
    }
    const detail::Mid V = detail::quintic_midpoint(h, fv[0], q[0], fss[0],
                                                   fv[1], q[1], fss[1]);
    const detail::Mid Q = detail::quintic_midpoint(h, q[0], fss[0], fsss[0],
                                                   q[1], fss[1], fsss[1]);
    const long double rm = std::exp(0.5L * (s0 + s1));
    const long double wm = c * std::pow((long double)phi.eval((double)rm), p - 1.0L);
    // h = e^{theta s} f: second = e^{-theta s} h_ss, first = e^{-theta s} h_s
    const long double second = Q.dq + 2.0L * th * Q.q + th * th * V.q;
    const long double first = Q.q + th * V.q;
    const long double res =
        (second + (n - 2 - 2.0L * th) * first + th * (th + 2.0L - n) * V.q) /
            (rm * rm) +
        wm * V.q;
    out.push_back(res);
  }
  return out;
}

long double max_abs(const std::vector<long double>& xs) {
  long double worst = 0.0L;
  for (long double x : xs) worst = std::max(worst, std::fabs(x));
  return worst;
}

}  // namespace

LinearizedProfile solve_f(const Params& params, double alpha, double kappa,
                          double r_max, double tol) {
  if (!(alpha > 0.0) || !std::isfinite(alpha))
    throw std::invalid_argument("solve_f: need alpha > 0");
  if (!(r_max > 1.0)) throw std::invalid_argument("solve_f: need r_max > 1");
  if (!(tol >= 1e-12 && tol <= 1e-6))
    throw std::invalid_argument("solve_f: tol outside [1e-12, 1e-6]");
  const ExponentSet e = compute_exponents(params);
  if (!e.rates_defined) {
    std::ostringstream os;
    os << "solve_f: no admissible decay-rate window at n = " << params.n
       << ", p = " << params.p << " (kappa_0 <= 0 or complex tail exponents)";
    throw std::invalid_argument(os.str());
  }
  if (!(kappa > 0.0) || !(kappa < e.kappa0)) {
    std::ostringstream os;
    os.precision(17);
    os << "solve_f: kappa = " << kappa << " outside (0, kappa_0); kappa_0 = "
       << e.kappa0 << " at n = " << params.n << ", p = " << params.p;
    throw std::invalid_argument(os.str());
  }
  const double gamma = gamma_of_kappa(e, kappa);
  const int n = params.n;
  const double p = params.p;
  const double c = (kappa + 1.0) * p;
  const double apm1 = std::pow(alpha, p - 1.0);
  const double scale = c * apm1;

  // The potential comes from a separately certified steady solve; its
  // interpolation error (cubic Hermite on the same node density) sits well
  // below the defect target, and the defect below is measured against the
  // interpolated potential, so the budgets stay decoupled.
  const RadialProfile phi = solve_phi(params, alpha, r_max,
                                      std::max(1e-12, 0.01 * tol));

  const double r0 = 1e-3;
  const double r_first = 1e-2;
  int npd = 400;
  for (int attempt = 0; attempt < 4; ++attempt, npd *= 2) {
    const double decades = std::log10(r_max / r0);
    const std::size_t m = static_cast<std::size_t>(std::ceil(decades * npd));
    std::vector<double> rg(m + 1), sn(m + 1);
    for (std::size_t j = 0; j <= m; ++j) {
      rg[j] = r0 * std::pow(10.0, decades * static_cast<double>(j) / m);
      sn[j] = std::log(rg[j]);
    }
    rg[m] = r_max;
    sn[m] = std::log(r_max);
    std::size_t j0 = 0;
    while (j0 < m && rg[j0] < r_first) ++j0;

    auto rhs = [&](double s, const State<2>& y) -> State<2> {
      const double r = std::min(std::exp(s), phi.r_max());
      const double ph = phi.eval(r);
      const double w = c * std::pow(ph > 0.0 ? ph : 0.0, p - 1.0);
      return {y[1], -(n - 2) * y[1] - r * r * w * y[0]};
    };
    // two-term Taylor startup at r0
    State<2> y{1.0 - c * apm1 * r0 * r0 / (2.0 * n), -c * apm1 * r0 * r0 / n};

    RkOptions opt;
    if (tol < 1e-9) opt.rel_tol = std::max(1e-13, 0.01 * tol);
    // Tail values span twenty-plus orders of magnitude, so error control must
    // stay relative; the absolute floor only guards exact zeros.
    opt.abs_tol = 1e-30;
    opt.h_init = sn[1] - sn[0];

    std::vector<double> vals(m + 1), dvs(m + 1);
    bool positive = true;
    integrate_at_nodes<2>(rhs, sn, y, opt, [&](std::size_t j, const State<2>& yy) {
      if (!(yy[0] > 0.0)) {
        positive = false;
        return false;
      }
      vals[j] = yy[0];
      dvs[j] = yy[1] / rg[j];
      return true;
    });
    if (!positive)
      throw std::runtime_error(
          "solve_f: mode profile lost positivity below the admissible cap; "
          "decaying modes stay positive there, so this indicates an "
          "integrator or regime failure");

    const std::size_t kept = m + 1 - j0;
    std::vector<double> grid(kept + 1), values(kept + 1), derivs(kept + 1);
    grid[0] = 0.0;
    values[0] = 1.0;
    derivs[0] = 0.0;
    for (std::size_t j = j0; j <= m; ++j) {
      grid[j - j0 + 1] = rg[j];
      values[j - j0 + 1] = vals[j];
      derivs[j - j0 + 1] = dvs[j];
    }
    ProfileMeta meta;
    meta.kind = ProfileKind::linearized;
    meta.params = params;
    meta.alpha = alpha;
    meta.kappa = kappa;
    RadialProfile base =
        make_profile(std::move(grid), std::move(values), std::move(derivs), meta);
    if (max_abs(mode_residuals(base, phi, c, n, p, 0.0L)) <= tol * scale) {
      LinearizedProfile out;
      out.base = std::move(base);
      out.steady = phi;
      out.alpha = alpha;
      out.kappa = kappa;
      out.gamma = gamma;
      bool first_node = true;
      for (std::size_t i = 0; i < out.base.size(); ++i) {
        const double r = out.base.grid[i];
        if (!(r > 1.0)) continue;
        const double t = out.base.values[i] * std::pow(r, gamma);
        if (first_node || t < out.bound_lower) out.bound_lower = t;
        if (first_node || t > out.bound_upper) out.bound_upper = t;
        first_node = false;
      }
      return out;
    }
  }
  throw std::runtime_error(
      "solve_f: residual target unreachable after grid refinement");
}

std::vector<double> substitution_residuals(const LinearizedProfile& profile,
                                           double theta) {
  if (!(theta >= 0.0) || !std::isfinite(theta))
    throw std::invalid_argument("substitution_residuals: need theta >= 0");
  // c formed in double exactly as in solve_f, so theta = 0 reproduces the
  // certified defect bit-for-bit
  const double c = (profile.kappa + 1.0) * profile.base.meta.params.p;
  const auto rs = mode_residuals(profile.base, profile.steady, c,
                                 profile.base.meta.params.n,
                                 profile.base.meta.params.p, theta);
  return std::vector<double>(rs.begin(), rs.end());
}

double substitution_check(const LinearizedProfile& profile, double theta) {
  double worst = 0.0;
  for (double x : substitution_residuals(profile, theta))
    worst = std::max(worst, std::fabs(x));
  return worst;
}

double tail_indicial_value(const ExponentSet& e, double kappa, double theta) {
  if (!std::isfinite(e.pl_pm1))
    throw std::invalid_argument(
        "tail_indicial_value: parameters admit no singular power-law tail");
  return theta * (theta + 2.0 - e.n) + (kappa + 1.0) * e.pl_pm1;
}

}  // namespace fdlab
