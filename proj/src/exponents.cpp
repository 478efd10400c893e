#include "fdlab/exponents.hpp"

#include <cmath>
#include <sstream>

namespace fdlab {

Params make_params(int n, double p) {
  if (n < 3) throw std::invalid_argument("make_params: need spatial dimension n >= 3");
  if (!(p > 1.0)) throw std::invalid_argument("make_params: need exponent p > 1");
  Params params;
  params.n = n;
  params.p = p;
  params.m = 1.0 / p;
  return params;
}

ExponentSet compute_exponents(const Params& params) {
  const int n = params.n;
  const double p = params.p;

  ExponentSet e;
  e.n = n;
  e.p = p;
  e.p_sobolev = detail::p_sobolev_of<double>(n);
  e.p_jl_finite = (n > 10);
  e.p_joseph_lundgren =
      e.p_jl_finite ? detail::p_joseph_lundgren_of<double>(n)
                    : std::numeric_limits<double>::quiet_NaN();
  e.nu = detail::nu_of(p);
  e.singular_exists = (e.nu < static_cast<double>(n - 2));
  if (e.singular_exists) {
    e.L = detail::big_l_of<double>(n, p);
    e.pl_pm1 = detail::pl_pm1_of<double>(n, p);
    e.lambda1 = detail::lambda1_of<double>(n, p);
    e.kappa0 = detail::kappa0_of<double>(n, p);
  } else {
    e.L = std::numeric_limits<double>::quiet_NaN();
    e.pl_pm1 = std::numeric_limits<double>::quiet_NaN();
    e.lambda1 = std::numeric_limits<double>::quiet_NaN();
    e.kappa0 = std::numeric_limits<double>::quiet_NaN();
  }
  e.rates_defined = std::isfinite(e.lambda1) && e.kappa0 > 0.0;
  if (e.rates_defined) {
    e.gamma_lo = e.nu + e.lambda1;
    e.gamma_hi = 0.5 * static_cast<double>(n - 2);
  } else {
    e.gamma_lo = std::numeric_limits<double>::quiet_NaN();
    e.gamma_hi = std::numeric_limits<double>::quiet_NaN();
  }
  return e;
}

namespace {

[[noreturn]] void throw_window(const char* fn, const ExponentSet& e, double x,
                               const char* what) {
  std::ostringstream os;
  os.precision(17);
  os << fn << ": " << what << " (got " << x << ", admissible window ("
     << e.gamma_lo << ", " << e.gamma_hi << ") for n=" << e.n << ", p=" << e.p
     << ")";
  throw std::domain_error(os.str());
}

}  // namespace

double kappa_of_gamma(const ExponentSet& e, double gamma, bool include_endpoints) {
  if (!e.rates_defined)
    throw std::domain_error("kappa_of_gamma: decay-rate window undefined at these parameters");
  // Endpoint membership is decided exactly; the open window is the default.
  const bool inside = include_endpoints
                          ? (gamma >= e.gamma_lo && gamma <= e.gamma_hi)
                          : (gamma > e.gamma_lo && gamma < e.gamma_hi);
  if (!inside)
    throw_window("kappa_of_gamma", e, gamma,
                 include_endpoints ? "gamma outside closed admissible window"
                                   : "gamma outside open admissible window");
  const double n2 = static_cast<double>(e.n - 2);
  return gamma * (n2 - gamma) / e.pl_pm1 - 1.0;
}

double gamma_of_kappa(const ExponentSet& e, double kappa) {
  if (!e.rates_defined)
    throw std::domain_error("gamma_of_kappa: decay-rate window undefined at these parameters");
  if (!(kappa >= 0.0) || !(kappa < e.kappa0)) {
    std::ostringstream os;
    os.precision(17);
    os << "gamma_of_kappa: kappa outside [0, kappa0) (got " << kappa
       << ", kappa0 = " << e.kappa0 << ")";
    throw std::domain_error(os.str());
  }
  // Smaller root of gamma^2 - (n-2) gamma + (kappa+1) p L^{p-1} = 0, written
  // with the complement-root trick so it stays accurate near kappa0.
  const double n2 = static_cast<double>(e.n - 2);
  const double c = (kappa + 1.0) * e.pl_pm1;
  const double disc = n2 * n2 - 4.0 * c;
  const double root = std::sqrt(disc > 0.0 ? disc : 0.0);
  return 2.0 * c / (n2 + root);
}

Regime classify_regime(const Params& params) {
  const int n = params.n;
  const double p = params.p;
  const double ps = detail::p_sobolev_of<double>(n);
  if (p <= ps) return Regime::NO_GROUND_STATES;
  if (n <= 10) return Regime::INTERSECTING;
  const double pc = detail::p_joseph_lundgren_of<double>(n);
  if (p < pc) return Regime::INTERSECTING;
  return Regime::ORDERED;
}

const char* to_string(Regime regime) {
  switch (regime) {
    case Regime::NO_GROUND_STATES: return "NO_GROUND_STATES";
    case Regime::INTERSECTING: return "INTERSECTING";
    case Regime::ORDERED: return "ORDERED";
  }
  return "UNKNOWN";
}

}  // namespace fdlab
