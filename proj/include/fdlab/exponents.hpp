#pragma once

// Parameter algebra for the radial fast-diffusion study: critical exponents,
// the coefficient of the singular steady profile, and the two-way map between
// spatial tail decay and temporal convergence rate.  Everything here is
// closed-form; the templated core exists so tests can cross-check the double
// results in long double.

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace fdlab {

struct Params {
  int n = 0;       // spatial dimension of the radial reduction, n >= 3
  double p = 0.0;  // nonlinearity exponent, p > 1
  double m = 0.0;  // diffusion exponent of the original equation, m = 1/p
};

// Validates and packs (n, p); m is derived.
Params make_params(int n, double p);

namespace detail {

template <class T>
T nu_of(T p) {
  return T(2) / (p - T(1));
}

template <class T>
T big_l_of(int n, T p) {
  const T nu = nu_of(p);
  return std::pow(nu * (T(n - 2) - nu), T(1) / (p - T(1)));
}

// p L^{p-1} without the pow round trip: p*nu = nu + 2 identically.
template <class T>
T pl_pm1_of(int n, T p) {
  const T nu = nu_of(p);
  return (nu + T(2)) * (T(n - 2) - nu);
}

// Smaller root of lambda^2 - X lambda + 2 Y = 0 with X = n-2-2nu and
// Y = n-2-nu, rationalized so it stays accurate when the discriminant is
// small.  NaN when the roots are complex.
template <class T>
T lambda1_of(int n, T p) {
  const T nu = nu_of(p);
  const T X = T(n - 2) - T(2) * nu;
  const T Y = T(n - 2) - nu;
  const T disc = X * X - T(8) * Y;
  if (!(disc >= T(0)) || !(X > T(0))) return std::numeric_limits<T>::quiet_NaN();
  return T(4) * Y / (X + std::sqrt(disc));
}

template <class T>
T kappa0_of(int n, T p) {
  const T n2 = T(n - 2);
  return n2 * n2 / (T(4) * pl_pm1_of(n, p)) - T(1);
}

template <class T>
T p_sobolev_of(int n) {
  return T(n + 2) / T(n - 2);
}

// Finite only for n > 10; callers gate on that before dividing by n - 10.
template <class T>
T p_joseph_lundgren_of(int n) {
  const T n2 = T(n - 2);
  return (n2 * n2 - T(4 * n) + T(8) * std::sqrt(T(n - 1))) / (n2 * T(n - 10));
}

}  // namespace detail

struct ExponentSet {
  int n = 0;
  double p = 0.0;
  double p_sobolev = 0.0;        // (n+2)/(n-2)
  bool p_jl_finite = false;      // the ordering threshold is finite only for n > 10
  double p_joseph_lundgren = 0.0;  // meaningful only when p_jl_finite
  bool singular_exists = false;  // nu < n-2, i.e. L r^{-nu} is defined
  double nu = 0.0;
  double L = 0.0;           // coefficient of the singular steady profile
  double pl_pm1 = 0.0;      // p L^{p-1}, the linearized potential strength
  double lambda1 = 0.0;     // secondary tail exponent; NaN unless rates_defined
  double kappa0 = 0.0;      // supremum of attainable decay rates
  bool rates_defined = false;  // lambda1 real and kappa0 > 0
  double gamma_lo = 0.0;    // admissible spatial-decay window (gamma_lo, gamma_hi)
  double gamma_hi = 0.0;
};

ExponentSet compute_exponents(const Params& params);

// kappa(gamma) = gamma (n-2-gamma) / (p L^{p-1}) - 1. The window is open by
// default; include_endpoints admits gamma_lo (kappa = 0) and gamma_hi (kappa0)
// for diagnostics.
double kappa_of_gamma(const ExponentSet& e, double gamma, bool include_endpoints = false);

// Inverse of kappa_of_gamma on [0, kappa0): the smaller root of
// gamma(gamma - (n-2)) + (kappa+1) p L^{p-1} = 0.
double gamma_of_kappa(const ExponentSet& e, double kappa);

// How steady profiles with different centre values relate to one another.
enum class Regime {
  NO_GROUND_STATES,  // p <= p_sobolev: no positive bounded radial steady state
  INTERSECTING,      // profiles cross each other and the singular one
  ORDERED,           // p >= p_joseph_lundgren: profiles strictly ordered
};

Regime classify_regime(const Params& params);
const char* to_string(Regime regime);

}  // namespace fdlab
