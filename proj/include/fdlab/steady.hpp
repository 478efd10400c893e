#pragma once

// Positive radial steady states: outward integration of
// v'' + (n-1)/r v' + v^p = 0 from a prescribed centre value, the exact
// power-law solution, and residual measurement for profile interpolants.

#include "fdlab/exponents.hpp"
#include "fdlab/profile.hpp"

namespace fdlab {

// The exact singular steady solution L r^{-nu} and its derivative; r > 0.
double phi_singular(const Params& params, double r);
double phi_singular_deriv(const Params& params, double r);

// Pointwise steady operator v'' + (n-1)/r v' + v^p for analytic inputs.
double radial_ode_residual(const Params& params, double r, double v, double dv,
                           double d2v);

// Max |operator value| of the profile's quintic reconstruction at interval
// midpoints. Node second derivatives are taken from the ODE itself, so this
// measures the defect of the stored solution, not of a generic interpolant.
// Evaluated in long double to keep the rounding floor below 1e-12.
double max_ode_defect(const RadialProfile& profile);

// Integrate the steady ODE with v(0) = alpha, v'(0) = 0 up to r_max and
// verify max_ode_defect <= tol * alpha^p, refining the output grid until the
// target is met. Startup is a two-term Taylor step to r = 1e-3; beyond that
// the integration runs in s = ln r with state (v, r v'). Throws if the
// solution loses positivity (no decaying positive state in this regime, or
// integrator failure).
RadialProfile solve_phi(const Params& params, double alpha, double r_max,
                        double tol = 1e-8);

}  // namespace fdlab
