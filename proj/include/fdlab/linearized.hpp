#pragma once

// Separable linearized modes around a steady profile: outward integration of
// f'' + (n-1)/r f' + (kappa+1) p phi_alpha^{p-1} f = 0 with f(0) = 1, the
// two-sided power-envelope constants of the decaying solution, and residual
// checks of the radial substitution h = r^theta f.

#include <vector>

#include "fdlab/exponents.hpp"
#include "fdlab/profile.hpp"

namespace fdlab {

// A decaying mode profile together with the steady profile that supplied its
// potential (kept so residuals can be re-evaluated on the same data).
struct LinearizedProfile {
  RadialProfile base;    // f on {0} followed by log-spaced nodes
  RadialProfile steady;  // phi_alpha over the same span
  double alpha = 1.0;
  double kappa = 0.0;
  double gamma = 0.0;        // tail decay rate, gamma_of_kappa(kappa)
  double bound_lower = 0.0;  // min of f(r) r^gamma over grid nodes r > 1
  double bound_upper = 0.0;  // max of f(r) r^gamma over grid nodes r > 1
};

// Integrate the mode ODE with f(0) = 1, f'(0) = 0 up to r_max, the potential
// interpolated from an internal solve_phi run over the same span, and refine
// the output grid until the midpoint defect is <= tol * (kappa+1) p alpha^{p-1}.
// Startup mirrors solve_phi: a two-term Taylor step to r = 1e-3, then
// integration in s = ln r with state (f, r f'). Requires 0 < kappa < kappa_0;
// loss of positivity (which the decaying mode never exhibits below that cap)
// is reported as a runtime error.
LinearizedProfile solve_f(const Params& params, double alpha, double kappa,
                          double r_max, double tol = 1e-8);

// Residuals of the mode equation after the substitution h = r^theta f,
// evaluated from the profile's quintic reconstruction at the same interval
// midpoints as the solver's defect measure (centre closure excluded) and
// scaled back by r^{-theta} so magnitudes are comparable across theta.
// theta = 0 is the untransformed equation and reproduces the certified
// defect; theta < 0 is rejected.
std::vector<double> substitution_residuals(const LinearizedProfile& profile,
                                           double theta);

// Max |substitution residual| over the grid.
double substitution_check(const LinearizedProfile& profile, double theta);

// theta (theta + 2 - n) + (kappa+1) p L^{p-1}: the zero-order coefficient of
// the substituted equation when the potential is replaced by its far-field
// power law. Vanishes exactly at theta = gamma_of_kappa(kappa); its two roots
// are the tail decay rates admitted by the far-field equation.
double tail_indicial_value(const ExponentSet& e, double kappa, double theta);

}  // namespace fdlab
