#pragma once

// Radial profiles on nonuniform grids: storage, monotone-cubic evaluation,
// power-law tail fitting, and sign-change counting between profiles.

#include <cstddef>
#include <vector>

#include "fdlab/exponents.hpp"

namespace fdlab {

enum class ProfileKind { steady_state, linearized, initial_data, snapshot };
const char* to_string(ProfileKind kind);

struct ProfileMeta {
  ProfileKind kind = ProfileKind::snapshot;
  Params params;
  // Whichever of these the producing operation defines; NaN otherwise.
  double alpha = std::numeric_limits<double>::quiet_NaN();
  double kappa = std::numeric_limits<double>::quiet_NaN();
  double time = std::numeric_limits<double>::quiet_NaN();
};

// Immutable after construction through make_profile. Evaluation between nodes
// is cubic Hermite on `slopes`; `slopes` equals the ODE-exact `derivs` when
// those were supplied (limited only if they would break monotonicity) and a
// Fritsch-Carlson estimate otherwise. Evaluation outside the grid throws.
struct RadialProfile {
  std::vector<double> grid;    // strictly increasing, r >= 0
  std::vector<double> values;  // finite; steady_state: positive, decreasing
  std::vector<double> derivs;  // first derivatives from the producer; may be empty
  std::vector<double> slopes;  // interpolation slopes (filled by make_profile)
  ProfileMeta meta;

  std::size_t size() const { return grid.size(); }
  bool has_derivs() const { return !derivs.empty(); }
  double r_min() const { return grid.front(); }
  double r_max() const { return grid.back(); }
  double eval(double r) const;
  double eval_deriv(double r) const;
};

// Validates the invariants, fills interpolation slopes, and returns the
// finished profile. derivs may be empty.
RadialProfile make_profile(std::vector<double> grid, std::vector<double> values,
                           std::vector<double> derivs, ProfileMeta meta);

struct TailFit {
  double exponent = 0.0;     // decay exponent of the fitted term
  double coefficient = 0.0;  // its coefficient
  double r_lo = 0.0, r_hi = 0.0;
  double max_rel_residual = 0.0;
  // two_term only: freely re-estimated coefficient of the leading power,
  // for cross-checking against the analytic L. Equals `coefficient` for
  // single_power.
  double leading_coefficient = 0.0;
};

enum class TailModel { single_power, two_term };

// single_power: least-squares slope of log(value) vs log(r) over the grid
// nodes inside [r_lo, r_hi]; exponent is the decay rate, coefficient the
// prefactor.
// two_term: fixes the leading term L r^{-nu} and fits `coefficient` = a on
// the residual L r^{-nu} - value against r^{-(nu+lambda1)}; `exponent` is
// nu + lambda1. Windows narrower than half a decade are rejected; residuals
// that go nonpositive (window too far in or out) are an error unless they
// vanish identically, in which case a = 0.
TailFit fit_tail(const RadialProfile& profile, TailModel model, double r_lo,
                 double r_hi, const ExponentSet* exponents = nullptr);

// Sign changes of a-b over the merged node set of the common radial range,
// with |a-b| <= 1e-12 points merged into their neighbours. Disjoint ranges
// return 0 with a warning on stderr.
int count_intersections(const RadialProfile& a, const RadialProfile& b);

}  // namespace fdlab
