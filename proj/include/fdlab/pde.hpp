#pragma once

// Implicit evolution of the rescaled radial flow (v^p)_t = v'' + (n-1)/r v'
// + v^p on [0, R]. The evolved unknown is w = v^p, which makes the time term
// linear and moves the degeneracy into a monotone spatial operator:
// w_t = lap(w^m) + w with m = 1/p. Space: 3-point stencil on a sinh-stretched
// grid (uniform in theta, r = stretch * sinh(theta)), symmetry closure
// 2n(u_1 - u_0)/r_1^2 at the centre, Dirichlet pin at r = R. Time: implicit
// Euler with damped Newton steps and an accept/reject dt controller.

#include <cstddef>
#include <vector>

#include "fdlab/exponents.hpp"
#include "fdlab/profile.hpp"

namespace fdlab {

enum class DataKind { above, below, capped_above, exact };
const char* to_string(DataKind kind);

enum class BoundaryRule { pin_to_phi_alpha, pin_to_initial };
const char* to_string(BoundaryRule rule);

enum class TraceStatus { completed, newton_failure, blowup, extinction_region };
const char* to_string(TraceStatus status);

struct SolverConfig {
  double R = 100.0;     // truncation radius, > 10
  int nodes = 2400;     // total node count including both ends
  double stretch = 4.0; // sinh scale; resolution concentrates in r < stretch
  double dt_init = 1e-5;
  double dt_max = 0.02; // effective cap is min(dt_max, 0.1): the trace must
                        // sample at least every 0.1 time units
  double newton_tol = 1e-11;  // residual norm per accepted step, <= 1e-10
  int newton_max_iter = 25;
  // Floor on w^{1-m} in the Newton preconditioner where the diffusion
  // degenerates (w -> 0). It never enters the residual, so converged states
  // are insensitive to it across decades.
  double degenerate_floor = 1e-14;
  BoundaryRule boundary = BoundaryRule::pin_to_phi_alpha;
  std::vector<double> snapshot_times;  // state captured when t reaches these
};

struct EvolutionTrace {
  // one entry per accepted step, starting with the initial state at t = 0
  std::vector<double> times;
  std::vector<double> center_values;   // v(0, t)
  std::vector<double> sup_deviation;   // sup_r |v(r,t) - reference(r)|
  std::vector<RadialProfile> snapshots;
  SolverConfig config_echo;
  TraceStatus status = TraceStatus::completed;
  Params params{};
  // deviation reference: phi_alpha when the initial data carries alpha,
  // otherwise the initial data itself (handmade profiles)
  double alpha = 0.0;
  double pinned_value = 0.0;  // boundary value of the evolved unknown w
  std::size_t steps_accepted = 0;
  std::size_t steps_rejected = 0;
};

// Initial data relative to phi_alpha with tail weight (r+1)^{-gamma}:
//   above        phi_alpha + b (r+1)^{-gamma}
//   capped_above min{ the above, L (r+eps)^{-nu} }
//   below        max{ 0, phi_alpha - b (r+1)^{-gamma} }
//   exact        phi_alpha
// gamma must lie in the admissible decay-rate window; eps in (0,1) is read
// only by capped_above, which fails with a diagnostic if the cap cuts below
// phi_alpha + (b/2)(r+1)^{-gamma} anywhere (eps too large). Kinks of the
// min/max constructions are inserted as grid nodes.
RadialProfile make_initial_data(const Params& params, double alpha,
                                DataKind kind, double b, double gamma,
                                double eps, double r_max = 400.0);

// Run the flow from v0 (resampled onto the solver grid; v0 must span [0, R]
// and be nonnegative) until t_end. Diagnostics are recorded at every accepted
// step; detectors mark the trace BLOWUP when sup v exceeds 1e6 times its
// initial value, EXTINCTION_REGION when an initially positive interior
// touches zero, and NEWTON_FAILURE when the step size collapses; in each case
// the partial trace is returned.
EvolutionTrace evolve(const SolverConfig& config, const Params& params,
                      const RadialProfile& v0, double t_end);

// Pointwise (v^p)_t - v'' - (n-1)/r v' - v^p on the profile's own grid, with
// the time term supplied by the caller on an identical grid (exact for
// separated ansatz, zero for steady candidates). v' comes from the stored
// derivatives; v'' from a 3-point difference of those, so values carry the
// interpolant's second-order error — certifications needing more accuracy
// use closed forms instead. The centre node uses the symmetry closure.
RadialProfile operator_residual(const Params& params,
                                const RadialProfile& profile,
                                const RadialProfile& time_derivative_of_p_power);

}  // namespace fdlab
