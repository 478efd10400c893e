#pragma once

// Embedded Cash-Karp 5(4) integration with PI-free step control, specialised
// to the small systems used here. Steps are clamped so every requested output
// node is hit exactly; the observer sees the state at each node and can stop
// the run early.

#include <array>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

namespace fdlab {

template <std::size_t N>
using State = std::array<double, N>;

struct RkOptions {
  double rel_tol = 1e-10;
  double abs_tol = 1e-12;
  double h_init = 1e-3;
  double h_min = 1e-13;
  std::size_t max_steps = 20'000'000;
};

namespace rk_detail {
// Cash-Karp tableau
constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 3.0 / 5, c5 = 1.0, c6 = 7.0 / 8;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 3.0 / 10, a42 = -9.0 / 10, a43 = 6.0 / 5;
constexpr double a51 = -11.0 / 54, a52 = 5.0 / 2, a53 = -70.0 / 27, a54 = 35.0 / 27;
constexpr double a61 = 1631.0 / 55296, a62 = 175.0 / 512, a63 = 575.0 / 13824,
                 a64 = 44275.0 / 110592, a65 = 253.0 / 4096;
constexpr double b1 = 37.0 / 378, b3 = 250.0 / 621, b4 = 125.0 / 594, b6 = 512.0 / 1771;
constexpr double d1 = b1 - 2825.0 / 27648, d3 = b3 - 18575.0 / 48384,
                 d4 = b4 - 13525.0 / 55296, d5 = -277.0 / 14336, d6 = b6 - 1.0 / 4;
}  // namespace rk_detail

// One trial step from (s, y) of size h. Returns the 5th-order solution and the
// max component of the scaled 5th-vs-4th error estimate.
template <std::size_t N, class Rhs>
double ck_step(Rhs&& rhs, double s, const State<N>& y, double h, State<N>& out,
               double rel_tol, double abs_tol) {
  using namespace rk_detail;
  State<N> k1 = rhs(s, y), t{};
  for (std::size_t i = 0; i < N; ++i) t[i] = y[i] + h * a21 * k1[i];
  State<N> k2 = rhs(s + c2 * h, t);
  for (std::size_t i = 0; i < N; ++i) t[i] = y[i] + h * (a31 * k1[i] + a32 * k2[i]);
  State<N> k3 = rhs(s + c3 * h, t);
  for (std::size_t i = 0; i < N; ++i)
    t[i] = y[i] + h * (a41 * k1[i] + a42 * k2[i] + a43 * k3[i]);
  State<N> k4 = rhs(s + c4 * h, t);
  for (std::size_t i = 0; i < N; ++i)
    t[i] = y[i] + h * (a51 * k1[i] + a52 * k2[i] + a53 * k3[i] + a54 * k4[i]);
  State<N> k5 = rhs(s + c5 * h, t);
  for (std::size_t i = 0; i < N; ++i)
    t[i] = y[i] +
           h * (a61 * k1[i] + a62 * k2[i] + a63 * k3[i] + a64 * k4[i] + a65 * k5[i]);
  State<N> k6 = rhs(s + c6 * h, t);

  double err = 0.0;
  for (std::size_t i = 0; i < N; ++i) {
    out[i] = y[i] + h * (b1 * k1[i] + b3 * k3[i] + b4 * k4[i] + b6 * k6[i]);
    const double e =
        h * (d1 * k1[i] + d3 * k3[i] + d4 * k4[i] + d5 * k5[i] + d6 * k6[i]);
    const double scale = abs_tol + rel_tol * std::max(std::fabs(y[i]), std::fabs(out[i]));
    err = std::max(err, std::fabs(e) / scale);
  }
  return err;
}

// Integrate along ascending nodes[0..] starting from y at nodes[0]. emit is
// called at every node including the first; returning false stops the run.
// Returns the index one past the last node reached.
template <std::size_t N, class Rhs, class Emit>
std::size_t integrate_at_nodes(Rhs&& rhs, const std::vector<double>& nodes, State<N> y,
                               const RkOptions& opt, Emit&& emit) {
  if (nodes.size() < 2) throw std::invalid_argument("integrate_at_nodes: need 2+ nodes");
  if (!emit(std::size_t{0}, y)) return 1;
  double h = opt.h_init;
  std::size_t steps = 0;
  for (std::size_t j = 1; j < nodes.size(); ++j) {
    double s = nodes[j - 1];
    const double s_end = nodes[j];
    while (s < s_end) {
      h = std::min(h, s_end - s);
      State<N> ynew;
      const double err = ck_step(rhs, s, y, h, ynew, opt.rel_tol, opt.abs_tol);
      if (++steps > opt.max_steps)
        throw std::runtime_error("integrate_at_nodes: step budget exhausted");
      if (err <= 1.0) {
        s += h;
        y = ynew;
        const double grow = err > 0.0 ? 0.9 * std::pow(err, -0.2) : 5.0;
        h *= std::min(5.0, std::max(0.3, grow));
      } else {
        h *= std::max(0.2, 0.9 * std::pow(err, -0.25));
        if (h < opt.h_min)
          throw std::runtime_error("integrate_at_nodes: step size underflow");
      }
    }
    if (!emit(j, y)) return j + 1;
  }
  return nodes.size();
}

}  // namespace fdlab
