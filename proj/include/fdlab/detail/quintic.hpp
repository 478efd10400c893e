#pragma once

namespace fdlab::detail {

// Quintic Hermite reconstruction evaluated at the interval midpoint, long
// double throughout. Inputs are (f, f', f'') at both ends in the integration
// variable x on [0, h]; returns (value, first, second) at x = h/2. Anchoring
// on derivative data keeps the rounding floor near machine level; the leading
// truncation term of the derivative interpolant has a root at the midpoint,
// so defect measures built on it gain an order there.
struct Mid {
  long double q, dq, d2q;
};

inline Mid quintic_midpoint(long double h, long double f0, long double df0,
                            long double d2f0, long double f1, long double df1,
                            long double d2f1) {
  const long double c0 = f0;
  const long double c1 = h * df0;
  const long double c2 = h * h * d2f0 / 2.0L;
  const long double A = f1 - (c0 + c1 + c2);
  const long double B = h * df1 - (c1 + 2.0L * c2);
  const long double C = h * h * d2f1 - 2.0L * c2;
  const long double c5 = 6.0L * A - 3.0L * B + 0.5L * C;
  const long double c4 = B - 3.0L * A - 2.0L * c5;
  const long double c3 = A - c4 - c5;
  Mid m;
  m.q = c0 + 0.5L * c1 + 0.25L * c2 + 0.125L * c3 + 0.0625L * c4 + 0.03125L * c5;
  m.dq = (c1 + c2 + 0.75L * c3 + 0.5L * c4 + 0.3125L * c5) / h;
  m.d2q = (2.0L * c2 + 3.0L * c3 + 3.0L * c4 + 2.5L * c5) / (h * h);
  return m;
}

}  // namespace fdlab::detail
