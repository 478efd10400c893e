#include "fdlab/profile.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <sstream>
#include <stdexcept>

namespace fdlab {

const char* to_string(ProfileKind kind) {
  switch (kind) {
    case ProfileKind::steady_state: return "steady_state";
    case ProfileKind::linearized: return "linearized";
    case ProfileKind::initial_data: return "initial_data";
    case ProfileKind::snapshot: return "snapshot";
  }
  return "unknown";
}

namespace {

// Fritsch-Carlson slopes: shape-preserving weighted harmonic means in the
// interior, clamped three-point formulas at the ends.
std::vector<double> monotone_slopes(const std::vector<double>& x,
                                    const std::vector<double>& y) {
  const std::size_t n = x.size();
  std::vector<double> s(n, 0.0);
  if (n == 2) {
    s[0] = s[1] = (y[1] - y[0]) / (x[1] - x[0]);
    return s;
  }
  std::vector<double> h(n - 1), d(n - 1);
  for (std::size_t i = 0; i + 1 < n; ++i) {
    h[i] = x[i + 1] - x[i];
    d[i] = (y[i + 1] - y[i]) / h[i];
  }
  for (std::size_t i = 1; i + 1 < n; ++i) {
    if (d[i - 1] == 0.0 || d[i] == 0.0 || (d[i - 1] > 0.0) != (d[i] > 0.0)) {
      s[i] = 0.0;
    } else {
      const double w1 = 2.0 * h[i] + h[i - 1];
      const double w2 = h[i] + 2.0 * h[i - 1];
      s[i] = (w1 + w2) / (w1 / d[i - 1] + w2 / d[i]);
    }
  }
  auto end_slope = [](double h0, double h1, double d0, double d1) {
    double s0 = ((2.0 * h0 + h1) * d0 - h0 * d1) / (h0 + h1);
    if (s0 * d0 <= 0.0) return 0.0;
    if (d0 * d1 < 0.0 && std::fabs(s0) > 3.0 * std::fabs(d0)) return 3.0 * d0;
    return s0;
  };
  s[0] = end_slope(h[0], h[1], d[0], d[1]);
  s[n - 1] = end_slope(h[n - 2], h[n - 3], d[n - 2], d[n - 3]);
  return s;
}

// Keep supplied derivatives unless they would break shape preservation on a
// monotone interval; then pull them back to the Fritsch-Carlson limit.
void limit_slopes(const std::vector<double>& x, const std::vector<double>& y,
                  std::vector<double>& s) {
  for (std::size_t i = 0; i + 1 < x.size(); ++i) {
    const double d = (y[i + 1] - y[i]) / (x[i + 1] - x[i]);
    if (d == 0.0) continue;
    for (std::size_t j : {i, i + 1}) {
      const double ratio = s[j] / d;
      if (ratio < 0.0)
        s[j] = 0.0;
      else if (ratio > 3.0)
        s[j] = 3.0 * d;
    }
  }
}

std::size_t locate(const std::vector<double>& grid, double r) {
  if (!(r >= grid.front() && r <= grid.back())) {
    std::ostringstream os;
    os.precision(17);
    os << "profile evaluation outside grid: r = " << r << " not in ["
       << grid.front() << ", " << grid.back() << "]";
    throw std::out_of_range(os.str());
  }
  auto it = std::upper_bound(grid.begin(), grid.end(), r);
  std::size_t i = static_cast<std::size_t>(it - grid.begin());
  if (i > 0) --i;
  if (i + 1 >= grid.size()) i = grid.size() - 2;
  return i;
}

}  // namespace

double RadialProfile::eval(double r) const {
  const std::size_t i = locate(grid, r);
  const double h = grid[i + 1] - grid[i];
  const double t = (r - grid[i]) / h;
  const double t2 = t * t, t3 = t2 * t;
  const double h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
  const double h10 = t3 - 2.0 * t2 + t;
  const double h01 = -2.0 * t3 + 3.0 * t2;
  const double h11 = t3 - t2;
  return h00 * values[i] + h * h10 * slopes[i] + h01 * values[i + 1] +
         h * h11 * slopes[i + 1];
}

double RadialProfile::eval_deriv(double r) const {
  const std::size_t i = locate(grid, r);
  const double h = grid[i + 1] - grid[i];
  const double t = (r - grid[i]) / h;
  const double t2 = t * t;
  const double dh00 = (6.0 * t2 - 6.0 * t) / h;
  const double dh10 = 3.0 * t2 - 4.0 * t + 1.0;
  const double dh01 = (-6.0 * t2 + 6.0 * t) / h;
  const double dh11 = 3.0 * t2 - 2.0 * t;
  return dh00 * values[i] + dh10 * slopes[i] + dh01 * values[i + 1] +
         dh11 * slopes[i + 1];
}

RadialProfile make_profile(std::vector<double> grid, std::vector<double> values,
                           std::vector<double> derivs, ProfileMeta meta) {
  if (grid.size() < 2) throw std::invalid_argument("profile needs at least 2 nodes");
  if (values.size() != grid.size())
    throw std::invalid_argument("profile: values/grid length mismatch");
  if (!derivs.empty() && derivs.size() != grid.size())
    throw std::invalid_argument("profile: derivs/grid length mismatch");
  if (grid.front() < 0.0) throw std::invalid_argument("profile: negative radius");
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (i + 1 < grid.size() && !(grid[i] < grid[i + 1]))
      throw std::invalid_argument("profile: grid not strictly increasing");
    if (!std::isfinite(values[i]))
      throw std::invalid_argument("profile: non-finite value");
    if (!derivs.empty() && !std::isfinite(derivs[i]))
      throw std::invalid_argument("profile: non-finite derivative");
  }
  if (meta.kind == ProfileKind::steady_state) {
    for (std::size_t i = 0; i < values.size(); ++i) {
      if (!(values[i] > 0.0))
        throw std::invalid_argument("steady profile: value not strictly positive");
      if (i + 1 < values.size() && !(values[i] > values[i + 1]))
        throw std::invalid_argument("steady profile: values not strictly decreasing");
    }
  }

  RadialProfile p;
  p.grid = std::move(grid);
  p.values = std::move(values);
  p.derivs = std::move(derivs);
  p.meta = meta;
  if (p.has_derivs()) {
    p.slopes = p.derivs;
    limit_slopes(p.grid, p.values, p.slopes);
  } else {
    p.slopes = monotone_slopes(p.grid, p.values);
  }
  return p;
}

TailFit fit_tail(const RadialProfile& profile, TailModel model, double r_lo,
                 double r_hi, const ExponentSet* exponents) {
  if (!(r_lo < r_hi)) throw std::invalid_argument("fit_tail: empty window");
  if (r_lo < profile.r_min() || r_hi > profile.r_max())
    throw std::invalid_argument("fit_tail: window not contained in profile grid");
  if (r_hi < r_lo * std::sqrt(10.0))
    throw std::invalid_argument("fit_tail: window narrower than half a decade");

  std::vector<std::size_t> idx;
  for (std::size_t i = 0; i < profile.size(); ++i)
    if (profile.grid[i] >= r_lo && profile.grid[i] <= r_hi) idx.push_back(i);
  if (idx.size() < 8)
    throw std::invalid_argument("fit_tail: fewer than 8 grid nodes in window");

  TailFit fit;
  fit.r_lo = r_lo;
  fit.r_hi = r_hi;

  if (model == TailModel::single_power) {
    // ordinary least squares on log(value) vs log(r)
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i : idx) {
      if (!(profile.values[i] > 0.0))
        throw std::runtime_error("fit_tail: nonpositive value in log fit window");
      const double x = std::log(profile.grid[i]);
      const double y = std::log(profile.values[i]);
      sx += x; sy += y; sxx += x * x; sxy += x * y;
    }
    const double nn = static_cast<double>(idx.size());
    const double slope = (nn * sxy - sx * sy) / (nn * sxx - sx * sx);
    const double intercept = (sy - slope * sx) / nn;
    fit.exponent = -slope;
    fit.coefficient = std::exp(intercept);
    fit.leading_coefficient = fit.coefficient;
    double worst = 0.0;
    for (std::size_t i : idx) {
      const double pred = fit.coefficient * std::pow(profile.grid[i], slope);
      worst = std::max(worst, std::fabs(profile.values[i] - pred) / pred);
    }
    fit.max_rel_residual = worst;
    return fit;
  }

  // two_term
  if (exponents == nullptr)
    throw std::invalid_argument("fit_tail: two_term needs the exponent set");
  if (!exponents->rates_defined)
    throw std::domain_error("fit_tail: two_term undefined without a real lambda1");
  const double nu = exponents->nu;
  const double L = exponents->L;
  const double sub = nu + exponents->lambda1;

  // residual of the known leading power, and the subleading basis
  std::vector<double> rho(idx.size()), basis(idx.size()), lead(idx.size());
  double scale = 0.0;
  for (std::size_t k = 0; k < idx.size(); ++k) {
    const double r = profile.grid[idx[k]];
    lead[k] = L * std::pow(r, -nu);
    rho[k] = lead[k] - profile.values[idx[k]];
    basis[k] = std::pow(r, -sub);
    scale = std::max(scale, std::fabs(rho[k]) / lead[k]);
  }

  fit.exponent = sub;
  if (scale <= 1e-12) {
    // residual at rounding level: the subleading term is absent
    fit.coefficient = 0.0;
    fit.max_rel_residual = 0.0;
    fit.leading_coefficient = L;
    return fit;
  }
  for (std::size_t k = 0; k < idx.size(); ++k)
    if (!(rho[k] > 0.0))
      throw std::runtime_error(
          "fit_tail: nonpositive residual against the leading power; "
          "window too far in or out");

  double sbb = 0, sbr = 0;
  for (std::size_t k = 0; k < idx.size(); ++k) {
    sbb += basis[k] * basis[k];
    sbr += basis[k] * rho[k];
  }
  fit.coefficient = sbr / sbb;
  double worst = 0.0;
  for (std::size_t k = 0; k < idx.size(); ++k) {
    const double pred = fit.coefficient * basis[k];
    worst = std::max(worst, std::fabs(rho[k] - pred) / pred);
  }
  fit.max_rel_residual = worst;

  // free re-estimate of the leading coefficient: unweighted LS on
  // value = c1 r^{-nu} + c2 r^{-sub}
  double saa = 0, sab = 0, sav = 0, sbv = 0, sbb2 = 0;
  for (std::size_t k = 0; k < idx.size(); ++k) {
    const double a = lead[k] / L;  // r^{-nu}
    const double b = basis[k];
    const double v = profile.values[idx[k]];
    saa += a * a; sab += a * b; sav += a * v;
    sbb2 += b * b; sbv += b * v;
  }
  const double det = saa * sbb2 - sab * sab;
  fit.leading_coefficient = (sav * sbb2 - sab * sbv) / det;
  return fit;
}

int count_intersections(const RadialProfile& a, const RadialProfile& b) {
  const double lo = std::max(a.r_min(), b.r_min());
  const double hi = std::min(a.r_max(), b.r_max());
  if (!(lo < hi)) {
    std::cerr << "count_intersections: profiles have disjoint radial ranges\n";
    return 0;
  }
  std::vector<double> xs;
  for (double r : a.grid)
    if (r >= lo && r <= hi) xs.push_back(r);
  for (double r : b.grid)
    if (r >= lo && r <= hi) xs.push_back(r);
  std::sort(xs.begin(), xs.end());
  xs.erase(std::unique(xs.begin(), xs.end()), xs.end());

  int changes = 0;
  int prev_sign = 0;
  for (double r : xs) {
    const double d = a.eval(r) - b.eval(r);
    if (std::fabs(d) <= 1e-12) continue;  // merged into neighbours
    const int sign = d > 0.0 ? 1 : -1;
    if (prev_sign != 0 && sign != prev_sign) ++changes;
    prev_sign = sign;
  }
  return changes;
}

}  // namespace fdlab
