// Independent reference computations for the unit and acceptance tests.
// Nothing here calls into the library under test.
#ifndef SPECSEP_TESTS_ORACLES_HPP_
#define SPECSEP_TESTS_ORACLES_HPP_

#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <limits>
#include <numbers>
#include <optional>
#include <utility>
#include <vector>

namespace oracle {

using cplx = std::complex<double>;

struct Atom {
  double u, t, w;
};

// Root of a z^2 + b z + c with positive imaginary part.
inline cplx upper_root(cplx a, cplx b, cplx c) {
  const cplx disc = std::sqrt(b * b - 4.0 * a * c);
  const cplx r1 = (-b + disc) / (2.0 * a);
  const cplx r2 = (-b - disc) / (2.0 * a);
  return r1.imag() > r2.imag() ? r1 : r2;
}

// Companion transform of the Marchenko-Pastur law with unit scale:
// z s^2 + (z + 1 - y) s + 1 = 0.
inline cplx mp_companion(cplx z, double y) { return upper_root(z, z + 1.0 - y, 1.0); }

// Stieltjes transform of the MP law itself: y z s^2 + (z + y - 1) s + 1 = 0.
inline cplx mp_stieltjes(cplx z, double y) {
  return upper_root(y * z, z + y - 1.0, 1.0);
}

inline double mp_lower_edge(double y) { return std::pow(1.0 - std::sqrt(y), 2); }
inline double mp_upper_edge(double y) { return std::pow(1.0 + std::sqrt(y), 2); }

inline double mp_density(double x, double y) {
  const double a = mp_lower_edge(y), b = mp_upper_edge(y);
  if (x <= a || x >= b) return 0.0;
  return std::sqrt((b - x) * (x - a)) / (2.0 * std::numbers::pi * y * x);
}

// Real MP branch: x(g) = -1/g + y/(1+g).
inline double mp_x_of_g(double g, double y) { return -1.0 / g + y / (1.0 + g); }

// CDF of the MP law by adaptive-free composite Simpson on a fine grid.
inline double mp_cdf(double x, double y) {
  const double a = mp_lower_edge(y), b = mp_upper_edge(y);
  if (x <= a) return 0.0;
  x = std::min(x, b);
  // Substitute x = a + (b - a) sin^2(theta) to remove the square-root edges.
  const double th_end = std::asin(std::sqrt((x - a) / (b - a)));
  const int n = 4000;
  const double h = th_end / n;
  double sum = 0.0;
  for (int i = 0; i <= n; ++i) {
    const double th = i * h;
    const double s = std::sin(th), c = std::cos(th);
    const double xx = a + (b - a) * s * s;
    const double jac = 2.0 * (b - a) * s * c;
    const double f = mp_density(xx, y) * jac;
    const double wgt = (i == 0 || i == n) ? 1.0 : (i % 2 ? 4.0 : 2.0);
    sum += wgt * (std::isfinite(f) ? f : 0.0);
  }
  return sum * h / 3.0;
}

// Constraint y g^2 sum w u/(1 + u g + t s) + s - g as a function of s.
inline double constraint(const std::vector<Atom> &h, double y, double g, double s) {
  double acc = 0.0;
  for (const auto &a : h) acc += a.w * a.u / (1.0 + a.u * g + a.t * s);
  return y * g * g * acc + s - g;
}

// Root of the constraint nearest to s = g, by a fine outward scan from g and
// bisection of the first sign change that is not a pole.
inline std::optional<double> scan_root(const std::vector<Atom> &h, double y, double g,
                                       double span = 50.0, int steps = 200000) {
  auto f = [&](double s) { return constraint(h, y, g, s); };
  auto is_pole = [&](double lo, double hi) {
    for (const auto &a : h) {
      if (a.u == 0.0) continue;
      const double sp = -(1.0 + a.u * g) / a.t;
      if (lo <= sp && sp <= hi) return true;
    }
    return false;
  };
  auto bisect = [&](double lo, double hi) {
    double flo = f(lo);
    for (int i = 0; i < 200; ++i) {
      const double mid = 0.5 * (lo + hi);
      const double fm = f(mid);
      if ((fm < 0) == (flo < 0)) {
        lo = mid;
        flo = fm;
      } else {
        hi = mid;
      }
    }
    return 0.5 * (lo + hi);
  };
  if (f(g) == 0.0) return g;
  const double step = span * std::max(1.0, std::abs(g)) / steps;
  for (int k = 0; k < steps; ++k) {
    for (int dir : {+1, -1}) {
      const double s0 = g + dir * k * step, s1 = g + dir * (k + 1) * step;
      const double lo = std::min(s0, s1), hi = std::max(s0, s1);
      if ((f(lo) < 0) != (f(hi) < 0) && !is_pole(lo, hi)) return bisect(lo, hi);
    }
  }
  return std::nullopt;
}

// x(g) = -1/g + y sum w t/(1 + u g + t s(g)).
inline double x_of(const std::vector<Atom> &h, double y, double g, double s) {
  double acc = 0.0;
  for (const auto &a : h) acc += a.w * a.t / (1.0 + a.u * g + a.t * s);
  return -1.0 / g + y * acc;
}

// Largest-remainder apportionment by exhaustive search over all count
// vectors: minimize the L1 deviation from w p, ties broken toward giving
// the extra seat to the earlier atom (lexicographically largest vector).
inline std::vector<int> brute_apportion(const std::vector<double> &w, int p) {
  const std::size_t k = w.size();
  std::vector<int> best, cur(k, 0);
  double best_dev = std::numeric_limits<double>::infinity();
  std::function<void(std::size_t, int)> rec = [&](std::size_t i, int left) {
    if (i + 1 == k) {
      cur[i] = left;
      double dev = 0.0;
      for (std::size_t j = 0; j < k; ++j) dev += std::abs(cur[j] - w[j] * p);
      if (dev < best_dev - 1e-12 || (std::abs(dev - best_dev) <= 1e-12 && cur > best)) {
        best_dev = dev;
        best = cur;
      }
      return;
    }
    for (int c = 0; c <= left; ++c) {
      cur[i] = c;
      rec(i + 1, left - c);
    }
  };
  rec(0, p);
  return best;
}

// Centered finite difference.
template <typename F>
double derivative(F f, double x, double h) {
  return (f(x + h) - f(x - h)) / (2.0 * h);
}

}  // namespace oracle

#endif
