#ifndef SPECSEP_SUPPORT_ANALYZER_HPP_
#define SPECSEP_SUPPORT_ANALYZER_HPP_

#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <vector>

#include "specsep/spectrum_model.hpp"
#include "specsep/stieltjes_solver.hpp"

namespace specsep {

/// A real solution (g, s, x) of the companion system parametrized by g,
/// with the analytic derivatives along the branch.
struct RealBranch {
  double g = 0.0;
  double s = 0.0;
  double x = 0.0;
  double dx_dg = 0.0;
  double ds_dg = 0.0;
};

/// Open interval (a, b) outside the support of the LSD. b may be +inf.
/// g_a and g_b are the co-transform values at the endpoints: g_b = 0 for the
/// unbounded gap, g_a = -inf for the gap (0, b) below the bulk.
struct SpectralGap {
  double a = 0.0;
  double b = std::numeric_limits<double>::infinity();
  double g_a = 0.0;
  double g_b = 0.0;
  double y = 1.0;

  bool unbounded() const { return std::isinf(b); }
  double width() const { return b - a; }
  bool contains(double x) const { return a < x && x < b; }
};

/// Parameter sweep for find_gaps: n_grid log-spaced points on each of
/// [g_lo, -g_min] and [g_min, g_hi].
struct GapSearch {
  double g_lo = -1e4;
  double g_hi = 1e4;
  double g_min = 1e-6;
  int n_grid = 4000;
};

/// Real s solving y g^2 \int u dH/(1 + u g + t s) + s - g = 0 on the branch
/// that starts at s = g when the integral term is switched off; the term is
/// switched on continuously and the root is tracked while its slope in s
/// stays positive. Throws BracketError when the branch folds (no real root).
double solve_s_given_g(double g, const ModelConfig &cfg);

/// Full real branch point at g: s from solve_s_given_g, x from the second
/// companion equation, and dx/dg = 1/g^2 - y A_2 - y B_2 s'.
RealBranch x_of_g(double g, const ModelConfig &cfg);

/// Gaps of the LSD support on (0, inf), ordered by a. Each maximal run of
/// the sweep with dx/dg > 0 and a constant sign of every 1 + u g + t s maps
/// to one gap; finite endpoints are refined to stationary points of x(g).
/// The gap (0, b) below the bulk is reported only when y < 1.
std::vector<SpectralGap> find_gaps(const ModelConfig &cfg,
                                   const GapSearch &search = {});

/// Branch point inside `gap` with x_of_g(g).x == x.
RealBranch branch_at(const SpectralGap &gap, double x, const ModelConfig &cfg);

/// Density of F (the LSD of the p x p matrix) on a grid.
struct DensityCurve {
  std::vector<double> grid;
  std::vector<double> f;
  std::vector<StieltjesPair> values;
  std::vector<bool> failed;
  double y = 1.0;
};

/// f(x) = Im s_(x) / (y pi), from boundary values of the companion
/// transform, evaluated as Im s(x) / pi so the companion point mass at the
/// origin does not leak into the curve at finite v_min. Points where the continuation fails get f = NaN and are
/// flagged rather than aborting the curve.
DensityCurve density(const ModelConfig &cfg, std::span<const double> grid,
                     const SolveSettings &settings = {});

/// Trapezoid integral of f over the finite points of the curve.
double trapezoid_mass(const DensityCurve &curve);

using GapSelector =
    std::function<std::optional<std::size_t>(const std::vector<SpectralGap> &)>;

/// Selects the gap containing x.
GapSelector gap_containing(double x);

/// Follows one gap across a strictly decreasing sequence of y values.
/// The gap at each step is the one containing the previous gap's midpoint
/// (for unbounded gaps: the unbounded one) whose endpoints are nearest.
/// Throws GapTrackingError when the gap is lost, or when its width fails to
/// grow as y decreases (for an unbounded gap: when a fails to decrease).
std::vector<SpectralGap> gap_vs_y(const JointSpectrum &spectrum,
                                  std::span<const double> y_values,
                                  const GapSelector &selector,
                                  const GapSearch &search = {});

}  // namespace specsep

#endif
