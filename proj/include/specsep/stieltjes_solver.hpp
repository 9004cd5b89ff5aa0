#ifndef SPECSEP_STIELTJES_SOLVER_HPP_
#define SPECSEP_STIELTJES_SOLVER_HPP_

#include <complex>

#include "specsep/resolvent.hpp"
#include "specsep/spectrum_model.hpp"

namespace specsep {

using cplx = std::complex<double>;

/// Companion transform s_(z) (Stieltjes transform of the n x n companion
/// matrix LSD) with its co-transform g_(z), at the point z.
struct StieltjesPair {
  cplx s_under;
  cplx g_under;
  cplx z;
};

/// Non-companion pair (s, g): s is the Stieltjes transform of F itself.
struct DirectPair {
  cplx s;
  cplx g;
};

struct SolveSettings {
  double tol = 1e-10;
  int max_iter = 10000;
  double damping = 0.5;
  /// Imaginary part where real-axis continuation starts.
  double v_start = 1.0;
  /// Imaginary part where real-axis continuation stops.
  double v_min = 1e-8;
};

/// Validates the settings; throws InvalidModel.
SolveSettings checked(SolveSettings settings);

/// Absolute residuals of the two equations.
struct Residual {
  double first = 0.0;
  double second = 0.0;
  double max() const { return first > second ? first : second; }
};

/// Residuals |z - RHS_1|, |z - RHS_2| of the companion system
///   z = -(1-y)/s_ - (y/s_) \int dH / (1 + u g_ + t s_)
///   z = -1/g_ + y \int t dH / (1 + u g_ + t s_).
Residual residual_713(const StieltjesPair &pair, const ModelConfig &cfg);

/// Residuals |s - RHS_1|, |g - RHS_2| of the non-companion system
///   s = \int dH / (u/(1+yg) - (1 + y s t) z + t(1-y)),
///   g = \int t dH / (same).
Residual residual_712(cplx s, cplx g, cplx z, const ModelConfig &cfg);

/// |y g_^2 \int u dH / (1 + u g_ + t s_) + s_ - g_|, the constraint obtained
/// by equating the two companion equations.
double constraint_residual(const StieltjesPair &pair, const ModelConfig &cfg);

StieltjesPair to_companion(cplx s, cplx g, cplx z, double y);
DirectPair from_companion(const StieltjesPair &pair, double y);

/// Unique solution with Im s_ > 0 and Im g_ > 0 at Im z > 0.
///
/// Damped alternating fixed point started at s_ = g_ = -1/z, with Newton
/// polishing once the iterate is in the basin. If the direct attempt fails
/// the solution is continued down from a larger imaginary part.
StieltjesPair solve_at(cplx z, const ModelConfig &cfg,
                       const SolveSettings &settings = {});

/// Same as solve_at but warm-started from `start`; does not fall back to
/// continuation. Used for marching along a path in C+.
StieltjesPair solve_from(cplx z, const StieltjesPair &start,
                         const ModelConfig &cfg, const SolveSettings &settings);

/// Limit of solve_at(x + iv) as v -> 0, by halving v from v_start down to
/// v_min with warm starts. The returned pair lives at z = x + i v_min.
StieltjesPair boundary_value(double x, const ModelConfig &cfg,
                             const SolveSettings &settings = {});

}  // namespace specsep

#endif
