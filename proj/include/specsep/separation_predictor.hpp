#ifndef SPECSEP_SEPARATION_PREDICTOR_HPP_
#define SPECSEP_SEPARATION_PREDICTOR_HPP_

#include <string>
#include <string_view>
#include <vector>

#include "specsep/spectrum_model.hpp"
#include "specsep/stieltjes_solver.hpp"
#include "specsep/support_analyzer.hpp"

namespace specsep {

/// Which side of a gap the pairs with h_j < -1 are mapped to.
///
/// derivation: h_j < -1 -> eigenvalue above b, h_j > -1 -> below a. This is
///   the mapping forced by the degenerate limit h_j = -(u_j + t_j)/x.
/// theorem: the mirrored mapping (h_j < -1 -> below a).
enum class Convention { derivation, theorem };

std::string_view to_string(Convention c);
Convention convention_from_string(std::string_view name);

/// Predicted number of eigenvalues on each side of a gap.
struct SideCounts {
  int below = 0;
  int above = 0;
  friend bool operator==(const SideCounts &, const SideCounts &) = default;
};

/// Range of h_j over the sampled points for one pair.
struct PairProfile {
  EigenPair pair;
  double h_min = 0.0;
  double h_max = 0.0;
};

struct SeparationPrediction {
  SpectralGap gap;
  std::vector<double> sample_x;
  std::vector<PairProfile> profiles;
  int count_h_below = 0;  // pairs with h_j < -1 on the gap
  int count_h_above = 0;  // pairs with h_j > -1 on the gap
  Convention convention = Convention::derivation;

  /// Side counts under `c` (the prediction's own convention by default).
  SideCounts sides(Convention c) const;
  SideCounts sides() const { return sides(convention); }
};

/// Smallest continuation height used when evaluating h on a gap.
constexpr double kGapVMin = 1e-13;

/// h_j(x) = u_j g_(x) + t_j s_(x) for each pair, using the boundary value of
/// the companion pair at x (continued down to min(v_min, kGapVMin)). Throws
/// SeparationError if |Im s(x)| >= 1e-6 max(1, |s(x)|), i.e. x is not in a
/// gap.
std::vector<double> h_values(const std::vector<EigenPair> &pairs, double x,
                             const ModelConfig &cfg,
                             const SolveSettings &settings = {});

/// Upper cut used in place of +inf for unbounded gaps: a + kUnboundedSpan.
constexpr double kUnboundedSpan = 10.0;

/// Evaluates h_j at n_samples equally spaced points of [a + d, b - d],
/// d = 1e-3 (b - a), checks that every h_j + 1 keeps its sign, and counts
/// the pairs on each side of -1. Unbounded gaps use b = a + kUnboundedSpan.
/// Throws SeparationError on a sign change.
SeparationPrediction predict_counts(const SpectralGap &gap,
                                    const std::vector<EigenPair> &pairs,
                                    const ModelConfig &cfg,
                                    const SolveSettings &settings = {},
                                    int n_samples = 5,
                                    Convention convention = Convention::derivation);

}  // namespace specsep

#endif
