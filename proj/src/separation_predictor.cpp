#include "specsep/separation_predictor.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <sstream>
#include <stdexcept>
#include <utility>

namespace specsep {

std::string_view to_string(Convention c) {
  return c == Convention::derivation ? "derivation" : "theorem";
}

Convention convention_from_string(std::string_view name) {
  if (name == "derivation") return Convention::derivation;
  if (name == "theorem") return Convention::theorem;
  throw std::invalid_argument("unknown convention '" + std::string(name) +
                              "' (expected derivation or theorem)");
}

SideCounts SeparationPrediction::sides(Convention c) const {
  if (c == Convention::derivation) return {count_h_above, count_h_below};
  return {count_h_below, count_h_above};
}

std::vector<double> h_values(const std::vector<EigenPair> &pairs, double x,
                             const ModelConfig &cfg,
                             const SolveSettings &settings) {
  // Near a band edge Im s decays only like v / d^2 in the distance d to the
  // edge, so the continuation is run further down than for densities.
  SolveSettings deep = settings;
  deep.v_min = std::min(settings.v_min, kGapVMin);
  const StieltjesPair v = boundary_value(x, cfg, deep);
  // The companion transform carries a point mass 1 - y at the origin, which
  // leaks O(v / x^2) into Im s_ near zero; test the non-companion transform.
  const cplx s = from_companion(v, cfg.y).s;
  if (!(std::abs(s.imag()) < 1e-6 * std::max(1.0, std::abs(s)))) {
    std::ostringstream msg;
    msg << "x = " << x << " is not in a gap (Im s = " << s.imag() << ")";
    throw SeparationError(msg.str());
  }
  std::vector<double> h;
  h.reserve(pairs.size());
  for (const auto &p : pairs) {
    h.push_back(p.u * v.g_under.real() + p.t * v.s_under.real());
  }
  return h;
}

SeparationPrediction predict_counts(const SpectralGap &gap,
                                    const std::vector<EigenPair> &pairs,
                                    const ModelConfig &cfg,
                                    const SolveSettings &settings,
                                    int n_samples, Convention convention) {
  if (n_samples < 3) {
    throw std::invalid_argument("predict_counts needs n_samples >= 3");
  }
  const double b = gap.unbounded() ? gap.a + kUnboundedSpan : gap.b;
  const double inset = 1e-3 * (b - gap.a);
  const double lo = gap.a + inset, hi = b - inset;

  SeparationPrediction out;
  out.gap = gap;
  out.convention = convention;
  for (int k = 0; k < n_samples; ++k) {
    out.sample_x.push_back(lo + (hi - lo) * k / (n_samples - 1));
  }

  // h depends on the pair only through (u, t): evaluate distinct pairs once.
  std::map<std::pair<double, double>, std::size_t> index;
  std::vector<EigenPair> distinct;
  for (const auto &p : pairs) {
    if (index.emplace(std::make_pair(p.u, p.t), distinct.size()).second) {
      distinct.push_back(p);
    }
  }
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> h_min(distinct.size(), inf), h_max(distinct.size(), -inf);
  for (double x : out.sample_x) {
    const auto h = h_values(distinct, x, cfg, settings);
    for (std::size_t j = 0; j < h.size(); ++j) {
      h_min[j] = std::min(h_min[j], h[j]);
      h_max[j] = std::max(h_max[j], h[j]);
    }
  }
  for (std::size_t j = 0; j < distinct.size(); ++j) {
    if (h_min[j] <= -1.0 && h_max[j] >= -1.0) {
      std::ostringstream msg;
      msg << "h_j + 1 changes sign on (" << lo << ", " << hi
          << ") for pair (u = " << distinct[j].u << ", t = " << distinct[j].t
          << "): h in [" << h_min[j] << ", " << h_max[j] << "]";
      throw SeparationError(msg.str());
    }
  }

  out.profiles.reserve(pairs.size());
  for (const auto &p : pairs) {
    const std::size_t j = index.at({p.u, p.t});
    out.profiles.push_back({p, h_min[j], h_max[j]});
    (h_max[j] < -1.0 ? out.count_h_below : out.count_h_above) += 1;
  }
  return out;
}

}  // namespace specsep
