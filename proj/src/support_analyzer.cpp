#include "specsep/support_analyzer.hpp"

#include <algorithm>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "specsep/resolvent.hpp"

namespace specsep {
namespace {

constexpr double kRootTol = 1e-12;

// Value and slope in s of  s - g + lambda * y g^2 \int u dH / (1 + u g + t s).
struct ConstraintEval {
  bool ok = false;
  double value = 0.0;
  double slope = 0.0;
  double integral = 0.0;
};

class SGivenG {
 public:
  SGivenG(double g, const ModelConfig &cfg)
      : g_(g), c_(cfg.y * g * g), h_(cfg.spectrum) {
    mask_ = h_.u() > 0.0;
  }

  ConstraintEval eval(double s, double lambda) const {
    const Eigen::ArrayXd d = atom_denominators(h_, g_, s);
    ConstraintEval e;
    if ((mask_ && d.abs() < kPoleThreshold).any()) return e;
    const Eigen::ArrayXd wu = h_.w() * h_.u();
    e.integral = (wu / d).sum();
    e.value = s - g_ + lambda * c_ * e.integral;
    e.slope = 1.0 - lambda * c_ * (wu * h_.t() / d.square()).sum();
    e.ok = std::isfinite(e.value) && std::isfinite(e.slope);
    return e;
  }

  // Signs of 1 + u g + t s over the atoms with u > 0.
  Eigen::ArrayXi signs(double s) const {
    const Eigen::ArrayXd d = atom_denominators(h_, g_, s);
    return mask_.select((d > 0.0).cast<int>() * 2 - 1, Eigen::ArrayXi::Zero(d.size()));
  }

  double scale(double s) const {
    return std::max({1.0, std::abs(g_), std::abs(s)});
  }

 private:
  double g_;
  double c_;
  const JointSpectrum &h_;
  Eigen::Array<bool, Eigen::Dynamic, 1> mask_;
};

// Newton at fixed lambda; succeeds only on a positive-slope root with the
// same pole pattern as the start of the branch.
std::optional<double> newton_at(const SGivenG &f, double s, double lambda,
                                const Eigen::ArrayXi &signs) {
  for (int k = 0; k < 40; ++k) {
    const auto e = f.eval(s, lambda);
    if (!e.ok || !(e.slope > 0.0)) return std::nullopt;
    const double step = e.value / e.slope;
    s -= step;
    if (!std::isfinite(s)) return std::nullopt;
    if (std::abs(step) <= 1e-15 * f.scale(s)) break;
  }
  const auto e = f.eval(s, lambda);
  if (!e.ok || !(e.slope > 0.0) || (f.signs(s) != signs).any()) {
    return std::nullopt;
  }
  if (std::abs(e.value) > 1e-10 * f.scale(s)) return std::nullopt;
  return s;
}

// Bracket the root near s within the same pole cell, bisect, then take one
// secant step from the final bracket.
double polish(const SGivenG &f, double s, const Eigen::ArrayXi &signs) {
  double h = 1e-13 * f.scale(s);
  for (int k = 0; k < 40; ++k, h *= 4.0) {
    const double lo = s - h, hi = s + h;
    const auto el = f.eval(lo, 1.0), eh = f.eval(hi, 1.0);
    if (!el.ok || !eh.ok || (f.signs(lo) != signs).any() ||
        (f.signs(hi) != signs).any()) {
      break;
    }
    if (el.value < 0.0 && eh.value > 0.0) {
      double a = lo, b = hi, fa = el.value, fb = eh.value;
      for (int i = 0; i < 200 && b - a > kRootTol * f.scale(s) * 1e-4; ++i) {
        const double m = 0.5 * (a + b);
        if (m <= a || m >= b) break;
        const double fm = f.eval(m, 1.0).value;
        if (fm == 0.0) return m;
        if (fm < 0.0) {
          a = m;
          fa = fm;
        } else {
          b = m;
          fb = fm;
        }
      }
      const double secant = a - fa * (b - a) / (fb - fa);
      return (secant >= a && secant <= b) ? secant : 0.5 * (a + b);
    }
    if (el.value == 0.0) return lo;
    if (eh.value == 0.0) return hi;
  }
  return s;
}

struct Sample {
  bool valid = false;
  RealBranch branch;
  Eigen::ArrayXi signs;
  bool in_gap() const { return valid && branch.dx_dg > 0.0; }
};

Sample sample_at(double g, const ModelConfig &cfg) {
  Sample out;
  try {
    out.branch = x_of_g(g, cfg);
    const Eigen::ArrayXd d = atom_denominators(cfg.spectrum, g, out.branch.s);
    out.signs = (d > 0.0).cast<int>() * 2 - 1;
    out.valid = std::isfinite(out.branch.x) && std::isfinite(out.branch.dx_dg);
  } catch (const Error &) {
    out.valid = false;
  }
  return out;
}

bool same_cell(const Sample &a, const Sample &b) {
  return a.in_gap() && b.in_gap() && (a.signs == b.signs).all();
}

// Shrinks [inside, outside] onto the edge of the run containing `inside`.
Sample refine_edge(double inside_g, double outside_g, const Sample &inside,
                   const ModelConfig &cfg) {
  Sample best = inside;
  double in = inside_g, out = outside_g;
  for (int k = 0; k < 200; ++k) {
    const double mid = 0.5 * (in + out);
    if (mid == in || mid == out) break;
    Sample s = sample_at(mid, cfg);
    if (same_cell(s, inside)) {
      in = mid;
      best = s;
    } else {
      out = mid;
    }
  }
  // A support edge is a stationary point of x(g); anything else means the
  // run ended on a fold or pole the grid did not resolve.
  const double g = best.branch.g;
  if (std::abs(best.branch.dx_dg) > 1e-6 / (g * g)) {
    std::ostringstream msg;
    msg << "gap endpoint at g = " << g << " is not stationary (dx/dg = "
        << best.branch.dx_dg << "); try a larger n_grid";
    throw GridTooCoarse(msg.str());
  }
  return best;
}

std::vector<double> log_grid(double from, double to, int n) {
  std::vector<double> out(static_cast<std::size_t>(n));
  const double la = std::log(from), lb = std::log(to);
  for (int i = 0; i < n; ++i) {
    out[static_cast<std::size_t>(i)] =
        std::exp(la + (lb - la) * static_cast<double>(i) / (n - 1));
  }
  return out;
}

// Value of g in [g_in, g_out] (x increasing in g) where x_of_g crosses 0.
double zero_crossing(double g_neg, double g_pos, const ModelConfig &cfg) {
  for (int k = 0; k < 200; ++k) {
    const double mid = 0.5 * (g_neg + g_pos);
    if (mid == g_neg || mid == g_pos) break;
    const double x = x_of_g(mid, cfg).x;
    (x < 0.0 ? g_neg : g_pos) = mid;
  }
  return g_pos;
}

void sweep_side(const std::vector<double> &grid, bool negative_side,
                const ModelConfig &cfg, std::vector<SpectralGap> &gaps) {
  const std::size_t n = grid.size();
  std::vector<Sample> samples(n);
  for (std::size_t i = 0; i < n; ++i) samples[i] = sample_at(grid[i], cfg);

  const double inf = std::numeric_limits<double>::infinity();
  std::size_t i = 0;
  while (i < n) {
    if (!samples[i].in_gap()) {
      ++i;
      continue;
    }
    std::size_t j = i;
    while (j + 1 < n && same_cell(samples[j + 1], samples[i])) ++j;

    const bool open_left = (i == 0);
    const bool open_right = (j == n - 1);
    SpectralGap gap;
    gap.y = cfg.y;

    if (open_left) {
      gap.a = negative_side ? 0.0 : -inf;
      gap.g_a = negative_side ? -inf : 0.0;
    } else {
      const Sample edge = refine_edge(grid[i], grid[i - 1], samples[i], cfg);
      gap.a = edge.branch.x;
      gap.g_a = edge.branch.g;
    }
    if (open_right) {
      if (negative_side) {
        gap.b = inf;
        gap.g_b = 0.0;
      } else {
        // g -> +inf; the branch only reaches x -> 0 there.
        gap.b = samples[j].branch.x;
        gap.g_b = inf;
      }
    } else {
      const Sample edge = refine_edge(grid[j], grid[j + 1], samples[j], cfg);
      gap.b = edge.branch.x;
      gap.g_b = edge.branch.g;
    }

    const bool below_bulk = gap.a <= 0.0;
    if (gap.b > 0.0 && !(below_bulk && cfg.y >= 1.0)) {
      if (gap.a < 0.0) {
        gap.g_a = zero_crossing(grid[i], gap.g_b, cfg);
        gap.a = 0.0;
      }
      if (open_right && !negative_side) {
        std::ostringstream msg;
        msg << "positive-g branch still in a gap at g = " << grid[j]
            << " (x = " << gap.b << "); widen g_hi";
        throw GridTooCoarse(msg.str());
      }
      gaps.push_back(gap);
    }
    i = j + 1;
  }
}

}  // namespace

double solve_s_given_g(double g, const ModelConfig &cfg) {
  if (g == 0.0) throw std::invalid_argument("solve_s_given_g needs g != 0");
  if (cfg.spectrum.pure_noise()) return g;

  const SGivenG f(g, cfg);
  if (!f.eval(g, 0.0).ok) {
    throw BracketError("branch starts on a pole at g = " + std::to_string(g));
  }
  const Eigen::ArrayXi signs = f.signs(g);

  double s = g, lambda = 0.0, step = 0.125;
  while (lambda < 1.0) {
    const double target = std::min(1.0, lambda + step);
    const auto here = f.eval(s, lambda);
    const double rate = -(cfg.y * g * g * here.integral) / here.slope;
    const auto next = newton_at(f, s + (target - lambda) * rate, target, signs);
    if (next) {
      s = *next;
      lambda = target;
      step = std::min(2.0 * step, 0.25);
    } else {
      step *= 0.5;
      if (step < 1e-10) {
        std::ostringstream msg;
        msg << "no real root on the physical branch at g = " << g
            << " (branch folds at lambda = " << lambda << ")";
        throw BracketError(msg.str());
      }
    }
  }
  s = polish(f, s, signs);
  const auto e = f.eval(s, 1.0);
  if (!e.ok || std::abs(e.value) > kRootTol * f.scale(s)) {
    std::ostringstream msg;
    msg << "root of the s constraint not resolved at g = " << g
        << " (residual " << e.value << ")";
    throw BracketError(msg.str());
  }
  return s;
}

RealBranch x_of_g(double g, const ModelConfig &cfg) {
  const double s = solve_s_given_g(g, cfg);
  const auto r = resolvent_sums(cfg.spectrum, g, s);
  const double y = cfg.y;
  const double dG_dg = 2.0 * y * g * r.u_inv - y * g * g * r.uu_inv2 - 1.0;
  const double dG_ds = 1.0 - y * g * g * r.ut_inv2;
  const double ds_dg = -dG_dg / dG_ds;

  RealBranch b;
  b.g = g;
  b.s = s;
  b.x = -1.0 / g + y * r.t_inv;
  b.ds_dg = ds_dg;
  b.dx_dg = 1.0 / (g * g) - y * r.ut_inv2 - y * r.tt_inv2 * ds_dg;
  return b;
}

std::vector<SpectralGap> find_gaps(const ModelConfig &cfg,
                                   const GapSearch &search) {
  if (search.n_grid < 100) throw InvalidModel("find_gaps needs n_grid >= 100");
  if (!(search.g_lo < -search.g_min && search.g_min > 0.0 &&
        search.g_hi > search.g_min)) {
    throw InvalidModel("find_gaps needs g_lo < -g_min < 0 < g_min < g_hi");
  }
  std::vector<double> negative = log_grid(-search.g_lo, search.g_min, search.n_grid);
  for (auto &g : negative) g = -g;
  const std::vector<double> positive = log_grid(search.g_min, search.g_hi, search.n_grid);

  std::vector<SpectralGap> gaps;
  sweep_side(negative, true, cfg, gaps);
  sweep_side(positive, false, cfg, gaps);
  std::sort(gaps.begin(), gaps.end(),
            [](const SpectralGap &l, const SpectralGap &r) { return l.a < r.a; });
  for (std::size_t k = 1; k < gaps.size(); ++k) {
    if (gaps[k].a < gaps[k - 1].b) {
      std::ostringstream msg;
      msg << "overlapping gaps (" << gaps[k - 1].a << ", " << gaps[k - 1].b
          << ") and (" << gaps[k].a << ", " << gaps[k].b
          << "); try a larger n_grid";
      throw GridTooCoarse(msg.str());
    }
  }
  return gaps;
}

RealBranch branch_at(const SpectralGap &gap, double x, const ModelConfig &cfg) {
  if (!gap.contains(x)) {
    throw std::invalid_argument("branch_at: x is not inside the gap");
  }
  // x(g) increases along the gap; bracket in g, widening the open ends.
  double lo = gap.g_a, hi = gap.g_b;
  if (std::isinf(lo)) {
    lo = (hi < 0.0 ? hi : -1.0) * 2.0 - 1.0;
    while (x_of_g(lo, cfg).x > x) lo *= 2.0;
  }
  if (hi == 0.0) {
    hi = lo / 2.0;
    while (x_of_g(hi, cfg).x < x) hi /= 2.0;
  }
  if (std::isinf(hi)) {
    hi = 2.0 * std::max(1.0, lo);
    while (x_of_g(hi, cfg).x < x) hi *= 2.0;
  }
  RealBranch mid_branch = x_of_g(0.5 * (lo + hi), cfg);
  for (int k = 0; k < 200; ++k) {
    const double mid = 0.5 * (lo + hi);
    if (mid == lo || mid == hi) break;
    mid_branch = x_of_g(mid, cfg);
    (mid_branch.x < x ? lo : hi) = mid;
  }
  return mid_branch;
}

DensityCurve density(const ModelConfig &cfg, std::span<const double> grid,
                     const SolveSettings &settings) {
  DensityCurve curve;
  curve.y = cfg.y;
  curve.grid.assign(grid.begin(), grid.end());
  curve.f.resize(grid.size());
  curve.values.resize(grid.size());
  curve.failed.assign(grid.size(), false);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (grid[i] == 0.0) {
      throw std::invalid_argument("density grid must not contain 0");
    }
    try {
      curve.values[i] = boundary_value(grid[i], cfg, settings);
      // Im s_ / (y pi) minus the companion point mass at the origin, which
      // contributes (1 - y) v / (y |z|^2) at finite v.
      const cplx s = from_companion(curve.values[i], cfg.y).s;
      curve.f[i] = std::max(0.0, s.imag() / std::numbers::pi);
    } catch (const Error &) {
      curve.failed[i] = true;
      curve.f[i] = std::numeric_limits<double>::quiet_NaN();
      curve.values[i] = StieltjesPair{};
    }
  }
  return curve;
}

double trapezoid_mass(const DensityCurve &curve) {
  double mass = 0.0;
  for (std::size_t i = 1; i < curve.grid.size(); ++i) {
    const double fl = curve.f[i - 1], fr = curve.f[i];
    if (std::isfinite(fl) && std::isfinite(fr)) {
      mass += 0.5 * (fl + fr) * (curve.grid[i] - curve.grid[i - 1]);
    }
  }
  return mass;
}

GapSelector gap_containing(double x) {
  return [x](const std::vector<SpectralGap> &gaps) -> std::optional<std::size_t> {
    for (std::size_t k = 0; k < gaps.size(); ++k) {
      if (gaps[k].contains(x)) return k;
    }
    return std::nullopt;
  };
}

std::vector<SpectralGap> gap_vs_y(const JointSpectrum &spectrum,
                                  std::span<const double> y_values,
                                  const GapSelector &selector,
                                  const GapSearch &search) {
  for (std::size_t k = 1; k < y_values.size(); ++k) {
    if (!(y_values[k] < y_values[k - 1])) {
      throw std::invalid_argument("gap_vs_y needs strictly decreasing y");
    }
  }
  std::vector<SpectralGap> track;
  for (std::size_t k = 0; k < y_values.size(); ++k) {
    const auto cfg = make_model(spectrum, y_values[k]);
    const auto gaps = find_gaps(cfg, search);
    if (track.empty()) {
      const auto pick = selector(gaps);
      if (!pick) {
        throw GapTrackingError("selected gap does not exist at y = " +
                               std::to_string(y_values[k]));
      }
      track.push_back(gaps[*pick]);
      continue;
    }
    const SpectralGap &prev = track.back();
    const SpectralGap *best = nullptr;
    double best_distance = std::numeric_limits<double>::infinity();
    for (const auto &gap : gaps) {
      double distance;
      if (prev.unbounded()) {
        if (!gap.unbounded()) continue;
        distance = std::abs(gap.a - prev.a);
      } else {
        if (gap.unbounded() || !gap.contains(0.5 * (prev.a + prev.b))) continue;
        distance = std::abs(gap.a - prev.a) + std::abs(gap.b - prev.b);
      }
      if (distance < best_distance) {
        best_distance = distance;
        best = &gap;
      }
    }
    std::ostringstream where;
    where << " between y = " << y_values[k - 1] << " and y = " << y_values[k];
    if (best == nullptr) {
      throw GapTrackingError("tracked gap was lost" + where.str());
    }
    if (prev.unbounded() ? !(best->a < prev.a) : !(best->width() > prev.width())) {
      throw GapTrackingError("gap did not grow" + where.str());
    }
    track.push_back(*best);
  }
  return track;
}

}  // namespace specsep
