#include "specsep/stieltjes_solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace specsep {
namespace {

constexpr double kHalfPlaneFloor = 1e-16;
constexpr int kNewtonIterations = 40;
constexpr int kNewtonEvery = 25;
constexpr double kHeavyDamping = 0.1;

bool herglotz(cplx s, cplx g) { return s.imag() > 0.0 && g.imag() > 0.0; }

void project_upper(cplx &v) {
  if (!(v.imag() > 0.0)) v.imag(kHalfPlaneFloor);
}

double safe_residual(cplx s, cplx g, cplx z, const ModelConfig &cfg) {
  try {
    const double r = residual_713(StieltjesPair{s, g, z}, cfg).max();
    return std::isfinite(r) ? r : std::numeric_limits<double>::infinity();
  } catch (const PoleError &) {
    return std::numeric_limits<double>::infinity();
  }
}

// Absolute residuals in z have a rounding floor of about |z| eps, so the
// tolerance is relative once |z| > 1.
double effective_tol(cplx z, double tol) { return tol * std::max(1.0, std::abs(z)); }

// One Newton step on the polynomial form of the companion system
//   F1 = z s + (1 - y) + y \int 1/D,   F2 = z g + 1 - y g \int t/D.
bool newton_step(cplx z, cplx &s, cplx &g, const ModelConfig &cfg) {
  const double y = cfg.y;
  ResolventSums<cplx> r;
  try {
    r = resolvent_sums(cfg.spectrum, g, s);
  } catch (const PoleError &) {
    return false;
  }
  const cplx f1 = z * s + (1.0 - y) + y * r.inv;
  const cplx f2 = z * g + 1.0 - y * g * r.t_inv;
  const cplx j11 = z - y * r.t_inv2;
  const cplx j12 = -y * r.u_inv2;
  const cplx j21 = y * g * r.tt_inv2;
  const cplx j22 = z - y * r.t_inv + y * g * r.ut_inv2;
  const cplx det = j11 * j22 - j12 * j21;
  if (std::abs(det) < 1e-300) return false;
  s += (-f1 * j22 + f2 * j12) / det;
  g += (-f2 * j11 + f1 * j21) / det;
  project_upper(s);
  project_upper(g);
  return std::isfinite(s.real()) && std::isfinite(g.real()) &&
         std::isfinite(s.imag()) && std::isfinite(g.imag());
}

// Newton from (s, g). Returns true once the residual is below tol at a
// Herglotz point; a few extra steps then take it down to rounding level.
bool newton_polish(cplx z, cplx &s, cplx &g, const ModelConfig &cfg,
                   double tol) {
  const double target = effective_tol(z, tol);
  cplx cs = s, cg = g;
  for (int k = 0; k < kNewtonIterations; ++k) {
    if (!newton_step(z, cs, cg, cfg)) return false;
    double res = safe_residual(cs, cg, z, cfg);
    if (res < target && herglotz(cs, cg)) {
      for (int extra = 0; extra < 3 && res > 0.0; ++extra) {
        cplx ns = cs, ng = cg;
        if (!newton_step(z, ns, ng, cfg) || !herglotz(ns, ng)) break;
        const double next = safe_residual(ns, ng, z, cfg);
        if (!(next < res)) break;
        cs = ns;
        cg = ng;
        res = next;
      }
      s = cs;
      g = cg;
      return true;
    }
  }
  return false;
}

}  // namespace

SolveSettings checked(SolveSettings settings) {
  if (!(settings.tol > 0.0)) throw InvalidModel("solve tol must be > 0");
  if (settings.max_iter < 1) throw InvalidModel("solve max_iter must be >= 1");
  if (!(settings.damping > 0.0 && settings.damping <= 1.0)) {
    throw InvalidModel("solve damping must lie in (0, 1]");
  }
  if (!(settings.v_min > 0.0 && settings.v_start >= settings.v_min)) {
    throw InvalidModel("continuation needs 0 < v_min <= v_start");
  }
  return settings;
}

Residual residual_713(const StieltjesPair &pair, const ModelConfig &cfg) {
  const cplx s = pair.s_under, g = pair.g_under, z = pair.z;
  if (std::abs(s) < kPoleThreshold || std::abs(g) < kPoleThreshold) {
    throw PoleError("companion transform vanished");
  }
  const auto r = resolvent_sums(cfg.spectrum, g, s);
  const double y = cfg.y;
  const cplx rhs1 = -(1.0 - y) / s - (y / s) * r.inv;
  const cplx rhs2 = -1.0 / g + y * r.t_inv;
  return Residual{std::abs(z - rhs1), std::abs(z - rhs2)};
}

Residual residual_712(cplx s, cplx g, cplx z, const ModelConfig &cfg) {
  const double y = cfg.y;
  const cplx one_yg = 1.0 + y * g;
  if (std::abs(one_yg) < kPoleThreshold) {
    throw PoleError("1 + y g vanished");
  }
  const auto &h = cfg.spectrum;
  const Eigen::ArrayXcd den = h.u().cast<cplx>() / one_yg -
                              (1.0 + y * s * h.t().cast<cplx>()) * z +
                              h.t().cast<cplx>() * (1.0 - y);
  if (den.abs().minCoeff() < kPoleThreshold) {
    throw PoleError("non-companion denominator vanished");
  }
  const Eigen::ArrayXcd w_den = h.w().cast<cplx>() / den;
  const cplx rhs1 = w_den.sum();
  const cplx rhs2 = (w_den * h.t().cast<cplx>()).sum();
  return Residual{std::abs(s - rhs1), std::abs(g - rhs2)};
}

double constraint_residual(const StieltjesPair &pair, const ModelConfig &cfg) {
  const cplx s = pair.s_under, g = pair.g_under;
  const auto r = resolvent_sums(cfg.spectrum, g, s);
  return std::abs(cfg.y * g * g * r.u_inv + s - g);
}

StieltjesPair to_companion(cplx s, cplx g, cplx z, double y) {
  const cplx one_yg = 1.0 + y * g;
  if (std::abs(z) < kPoleThreshold || std::abs(one_yg) < kPoleThreshold) {
    throw PoleError("singular companion transform (z = 0 or 1 + y g = 0)");
  }
  return StieltjesPair{-(1.0 - y) / z + y * s, -1.0 / (z * one_yg), z};
}

DirectPair from_companion(const StieltjesPair &pair, double y) {
  const cplx zg = pair.z * pair.g_under;
  if (y == 0.0 || std::abs(pair.z) < kPoleThreshold ||
      std::abs(zg) < kPoleThreshold) {
    throw PoleError("singular inverse companion transform");
  }
  return DirectPair{(pair.s_under + (1.0 - y) / pair.z) / y,
                    (-1.0 / zg - 1.0) / y};
}

StieltjesPair solve_from(cplx z, const StieltjesPair &start,
                         const ModelConfig &cfg,
                         const SolveSettings &settings) {
  const double y = cfg.y;
  cplx s = start.s_under, g = start.g_under;
  project_upper(s);
  project_upper(g);

  if (newton_polish(z, s, g, cfg, settings.tol)) return {s, g, z};

  double damping = settings.damping;
  double last = std::numeric_limits<double>::infinity();
  double at_last_newton = last;
  int worsening = 0;
  bool restarted = false;
  for (int it = 1; it <= settings.max_iter; ++it) {
    ResolventSums<cplx> r;
    try {
      r = resolvent_sums(cfg.spectrum, g, s);
    } catch (const PoleError &) {
      if (restarted) throw;
      restarted = true;
      damping = std::min(damping, kHeavyDamping);
      s = g = -1.0 / z;
      continue;
    }
    const cplx g_next = -1.0 / (z - y * r.t_inv);
    const cplx s_next = -(1.0 - y + y * r.inv) / z;
    s = (1.0 - damping) * s + damping * s_next;
    g = (1.0 - damping) * g + damping * g_next;
    project_upper(s);
    project_upper(g);

    const double res = safe_residual(s, g, z, cfg);
    if (res < effective_tol(z, settings.tol) && herglotz(s, g)) {
      cplx ns = s, ng = g;
      if (newton_polish(z, ns, ng, cfg, settings.tol)) return {ns, ng, z};
      return {s, g, z};
    }
    if (res > last) {
      if (++worsening > 5) damping = std::min(damping, kHeavyDamping);
    } else {
      worsening = 0;
    }
    last = res;

    if (it % kNewtonEvery == 0 && res < at_last_newton) {
      at_last_newton = res;
      cplx ns = s, ng = g;
      if (newton_polish(z, ns, ng, cfg, settings.tol)) return {ns, ng, z};
    }
  }
  std::ostringstream msg;
  msg << "companion system did not converge at z = " << z << " after "
      << settings.max_iter << " iterations (residual " << last << ")";
  throw NonConvergence(msg.str(), last);
}

StieltjesPair solve_at(cplx z, const ModelConfig &cfg,
                       const SolveSettings &settings) {
  if (!(z.imag() > 0.0)) {
    throw std::invalid_argument("solve_at needs Im z > 0");
  }
  const StieltjesPair cold{-1.0 / z, -1.0 / z, z};
  try {
    return solve_from(z, cold, cfg, settings);
  } catch (const Error &) {
    // fall through to continuation from higher up in C+
  }

  double v = std::max({2.0 * z.imag(), 1.0, std::abs(z.real())});
  const cplx top{z.real(), v};
  StieltjesPair pair = solve_from(top, {-1.0 / top, -1.0 / top, top}, cfg,
                                  settings);
  while (v > z.imag()) {
    v = std::max(0.5 * v, z.imag());
    pair = solve_from(cplx{z.real(), v}, pair, cfg, settings);
  }
  return pair;
}

StieltjesPair boundary_value(double x, const ModelConfig &cfg,
                             const SolveSettings &settings) {
  if (x == 0.0) {
    throw std::invalid_argument("boundary_value is undefined at x = 0");
  }
  double v = settings.v_start;
  StieltjesPair pair = solve_at(cplx{x, v}, cfg, settings);
  while (v > settings.v_min) {
    const double next = std::max(0.5 * v, settings.v_min);
    try {
      pair = solve_from(cplx{x, next}, pair, cfg, settings);
    } catch (const Error &e) {
      std::ostringstream msg;
      msg << "continuation to the real axis stalled at x = " << x
          << ", v = " << v << ": " << e.what();
      throw ContinuationStall(msg.str(), v);
    }
    v = next;
  }
  return pair;
}

}  // namespace specsep
