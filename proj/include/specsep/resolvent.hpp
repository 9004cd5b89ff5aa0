#ifndef SPECSEP_RESOLVENT_HPP_
#define SPECSEP_RESOLVENT_HPP_

#include <Eigen/Core>
#include <cmath>
#include <complex>
#include <string>

#include "specsep/errors.hpp"
#include "specsep/spectrum_model.hpp"

namespace specsep {

/// Smallest |1 + u g + t s| accepted before an atom is treated as a pole.
constexpr double kPoleThreshold = 1e-14;

/// Per-atom denominators D_k = 1 + u_k g + t_k s.
template <typename Scalar>
Eigen::Array<Scalar, Eigen::Dynamic, 1>
atom_denominators(const JointSpectrum &h, const Scalar &g, const Scalar &s) {
  return Scalar(1) + h.u().template cast<Scalar>() * g +
         h.t().template cast<Scalar>() * s;
}

/// Weighted first and second inverse moments of D over H. Every field is
/// \int (numerator) / D^k dH with D = 1 + u g + t s; names read as
/// <numerator>_inv<k>.
template <typename Scalar>
struct ResolventSums {
  Scalar inv;      // 1 / D
  Scalar t_inv;    // t / D
  Scalar u_inv;    // u / D
  Scalar t_inv2;   // t / D^2
  Scalar u_inv2;   // u / D^2
  Scalar ut_inv2;  // u t / D^2
  Scalar tt_inv2;  // t^2 / D^2
  Scalar uu_inv2;  // u^2 / D^2
};

template <typename Scalar>
ResolventSums<Scalar> resolvent_sums(const JointSpectrum &h, const Scalar &g,
                                     const Scalar &s) {
  using Array = Eigen::Array<Scalar, Eigen::Dynamic, 1>;
  const Array d = atom_denominators(h, g, s);
  if (d.abs().minCoeff() < kPoleThreshold) {
    throw PoleError("atom denominator 1 + u g + t s vanished");
  }
  const Array w_inv = h.w().template cast<Scalar>() / d;
  const Array w_inv2 = w_inv / d;
  const Array u = h.u().template cast<Scalar>();
  const Array t = h.t().template cast<Scalar>();

  ResolventSums<Scalar> r;
  r.inv = w_inv.sum();
  r.t_inv = (w_inv * t).sum();
  r.u_inv = (w_inv * u).sum();
  r.t_inv2 = (w_inv2 * t).sum();
  r.u_inv2 = (w_inv2 * u).sum();
  r.ut_inv2 = (w_inv2 * u * t).sum();
  r.tt_inv2 = (w_inv2 * t * t).sum();
  r.uu_inv2 = (w_inv2 * u * u).sum();
  return r;
}

/// The bounded quantities A_1, A_2 and B_0, B_1, B_2: moments of u t^{j-1}
/// and t^j against |1 + u g + t s|^{-2}.
struct ModulusSums {
  double a1 = 0.0;
  double a2 = 0.0;
  double b0 = 0.0;
  double b1 = 0.0;
  double b2 = 0.0;
};

template <typename Scalar>
ModulusSums modulus_sums(const JointSpectrum &h, const Scalar &g,
                         const Scalar &s) {
  const Eigen::ArrayXd d2 = atom_denominators(h, g, s).abs2().real();
  if (d2.minCoeff() < kPoleThreshold * kPoleThreshold) {
    throw PoleError("atom denominator 1 + u g + t s vanished");
  }
  const Eigen::ArrayXd wd = h.w() / d2;
  return ModulusSums{(wd * h.u()).sum(), (wd * h.u() * h.t()).sum(), wd.sum(),
                     (wd * h.t()).sum(), (wd * h.t().square()).sum()};
}

}  // namespace specsep

#endif
