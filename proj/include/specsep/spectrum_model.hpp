#ifndef SPECSEP_SPECTRUM_MODEL_HPP_
#define SPECSEP_SPECTRUM_MODEL_HPP_

#include <Eigen/Core>
#include <cstddef>
#include <vector>

#include "specsep/errors.hpp"

namespace specsep {

/// One point mass of the joint spectrum: an eigenvalue u of (1/n) R R*
/// paired with the eigenvalue t of T sharing its eigenvector.
struct SpectrumAtom {
  double u = 0.0;
  double t = 1.0;
  double weight = 1.0;
};

/// A paired eigenvalue (u_j, t_j) of a finite model.
struct EigenPair {
  double u = 0.0;
  double t = 1.0;

  friend bool operator==(const EigenPair &, const EigenPair &) = default;
};

/// Discrete joint distribution H of (u, t).
///
/// Atoms are kept both as a list and as column arrays so the resolvent
/// kernels can be written as Eigen array expressions.
class JointSpectrum {
 public:
  JointSpectrum() = default;
  explicit JointSpectrum(std::vector<SpectrumAtom> atoms);

  const std::vector<SpectrumAtom> &atoms() const { return atoms_; }
  Eigen::Index size() const { return static_cast<Eigen::Index>(atoms_.size()); }
  bool empty() const { return atoms_.empty(); }

  const Eigen::ArrayXd &u() const { return u_; }
  const Eigen::ArrayXd &t() const { return t_; }
  const Eigen::ArrayXd &w() const { return w_; }

  /// True when every atom has u = 0 (no information part).
  bool pure_noise() const { return (u_ == 0.0).all(); }

  /// Same atoms with u and t multiplied by `factor`.
  JointSpectrum scaled(double factor) const;

 private:
  std::vector<SpectrumAtom> atoms_;
  Eigen::ArrayXd u_, t_, w_;
};

/// Checks the invariants of H and returns it unchanged.
/// Throws InvalidModel on an empty list, t <= 0, u < 0, weight <= 0,
/// duplicate (u, t) pairs, or weights not summing to one within 1e-12.
JointSpectrum validate(JointSpectrum spectrum);

/// \int u^i t^j dH.
double moments(const JointSpectrum &spectrum, int i, int j);

/// Expands H into p pairs; atom k is repeated m_k times where m is the
/// largest-remainder apportionment of (w_k p). Ties in the remainders go
/// to the earlier atom.
std::vector<EigenPair> materialize_pairs(const JointSpectrum &spectrum, int p);

/// Model inputs: validated spectrum plus aspect ratio y = p / n in (0, 1].
struct ModelConfig {
  JointSpectrum spectrum;
  double y = 1.0;
};

/// Validates both the spectrum and y.
ModelConfig make_model(JointSpectrum spectrum, double y);

}  // namespace specsep

#endif
