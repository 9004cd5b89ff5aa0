#include "specsep/spectrum_model.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <string>
#include <utility>

namespace specsep {

JointSpectrum::JointSpectrum(std::vector<SpectrumAtom> atoms)
    : atoms_(std::move(atoms)) {
  const auto n = size();
  u_.resize(n);
  t_.resize(n);
  w_.resize(n);
  for (Eigen::Index k = 0; k < n; ++k) {
    const auto &a = atoms_[static_cast<std::size_t>(k)];
    u_[k] = a.u;
    t_[k] = a.t;
    w_[k] = a.weight;
  }
}

JointSpectrum JointSpectrum::scaled(double factor) const {
  auto atoms = atoms_;
  for (auto &a : atoms) {
    a.u *= factor;
    a.t *= factor;
  }
  return JointSpectrum(std::move(atoms));
}

JointSpectrum validate(JointSpectrum spectrum) {
  if (spectrum.empty()) {
    throw InvalidModel("joint spectrum has no atoms");
  }
  std::set<std::pair<double, double>> seen;
  double total = 0.0;
  for (const auto &a : spectrum.atoms()) {
    if (!std::isfinite(a.u) || !std::isfinite(a.t) || !std::isfinite(a.weight)) {
      throw InvalidModel("joint spectrum has a non-finite entry");
    }
    if (a.t <= 0.0) {
      throw InvalidModel("atom with t <= 0 (t = " + std::to_string(a.t) +
                         "); the inverse moment of T must be finite");
    }
    if (a.u < 0.0) {
      throw InvalidModel("atom with u < 0 (u = " + std::to_string(a.u) + ")");
    }
    if (a.weight <= 0.0) {
      throw InvalidModel("atom with non-positive weight");
    }
    if (!seen.emplace(a.u, a.t).second) {
      throw InvalidModel("duplicate atom (u = " + std::to_string(a.u) +
                         ", t = " + std::to_string(a.t) + ")");
    }
    total += a.weight;
  }
  if (std::abs(total - 1.0) > 1e-12) {
    throw InvalidModel("atom weights sum to " + std::to_string(total) +
                       ", expected 1");
  }
  return spectrum;
}

double moments(const JointSpectrum &spectrum, int i, int j) {
  return (spectrum.w() * spectrum.u().pow(i) * spectrum.t().pow(j)).sum();
}

std::vector<EigenPair> materialize_pairs(const JointSpectrum &spectrum, int p) {
  if (p < 1) {
    throw InvalidModel("materialize_pairs needs p >= 1");
  }
  const auto &atoms = spectrum.atoms();
  const std::size_t k = atoms.size();
  std::vector<int> counts(k);
  std::vector<double> remainder(k);
  int assigned = 0;
  for (std::size_t i = 0; i < k; ++i) {
    const double quota = atoms[i].weight * p;
    counts[i] = static_cast<int>(std::floor(quota));
    remainder[i] = quota - counts[i];
    assigned += counts[i];
  }
  std::vector<std::size_t> order(k);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return remainder[a] > remainder[b];
  });
  for (std::size_t r = 0; assigned < p; ++r, ++assigned) {
    ++counts[order[r % k]];
  }
  // Float noise can push the floors one over p when the weights sum to
  // 1 + 1e-12; take it back from the smallest remainder.
  for (std::size_t r = k; assigned > p && r > 0;) {
    --r;
    if (counts[order[r]] > 0) {
      --counts[order[r]];
      --assigned;
    }
  }

  std::vector<EigenPair> pairs;
  pairs.reserve(static_cast<std::size_t>(p));
  for (std::size_t i = 0; i < k; ++i) {
    pairs.insert(pairs.end(), static_cast<std::size_t>(counts[i]),
                 EigenPair{atoms[i].u, atoms[i].t});
  }
  return pairs;
}

ModelConfig make_model(JointSpectrum spectrum, double y) {
  if (!(y > 0.0 && y <= 1.0)) {
    throw InvalidModel("aspect ratio y must lie in (0, 1], got " +
                       std::to_string(y));
  }
  return ModelConfig{validate(std::move(spectrum)), y};
}

}  // namespace specsep
