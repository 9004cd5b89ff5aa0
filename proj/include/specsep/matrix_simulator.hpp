#ifndef SPECSEP_MATRIX_SIMULATOR_HPP_
#define SPECSEP_MATRIX_SIMULATOR_HPP_

#include <Eigen/Dense>
#include <cmath>
#include <complex>
#include <cstdint>
#include <iosfwd>
#include <random>
#include <span>
#include <stdexcept>
#include <string_view>
#include <type_traits>
#include <vector>

#include "specsep/separation_predictor.hpp"
#include "specsep/spectrum_model.hpp"
#include "specsep/support_analyzer.hpp"

namespace specsep {

/// Standardized entry laws: mean 0, variance 1.
enum class NoiseLaw { standard_gaussian, rademacher, uniform_standardized };

std::string_view to_string(NoiseLaw law);
NoiseLaw noise_law_from_string(std::string_view name);

struct SimConfig {
  JointSpectrum spectrum;
  int n = 1;
  int p = 1;
  NoiseLaw noise_law = NoiseLaw::standard_gaussian;
  int trials = 1;
  std::uint64_t seed = 0;
  bool complex_entries = false;
};

/// Builds a SimConfig with p = round(y n); throws InvalidModel unless
/// 1 <= p <= n and trials >= 1.
SimConfig make_sim_config(JointSpectrum spectrum, double y, int n,
                          NoiseLaw law, int trials, std::uint64_t seed,
                          bool complex_entries = false);

/// Commuting deterministic inputs of one finite model: R is p x n with
/// R(j, j) = sqrt(n u_j), so (1/n) R R^T = diag(u); T = diag(t).
struct DeterministicPart {
  Eigen::MatrixXd r;
  Eigen::VectorXd t;
  std::vector<EigenPair> pairs;
};

DeterministicPart build_deterministic(const JointSpectrum &spectrum, int n,
                                      int p);

/// Seed of the per-trial substream: splitmix64 of the root seed advanced
/// by the trial counter.
std::uint64_t trial_seed(std::uint64_t root_seed, int trial);

template <typename Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

namespace detail {

template <typename Rng>
double draw(NoiseLaw law, Rng &rng) {
  switch (law) {
    case NoiseLaw::standard_gaussian: {
      std::normal_distribution<double> normal(0.0, 1.0);
      return normal(rng);
    }
    case NoiseLaw::rademacher: {
      std::uniform_int_distribution<int> coin(0, 1);
      return coin(rng) == 0 ? -1.0 : 1.0;
    }
    case NoiseLaw::uniform_standardized: {
      const double half_width = std::sqrt(3.0);
      std::uniform_real_distribution<double> uniform(-half_width, half_width);
      return uniform(rng);
    }
  }
  return 0.0;
}

template <typename T>
struct is_complex : std::false_type {};
template <typename T>
struct is_complex<std::complex<T>> : std::true_type {};

}  // namespace detail

/// rows x cols matrix of independent standardized entries. Complex entries
/// are (xi + i eta) / sqrt(2) with xi, eta drawn from `law`, so
/// E|x|^2 = 1 and E x^2 = 0.
template <typename Scalar, typename Rng>
Matrix<Scalar> sample_noise(NoiseLaw law, Eigen::Index rows, Eigen::Index cols,
                            Rng &rng) {
  Matrix<Scalar> x(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j) {
    for (Eigen::Index i = 0; i < rows; ++i) {
      if constexpr (detail::is_complex<Scalar>::value) {
        const double re = detail::draw(law, rng);
        const double im = detail::draw(law, rng);
        x(i, j) = Scalar(re, im) / std::sqrt(2.0);
      } else {
        x(i, j) = detail::draw(law, rng);
      }
    }
  }
  return x;
}

/// One realization B = Y Y^* with Y = n^{-1/2} (R + T^{1/2} X). The noise
/// stream depends only on (seed, trial).
template <typename Scalar>
Matrix<Scalar> sample_B(const SimConfig &cfg, const DeterministicPart &det,
                        int trial) {
  std::mt19937_64 rng(trial_seed(cfg.seed, trial));
  Matrix<Scalar> y = sample_noise<Scalar>(cfg.noise_law, cfg.p, cfg.n, rng);
  y = det.t.cwiseSqrt().template cast<Scalar>().asDiagonal() * y;
  y += det.r.template cast<Scalar>();
  y /= std::sqrt(static_cast<double>(cfg.n));

  Matrix<Scalar> b = Matrix<Scalar>::Zero(cfg.p, cfg.p);
  b.template selfadjointView<Eigen::Lower>().rankUpdate(y);
  return b.template selfadjointView<Eigen::Lower>();
}

template <typename Scalar>
Matrix<Scalar> sample_B(const SimConfig &cfg, int trial) {
  return sample_B<Scalar>(cfg, build_deterministic(cfg.spectrum, cfg.n, cfg.p),
                          trial);
}

namespace detail {
template <typename Derived>
void require_hermitian(const Eigen::MatrixBase<Derived> &b) {
  if (b.rows() != b.cols()) throw std::invalid_argument("matrix is not square");
  const double scale = std::max(1.0, b.cwiseAbs().maxCoeff());
  if ((b - b.adjoint()).cwiseAbs().maxCoeff() > 1e-12 * scale) {
    throw std::invalid_argument("matrix is not Hermitian");
  }
}
}  // namespace detail

/// Ascending eigenvalues of a Hermitian matrix.
template <typename Derived>
Eigen::VectorXd eigenvalues(const Eigen::MatrixBase<Derived> &b) {
  detail::require_hermitian(b);
  using Plain = typename Derived::PlainObject;
  Eigen::SelfAdjointEigenSolver<Plain> solver(b.eval(), Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) {
    throw std::runtime_error("symmetric eigensolver failed");
  }
  return solver.eigenvalues();
}

/// ||B - V diag(lambda) V^*|| / ||B|| from a full decomposition.
template <typename Derived>
double reconstruction_residual(const Eigen::MatrixBase<Derived> &b) {
  detail::require_hermitian(b);
  using Plain = typename Derived::PlainObject;
  Eigen::SelfAdjointEigenSolver<Plain> solver(b.eval());
  const Plain v = solver.eigenvectors();
  const Plain rebuilt =
      v * solver.eigenvalues().template cast<typename Plain::Scalar>().asDiagonal() *
      v.adjoint();
  const double norm = b.norm();
  return norm == 0.0 ? (b - rebuilt).norm() : (b - rebuilt).norm() / norm;
}

struct SideCount {
  int below = 0;
  int inside = 0;
  int above = 0;
  friend bool operator==(const SideCount &, const SideCount &) = default;
};

/// below = #{l < a}, inside = #{a <= l <= b}, above = #{l > b}.
SideCount count_eigs(std::span<const double> eigs, double a, double b);

struct TrialResult {
  std::vector<double> eigenvalues;
  std::vector<SideCount> counts;  // one per verified gap
  std::uint64_t seed_used = 0;
};

/// Monte Carlo outcome for one gap.
struct GapVerification {
  SpectralGap gap;
  double lo = 0.0;  // counting interval [lo, hi]
  double hi = 0.0;
  SideCounts predicted_derivation;
  SideCounts predicted_theorem;
  int trials = 0;
  int empty_trials = 0;
  int match_derivation = 0;
  int match_theorem = 0;

  double empty_frequency() const;
  double match_frequency(Convention c) const;
};

struct VerificationReport {
  std::vector<TrialResult> trials;
  std::vector<GapVerification> gaps;
};

/// Counting interval for a gap: [a + d, b - d] with d = 5% of the width;
/// unbounded gaps use b = a + kUnboundedSpan.
std::pair<double, double> counting_interval(const SpectralGap &gap);

/// Runs cfg.trials independent realizations (in parallel, capped by the
/// SPECSEP_THREADS environment variable) and compares the side counts of
/// every predicted gap with both conventions.
VerificationReport run_trials(const SimConfig &cfg,
                              const std::vector<SeparationPrediction> &predictions);

/// Writes one CSV row per trial with its ascending eigenvalues.
void write_eigenvalues_csv(std::ostream &out, const VerificationReport &report);

struct ExtremeBoundResult {
  double sigma2 = 1.0;
  double lower = 0.0;  // sigma^2 (1 - sqrt y)^2 - eps
  double upper = 0.0;  // sigma^2 (1 + sqrt y)^2 + eps
  double lambda_min = 0.0;
  double lambda_max = 0.0;
  bool pass = false;
  double margin_low() const { return lambda_min - lower; }
  double margin_high() const { return upper - lambda_max; }
};

/// Pure-noise model (every u = 0, one common t = sigma^2): checks that the
/// extreme eigenvalues over all trials stay within the Bai-Yin edges +- eps.
ExtremeBoundResult extreme_bound_check(const SimConfig &cfg, double eps);

struct PerturbationResult {
  double max_eigen_gap = 0.0;
  double spectral_norm = 0.0;
  bool holds = false;
};

/// max_k |lambda_k(A) - lambda_k(B)| against ||A - B|| for Hermitian A, B.
template <typename DerivedA, typename DerivedB>
PerturbationResult perturbation_check(const Eigen::MatrixBase<DerivedA> &a,
                                      const Eigen::MatrixBase<DerivedB> &b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw std::invalid_argument("perturbation_check: dimension mismatch");
  }
  const Eigen::VectorXd la = eigenvalues(a);
  const Eigen::VectorXd lb = eigenvalues(b);
  const Eigen::VectorXd ld = eigenvalues((a - b).eval());
  PerturbationResult r;
  r.max_eigen_gap = (la - lb).cwiseAbs().maxCoeff();
  r.spectral_norm = ld.cwiseAbs().maxCoeff();
  r.holds = r.max_eigen_gap <= r.spectral_norm + 1e-10;
  return r;
}

/// Worker count: SPECSEP_THREADS if set and positive, else the hardware
/// concurrency.
int worker_count();

}  // namespace specsep

#endif
