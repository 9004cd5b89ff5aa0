#include "specsep/matrix_simulator.hpp"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <exception>
#include <iomanip>
#include <limits>
#include <mutex>
#include <ostream>
#include <string>
#include <thread>
#include <tuple>

namespace specsep {

std::string_view to_string(NoiseLaw law) {
  switch (law) {
    case NoiseLaw::standard_gaussian:
      return "standard_gaussian";
    case NoiseLaw::rademacher:
      return "rademacher";
    case NoiseLaw::uniform_standardized:
      return "uniform_standardized";
  }
  return "unknown";
}

NoiseLaw noise_law_from_string(std::string_view name) {
  if (name == "standard_gaussian" || name == "gaussian") {
    return NoiseLaw::standard_gaussian;
  }
  if (name == "rademacher") return NoiseLaw::rademacher;
  if (name == "uniform_standardized" || name == "uniform") {
    return NoiseLaw::uniform_standardized;
  }
  throw std::invalid_argument("unknown noise law '" + std::string(name) + "'");
}

SimConfig make_sim_config(JointSpectrum spectrum, double y, int n,
                          NoiseLaw law, int trials, std::uint64_t seed,
                          bool complex_entries) {
  if (n < 1) throw InvalidModel("simulation needs n >= 1");
  if (trials < 1) throw InvalidModel("simulation needs trials >= 1");
  const int p = static_cast<int>(std::lround(y * n));
  if (p < 1 || p > n) {
    throw InvalidModel("simulation needs 1 <= p = round(y n) <= n");
  }
  return SimConfig{validate(std::move(spectrum)), n, p, law, trials, seed,
                   complex_entries};
}

DeterministicPart build_deterministic(const JointSpectrum &spectrum, int n,
                                      int p) {
  if (p > n) throw InvalidModel("build_deterministic needs p <= n");
  DeterministicPart det;
  det.pairs = materialize_pairs(spectrum, p);
  det.r = Eigen::MatrixXd::Zero(p, n);
  det.t.resize(p);
  for (int j = 0; j < p; ++j) {
    const auto &pair = det.pairs[static_cast<std::size_t>(j)];
    det.r(j, j) = std::sqrt(static_cast<double>(n) * pair.u);
    det.t[j] = pair.t;
  }
  return det;
}

std::uint64_t trial_seed(std::uint64_t root_seed, int trial) {
  // splitmix64 finalizer over the (seed, counter) state
  std::uint64_t z = root_seed + 0x9E3779B97F4A7C15ULL *
                                    (static_cast<std::uint64_t>(trial) + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

SideCount count_eigs(std::span<const double> eigs, double a, double b) {
  if (!(a < b)) throw std::invalid_argument("count_eigs needs a < b");
  SideCount c;
  for (double l : eigs) {
    if (l < a) {
      ++c.below;
    } else if (l > b) {
      ++c.above;
    } else {
      ++c.inside;
    }
  }
  return c;
}

double GapVerification::empty_frequency() const {
  return trials == 0 ? 0.0 : static_cast<double>(empty_trials) / trials;
}

double GapVerification::match_frequency(Convention c) const {
  if (trials == 0) return 0.0;
  const int hits = c == Convention::derivation ? match_derivation : match_theorem;
  return static_cast<double>(hits) / trials;
}

std::pair<double, double> counting_interval(const SpectralGap &gap) {
  const double b = gap.unbounded() ? gap.a + kUnboundedSpan : gap.b;
  const double d = 0.05 * (b - gap.a);
  return {gap.a + d, b - d};
}

int worker_count() {
  if (const char *env = std::getenv("SPECSEP_THREADS")) {
    const int n = std::atoi(env);
    if (n > 0) return n;
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

namespace {

template <typename Scalar>
std::vector<double> trial_eigenvalues(const SimConfig &cfg,
                                      const DeterministicPart &det, int trial) {
  const Eigen::VectorXd ev = eigenvalues(sample_B<Scalar>(cfg, det, trial));
  return {ev.data(), ev.data() + ev.size()};
}

}  // namespace

VerificationReport run_trials(const SimConfig &cfg,
                              const std::vector<SeparationPrediction> &predictions) {
  const DeterministicPart det = build_deterministic(cfg.spectrum, cfg.n, cfg.p);

  VerificationReport report;
  report.trials.resize(static_cast<std::size_t>(cfg.trials));
  for (const auto &pred : predictions) {
    GapVerification gv;
    gv.gap = pred.gap;
    std::tie(gv.lo, gv.hi) = counting_interval(pred.gap);
    gv.predicted_derivation = pred.sides(Convention::derivation);
    gv.predicted_theorem = pred.sides(Convention::theorem);
    report.gaps.push_back(gv);
  }

  std::atomic<int> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    for (int k = next++; k < cfg.trials; k = next++) {
      try {
        TrialResult tr;
        tr.seed_used = trial_seed(cfg.seed, k);
        tr.eigenvalues = cfg.complex_entries
                             ? trial_eigenvalues<std::complex<double>>(cfg, det, k)
                             : trial_eigenvalues<double>(cfg, det, k);
        for (const auto &gv : report.gaps) {
          tr.counts.push_back(count_eigs(tr.eigenvalues, gv.lo, gv.hi));
        }
        report.trials[static_cast<std::size_t>(k)] = std::move(tr);
      } catch (...) {
        std::lock_guard<std::mutex> lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    }
  };
  const int workers = std::min(worker_count(), cfg.trials);
  std::vector<std::thread> pool;
  for (int w = 1; w < workers; ++w) pool.emplace_back(worker);
  worker();
  for (auto &t : pool) t.join();
  if (failure) std::rethrow_exception(failure);

  for (std::size_t g = 0; g < report.gaps.size(); ++g) {
    auto &gv = report.gaps[g];
    for (const auto &tr : report.trials) {
      const SideCount &c = tr.counts[g];
      ++gv.trials;
      if (c.inside == 0) ++gv.empty_trials;
      const SideCounts observed{c.below, c.above};
      if (c.inside == 0 && observed == gv.predicted_derivation) ++gv.match_derivation;
      if (c.inside == 0 && observed == gv.predicted_theorem) ++gv.match_theorem;
    }
  }
  return report;
}

void write_eigenvalues_csv(std::ostream &out, const VerificationReport &report) {
  const auto flags = out.flags();
  const auto precision = out.precision();
  out << std::setprecision(17);
  for (const auto &tr : report.trials) {
    for (std::size_t i = 0; i < tr.eigenvalues.size(); ++i) {
      if (i > 0) out << ',';
      out << tr.eigenvalues[i];
    }
    out << '\n';
  }
  out.flags(flags);
  out.precision(precision);
}

ExtremeBoundResult extreme_bound_check(const SimConfig &cfg, double eps) {
  const auto &h = cfg.spectrum;
  if (!h.pure_noise() || (h.t() != h.t()[0]).any()) {
    throw InvalidModel("extreme_bound_check needs R = 0 and T = sigma^2 I");
  }
  const double sigma2 = h.t()[0];
  const double y = static_cast<double>(cfg.p) / cfg.n;
  const VerificationReport report = run_trials(cfg, {});

  ExtremeBoundResult r;
  r.sigma2 = sigma2;
  r.lower = sigma2 * std::pow(1.0 - std::sqrt(y), 2) - eps;
  r.upper = sigma2 * std::pow(1.0 + std::sqrt(y), 2) + eps;
  r.lambda_min = std::numeric_limits<double>::infinity();
  r.lambda_max = -std::numeric_limits<double>::infinity();
  for (const auto &tr : report.trials) {
    r.lambda_min = std::min(r.lambda_min, tr.eigenvalues.front());
    r.lambda_max = std::max(r.lambda_max, tr.eigenvalues.back());
  }
  r.pass = r.lambda_min >= r.lower && r.lambda_max <= r.upper;
  return r;
}

}  // namespace specsep
