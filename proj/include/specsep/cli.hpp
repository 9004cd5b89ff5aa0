#ifndef SPECSEP_CLI_HPP_
#define SPECSEP_CLI_HPP_

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "specsep/matrix_simulator.hpp"
#include "specsep/separation_predictor.hpp"
#include "specsep/spectrum_model.hpp"
#include "specsep/stieltjes_solver.hpp"
#include "specsep/support_analyzer.hpp"

namespace specsep::cli {

enum ExitCode : int {
  kSuccess = 0,
  kUsageError = 2,
  kSolverFailure = 3,
  kVerificationFailure = 4,
};

/// Raised for malformed configs and bad options; maps to kUsageError.
class UsageError : public Error {
 public:
  using Error::Error;
};

struct SimSettings {
  int n = 1000;
  int trials = 50;
  std::uint64_t seed = 0;
  NoiseLaw noise_law = NoiseLaw::standard_gaussian;
  bool complex_entries = false;
};

struct DensityOptions {
  double x_min = 0.0;
  double x_max = 0.0;
  int points = 0;
};

/// Everything one run needs, parsed from a single JSON document:
///
///   {"schema": 1, "y": 0.25,
///    "spectrum": [{"u": 0, "t": 1, "weight": 1}],
///    "solve": {"tol", "max_iter", "damping", "v_start", "v_min"},
///    "gaps": {"g_lo", "g_hi", "g_min", "n_grid"},
///    "density": {"x_min", "x_max", "points"},
///    "separation": {"p", "n_samples"},
///    "sim": {"n", "trials", "seed", "noise_law", "complex"}}
///
/// Only "y" and "spectrum" are required.
struct RunConfig {
  ModelConfig model;
  SolveSettings solve;
  GapSearch search;
  std::optional<DensityOptions> density;
  std::optional<int> p;
  int n_samples = 5;
  std::optional<SimSettings> sim;

  /// Number of pairs for separation: round(y n) with a simulation block,
  /// else separation.p. Throws UsageError when neither is present.
  int pair_count() const;
};

RunConfig parse_config(const nlohmann::json &doc);
RunConfig load_config(const std::filesystem::path &file);

nlohmann::json gap_to_json(const SpectralGap &gap);
SpectralGap gap_from_json(const nlohmann::json &j);
std::vector<SpectralGap> read_gaps(const std::filesystem::path &file);

/// Each command writes its file(s) into out_dir and returns an ExitCode.
int cmd_density(const RunConfig &cfg, const DensityOptions &opts,
                const std::filesystem::path &out_dir, std::ostream &log);
int cmd_gaps(const RunConfig &cfg, const std::filesystem::path &out_dir,
             std::ostream &log);
int cmd_separate(const RunConfig &cfg, const std::filesystem::path &out_dir,
                 Convention convention,
                 const std::optional<std::filesystem::path> &gaps_file,
                 std::ostream &log);
int cmd_verify(const RunConfig &cfg, const std::filesystem::path &out_dir,
               Convention convention, double threshold, std::ostream &log);

/// Entry point: specsep density|gaps|separate|verify --config <file> ...
int run(const std::vector<std::string> &args, std::ostream &out,
        std::ostream &err);

}  // namespace specsep::cli

#endif
