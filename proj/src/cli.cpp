#include "specsep/cli.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <map>
#include <ostream>
#include <sstream>

#include "CLI11.hpp"

namespace specsep::cli {
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

json finite_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

template <typename T>
T field_or(const json &obj, const char *key, T fallback) {
  if (!obj.contains(key)) return fallback;
  try {
    return obj.at(key).get<T>();
  } catch (const json::exception &e) {
    throw UsageError(std::string("config field '") + key + "': " + e.what());
  }
}

void write_json(const fs::path &file, const json &doc) {
  std::ofstream out(file);
  if (!out) throw UsageError("cannot write " + file.string());
  out << doc.dump(2) << '\n';
}

fs::path prepare_out(const fs::path &dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw UsageError("cannot create output directory " + dir.string());
  return dir;
}

// Gaps recomputed at the configured y.
std::vector<SpectralGap> gaps_for(const ModelConfig &model, const GapSearch &search) {
  return find_gaps(model, search);
}

json side_json(const SideCounts &c) { return {{"below", c.below}, {"above", c.above}}; }

json prediction_json(const SeparationPrediction &pred) {
  json j = gap_to_json(pred.gap);
  j["count_h_below"] = pred.count_h_below;
  j["count_h_above"] = pred.count_h_above;
  j["convention"] = std::string(to_string(pred.convention));
  j["predicted"] = side_json(pred.sides());
  j["sample_x"] = pred.sample_x;
  // Pairs repeat atoms; report each distinct pair once with its multiplicity.
  json pairs = json::array();
  std::map<std::pair<double, double>, std::size_t> seen;
  for (const auto &prof : pred.profiles) {
    const auto key = std::make_pair(prof.pair.u, prof.pair.t);
    auto it = seen.find(key);
    if (it == seen.end()) {
      seen.emplace(key, pairs.size());
      pairs.push_back({{"u", prof.pair.u},
                       {"t", prof.pair.t},
                       {"multiplicity", 1},
                       {"h_min", prof.h_min},
                       {"h_max", prof.h_max}});
    } else {
      pairs[it->second]["multiplicity"] =
          pairs[it->second]["multiplicity"].get<int>() + 1;
    }
  }
  j["pairs"] = std::move(pairs);
  return j;
}

}  // namespace

int RunConfig::pair_count() const {
  if (sim) return static_cast<int>(std::lround(model.y * sim->n));
  if (p) return *p;
  throw UsageError("separation needs either a 'sim' block or 'separation.p'");
}

RunConfig parse_config(const json &doc) {
  if (!doc.is_object()) throw UsageError("config must be a JSON object");
  if (field_or<int>(doc, "schema", 1) != 1) {
    throw UsageError("unsupported config schema (expected 1)");
  }
  if (!doc.contains("y") || !doc.contains("spectrum")) {
    throw UsageError("config needs 'y' and 'spectrum'");
  }
  std::vector<SpectrumAtom> atoms;
  for (const auto &a : doc.at("spectrum")) {
    atoms.push_back({field_or<double>(a, "u", 0.0), field_or<double>(a, "t", 1.0),
                     field_or<double>(a, "weight", 0.0)});
  }

  RunConfig cfg;
  try {
    cfg.model = make_model(JointSpectrum(std::move(atoms)), doc.at("y").get<double>());
  } catch (const InvalidModel &e) {
    throw UsageError(e.what());
  } catch (const json::exception &e) {
    throw UsageError(std::string("config field 'y': ") + e.what());
  }

  const json empty = json::object();
  const json &solve = doc.value("solve", empty);
  cfg.solve.tol = field_or(solve, "tol", cfg.solve.tol);
  cfg.solve.max_iter = field_or(solve, "max_iter", cfg.solve.max_iter);
  cfg.solve.damping = field_or(solve, "damping", cfg.solve.damping);
  cfg.solve.v_start = field_or(solve, "v_start", cfg.solve.v_start);
  cfg.solve.v_min = field_or(solve, "v_min", cfg.solve.v_min);
  try {
    cfg.solve = checked(cfg.solve);
  } catch (const InvalidModel &e) {
    throw UsageError(e.what());
  }

  const json &gaps = doc.value("gaps", empty);
  cfg.search.g_lo = field_or(gaps, "g_lo", cfg.search.g_lo);
  cfg.search.g_hi = field_or(gaps, "g_hi", cfg.search.g_hi);
  cfg.search.g_min = field_or(gaps, "g_min", cfg.search.g_min);
  cfg.search.n_grid = field_or(gaps, "n_grid", cfg.search.n_grid);

  if (doc.contains("density")) {
    const json &d = doc.at("density");
    cfg.density = DensityOptions{field_or(d, "x_min", 0.0), field_or(d, "x_max", 0.0),
                                 field_or(d, "points", 0)};
  }
  const json &sep = doc.value("separation", empty);
  if (sep.contains("p")) cfg.p = field_or(sep, "p", 0);
  cfg.n_samples = field_or(sep, "n_samples", cfg.n_samples);

  if (doc.contains("sim")) {
    const json &s = doc.at("sim");
    SimSettings sim;
    sim.n = field_or(s, "n", sim.n);
    sim.trials = field_or(s, "trials", sim.trials);
    sim.seed = field_or<std::uint64_t>(s, "seed", sim.seed);
    sim.complex_entries = field_or(s, "complex", sim.complex_entries);
    try {
      sim.noise_law = noise_law_from_string(
          field_or<std::string>(s, "noise_law", "standard_gaussian"));
      make_sim_config(cfg.model.spectrum, cfg.model.y, sim.n, sim.noise_law,
                      sim.trials, sim.seed, sim.complex_entries);
    } catch (const InvalidModel &e) {
      throw UsageError(e.what());
    } catch (const std::invalid_argument &e) {
      throw UsageError(e.what());
    }
    cfg.sim = sim;
  }
  return cfg;
}

RunConfig load_config(const fs::path &file) {
  std::ifstream in(file);
  if (!in) throw UsageError("cannot read config " + file.string());
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::exception &e) {
    throw UsageError("config is not valid JSON: " + std::string(e.what()));
  }
  return parse_config(doc);
}

json gap_to_json(const SpectralGap &gap) {
  return {{"a", gap.a},
          {"b", finite_or_null(gap.b)},
          {"g_a", finite_or_null(gap.g_a)},
          {"g_b", finite_or_null(gap.g_b)},
          {"y", gap.y}};
}

SpectralGap gap_from_json(const json &j) {
  SpectralGap gap;
  gap.a = j.at("a").get<double>();
  gap.b = j.at("b").is_null() ? kInf : j.at("b").get<double>();
  gap.g_a = j.at("g_a").is_null() ? -kInf : j.at("g_a").get<double>();
  gap.g_b = j.at("g_b").is_null() ? kInf : j.at("g_b").get<double>();
  gap.y = j.at("y").get<double>();
  return gap;
}

std::vector<SpectralGap> read_gaps(const fs::path &file) {
  std::ifstream in(file);
  if (!in) throw UsageError("cannot read gaps file " + file.string());
  std::vector<SpectralGap> gaps;
  try {
    for (const auto &j : json::parse(in)) gaps.push_back(gap_from_json(j));
  } catch (const json::exception &e) {
    throw UsageError("malformed gaps file: " + std::string(e.what()));
  }
  return gaps;
}

int cmd_density(const RunConfig &cfg, const DensityOptions &opts,
                const fs::path &out_dir, std::ostream &log) {
  if (!(opts.x_min > 0.0 && opts.x_max > opts.x_min) || opts.points < 2) {
    log << "density needs 0 < x_min < x_max and points >= 2\n";
    return kUsageError;
  }
  std::vector<double> grid(static_cast<std::size_t>(opts.points));
  for (int i = 0; i < opts.points; ++i) {
    grid[static_cast<std::size_t>(i)] =
        opts.x_min + (opts.x_max - opts.x_min) * i / (opts.points - 1);
  }
  const DensityCurve curve = density(cfg.model, grid, cfg.solve);

  std::ofstream out(prepare_out(out_dir) / "density.csv");
  out << "x,f,im_s_under,re_s_under,re_g_under\n" << std::setprecision(17);
  int failed = 0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const auto &v = curve.values[i];
    out << grid[i] << ',';
    if (curve.failed[i]) {
      ++failed;
      out << "NaN,NaN,NaN,NaN\n";
    } else {
      out << curve.f[i] << ',' << v.s_under.imag() << ',' << v.s_under.real()
          << ',' << v.g_under.real() << '\n';
    }
  }
  if (failed * 100 > opts.points) {
    log << "solver failed at " << failed << " of " << opts.points << " points\n";
    return kSolverFailure;
  }
  return kSuccess;
}

int cmd_gaps(const RunConfig &cfg, const fs::path &out_dir, std::ostream &log) {
  std::vector<SpectralGap> gaps;
  try {
    gaps = gaps_for(cfg.model, cfg.search);
  } catch (const Error &e) {
    log << "gap sweep failed: " << e.what() << '\n';
    return kSolverFailure;
  }
  json doc = json::array();
  for (const auto &g : gaps) doc.push_back(gap_to_json(g));
  write_json(prepare_out(out_dir) / "gaps.json", doc);
  return kSuccess;
}

int cmd_separate(const RunConfig &cfg, const fs::path &out_dir,
                 Convention convention, const std::optional<fs::path> &gaps_file,
                 std::ostream &log) {
  const int p = cfg.pair_count();
  const auto pairs = materialize_pairs(cfg.model.spectrum, p);
  json doc = json::array();
  try {
    const auto gaps = gaps_file ? read_gaps(*gaps_file) : gaps_for(cfg.model, cfg.search);
    for (const auto &gap : gaps) {
      doc.push_back(prediction_json(
          predict_counts(gap, pairs, cfg.model, cfg.solve, cfg.n_samples, convention)));
    }
  } catch (const UsageError &) {
    throw;
  } catch (const Error &e) {
    log << "separation failed: " << e.what() << '\n';
    return kSolverFailure;
  }
  write_json(prepare_out(out_dir) / "separation.json", doc);
  return kSuccess;
}

int cmd_verify(const RunConfig &cfg, const fs::path &out_dir, Convention convention,
               double threshold, std::ostream &log) {
  if (!cfg.sim) throw UsageError("verify needs a 'sim' block in the config");
  const SimSettings &s = *cfg.sim;
  const SimConfig sim = make_sim_config(cfg.model.spectrum, cfg.model.y, s.n,
                                        s.noise_law, s.trials, s.seed,
                                        s.complex_entries);
  // The finite model is analysed at its own aspect ratio p / n.
  const ModelConfig model = make_model(cfg.model.spectrum,
                                       static_cast<double>(sim.p) / sim.n);
  std::vector<SeparationPrediction> predictions;
  try {
    const auto pairs = materialize_pairs(model.spectrum, sim.p);
    for (const auto &gap : gaps_for(model, cfg.search)) {
      predictions.push_back(
          predict_counts(gap, pairs, model, cfg.solve, cfg.n_samples, convention));
    }
  } catch (const Error &e) {
    log << "prediction failed: " << e.what() << '\n';
    return kSolverFailure;
  }

  const VerificationReport report = run_trials(sim, predictions);
  bool pass = true;
  json gaps = json::array();
  for (const auto &gv : report.gaps) {
    const bool gap_pass = gv.match_frequency(convention) >= threshold;
    pass = pass && gap_pass;
    json g = gap_to_json(gv.gap);
    g["count_interval"] = {gv.lo, gv.hi};
    g["predicted"] = {{"derivation", side_json(gv.predicted_derivation)},
                      {"theorem", side_json(gv.predicted_theorem)}};
    g["no_eigenvalue_frequency"] = gv.empty_frequency();
    g["match_frequency"] = {{"derivation", gv.match_frequency(Convention::derivation)},
                            {"theorem", gv.match_frequency(Convention::theorem)}};
    g["pass"] = gap_pass;
    gaps.push_back(std::move(g));
  }
  const json doc = {{"y", model.y},
                    {"p", sim.p},
                    {"n", sim.n},
                    {"trials", sim.trials},
                    {"seed", sim.seed},
                    {"noise_law", std::string(to_string(sim.noise_law))},
                    {"complex", sim.complex_entries},
                    {"convention", std::string(to_string(convention))},
                    {"threshold", threshold},
                    {"pass", pass},
                    {"gaps", std::move(gaps)}};
  const fs::path dir = prepare_out(out_dir);
  write_json(dir / "verify.json", doc);
  std::ofstream csv(dir / "eigenvalues.csv");
  write_eigenvalues_csv(csv, report);
  if (!pass) {
    log << "verification failed: match frequency below " << threshold << '\n';
    return kVerificationFailure;
  }
  return kSuccess;
}

int run(const std::vector<std::string> &args, std::ostream &out, std::ostream &err) {
  CLI::App app{"Spectral support, gaps and exact separation for noncentral "
               "sample covariance matrices"};
  app.require_subcommand(1);

  std::string config_file;
  std::string out_dir = ".";
  std::string convention_name = "derivation";
  double threshold = 0.95;
  std::optional<double> x_min, x_max;
  std::optional<int> points;
  std::string gaps_file;

  auto add_common = [&](CLI::App *sub) {
    sub->add_option("--config", config_file, "JSON run configuration")->required();
    sub->add_option("--out", out_dir, "output directory");
  };
  auto *density_cmd = app.add_subcommand("density", "write density.csv");
  add_common(density_cmd);
  density_cmd->add_option("--x-min", x_min, "left end of the grid (> 0)");
  density_cmd->add_option("--x-max", x_max, "right end of the grid");
  density_cmd->add_option("--points", points, "number of grid points (>= 2)");

  auto *gaps_cmd = app.add_subcommand("gaps", "write gaps.json");
  add_common(gaps_cmd);

  auto *separate_cmd = app.add_subcommand("separate", "write separation.json");
  add_common(separate_cmd);
  separate_cmd->add_option("--convention", convention_name, "derivation|theorem");
  separate_cmd->add_option("--gaps", gaps_file, "reuse a gaps.json instead of sweeping");

  auto *verify_cmd = app.add_subcommand("verify", "Monte Carlo check, write verify.json");
  add_common(verify_cmd);
  verify_cmd->add_option("--convention", convention_name, "derivation|theorem");
  verify_cmd->add_option("--threshold", threshold, "required match frequency");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError &e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kSuccess : kUsageError;
  }

  try {
    const RunConfig cfg = load_config(config_file);
    const Convention convention = convention_from_string(convention_name);
    if (*density_cmd) {
      DensityOptions opts = cfg.density.value_or(DensityOptions{});
      if (x_min) opts.x_min = *x_min;
      if (x_max) opts.x_max = *x_max;
      if (points) opts.points = *points;
      return cmd_density(cfg, opts, out_dir, err);
    }
    if (*gaps_cmd) return cmd_gaps(cfg, out_dir, err);
    if (*separate_cmd) {
      std::optional<fs::path> gf;
      if (!gaps_file.empty()) gf = gaps_file;
      return cmd_separate(cfg, out_dir, convention, gf, err);
    }
    if (!(threshold >= 0.0 && threshold <= 1.0)) {
      throw UsageError("threshold must lie in [0, 1]");
    }
    return cmd_verify(cfg, out_dir, convention, threshold, err);
  } catch (const UsageError &e) {
    err << "usage error: " << e.what() << '\n';
    return kUsageError;
  } catch (const std::invalid_argument &e) {
    err << "usage error: " << e.what() << '\n';
    return kUsageError;
  } catch (const Error &e) {
    err << "error: " << e.what() << '\n';
    return kSolverFailure;
  }
}

}  // namespace specsep::cli
