#pragma once

// Declarative robustness experiments: sweep (distribution, m), draw a planted
// s-sparse signal and noisy measurements per trial, decode with every
// configured decoder on the same draw, and write CSV tables plus a gnuplot script.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "qpcs/distributions.hpp"
#include "qpcs/solvers.hpp"

namespace qpcs {

struct NoiseModel {
  enum class Kind { Spherical, Psi };
  Kind kind = Kind::Spherical;
  double radius = 1e-2;
  double alpha = 0.0;  // Psi only

  static NoiseModel spherical(double radius);
  static NoiseModel psi(double alpha, double radius);
  /// `spherical(r)` or `psi(alpha, r)`.
  static NoiseModel parse(std::string_view text);
  std::string name() const;
};

struct DecoderSpec {
  enum class Kind { BP, BPDN };
  Kind kind = Kind::BP;
  double eta_factor = 0.0;  // eta = eta_factor * ||w||_2 for BPDN

  static DecoderSpec bp() { return {}; }
  static DecoderSpec bpdn(double eta_factor);
  /// `bp` or `bpdn(f)`.
  static DecoderSpec parse(std::string_view text);
  std::string name() const;  // "bp" / "bpdn(f)"
  std::string kind_name() const;  // "bp" / "bpdn", the trials.csv decoder column
};

struct ExperimentConfig {
  int N = 500;
  int s = 5;
  std::vector<int> m_list;
  std::vector<DistributionSpec> distributions;
  NoiseModel noise;
  std::vector<DecoderSpec> decoders;
  int trials = 100;
  std::uint64_t master_seed = 0;
  SolverOptions solver;
  // Measured seconds in the wall_time column; off by default so that repeated
  // runs write byte-identical files.
  bool record_wall_time = false;

  /// N=500, s=5, m = 25..350 step 25, 100 trials, spherical noise 1e-2,
  /// Gaussian / Rademacher / Student-t(ceil(log N)), decoders bp and
  /// bpdn(1), bpdn(2), bpdn(0.5).
  static ExperimentConfig desk();
  /// N=5000, s=10, m = ceil(kN/20) for k = 1..14, 500 trials, otherwise as desk.
  static ExperimentConfig paper();
  static ExperimentConfig preset(std::string_view name);

  /// Throws ConfigError unless s < m <= N for every m, trials >= 1, lists are
  /// nonempty and eta factors are >= 0.
  void validate() const;
};

/// Flat `key = value` text, one pair per line, `#` starts a comment. Keys:
/// N, s, m_list, distributions, noise, decoders, trials, master_seed, tol_abs,
/// tol_rel, max_iters, record_wall_time. Lists are comma-separated. Keys absent
/// from the text keep their value in `base`.
ExperimentConfig parse_config(std::string_view text, ExperimentConfig base = {});
ExperimentConfig load_config(const std::filesystem::path& path, ExperimentConfig base = {});
std::string config_to_text(const ExperimentConfig& config);

struct TrialRecord {
  std::string distribution;
  int m = 0;
  std::string decoder;  // "bp" or "bpdn"
  double eta_factor = 0.0;
  int trial = 0;
  std::uint64_t seed = 0;
  double l2_error = 0.0;
  double l1_error = 0.0;
  double residual = 0.0;
  bool converged = false;
  double wall_time = 0.0;

  bool operator==(const TrialRecord&) const = default;
};

/// Seed of the (distribution, m, trial) cell; every decoder in the cell uses it.
/// A, x0 and w come from sub-streams 1, 2 and 3 of this seed.
std::uint64_t cell_seed(std::uint64_t master_seed, const std::string& distribution, int m,
                        int trial);

/// Runs the full factorial. Records are ordered by (distribution, m, trial,
/// decoder) in config order, independent of `threads`. Throws ExperimentAborted
/// when more than 5% of cells contain a solve that did not converge.
std::vector<TrialRecord> run_experiment(const ExperimentConfig& config, int threads = 1);

struct SummaryRow {
  std::string distribution;
  int m = 0;
  std::string decoder;
  double eta_factor = 0.0;
  double mean_l2 = 0.0;
  double stderr_l2 = 0.0;  // sample standard deviation / sqrt(n)
  int converged = 0;
  int total = 0;
};

/// Mean and standard error of l2_error over converged trials per
/// (distribution, m, decoder, eta_factor), in order of first appearance.
/// Throws EmptyCell when a cell has no converged trial.
std::vector<SummaryRow> summarize(const std::vector<TrialRecord>& records);

inline constexpr const char* kTrialsHeader =
    "distribution,m,decoder,eta_factor,trial,seed,l2_error,l1_error,residual,converged,wall_time";
inline constexpr const char* kSummaryHeader =
    "distribution,m,decoder,eta_factor,mean_l2_error,stderr_l2_error,converged,trials";

void write_trials_csv(std::ostream& out, const std::vector<TrialRecord>& records);
std::vector<TrialRecord> parse_trials_csv(std::istream& in);
void write_summary_csv(std::ostream& out, const std::vector<SummaryRow>& rows);
void write_plot_script(std::ostream& out, const std::vector<SummaryRow>& rows);

/// Writes trials.csv, summary.csv and plot.gnuplot into `dir` (created if needed).
void emit_outputs(const std::vector<TrialRecord>& records, const std::filesystem::path& dir);

}  // namespace qpcs
