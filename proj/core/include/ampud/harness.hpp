#pragma once

#include <array>
#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "ampud/amp.hpp"
#include "ampud/model.hpp"
#include "ampud/state_evolution.hpp"
#include "ampud/universal.hpp"

namespace ampud {

enum class SignalFamily { SparseLaplace, MConst, MUnif, MRad, M4 };

enum class DenoiserKind {
  WindowMConst,  // Bayesian sliding window, MConst model
  WindowM4,      // Bayesian sliding window, M4 model
  GmIid,         // mixture fit + conditional expectation, no clustering
  Universal,     // context-quantization universal denoiser
  LaplaceMmse    // known-prior sparse-Laplace conditional expectation
};

struct ExperimentConfig {
  SignalFamily family = SignalFamily::SparseLaplace;
  double m4_switch_error = 0.03;
  int n = 5000;
  std::vector<double> rates{0.4};
  std::vector<double> snr_db{10.0};
  DenoiserKind denoiser = DenoiserKind::Universal;
  int window_k = 1;  // window denoisers
  UniversalConfig universal;
  int t_max = 100;
  double lambda = 0.1;
  int trials = 10;
  std::uint64_t seed = 1;
  int se_n_mc = 100000;  // Monte Carlo samples per SE expectation
  // Fixed-point tolerance for the SE recursion in run_se_comparison. The MSE
  // expectation is Monte Carlo for window sizes >= 3, so this must sit above
  // the resulting jitter in sigma^2 for a fixed point to be declared.
  double se_fp_tol = 1e-8;
  std::string output_prefix;  // empty: no files written

  void validate() const;
  MarkovSourceSpec markov_spec() const;  // for Markov families
  double source_second_moment() const;

  std::string to_json() const;
  static ExperimentConfig from_json(const std::string& text);  // unknown keys are errors
};

Vector gen_signal(const ExperimentConfig& cfg, std::uint64_t seed);

std::unique_ptr<Denoiser> make_denoiser(const ExperimentConfig& cfg,
                                        std::uint64_t seed);

struct TrialRow {
  double rate = 0.0;
  double snr_db = 0.0;
  int trial = 0;
  std::uint64_t seed = 0;
  bool diverged = false;
  double final_sdr_db = 0.0;
  double final_sigma_hat_sq = 0.0;
};

struct CellSummary {
  double rate = 0.0;
  double snr_db = 0.0;
  int trials = 0;
  int diverged = 0;
  double mean_sdr_db = 0.0;
  double stderr_sdr_db = 0.0;
};

struct ExperimentResult {
  std::vector<TrialRow> rows;     // sorted by (rate, snr, trial)
  std::vector<CellSummary> cells;
};

/// Generate -> measure -> reconstruct -> metrics over the (rate, snr, trial)
/// grid. Trials run concurrently with independent RNG streams; per-trial
/// divergence is recorded as a flagged row. With output_prefix set, writes
/// <prefix>_results.csv and <prefix>_summary.json.
ExperimentResult run_experiment(const ExperimentConfig& cfg);

struct SeComparisonRow {
  int t = 0;
  double empirical_mse_mean = 0.0;
  double empirical_mse_stderr = 0.0;
  double se_predicted_mse = 0.0;
};

struct SeComparison {
  double rate = 0.0;
  double snr_db = 0.0;
  std::vector<SeComparisonRow> rows;  // t = 0..t_max
  SeTrace se;
  int fixed_point_t = -1;
};

/// Paired SE-prediction vs empirical-MSE traces; denoiser must be a window
/// denoiser matching the source family.
std::vector<SeComparison> run_se_comparison(const ExperimentConfig& cfg);

void write_experiment_csv(const std::string& path, const ExperimentConfig& cfg,
                          const ExperimentResult& result);
void write_experiment_summary_json(const std::string& path,
                                   const ExperimentConfig& cfg,
                                   const ExperimentResult& result);
void write_se_comparison_csv(const std::string& path, const SeComparison& cmp);

struct BetaTuneResult {
  double b1 = 0.0;
  double b2 = 0.0;
  double score = 0.0;  // mean normalized MSE over validation runs
  std::vector<std::array<double, 3>> grid;  // (b1, b2, score)
};

/// Small grid search for the context decay coefficients over MConst and
/// MUnif scalar-channel validation runs.
BetaTuneResult tune_beta(const std::vector<double>& b1_grid,
                         const std::vector<double>& b2_grid, int n,
                         std::uint64_t seed);

std::string to_string(SignalFamily family);
std::string to_string(DenoiserKind kind);

}  // namespace ampud
