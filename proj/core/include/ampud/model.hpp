#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include <Eigen/Dense>

namespace ampud {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Markov source families. MConst/MUnif/MRad share a two-state chain with
/// transition probabilities p01 (zero -> nonzero) and p10 (nonzero -> zero)
/// and differ in what the nonzero state emits: the constant 1, U[0,1], or
/// +/-1 equiprobably. M4 is a four-state +1,+1,-1,-1 switching pattern with
/// per-transition error probability switch_error.
enum class SourceKind { MConst, MUnif, MRad, M4 };

struct MarkovSourceSpec {
  SourceKind kind = SourceKind::MConst;
  double p01 = 3.0 / 970.0;
  double p10 = 0.10;
  double switch_error = 0.03;  // M4 only

  /// Stationary probability of the nonzero state (two-state kinds).
  double stationary_nonzero() const { return p01 / (p01 + p10); }

  /// E[x^2] under the stationary law.
  double second_moment() const;

  void validate() const;  // throws std::invalid_argument

  static MarkovSourceSpec mconst() { return {SourceKind::MConst, 3.0 / 970.0, 0.10, 0.0}; }
  static MarkovSourceSpec munif() { return {SourceKind::MUnif, 3.0 / 970.0, 0.10, 0.0}; }
  static MarkovSourceSpec mrad() { return {SourceKind::MRad, 3.0 / 70.0, 0.10, 0.0}; }
  static MarkovSourceSpec m4(double switch_error = 0.03) {
    return {SourceKind::M4, 0.0, 0.0, switch_error};
  }
};

/// One measurement problem instance: y = A x + z with z ~ N(0, sigma_z_sq I).
/// A has i.i.d. N(0, 1/M) entries so columns have unit norm on average.
struct LinearSystem {
  Matrix A;  // M x N
  Vector y;  // length M
  double sigma_z_sq = 0.0;

  int m() const { return static_cast<int>(A.rows()); }
  int n() const { return static_cast<int>(A.cols()); }
  double rate() const { return static_cast<double>(m()) / n(); }
};

// ---- Generators (deterministic given seed) --------------------------------

Matrix gen_matrix(int m, int n, std::uint64_t seed);

Vector measure(const Matrix& a, const Vector& x, double sigma_z_sq,
               std::uint64_t seed);

/// i.i.d. 0.03 Laplace(0, variance 1) + 0.97 delta(0).
Vector gen_sparse_laplace(int n, std::uint64_t seed);

/// Two-state Markov signal (MConst/MUnif/MRad). The chain starts from the
/// stationary distribution unless force_initial_nonzero is given.
Vector gen_two_state_markov(int n, const MarkovSourceSpec& spec,
                            std::uint64_t seed,
                            std::optional<bool> force_initial_nonzero = {});

/// Four-state +/-1 switching signal. Modeled as a Markov chain on value
/// pairs (x_{t-1}, x_t): the pattern-following next value is emitted with
/// probability 1 - switch_error, its negation otherwise (the switch happens
/// too early or too late depending on the current pair). Stationary marginals
/// of the four pairs are 0.25 each.
Vector gen_m4(int n, double switch_error, std::uint64_t seed);

// ---- Metrics ---------------------------------------------------------------

/// SNR = 10 log10( N E[x^2] / (M sigma_z_sq) ), E[x^2] taken empirically.
double snr_db(const Vector& x, int m, double sigma_z_sq);

/// Solves the SNR definition for sigma_z_sq.
double noise_var_for_snr(double e_x2, int n, int m, double snr_db);

/// SDR = 10 log10( E[x^2] / MSE ); +infinity when x_hat == x_true exactly.
double sdr_db(const Vector& x_true, const Vector& x_hat);

inline double mse(const Vector& x_true, const Vector& x_hat) {
  return (x_true - x_hat).squaredNorm() / x_true.size();
}

std::string to_string(SourceKind kind);

}  // namespace ampud
