#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <vector>

#include "ampud/amp.hpp"
#include "ampud/model.hpp"
#include "ampud/rng.hpp"

namespace ampud {

class Rng;

/// Bayesian sliding-window model for MConst ({0,1} alphabet, first-order
/// chain) and M4 ({-1,+1} alphabet, second-order chain). Window priors over
/// all alphabet^(2k+1) windows are enumerated exactly and cached per window
/// length, so the denoiser is exact, not approximate. Complexity per symbol
/// is |alphabet|^(2k+1).
class WindowModel {
 public:
  /// spec.kind must be MConst or M4; k is the window half-width (>= 0).
  WindowModel(const MarkovSourceSpec& spec, int k);

  int half_width() const { return k_; }
  const MarkovSourceSpec& spec() const { return spec_; }
  const std::vector<double>& alphabet() const { return alphabet_; }
  double source_second_moment() const { return spec_.second_moment(); }

  /// p(x_center = center_value, q_win) for a full window of length 2k+1.
  double joint_density(const Vector& q_win, double sigma_v_sq,
                       double center_value) const;

  /// p(q_win): joint_density summed over all center values.
  double marginal_density(const Vector& q_win, double sigma_v_sq) const;

  /// Posterior mean of the center symbol given a full window.
  double eta(const Vector& q_win, double sigma_v_sq) const;

  /// d eta / d q_center = Var(x_center | q_win) / sigma_v_sq.
  double eta_deriv(const Vector& q_win, double sigma_v_sq) const;

  /// Applies the window denoiser at every index; boundary windows are
  /// truncated with correspondingly marginalized priors. Requires N > 2k.
  DenoiseResult denoise_sequence(const Vector& q, double sigma_v_sq) const;

  /// Denoiser MSE at noise level sigma_v_sq: 1-D quadrature for k = 0,
  /// Monte Carlo over (window prior x noise) otherwise.
  double window_mse(double sigma_v_sq, int n_mc, std::uint64_t seed) const;

  /// Draws a length-(2k+1) window from the stationary chain.
  Vector sample_window(Rng& rng) const;

  /// Sum of all full-window priors (should be 1).
  double prior_total() const;

 private:
  struct Table {
    std::vector<std::uint32_t> codes;  // bit i = symbol index at position i
    std::vector<double> log_prior;
  };

  struct CenterStats {
    double mean;
    double var;
    double log_marginal;
  };

  const Table& table(int len) const;
  Table build_table(int len) const;
  CenterStats center_posterior(const double* q, int len, int center,
                               double sigma_v_sq) const;

  MarkovSourceSpec spec_;
  int k_;
  std::vector<double> alphabet_;
  mutable std::map<int, Table> tables_;
};

/// Denoiser-contract adapter for use inside the AMP loop.
class WindowDenoiser final : public Denoiser {
 public:
  WindowDenoiser(const MarkovSourceSpec& spec, int k) : model_(spec, k) {}
  explicit WindowDenoiser(WindowModel model) : model_(std::move(model)) {}

  DenoiseResult denoise(const Vector& q, double sigma_sq) const override {
    return model_.denoise_sequence(q, sigma_sq);
  }
  const WindowModel& model() const { return model_; }

 private:
  WindowModel model_;
};

}  // namespace ampud
