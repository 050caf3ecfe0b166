#pragma once

#include <string>
#include <vector>

#include "ampud/model.hpp"

namespace ampud {

struct GmComponent {
  double alpha = 1.0;     // mixing weight
  double mu = 0.0;        // mean
  double sigma_sq = 0.0;  // variance (0 allowed: point mass)
};

/// p(x) = sum_s alpha_s N(x; mu_s, sigma_s^2). Weights sum to 1 and are
/// strictly positive; zero-variance components represent deltas (allowed in
/// deconvolved clean-signal priors).
struct GaussianMixture {
  std::vector<GmComponent> components;

  int size() const { return static_cast<int>(components.size()); }
  double pdf(double x) const;
  double log_pdf(double x) const;
  double loglik(const Vector& data) const;
  double mean() const;
  double second_moment() const;

  std::string to_json() const;  // array of {alpha, mu, sigma_sq}
  static GaussianMixture from_json(const std::string& text);
};

struct EmConfig {
  int s_max = 20;                // cap on the component count
  double sigma_init_sq = 0.0;    // 0 -> sample variance of the data
  double min_weight_floor = 1.0; // effective-sample annihilation threshold (N_params/2)
  double var_floor_ratio = 0.9;  // below ratio*sigma_v_sq: annihilate; in [ratio, 1): clamp
  int max_iters = 500;
  double rel_tol = 1e-5;
};

/// Distance-based initialization: one component per data value farther than
/// 0.1 * sigma_init from every current mean, equal weights, common variance
/// sigma_init^2, up to s_max components.
GaussianMixture init_components(const Vector& data, const EmConfig& cfg);

struct EmFitResult {
  GaussianMixture gm;    // model of the noisy data q; all variances >= sigma_v_sq
  bool fallback = false; // all components annihilated; single-component fallback
  int sweeps = 0;
  double final_cost = 0.0;
};

/// Component-wise EM with MML-style weight updates and annihilation.
/// Components whose variance drops below var_floor_ratio * sigma_v_sq are
/// annihilated during fitting; variances in [ratio * sigma_v_sq, sigma_v_sq)
/// are clamped to sigma_v_sq at termination.
EmFitResult em_fit(const Vector& data, double sigma_v_sq, const EmConfig& cfg);

/// Deconvolution: subtracts the channel noise variance from every component.
/// Requires all variances >= sigma_v_sq; zero-variance output is allowed.
GaussianMixture subtract_noise(const GaussianMixture& gm_q, double sigma_v_sq);

}  // namespace ampud
