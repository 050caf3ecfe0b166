#pragma once

#include "ampud/amp.hpp"
#include "ampud/gm.hpp"

namespace ampud {

/// Conditional-expectation denoiser for i.i.d. data under a Gaussian-mixture
/// prior on the clean signal, observed through AWGN with variance
/// sigma_v_sq. Component likelihoods are evaluated in the log domain with
/// max-subtraction, so far-tail inputs stay finite.
class GmDenoiser {
 public:
  GmDenoiser(GaussianMixture prior, double sigma_v_sq);

  double denoise(double q) const;

  /// d/dq of denoise; equals Var(x|q) / sigma_v_sq (Tweedie identity).
  double derivative(double q) const;

  DenoiseResult denoise_vector(const Vector& q) const;

  const GaussianMixture& prior() const { return prior_; }
  double sigma_v_sq() const { return sigma_v_sq_; }

 private:
  struct Eval {
    double value;
    double deriv;
  };
  Eval eval(double q) const;

  GaussianMixture prior_;
  double sigma_v_sq_;
};

}  // namespace ampud
