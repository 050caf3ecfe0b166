#pragma once

#include "ampud/amp.hpp"

namespace ampud {

/// Closed-form conditional-expectation denoiser for the i.i.d. sparse
/// Laplace prior p(x) = (1 - rho) delta(x) + rho Laplace(0, variance 1),
/// observed through AWGN. Used as the known-prior (MMSE) reference inside
/// AMP for this signal family.
class SparseLaplaceDenoiser final : public Denoiser {
 public:
  explicit SparseLaplaceDenoiser(double rho = 0.03,
                                 double scale = 0.7071067811865476)
      : rho_(rho), scale_(scale) {}

  /// Posterior mean and variance of x given q = x + N(0, sigma_sq).
  struct Posterior {
    double mean;
    double var;
  };
  Posterior posterior(double q, double sigma_sq) const;

  DenoiseResult denoise(const Vector& q, double sigma_sq) const override;

  double second_moment() const { return rho_ * 2.0 * scale_ * scale_; }

 private:
  double rho_;
  double scale_;  // Laplace scale b; variance 2 b^2
};

}  // namespace ampud
