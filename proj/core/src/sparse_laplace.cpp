#include "ampud/sparse_laplace.hpp"

#include <cmath>
#include <stdexcept>

#include "ampud/numerics.hpp"

namespace ampud {

// Posterior under (1-rho) delta(0) + rho Laplace(0, b). Working terms are
// scaled by sigma*sqrt(2*pi)*exp(q^2/(2 sigma^2)) so the delta-component
// weight is the constant (1-rho); the scale cancels in all ratios. The
// Laplace half-line integrals reduce to exp(x^2/2)*Phi(x) evaluations, which
// scaled_normal_cdf handles without underflow.
SparseLaplaceDenoiser::Posterior SparseLaplaceDenoiser::posterior(
    double q, double sigma_sq) const {
  if (!(sigma_sq > 0.0)) {
    throw std::invalid_argument("SparseLaplaceDenoiser: sigma_sq must be > 0");
  }
  const double sigma = std::sqrt(sigma_sq);
  const double b = scale_;
  const double inv_sqrt_2pi = 0.3989422804014327;

  const double m_pos = q - sigma_sq / b;   // shifted mean, positive branch
  const double m_neg = -q - sigma_sq / b;  // negative branch
  const double x_pos = m_pos / sigma;
  const double x_neg = m_neg / sigma;

  // Far in a tail the Laplace branch on that side dominates everything else
  // and the posterior is Gaussian N(m, sigma^2) restricted to the half-line,
  // effectively unrestricted for large m.
  if (x_pos > 30.0) return {m_pos, sigma_sq};
  if (x_neg > 30.0) return {-m_neg, sigma_sq};

  const double coef = rho_ * sigma * std::sqrt(2.0 * M_PI) / (2.0 * b);
  const double c_pos = scaled_normal_cdf(x_pos);
  const double c_neg = scaled_normal_cdf(x_neg);

  const double z = (1.0 - rho_) + coef * (c_pos + c_neg);
  const double a1 = coef * ((m_pos * c_pos + sigma * inv_sqrt_2pi) -
                            (m_neg * c_neg + sigma * inv_sqrt_2pi));
  const double a2 =
      coef * ((m_pos * m_pos + sigma_sq) * c_pos + m_pos * sigma * inv_sqrt_2pi +
              (m_neg * m_neg + sigma_sq) * c_neg + m_neg * sigma * inv_sqrt_2pi);

  const double mean = a1 / z;
  const double var = std::max(0.0, a2 / z - mean * mean);
  return {mean, var};
}

DenoiseResult SparseLaplaceDenoiser::denoise(const Vector& q,
                                             double sigma_sq) const {
  DenoiseResult out;
  out.x_hat.resize(q.size());
  double deriv_sum = 0.0;
  for (int i = 0; i < q.size(); ++i) {
    const Posterior p = posterior(q(i), sigma_sq);
    out.x_hat(i) = p.mean;
    deriv_sum += p.var / sigma_sq;
  }
  out.mean_deriv = q.size() > 0 ? deriv_sum / q.size() : 0.0;
  return out;
}

}  // namespace ampud
