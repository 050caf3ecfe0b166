#include "ampud/gm_denoiser.hpp"

#include <cmath>
#include <stdexcept>

#include "ampud/numerics.hpp"

namespace ampud {

GmDenoiser::GmDenoiser(GaussianMixture prior, double sigma_v_sq)
    : prior_(std::move(prior)), sigma_v_sq_(sigma_v_sq) {
  if (!(sigma_v_sq > 0.0)) {
    throw std::invalid_argument("GmDenoiser: sigma_v_sq must be > 0");
  }
  if (prior_.components.empty()) {
    throw std::invalid_argument("GmDenoiser: empty prior");
  }
  double total = 0.0;
  for (const auto& c : prior_.components) {
    if (!(c.alpha > 0.0) || c.sigma_sq < 0.0) {
      throw std::invalid_argument("GmDenoiser: invalid prior component");
    }
    total += c.alpha;
  }
  if (std::fabs(total - 1.0) > 1e-9) {
    throw std::invalid_argument("GmDenoiser: prior weights must sum to 1");
  }
}

// f, g and their derivatives from the mixture posterior; a common factor
// exp(max log-likelihood) cancels in both value and derivative ratios.
GmDenoiser::Eval GmDenoiser::eval(double q) const {
  const auto& cs = prior_.components;
  const int s_count = static_cast<int>(cs.size());

  double max_log = -std::numeric_limits<double>::infinity();
  std::vector<double> logw(s_count);
  for (int s = 0; s < s_count; ++s) {
    const double v = cs[s].sigma_sq + sigma_v_sq_;
    logw[s] = std::log(cs[s].alpha) + log_normal_pdf(q, cs[s].mu, v);
    max_log = std::max(max_log, logw[s]);
  }

  double g = 0.0, f = 0.0, gp = 0.0, fp = 0.0;
  for (int s = 0; s < s_count; ++s) {
    const double p = std::exp(logw[s] - max_log);
    const double v = cs[s].sigma_sq + sigma_v_sq_;
    const double d = q - cs[s].mu;
    const double shrink = cs[s].sigma_sq / v;
    g += p;
    f += p * (shrink * d + cs[s].mu);
    gp += p * (-d / v);
    fp += p * ((cs[s].sigma_sq - cs[s].mu * d) / v -
               cs[s].sigma_sq * d * d / (v * v));
  }
  return {f / g, (fp * g - f * gp) / (g * g)};
}

double GmDenoiser::denoise(double q) const { return eval(q).value; }

double GmDenoiser::derivative(double q) const { return eval(q).deriv; }

DenoiseResult GmDenoiser::denoise_vector(const Vector& q) const {
  if (q.size() == 0) throw std::invalid_argument("denoise_vector: empty input");
  DenoiseResult out;
  out.x_hat.resize(q.size());
  double deriv_sum = 0.0;
  for (int i = 0; i < q.size(); ++i) {
    const Eval e = eval(q(i));
    out.x_hat(i) = e.value;
    deriv_sum += e.deriv;
  }
  out.mean_deriv = deriv_sum / q.size();
  return out;
}

}  // namespace ampud
