#include "ampud/amp.hpp"

#include <cmath>

namespace ampud {

Vector pseudo_data(const LinearSystem& sys, const AmpState& state) {
  if (state.x.size() != sys.n() || state.r.size() != sys.m()) {
    throw std::invalid_argument("pseudo_data: state/system dimension mismatch");
  }
  return sys.A.transpose() * state.r + state.x;
}

double estimate_noise_var(const Vector& r, int m) {
  if (m < 1) throw std::invalid_argument("estimate_noise_var: m must be >= 1");
  return r.squaredNorm() / m;
}

AmpState amp_step(const LinearSystem& sys, const AmpState& state,
                  const Denoiser& denoiser, double lambda) {
  if (!(lambda > 0.0 && lambda <= 1.0)) {
    throw std::invalid_argument("amp_step: lambda must be in (0, 1]");
  }
  if (state.x.size() != sys.n()) {
    throw std::invalid_argument("amp_step: state/system dimension mismatch");
  }

  AmpState next;
  next.r = sys.y - sys.A * state.x;
  if (state.r.size() > 0) {
    next.r += (state.mean_deriv / sys.rate()) * state.r;
  }
  next.sigma_hat_sq = estimate_noise_var(next.r, sys.m());

  const Vector q = sys.A.transpose() * next.r + state.x;
  DenoiseResult d = denoiser.denoise(q, next.sigma_hat_sq);
  if (!std::isfinite(d.mean_deriv) || !d.x_hat.allFinite()) {
    throw AmpDivergenceError(state.t, "amp_step: non-finite denoiser output at t=" +
                                          std::to_string(state.t));
  }

  next.x = lambda * d.x_hat + (1.0 - lambda) * state.x;
  next.mean_deriv = d.mean_deriv;
  next.t = state.t + 1;
  return next;
}

AmpRunResult run_amp(const LinearSystem& sys, const Denoiser& denoiser,
                     int t_max, double lambda, const Vector* ground_truth,
                     const AmpCallback& callback) {
  if (t_max < 1) throw std::invalid_argument("run_amp: t_max must be >= 1");

  AmpRunResult result;
  result.state = AmpState::initial(sys.n());
  result.trace.reserve(t_max);

  for (int i = 0; i < t_max; ++i) {
    AmpState next;
    try {
      next = amp_step(sys, result.state, denoiser, lambda);
    } catch (const AmpDivergenceError& e) {
      result.diverged = true;
      result.diverged_at = e.iteration;
      result.message = e.what();
      return result;
    }
    result.state = std::move(next);

    AmpTraceRow row;
    row.t = result.state.t;
    row.sigma_hat_sq = result.state.sigma_hat_sq;
    if (ground_truth) row.mse = mse(*ground_truth, result.state.x);
    result.trace.push_back(row);
    if (callback) callback(result.state);

    // Growth guard: sigma_hat_sq more than 10x up over 5 iterations.
    const auto& tr = result.trace;
    if (tr.size() >= 6 &&
        tr.back().sigma_hat_sq > 10.0 * tr[tr.size() - 6].sigma_hat_sq) {
      result.diverged = true;
      result.diverged_at = result.state.t;
      result.message = "run_amp: sigma_hat_sq grew >10x over 5 iterations";
      return result;
    }
  }
  return result;
}

}  // namespace ampud
