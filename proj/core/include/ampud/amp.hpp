#pragma once

#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "ampud/model.hpp"

namespace ampud {

struct DenoiseResult {
  Vector x_hat;
  double mean_deriv = 0.0;  // <eta'>: empirical mean of d eta(q)_j / d q_j
};

/// Scalar-channel denoiser contract used inside the AMP loop.
/// Implementations receive the pseudo-data q and the current effective
/// noise variance, and must report the mean derivative for the Onsager term.
class Denoiser {
 public:
  virtual ~Denoiser() = default;
  virtual DenoiseResult denoise(const Vector& q, double sigma_sq) const = 0;
};

struct AmpState {
  Vector x;                    // current estimate x^t, length N
  Vector r;                    // residual r^{t-1} (empty before the first step)
  int t = 0;                   // iteration index
  double sigma_hat_sq = 0.0;   // ||r||^2 / M after the last refresh
  double mean_deriv = 0.0;     // <eta'> reported by the last denoiser call

  static AmpState initial(int n) {
    AmpState s;
    s.x = Vector::Zero(n);
    return s;
  }
};

class AmpDivergenceError : public std::runtime_error {
 public:
  AmpDivergenceError(int iteration, const std::string& what)
      : std::runtime_error(what), iteration(iteration) {}
  int iteration;
};

/// Pseudo-data q^t = A^T r^t + x^t; the signal corrupted by effective AWGN.
Vector pseudo_data(const LinearSystem& sys, const AmpState& state);

/// Residual-norm noise estimate: ||r||^2 / M.
double estimate_noise_var(const Vector& r, int m);

/// One AMP iteration with damping factor lambda in (0, 1]:
///   r^t     = y - A x^t + (1/R) r^{t-1} <eta^{t-1}'>   (Onsager term absent at t=0)
///   sigma^2 = ||r^t||^2 / M
///   q^t     = A^T r^t + x^t
///   x^{t+1} = lambda eta(q^t) + (1 - lambda) x^t
/// Throws AmpDivergenceError on non-finite denoiser output.
AmpState amp_step(const LinearSystem& sys, const AmpState& state,
                  const Denoiser& denoiser, double lambda);

struct AmpTraceRow {
  int t = 0;                 // index of the estimate x^t this row describes
  double sigma_hat_sq = 0.0; // effective noise estimate used to produce x^t
  double mse = std::numeric_limits<double>::quiet_NaN();  // vs ground truth if known
};

struct AmpRunResult {
  AmpState state;
  std::vector<AmpTraceRow> trace;  // rows t = 1..t_final
  bool diverged = false;
  int diverged_at = -1;
  std::string message;
};

using AmpCallback = std::function<void(const AmpState&)>;

/// Runs t_max steps from x^0 = 0. Divergence (non-finite output, or
/// sigma_hat_sq growing more than 10x over 5 consecutive iterations) stops
/// the run; the trace up to the failure is returned with the flag set.
AmpRunResult run_amp(const LinearSystem& sys, const Denoiser& denoiser,
                     int t_max, double lambda,
                     const Vector* ground_truth = nullptr,
                     const AmpCallback& callback = {});

}  // namespace ampud
