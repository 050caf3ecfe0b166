#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "ampud/markov_denoiser.hpp"

namespace ampud {

/// Scalar MSE of a denoiser as a function of the effective noise variance.
using MseFn = std::function<double(double sigma_sq)>;

struct SeTrace {
  std::vector<double> sigma_sq;       // index t = 0..T, sigma_sq[0] = sigma_z^2 + E[X^2]/R
  std::vector<double> predicted_mse;  // predicted_mse[t] = mse_fn(sigma_sq[t]), MSE of x^{t+1}
  bool fixed_point_reached = false;
  int fixed_point_t = -1;
};

/// One recursion step: sigma_{t+1}^2 = sigma_z^2 + mse_fn(sigma_t^2) / R.
double se_step(const MseFn& mse_fn, double sigma_sq_t, double sigma_z_sq,
               double rate);

/// Iterates se_step from sigma_0^2 = sigma_z^2 + e_x2 / R for up to t_max
/// steps, stopping early once |delta sigma^2| < fp_tol (fixed point).
SeTrace se_run(const MseFn& mse_fn, double e_x2, double rate,
               double sigma_z_sq, int t_max, double fp_tol = 1e-8);

/// Convenience wrapper: SE for a Bayesian sliding-window denoiser, with the
/// MSE expectation evaluated by WindowModel::window_mse (shared definition
/// with the empirical runs).
SeTrace se_run_window(const WindowModel& model, double rate, double sigma_z_sq,
                      int t_max, int n_mc, std::uint64_t seed,
                      double fp_tol = 1e-8);

}  // namespace ampud
