#include "ampud/state_evolution.hpp"

#include <cmath>
#include <stdexcept>

#include "ampud/rng.hpp"

namespace ampud {

double se_step(const MseFn& mse_fn, double sigma_sq_t, double sigma_z_sq,
               double rate) {
  if (!(rate > 0.0)) throw std::invalid_argument("se_step: rate must be > 0");
  if (sigma_sq_t < 0.0) throw std::invalid_argument("se_step: negative variance");
  return sigma_z_sq + mse_fn(sigma_sq_t) / rate;
}

SeTrace se_run(const MseFn& mse_fn, double e_x2, double rate,
               double sigma_z_sq, int t_max, double fp_tol) {
  if (t_max < 1) throw std::invalid_argument("se_run: t_max must be >= 1");
  SeTrace trace;
  trace.sigma_sq.push_back(sigma_z_sq + e_x2 / rate);
  for (int t = 0; t < t_max; ++t) {
    const double m = mse_fn(trace.sigma_sq[t]);
    trace.predicted_mse.push_back(m);
    const double next = sigma_z_sq + m / rate;
    if (std::fabs(next - trace.sigma_sq[t]) < fp_tol) {
      trace.fixed_point_reached = true;
      trace.fixed_point_t = t;
      trace.sigma_sq.push_back(next);
      break;
    }
    trace.sigma_sq.push_back(next);
  }
  return trace;
}

SeTrace se_run_window(const WindowModel& model, double rate, double sigma_z_sq,
                      int t_max, int n_mc, std::uint64_t seed, double fp_tol) {
  int call = 0;
  MseFn fn = [&](double sigma_sq) {
    return model.window_mse(sigma_sq, n_mc, substream_seed(seed, call++));
  };
  return se_run(fn, model.source_second_moment(), rate, sigma_z_sq, t_max,
                fp_tol);
}

}  // namespace ampud
