#include "ampud/gm.hpp"

#include <cmath>
#include <stdexcept>

#include <json.hpp>

#include "ampud/numerics.hpp"

namespace ampud {

double GaussianMixture::log_pdf(double x) const {
  std::vector<double> terms;
  terms.reserve(components.size());
  for (const auto& c : components) {
    if (c.sigma_sq > 0.0) {
      terms.push_back(std::log(c.alpha) + log_normal_pdf(x, c.mu, c.sigma_sq));
    } else {
      // Point mass: density is a delta; contributes only at x == mu.
      terms.push_back(x == c.mu ? std::numeric_limits<double>::infinity()
                                : -std::numeric_limits<double>::infinity());
    }
  }
  return log_sum_exp(terms);
}

double GaussianMixture::pdf(double x) const { return std::exp(log_pdf(x)); }

double GaussianMixture::loglik(const Vector& data) const {
  double acc = 0.0;
  for (int i = 0; i < data.size(); ++i) acc += log_pdf(data(i));
  return acc;
}

double GaussianMixture::mean() const {
  double m = 0.0;
  for (const auto& c : components) m += c.alpha * c.mu;
  return m;
}

double GaussianMixture::second_moment() const {
  double m = 0.0;
  for (const auto& c : components) m += c.alpha * (c.sigma_sq + c.mu * c.mu);
  return m;
}

std::string GaussianMixture::to_json() const {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& c : components) {
    arr.push_back({{"alpha", c.alpha}, {"mu", c.mu}, {"sigma_sq", c.sigma_sq}});
  }
  return arr.dump();
}

GaussianMixture GaussianMixture::from_json(const std::string& text) {
  const auto arr = nlohmann::json::parse(text);
  GaussianMixture gm;
  for (const auto& e : arr) {
    gm.components.push_back({e.at("alpha").get<double>(), e.at("mu").get<double>(),
                             e.at("sigma_sq").get<double>()});
  }
  return gm;
}

static double sample_variance(const Vector& data) {
  const double m = data.mean();
  return (data.array() - m).square().sum() / data.size();
}

GaussianMixture init_components(const Vector& data, const EmConfig& cfg) {
  if (data.size() == 0) throw std::invalid_argument("init_components: empty data");
  const double sigma_init_sq =
      cfg.sigma_init_sq > 0.0 ? cfg.sigma_init_sq : sample_variance(data);
  const double threshold = 0.1 * std::sqrt(std::max(0.0, sigma_init_sq));

  // Greedy maximal-distance seeding: repeatedly place a mean at the symbol
  // farthest from every current mean while that distance exceeds the
  // threshold (ties resolved by first occurrence in data order).
  std::vector<double> means{data(0)};
  std::vector<double> min_dist(data.size());
  for (int i = 0; i < data.size(); ++i) min_dist[i] = std::fabs(data(i) - means[0]);
  while (static_cast<int>(means.size()) < cfg.s_max) {
    int best = 0;
    for (int i = 1; i < data.size(); ++i) {
      if (min_dist[i] > min_dist[best]) best = i;
    }
    if (!(min_dist[best] > threshold)) break;
    means.push_back(data(best));
    for (int i = 0; i < data.size(); ++i) {
      min_dist[i] = std::min(min_dist[i], std::fabs(data(i) - means.back()));
    }
  }

  GaussianMixture gm;
  const double w = 1.0 / means.size();
  for (double m : means) gm.components.push_back({w, m, sigma_init_sq});
  return gm;
}

namespace {

constexpr double kNParams = 2.0;  // mean and variance per component

// MML-flavored cost (Figueiredo-Jain with N_params = 2).
double mml_cost(const GaussianMixture& gm, double loglik, int n) {
  double cost = 0.0;
  for (const auto& c : gm.components) {
    cost += 0.5 * kNParams * std::log(n * c.alpha / 12.0);
  }
  const double s = gm.size();
  cost += 0.5 * s * std::log(n / 12.0) + 0.5 * s * (kNParams + 1.0);
  return cost - loglik;
}

}  // namespace

EmFitResult em_fit(const Vector& data, double sigma_v_sq, const EmConfig& cfg) {
  const int n = static_cast<int>(data.size());
  if (n < 1) throw std::invalid_argument("em_fit: empty data");
  if (sigma_v_sq < 0.0) throw std::invalid_argument("em_fit: negative noise variance");
  if (cfg.s_max < 1 || !(cfg.rel_tol > 0.0)) {
    throw std::invalid_argument("em_fit: invalid config");
  }

  GaussianMixture gm = init_components(data, cfg);
  // Numerical variance guard for (near-)constant data or a zero noise floor.
  const double var_guard =
      std::max({1e-12, 1e-10 * sample_variance(data), 1e-10 * sigma_v_sq});
  for (auto& c : gm.components) c.sigma_sq = std::max(c.sigma_sq, var_guard);

  auto make_fallback = [&] {
    EmFitResult res;
    res.gm.components = {{1.0, data.mean(),
                          std::max(sample_variance(data), sigma_v_sq)}};
    res.fallback = true;
    return res;
  };

  // log u_{j,s} = log alpha_s + log N(x_j; mu_s, sigma_s^2), column-major in s.
  Eigen::MatrixXd log_u(n, gm.size());
  auto refresh_column = [&](int s) {
    const auto& c = gm.components[s];
    const double la = std::log(c.alpha);
    for (int j = 0; j < n; ++j) {
      log_u(j, s) = la + log_normal_pdf(data(j), c.mu, c.sigma_sq);
    }
  };
  for (int s = 0; s < gm.size(); ++s) refresh_column(s);

  auto remove_component = [&](int s) {
    gm.components.erase(gm.components.begin() + s);
    const int cols = static_cast<int>(log_u.cols());
    if (s < cols - 1) {
      log_u.block(0, s, n, cols - 1 - s) = log_u.rightCols(cols - 1 - s).eval();
    }
    log_u.conservativeResize(n, cols - 1);
    double total = 0.0;
    for (const auto& c : gm.components) total += c.alpha;
    if (total > 0.0) {
      for (int m = 0; m < gm.size(); ++m) {
        gm.components[m].alpha /= total;
        refresh_column(m);
      }
    }
  };

  const double var_floor = cfg.var_floor_ratio * sigma_v_sq;
  int sweeps = 0;
  double cost = std::numeric_limits<double>::infinity();

  // Outer annihilation path: run component-wise EM to convergence, record the
  // converged model, then force the weakest component out and refit. The
  // returned model is the minimum-cost one along the whole path down to a
  // single component (overlapping components do not starve on their own, so
  // convergence alone cannot select the model order).
  GaussianMixture best;
  double best_cost = std::numeric_limits<double>::infinity();
  bool all_annihilated = false;

  Eigen::VectorXd resp(n);
  while (!all_annihilated) {
    double prev_cost = std::numeric_limits<double>::infinity();
    int stage_sweeps = 0;
    while (stage_sweeps < cfg.max_iters) {
      ++stage_sweeps;
      ++sweeps;
      const int s_before = gm.size();

      for (int s = 0; s < gm.size();) {
        // Responsibilities for component s under the current parameters.
        double sw = 0.0, swx = 0.0;
        for (int j = 0; j < n; ++j) {
          double m = log_u(j, 0);
          for (int c = 1; c < gm.size(); ++c) m = std::max(m, log_u(j, c));
          double denom = 0.0;
          for (int c = 0; c < gm.size(); ++c) denom += std::exp(log_u(j, c) - m);
          const double w = std::exp(log_u(j, s) - m) / denom;
          resp(j) = w;
          sw += w;
          swx += w * data(j);
        }

        const double alpha_raw = std::max(0.0, sw - cfg.min_weight_floor);
        if (alpha_raw == 0.0) {
          remove_component(s);
          if (gm.size() == 0) {
            all_annihilated = true;
            break;
          }
          continue;  // same index now names the next component
        }

        const double mu = swx / sw;
        double var = 0.0;
        for (int j = 0; j < n; ++j) {
          const double d = data(j) - mu;
          var += resp(j) * d * d;
        }
        var = std::max(var / sw, var_guard);

        if (sigma_v_sq > 0.0 && var < var_floor) {
          // Spurious component: variance significantly below the noise floor.
          remove_component(s);
          if (gm.size() == 0) {
            all_annihilated = true;
            break;
          }
          continue;
        }

        gm.components[s].alpha = alpha_raw / n;
        gm.components[s].mu = mu;
        gm.components[s].sigma_sq = var;
        double total = 0.0;
        for (const auto& c : gm.components) total += c.alpha;
        for (int m = 0; m < gm.size(); ++m) {
          gm.components[m].alpha /= total;
          refresh_column(m);
        }
        ++s;
      }
      if (all_annihilated) break;

      // Sweep cost (the u matrix already reflects the updated parameters).
      double loglik = 0.0;
      for (int j = 0; j < n; ++j) {
        double m = log_u(j, 0);
        for (int c = 1; c < gm.size(); ++c) m = std::max(m, log_u(j, c));
        double acc = 0.0;
        for (int c = 0; c < gm.size(); ++c) acc += std::exp(log_u(j, c) - m);
        loglik += m + std::log(acc);
      }
      cost = mml_cost(gm, loglik, n);

      const bool annihilated = gm.size() != s_before;
      if (!annihilated && std::isfinite(prev_cost) &&
          std::fabs(prev_cost - cost) <
              cfg.rel_tol * (std::fabs(prev_cost) + 1.0)) {
        break;
      }
      prev_cost = cost;
    }
    if (all_annihilated) break;

    if (cost < best_cost) {
      best_cost = cost;
      best = gm;
    }
    if (gm.size() <= 1) break;
    int weakest = 0;
    for (int s = 1; s < gm.size(); ++s) {
      if (gm.components[s].alpha < gm.components[weakest].alpha) weakest = s;
    }
    remove_component(weakest);
  }

  if (!std::isfinite(best_cost)) return make_fallback();

  // Slightly-below-noise variances are clamped to the noise floor.
  for (auto& c : best.components) {
    if (c.sigma_sq < sigma_v_sq) c.sigma_sq = sigma_v_sq;
  }

  EmFitResult res;
  res.gm = std::move(best);
  res.sweeps = sweeps;
  res.final_cost = best_cost;
  return res;
}

GaussianMixture subtract_noise(const GaussianMixture& gm_q, double sigma_v_sq) {
  GaussianMixture out;
  out.components.reserve(gm_q.components.size());
  for (const auto& c : gm_q.components) {
    if (c.sigma_sq < sigma_v_sq - 1e-12 * std::max(1.0, sigma_v_sq)) {
      throw std::invalid_argument(
          "subtract_noise: component variance below the noise variance");
    }
    out.components.push_back({c.alpha, c.mu, std::max(0.0, c.sigma_sq - sigma_v_sq)});
  }
  return out;
}

}  // namespace ampud
