#include "ampud/universal.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "ampud/rng.hpp"

namespace ampud {

ContextSet build_contexts(const Vector& q, int k) {
  const int n = static_cast<int>(q.size());
  if (k < 1) throw std::invalid_argument("build_contexts: k must be >= 1");
  if (n <= 2 * k) throw std::invalid_argument("build_contexts: need N > 2k");

  // Edge mirroring (reflection about the boundary sample, excluding it).
  auto mirror = [n](int i) {
    if (i < 0) return -i;
    if (i >= n) return 2 * (n - 1) - i;
    return i;
  };

  ContextSet cs;
  cs.k = k;
  cs.weights = Vector::Ones(2 * k);
  cs.contexts.resize(n, 2 * k);
  for (int j = 0; j < n; ++j) {
    for (int d = 1; d <= k; ++d) {
      cs.contexts(j, k - d) = q(mirror(j - d));
      cs.contexts(j, k + d - 1) = q(mirror(j + d));
    }
  }
  return cs;
}

DecayRate decay_rate(const Vector& q, double sigma_v_sq, double b1, double b2) {
  if (!(sigma_v_sq > 0.0)) {
    throw std::invalid_argument("decay_rate: sigma_v_sq must be > 0");
  }
  const double energy = q.squaredNorm() / q.size();
  const double denom = energy - sigma_v_sq;

  DecayRate out;
  double ratio;
  if (denom > 0.0) {
    ratio = std::max(sigma_v_sq / denom, 1e-3);
  } else {
    ratio = 1e-3;
    out.low_signal = true;
  }
  out.beta = std::clamp(b1 * std::log10(ratio) + b2, 0.01, 0.99);
  return out;
}

ContextSet weight_contexts(const ContextSet& cs, double beta) {
  if (!(beta > 0.0 && beta < 1.0)) {
    throw std::invalid_argument("weight_contexts: beta must be in (0, 1)");
  }
  const int k = cs.k;
  ContextSet out;
  out.k = k;
  out.weights.resize(2 * k);
  for (int i = 0; i < k; ++i) {
    const double w = std::exp(-beta * (k - 1 - i));
    out.weights(i) = w;              // left side, unit weight adjacent to center
    out.weights(2 * k - 1 - i) = w;  // mirrored right side
  }
  out.contexts = cs.contexts.array().rowwise() *
                 out.weights.transpose().array();
  return out;
}

namespace {

double sq_dist(const Matrix& rows, int i, const Matrix& centroids, int c) {
  return (rows.row(i) - centroids.row(c)).squaredNorm();
}

}  // namespace

ClusterPartition cluster(const ContextSet& cs, int l_init, std::uint64_t seed) {
  const int n = static_cast<int>(cs.contexts.rows());
  const int dim = static_cast<int>(cs.contexts.cols());
  if (l_init < 1) throw std::invalid_argument("cluster: l_init must be >= 1");
  const int l0 = std::min(l_init, n);

  // Greedy farthest-point seeding: random first centroid, then repeatedly
  // the point with maximal distance to the chosen set (ties: lowest index).
  Rng rng(seed);
  Matrix centroids(l0, dim);
  centroids.row(0) = cs.contexts.row(static_cast<int>(rng.next_u64() % n));
  std::vector<double> min_d(n, std::numeric_limits<double>::infinity());
  for (int c = 1; c < l0; ++c) {
    int best = 0;
    double best_d = -1.0;
    for (int i = 0; i < n; ++i) {
      min_d[i] = std::min(min_d[i], sq_dist(cs.contexts, i, centroids, c - 1));
      if (min_d[i] > best_d) {
        best_d = min_d[i];
        best = i;
      }
    }
    centroids.row(c) = cs.contexts.row(best);
  }

  std::vector<int> labels(n, 0);
  int l_count = l0;
  constexpr int kMaxIters = 100;
  constexpr double kShiftTol = 1e-6;
  for (int iter = 0; iter < kMaxIters; ++iter) {
    std::vector<int> counts(l_count, 0);
    Matrix sums = Matrix::Zero(l_count, dim);
    for (int i = 0; i < n; ++i) {
      int best = 0;
      double best_d = sq_dist(cs.contexts, i, centroids, 0);
      for (int c = 1; c < l_count; ++c) {
        const double d = sq_dist(cs.contexts, i, centroids, c);
        if (d < best_d) {
          best_d = d;
          best = c;
        }
      }
      labels[i] = best;
      counts[best]++;
      sums.row(best) += cs.contexts.row(i);
    }

    // Drop empty clusters and compact the label space.
    std::vector<int> remap(l_count, -1);
    int live = 0;
    for (int c = 0; c < l_count; ++c) {
      if (counts[c] > 0) remap[c] = live++;
    }
    Matrix next(live, dim);
    double shift = 0.0;
    for (int c = 0; c < l_count; ++c) {
      if (remap[c] < 0) continue;
      next.row(remap[c]) = sums.row(c) / counts[c];
      shift = std::max(shift, (next.row(remap[c]) - centroids.row(c)).norm());
    }
    for (int i = 0; i < n; ++i) labels[i] = remap[labels[i]];
    const bool dropped = live != l_count;
    centroids = std::move(next);
    l_count = live;
    if (!dropped && shift < kShiftTol) break;
  }

  ClusterPartition part;
  part.labels = std::move(labels);
  part.l_count = l_count;
  part.centroids = std::move(centroids);
  part.denoise_lists.resize(l_count);
  for (int i = 0; i < n; ++i) part.denoise_lists[part.labels[i]].push_back(i);
  part.fit_lists = part.denoise_lists;
  return part;
}

ClusterPartition augment_clusters(const ClusterPartition& part,
                                  const ContextSet& cs, int t_min) {
  if (t_min < 1) throw std::invalid_argument("augment_clusters: T must be >= 1");
  const int n = static_cast<int>(cs.contexts.rows());
  ClusterPartition out = part;
  const int target = std::min(t_min, n);

  for (int l = 0; l < out.l_count; ++l) {
    const int need = target - static_cast<int>(out.denoise_lists[l].size());
    if (need <= 0) continue;

    std::vector<std::pair<double, int>> outside;
    outside.reserve(n);
    for (int i = 0; i < n; ++i) {
      if (out.labels[i] == l) continue;
      outside.emplace_back(sq_dist(cs.contexts, i, out.centroids, l), i);
    }
    std::partial_sort(outside.begin(), outside.begin() + need, outside.end());

    auto& fit = out.fit_lists[l];
    fit = out.denoise_lists[l];
    for (int b = 0; b < need; ++b) fit.push_back(outside[b].second);
  }
  return out;
}

namespace {

// Shared by the universal and single-cluster pipelines so the l_init = 1
// case reduces to the plain i.i.d. fit bit for bit.
void fit_and_denoise_cluster(const Vector& q, double sigma_v_sq,
                             const EmConfig& em_cfg,
                             const std::vector<int>& fit_list,
                             const std::vector<int>& denoise_list,
                             UniversalResult& result) {
  Vector data(fit_list.size());
  for (std::size_t i = 0; i < fit_list.size(); ++i) data(i) = q(fit_list[i]);

  const EmFitResult fit = em_fit(data, sigma_v_sq, em_cfg);
  const GaussianMixture prior = subtract_noise(fit.gm, sigma_v_sq);
  const GmDenoiser denoiser(prior, sigma_v_sq);

  ClusterDiagnostics diag;
  diag.size = static_cast<int>(denoise_list.size());
  diag.fit_size = static_cast<int>(fit_list.size());
  diag.em_fallback = fit.fallback;
  diag.mixture = prior;
  result.clusters.push_back(std::move(diag));

  for (int j : denoise_list) {
    result.x_hat(j) = denoiser.denoise(q(j));
    result.mean_deriv += denoiser.derivative(q(j));
  }
}

}  // namespace

UniversalResult denoise_universal(const Vector& q, double sigma_v_sq,
                                  const UniversalConfig& cfg,
                                  std::uint64_t seed) {
  const int n = static_cast<int>(q.size());
  if (n <= 2 * cfg.k) throw std::invalid_argument("denoise_universal: need N > 2k");

  UniversalResult result;
  result.x_hat.resize(n);

  const DecayRate dr = decay_rate(q, sigma_v_sq, cfg.b1, cfg.b2);
  result.beta = dr.beta;
  result.low_signal = dr.low_signal;

  const ContextSet weighted = weight_contexts(build_contexts(q, cfg.k), dr.beta);
  ClusterPartition part = cluster(weighted, cfg.l_init, seed);
  part = augment_clusters(part, weighted, cfg.t_min);

  for (int l = 0; l < part.l_count; ++l) {
    fit_and_denoise_cluster(q, sigma_v_sq, cfg.em, part.fit_lists[l],
                            part.denoise_lists[l], result);
  }
  result.mean_deriv /= n;
  return result;
}

UniversalResult denoise_gm_iid(const Vector& q, double sigma_v_sq,
                               const EmConfig& cfg) {
  const int n = static_cast<int>(q.size());
  if (n < 1) throw std::invalid_argument("denoise_gm_iid: empty input");

  UniversalResult result;
  result.x_hat.resize(n);
  std::vector<int> all(n);
  std::iota(all.begin(), all.end(), 0);
  fit_and_denoise_cluster(q, sigma_v_sq, cfg, all, all, result);
  result.mean_deriv /= n;
  return result;
}

DenoiseResult UniversalDenoiser::denoise(const Vector& q,
                                         double sigma_sq) const {
  const UniversalResult r =
      denoise_universal(q, sigma_sq, cfg_, substream_seed(seed_, calls_++));
  return {r.x_hat, r.mean_deriv};
}

DenoiseResult GmIidDenoiser::denoise(const Vector& q, double sigma_sq) const {
  const UniversalResult r = denoise_gm_iid(q, sigma_sq, cfg_);
  return {r.x_hat, r.mean_deriv};
}

}  // namespace ampud
