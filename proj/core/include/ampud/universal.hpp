#pragma once

#include <cstdint>
#include <vector>

#include "ampud/amp.hpp"
#include "ampud/gm.hpp"
#include "ampud/gm_denoiser.hpp"

namespace ampud {

/// Per-symbol contexts: the 2k noisy symbols surrounding (and excluding)
/// each symbol, optionally weighted by an exponential decay profile.
struct ContextSet {
  Matrix contexts;  // N x 2k, one row per symbol
  Vector weights;   // length 2k (all ones until weighted)
  int k = 0;
};

/// Contexts for every index; boundary rows use edge-mirrored symbols so all
/// N symbols get a context. Requires N > 2k.
ContextSet build_contexts(const Vector& q, int k);

struct DecayRate {
  double beta;
  bool low_signal = false;  // ||q||^2/N did not exceed sigma_v_sq
};

/// beta = b1 log10(sigma_v_sq / (||q||^2/N - sigma_v_sq)) + b2, clamped to
/// [0.01, 0.99]; the log argument is floored at 1e-3 when the signal energy
/// estimate is non-positive.
DecayRate decay_rate(const Vector& q, double sigma_v_sq, double b1, double b2);

/// Exponential decay weights: unit weight adjacent to the center, decaying
/// with distance; applied as an element-wise product on every context row.
ContextSet weight_contexts(const ContextSet& cs, double beta);

struct ClusterPartition {
  std::vector<int> labels;  // per-symbol cluster id in [0, L)
  int l_count = 0;
  Matrix centroids;  // L x 2k
  std::vector<std::vector<int>> denoise_lists;  // member indices per cluster
  std::vector<std::vector<int>> fit_lists;      // members + borrowed symbols
};

/// Lloyd k-means over context rows, greedy farthest-point initialization,
/// deterministic given seed; empty clusters are dropped (L <= l_init).
ClusterPartition cluster(const ContextSet& cs, int l_init, std::uint64_t seed);

/// Pads each cluster's fit list to at least min(T, N) symbols using the
/// outside contexts closest to the cluster centroid. Denoise lists are
/// untouched: borrowed symbols are used only for density learning.
ClusterPartition augment_clusters(const ClusterPartition& part,
                                  const ContextSet& cs, int t_min);

struct UniversalConfig {
  int k = 6;        // context size 2k = 12
  int l_init = 10;  // initial cluster count
  int t_min = 256;  // minimum symbols per density fit
  double b1 = 0.1;  // decay-rate coefficients (config-exposed; tuned, see
  double b2 = 0.3;  // the tune-beta CLI verb)
  EmConfig em;
};

struct ClusterDiagnostics {
  int size = 0;
  int fit_size = 0;
  bool em_fallback = false;
  GaussianMixture mixture;  // clean-signal prior for this cluster
};

struct UniversalResult {
  Vector x_hat;
  double mean_deriv = 0.0;  // over all N coordinates
  double beta = 0.0;
  bool low_signal = false;
  std::vector<ClusterDiagnostics> clusters;
};

/// Full pipeline: build -> weight -> cluster -> augment; per cluster an EM
/// Gaussian-mixture fit of the noisy values, noise-variance subtraction, and
/// conditional-expectation denoising of the cluster's own members.
UniversalResult denoise_universal(const Vector& q, double sigma_v_sq,
                                  const UniversalConfig& cfg,
                                  std::uint64_t seed);

/// Degenerate single-cluster pipeline: one mixture fit over the whole
/// sequence, then i.i.d. denoising. Equals denoise_universal with l_init = 1.
UniversalResult denoise_gm_iid(const Vector& q, double sigma_v_sq,
                               const EmConfig& cfg);

/// Denoiser-contract adapter. Clustering seeds advance deterministically per
/// call so a reconstruction run is reproducible end to end.
class UniversalDenoiser final : public Denoiser {
 public:
  UniversalDenoiser(UniversalConfig cfg, std::uint64_t seed)
      : cfg_(std::move(cfg)), seed_(seed) {}

  DenoiseResult denoise(const Vector& q, double sigma_sq) const override;

 private:
  UniversalConfig cfg_;
  std::uint64_t seed_;
  mutable std::uint64_t calls_ = 0;
};

/// Known-nothing i.i.d. denoiser: mixture fit plus conditional expectation.
class GmIidDenoiser final : public Denoiser {
 public:
  explicit GmIidDenoiser(EmConfig cfg = {}) : cfg_(std::move(cfg)) {}

  DenoiseResult denoise(const Vector& q, double sigma_sq) const override;

 private:
  EmConfig cfg_;
};

}  // namespace ampud
