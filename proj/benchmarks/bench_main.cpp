#include <benchmark/benchmark.h>

#include "ampud/amp.hpp"
#include "ampud/gm.hpp"
#include "ampud/gm_denoiser.hpp"
#include "ampud/harness.hpp"
#include "ampud/markov_denoiser.hpp"
#include "ampud/rng.hpp"
#include "ampud/sparse_laplace.hpp"
#include "ampud/universal.hpp"

using namespace ampud;

namespace {

LinearSystem make_system(int m, int n, std::uint64_t seed, Vector* x_out) {
  ExperimentConfig cfg;
  cfg.family = SignalFamily::SparseLaplace;
  cfg.n = n;
  Vector x = gen_signal(cfg, substream_seed(seed, 0));
  LinearSystem sys;
  sys.A = gen_matrix(m, n, substream_seed(seed, 1));
  sys.sigma_z_sq = noise_var_for_snr(cfg.source_second_moment(), n, m, 10.0);
  sys.y = measure(sys.A, x, sys.sigma_z_sq, substream_seed(seed, 2));
  if (x_out) *x_out = std::move(x);
  return sys;
}

void BM_AmpStep(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const int m = n / 5;
  LinearSystem sys = make_system(m, n, 7, nullptr);
  SparseLaplaceDenoiser denoiser;
  AmpState s = AmpState::initial(n);
  for (auto _ : state) {
    s = amp_step(sys, s, denoiser, 0.1);
    benchmark::DoNotOptimize(s.x.data());
  }
}
BENCHMARK(BM_AmpStep)->Arg(1000)->Arg(5000);

void BM_WindowDenoiser(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  ExperimentConfig cfg;
  cfg.family = SignalFamily::MConst;
  cfg.n = n;
  Vector x = gen_signal(cfg, 11);
  Rng rng(12);
  Vector q = x;
  for (int i = 0; i < n; ++i) q[i] += 0.3 * rng.normal();
  WindowModel model(MarkovSourceSpec::mconst(), 1);
  for (auto _ : state) {
    auto out = model.denoise_sequence(q, 0.09);
    benchmark::DoNotOptimize(out.x_hat.data());
  }
}
BENCHMARK(BM_WindowDenoiser)->Arg(1000)->Arg(10000);

void BM_EmFit(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  Rng rng(21);
  Vector q(n);
  for (int i = 0; i < n; ++i) {
    const double x = rng.uniform() < 0.3 ? 1.0 + 0.2 * rng.normal() : 0.0;
    q[i] = x + 0.3 * rng.normal();
  }
  EmConfig em;
  for (auto _ : state) {
    auto fit = em_fit(q, 0.09, em);
    benchmark::DoNotOptimize(fit.gm.components.data());
  }
}
BENCHMARK(BM_EmFit)->Arg(256)->Arg(2000);

void BM_KMeans(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  ExperimentConfig cfg;
  cfg.family = SignalFamily::MConst;
  cfg.n = n;
  Vector x = gen_signal(cfg, 31);
  Rng noise(32);
  Vector q = x;
  for (int i = 0; i < n; ++i) q[i] += 0.3 * noise.normal();
  ContextSet ctx = build_contexts(q, 6);
  ContextSet weighted = weight_contexts(ctx, 0.4);
  for (auto _ : state) {
    auto part = cluster(weighted, 10, 33);
    benchmark::DoNotOptimize(part.labels.data());
  }
}
BENCHMARK(BM_KMeans)->Arg(1000)->Arg(5000);

void BM_GmDenoiser(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  GaussianMixture prior;
  prior.components = {{0.7, 0.0, 0.0}, {0.2, 1.0, 0.04}, {0.1, -2.0, 0.25}};
  GmDenoiser denoiser(prior, 0.09);
  Rng rng(41);
  Vector q(n);
  for (int i = 0; i < n; ++i) q[i] = 2.0 * rng.normal();
  for (auto _ : state) {
    DenoiseResult out = denoiser.denoise_vector(q);
    benchmark::DoNotOptimize(out.x_hat.data());
  }
}
BENCHMARK(BM_GmDenoiser)->Arg(1000)->Arg(10000);

}  // namespace

BENCHMARK_MAIN();
