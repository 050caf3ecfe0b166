#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "ampud/gm.hpp"
#include "ampud/numerics.hpp"
#include "ampud/rng.hpp"

using namespace ampud;

TEST_SUITE_BEGIN("gm");

TEST_CASE("GaussianMixture: pdf, moments, JSON round trip") {
  GaussianMixture gm;
  gm.components = {{0.25, -1.0, 0.5}, {0.75, 2.0, 1.5}};
  CHECK(gm.pdf(0.3) == doctest::Approx(0.25 * normal_pdf(0.3, -1.0, 0.5) +
                                       0.75 * normal_pdf(0.3, 2.0, 1.5))
                           .epsilon(1e-13));
  CHECK(gm.mean() == doctest::Approx(0.25 * -1.0 + 0.75 * 2.0).epsilon(1e-14));
  CHECK(gm.second_moment() ==
        doctest::Approx(0.25 * (0.5 + 1.0) + 0.75 * (1.5 + 4.0)).epsilon(1e-14));

  const GaussianMixture back = GaussianMixture::from_json(gm.to_json());
  REQUIRE(back.size() == 2);
  for (int s = 0; s < 2; ++s) {
    CHECK(back.components[s].alpha == gm.components[s].alpha);
    CHECK(back.components[s].mu == gm.components[s].mu);
    CHECK(back.components[s].sigma_sq == gm.components[s].sigma_sq);
  }
}

TEST_CASE("init_components: constant data seeds exactly one mean") {
  EmConfig cfg;
  cfg.sigma_init_sq = 1.0;
  const GaussianMixture gm = init_components(Vector::Constant(50, 3.0), cfg);
  CHECK(gm.size() == 1);
  CHECK(gm.components[0].mu == 3.0);
  CHECK(gm.components[0].alpha == 1.0);
}

TEST_CASE("init_components: sparse binary data seeds means near 0 and 1") {
  Vector data(100);
  data.setZero();
  data(17) = 1.0;
  data(42) = 1.0;
  EmConfig cfg;  // sigma_init_sq = 0 -> sample variance (covers the spread)
  const GaussianMixture gm = init_components(data, cfg);
  bool near_zero = false, near_one = false;
  for (const auto& c : gm.components) {
    if (std::fabs(c.mu) < 0.05) near_zero = true;
    if (std::fabs(c.mu - 1.0) < 0.05) near_one = true;
  }
  CHECK(near_zero);
  CHECK(near_one);
}

TEST_CASE("init_components: nothing farther than the threshold adds nothing") {
  Vector data(4);
  data << 0.0, 0.01, -0.01, 0.005;
  EmConfig cfg;
  cfg.sigma_init_sq = 100.0;  // 0.1 * sigma_init = 1 >> data spread
  const GaussianMixture gm = init_components(data, cfg);
  CHECK(gm.size() == 1);
}

TEST_CASE("init_components: component count capped at s_max") {
  Rng rng(3);
  Vector data(500);
  for (int i = 0; i < 500; ++i) data(i) = 10.0 * rng.normal();
  EmConfig cfg;
  cfg.s_max = 7;
  cfg.sigma_init_sq = 1e-4;  // tiny threshold: everything wants a component
  const GaussianMixture gm = init_components(data, cfg);
  CHECK(gm.size() == 7);
  CHECK_THROWS_AS(init_components(Vector(), cfg), std::invalid_argument);
}

TEST_CASE("em_fit: single Gaussian recovered from samples") {
  const int n = 10000;
  Rng rng(11);
  Vector data(n);
  for (int i = 0; i < n; ++i) data(i) = 3.0 + std::sqrt(2.0) * rng.normal();
  const EmFitResult fit = em_fit(data, 1.0, EmConfig{});
  REQUIRE(fit.gm.size() == 1);
  CHECK(!fit.fallback);
  CHECK(fit.gm.components[0].mu > 2.9);
  CHECK(fit.gm.components[0].mu < 3.1);
  CHECK(fit.gm.components[0].sigma_sq > 1.8);
  CHECK(fit.gm.components[0].sigma_sq < 2.2);
}

TEST_CASE("em_fit: planted two-component mixture recovered") {
  const int n = 10000;
  Rng rng(12);
  Vector data(n);
  for (int i = 0; i < n; ++i) {
    const double mu = rng.bernoulli(0.5) ? 2.0 : -2.0;
    data(i) = mu + rng.normal();
  }
  const EmFitResult fit = em_fit(data, 0.0, EmConfig{});
  REQUIRE(fit.gm.size() == 2);
  std::vector<double> mus{fit.gm.components[0].mu, fit.gm.components[1].mu};
  std::sort(mus.begin(), mus.end());
  CHECK(mus[0] == doctest::Approx(-2.0).epsilon(0.075));
  CHECK(mus[1] == doctest::Approx(2.0).epsilon(0.075));
  for (const auto& c : fit.gm.components) {
    CHECK(c.alpha == doctest::Approx(0.5).epsilon(0.1));
  }
}

TEST_CASE("em_fit: postconditions hold for arbitrary data") {
  Rng rng(13);
  for (int rep = 0; rep < 5; ++rep) {
    Vector data(800);
    for (int i = 0; i < 800; ++i) {
      data(i) = rng.bernoulli(0.3) ? 1.0 + 0.3 * rng.normal()
                                   : 0.2 * rng.normal();
    }
    const double sigma_v_sq = 0.04;
    const EmFitResult fit = em_fit(data, sigma_v_sq, EmConfig{});
    double total = 0.0;
    for (const auto& c : fit.gm.components) {
      CHECK(c.alpha > 0.0);
      CHECK(c.sigma_sq >= sigma_v_sq);
      total += c.alpha;
    }
    CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("em_fit: constant data falls back to a floored single component") {
  const Vector data = Vector::Constant(100, 2.0);
  const EmFitResult fit = em_fit(data, 1.0, EmConfig{});
  // Sample variance 0 < 0.9 sigma_v_sq: the only component is annihilated
  // and the fallback takes over with the floored variance.
  CHECK(fit.fallback);
  REQUIRE(fit.gm.size() == 1);
  CHECK(fit.gm.components[0].mu == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(fit.gm.components[0].sigma_sq == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("subtract_noise: exact deconvolution with deltas allowed") {
  GaussianMixture gm;
  gm.components = {{0.6, 0.0, 0.25}, {0.4, 1.0, 1.25}};
  const GaussianMixture clean = subtract_noise(gm, 0.25);
  CHECK(clean.components[0].sigma_sq == 0.0);  // point mass
  CHECK(clean.components[1].sigma_sq == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(clean.components[0].alpha == 0.6);
  CHECK(clean.components[1].mu == 1.0);

  GaussianMixture bad;
  bad.components = {{1.0, 0.0, 0.1}};
  CHECK_THROWS_AS(subtract_noise(bad, 0.25), std::invalid_argument);
}

TEST_SUITE_END();
