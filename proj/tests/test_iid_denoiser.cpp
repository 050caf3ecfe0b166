#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "ampud/gm_denoiser.hpp"
#include "ampud/numerics.hpp"
#include "ampud/rng.hpp"

using namespace ampud;

namespace {

GaussianMixture three_component() {
  GaussianMixture gm;
  gm.components = {{0.5, 0.0, 0.04}, {0.3, 1.2, 0.5}, {0.2, -2.0, 1.0}};
  return gm;
}

// Quadrature conditional expectation and variance under a positive-variance
// mixture prior: E[x^m | q] = Int x^m N(q; x, v) p(x) dx / Int N(q; x, v) p(x) dx.
struct QuadPosterior {
  double mean;
  double var;
};

QuadPosterior quad_posterior(const GaussianMixture& prior, double q, double v) {
  auto density = [&](double x) { return normal_pdf(q, x, v) * prior.pdf(x); };
  double lo = 1e300, hi = -1e300;
  for (const auto& c : prior.components) {
    lo = std::min(lo, c.mu - 12.0 * std::sqrt(c.sigma_sq + v));
    hi = std::max(hi, c.mu + 12.0 * std::sqrt(c.sigma_sq + v));
  }
  lo = std::min(lo, q - 12.0 * std::sqrt(v));
  hi = std::max(hi, q + 12.0 * std::sqrt(v));
  // Piecewise integration split at every density peak (component means and
  // the likelihood center) keeps the adaptive rule from skipping mass.
  std::vector<double> breaks{lo, hi, q};
  for (const auto& c : prior.components) breaks.push_back(c.mu);
  std::sort(breaks.begin(), breaks.end());
  auto integrate = [&](auto&& f) {
    double acc = 0.0;
    for (std::size_t i = 1; i < breaks.size(); ++i) {
      const double a = std::clamp(breaks[i - 1], lo, hi);
      const double b = std::clamp(breaks[i], lo, hi);
      if (b > a) acc += adaptive_simpson(f, a, b, 1e-15);
    }
    return acc;
  };
  const double z = integrate(density);
  const double m1 = integrate([&](double x) { return x * density(x); });
  const double m2 = integrate([&](double x) { return x * x * density(x); });
  return {m1 / z, m2 / z - (m1 / z) * (m1 / z)};
}

}  // namespace

TEST_SUITE_BEGIN("iid_denoiser");

TEST_CASE("denoise: single-component Wiener rule") {
  GaussianMixture gm;
  gm.components = {{1.0, 0.0, 1.0}};
  const GmDenoiser d(gm, 1.0);
  CHECK(d.denoise(2.0) == doctest::Approx(1.0).epsilon(1e-13));
  CHECK(d.denoise(-3.0) == doctest::Approx(-1.5).epsilon(1e-13));
}

TEST_CASE("denoise: symmetric two-delta prior at the midpoint") {
  GaussianMixture gm;
  gm.components = {{0.5, -1.0, 0.0}, {0.5, 1.0, 0.0}};
  const GmDenoiser d(gm, 1.0);
  CHECK(d.denoise(0.0) == doctest::Approx(0.0).epsilon(1e-13));
  // Degenerate all-delta prior: outputs bounded by [min mu, max mu].
  for (double q : {-50.0, -1.0, 0.3, 7.0}) {
    const double e = d.denoise(q);
    CHECK(e >= -1.0);
    CHECK(e <= 1.0);
  }
}

TEST_CASE("denoise: matches adaptive quadrature on a 3-component prior") {
  const GaussianMixture gm = three_component();
  const double v = 0.3;
  const GmDenoiser d(gm, v);
  for (int i = 0; i <= 100; ++i) {
    const double q = -6.0 + 12.0 * i / 100.0;
    const QuadPosterior ref = quad_posterior(gm, q, v);
    CHECK(std::fabs(d.denoise(q) - ref.mean) < 1e-8);
  }
}

TEST_CASE("derivative: single-component constant 1/2") {
  GaussianMixture gm;
  gm.components = {{1.0, 0.0, 1.0}};
  const GmDenoiser d(gm, 1.0);
  for (double q : {-10.0, -0.5, 0.0, 2.5, 40.0}) {
    CHECK(d.derivative(q) == doctest::Approx(0.5).epsilon(1e-12));
  }
}

TEST_CASE("derivative: matches finite differences at 100 random points") {
  const GaussianMixture gm = three_component();
  const double v = 0.3;
  const GmDenoiser d(gm, v);
  Rng rng(5);
  const double h = 1e-5;
  for (int i = 0; i < 100; ++i) {
    const double q = 4.0 * rng.normal();
    const double fd = (d.denoise(q + h) - d.denoise(q - h)) / (2 * h);
    CHECK(d.derivative(q) == doctest::Approx(fd).epsilon(1e-6));
  }
}

TEST_CASE("derivative: equals posterior variance over noise variance") {
  const GaussianMixture gm = three_component();
  const double v = 0.3;
  const GmDenoiser d(gm, v);
  for (double q : {-4.0, -1.0, 0.0, 0.7, 2.0, 5.0}) {
    const QuadPosterior ref = quad_posterior(gm, q, v);
    CHECK(std::fabs(d.derivative(q) - ref.var / v) < 1e-8);
  }
}

TEST_CASE("denoise_vector: separability and mean derivative") {
  const GaussianMixture gm = three_component();
  const GmDenoiser d(gm, 0.3);

  Vector one(1);
  one << 1.7;
  const DenoiseResult single = d.denoise_vector(one);
  CHECK(single.x_hat(0) == d.denoise(1.7));
  CHECK(single.mean_deriv == doctest::Approx(d.derivative(1.7)).epsilon(1e-14));

  Rng rng(6);
  Vector q(40);
  for (int i = 0; i < 40; ++i) q(i) = 3.0 * rng.normal();
  const DenoiseResult out = d.denoise_vector(q);
  double deriv_sum = 0.0;
  for (int i = 0; i < 40; ++i) {
    CHECK(out.x_hat(i) == d.denoise(q(i)));  // element-wise, order-independent
    deriv_sum += d.derivative(q(i));
  }
  CHECK(out.mean_deriv == doctest::Approx(deriv_sum / 40).epsilon(1e-13));
  CHECK(out.mean_deriv > 0.0);
  CHECK(out.mean_deriv <= 1.0);
}

TEST_CASE("log-domain evaluation: finite far in the tails") {
  const GaussianMixture gm = three_component();
  const GmDenoiser d(gm, 0.5);
  for (double q : {-1e6, -1e4, 1e4, 1e6}) {
    CHECK(std::isfinite(d.denoise(q)));
    CHECK(std::isfinite(d.derivative(q)));
  }
  // As |q| -> infinity the rule approaches the widest component's affine
  // shrinkage: slope sigma_s^2/(sigma_s^2 + v) with sigma_s^2 = 1, v = 0.5.
  const double slope =
      (d.denoise(1e6 + 1.0) - d.denoise(1e6 - 1.0)) / 2.0;
  CHECK(slope == doctest::Approx(1.0 / 1.5).epsilon(1e-4));
}

TEST_CASE("constructor: invalid priors rejected") {
  GaussianMixture bad;
  bad.components = {{0.7, 0.0, 1.0}, {0.2, 1.0, 1.0}};  // weights sum to 0.9
  CHECK_THROWS_AS(GmDenoiser(bad, 1.0), std::invalid_argument);
  GaussianMixture ok;
  ok.components = {{1.0, 0.0, 1.0}};
  CHECK_THROWS_AS(GmDenoiser(ok, 0.0), std::invalid_argument);
}

TEST_SUITE_END();
