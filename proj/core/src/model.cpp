#include "ampud/model.hpp"

#include <cmath>
#include <stdexcept>

#include "ampud/rng.hpp"

namespace ampud {

void MarkovSourceSpec::validate() const {
  if (kind == SourceKind::M4) {
    if (!(switch_error >= 0.0 && switch_error < 0.5)) {
      throw std::invalid_argument("M4 switch_error must be in [0, 0.5)");
    }
    return;
  }
  if (!(p01 > 0.0 && p01 < 1.0) || !(p10 > 0.0 && p10 < 1.0)) {
    throw std::invalid_argument("two-state transition probabilities must be in (0, 1)");
  }
}

double MarkovSourceSpec::second_moment() const {
  switch (kind) {
    case SourceKind::MConst:
      return stationary_nonzero();
    case SourceKind::MUnif:
      return stationary_nonzero() / 3.0;  // E[U^2] = 1/3 on [0,1]
    case SourceKind::MRad:
      return stationary_nonzero();
    case SourceKind::M4:
      return 1.0;
  }
  return 0.0;
}

Matrix gen_matrix(int m, int n, std::uint64_t seed) {
  if (m < 1 || n < 1) throw std::invalid_argument("gen_matrix: dimensions must be >= 1");
  Rng rng(seed);
  Matrix a(m, n);
  const double sd = 1.0 / std::sqrt(static_cast<double>(m));
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < m; ++i) {
      a(i, j) = sd * rng.normal();
    }
  }
  return a;
}

Vector measure(const Matrix& a, const Vector& x, double sigma_z_sq,
               std::uint64_t seed) {
  if (a.cols() != x.size()) throw std::invalid_argument("measure: dimension mismatch");
  if (sigma_z_sq < 0.0) throw std::invalid_argument("measure: negative noise variance");
  Vector y = a * x;
  if (sigma_z_sq > 0.0) {
    Rng rng(seed);
    const double sd = std::sqrt(sigma_z_sq);
    for (int i = 0; i < y.size(); ++i) y(i) += sd * rng.normal();
  }
  return y;
}

Vector gen_sparse_laplace(int n, std::uint64_t seed) {
  if (n < 1) throw std::invalid_argument("gen_sparse_laplace: n must be >= 1");
  Rng rng(seed);
  Vector x = Vector::Zero(n);
  const double scale = 1.0 / std::sqrt(2.0);  // Var = 2 b^2 = 1
  for (int i = 0; i < n; ++i) {
    if (rng.bernoulli(0.03)) x(i) = rng.laplace(scale);
  }
  return x;
}

Vector gen_two_state_markov(int n, const MarkovSourceSpec& spec,
                            std::uint64_t seed,
                            std::optional<bool> force_initial_nonzero) {
  if (n < 1) throw std::invalid_argument("gen_two_state_markov: n must be >= 1");
  if (spec.kind == SourceKind::M4) {
    throw std::invalid_argument("gen_two_state_markov: use gen_m4 for M4 sources");
  }
  spec.validate();
  Rng rng(seed);
  Vector x(n);
  bool nonzero = force_initial_nonzero
                     ? *force_initial_nonzero
                     : rng.bernoulli(spec.stationary_nonzero());
  for (int i = 0; i < n; ++i) {
    if (i > 0) {
      nonzero = nonzero ? !rng.bernoulli(spec.p10) : rng.bernoulli(spec.p01);
    }
    if (!nonzero) {
      x(i) = 0.0;
      continue;
    }
    switch (spec.kind) {
      case SourceKind::MConst: x(i) = 1.0; break;
      case SourceKind::MUnif:  x(i) = rng.uniform(); break;
      case SourceKind::MRad:   x(i) = rng.bernoulli(0.5) ? 1.0 : -1.0; break;
      default: break;
    }
  }
  return x;
}

// Pattern-following successor of the pair (prev, cur) in +1,+1,-1,-1,...
static double m4_pattern_next(double prev, double cur) {
  return prev == cur ? -cur : cur;
}

Vector gen_m4(int n, double switch_error, std::uint64_t seed) {
  if (n < 1) throw std::invalid_argument("gen_m4: n must be >= 1");
  if (!(switch_error >= 0.0 && switch_error < 0.5)) {
    throw std::invalid_argument("gen_m4: switch_error must be in [0, 0.5)");
  }
  Rng rng(seed);
  Vector x(n);
  // Stationary start: the four value pairs are equiprobable.
  double prev = rng.bernoulli(0.5) ? 1.0 : -1.0;
  x(0) = rng.bernoulli(0.5) ? 1.0 : -1.0;
  for (int i = 1; i < n; ++i) {
    double next = m4_pattern_next(prev, x(i - 1));
    if (rng.bernoulli(switch_error)) next = -next;
    prev = x(i - 1);
    x(i) = next;
  }
  return x;
}

double snr_db(const Vector& x, int m, double sigma_z_sq) {
  if (m < 1) throw std::invalid_argument("snr_db: m must be >= 1");
  if (!(sigma_z_sq > 0.0)) throw std::invalid_argument("snr_db: noise variance must be > 0");
  const double e_x2 = x.squaredNorm() / x.size();
  return 10.0 * std::log10(x.size() * e_x2 / (m * sigma_z_sq));
}

double noise_var_for_snr(double e_x2, int n, int m, double snr_db) {
  if (m < 1 || n < 1) throw std::invalid_argument("noise_var_for_snr: bad dimensions");
  return n * e_x2 / (m * std::pow(10.0, snr_db / 10.0));
}

double sdr_db(const Vector& x_true, const Vector& x_hat) {
  if (x_true.size() != x_hat.size()) throw std::invalid_argument("sdr_db: length mismatch");
  const double e_x2 = x_true.squaredNorm() / x_true.size();
  const double err = mse(x_true, x_hat);
  if (err == 0.0) return std::numeric_limits<double>::infinity();
  return 10.0 * std::log10(e_x2 / err);
}

std::string to_string(SourceKind kind) {
  switch (kind) {
    case SourceKind::MConst: return "mconst";
    case SourceKind::MUnif:  return "munif";
    case SourceKind::MRad:   return "mrad";
    case SourceKind::M4:     return "m4";
  }
  return "?";
}

}  // namespace ampud
