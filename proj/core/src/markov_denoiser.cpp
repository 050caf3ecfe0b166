#include "ampud/markov_denoiser.hpp"

#include <cmath>
#include <stdexcept>

#include "ampud/numerics.hpp"
#include "ampud/rng.hpp"

namespace ampud {

WindowModel::WindowModel(const MarkovSourceSpec& spec, int k)
    : spec_(spec), k_(k) {
  if (k < 0) throw std::invalid_argument("WindowModel: k must be >= 0");
  spec_.validate();
  switch (spec_.kind) {
    case SourceKind::MConst:
      alphabet_ = {0.0, 1.0};
      break;
    case SourceKind::M4:
      alphabet_ = {-1.0, 1.0};
      break;
    default:
      throw std::invalid_argument("WindowModel: only MConst and M4 have window denoisers");
  }
}

// Window priors, Markov-chain factored. MConst: stationary(first) times
// first-order transitions. M4: uniform pair marginal times second-order
// pattern transitions (pattern-following value with prob 1 - switch_error).
WindowModel::Table WindowModel::build_table(int len) const {
  Table t;
  const std::size_t count = std::size_t{1} << len;
  t.codes.resize(count);
  t.log_prior.resize(count);

  const bool mconst = spec_.kind == SourceKind::MConst;
  const double p1 = mconst ? spec_.stationary_nonzero() : 0.5;
  const double eps = spec_.switch_error;

  for (std::size_t code = 0; code < count; ++code) {
    t.codes[code] = static_cast<std::uint32_t>(code);
    auto sym = [&](int i) { return static_cast<int>((code >> i) & 1u); };
    double lp;
    if (mconst) {
      lp = std::log(sym(0) ? p1 : 1.0 - p1);
      for (int i = 1; i < len; ++i) {
        const double p = sym(i - 1) ? (sym(i) ? 1.0 - spec_.p10 : spec_.p10)
                                    : (sym(i) ? spec_.p01 : 1.0 - spec_.p01);
        lp += std::log(p);
      }
    } else {
      lp = len >= 2 ? std::log(0.25) : std::log(0.5);
      for (int i = 2; i < len; ++i) {
        const double a = alphabet_[sym(i - 2)];
        const double b = alphabet_[sym(i - 1)];
        const double pattern = (a == b) ? -b : b;
        const double p = (alphabet_[sym(i)] == pattern) ? 1.0 - eps : eps;
        lp += std::log(p);
      }
    }
    t.log_prior[code] = lp;
  }
  return t;
}

const WindowModel::Table& WindowModel::table(int len) const {
  auto it = tables_.find(len);
  if (it == tables_.end()) it = tables_.emplace(len, build_table(len)).first;
  return it->second;
}

double WindowModel::prior_total() const {
  const Table& t = table(2 * k_ + 1);
  double total = 0.0;
  for (double lp : t.log_prior) total += std::exp(lp);
  return total;
}

WindowModel::CenterStats WindowModel::center_posterior(const double* q, int len,
                                                       int center,
                                                       double sigma_v_sq) const {
  if (!(sigma_v_sq > 0.0)) {
    throw std::invalid_argument("WindowModel: sigma_v_sq must be > 0");
  }
  const Table& t = table(len);

  // Per-position log-likelihood of each alphabet symbol.
  const double log_norm = -0.5 * (kLogTwoPi + std::log(sigma_v_sq));
  const double inv2s = 0.5 / sigma_v_sq;
  double ll[2][32];
  for (int i = 0; i < len; ++i) {
    for (int s = 0; s < 2; ++s) {
      const double d = q[i] - alphabet_[s];
      ll[s][i] = log_norm - d * d * inv2s;
    }
  }

  double log_joint[2] = {-std::numeric_limits<double>::infinity(),
                         -std::numeric_limits<double>::infinity()};
  double max_term[2] = {log_joint[0], log_joint[1]};
  // First pass for the max (per center symbol), second for the stable sum.
  std::vector<double> terms(t.codes.size());
  for (std::size_t w = 0; w < t.codes.size(); ++w) {
    const std::uint32_t code = t.codes[w];
    double v = t.log_prior[w];
    for (int i = 0; i < len; ++i) v += ll[(code >> i) & 1u][i];
    terms[w] = v;
    const int cs = (code >> center) & 1u;
    if (v > max_term[cs]) max_term[cs] = v;
  }
  double acc[2] = {0.0, 0.0};
  for (std::size_t w = 0; w < t.codes.size(); ++w) {
    const int cs = (t.codes[w] >> center) & 1u;
    acc[cs] += std::exp(terms[w] - max_term[cs]);
  }
  for (int s = 0; s < 2; ++s) {
    log_joint[s] = acc[s] > 0.0 ? max_term[s] + std::log(acc[s]) : max_term[s];
  }

  const double log_z = log_sum_exp(log_joint[0], log_joint[1]);
  const double pi1 = std::exp(log_joint[1] - log_z);
  const double pi0 = 1.0 - pi1;
  const double mean = pi0 * alphabet_[0] + pi1 * alphabet_[1];
  const double second = pi0 * alphabet_[0] * alphabet_[0] +
                        pi1 * alphabet_[1] * alphabet_[1];
  return {mean, std::max(0.0, second - mean * mean), log_z};
}

static void check_full_window(const Vector& q_win, int k) {
  if (q_win.size() != 2 * k + 1) {
    throw std::invalid_argument("WindowModel: window must have length 2k+1");
  }
}

double WindowModel::joint_density(const Vector& q_win, double sigma_v_sq,
                                  double center_value) const {
  check_full_window(q_win, k_);
  int s = -1;
  for (std::size_t i = 0; i < alphabet_.size(); ++i) {
    if (alphabet_[i] == center_value) s = static_cast<int>(i);
  }
  if (s < 0) throw std::invalid_argument("WindowModel: center value not in alphabet");

  // Same grouping as center_posterior, restricted to one center symbol.
  const int len = 2 * k_ + 1;
  const Table& t = table(len);
  const double log_norm = -0.5 * (kLogTwoPi + std::log(sigma_v_sq));
  const double inv2s = 0.5 / sigma_v_sq;
  std::vector<double> terms;
  terms.reserve(t.codes.size() / 2 + 1);
  for (std::size_t w = 0; w < t.codes.size(); ++w) {
    const std::uint32_t code = t.codes[w];
    if (static_cast<int>((code >> k_) & 1u) != s) continue;
    double v = t.log_prior[w];
    for (int i = 0; i < len; ++i) {
      const double d = q_win[i] - alphabet_[(code >> i) & 1u];
      v += log_norm - d * d * inv2s;
    }
    terms.push_back(v);
  }
  return std::exp(log_sum_exp(terms));
}

double WindowModel::marginal_density(const Vector& q_win,
                                     double sigma_v_sq) const {
  check_full_window(q_win, k_);
  const CenterStats cs = center_posterior(q_win.data(), 2 * k_ + 1, k_, sigma_v_sq);
  return std::exp(cs.log_marginal);
}

double WindowModel::eta(const Vector& q_win, double sigma_v_sq) const {
  check_full_window(q_win, k_);
  return center_posterior(q_win.data(), 2 * k_ + 1, k_, sigma_v_sq).mean;
}

double WindowModel::eta_deriv(const Vector& q_win, double sigma_v_sq) const {
  check_full_window(q_win, k_);
  const CenterStats cs = center_posterior(q_win.data(), 2 * k_ + 1, k_, sigma_v_sq);
  return cs.var / sigma_v_sq;
}

DenoiseResult WindowModel::denoise_sequence(const Vector& q,
                                            double sigma_v_sq) const {
  const int n = static_cast<int>(q.size());
  if (n <= 2 * k_) {
    throw std::invalid_argument("denoise_sequence: need N > 2k");
  }
  DenoiseResult out;
  out.x_hat.resize(n);
  double deriv_sum = 0.0;
  for (int j = 0; j < n; ++j) {
    const int lo = std::max(0, j - k_);
    const int hi = std::min(n - 1, j + k_);
    const CenterStats cs =
        center_posterior(q.data() + lo, hi - lo + 1, j - lo, sigma_v_sq);
    out.x_hat(j) = cs.mean;
    deriv_sum += cs.var / sigma_v_sq;
  }
  out.mean_deriv = deriv_sum / n;
  return out;
}

Vector WindowModel::sample_window(Rng& rng) const {
  const int len = 2 * k_ + 1;
  Vector x(len);
  if (spec_.kind == SourceKind::MConst) {
    bool nonzero = rng.bernoulli(spec_.stationary_nonzero());
    x(0) = nonzero ? 1.0 : 0.0;
    for (int i = 1; i < len; ++i) {
      nonzero = nonzero ? !rng.bernoulli(spec_.p10) : rng.bernoulli(spec_.p01);
      x(i) = nonzero ? 1.0 : 0.0;
    }
  } else {
    double prev = rng.bernoulli(0.5) ? 1.0 : -1.0;
    x(0) = rng.bernoulli(0.5) ? 1.0 : -1.0;
    for (int i = 1; i < len; ++i) {
      const double a = prev, b = x(i - 1);
      double next = (a == b) ? -b : b;
      if (rng.bernoulli(spec_.switch_error)) next = -next;
      prev = b;
      x(i) = next;
    }
  }
  return x;
}

double WindowModel::window_mse(double sigma_v_sq, int n_mc,
                               std::uint64_t seed) const {
  if (n_mc < 1) throw std::invalid_argument("window_mse: n_mc must be >= 1");
  if (!(sigma_v_sq > 0.0)) return 0.0;

  if (k_ == 0) {
    // E[Var(x|q)] by quadrature over the scalar channel output.
    const double p1 = spec_.kind == SourceKind::MConst
                          ? spec_.stationary_nonzero()
                          : 0.5;
    const double a0 = alphabet_[0], a1 = alphabet_[1];
    const double sd = std::sqrt(sigma_v_sq);
    auto integrand = [&](double q) {
      const double f0 = (1.0 - p1) * normal_pdf(q, a0, sigma_v_sq);
      const double f1 = p1 * normal_pdf(q, a1, sigma_v_sq);
      const double z = f0 + f1;
      if (z <= 0.0) return 0.0;
      const double mean = (f0 * a0 + f1 * a1) / z;
      const double second = (f0 * a0 * a0 + f1 * a1 * a1) / z;
      return (second - mean * mean) * z;
    };
    const double lo = std::min(a0, a1) - 10.0 * sd;
    const double hi = std::max(a0, a1) + 10.0 * sd;
    return adaptive_simpson(integrand, lo, hi, 1e-13);
  }

  Rng rng(seed);
  const int len = 2 * k_ + 1;
  const double sd = std::sqrt(sigma_v_sq);
  Vector q(len);
  double acc = 0.0;
  for (int it = 0; it < n_mc; ++it) {
    const Vector x = sample_window(rng);
    for (int i = 0; i < len; ++i) q(i) = x(i) + sd * rng.normal();
    const double e = center_posterior(q.data(), len, k_, sigma_v_sq).mean;
    const double d = x(k_) - e;
    acc += d * d;
  }
  return acc / n_mc;
}

}  // namespace ampud
