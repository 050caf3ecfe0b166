#include "ampud/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <map>
#include <stdexcept>
#include <thread>

#include <json.hpp>

#include "ampud/io.hpp"
#include "ampud/markov_denoiser.hpp"
#include "ampud/rng.hpp"
#include "ampud/sparse_laplace.hpp"

namespace ampud {

using nlohmann::json;

std::string to_string(SignalFamily family) {
  switch (family) {
    case SignalFamily::SparseLaplace: return "sparse_laplace";
    case SignalFamily::MConst:        return "mconst";
    case SignalFamily::MUnif:         return "munif";
    case SignalFamily::MRad:          return "mrad";
    case SignalFamily::M4:            return "m4";
  }
  return "?";
}

std::string to_string(DenoiserKind kind) {
  switch (kind) {
    case DenoiserKind::WindowMConst: return "window_mconst";
    case DenoiserKind::WindowM4:     return "window_m4";
    case DenoiserKind::GmIid:        return "gm_iid";
    case DenoiserKind::Universal:    return "universal";
    case DenoiserKind::LaplaceMmse:  return "laplace_mmse";
  }
  return "?";
}

namespace {

SignalFamily family_from_string(const std::string& s) {
  if (s == "sparse_laplace") return SignalFamily::SparseLaplace;
  if (s == "mconst") return SignalFamily::MConst;
  if (s == "munif") return SignalFamily::MUnif;
  if (s == "mrad") return SignalFamily::MRad;
  if (s == "m4") return SignalFamily::M4;
  throw std::invalid_argument("unknown signal family: " + s);
}

DenoiserKind denoiser_from_string(const std::string& s) {
  if (s == "window_mconst") return DenoiserKind::WindowMConst;
  if (s == "window_m4") return DenoiserKind::WindowM4;
  if (s == "gm_iid") return DenoiserKind::GmIid;
  if (s == "universal") return DenoiserKind::Universal;
  if (s == "laplace_mmse") return DenoiserKind::LaplaceMmse;
  throw std::invalid_argument("unknown denoiser: " + s);
}

void reject_unknown_keys(const json& obj, std::initializer_list<const char*> known,
                         const std::string& where) {
  for (const auto& [key, _] : obj.items()) {
    if (std::find_if(known.begin(), known.end(), [&](const char* k) {
          return key == k;
        }) == known.end()) {
      throw std::invalid_argument("unknown config key in " + where + ": " + key);
    }
  }
}

}  // namespace

void ExperimentConfig::validate() const {
  if (trials < 1) throw std::invalid_argument("config: trials must be >= 1");
  if (n < 1) throw std::invalid_argument("config: n must be >= 1");
  if (t_max < 1) throw std::invalid_argument("config: t_max must be >= 1");
  if (!(lambda > 0.0 && lambda <= 1.0)) {
    throw std::invalid_argument("config: lambda must be in (0, 1]");
  }
  if (rates.empty() || snr_db.empty()) {
    throw std::invalid_argument("config: rates and snr_db must be nonempty");
  }
  for (double r : rates) {
    if (!(r > 0.0)) throw std::invalid_argument("config: rates must be positive");
  }
}

MarkovSourceSpec ExperimentConfig::markov_spec() const {
  switch (family) {
    case SignalFamily::MConst: return MarkovSourceSpec::mconst();
    case SignalFamily::MUnif:  return MarkovSourceSpec::munif();
    case SignalFamily::MRad:   return MarkovSourceSpec::mrad();
    case SignalFamily::M4:     return MarkovSourceSpec::m4(m4_switch_error);
    default:
      throw std::invalid_argument("markov_spec: not a Markov family");
  }
}

double ExperimentConfig::source_second_moment() const {
  if (family == SignalFamily::SparseLaplace) return 0.03;
  return markov_spec().second_moment();
}

std::string ExperimentConfig::to_json() const {
  json j;
  j["family"] = ampud::to_string(family);
  j["m4_switch_error"] = m4_switch_error;
  j["n"] = n;
  j["rates"] = rates;
  j["snr_db"] = snr_db;
  j["denoiser"] = ampud::to_string(denoiser);
  j["window_k"] = window_k;
  j["universal"] = {{"k", universal.k},
                    {"l_init", universal.l_init},
                    {"t_min", universal.t_min},
                    {"b1", universal.b1},
                    {"b2", universal.b2},
                    {"em", {{"s_max", universal.em.s_max},
                            {"sigma_init_sq", universal.em.sigma_init_sq},
                            {"min_weight_floor", universal.em.min_weight_floor},
                            {"var_floor_ratio", universal.em.var_floor_ratio},
                            {"max_iters", universal.em.max_iters},
                            {"rel_tol", universal.em.rel_tol}}}};
  j["t_max"] = t_max;
  j["lambda"] = lambda;
  j["trials"] = trials;
  j["seed"] = seed;
  j["se_n_mc"] = se_n_mc;
  j["se_fp_tol"] = se_fp_tol;
  j["output_prefix"] = output_prefix;
  return j.dump(2);
}

ExperimentConfig ExperimentConfig::from_json(const std::string& text) {
  const json j = json::parse(text);
  reject_unknown_keys(j,
                      {"family", "m4_switch_error", "n", "rates", "snr_db",
                       "denoiser", "window_k", "universal", "t_max", "lambda",
                       "trials", "seed", "se_n_mc", "se_fp_tol",
                       "output_prefix"},
                      "config");
  ExperimentConfig cfg;
  if (j.contains("family")) cfg.family = family_from_string(j["family"]);
  if (j.contains("m4_switch_error")) cfg.m4_switch_error = j["m4_switch_error"];
  if (j.contains("n")) cfg.n = j["n"];
  if (j.contains("rates")) cfg.rates = j["rates"].get<std::vector<double>>();
  if (j.contains("snr_db")) cfg.snr_db = j["snr_db"].get<std::vector<double>>();
  if (j.contains("denoiser")) cfg.denoiser = denoiser_from_string(j["denoiser"]);
  if (j.contains("window_k")) cfg.window_k = j["window_k"];
  if (j.contains("universal")) {
    const json& u = j["universal"];
    reject_unknown_keys(u, {"k", "l_init", "t_min", "b1", "b2", "em"},
                        "config.universal");
    if (u.contains("k")) cfg.universal.k = u["k"];
    if (u.contains("l_init")) cfg.universal.l_init = u["l_init"];
    if (u.contains("t_min")) cfg.universal.t_min = u["t_min"];
    if (u.contains("b1")) cfg.universal.b1 = u["b1"];
    if (u.contains("b2")) cfg.universal.b2 = u["b2"];
    if (u.contains("em")) {
      const json& e = u["em"];
      reject_unknown_keys(e,
                          {"s_max", "sigma_init_sq", "min_weight_floor",
                           "var_floor_ratio", "max_iters", "rel_tol"},
                          "config.universal.em");
      if (e.contains("s_max")) cfg.universal.em.s_max = e["s_max"];
      if (e.contains("sigma_init_sq")) cfg.universal.em.sigma_init_sq = e["sigma_init_sq"];
      if (e.contains("min_weight_floor")) cfg.universal.em.min_weight_floor = e["min_weight_floor"];
      if (e.contains("var_floor_ratio")) cfg.universal.em.var_floor_ratio = e["var_floor_ratio"];
      if (e.contains("max_iters")) cfg.universal.em.max_iters = e["max_iters"];
      if (e.contains("rel_tol")) cfg.universal.em.rel_tol = e["rel_tol"];
    }
  }
  if (j.contains("t_max")) cfg.t_max = j["t_max"];
  if (j.contains("lambda")) cfg.lambda = j["lambda"];
  if (j.contains("trials")) cfg.trials = j["trials"];
  if (j.contains("seed")) cfg.seed = j["seed"];
  if (j.contains("se_n_mc")) cfg.se_n_mc = j["se_n_mc"];
  if (j.contains("se_fp_tol")) cfg.se_fp_tol = j["se_fp_tol"];
  if (j.contains("output_prefix")) cfg.output_prefix = j["output_prefix"];
  cfg.validate();
  return cfg;
}

Vector gen_signal(const ExperimentConfig& cfg, std::uint64_t seed) {
  switch (cfg.family) {
    case SignalFamily::SparseLaplace:
      return gen_sparse_laplace(cfg.n, seed);
    case SignalFamily::M4:
      return gen_m4(cfg.n, cfg.m4_switch_error, seed);
    default:
      return gen_two_state_markov(cfg.n, cfg.markov_spec(), seed);
  }
}

std::unique_ptr<Denoiser> make_denoiser(const ExperimentConfig& cfg,
                                        std::uint64_t seed) {
  switch (cfg.denoiser) {
    case DenoiserKind::WindowMConst:
      return std::make_unique<WindowDenoiser>(MarkovSourceSpec::mconst(),
                                              cfg.window_k);
    case DenoiserKind::WindowM4:
      return std::make_unique<WindowDenoiser>(
          MarkovSourceSpec::m4(cfg.m4_switch_error), cfg.window_k);
    case DenoiserKind::GmIid:
      return std::make_unique<GmIidDenoiser>(cfg.universal.em);
    case DenoiserKind::Universal:
      return std::make_unique<UniversalDenoiser>(cfg.universal, seed);
    case DenoiserKind::LaplaceMmse:
      return std::make_unique<SparseLaplaceDenoiser>();
  }
  throw std::logic_error("make_denoiser: unreachable");
}

namespace {

struct TrialTask {
  int cell = 0;
  double rate = 0.0;
  double snr = 0.0;
  int trial = 0;
};

// Runs f(i) for i in [0, count) on up to hardware_concurrency workers.
template <typename F>
void parallel_for(int count, F&& f) {
  const unsigned workers =
      std::min<unsigned>(std::max(1u, std::thread::hardware_concurrency()),
                         static_cast<unsigned>(count));
  if (workers <= 1) {
    for (int i = 0; i < count; ++i) f(i);
    return;
  }
  std::atomic<int> next{0};
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (unsigned w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (int i = next.fetch_add(1); i < count; i = next.fetch_add(1)) f(i);
    });
  }
  for (auto& t : pool) t.join();
}

LinearSystem make_system(const ExperimentConfig& cfg, double rate, double snr,
                         const Vector& x, std::uint64_t seed) {
  const int m = std::max(1, static_cast<int>(std::lround(rate * cfg.n)));
  LinearSystem sys;
  sys.A = gen_matrix(m, cfg.n, substream_seed(seed, 1));
  sys.sigma_z_sq = noise_var_for_snr(cfg.source_second_moment(), cfg.n, m, snr);
  sys.y = measure(sys.A, x, sys.sigma_z_sq, substream_seed(seed, 2));
  return sys;
}

}  // namespace

ExperimentResult run_experiment(const ExperimentConfig& cfg) {
  cfg.validate();

  std::vector<TrialTask> tasks;
  int cell = 0;
  for (double rate : cfg.rates) {
    for (double snr : cfg.snr_db) {
      for (int trial = 0; trial < cfg.trials; ++trial) {
        tasks.push_back({cell, rate, snr, trial});
      }
      ++cell;
    }
  }

  ExperimentResult result;
  result.rows.resize(tasks.size());
  parallel_for(static_cast<int>(tasks.size()), [&](int i) {
    const TrialTask& task = tasks[i];
    const std::uint64_t trial_seed =
        substream_seed(substream_seed(cfg.seed, task.cell), task.trial);
    const Vector x = gen_signal(cfg, substream_seed(trial_seed, 0));
    const LinearSystem sys = make_system(cfg, task.rate, task.snr, x, trial_seed);
    const auto denoiser = make_denoiser(cfg, substream_seed(trial_seed, 3));
    const AmpRunResult run = run_amp(sys, *denoiser, cfg.t_max, cfg.lambda, &x);

    TrialRow row;
    row.rate = task.rate;
    row.snr_db = task.snr;
    row.trial = task.trial;
    row.seed = trial_seed;
    row.diverged = run.diverged;
    row.final_sdr_db = sdr_db(x, run.state.x);
    row.final_sigma_hat_sq = run.state.sigma_hat_sq;
    result.rows[i] = row;
  });

  // Rows are already grid-ordered; aggregate per cell.
  std::map<std::pair<double, double>, CellSummary> cells;
  for (const auto& row : result.rows) {
    auto& c = cells[{row.rate, row.snr_db}];
    c.rate = row.rate;
    c.snr_db = row.snr_db;
    c.trials++;
    if (row.diverged) c.diverged++;
    c.mean_sdr_db += row.final_sdr_db;
  }
  for (auto& [_, c] : cells) c.mean_sdr_db /= c.trials;
  for (const auto& row : result.rows) {
    auto& c = cells[{row.rate, row.snr_db}];
    const double d = row.final_sdr_db - c.mean_sdr_db;
    c.stderr_sdr_db += d * d;
  }
  for (auto& [_, c] : cells) {
    c.stderr_sdr_db =
        c.trials > 1 ? std::sqrt(c.stderr_sdr_db / (c.trials - 1) / c.trials)
                     : 0.0;
    result.cells.push_back(c);
  }

  if (!cfg.output_prefix.empty()) {
    write_experiment_csv(cfg.output_prefix + "_results.csv", cfg, result);
    write_experiment_summary_json(cfg.output_prefix + "_summary.json", cfg,
                                  result);
  }
  return result;
}

std::vector<SeComparison> run_se_comparison(const ExperimentConfig& cfg) {
  cfg.validate();
  if (cfg.denoiser != DenoiserKind::WindowMConst &&
      cfg.denoiser != DenoiserKind::WindowM4) {
    throw std::invalid_argument("run_se_comparison: requires a window denoiser");
  }
  const MarkovSourceSpec spec = cfg.denoiser == DenoiserKind::WindowMConst
                                    ? MarkovSourceSpec::mconst()
                                    : MarkovSourceSpec::m4(cfg.m4_switch_error);
  const WindowModel model(spec, cfg.window_k);
  const double e_x2 = model.source_second_moment();

  std::vector<SeComparison> comparisons;
  int cell = 0;
  for (double rate : cfg.rates) {
    for (double snr : cfg.snr_db) {
      const int m = std::max(1, static_cast<int>(std::lround(rate * cfg.n)));
      const double sigma_z_sq = noise_var_for_snr(e_x2, cfg.n, m, snr);

      SeComparison cmp;
      cmp.rate = rate;
      cmp.snr_db = snr;
      cmp.se = se_run_window(model, static_cast<double>(m) / cfg.n, sigma_z_sq,
                             cfg.t_max, cfg.se_n_mc,
                             substream_seed(cfg.seed, 7000 + cell),
                             cfg.se_fp_tol);
      cmp.fixed_point_t = cmp.se.fixed_point_t;

      // Per-trial MSE traces; row t describes estimate x^t (x^0 = 0).
      Matrix traces(cfg.trials, cfg.t_max + 1);
      parallel_for(cfg.trials, [&](int trial) {
        const std::uint64_t trial_seed =
            substream_seed(substream_seed(cfg.seed, cell), trial);
        const Vector x = gen_signal(cfg, substream_seed(trial_seed, 0));
        const LinearSystem sys = make_system(cfg, rate, snr, x, trial_seed);
        const WindowDenoiser denoiser(spec, cfg.window_k);
        const AmpRunResult run =
            run_amp(sys, denoiser, cfg.t_max, cfg.lambda, &x);
        traces(trial, 0) = x.squaredNorm() / x.size();
        for (int t = 1; t <= cfg.t_max; ++t) {
          traces(trial, t) = t <= static_cast<int>(run.trace.size())
                                 ? run.trace[t - 1].mse
                                 : std::numeric_limits<double>::quiet_NaN();
        }
      });

      for (int t = 0; t <= cfg.t_max; ++t) {
        SeComparisonRow row;
        row.t = t;
        const auto col = traces.col(t);
        row.empirical_mse_mean = col.mean();
        double var = 0.0;
        for (int i = 0; i < cfg.trials; ++i) {
          const double d = col(i) - row.empirical_mse_mean;
          var += d * d;
        }
        row.empirical_mse_stderr =
            cfg.trials > 1 ? std::sqrt(var / (cfg.trials - 1) / cfg.trials) : 0.0;
        if (t == 0) {
          row.se_predicted_mse = e_x2;
        } else {
          const int idx =
              std::min<int>(t - 1, static_cast<int>(cmp.se.predicted_mse.size()) - 1);
          row.se_predicted_mse = cmp.se.predicted_mse[idx];
        }
        cmp.rows.push_back(row);
      }
      comparisons.push_back(std::move(cmp));
      ++cell;
    }
  }

  if (!cfg.output_prefix.empty()) {
    for (std::size_t i = 0; i < comparisons.size(); ++i) {
      write_se_comparison_csv(
          cfg.output_prefix + "_se_" + std::to_string(i) + ".csv",
          comparisons[i]);
    }
  }
  return comparisons;
}

void write_experiment_csv(const std::string& path, const ExperimentConfig& cfg,
                          const ExperimentResult& result) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out << "schema_version,family,denoiser,n,rate,snr_db,trial,seed,diverged,"
         "final_sdr_db,final_sigma_hat_sq\n";
  for (const auto& r : result.rows) {
    char buf[160];
    std::snprintf(buf, sizeof(buf), "%.17g,%.17g,%d,%llu,%d,%.17g,%.17g",
                  r.rate, r.snr_db, r.trial,
                  static_cast<unsigned long long>(r.seed), r.diverged ? 1 : 0,
                  r.final_sdr_db, r.final_sigma_hat_sq);
    out << kSchemaVersion << ',' << to_string(cfg.family) << ','
        << to_string(cfg.denoiser) << ',' << cfg.n << ',' << buf << '\n';
  }
}

void write_experiment_summary_json(const std::string& path,
                                   const ExperimentConfig& cfg,
                                   const ExperimentResult& result) {
  json j;
  j["schema_version"] = kSchemaVersion;
  j["config"] = json::parse(cfg.to_json());
  j["cells"] = json::array();
  for (const auto& c : result.cells) {
    j["cells"].push_back({{"rate", c.rate},
                          {"snr_db", c.snr_db},
                          {"trials", c.trials},
                          {"diverged", c.diverged},
                          {"mean_sdr_db", c.mean_sdr_db},
                          {"stderr_sdr_db", c.stderr_sdr_db}});
  }
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out << j.dump(2) << '\n';
}

void write_se_comparison_csv(const std::string& path, const SeComparison& cmp) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out << "schema_version,t,empirical_mse_mean,empirical_mse_stderr,"
         "se_predicted_mse\n";
  for (const auto& r : cmp.rows) {
    char buf[120];
    std::snprintf(buf, sizeof(buf), "%d,%.17g,%.17g,%.17g", r.t,
                  r.empirical_mse_mean, r.empirical_mse_stderr,
                  r.se_predicted_mse);
    out << kSchemaVersion << ',' << buf << '\n';
  }
}

BetaTuneResult tune_beta(const std::vector<double>& b1_grid,
                         const std::vector<double>& b2_grid, int n,
                         std::uint64_t seed) {
  // Scalar-channel validation: MConst and MUnif at 5 and 10 dB effective SNR.
  struct Case {
    Vector x;
    Vector q;
    double sigma_v_sq;
    double e_x2;
  };
  std::vector<Case> cases;
  int idx = 0;
  for (int fam = 0; fam < 2; ++fam) {
    const MarkovSourceSpec spec =
        fam == 0 ? MarkovSourceSpec::mconst() : MarkovSourceSpec::munif();
    for (double snr : {5.0, 10.0}) {
      Case c;
      c.x = gen_two_state_markov(n, spec, substream_seed(seed, idx * 2));
      c.e_x2 = spec.second_moment();
      c.sigma_v_sq = c.e_x2 / std::pow(10.0, snr / 10.0);
      Rng rng(substream_seed(seed, idx * 2 + 1));
      c.q = c.x;
      const double sd = std::sqrt(c.sigma_v_sq);
      for (int i = 0; i < n; ++i) c.q(i) += sd * rng.normal();
      cases.push_back(std::move(c));
      ++idx;
    }
  }

  BetaTuneResult best;
  best.score = std::numeric_limits<double>::infinity();
  for (double b1 : b1_grid) {
    for (double b2 : b2_grid) {
      UniversalConfig cfg;
      cfg.b1 = b1;
      cfg.b2 = b2;
      double score = 0.0;
      for (std::size_t c = 0; c < cases.size(); ++c) {
        const UniversalResult r = denoise_universal(
            cases[c].q, cases[c].sigma_v_sq, cfg, substream_seed(seed, 100 + c));
        score += mse(cases[c].x, r.x_hat) / cases[c].e_x2;
      }
      score /= cases.size();
      best.grid.push_back({b1, b2, score});
      if (score < best.score) {
        best.score = score;
        best.b1 = b1;
        best.b2 = b2;
      }
    }
  }
  return best;
}

}  // namespace ampud
