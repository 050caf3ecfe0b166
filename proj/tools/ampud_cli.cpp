// Command-line front end for the compressed-sensing reconstruction toolkit.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "ampud/harness.hpp"
#include "ampud/io.hpp"
#include "ampud/markov_denoiser.hpp"
#include "ampud/rng.hpp"

using namespace ampud;
using nlohmann::json;

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct ConfigOverrides {
  std::optional<std::string> family;
  std::optional<std::string> denoiser;
  std::optional<int> n;
  std::optional<int> t_max;
  std::optional<double> lambda;
  std::optional<int> trials;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> output_prefix;
};

void add_override_flags(CLI::App* cmd, ConfigOverrides& ov) {
  cmd->add_option("--family", ov.family,
                  "sparse_laplace|mconst|munif|mrad|m4");
  cmd->add_option("--denoiser", ov.denoiser,
                  "window_mconst|window_m4|gm_iid|universal|laplace_mmse");
  cmd->add_option("--n", ov.n, "signal length");
  cmd->add_option("--t-max", ov.t_max, "AMP iterations");
  cmd->add_option("--lambda", ov.lambda, "damping factor in (0,1]");
  cmd->add_option("--trials", ov.trials, "trials per sweep cell");
  cmd->add_option("--output", ov.output_prefix, "output file prefix");
}

ExperimentConfig load_config(const std::string& path, const ConfigOverrides& ov) {
  ExperimentConfig cfg =
      path.empty() ? ExperimentConfig{} : ExperimentConfig::from_json(read_file(path));
  json patch = json::object();
  if (ov.family) patch["family"] = *ov.family;
  if (ov.denoiser) patch["denoiser"] = *ov.denoiser;
  if (ov.n) patch["n"] = *ov.n;
  if (ov.t_max) patch["t_max"] = *ov.t_max;
  if (ov.lambda) patch["lambda"] = *ov.lambda;
  if (ov.trials) patch["trials"] = *ov.trials;
  if (ov.seed) patch["seed"] = *ov.seed;
  if (ov.output_prefix) patch["output_prefix"] = *ov.output_prefix;
  if (!patch.empty()) {
    json merged = json::parse(cfg.to_json());
    merged.update(patch);
    cfg = ExperimentConfig::from_json(merged.dump());
  }
  return cfg;
}

int cmd_generate(const std::string& family, int n, std::uint64_t seed,
                 const std::string& out, const std::string& csv) {
  ExperimentConfig cfg;
  json j = json::parse(cfg.to_json());
  j["family"] = family;
  j["n"] = n;
  cfg = ExperimentConfig::from_json(j.dump());
  const Vector x = gen_signal(cfg, seed);
  if (!out.empty()) write_vector_bin(out, x);
  if (!csv.empty()) write_vector_csv(csv, x);
  json summary = {{"schema_version", kSchemaVersion},
                  {"family", family},
                  {"n", n},
                  {"seed", seed},
                  {"nonzero_fraction",
                   (x.array() != 0.0).count() / static_cast<double>(n)},
                  {"second_moment", x.squaredNorm() / n}};
  std::cout << summary.dump(2) << '\n';
  return 0;
}

int cmd_reconstruct(const ExperimentConfig& cfg) {
  const double rate = cfg.rates.front();
  const double snr = cfg.snr_db.front();
  const std::uint64_t trial_seed = substream_seed(cfg.seed, 0);

  const Vector x = gen_signal(cfg, substream_seed(trial_seed, 0));
  const int m = std::max(1, static_cast<int>(std::lround(rate * cfg.n)));
  LinearSystem sys;
  sys.A = gen_matrix(m, cfg.n, substream_seed(trial_seed, 1));
  sys.sigma_z_sq = noise_var_for_snr(cfg.source_second_moment(), cfg.n, m, snr);
  sys.y = measure(sys.A, x, sys.sigma_z_sq, substream_seed(trial_seed, 2));

  const auto denoiser = make_denoiser(cfg, substream_seed(trial_seed, 3));
  const AmpRunResult run = run_amp(sys, *denoiser, cfg.t_max, cfg.lambda, &x);

  if (!cfg.output_prefix.empty()) {
    write_amp_trace_csv(cfg.output_prefix + "_trace.csv", run.trace);
    write_vector_bin(cfg.output_prefix + "_xhat.bin", run.state.x);
  }
  json summary = {{"schema_version", kSchemaVersion},
                  {"family", to_string(cfg.family)},
                  {"denoiser", to_string(cfg.denoiser)},
                  {"n", cfg.n},
                  {"m", m},
                  {"rate", rate},
                  {"snr_db", snr},
                  {"seed", cfg.seed},
                  {"diverged", run.diverged},
                  {"iterations", run.state.t},
                  {"final_sdr_db", sdr_db(x, run.state.x)},
                  {"final_sigma_hat_sq", run.state.sigma_hat_sq}};
  std::cout << summary.dump(2) << '\n';
  return run.diverged ? 2 : 0;
}

int cmd_se_compare(const ExperimentConfig& cfg) {
  const auto comparisons = run_se_comparison(cfg);
  json cells = json::array();
  for (const auto& cmp : comparisons) {
    cells.push_back({{"rate", cmp.rate},
                     {"snr_db", cmp.snr_db},
                     {"rows", cmp.rows.size()},
                     {"se_fixed_point_t", cmp.fixed_point_t}});
  }
  json summary = {{"schema_version", kSchemaVersion}, {"cells", cells}};
  std::cout << summary.dump(2) << '\n';
  return 0;
}

int cmd_sweep(const ExperimentConfig& cfg) {
  const ExperimentResult result = run_experiment(cfg);
  json cells = json::array();
  for (const auto& c : result.cells) {
    cells.push_back({{"rate", c.rate},
                     {"snr_db", c.snr_db},
                     {"trials", c.trials},
                     {"diverged", c.diverged},
                     {"mean_sdr_db", c.mean_sdr_db},
                     {"stderr_sdr_db", c.stderr_sdr_db}});
  }
  json summary = {{"schema_version", kSchemaVersion}, {"cells", cells}};
  std::cout << summary.dump(2) << '\n';
  return 0;
}

int cmd_tune_beta(const std::vector<double>& b1_grid,
                  const std::vector<double>& b2_grid, int n,
                  std::uint64_t seed) {
  const BetaTuneResult best = tune_beta(b1_grid, b2_grid, n, seed);
  json grid = json::array();
  for (const auto& g : best.grid) {
    grid.push_back({{"b1", g[0]}, {"b2", g[1]}, {"score", g[2]}});
  }
  json summary = {{"schema_version", kSchemaVersion},
                  {"best_b1", best.b1},
                  {"best_b2", best.b2},
                  {"best_score", best.score},
                  {"grid", grid}};
  std::cout << summary.dump(2) << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Compressed-sensing reconstruction via AMP with pluggable denoisers"};
  app.require_subcommand(1);

  // generate
  auto* gen = app.add_subcommand("generate", "generate a signal realization");
  std::string gen_family = "sparse_laplace", gen_out, gen_csv;
  int gen_n = 5000;
  std::uint64_t gen_seed = 0;
  gen->add_option("--family", gen_family, "signal family")->required();
  gen->add_option("--n", gen_n, "signal length");
  gen->add_option("--seed", gen_seed, "RNG seed")->required();
  gen->add_option("--out", gen_out, "binary output path (f64 little-endian)");
  gen->add_option("--csv", gen_csv, "CSV output path");

  // reconstruct
  auto* rec = app.add_subcommand("reconstruct", "single-instance reconstruction");
  std::string rec_config;
  ConfigOverrides rec_ov;
  rec->add_option("--config", rec_config, "experiment config JSON");
  rec->add_option("--seed", rec_ov.seed, "RNG seed");
  add_override_flags(rec, rec_ov);

  // se-compare
  auto* sec = app.add_subcommand("se-compare",
                                 "empirical vs state-evolution MSE traces");
  std::string sec_config;
  ConfigOverrides sec_ov;
  sec->add_option("--config", sec_config, "experiment config JSON");
  sec->add_option("--seed", sec_ov.seed, "RNG seed");
  add_override_flags(sec, sec_ov);

  // sweep
  auto* swp = app.add_subcommand("sweep", "rate x SNR x trial sweep");
  std::string swp_config;
  ConfigOverrides swp_ov;
  std::uint64_t swp_seed = 0;
  swp->add_option("--config", swp_config, "experiment config JSON");
  swp->add_option("--seed", swp_seed, "RNG seed")->required();
  add_override_flags(swp, swp_ov);

  // tune-beta
  auto* tb = app.add_subcommand("tune-beta", "grid-search context decay coefficients");
  std::vector<double> tb_b1{0.0, 0.05, 0.1, 0.2, 0.4};
  std::vector<double> tb_b2{0.1, 0.2, 0.3, 0.5, 0.7};
  int tb_n = 5000;
  std::uint64_t tb_seed = 0;
  tb->add_option("--b1", tb_b1, "b1 grid values");
  tb->add_option("--b2", tb_b2, "b2 grid values");
  tb->add_option("--n", tb_n, "validation signal length");
  tb->add_option("--seed", tb_seed, "RNG seed")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (gen->parsed()) return cmd_generate(gen_family, gen_n, gen_seed, gen_out, gen_csv);
    if (rec->parsed()) return cmd_reconstruct(load_config(rec_config, rec_ov));
    if (sec->parsed()) return cmd_se_compare(load_config(sec_config, sec_ov));
    if (swp->parsed()) {
      swp_ov.seed = swp_seed;
      return cmd_sweep(load_config(swp_config, swp_ov));
    }
    if (tb->parsed()) return cmd_tune_beta(tb_b1, tb_b2, tb_n, tb_seed);
  } catch (const std::exception& e) {
    json err = {{"error", e.what()}};
    std::cerr << err.dump() << '\n';
    return 1;
  }
  return 1;
}
