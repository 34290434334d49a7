// Copyright 2026 The copsurv Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "copsurv/censoring.hpp"
#include "copsurv/csv.hpp"
#include "copsurv/dataset.hpp"
#include "copsurv/errors.hpp"
#include "copsurv/parametric.hpp"
#include "copsurv/predictive.hpp"
#include "copsurv/resampling.hpp"
#include "copsurv/tune.hpp"

namespace fs = std::filesystem;
using namespace copsurv;

namespace {

struct Global {
  std::uint64_t seed = 0;
  unsigned threads = 1;
  std::string output_dir = ".";
};

struct DataArgs {
  std::string input;
  std::string time_col = "time";
  std::string status_col = "status";
  std::string filter_col;
  std::string filter_value;
  bool permute = true;
};

struct ModelArgs {
  std::string family = "clayton";
  std::optional<double> bandwidth;
  std::vector<double> bandwidths;
  std::size_t particles = 1000;
  std::size_t tune_particles = 500;
  double ess_frac = 0.5;
  int grid_points = 100;
  double grid_max = 0.0;
};

// Ordered key=value record of the effective configuration.
class Metadata {
 public:
  void set(const std::string& k, const std::string& v) { kv_[k] = v; }
  void set(const std::string& k, double v) { kv_[k] = format_number(v); }
  void set_list(const std::string& k, const std::vector<std::size_t>& v) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) s += (i ? " " : "") + std::to_string(v[i]);
    kv_[k] = s;
  }
  std::string str() const {
    std::string s;
    for (const auto& [k, v] : kv_) s += k + "=" + v + "\n";
    return s;
  }

 private:
  std::map<std::string, std::string> kv_;
};

void add_data_options(CLI::App* cmd, DataArgs& d) {
  cmd->add_option("--input", d.input, "CSV with a header row")->required()->check(CLI::ExistingFile);
  cmd->add_option("--time-col", d.time_col, "Time column");
  cmd->add_option("--status-col", d.status_col, "Status column (1 observed, 0 censored)");
  cmd->add_option("--filter-col", d.filter_col, "Keep rows where this column equals --filter-value");
  cmd->add_option("--filter-value", d.filter_value, "Value for --filter-col");
  cmd->add_flag("!--no-permute", d.permute, "Process records in file order");
}

void add_model_options(CLI::App* cmd, ModelArgs& m) {
  cmd->add_option("--family", m.family, "clayton or gaussian")->check(CLI::IsMember({"clayton", "gaussian"}));
  cmd->add_option("--bandwidth", m.bandwidth, "Clayton a or Gaussian rho; tuned when omitted");
  cmd->add_option("--bandwidths", m.bandwidths, "Tuning grid for the bandwidth")->delimiter(',');
  cmd->add_option("--particles", m.particles, "Number of particles B")->check(CLI::Range(2, 10000000));
  cmd->add_option("--tune-particles", m.tune_particles, "Particles per tuning cell")->check(CLI::Range(2, 10000000));
  cmd->add_option("--ess-frac", m.ess_frac, "Resample when ESS < ess_frac * B")->check(CLI::Range(0.0, 1.0));
  cmd->add_option("--grid-points", m.grid_points, "Output grid size")->check(CLI::Range(3, 100000));
  cmd->add_option("--grid-max", m.grid_max, "Largest grid time in input units (default 1.5 x max time)");
}

CopulaKind kind_of(const ModelArgs& m) { return m.family == "gaussian" ? CopulaKind::gaussian : CopulaKind::clayton; }

SurvivalDataset load(const DataArgs& d, const std::vector<std::string>& covariates) {
  CsvSchema schema;
  schema.time_column = d.time_col;
  schema.status_column = d.status_col;
  schema.covariate_columns = covariates;
  if (!d.filter_col.empty()) {
    schema.filter_column = d.filter_col;
    schema.filter_value = d.filter_value;
  }
  return load_csv(d.input, schema);
}

void write(const Global& g, const std::string& name, const std::string& text) {
  write_text_file((fs::path(g.output_dir) / name).string(), text);
}

GridSpec working_grid(const SurvivalDataset& data, const ModelArgs& m) {
  if (m.grid_max > 0) {
    const double top = m.grid_max * data.scale_factor;
    Eigen::ArrayXd p(m.grid_points);
    p[0] = 0.0;
    p.tail(m.grid_points - 1) =
        Eigen::ArrayXd::LinSpaced(m.grid_points - 1, std::log(1e-3 * top), std::log(top)).exp();
    p[m.grid_points - 1] = top;
    return GridSpec(std::move(p));
  }
  return default_grid(data, m.grid_points);
}

struct Prepared {
  SurvivalDataset data;
  PredictiveFit prior;
  std::optional<TuneResult> tuning;
};

// Tunes when the bandwidth (or rho_x for covariate data) is not given.
Prepared prepare(const Global& g, const SurvivalDataset& working, const ModelArgs& m,
                 std::optional<double> rho_x, const std::vector<double>& rho_x_grid, Metadata& meta) {
  Prepared p{working, PredictiveFit::clayton(1.0), std::nullopt};
  const auto kind = kind_of(m);
  const bool need_rho = working.has_covariates() && !rho_x;
  if (!m.bandwidth || need_rho) {
    TuneGrid grid;
    grid.bandwidths = m.bandwidth ? std::vector<double>{*m.bandwidth}
                                  : (m.bandwidths.empty() ? default_bandwidths(kind) : m.bandwidths);
    if (working.has_covariates())
      grid.rho_x_values = rho_x ? std::vector<double>{*rho_x}
                                : (rho_x_grid.empty() ? default_rho_x_values() : rho_x_grid);
    grid.B_tune = m.tune_particles;
    grid.seed = g.seed;
    grid.ess_frac = m.ess_frac;
    grid.threads = g.threads;
    p.tuning = grid_search(working, kind, grid);
    write(g, "tune.csv", tune_table_csv(p.tuning->table));
    p.prior = make_prior(kind, p.tuning->best.bandwidth, p.tuning->best.rho_x, working.dim());
  } else {
    p.prior = make_prior(kind, *m.bandwidth, working.has_covariates() ? rho_x : std::nullopt, working.dim());
  }
  meta.set("family", m.family);
  meta.set("bandwidth", p.prior.family().parameter);
  if (p.prior.rho_x()) meta.set("rho_x", *p.prior.rho_x());
  meta.set("particles", static_cast<double>(m.particles));
  meta.set("ess_frac", m.ess_frac);
  meta.set("grid_points", static_cast<double>(m.grid_points));
  meta.set("grid_max", m.grid_max);
  return p;
}

void record_data(Metadata& meta, const Global& g, const DataArgs& d, const SurvivalDataset& working) {
  meta.set("seed", std::to_string(g.seed));
  meta.set("input", d.input);
  meta.set("time_col", d.time_col);
  meta.set("status_col", d.status_col);
  if (!d.filter_col.empty()) {
    meta.set("filter_col", d.filter_col);
    meta.set("filter_value", d.filter_value);
  }
  meta.set("permute", d.permute ? "true" : "false");
  meta.set("scale_factor", working.scale_factor);
  meta.set_list("permutation", working.order);
}

SurvivalDataset make_working(const Global& g, const DataArgs& d, const SurvivalDataset& raw) {
  auto working = standardize(raw);
  return d.permute ? permute(working, g.seed) : working;
}

std::string summary_text(const ParticleEnsemble<PredictiveFit>& ens, const SurvivalDataset& working) {
  Metadata s;
  s.set("records", static_cast<double>(working.size()));
  s.set("censored", static_cast<double>(working.size() - working.observed_count()));
  s.set("log_marginal_likelihood", log_marginal_likelihood(ens));
  s.set("final_ess", ens.final_ess());
  s.set("resample_events", static_cast<double>(ens.resample_steps.size()));
  s.set("scale_factor", working.scale_factor);
  return s.str();
}

// Weighted mixture of the particle predictives on the grid, in input units.
std::string predictive_csv(const ParticleEnsemble<PredictiveFit>& ens, const GridSpec& grid, double scale,
                           std::span<const double> x, unsigned threads) {
  const auto w = ens.normalized_weights();
  const auto G = grid.size();
  Eigen::MatrixXd dens(static_cast<Eigen::Index>(ens.size()), G), cdf(dens.rows(), G);
  parallel_for(ens.size(), threads, [&](std::size_t j) {
    const auto rows = evaluate_grid(ens.particles[j].fit, grid.points(), x);
    dens.row(static_cast<Eigen::Index>(j)) = rows.density.matrix().transpose();
    cdf.row(static_cast<Eigen::Index>(j)) = rows.cdf.matrix().transpose();
  });
  const Eigen::Map<const Eigen::VectorXd> wv(w.data(), static_cast<Eigen::Index>(w.size()));
  const Eigen::VectorXd d = dens.transpose() * wv;
  const Eigen::VectorXd c = cdf.transpose() * wv;
  CsvWriter out({"time", "density", "cdf", "survival"});
  for (Eigen::Index g = 0; g < G; ++g) out.row({grid.points()[g] / scale, d[g] * scale, c[g], 1.0 - c[g]});
  return out.str();
}

void write_posterior(const Global& g, const PosteriorDraws& draws, double scale, const std::string& suffix) {
  const Eigen::ArrayXd times = draws.grid.points() / scale;
  const Eigen::MatrixXd survival = (1.0 - draws.cdf_draws.array()).matrix();
  write(g, "survival" + suffix + ".csv", band_csv(times, summarize(survival, draws.weights)));
  write(g, "density" + suffix + ".csv", band_csv(times, summarize(draws.density_draws * scale, draws.weights)));
  write(g, "cdf_draws" + suffix + ".csv", draws_csv(times, draws.cdf_draws, draws.weights));
  CsvWriter med({"median", "weight"});
  for (Eigen::Index j = 0; j < draws.medians.size(); ++j) med.row({draws.medians[j] / scale, draws.weights[j]});
  write(g, "medians" + suffix + ".csv", med.str());
  std::string w1 = "step";
  for (Eigen::Index j = 0; j < draws.w1_trace.rows(); ++j) w1 += ",chain" + std::to_string(j);
  w1 += '\n';
  for (Eigen::Index t = 0; t < draws.w1_trace.cols(); ++t) {
    w1 += std::to_string(static_cast<std::size_t>(t) * draws.w1_stride);
    for (Eigen::Index j = 0; j < draws.w1_trace.rows(); ++j) w1 += ',' + format_number(draws.w1_trace(j, t) / scale);
    w1 += '\n';
  }
  write(g, "w1" + suffix + ".csv", w1);
}

std::vector<double> parse_vector(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string cell;
  while (std::getline(ss, cell, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(cell, &used));
      if (used != cell.size()) throw std::invalid_argument(cell);
    } catch (const std::exception&) {
      throw ConfigurationError("cannot parse covariate value '" + cell + "'");
    }
  }
  return out;
}

int report(ErrorCategory c, const std::string& what) {
  std::cerr << "error category=" << category_name(c) << " message=\"" << what << "\"\n";
  switch (c) {
    case ErrorCategory::config: return 2;
    case ErrorCategory::data: return 3;
    case ErrorCategory::degeneracy: return 4;
  }
  return 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Copula-based Bayesian nonparametric survival analysis"};
  app.set_config("--config", "", "Flat key=value file; command-line flags take precedence");
  app.require_subcommand(1);
  Global g;
  app.add_option("--seed", g.seed, "Master random seed")->required();
  app.add_option("--threads", g.threads, "Worker threads (results do not depend on it)")->check(CLI::Range(1u, 1024u));
  app.add_option("--output-dir", g.output_dir, "Directory for output files");

  // simulate
  auto* sim = app.add_subcommand("simulate", "Simulate exponential survival data with exponential censoring");
  std::size_t sim_n = 50;
  double rate_y = 1.0, rate_c = 2.0;
  std::string sim_out = "simulated.csv";
  sim->add_option("--n", sim_n, "Records")->check(CLI::Range(std::size_t{1}, std::size_t{100000000}));
  sim->add_option("--rate-y", rate_y, "Event rate");
  sim->add_option("--rate-c", rate_c, "Censoring rate");
  sim->add_option("--out", sim_out, "Output file name inside --output-dir");

  // fit / posterior / tune share the data and model options
  DataArgs fit_d, post_d, tune_d, reg_d;
  ModelArgs fit_m, post_m, tune_m, reg_m;
  auto* fit = app.add_subcommand("fit", "Impute censored values and write the predictive");
  add_data_options(fit, fit_d);
  add_model_options(fit, fit_m);

  auto* post = app.add_subcommand("posterior", "Martingale posterior of the survival curve, density and median");
  add_data_options(post, post_d);
  add_model_options(post, post_m);
  std::size_t post_extra = 2000;
  post->add_option("--n-extra", post_extra, "Forward-simulated values per chain");

  auto* tune = app.add_subcommand("tune", "Grid search over the bandwidth (and rho_x)");
  add_data_options(tune, tune_d);
  add_model_options(tune, tune_m);
  std::vector<std::string> tune_cov;
  std::vector<double> tune_rho_grid;
  tune->add_option("--covariates", tune_cov, "Covariate columns")->delimiter(',');
  tune->add_option("--rho-x-values", tune_rho_grid, "Tuning grid for rho_x")->delimiter(',');

  auto* reg = app.add_subcommand("regress", "Covariate-conditional survival");
  add_data_options(reg, reg_d);
  add_model_options(reg, reg_m);
  std::vector<std::string> reg_cov, reg_targets;
  std::optional<double> reg_rho;
  std::vector<double> reg_rho_grid;
  std::size_t reg_extra = 10000;
  double reg_test = 0.0;
  bool reg_zscore = true;
  reg->add_option("--covariates", reg_cov, "Covariate columns")->delimiter(',')->required();
  reg->add_option("--x-target", reg_targets, "Comma-separated covariate vector in input units (repeatable)")
      ->required();
  reg->add_option("--rho-x", reg_rho, "Covariate copula correlation; tuned when omitted");
  reg->add_option("--rho-x-values", reg_rho_grid, "Tuning grid for rho_x")->delimiter(',');
  reg->add_option("--n-extra", reg_extra, "Forward-simulated values per chain (0 writes the predictive only)");
  reg->add_option("--test-fraction", reg_test, "Hold out this fraction and report the test log-likelihood")
      ->check(CLI::Range(0.0, 0.99));
  reg->add_flag("!--no-zscore", reg_zscore, "Use covariates on their input scale");

  auto* doob = app.add_subcommand("doob", "Exponential / inverse-gamma consistency demonstration");
  std::string doob_input;
  std::size_t doob_n = 50;
  double doob_rate_y = 1.0, doob_rate_c = 2.0, doob_b0 = 1.0;
  std::optional<double> doob_a0;
  DoobOptions doob_opt;
  doob->add_option("--input", doob_input, "CSV input; simulated data when omitted")->check(CLI::ExistingFile);
  doob->add_option("--n", doob_n, "Simulated records");
  doob->add_option("--rate-y", doob_rate_y, "Simulated event rate");
  doob->add_option("--rate-c", doob_rate_c, "Simulated censoring rate");
  doob->add_option("--a0", doob_a0, "Prior shape; maximizes the marginal likelihood when omitted");
  doob->add_option("--b0", doob_b0, "Prior scale");
  doob->add_option("--particles", doob_opt.particles, "Number of particles B")->check(CLI::Range(2, 10000000));
  doob->add_option("--n-extra", doob_opt.n_extra, "Forward-simulated values per chain");
  doob->add_option("--ess-frac", doob_opt.ess_frac, "Resample when ESS < ess_frac * B")->check(CLI::Range(0.0, 1.0));

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return report(ErrorCategory::config, e.what());
  }

  try {
    std::error_code ec;
    fs::create_directories(g.output_dir, ec);
    if (ec) throw ConfigurationError("cannot create output directory " + g.output_dir);
    Metadata meta;
    meta.set("seed", std::to_string(g.seed));

    if (*sim) {
      const auto data = simulate_exponential(sim_n, rate_y, rate_c, g.seed);
      write(g, sim_out, to_csv(data));
      meta.set("command", "simulate");
      meta.set("n", static_cast<double>(sim_n));
      meta.set("rate_y", rate_y);
      meta.set("rate_c", rate_c);
      meta.set("out", sim_out);
    } else if (*fit || *post) {
      const DataArgs& d = *fit ? fit_d : post_d;
      const ModelArgs& m = *fit ? fit_m : post_m;
      meta.set("command", *fit ? "fit" : "posterior");
      const auto working = make_working(g, d, load(d, {}));
      record_data(meta, g, d, working);
      auto p = prepare(g, working, m, std::nullopt, {}, meta);
      const auto ens = impute_smc(working, p.prior, {m.particles, m.ess_frac, g.seed, g.threads});
      write(g, "diagnostics.csv", diagnostics_csv(ens.diagnostics()));
      write(g, "summary.txt", summary_text(ens, working));
      const auto grid = working_grid(working, m);
      if (*fit) {
        write(g, "predictive.csv", predictive_csv(ens, grid, working.scale_factor, {}, g.threads));
      } else {
        meta.set("n_extra", static_cast<double>(post_extra));
        PosteriorOptions po{post_extra, g.seed, g.threads, 10};
        write_posterior(g, martingale_posterior(ens, grid, {}, po), working.scale_factor, "");
      }
    } else if (*tune) {
      meta.set("command", "tune");
      const auto working = make_working(g, tune_d, load(tune_d, tune_cov));
      record_data(meta, g, tune_d, working);
      ModelArgs m = tune_m;
      m.bandwidth.reset();
      prepare(g, working, m, std::nullopt, tune_rho_grid, meta);
    } else if (*reg) {
      meta.set("command", "regress");
      const auto raw = load(reg_d, reg_cov);
      StandardizeOptions so{reg_zscore};
      SurvivalDataset train_raw = raw, test_raw;
      if (reg_test > 0) {
        const auto [train_idx, test_idx] = train_test_split(raw.size(), reg_test, g.seed);
        train_raw = subset(raw, train_idx);
        test_raw = subset(raw, test_idx);
        meta.set("test_fraction", reg_test);
      }
      auto working = standardize(train_raw, so);
      if (reg_d.permute) working = permute(working, g.seed);
      record_data(meta, g, reg_d, working);
      meta.set("zscore", reg_zscore ? "true" : "false");
      auto p = prepare(g, working, reg_m, reg_rho, reg_rho_grid, meta);
      const auto ens = impute_smc(working, p.prior, {reg_m.particles, reg_m.ess_frac, g.seed, g.threads});
      write(g, "diagnostics.csv", diagnostics_csv(ens.diagnostics()));
      write(g, "summary.txt", summary_text(ens, working));
      const auto grid = working_grid(working, reg_m);
      std::optional<CovariateResampler> pool;
      if (working.has_covariates()) pool.emplace(working.covariates);
      for (std::size_t k = 0; k < reg_targets.size(); ++k) {
        const auto x = transform_covariates(parse_vector(reg_targets[k]), working);
        meta.set("x_target_" + std::to_string(k), reg_targets[k]);
        const std::string suffix = "_x" + std::to_string(k);
        write(g, "predictive" + suffix + ".csv", predictive_csv(ens, grid, working.scale_factor, x, g.threads));
        if (reg_extra > 0) {
          PosteriorOptions po{reg_extra, g.seed, g.threads, 10};
          write_posterior(g, martingale_posterior(ens, grid, x, po, pool ? &*pool : nullptr), working.scale_factor,
                          suffix);
        }
      }
      if (reg_extra > 0) meta.set("n_extra", static_cast<double>(reg_extra));
      if (reg_test > 0) {
        const auto test = apply_standardization(test_raw, working);
        const auto score = heldout_log_likelihood(ens, test, g.threads);
        Metadata h;
        h.set("test_records", static_cast<double>(test.size()));
        h.set("mean_log_likelihood", score.mean);
        h.set("standard_error", score.standard_error);
        write(g, "heldout.txt", h.str());
      }
    } else if (*doob) {
      meta.set("command", "doob");
      SurvivalDataset data;
      if (doob_input.empty()) {
        data = simulate_exponential(doob_n, doob_rate_y, doob_rate_c, g.seed);
        meta.set("n", static_cast<double>(doob_n));
        meta.set("rate_y", doob_rate_y);
        meta.set("rate_c", doob_rate_c);
      } else {
        data = load_csv(doob_input);
        meta.set("input", doob_input);
      }
      data = permute(data, g.seed);
      const double a0 = doob_a0 ? *doob_a0 : tune_a0(data, doob_b0);
      doob_opt.seed = g.seed;
      doob_opt.threads = g.threads;
      const auto result = doob_demo({a0, doob_b0}, data, doob_opt);
      std::vector<double> th(result.theta_bar.data(), result.theta_bar.data() + result.theta_bar.size());
      std::vector<double> wt(result.weights.data(), result.weights.data() + result.weights.size());
      const double ks = weighted_ks_inverse_gamma(th, wt, result.exact.a, result.exact.b);
      write(g, "doob_samples.csv", doob_samples_csv(result));
      write(g, "exact_quantiles.csv", inverse_gamma_quantile_csv(result.exact.a, result.exact.b));
      Metadata s;
      s.set("a0", a0);
      s.set("b0", doob_b0);
      s.set("a_n", result.exact.a);
      s.set("b_n", result.exact.b);
      s.set("ks", ks);
      s.set("final_ess", result.ensemble.final_ess());
      write(g, "summary.txt", s.str());
      meta.set("a0", a0);
      meta.set("b0", doob_b0);
      meta.set("particles", static_cast<double>(doob_opt.particles));
      meta.set("n_extra", static_cast<double>(doob_opt.n_extra));
      meta.set("ess_frac", doob_opt.ess_frac);
      meta.set_list("permutation", data.order);
    }
    write(g, "metadata.txt", meta.str());
  } catch (const TuningError& e) {
    write(g, "tune.csv", tune_table_csv(e.table()));
    return report(e.category(), e.what());
  } catch (const DegeneracyError& e) {
    write(g, "diagnostics.csv", diagnostics_csv(e.trace()));
    return report(e.category(), e.what());
  } catch (const Error& e) {
    return report(e.category(), e.what());
  } catch (const std::invalid_argument& e) {
    return report(ErrorCategory::config, e.what());
  } catch (const std::domain_error& e) {
    return report(ErrorCategory::config, e.what());
  }
  return 0;
}
