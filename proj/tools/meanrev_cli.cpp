// meanrev: synthetic data, pool search, basket estimation and cost-aware
// backtests from the command line. All outputs are CSV; logs go to stderr.

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "meanrev/meanrev.hpp"

namespace {

using namespace meanrev;

// Writes to `file`, or stdout when it is empty or "-".
template <class F>
void emit(const std::string& file, F&& write) {
  if (file.empty() || file == "-") {
    write(std::cout);
    return;
  }
  std::ofstream out(file, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + file);
  write(out);
}

SamplePath load_data(const std::string& file, const std::string& assets) {
  SamplePath path = csv::load_sample_path(file);
  if (assets.empty()) return path;
  std::map<std::string, int> col;
  for (std::size_t j = 0; j < path.labels().size(); ++j) col[path.labels()[j]] = static_cast<int>(j);
  std::vector<int> idx;
  for (const std::string& label : csv::split_line(assets)) {
    const auto it = col.find(label);
    if (it == col.end()) throw ParseError("unknown asset '" + label + "'");
    idx.push_back(it->second);
  }
  return path.columns(idx);
}

Index in_sample_rows(const SamplePath& path, double split) {
  return static_cast<Index>(std::ceil(split * static_cast<double>(path.length())));
}

int run_gen(const UniverseSpec& spec, const std::string& out, const std::string& groups_out) {
  const Universe u = gen_universe(spec);
  emit(out, [&](std::ostream& o) { csv::write_sample_path(o, u.path); });
  if (!groups_out.empty()) {
    emit(groups_out, [&](std::ostream& o) {
      o << "asset_label,group_label\n";
      for (const auto& [a, g] : u.groups) o << a << ',' << g << '\n';
    });
  }
  std::cerr << fmt::format("generated {} dates x {} assets in {} pools\n", u.path.length(), u.path.assets(),
                           spec.pools);
  return 0;
}

int run_pools(const std::string& data, const std::string& groups_file, double split, const ExperimentConfig& cfg,
              const std::string& out) {
  const SamplePath path = csv::load_sample_path(data);
  const auto groups = csv::group_indices(
      path, groups_file.empty() ? std::vector<std::pair<std::string, std::string>>{} : csv::load_groups(groups_file));
  ExperimentConfig c = cfg;
  c.split = split;
  const std::vector<PoolRecord> pools = select_pools(path, groups, c, 0);
  emit(out, [&](std::ostream& o) { write_pools(o, pools, path); });
  std::cerr << fmt::format("{} candidate pools\n", pools.size());
  return 0;
}

struct EstimateArgs {
  std::string data;
  std::string assets;
  std::string estimator = "pca";
  std::optional<int> k;
  double u = 0.3;
  double nu_fraction = 0.0;
  std::vector<double> rho_grid{0.0, 1e-3, 1e-2};
  double mu = 1.0;
  int p = 3;
  double split = 0.85;
  int restarts = 20;
  std::uint64_t seed = 0;
  std::string out;
};

int run_estimate(const EstimateArgs& a) {
  const SamplePath path = load_data(a.data, a.assets);
  const SamplePath in_sample = path.rows(0, in_sample_rows(path, a.split));

  const AutocovarianceSet acs = build_autocov_set(in_sample, a.p);
  const Estimator e = parse_estimator(a.estimator);
  const int k = a.k.value_or(sparsity_target(a.u, acs.dim()));
  SparseEigOptions sparse;
  sparse.restarts = a.restarts;
  sparse.seed = a.seed;
  // nu, rho and mu are given relative to the median asset variance
  const double scale = median(acs.variances());
  BasketWeights w;
  if (e == Estimator::pca) {
    w = estimate_pca(acs);
  } else if (e == Estimator::box_tiao) {
    w = estimate_box_tiao(acs);
  } else if (e == Estimator::spca) {
    w = estimate_spca(acs, k, sparse);
  } else {
    const double rho_scale = e == Estimator::portmanteau ? scale * scale : scale;
    std::vector<double> rhos;
    for (double r : a.rho_grid) rhos.push_back(r * rho_scale);
    w = estimate_basket_family(e, acs, {k}, a.nu_fraction * scale, rhos, a.mu / scale, a.p, SolverOptions{}, sparse)
            .front();
  }

  emit(a.out, [&](std::ostream& o) {
    o << "asset,weight\n";
    for (Index i = 0; i < w.y.size(); ++i) {
      o << path.labels()[static_cast<std::size_t>(i)] << ',' << csv::format_double(w.y(i)) << '\n';
    }
  });
  std::cerr << fmt::format("estimator={} support={} variance={}", to_string(w.estimator), w.support.size(),
                           w.diagnostics.variance);
  if (w.diagnostics.predictability) std::cerr << fmt::format(" predictability={}", *w.diagnostics.predictability);
  if (w.diagnostics.portmanteau) std::cerr << fmt::format(" portmanteau={}", *w.diagnostics.portmanteau);
  if (w.diagnostics.crossing) std::cerr << fmt::format(" lag1_autocorrelation={}", *w.diagnostics.crossing);
  std::cerr << '\n';
  return 0;
}

int run_backtest_cmd(const std::string& data, const std::string& weights_file, double split,
                     const std::vector<double>& costs, double initial_wealth, const std::string& out,
                     const std::string& ledger_out) {
  const SamplePath path = csv::load_sample_path(data);
  std::ifstream in(weights_file);
  if (!in) throw ParseError("cannot open weights file " + weights_file);
  std::map<std::string, double> weights;
  std::string line;
  while (std::getline(in, line)) {
    const auto f = csv::split_line(line);
    if (f.size() != 2 || f[0] == "asset" || f[0].empty()) continue;
    double v = 0.0;
    if (!csv::parse_double(f[1], v)) throw ParseError("bad weight '" + f[1] + "'");
    weights[f[0]] = v;
  }
  Vector y = Vector::Zero(path.assets());
  for (const auto& [label, v] : weights) {
    const auto it = std::find(path.labels().begin(), path.labels().end(), label);
    if (it == path.labels().end()) throw ParseError("weights name unknown asset '" + label + "'");
    y(it - path.labels().begin()) = v;
  }
  BacktestOptions opt;
  opt.initial_wealth = initial_wealth;
  const std::vector<SweepPoint> sweep = cost_sweep(path, y, split, costs, opt);
  int support = 0;
  for (Index i = 0; i < y.size(); ++i) support += y(i) != 0.0;
  const Index m = in_sample_rows(path, split);
  const double variance = y.dot(build_autocov_set(path.rows(0, m), 0).a0() * y);
  emit(out, [&](std::ostream& o) {
    o << "cost,sharpe,total_cost,support_size,variance\n";
    for (const SweepPoint& p : sweep) {
      o << fmt::format("{},{},{},{},{}\n", csv::format_double(p.cost), csv::format_double(p.sharpe),
                       csv::format_double(p.total_cost), support, csv::format_double(variance));
    }
  });
  if (!ledger_out.empty()) {
    const TradeLedger ledger = run_backtest(path, y, split, costs.front(), opt);
    emit(ledger_out, [&](std::ostream& o) {
      o << "day,basket_value,position,trade_cost,pnl,wealth\n";
      for (std::size_t d = 0; d < ledger.days.size(); ++d) {
        const LedgerDay& day = ledger.days[d];
        o << fmt::format("{},{},{},{},{},{}\n", d, csv::format_double(day.basket_value),
                         csv::format_double(day.position), csv::format_double(day.trade_cost),
                         csv::format_double(day.pnl), csv::format_double(day.wealth));
      }
    });
  }
  if (sweep.size() >= 2) {
    const LineFit fit = intercept_slope(sweep);
    std::cerr << fmt::format("intercept={} slope={}\n", fit.intercept, fit.slope);
  }
  return 0;
}

int run_experiment_cmd(const std::string& config_file, const std::string& out_override) {
  ExperimentConfig cfg = load_config(config_file);
  if (!out_override.empty()) cfg.output_dir = out_override;
  if (cfg.data_path.empty()) throw ParseError("config: data.path is required");
  const SamplePath path = csv::load_sample_path(cfg.data_path);
  const auto groups = csv::group_indices(
      path, cfg.groups_path.empty() ? std::vector<std::pair<std::string, std::string>>{} : csv::load_groups(cfg.groups_path));
  const ExperimentResult result = run_experiment(cfg, path, groups);
  for (const std::string& f : result.failures) std::cerr << "skipped: " << f << '\n';
  write_experiment(result, path, cfg.output_dir);
  std::cerr << fmt::format("{} pools, {} cell rows, {} aggregate rows written to {}\n", result.pools.size(),
                           result.rows.size(), result.aggregate.size(), cfg.output_dir);
  return 0;
}

int run_report(const std::vector<std::string>& cell_files, const std::string& out_dir) {
  std::vector<CellRow> rows;
  for (const std::string& f : cell_files) {
    std::ifstream in(f);
    if (!in) throw ParseError("cannot open cells file " + f);
    std::vector<CellRow> part = read_cells(in);
    rows.insert(rows.end(), part.begin(), part.end());
  }
  const std::vector<AggregateRow> agg = aggregate(rows);
  std::filesystem::create_directories(out_dir);
  {
    std::ofstream o(std::filesystem::path(out_dir) / "aggregate.csv", std::ios::binary);
    write_aggregate(o, agg);
  }
  {
    std::ofstream o(std::filesystem::path(out_dir) / "curves.csv", std::ios::binary);
    write_curves(o, agg);
  }
  std::cerr << fmt::format("{} rows aggregated into {} groups\n", rows.size(), agg.size());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Sparse, volatile mean-reverting baskets: estimation and cost-aware backtests"};
  app.require_subcommand(1);

  // gen
  UniverseSpec gen_spec;
  std::string gen_out;
  std::string gen_groups;
  auto* gen = app.add_subcommand("gen", "Generate a synthetic universe of cointegrated pools");
  gen->add_option("--pools", gen_spec.pools, "Number of pools")->check(CLI::PositiveNumber);
  gen->add_option("--assets", gen_spec.assets_per_pool, "Assets per pool")->check(CLI::PositiveNumber);
  gen->add_option("--length", gen_spec.length, "Number of dates")->check(CLI::Range(3, 1 << 24));
  gen->add_option("--ar", gen_spec.ar_coeffs, "AR(1) coefficients of the planted stationary directions")
      ->delimiter(',');
  gen->add_option("--noise-sd", gen_spec.noise_sd, "Observation noise standard deviation");
  gen->add_option("--innovation-sd", gen_spec.innovation_sd, "Latent innovation standard deviation");
  gen->add_option("--level", gen_spec.level, "Constant added to every asset");
  gen->add_option("--seed", gen_spec.seed, "Generator seed");
  gen->add_option("-o,--out", gen_out, "Data CSV (default stdout)");
  gen->add_option("--groups", gen_groups, "Group sidecar CSV to write");

  // pools
  std::string pools_data;
  std::string pools_groups;
  std::string pools_out;
  double pools_split = 0.85;
  ExperimentConfig pools_cfg;
  auto* pools = app.add_subcommand("pools", "Greedy backward-forward search for candidate pools");
  pools->add_option("--data", pools_data, "Data CSV")->required();
  pools->add_option("--groups", pools_groups, "Group sidecar CSV");
  pools->add_option("--split", pools_split, "Fraction of dates used for the search");
  pools->add_option("--n-min", pools_cfg.pools.n_min, "Smallest pool size");
  pools->add_option("--n-max", pools_cfg.pools.n_max, "Largest pool size");
  pools->add_option("--max-candidates", pools_cfg.pools.max_candidates, "Candidates kept per group");
  pools->add_option("--keep-best", pools_cfg.keep_best, "Pools kept overall");
  pools->add_option("--scope", pools_cfg.keep_scope, "Scope of keep-best: window or group")
      ->check(CLI::IsMember({"window", "group"}));
  pools->add_option("-o,--out", pools_out, "Pools CSV (default stdout)");

  // estimate
  EstimateArgs est;
  auto* estimate = app.add_subcommand("estimate", "Estimate a single basket on the in-sample dates");
  estimate->add_option("--data", est.data, "Data CSV")->required();
  estimate->add_option("--assets", est.assets, "Comma-separated asset labels (default all)");
  estimate->add_option("--estimator", est.estimator, "pca, spca, box_tiao, predictability, portmanteau, crossing")
      ->check(CLI::IsMember({"pca", "spca", "box_tiao", "predictability", "portmanteau", "crossing"}));
  estimate->add_option("--k", est.k, "Support size (overrides --u)");
  estimate->add_option("--u", est.u, "Support size as a fraction of the pool size");
  estimate->add_option("--nu", est.nu_fraction, "Variance floor as a multiple of the median asset variance");
  estimate->add_option("--rho", est.rho_grid, "L1 weights tried (relative)")->delimiter(',');
  estimate->add_option("--mu", est.mu, "Weight of higher-lag terms for the crossing criterion (relative)");
  estimate->add_option("--p", est.p, "Number of autocovariance lags");
  estimate->add_option("--split", est.split, "Fraction of dates used for estimation");
  estimate->add_option("--restarts", est.restarts, "Sparse eigenvector restarts");
  estimate->add_option("--seed", est.seed, "Seed for sparse eigenvector restarts");
  estimate->add_option("-o,--out", est.out, "Weights CSV (default stdout)");

  // backtest
  std::string bt_data;
  std::string bt_weights;
  std::string bt_out;
  std::string bt_ledger;
  double bt_split = 0.85;
  double bt_wealth = 1.0;
  std::vector<double> bt_costs = default_cost_grid();
  auto* backtest = app.add_subcommand("backtest", "Backtest one basket across a cost grid");
  backtest->add_option("--data", bt_data, "Data CSV")->required();
  backtest->add_option("--weights", bt_weights, "Weights CSV (asset,weight)")->required();
  backtest->add_option("--split", bt_split, "Fraction of dates used to fit the AR(1) model");
  backtest->add_option("--costs", bt_costs, "Cost per contract unit")->delimiter(',');
  backtest->add_option("--initial-wealth", bt_wealth, "Starting wealth");
  backtest->add_option("-o,--out", bt_out, "Report CSV (default stdout)");
  backtest->add_option("--ledger", bt_ledger, "Write the daily ledger at the first cost level");

  // experiment
  std::string exp_config;
  std::string exp_out;
  auto* experiment = app.add_subcommand("experiment", "Run the windowed estimation and backtest batch");
  experiment->add_option("config", exp_config, "Config file")->required();
  experiment->add_option("-o,--out", exp_out, "Output directory (overrides the config)");

  // report
  std::vector<std::string> report_cells;
  std::string report_out = ".";
  auto* report = app.add_subcommand("report", "Aggregate existing cells.csv files");
  report->add_option("cells", report_cells, "cells.csv files")->required();
  report->add_option("-o,--out", report_out, "Output directory");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*gen) return run_gen(gen_spec, gen_out, gen_groups);
    if (*pools) return run_pools(pools_data, pools_groups, pools_split, pools_cfg, pools_out);
    if (*estimate) return run_estimate(est);
    if (*backtest) return run_backtest_cmd(bt_data, bt_weights, bt_split, bt_costs, bt_wealth, bt_out, bt_ledger);
    if (*experiment) return run_experiment_cmd(exp_config, exp_out);
    if (*report) return run_report(report_cells, report_out);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
