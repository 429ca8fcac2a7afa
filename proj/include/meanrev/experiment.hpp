#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <tuple>
#include <vector>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <fmt/format.h>

#include "meanrev/backtest.hpp"
#include "meanrev/csv.hpp"
#include "meanrev/estimators.hpp"
#include "meanrev/universe.hpp"

namespace meanrev {

struct ExperimentConfig {
  std::string data_path;
  std::string groups_path;
  std::string output_dir = ".";

  int window_length = 255;
  int window_count = 1;
  int window_step = 0;  // 0 means disjoint windows (step = length)
  double split = 0.85;

  std::string pool_mode = "greedy";  // greedy | groups
  PoolSearchOptions pools;
  std::size_t keep_best = 50;
  std::string keep_scope = "window";  // window | group

  std::vector<Estimator> estimators{Estimator::pca, Estimator::spca, Estimator::predictability,
                                    Estimator::portmanteau, Estimator::crossing};
  std::vector<double> nu_fractions{0.0, 0.1, 0.2, 0.3, 0.4, 0.5};
  std::vector<double> sparsity_fractions{0.3, 0.5, 0.7};
  int p = 3;
  double mu = 1.0;                               // relative to 1 / median asset variance
  std::vector<double> rho_grid{0.0, 1e-3, 1e-2};  // relative to the objective's variance scale
  int restarts = 20;

  std::vector<double> costs = default_cost_grid();
  double initial_wealth = 1.0;

  SolverOptions solver{1e-6, 5000};
  std::uint64_t seed = 0;
  int threads = 1;
};

namespace detail {

template <class T>
std::vector<T> parse_list(const std::string& text, T (*conv)(const std::string&)) {
  std::vector<T> out;
  for (const std::string& item : csv::split_line(text)) {
    if (!item.empty()) out.push_back(conv(item));
  }
  return out;
}

inline double to_double(const std::string& s) {
  double v = 0.0;
  if (!csv::parse_double(s, v)) throw ParseError("expected a number, got '" + s + "'");
  return v;
}

inline Estimator to_estimator(const std::string& s) {
  try {
    return parse_estimator(s);
  } catch (const std::invalid_argument& e) {
    throw ParseError(e.what());
  }
}

}  // namespace detail

/// Flat INI file:
///   [data]        path, groups
///   [windows]     length, count, step, split
///   [pools]       mode, n_min, n_max, max_candidates, keep_best, scope
///   [estimators]  list, nu_fractions, sparsity_fractions, p, mu, rho_grid, restarts
///   [backtest]    costs, initial_wealth
///   [solver]      tol, max_iter
///   [run]         seed, threads, output_dir
/// Relative paths resolve against `base_dir`.
inline ExperimentConfig parse_config(std::istream& in, const std::filesystem::path& base_dir = {}) {
  namespace pt = boost::property_tree;
  pt::ptree tree;
  try {
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ParseError(std::string("config: ") + e.what());
  }
  ExperimentConfig c;
  auto resolve = [&base_dir](const std::string& p) {
    if (p.empty()) return p;
    const std::filesystem::path path(p);
    return path.is_absolute() || base_dir.empty() ? p : (base_dir / path).string();
  };
  auto as_int = [](const std::string& s) {
    const double v = detail::to_double(s);
    if (v != std::floor(v)) throw ParseError("expected an integer, got '" + s + "'");
    return static_cast<long long>(v);
  };

  for (const auto& [section, entries] : tree) {
    for (const auto& [key, node] : entries) {
      const std::string v = node.get_value<std::string>();
      const std::string k = section + "." + key;
      if (k == "data.path") c.data_path = resolve(v);
      else if (k == "data.groups") c.groups_path = resolve(v);
      else if (k == "windows.length") c.window_length = static_cast<int>(as_int(v));
      else if (k == "windows.count") c.window_count = static_cast<int>(as_int(v));
      else if (k == "windows.step") c.window_step = static_cast<int>(as_int(v));
      else if (k == "windows.split") c.split = detail::to_double(v);
      else if (k == "pools.mode") c.pool_mode = v;
      else if (k == "pools.n_min") c.pools.n_min = static_cast<int>(as_int(v));
      else if (k == "pools.n_max") c.pools.n_max = static_cast<int>(as_int(v));
      else if (k == "pools.max_candidates") c.pools.max_candidates = static_cast<std::size_t>(as_int(v));
      else if (k == "pools.keep_best") c.keep_best = static_cast<std::size_t>(as_int(v));
      else if (k == "pools.scope") c.keep_scope = v;
      else if (k == "estimators.list") c.estimators = detail::parse_list<Estimator>(v, detail::to_estimator);
      else if (k == "estimators.nu_fractions") c.nu_fractions = detail::parse_list<double>(v, detail::to_double);
      else if (k == "estimators.sparsity_fractions") c.sparsity_fractions = detail::parse_list<double>(v, detail::to_double);
      else if (k == "estimators.p") c.p = static_cast<int>(as_int(v));
      else if (k == "estimators.mu") c.mu = detail::to_double(v);
      else if (k == "estimators.rho_grid") c.rho_grid = detail::parse_list<double>(v, detail::to_double);
      else if (k == "estimators.restarts") c.restarts = static_cast<int>(as_int(v));
      else if (k == "backtest.costs") c.costs = detail::parse_list<double>(v, detail::to_double);
      else if (k == "backtest.initial_wealth") c.initial_wealth = detail::to_double(v);
      else if (k == "solver.tol") c.solver.tol = detail::to_double(v);
      else if (k == "solver.max_iter") c.solver.max_iter = static_cast<int>(as_int(v));
      else if (k == "run.seed") c.seed = static_cast<std::uint64_t>(as_int(v));
      else if (k == "run.threads") c.threads = static_cast<int>(as_int(v));
      else if (k == "run.output_dir") c.output_dir = resolve(v);
      else throw ParseError("config: unknown key '" + k + "'");
    }
  }

  if (c.window_length < 20) throw ParseError("config: window length must be at least 20");
  if (c.window_count < 1) throw ParseError("config: window count must be positive");
  if (c.window_step < 0) throw ParseError("config: window step must be non-negative");
  if (!(c.split > 0.0 && c.split < 1.0)) throw ParseError("config: split must lie in (0, 1)");
  if (c.pool_mode != "greedy" && c.pool_mode != "groups") throw ParseError("config: pools.mode is greedy or groups");
  if (c.keep_scope != "window" && c.keep_scope != "group") throw ParseError("config: pools.scope is window or group");
  if (c.p < 1) throw ParseError("config: p must be at least 1");
  if (c.rho_grid.empty()) throw ParseError("config: rho_grid must not be empty");
  if (c.costs.empty()) throw ParseError("config: cost grid must not be empty");
  if (c.estimators.empty()) throw ParseError("config: estimator list must not be empty");
  for (double u : c.sparsity_fractions) {
    if (!(u > 0.0 && u <= 1.0)) throw ParseError("config: sparsity fractions must lie in (0, 1]");
  }
  for (double f : c.nu_fractions) {
    if (!(f >= 0.0 && f <= 1.0)) throw ParseError("config: nu fractions must lie in [0, 1]");
  }
  if (c.threads < 1) c.threads = 1;
  return c;
}

inline ExperimentConfig load_config(const std::string& file) {
  std::ifstream in(file);
  if (!in) throw ParseError("cannot open config file " + file);
  return parse_config(in, std::filesystem::path(file).parent_path());
}

/// k = floor(u d), at least 1.
inline int sparsity_target(double u, Index d) {
  return std::max(1, static_cast<int>(std::floor(u * static_cast<double>(d) + 1e-9)));
}

/// One (estimator, nu, u) basket for one pool.
struct CellBasket {
  Estimator estimator = Estimator::pca;
  std::optional<double> nu_fraction;
  std::optional<double> u;
  BasketWeights basket;
};

/// One row of cells.csv.
struct CellRow {
  int window = 0;
  int pool = 0;
  std::string estimator;
  std::optional<double> nu_fraction;
  std::optional<double> u;
  int k = 0;
  double rho = 0.0;
  double cost = 0.0;
  double sharpe = 0.0;
  double total_cost = 0.0;
  int support_size = 0;
  double variance = 0.0;
};

struct PoolRecord {
  int window = 0;
  int pool = 0;
  std::string group;
  PoolCandidate candidate;
};

struct AggregateRow {
  std::string estimator;
  std::optional<double> nu_fraction;
  std::optional<double> u;
  int cells = 0;
  LineFit fit;
  std::vector<SweepPoint> curve;  // mean Sharpe per cost
};

/// All baskets for one pool from its in-sample autocovariances. Failures of
/// single cells are appended to `failures` and skipped.
inline std::vector<CellBasket> estimate_pool_baskets(const AutocovarianceSet& acs, const ExperimentConfig& cfg,
                                                     std::vector<std::string>& failures) {
  const Index d = acs.dim();
  const double scale = median(acs.variances());
  SparseEigOptions sparse;
  sparse.restarts = cfg.restarts;
  sparse.seed = cfg.seed;
  const int p = std::min(cfg.p, acs.order());

  std::vector<CellBasket> out;
  for (Estimator e : cfg.estimators) {
    try {
      if (e == Estimator::pca) {
        out.push_back({e, std::nullopt, std::nullopt, estimate_pca(acs)});
      } else if (e == Estimator::box_tiao) {
        out.push_back({e, std::nullopt, std::nullopt, estimate_box_tiao(acs)});
      } else if (e == Estimator::spca) {
        for (double u : cfg.sparsity_fractions) {
          out.push_back({e, std::nullopt, u, estimate_spca(acs, sparsity_target(u, d), sparse)});
        }
      }
    } catch (const std::exception& ex) {
      failures.push_back(fmt::format("{}: {}", to_string(e), ex.what()));
    }
    if (!is_relaxation(e)) continue;

    std::vector<int> ks;
    for (double u : cfg.sparsity_fractions) ks.push_back(sparsity_target(u, d));
    const double rho_scale = e == Estimator::portmanteau ? scale * scale : scale;
    std::vector<double> rhos;
    for (double r : cfg.rho_grid) rhos.push_back(r * rho_scale);
    const double mu = scale > 0.0 ? cfg.mu / scale : 0.0;
    for (double f : cfg.nu_fractions) {
      try {
        std::vector<BasketWeights> family =
            estimate_basket_family(e, acs, ks, f * scale, rhos, mu, p, cfg.solver, sparse);
        for (std::size_t i = 0; i < family.size(); ++i) {
          out.push_back({e, f, cfg.sparsity_fractions[i], std::move(family[i])});
        }
      } catch (const std::exception& ex) {
        failures.push_back(fmt::format("{} nu={}: {}", to_string(e), f, ex.what()));
      }
    }
  }
  return out;
}

struct PoolJobResult {
  std::vector<CellBasket> baskets;
  std::vector<CellRow> rows;
  std::vector<std::string> failures;
};

/// Estimates on the first ceil(split * T) dates of `window_path` only, then
/// backtests every basket over the whole window for every cost.
inline PoolJobResult run_pool_job(const SamplePath& window_path, const ExperimentConfig& cfg, int window, int pool) {
  PoolJobResult res;
  const auto m = static_cast<Index>(std::ceil(cfg.split * static_cast<double>(window_path.length())));
  try {
    const AutocovarianceSet acs = build_autocov_set(window_path.rows(0, m), cfg.p);
    res.baskets = estimate_pool_baskets(acs, cfg, res.failures);
  } catch (const std::exception& ex) {
    res.failures.push_back(fmt::format("autocovariances: {}", ex.what()));
    return res;
  }
  BacktestOptions bt;
  bt.initial_wealth = cfg.initial_wealth;
  for (const CellBasket& cell : res.baskets) {
    try {
      const std::vector<SweepPoint> sweep = cost_sweep(window_path, cell.basket.y, cfg.split, cfg.costs, bt);
      for (const SweepPoint& pt : sweep) {
        CellRow row;
        row.window = window;
        row.pool = pool;
        row.estimator = std::string(to_string(cell.estimator));
        row.nu_fraction = cell.nu_fraction;
        row.u = cell.u;
        row.k = static_cast<int>(cell.basket.params.k.value_or(static_cast<int>(cell.basket.y.size())));
        row.rho = cell.basket.params.rho;
        row.cost = pt.cost;
        row.sharpe = pt.sharpe;
        row.total_cost = pt.total_cost;
        row.support_size = static_cast<int>(cell.basket.support.size());
        row.variance = cell.basket.diagnostics.variance;
        res.rows.push_back(row);
      }
    } catch (const std::exception& ex) {
      res.failures.push_back(fmt::format("backtest {}: {}", to_string(cell.estimator), ex.what()));
    }
  }
  return res;
}

/// Candidate pools for one window, from the in-sample part only.
inline std::vector<PoolRecord> select_pools(const SamplePath& window_path,
                                            const std::map<std::string, std::vector<int>>& groups,
                                            const ExperimentConfig& cfg, int window) {
  const auto m = static_cast<Index>(std::ceil(cfg.split * static_cast<double>(window_path.length())));
  const SamplePath in_sample = window_path.rows(0, m);
  std::vector<std::pair<std::string, PoolCandidate>> all;
  for (const auto& [name, idx] : groups) {
    std::vector<PoolCandidate> found;
    if (cfg.pool_mode == "groups") {
      const Matrix cov = symmetrize(autocovariance(in_sample.columns(idx), 0));
      std::vector<int> local(idx.size());
      for (std::size_t i = 0; i < idx.size(); ++i) local[i] = static_cast<int>(i);
      found.push_back({idx, pool_score(cov, local)});
    } else {
      if (idx.size() < 3) {
        std::cerr << "warning: skipping group '" << name << "' with fewer than 3 assets\n";
        continue;
      }
      found = greedy_pool_search(in_sample, idx, cfg.pools);
    }
    if (cfg.keep_scope == "group") found = keep_best(std::move(found), cfg.keep_best);
    for (PoolCandidate& c : found) all.emplace_back(name, std::move(c));
  }
  if (cfg.keep_scope == "window") {
    std::stable_sort(all.begin(), all.end(), [](const auto& a, const auto& b) { return a.second < b.second; });
    std::vector<std::pair<std::string, PoolCandidate>> kept;
    std::set<std::vector<int>> seen;
    for (auto& entry : all) {
      if (kept.size() >= cfg.keep_best) break;
      if (seen.insert(entry.second.asset_indices).second) kept.push_back(std::move(entry));
    }
    all = std::move(kept);
  }
  std::vector<PoolRecord> out;
  for (std::size_t i = 0; i < all.size(); ++i) {
    out.push_back({window, static_cast<int>(i), all[i].first, std::move(all[i].second)});
  }
  return out;
}

/// Mean Sharpe curve per (estimator, nu, u) and its intercept/slope.
inline std::vector<AggregateRow> aggregate(const std::vector<CellRow>& rows) {
  using Key = std::tuple<std::string, double, double>;  // NaN-free key: -1 marks "not set"
  std::map<Key, std::map<double, std::pair<double, int>>> sums;
  std::map<Key, std::set<std::pair<int, int>>> cells;
  std::map<Key, std::size_t> first_seen;
  for (const CellRow& r : rows) {
    const Key key{r.estimator, r.nu_fraction.value_or(-1.0), r.u.value_or(-1.0)};
    first_seen.emplace(key, first_seen.size());
    auto& acc = sums[key][r.cost];
    acc.first += r.sharpe;
    acc.second += 1;
    cells[key].insert({r.window, r.pool});
  }
  std::vector<AggregateRow> out;
  for (const auto& [key, by_cost] : sums) {
    AggregateRow a;
    a.estimator = std::get<0>(key);
    if (std::get<1>(key) >= 0.0) a.nu_fraction = std::get<1>(key);
    if (std::get<2>(key) >= 0.0) a.u = std::get<2>(key);
    a.cells = static_cast<int>(cells[key].size());
    for (const auto& [cost, acc] : by_cost) a.curve.push_back({cost, acc.first / acc.second, 0.0});
    if (a.curve.size() >= 2) a.fit = intercept_slope(a.curve);
    else a.fit = {a.curve.front().sharpe, 0.0};
    out.push_back(std::move(a));
  }
  std::stable_sort(out.begin(), out.end(), [&first_seen](const AggregateRow& x, const AggregateRow& y) {
    const Key kx{x.estimator, x.nu_fraction.value_or(-1.0), x.u.value_or(-1.0)};
    const Key ky{y.estimator, y.nu_fraction.value_or(-1.0), y.u.value_or(-1.0)};
    return first_seen.at(kx) < first_seen.at(ky);
  });
  return out;
}

namespace detail {

inline std::string opt_str(const std::optional<double>& v) { return v ? csv::format_double(*v) : std::string(); }

inline std::optional<double> opt_parse(const std::string& s) {
  if (s.empty()) return std::nullopt;
  return to_double(s);
}

}  // namespace detail

inline void write_cells(std::ostream& out, const std::vector<CellRow>& rows) {
  out << "window,pool,estimator,nu,u,k,rho,cost,sharpe,total_cost,support_size,variance\n";
  for (const CellRow& r : rows) {
    out << fmt::format("{},{},{},{},{},{},{},{},{},{},{},{}\n", r.window, r.pool, r.estimator,
                       detail::opt_str(r.nu_fraction), detail::opt_str(r.u), r.k, csv::format_double(r.rho),
                       csv::format_double(r.cost), csv::format_double(r.sharpe), csv::format_double(r.total_cost),
                       r.support_size, csv::format_double(r.variance));
  }
}

inline std::vector<CellRow> read_cells(std::istream& in) {
  std::vector<CellRow> rows;
  std::string line;
  bool header = true;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (csv::trim(line).empty()) continue;
    if (header) {
      header = false;
      if (line.rfind("window,", 0) == 0) continue;
    }
    const auto f = csv::split_line(line);
    if (f.size() != 12) throw ParseError("cells CSV rows need 12 fields");
    CellRow r;
    r.window = static_cast<int>(detail::to_double(f[0]));
    r.pool = static_cast<int>(detail::to_double(f[1]));
    r.estimator = f[2];
    r.nu_fraction = detail::opt_parse(f[3]);
    r.u = detail::opt_parse(f[4]);
    r.k = static_cast<int>(detail::to_double(f[5]));
    r.rho = detail::to_double(f[6]);
    r.cost = detail::to_double(f[7]);
    r.sharpe = detail::to_double(f[8]);
    r.total_cost = detail::to_double(f[9]);
    r.support_size = static_cast<int>(detail::to_double(f[10]));
    r.variance = detail::to_double(f[11]);
    rows.push_back(std::move(r));
  }
  return rows;
}

inline void write_aggregate(std::ostream& out, const std::vector<AggregateRow>& agg) {
  out << "estimator,nu,u,cells,intercept,slope\n";
  for (const AggregateRow& a : agg) {
    out << fmt::format("{},{},{},{},{},{}\n", a.estimator, detail::opt_str(a.nu_fraction), detail::opt_str(a.u),
                       a.cells, csv::format_double(a.fit.intercept), csv::format_double(a.fit.slope));
  }
}

inline void write_curves(std::ostream& out, const std::vector<AggregateRow>& agg) {
  out << "estimator,nu,u,cost,mean_sharpe\n";
  for (const AggregateRow& a : agg) {
    for (const SweepPoint& pt : a.curve) {
      out << fmt::format("{},{},{},{},{}\n", a.estimator, detail::opt_str(a.nu_fraction), detail::opt_str(a.u),
                         csv::format_double(pt.cost), csv::format_double(pt.sharpe));
    }
  }
}

inline void write_pools(std::ostream& out, const std::vector<PoolRecord>& pools, const SamplePath& path) {
  out << "window,pool,group,score,size,assets\n";
  for (const PoolRecord& p : pools) {
    std::string assets;
    for (std::size_t i = 0; i < p.candidate.asset_indices.size(); ++i) {
      assets += (i ? ";" : "") + path.labels()[static_cast<std::size_t>(p.candidate.asset_indices[i])];
    }
    out << fmt::format("{},{},{},{},{},{}\n", p.window, p.pool, p.group, csv::format_double(p.candidate.score),
                       p.candidate.asset_indices.size(), assets);
  }
}

struct ExperimentResult {
  std::vector<PoolRecord> pools;
  std::vector<CellRow> rows;
  std::vector<AggregateRow> aggregate;
  std::vector<std::string> failures;
};

/// Windows x pools x estimators x (nu, u), backtested across the cost grid.
/// Pool jobs run on a bounded worker pool; results are assembled in job
/// order so output does not depend on scheduling.
inline ExperimentResult run_experiment(const ExperimentConfig& cfg, const SamplePath& path,
                                       const std::map<std::string, std::vector<int>>& groups) {
  const int step = cfg.window_step > 0 ? cfg.window_step : cfg.window_length;
  const Index needed = static_cast<Index>(cfg.window_count - 1) * step + cfg.window_length;
  if (needed > path.length()) {
    throw std::invalid_argument(fmt::format("{} windows of length {} (step {}) need {} dates, data has {}",
                                            cfg.window_count, cfg.window_length, step, needed, path.length()));
  }

  ExperimentResult result;
  struct Job {
    int window;
    int pool;
    std::vector<int> assets;
  };
  std::vector<Job> jobs;
  for (int w = 0; w < cfg.window_count; ++w) {
    const SamplePath window_path = path.rows(static_cast<Index>(w) * step, cfg.window_length);
    std::vector<PoolRecord> pools = select_pools(window_path, groups, cfg, w);
    for (const PoolRecord& p : pools) jobs.push_back({w, p.pool, p.candidate.asset_indices});
    result.pools.insert(result.pools.end(), pools.begin(), pools.end());
  }

  std::vector<PoolJobResult> outputs(jobs.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&]() {
    for (std::size_t j = next++; j < jobs.size(); j = next++) {
      const Job& job = jobs[j];
      const SamplePath window_path =
          path.rows(static_cast<Index>(job.window) * step, cfg.window_length).columns(job.assets);
      outputs[j] = run_pool_job(window_path, cfg, job.window, job.pool);
    }
  };
  const int n_threads = std::max(1, std::min<int>(cfg.threads, static_cast<int>(jobs.size())));
  if (n_threads == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (int i = 0; i < n_threads; ++i) pool.emplace_back(worker);
  }

  for (std::size_t j = 0; j < jobs.size(); ++j) {
    for (const std::string& f : outputs[j].failures) {
      result.failures.push_back(fmt::format("window {} pool {}: {}", jobs[j].window, jobs[j].pool, f));
    }
    result.rows.insert(result.rows.end(), outputs[j].rows.begin(), outputs[j].rows.end());
  }
  result.aggregate = aggregate(result.rows);
  return result;
}

/// Writes pools.csv, cells.csv, aggregate.csv and curves.csv into `dir`.
inline void write_experiment(const ExperimentResult& r, const SamplePath& path, const std::string& dir) {
  std::filesystem::create_directories(dir);
  const std::filesystem::path base(dir);
  auto open = [&base](const char* name) {
    std::ofstream f(base / name, std::ios::binary);
    if (!f) throw std::runtime_error("cannot write " + (base / name).string());
    return f;
  };
  {
    auto f = open("pools.csv");
    write_pools(f, r.pools, path);
  }
  {
    auto f = open("cells.csv");
    write_cells(f, r.rows);
  }
  {
    auto f = open("aggregate.csv");
    write_aggregate(f, r.aggregate);
  }
  {
    auto f = open("curves.csv");
    write_curves(f, r.aggregate);
  }
}

}  // namespace meanrev
