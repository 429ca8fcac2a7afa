#pragma once

#include <cmath>
#include <vector>

#include "meanrev/estimators.hpp"
#include "meanrev/proxies.hpp"
#include "meanrev/timeseries.hpp"

namespace meanrev {

struct LedgerDay {
  double basket_value = 0.0;
  double position = 0.0;  // basket units held after today's trade
  Vector holdings;        // position * y
  double trade_cost = 0.0;
  double pnl = 0.0;
  double wealth = 0.0;
};

/// Day 0 is the last in-sample date (flat, initial wealth); days 1..D are
/// the out-of-sample dates, the last of which liquidates.
struct TradeLedger {
  std::vector<LedgerDay> days;
  Ar1Fit fit;
  Index in_sample_length = 0;
  double initial_wealth = 1.0;
  double cost_per_unit = 0.0;
};

struct BacktestOptions {
  double initial_wealth = 1.0;
  double wealth_floor = 0.01;  // fraction of initial wealth used as a sizing floor
};

/// Log-utility contrarian position a (mean - x) / sigma^2 * wealth.
inline double jurek_position(const Ar1Fit& fit, double x, double wealth) {
  if (!(fit.noise_sd > 1e-12)) throw DegenerateError("AR(1) noise scale is degenerate");
  return fit.coeff * (fit.mean - x) / (fit.noise_sd * fit.noise_sd) * wealth;
}

/// Trades b_t = y'x_t out of sample with the AR(1) fit from the first
/// ceil(split * T) dates. Positions are sized on gross marked-to-market
/// wealth, so they do not depend on the cost level.
inline TradeLedger run_backtest(const SamplePath& path, const Vector& y, double split, double cost_per_unit,
                                const BacktestOptions& opt = {}) {
  if (!(split > 0.0 && split < 1.0)) throw std::invalid_argument("split must lie in (0, 1)");
  if (y.size() != path.assets()) throw std::invalid_argument("weight vector does not match asset count");
  if (!(cost_per_unit >= 0.0)) throw std::invalid_argument("cost per unit must be non-negative");
  const Index t_total = path.length();
  const auto m = static_cast<Index>(std::ceil(split * static_cast<double>(t_total)));
  if (m < 10) throw std::invalid_argument("in-sample segment needs at least 10 dates");
  if (m >= t_total) throw std::invalid_argument("split leaves no out-of-sample dates");

  const Vector b = path.values() * y;
  TradeLedger ledger;
  ledger.fit = fit_ar1(std::span<const double>(b.data(), static_cast<std::size_t>(m)));
  ledger.in_sample_length = m;
  ledger.initial_wealth = opt.initial_wealth;
  ledger.cost_per_unit = cost_per_unit;

  LedgerDay start;
  start.basket_value = b(m - 1);
  start.holdings = Vector::Zero(y.size());
  start.wealth = opt.initial_wealth;
  ledger.days.push_back(start);

  double gross = opt.initial_wealth;
  const double floor = opt.wealth_floor * opt.initial_wealth;
  for (Index t = m; t < t_total; ++t) {
    const LedgerDay& prev = ledger.days.back();
    LedgerDay day;
    day.basket_value = b(t);
    day.pnl = prev.position * (b(t) - prev.basket_value);
    gross += day.pnl;
    day.position = t + 1 < t_total ? jurek_position(ledger.fit, b(t), std::max(gross, floor)) : 0.0;
    day.holdings = day.position * y;
    day.trade_cost = cost_per_unit * (day.holdings - prev.holdings).lpNorm<1>();
    day.wealth = prev.wealth + day.pnl - day.trade_cost;
    ledger.days.push_back(std::move(day));
  }
  return ledger;
}

inline TradeLedger run_backtest(const SamplePath& path, const BasketWeights& w, double split, double cost_per_unit,
                                const BacktestOptions& opt = {}) {
  return run_backtest(path, w.y, split, cost_per_unit, opt);
}

struct SharpeRatio {
  double value = 0.0;
  bool zero_sd = false;
};

/// Annualized mean / population sd of daily wealth changes.
inline SharpeRatio sharpe(const std::vector<double>& daily) {
  if (daily.size() < 2) throw std::invalid_argument("Sharpe ratio needs at least 2 daily changes");
  double mean = 0.0;
  for (double d : daily) mean += d;
  mean /= static_cast<double>(daily.size());
  double var = 0.0;
  for (double d : daily) var += (d - mean) * (d - mean);
  var /= static_cast<double>(daily.size());
  // sd below rounding noise of the mean counts as zero
  if (!(var > 1e-28 * std::max(1.0, mean * mean))) return {0.0, true};
  return {mean / std::sqrt(var) * std::sqrt(252.0), false};
}

inline std::vector<double> daily_changes(const TradeLedger& ledger) {
  std::vector<double> d;
  for (std::size_t i = 1; i < ledger.days.size(); ++i) d.push_back(ledger.days[i].wealth - ledger.days[i - 1].wealth);
  return d;
}

inline SharpeRatio sharpe(const TradeLedger& ledger) { return sharpe(daily_changes(ledger)); }

struct BacktestReport {
  double sharpe = 0.0;
  bool zero_sd = false;
  double mean_daily_pnl = 0.0;
  double sd_daily_pnl = 0.0;
  double total_cost = 0.0;
  double cost_per_unit = 0.0;
};

inline BacktestReport summarize(const TradeLedger& ledger) {
  BacktestReport r;
  const std::vector<double> d = daily_changes(ledger);
  const SharpeRatio s = sharpe(d);
  r.sharpe = s.value;
  r.zero_sd = s.zero_sd;
  for (double x : d) r.mean_daily_pnl += x;
  r.mean_daily_pnl /= static_cast<double>(d.size());
  for (double x : d) r.sd_daily_pnl += (x - r.mean_daily_pnl) * (x - r.mean_daily_pnl);
  r.sd_daily_pnl = std::sqrt(r.sd_daily_pnl / static_cast<double>(d.size()));
  for (const LedgerDay& day : ledger.days) r.total_cost += day.trade_cost;
  r.cost_per_unit = ledger.cost_per_unit;
  return r;
}

/// 0.03, 0.05, ..., 0.17.
inline std::vector<double> default_cost_grid() {
  std::vector<double> g;
  for (int i = 0; i < 8; ++i) g.push_back(0.03 + 0.02 * i);
  return g;
}

struct SweepPoint {
  double cost = 0.0;
  double sharpe = 0.0;
  double total_cost = 0.0;
};

inline std::vector<SweepPoint> cost_sweep(const SamplePath& path, const Vector& y, double split,
                                          const std::vector<double>& costs, const BacktestOptions& opt = {}) {
  std::vector<SweepPoint> out;
  for (double c : costs) {
    const BacktestReport r = summarize(run_backtest(path, y, split, c, opt));
    out.push_back({c, r.sharpe, r.total_cost});
  }
  return out;
}

struct LineFit {
  double intercept = 0.0;
  double slope = 0.0;
};

/// Ordinary least squares of Sharpe on cost.
inline LineFit intercept_slope(const std::vector<SweepPoint>& sweep) {
  if (sweep.size() < 2) throw std::invalid_argument("intercept/slope fit needs at least 2 points");
  const auto n = static_cast<double>(sweep.size());
  double mx = 0.0;
  double my = 0.0;
  for (const SweepPoint& p : sweep) {
    mx += p.cost;
    my += p.sharpe;
  }
  mx /= n;
  my /= n;
  double sxx = 0.0;
  double sxy = 0.0;
  for (const SweepPoint& p : sweep) {
    sxx += (p.cost - mx) * (p.cost - mx);
    sxy += (p.cost - mx) * (p.sharpe - my);
  }
  if (!(sxx > 0.0)) throw std::invalid_argument("intercept/slope fit needs at least 2 distinct cost levels");
  const double slope = sxy / sxx;
  return {my - slope * mx, slope};
}

}  // namespace meanrev
