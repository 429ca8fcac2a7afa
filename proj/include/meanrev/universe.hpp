#pragma once

#include <algorithm>
#include <iostream>
#include <set>
#include <vector>

#include "meanrev/timeseries.hpp"

namespace meanrev {

/// Candidate pool scored by the smallest eigenvalue of its covariance (lower is better).
struct PoolCandidate {
  std::vector<int> asset_indices;  // sorted column indices into the sample path
  double score = 0.0;
};

inline bool operator<(const PoolCandidate& a, const PoolCandidate& b) {
  if (a.score != b.score) return a.score < b.score;
  return a.asset_indices < b.asset_indices;
}

struct PoolSearchOptions {
  int n_min = 8;
  int n_max = 12;
  std::size_t max_candidates = 200;
  std::size_t max_seeds = 20000;
  int max_visits_per_seed = 5000;
};

/// lambda_min of the principal submatrix, floored at zero.
inline double pool_score(const Matrix& cov, const std::vector<int>& local) {
  return std::max(0.0, lambda_min(principal_submatrix(cov, local)));
}

/// Greedy backward-forward search inside one group. Every size-3 subset is
/// a seed; from each seed the walk moves to the best single addition or
/// removal while that strictly lowers the score, and every pool visited with
/// n_min <= size <= n_max is recorded.
inline std::vector<PoolCandidate> greedy_pool_search(const SamplePath& path, const std::vector<int>& group,
                                                     const PoolSearchOptions& opt = {}) {
  const int g = static_cast<int>(group.size());
  if (g < 3) throw std::invalid_argument("pool search needs a group of at least 3 assets");
  const Matrix cov = symmetrize(autocovariance(path.columns(group), 0));

  std::set<PoolCandidate> found;
  auto record = [&](const std::vector<int>& local, double score) {
    if (static_cast<int>(local.size()) < opt.n_min || static_cast<int>(local.size()) > opt.n_max) return;
    PoolCandidate c;
    for (int i : local) c.asset_indices.push_back(group[static_cast<std::size_t>(i)]);
    std::sort(c.asset_indices.begin(), c.asset_indices.end());
    c.score = score;
    found.insert(std::move(c));
  };

  if (g == 3) {
    const std::vector<int> all{0, 1, 2};
    if (opt.n_min > 3) {
      std::cerr << "warning: group of 3 assets is below the minimum pool size " << opt.n_min << '\n';
      return {};
    }
    record(all, pool_score(cov, all));
    return {found.begin(), found.end()};
  }

  std::vector<PoolCandidate> seeds;  // local indices
  for (int a = 0; a < g; ++a) {
    for (int b = a + 1; b < g; ++b) {
      for (int c = b + 1; c < g; ++c) {
        std::vector<int> s{a, b, c};
        const double score = pool_score(cov, s);
        seeds.push_back({std::move(s), score});
      }
    }
  }
  if (seeds.size() > opt.max_seeds) {
    std::partial_sort(seeds.begin(), seeds.begin() + static_cast<std::ptrdiff_t>(opt.max_seeds), seeds.end());
    seeds.resize(opt.max_seeds);
    std::sort(seeds.begin(), seeds.end(),
              [](const PoolCandidate& x, const PoolCandidate& y) { return x.asset_indices < y.asset_indices; });
  }

  // The move rule depends only on the current pool, so a pool expanded once
  // leads down the same path again and the walk can stop there.
  std::set<std::vector<int>> expanded;
  for (const PoolCandidate& seed : seeds) {
    std::vector<int> cur = seed.asset_indices;
    double cur_score = seed.score;
    for (int visit = 0; visit < opt.max_visits_per_seed; ++visit) {
      record(cur, cur_score);
      if (!expanded.insert(cur).second) break;

      std::vector<int> best;
      double best_score = cur_score;
      auto consider = [&](std::vector<int> cand) {
        std::sort(cand.begin(), cand.end());
        const double s = pool_score(cov, cand);
        if (s < best_score || (s == best_score && !best.empty() && cand < best)) {
          best_score = s;
          best = std::move(cand);
        }
      };
      if (static_cast<int>(cur.size()) < opt.n_max) {
        for (int j = 0; j < g; ++j) {
          if (std::binary_search(cur.begin(), cur.end(), j)) continue;
          std::vector<int> cand = cur;
          cand.push_back(j);
          consider(std::move(cand));
        }
      }
      if (cur.size() > 3) {
        for (std::size_t r = 0; r < cur.size(); ++r) {
          std::vector<int> cand = cur;
          cand.erase(cand.begin() + static_cast<std::ptrdiff_t>(r));
          consider(std::move(cand));
        }
      }
      if (best.empty()) break;
      cur = std::move(best);
      cur_score = best_score;
    }
  }

  std::vector<PoolCandidate> out(found.begin(), found.end());
  if (out.size() > opt.max_candidates) out.resize(opt.max_candidates);
  return out;
}

/// Global ascending-score truncation to m pools (duplicates removed).
inline std::vector<PoolCandidate> keep_best(std::vector<PoolCandidate> candidates, std::size_t m) {
  std::sort(candidates.begin(), candidates.end());
  candidates.erase(std::unique(candidates.begin(), candidates.end(),
                               [](const PoolCandidate& a, const PoolCandidate& b) {
                                 return a.asset_indices == b.asset_indices;
                               }),
                   candidates.end());
  if (candidates.size() > m) candidates.resize(m);
  return candidates;
}

}  // namespace meanrev
