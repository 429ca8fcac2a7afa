#pragma once

#include <cmath>
#include <cstddef>
#include <string>
#include <unordered_set>
#include <utility>
#include <vector>

#include "meanrev/linalg.hpp"

namespace meanrev {

/// T x n matrix of asset values (rows are dates, columns are assets).
class SamplePath {
 public:
  SamplePath(Matrix values, std::vector<std::string> labels, std::vector<std::string> dates = {})
      : values_(std::move(values)), labels_(std::move(labels)), dates_(std::move(dates)) {
    validate();
  }

  /// Labels default to x1..xn.
  explicit SamplePath(Matrix values) : values_(std::move(values)) {
    for (Index j = 0; j < values_.cols(); ++j) labels_.push_back("x" + std::to_string(j + 1));
    validate();
  }

  Index length() const { return values_.rows(); }
  Index assets() const { return values_.cols(); }
  const Matrix& values() const { return values_; }
  const std::vector<std::string>& labels() const { return labels_; }
  const std::vector<std::string>& dates() const { return dates_; }

  SamplePath rows(Index begin, Index count) const {
    if (begin < 0 || count < 0 || begin + count > length()) {
      throw std::out_of_range("row slice outside sample path");
    }
    std::vector<std::string> d;
    if (!dates_.empty()) {
      d.assign(dates_.begin() + begin, dates_.begin() + begin + count);
    }
    return SamplePath(values_.middleRows(begin, count), labels_, std::move(d));
  }

  SamplePath columns(const std::vector<int>& idx) const {
    Matrix v(length(), static_cast<Index>(idx.size()));
    std::vector<std::string> l;
    for (std::size_t j = 0; j < idx.size(); ++j) {
      if (idx[j] < 0 || idx[j] >= assets()) throw std::out_of_range("asset index out of range");
      v.col(static_cast<Index>(j)) = values_.col(idx[j]);
      l.push_back(labels_[static_cast<std::size_t>(idx[j])]);
    }
    return SamplePath(std::move(v), std::move(l), dates_);
  }

 private:
  void validate() const {
    if (values_.rows() < 3) throw std::invalid_argument("sample path needs at least 3 observations");
    if (values_.cols() < 1) throw std::invalid_argument("sample path needs at least 1 asset");
    if (!values_.allFinite()) throw std::invalid_argument("sample path contains non-finite values");
    if (static_cast<Index>(labels_.size()) != values_.cols()) {
      throw std::invalid_argument("label count does not match asset count");
    }
    std::unordered_set<std::string> seen(labels_.begin(), labels_.end());
    if (seen.size() != labels_.size()) throw std::invalid_argument("asset labels must be unique");
    if (!dates_.empty() && static_cast<Index>(dates_.size()) != values_.rows()) {
      throw std::invalid_argument("date count does not match sample length");
    }
  }

  Matrix values_;
  std::vector<std::string> labels_;
  std::vector<std::string> dates_;
};

/// Symmetrized autocovariance matrices A0..Ap of one pool.
class AutocovarianceSet {
 public:
  AutocovarianceSet(std::vector<Matrix> mats, Index sample_size)
      : mats_(std::move(mats)), sample_size_(sample_size) {
    if (mats_.empty()) throw std::invalid_argument("autocovariance set needs at least A0");
    const Index n = mats_[0].rows();
    for (Matrix& m : mats_) {
      if (m.rows() != n || m.cols() != n) throw std::invalid_argument("autocovariance matrices must be n x n");
      if (!m.allFinite()) throw std::invalid_argument("autocovariance matrix has non-finite entries");
      m = symmetrize(m);
    }
    clip_covariance();
  }

  /// Number of lags p (mats holds p + 1 matrices).
  int order() const { return static_cast<int>(mats_.size()) - 1; }
  Index dim() const { return mats_[0].rows(); }
  Index sample_size() const { return sample_size_; }
  const Matrix& operator[](int k) const { return mats_.at(static_cast<std::size_t>(k)); }
  const Matrix& a0() const { return mats_[0]; }
  const std::vector<Matrix>& mats() const { return mats_; }

  std::vector<double> variances() const {
    std::vector<double> d(static_cast<std::size_t>(dim()));
    for (Index i = 0; i < dim(); ++i) d[static_cast<std::size_t>(i)] = mats_[0](i, i);
    return d;
  }

 private:
  // A0 eigenvalues in (-1e-10 trace, 0) are rounding noise and get clipped;
  // anything below means the data is not a covariance.
  void clip_covariance() {
    Matrix& a0 = mats_[0];
    const double tr = a0.trace();
    const SymEig eig = sym_eig(a0);
    if (eig.values(0) >= 0.0) return;
    if (eig.values(0) < -1e-10 * std::abs(tr)) {
      throw DegenerateError("lag-0 autocovariance is not positive semidefinite");
    }
    const Vector clipped = eig.values.cwiseMax(0.0);
    a0 = symmetrize(eig.vectors * clipped.asDiagonal() * eig.vectors.transpose());
  }

  std::vector<Matrix> mats_;
  Index sample_size_;
};

/// Removes the column means.
inline SamplePath center(const SamplePath& path) {
  Matrix v = path.values();
  v.rowwise() -= v.colwise().mean();
  return SamplePath(std::move(v), path.labels(), path.dates());
}

/// Lag-k empirical autocovariance with divisor T - k - 1, before symmetrization.
inline Matrix autocovariance(const SamplePath& path, int k) {
  const Index t = path.length();
  if (k < 0 || k > t - 3) {
    throw std::invalid_argument("lag " + std::to_string(k) + " too large for sample of length " +
                                std::to_string(t) + " (max lag is T-3)");
  }
  Matrix x = path.values();
  x.rowwise() -= x.colwise().mean();
  const Index m = t - k;
  return x.topRows(m).transpose() * x.middleRows(k, m) / static_cast<double>(t - k - 1);
}

inline AutocovarianceSet build_autocov_set(const SamplePath& path, int p) {
  if (p < 0 || p > path.length() - 3) {
    throw std::invalid_argument("autocovariance order " + std::to_string(p) +
                                " too large for sample of length " + std::to_string(path.length()));
  }
  std::vector<Matrix> mats;
  mats.reserve(static_cast<std::size_t>(p) + 1);
  for (int k = 0; k <= p; ++k) mats.push_back(autocovariance(path, k));
  return AutocovarianceSet(std::move(mats), path.length());
}

}  // namespace meanrev
