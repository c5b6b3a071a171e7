// Copyright 2026 The cnwv Authors. All Rights Reserved.
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

// Seeded generators and brute-force reference computations shared by the
// unit and acceptance suites. Nothing here calls into the library's numeric
// routines.

#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "cnwv/embedding.hpp"

namespace cnwv::testing {

using Rng = std::mt19937_64;

inline Eigen::MatrixXd gaussian(Rng& rng, Eigen::Index rows, Eigen::Index cols,
                                double scale = 1.0) {
  std::normal_distribution<double> dist(0.0, scale);
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = dist(rng);
  return m;
}

/// Haar-ish random orthogonal matrix from the QR of a Gaussian matrix.
inline Eigen::MatrixXd random_orthogonal(Rng& rng, Eigen::Index n) {
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(gaussian(rng, n, n));
  return qr.householderQ() * Eigen::MatrixXd::Identity(n, n);
}

/// |rows| x |cols| matrix with orthonormal columns.
inline Eigen::MatrixXd random_orthonormal_columns(Rng& rng, Eigen::Index rows, Eigen::Index cols) {
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(gaussian(rng, rows, cols));
  return qr.householderQ() * Eigen::MatrixXd::Identity(rows, cols);
}

/// Distinct eigenvalues in [lo, hi], descending.
inline Eigen::VectorXd random_spectrum(Rng& rng, Eigen::Index n, double lo = 0.05,
                                       double hi = 10.0) {
  std::uniform_real_distribution<double> dist(lo, hi);
  std::vector<double> t(static_cast<std::size_t>(n));
  for (auto& v : t) v = dist(rng);
  std::sort(t.begin(), t.end(), std::greater<>());
  Eigen::VectorXd out(n);
  for (Eigen::Index i = 0; i < n; ++i) out(i) = t[static_cast<std::size_t>(i)];
  return out;
}

inline Eigen::MatrixXd spd_from(const Eigen::MatrixXd& Q, const Eigen::VectorXd& t) {
  Eigen::MatrixXd R = Q * t.asDiagonal() * Q.transpose();
  return 0.5 * (R + R.transpose());
}

inline std::vector<std::string> synthetic_vocab(std::size_t n) {
  std::vector<std::string> v;
  v.reserve(n);
  for (std::size_t i = 0; i < n; ++i) v.push_back("tok" + std::to_string(i));
  return v;
}

/// Gaussian rows with anisotropic scales so the principal spectrum is spread.
inline Embedding<double> random_embedding(Rng& rng, std::size_t rows, std::size_t dim,
                                          bool zero_mean = false) {
  Eigen::MatrixXd m = gaussian(rng, static_cast<Eigen::Index>(rows),
                               static_cast<Eigen::Index>(dim));
  for (std::size_t j = 0; j < dim; ++j) {
    m.col(static_cast<Eigen::Index>(j)) *= 1.0 + 3.0 * static_cast<double>(dim - j) /
                                                     static_cast<double>(dim);
  }
  m = m * random_orthogonal(rng, static_cast<Eigen::Index>(dim));
  m.rowwise() += gaussian(rng, 1, static_cast<Eigen::Index>(dim), 2.0).row(0);
  if (zero_mean) m.rowwise() -= m.colwise().mean();
  return Embedding<double>(synthetic_vocab(rows), RowMatrix<double>(m));
}

/// (1/m) sum v v^T by explicit loops.
inline Eigen::MatrixXd brute_correlation(const Eigen::MatrixXd& rows) {
  const Eigen::Index n = rows.cols();
  Eigen::MatrixXd R = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index r = 0; r < rows.rows(); ++r)
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index j = 0; j < n; ++j) R(i, j) += rows(r, i) * rows(r, j);
  return R / static_cast<double>(rows.rows());
}

/// Rank of x_i = 1 + #{x_j < x_i} + (#{x_j == x_i} - 1) / 2.
inline std::vector<double> brute_ranks(const std::vector<double>& xs) {
  std::vector<double> ranks(xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i) {
    double less = 0;
    double equal = 0;
    for (double x : xs) {
      if (x < xs[i]) ++less;
      if (x == xs[i]) ++equal;
    }
    ranks[i] = 1.0 + less + (equal - 1.0) / 2.0;
  }
  return ranks;
}

/// Textbook raw-moment Pearson formula in long double.
inline double brute_pearson(const std::vector<double>& xs, const std::vector<double>& ys) {
  long double sx = 0, sy = 0, sxx = 0, syy = 0, sxy = 0;
  const long double n = static_cast<long double>(xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const long double x = xs[i], y = ys[i];
    sx += x;
    sy += y;
    sxx += x * x;
    syy += y * y;
    sxy += x * y;
  }
  const long double num = n * sxy - sx * sy;
  const long double den = std::sqrt((n * sxx - sx * sx) * (n * syy - sy * sy));
  return static_cast<double>(num / den);
}

inline double brute_spearman(const std::vector<double>& xs, const std::vector<double>& ys) {
  return brute_pearson(brute_ranks(xs), brute_ranks(ys));
}

/// Purity by enumerating every (cluster, class) pair.
inline double brute_purity(const std::vector<std::size_t>& clusters,
                           const std::vector<std::string>& truth) {
  std::size_t k = 0;
  for (auto c : clusters) k = std::max(k, c + 1);
  std::vector<std::string> classes = truth;
  std::sort(classes.begin(), classes.end());
  classes.erase(std::unique(classes.begin(), classes.end()), classes.end());
  std::size_t total = 0;
  for (std::size_t c = 0; c < k; ++c) {
    std::size_t best = 0;
    for (const auto& cls : classes) {
      std::size_t count = 0;
      for (std::size_t i = 0; i < clusters.size(); ++i)
        if (clusters[i] == c && truth[i] == cls) ++count;
      best = std::max(best, count);
    }
    total += best;
  }
  return static_cast<double>(total) / static_cast<double>(clusters.size());
}

inline double max_abs_diff(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  return (a - b).cwiseAbs().maxCoeff();
}

}  // namespace cnwv::testing
