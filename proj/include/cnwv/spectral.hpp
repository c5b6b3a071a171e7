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

// Dense symmetric linear algebra behind the post-processing transforms:
// correlation estimation, eigendecomposition, conceptors and their negation.
//
// A conceptor for samples x with correlation R = E[x x^T] is the minimiser of
//
//     E[ |x - C x|^2 ] + alpha^-2 |C|_F^2,
//
// namely C = R (R + alpha^-2 I)^-1. With R = U diag(t) U^T this is
// C = U diag(t_i / (t_i + alpha^-2)) U^T, which is how it is computed here;
// the inverse is never formed.

#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "cnwv/embedding.hpp"
#include "cnwv/error.hpp"
#include "cnwv/parallel.hpp"

namespace cnwv {

/// Second-moment matrix of a set of word vectors, (1/m) sum (v - mu)(v - mu)^T.
class CorrelationMatrix {
 public:
  /// Throws InvalidArgument unless `matrix` is square, finite and symmetric
  /// to 1e-12 relative to its largest entry.
  explicit CorrelationMatrix(Eigen::MatrixXd matrix, std::size_t sample_count = 1,
                             bool centered = false,
                             std::optional<Eigen::VectorXd> mean = std::nullopt)
      : matrix_(std::move(matrix)),
        sample_count_(sample_count),
        centered_(centered),
        mean_(std::move(mean)) {
    if (matrix_.rows() != matrix_.cols() || matrix_.rows() < 1) {
      throw Error(ErrorCode::InvalidArgument, "correlation matrix must be square and non-empty");
    }
    if (!matrix_.allFinite()) {
      throw Error(ErrorCode::NonFiniteValue, "correlation matrix has non-finite entries");
    }
    const double scale = std::max(matrix_.cwiseAbs().maxCoeff(), 1e-300);
    if ((matrix_ - matrix_.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale) {
      throw Error(ErrorCode::InvalidArgument, "correlation matrix is not symmetric");
    }
  }

  const Eigen::MatrixXd& matrix() const noexcept { return matrix_; }
  std::size_t dim() const noexcept { return static_cast<std::size_t>(matrix_.rows()); }
  std::size_t sample_count() const noexcept { return sample_count_; }
  bool centered() const noexcept { return centered_; }
  /// The subtracted mean, present iff centered().
  const std::optional<Eigen::VectorXd>& mean() const noexcept { return mean_; }

 private:
  Eigen::MatrixXd matrix_;
  std::size_t sample_count_;
  bool centered_;
  std::optional<Eigen::VectorXd> mean_;
};

/// Eigendecomposition R = U diag(values) U^T with values descending.
struct SymmetricEigen {
  Eigen::MatrixXd basis;   // columns are eigenvectors
  Eigen::VectorXd values;  // descending, >= 0
};

/// A conceptor (or its negation) together with the eigenbasis it was built in.
class Conceptor {
 public:
  const Eigen::MatrixXd& matrix() const noexcept { return matrix_; }
  double alpha() const noexcept { return alpha_; }
  bool negated() const noexcept { return negated_; }
  const Eigen::MatrixXd& basis() const noexcept { return basis_; }
  std::size_t dim() const noexcept { return static_cast<std::size_t>(matrix_.rows()); }

  /// Eigenvalues paired with the columns of basis(): s_i for C, 1 - s_i for NOT C.
  Eigen::VectorXd spectrum() const {
    return negated_ ? Eigen::VectorXd((1.0 - positive_spectrum_.array()).matrix())
                    : positive_spectrum_;
  }

 private:
  Conceptor(Eigen::MatrixXd basis, Eigen::VectorXd positive_spectrum, double alpha)
      : basis_(std::move(basis)),
        positive_spectrum_(std::move(positive_spectrum)),
        alpha_(alpha) {
    positive_matrix_ = basis_ * positive_spectrum_.asDiagonal() * basis_.transpose();
    positive_matrix_ = 0.5 * (positive_matrix_ + positive_matrix_.transpose()).eval();
    matrix_ = positive_matrix_;
  }

  friend Conceptor conceptor(const SymmetricEigen& eig, double alpha);
  friend Conceptor negate(const Conceptor& c);

  Eigen::MatrixXd basis_;
  Eigen::VectorXd positive_spectrum_;
  Eigen::MatrixXd positive_matrix_;
  Eigen::MatrixXd matrix_;
  double alpha_;
  bool negated_ = false;
};

/// Encode-gate-decode operator U diag(gains) U^T: project onto an orthonormal
/// basis, scale each coordinate by its gain, map back.
class SpectralGate {
 public:
  /// Throws DimensionMismatch on shape errors and InvalidArgument if the basis
  /// is not orthonormal (1e-8) or a gain falls outside [0, 1].
  SpectralGate(Eigen::MatrixXd basis, Eigen::VectorXd gains)
      : basis_(std::move(basis)), gains_(std::move(gains)) {
    const Eigen::Index n = basis_.rows();
    if (basis_.cols() != n || gains_.size() != n || n < 1) {
      throw Error(ErrorCode::DimensionMismatch, "gate basis must be n x n with n gains");
    }
    if ((basis_.transpose() * basis_ - Eigen::MatrixXd::Identity(n, n)).cwiseAbs().maxCoeff() >
        1e-8) {
      throw Error(ErrorCode::InvalidArgument, "gate basis is not orthonormal");
    }
    if (!gains_.allFinite() || gains_.minCoeff() < 0.0 || gains_.maxCoeff() > 1.0) {
      throw Error(ErrorCode::InvalidArgument, "gate gains must lie in [0, 1]");
    }
  }

  const Eigen::MatrixXd& basis() const noexcept { return basis_; }
  const Eigen::VectorXd& gains() const noexcept { return gains_; }
  std::size_t dim() const noexcept { return static_cast<std::size_t>(basis_.rows()); }

  Eigen::VectorXd apply(const Eigen::VectorXd& v) const {
    return basis_ * (gains_.asDiagonal() * (basis_.transpose() * v));
  }

 private:
  Eigen::MatrixXd basis_;
  Eigen::VectorXd gains_;
};

inline void check_aperture(double alpha) {
  if (!(alpha > 0.0) || !std::isfinite(alpha)) {
    throw Error(ErrorCode::InvalidAperture,
                "aperture must be positive and finite, got " + std::to_string(alpha));
  }
}

namespace detail {

// Rows of `vectors` selected by `rows` (all rows when empty), minus `shift`,
// widened to double.
template <std::floating_point T>
Eigen::MatrixXd gather_block(const RowMatrix<T>& vectors, std::span<const std::size_t> rows,
                             std::size_t begin, std::size_t end,
                             const Eigen::RowVectorXd* shift) {
  Eigen::MatrixXd block(static_cast<Eigen::Index>(end - begin), vectors.cols());
  for (std::size_t i = begin; i < end; ++i) {
    const auto src = static_cast<Eigen::Index>(rows.empty() ? i : rows[i]);
    block.row(static_cast<Eigen::Index>(i - begin)) = vectors.row(src).template cast<double>();
  }
  if (shift) block.rowwise() -= *shift;
  return block;
}

template <std::floating_point T>
Eigen::RowVectorXd mean_of_rows(const RowMatrix<T>& vectors, std::span<const std::size_t> rows) {
  const std::size_t m = rows.empty() ? static_cast<std::size_t>(vectors.rows()) : rows.size();
  Eigen::RowVectorXd sum = Eigen::RowVectorXd::Zero(vectors.cols());
  for (std::size_t i = 0; i < m; ++i) {
    const auto src = static_cast<Eigen::Index>(rows.empty() ? i : rows[i]);
    sum += vectors.row(src).template cast<double>();
  }
  return sum / static_cast<double>(m);
}

}  // namespace detail

/// Row indices of the tokens in `subset` that occur in `emb`, in vocabulary
/// order. Throws EmptySubset if none does.
template <std::floating_point T>
std::vector<std::size_t> subset_rows(const Embedding<T>& emb,
                                     std::span<const std::string> subset) {
  std::vector<std::size_t> rows;
  rows.reserve(subset.size());
  for (const auto& token : subset) {
    if (auto idx = emb.find(token)) rows.push_back(*idx);
  }
  std::sort(rows.begin(), rows.end());
  rows.erase(std::unique(rows.begin(), rows.end()), rows.end());
  if (rows.empty()) {
    throw Error(ErrorCode::EmptySubset, "no subset token occurs in the embedding vocabulary");
  }
  return rows;
}

/// Estimates R = (1/m) sum over the selected rows of (v - mu)(v - mu)^T, with
/// mu the mean of the selected rows when `center` is set and zero otherwise.
/// Selected rows are all rows, or those whose token is in `subset`.
///
/// Rows are accumulated in double, in blocks of kRowBlock; partial sums are
/// folded in block order so the result is independent of exec.threads.
template <std::floating_point T>
CorrelationMatrix correlation_matrix(const Embedding<T>& emb,
                                     std::optional<std::span<const std::string>> subset,
                                     bool center, Exec exec = {}) {
  std::vector<std::size_t> rows;
  if (subset) rows = subset_rows(emb, *subset);
  const std::size_t m = subset ? rows.size() : emb.size();
  const auto n = static_cast<Eigen::Index>(emb.dim());

  std::optional<Eigen::RowVectorXd> mean;
  if (center) mean = detail::mean_of_rows(emb.vectors(), rows);

  const std::size_t blocks = (m + kRowBlock - 1) / kRowBlock;
  Eigen::MatrixXd acc = Eigen::MatrixXd::Zero(n, n);
  std::vector<Eigen::MatrixXd> partials;
  for (std::size_t wave = 0; wave < blocks; wave += kReductionWave) {
    const std::size_t count = std::min(kReductionWave, blocks - wave);
    partials.assign(count, Eigen::MatrixXd());
    parallel_for(count, exec.threads, [&](std::size_t k) {
      const std::size_t begin = (wave + k) * kRowBlock;
      const std::size_t end = std::min(m, begin + kRowBlock);
      const Eigen::MatrixXd block = detail::gather_block(emb.vectors(), rows, begin, end,
                                                         mean ? &*mean : nullptr);
      partials[k].noalias() = block.transpose() * block;
    });
    for (const auto& p : partials) acc += p;
  }
  acc /= static_cast<double>(m);
  acc = 0.5 * (acc + acc.transpose()).eval();

  std::optional<Eigen::VectorXd> mean_col;
  if (mean) mean_col = mean->transpose();
  return CorrelationMatrix(std::move(acc), m, center, std::move(mean_col));
}

template <std::floating_point T>
CorrelationMatrix correlation_matrix(const Embedding<T>& emb, bool center = false,
                                     Exec exec = {}) {
  return correlation_matrix(emb, std::nullopt, center, exec);
}

/// Eigenvalues within 1e-10 * sigma_1 of zero are set to exactly zero;
/// anything more negative is rejected with NotPositiveSemidefinite. Each
/// eigenvector is signed so its largest-magnitude entry (first on ties) is
/// nonnegative.
inline SymmetricEigen sym_eigen(const Eigen::MatrixXd& R) {
  if (R.rows() != R.cols() || R.rows() < 1) {
    throw Error(ErrorCode::DimensionMismatch, "eigendecomposition needs a square matrix");
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(R, Eigen::ComputeEigenvectors);
  if (solver.info() != Eigen::Success) {
    throw Error(ErrorCode::ConvergenceFailure, "symmetric eigensolver did not converge");
  }
  const Eigen::Index n = R.rows();
  SymmetricEigen out{Eigen::MatrixXd(n, n), Eigen::VectorXd(n)};
  // Eigen returns ascending order.
  for (Eigen::Index i = 0; i < n; ++i) {
    out.values(i) = solver.eigenvalues()(n - 1 - i);
    out.basis.col(i) = solver.eigenvectors().col(n - 1 - i);
  }
  const double top = std::max(out.values(0), 0.0);
  const double tol = 1e-10 * top;
  for (Eigen::Index i = 0; i < n; ++i) {
    double& v = out.values(i);
    if (v < -tol) {
      throw Error(ErrorCode::NotPositiveSemidefinite,
                  "eigenvalue " + std::to_string(v) + " is below -1e-10 * sigma_1");
    }
    if (v < tol || top == 0.0) v = 0.0;
  }
  for (Eigen::Index i = 0; i < n; ++i) {
    Eigen::Index arg = 0;
    out.basis.col(i).cwiseAbs().maxCoeff(&arg);
    if (out.basis(arg, i) < 0.0) out.basis.col(i) = -out.basis.col(i);
  }
  return out;
}

inline SymmetricEigen sym_eigen(const CorrelationMatrix& R) { return sym_eigen(R.matrix()); }

/// s_i = t_i / (t_i + alpha^-2).
inline Eigen::VectorXd conceptor_spectrum(const Eigen::VectorXd& t, double alpha) {
  check_aperture(alpha);
  const double reg = 1.0 / (alpha * alpha);
  return (t.array() / (t.array() + reg)).matrix();
}

inline Conceptor conceptor(const SymmetricEigen& eig, double alpha) {
  return Conceptor(eig.basis, conceptor_spectrum(eig.values, alpha), alpha);
}

/// C = R (R + alpha^-2 I)^-1, evaluated in the eigenbasis of R.
inline Conceptor conceptor(const CorrelationMatrix& R, double alpha) {
  check_aperture(alpha);
  return conceptor(sym_eigen(R), alpha);
}

/// NOT C = I - C. Negating twice returns a conceptor bit-identical to the
/// original.
inline Conceptor negate(const Conceptor& c) {
  Conceptor out = c;
  out.negated_ = !c.negated_;
  if (out.negated_) {
    out.matrix_ = Eigen::MatrixXd::Identity(c.matrix_.rows(), c.matrix_.cols()) -
                  c.positive_matrix_;
  } else {
    out.matrix_ = c.positive_matrix_;
  }
  return out;
}

/// Empirical conceptor objective: mean over rows x of |x - C x|^2, plus
/// alpha^-2 |C|_F^2.
template <std::floating_point T>
double conceptor_loss(const Eigen::MatrixXd& C, const Embedding<T>& samples, double alpha) {
  check_aperture(alpha);
  const auto n = static_cast<Eigen::Index>(samples.dim());
  if (C.rows() != n || C.cols() != n) {
    throw Error(ErrorCode::DimensionMismatch,
                "conceptor is " + std::to_string(C.rows()) + "x" + std::to_string(C.cols()) +
                    " but samples have dimension " + std::to_string(n));
  }
  const Eigen::MatrixXd residual_map = Eigen::MatrixXd::Identity(n, n) - C;
  const std::size_t m = samples.size();
  double total = 0.0;
  for (std::size_t begin = 0; begin < m; begin += kRowBlock) {
    const std::size_t end = std::min(m, begin + kRowBlock);
    const Eigen::MatrixXd block =
        detail::gather_block(samples.vectors(), {}, begin, end, nullptr);
    total += (block * residual_map.transpose()).squaredNorm();
  }
  return total / static_cast<double>(m) + C.squaredNorm() / (alpha * alpha);
}

}  // namespace cnwv
