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

// Word vector post-processing transforms.
//
// All three are linear maps of the form v -> U diag(g) U^T v in the principal
// basis U of the vectors:
//
//   conceptor negation  g_i = alpha^-2 / (sigma_i + alpha^-2)   (soft gate)
//   all-but-the-top     g = (0, ..., 0, 1, ..., 1), d zeros     (hard gate)
//   eigenvalue weights  rows of Theta diag(lambda_i^p) for E = Theta D
//
// The dedicated transforms below are computed by their own routes (NOT C as a
// dense matrix, explicit projection removal, direct column scaling) so that
// spectral_gate_transform can serve as an independent cross-check.

#pragma once

#include <Eigen/Dense>

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
#include "cnwv/spectral.hpp"

namespace cnwv {

struct CnConfig {
  double alpha = 2.0;
  /// Tokens used to estimate the correlation matrix; every row is transformed
  /// regardless.
  std::optional<std::vector<std::string>> subset{};
  /// Subtract the estimation-set mean from all rows before estimating and
  /// transforming.
  bool center = false;
};

struct AbttConfig {
  std::size_t d = 3;
};

/// Truncated factorisation E = Theta diag(D) of a PMI-style matrix, plus the
/// weighting exponent p.
struct EwFactors {
  Eigen::MatrixXd theta;        // |V| x n, orthonormal columns
  Eigen::VectorXd singular;     // lambda_1 >= ... >= lambda_n > 0
  double p = 0.5;
  std::vector<std::string> vocab{};  // optional; synthesised as w0, w1, ... when empty

  void validate() const {
    const Eigen::Index n = theta.cols();
    if (n < 1 || theta.rows() < 1 || singular.size() != n) {
      throw Error(ErrorCode::InvalidFactors, "theta must be |V| x n with n singular values");
    }
    if (!vocab.empty() && static_cast<Eigen::Index>(vocab.size()) != theta.rows()) {
      throw Error(ErrorCode::InvalidFactors, "vocabulary size does not match theta");
    }
    if (!std::isfinite(p)) throw Error(ErrorCode::InvalidFactors, "p must be finite");
    if ((theta.transpose() * theta - Eigen::MatrixXd::Identity(n, n)).cwiseAbs().maxCoeff() >
        1e-8) {
      throw Error(ErrorCode::InvalidFactors, "theta columns are not orthonormal");
    }
    for (Eigen::Index i = 0; i < n; ++i) {
      if (!(singular(i) > 0.0) || !std::isfinite(singular(i)) ||
          (i > 0 && singular(i) > singular(i - 1))) {
        throw Error(ErrorCode::InvalidFactors,
                    "singular values must be positive, finite and descending");
      }
    }
  }

  std::vector<std::string> vocab_or_default() const {
    if (!vocab.empty()) return vocab;
    std::vector<std::string> out;
    out.reserve(static_cast<std::size_t>(theta.rows()));
    for (Eigen::Index i = 0; i < theta.rows(); ++i) out.push_back("w" + std::to_string(i));
    return out;
  }
};

namespace detail {

// Applies `fn(block_in_double) -> block_out_double` to consecutive row blocks
// of `vectors` after subtracting `shift`, writing into a fresh matrix.
template <std::floating_point T, typename Fn>
RowMatrix<T> map_row_blocks(const RowMatrix<T>& vectors, const Eigen::RowVectorXd* shift,
                            Exec exec, Fn&& fn) {
  RowMatrix<T> out(vectors.rows(), vectors.cols());
  const auto m = static_cast<std::size_t>(vectors.rows());
  const std::size_t blocks = (m + kRowBlock - 1) / kRowBlock;
  parallel_for(blocks, exec.threads, [&](std::size_t b) {
    const std::size_t begin = b * kRowBlock;
    const std::size_t end = std::min(m, begin + kRowBlock);
    const Eigen::MatrixXd in = gather_block(vectors, {}, begin, end, shift);
    const Eigen::MatrixXd result = fn(in);
    out.middleRows(static_cast<Eigen::Index>(begin), static_cast<Eigen::Index>(end - begin)) =
        result.cast<T>();
  });
  return out;
}

}  // namespace detail

/// Per-direction gains of conceptor negation, alpha^-2 / (sigma_i + alpha^-2).
inline Eigen::VectorXd cn_gains(const Eigen::VectorXd& sigma, double alpha) {
  check_aperture(alpha);
  if (sigma.size() > 0 && (!sigma.allFinite() || sigma.minCoeff() < 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "variances must be finite and nonnegative");
  }
  const double reg = 1.0 / (alpha * alpha);
  return (reg / (sigma.array() + reg)).matrix();
}

/// d zeros followed by n - d ones.
inline Eigen::VectorXd abtt_gains(std::size_t n, std::size_t d) {
  if (d > n) {
    throw Error(ErrorCode::InvalidD, "cannot remove " + std::to_string(d) +
                                         " components from dimension " + std::to_string(n));
  }
  Eigen::VectorXd g = Eigen::VectorXd::Ones(static_cast<Eigen::Index>(n));
  g.head(static_cast<Eigen::Index>(d)).setZero();
  return g;
}

/// Each row v becomes U diag(g) U^T v, computed as encode, gate, decode.
template <std::floating_point T>
Embedding<T> spectral_gate_transform(const Embedding<T>& emb, const SpectralGate& gate,
                                     Exec exec = {}) {
  if (gate.dim() != emb.dim()) {
    throw Error(ErrorCode::DimensionMismatch, "gate dimension " + std::to_string(gate.dim()) +
                                                  " vs embedding dimension " +
                                                  std::to_string(emb.dim()));
  }
  const Eigen::MatrixXd& U = gate.basis();
  auto out = detail::map_row_blocks(emb.vectors(), nullptr, exec, [&](const Eigen::MatrixXd& in) {
    Eigen::MatrixXd coords = in * U;
    coords = coords * gate.gains().asDiagonal();
    return Eigen::MatrixXd(coords * U.transpose());
  });
  return Embedding<T>(emb.vocab(), std::move(out), emb.subtracted_mean());
}

/// Fitted pieces of conceptor negation: the correlation estimate, its
/// eigendecomposition and NOT C.
struct CnModel {
  CorrelationMatrix correlation;
  SymmetricEigen eigen;
  Conceptor negated;
};

template <std::floating_point T>
CnModel fit_cn(const Embedding<T>& emb, const CnConfig& cfg, Exec exec = {}) {
  check_aperture(cfg.alpha);
  std::optional<std::span<const std::string>> subset;
  if (cfg.subset) subset = std::span<const std::string>(*cfg.subset);
  CorrelationMatrix R = correlation_matrix(emb, subset, cfg.center, exec);
  SymmetricEigen eig = sym_eigen(R);
  Conceptor neg = negate(conceptor(eig, cfg.alpha));
  return CnModel{std::move(R), std::move(eig), std::move(neg)};
}

/// Conceptor negation: every row v becomes NOT C v, with C estimated from the
/// (optionally subset, optionally centered) rows.
template <std::floating_point T>
Embedding<T> cn_transform(const Embedding<T>& emb, const CnConfig& cfg, Exec exec = {}) {
  const CnModel model = fit_cn(emb, cfg, exec);
  const Eigen::MatrixXd& neg = model.negated.matrix();
  std::optional<Eigen::RowVectorXd> shift;
  if (model.correlation.mean()) shift = model.correlation.mean()->transpose();
  auto out = detail::map_row_blocks(emb.vectors(), shift ? &*shift : nullptr, exec,
                                    [&](const Eigen::MatrixXd& in) {
                                      return Eigen::MatrixXd(in * neg.transpose());
                                    });
  return Embedding<T>(emb.vocab(), std::move(out), model.correlation.mean());
}

/// All-but-the-top: center, then remove the projection onto each of the top
/// d principal components, v - sum_i u_i (u_i^T v).
template <std::floating_point T>
Embedding<T> abtt_transform(const Embedding<T>& emb, const AbttConfig& cfg, Exec exec = {}) {
  if (cfg.d > emb.dim()) {
    throw Error(ErrorCode::InvalidD, "d = " + std::to_string(cfg.d) +
                                         " exceeds dimension " + std::to_string(emb.dim()));
  }
  const CorrelationMatrix R = correlation_matrix(emb, true, exec);
  const SymmetricEigen eig = sym_eigen(R);
  const Eigen::MatrixXd top = eig.basis.leftCols(static_cast<Eigen::Index>(cfg.d));
  const Eigen::RowVectorXd shift = R.mean()->transpose();
  auto out = detail::map_row_blocks(emb.vectors(), &shift, exec, [&](const Eigen::MatrixXd& in) {
    Eigen::MatrixXd result = in;
    result.noalias() -= (in * top) * top.transpose();
    return result;
  });
  return Embedding<T>(emb.vocab(), std::move(out), R.mean());
}

/// Eigenvalue weighting: rows of Theta diag(lambda_i^p).
inline Embedding<double> ew_transform(const EwFactors& f) {
  f.validate();
  const Eigen::VectorXd weights = f.singular.array().pow(f.p).matrix();
  RowMatrix<double> out = f.theta * weights.asDiagonal();
  return Embedding<double>(f.vocab_or_default(), std::move(out));
}

/// Column weights |V| alpha^-2 / (lambda_i^2 + |V| alpha^-2) that conceptor
/// negation applies to E = Theta D.
inline Eigen::VectorXd ew_cn_weights(const Eigen::VectorXd& singular, std::size_t vocab_size,
                                     double alpha) {
  check_aperture(alpha);
  const double reg = static_cast<double>(vocab_size) / (alpha * alpha);
  return (reg / (singular.array().square() + reg)).matrix();
}

/// Two routes to conceptor negation on E = Theta D: cn_transform of E
/// (uncentered, full vocabulary), and the closed-form column reweighting
/// Theta D diag(ew_cn_weights).
inline std::pair<Embedding<double>, Embedding<double>> cn_on_pmi_equivalence(const EwFactors& f,
                                                                             double alpha,
                                                                             Exec exec = {}) {
  f.validate();
  check_aperture(alpha);
  const auto vocab = f.vocab_or_default();
  const Embedding<double> E(vocab, RowMatrix<double>(f.theta * f.singular.asDiagonal()));
  Embedding<double> via_cn = cn_transform(E, CnConfig{alpha, std::nullopt, false}, exec);
  const Eigen::VectorXd w = ew_cn_weights(f.singular, vocab.size(), alpha);
  RowMatrix<double> closed = f.theta * (f.singular.array() * w.array()).matrix().asDiagonal();
  return {std::move(via_cn), Embedding<double>(vocab, std::move(closed))};
}

/// Eigenvalue weighting for an arbitrary embedding E: with the thin SVD
/// E = Theta diag(lambda) Q^T, returns Theta diag(lambda^p) Q^T, i.e. the
/// weighted factors rotated back into the input coordinates. Directions with
/// lambda = 0 stay zero.
template <std::floating_point T>
Embedding<T> ew_transform(const Embedding<T>& emb, double p, Exec exec = {}) {
  if (!std::isfinite(p)) throw Error(ErrorCode::InvalidArgument, "p must be finite");
  // E^T E = |V| R for the uncentered R.
  const CorrelationMatrix R = correlation_matrix(emb, false, exec);
  const SymmetricEigen eig = sym_eigen(R);
  const double scale = static_cast<double>(emb.size());
  Eigen::VectorXd w(eig.values.size());
  for (Eigen::Index i = 0; i < w.size(); ++i) {
    const double lambda = std::sqrt(eig.values(i) * scale);
    w(i) = lambda > 0.0 ? std::pow(lambda, p - 1.0) : 0.0;
  }
  const Eigen::MatrixXd M = eig.basis * w.asDiagonal() * eig.basis.transpose();
  auto out = detail::map_row_blocks(emb.vectors(), nullptr, exec, [&](const Eigen::MatrixXd& in) {
    return Eigen::MatrixXd(in * M);
  });
  return Embedding<T>(emb.vocab(), std::move(out));
}

}  // namespace cnwv
