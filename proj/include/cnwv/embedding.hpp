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

#pragma once

#include <Eigen/Dense>

#include <concepts>
#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "cnwv/error.hpp"

namespace cnwv {

template <std::floating_point T>
using RowMatrix = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// A vocabulary paired with one row vector per token.
///
/// Rows are stored in `T` (float for on-disk embeddings, double for tests and
/// synthetic data); every reduction over rows is carried out in double.
/// Instances are immutable once built.
template <std::floating_point T>
class Embedding {
 public:
  using Scalar = T;
  using Matrix = RowMatrix<T>;

  /// Throws InvalidArgument on an empty vocabulary, zero dimension or a
  /// duplicate token, DimensionMismatch if the row count differs from the
  /// vocabulary size and NonFiniteValue on NaN/Inf entries.
  Embedding(std::vector<std::string> vocab, Matrix vectors,
            std::optional<Eigen::VectorXd> subtracted_mean = std::nullopt)
      : vocab_(std::move(vocab)),
        vectors_(std::move(vectors)),
        subtracted_mean_(std::move(subtracted_mean)) {
    if (vocab_.empty()) {
      throw Error(ErrorCode::InvalidArgument, "embedding has an empty vocabulary");
    }
    if (vectors_.cols() < 1) {
      throw Error(ErrorCode::InvalidArgument, "embedding dimension must be >= 1");
    }
    if (static_cast<std::size_t>(vectors_.rows()) != vocab_.size()) {
      throw Error(ErrorCode::DimensionMismatch,
                  "vocabulary has " + std::to_string(vocab_.size()) +
                      " tokens but matrix has " + std::to_string(vectors_.rows()) +
                      " rows");
    }
    if (subtracted_mean_ && subtracted_mean_->size() != vectors_.cols()) {
      throw Error(ErrorCode::DimensionMismatch, "mean has the wrong dimension");
    }
    if (!vectors_.allFinite()) {
      for (Eigen::Index r = 0; r < vectors_.rows(); ++r) {
        if (!vectors_.row(r).allFinite()) {
          throw Error(ErrorCode::NonFiniteValue,
                      "non-finite value in vector for '" + vocab_[r] + "'");
        }
      }
    }
    index_.reserve(vocab_.size());
    for (std::size_t i = 0; i < vocab_.size(); ++i) {
      if (!index_.emplace(vocab_[i], i).second) {
        throw Error(ErrorCode::InvalidArgument, "duplicate token '" + vocab_[i] + "'");
      }
    }
  }

  std::size_t size() const noexcept { return vocab_.size(); }
  std::size_t dim() const noexcept { return static_cast<std::size_t>(vectors_.cols()); }

  const std::vector<std::string>& vocab() const noexcept { return vocab_; }
  const Matrix& vectors() const noexcept { return vectors_; }
  auto row(std::size_t i) const { return vectors_.row(static_cast<Eigen::Index>(i)); }

  std::optional<std::size_t> find(std::string_view token) const {
    // heterogeneous lookup on unordered_map arrives with C++20 but libstdc++ 11
    // does not ship it yet
    auto it = index_.find(std::string(token));
    if (it == index_.end()) return std::nullopt;
    return it->second;
  }

  /// The mean that was subtracted from every row when this embedding was
  /// produced by a centering transform.
  const std::optional<Eigen::VectorXd>& subtracted_mean() const noexcept {
    return subtracted_mean_;
  }

 private:
  std::vector<std::string> vocab_;
  Matrix vectors_;
  std::optional<Eigen::VectorXd> subtracted_mean_;
  std::unordered_map<std::string, std::size_t> index_;
};

}  // namespace cnwv
