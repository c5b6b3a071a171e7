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

// Intrinsic evaluation: word similarity (Spearman), sentence similarity by
// averaged word vectors (Pearson) and concept categorization (k-means purity
// from fixed initial centroids).
//
// Items that touch an out-of-vocabulary token are skipped and counted.

#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstddef>
#include <limits>
#include <map>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "cnwv/embedding.hpp"
#include "cnwv/error.hpp"
#include "cnwv/io.hpp"

namespace cnwv {

struct LookupPolicy {
  /// Retry a missing token in lowercase.
  bool lowercase_fallback = false;
};

struct EvalReport {
  std::string metric;
  double score = std::numeric_limits<double>::quiet_NaN();
  std::size_t evaluated = 0;
  std::size_t skipped = 0;
};

/// DegenerateInput raised by an evaluation, carrying the coverage counts
/// gathered before it gave up.
class DegenerateEvaluation : public Error {
 public:
  DegenerateEvaluation(const std::string& message, EvalReport report)
      : Error(ErrorCode::DegenerateInput,
              message + " (evaluated " + std::to_string(report.evaluated) + ", skipped " +
                  std::to_string(report.skipped) + ")"),
        report_(std::move(report)) {}

  const EvalReport& report() const noexcept { return report_; }

 private:
  EvalReport report_;
};

template <std::floating_point T>
std::optional<Eigen::VectorXd> lookup(const Embedding<T>& emb, std::string_view token,
                                      const LookupPolicy& policy) {
  auto idx = emb.find(token);
  if (!idx && policy.lowercase_fallback) {
    std::string lower(token);
    for (char& c : lower) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    idx = emb.find(lower);
  }
  if (!idx) return std::nullopt;
  return Eigen::VectorXd(emb.row(*idx).template cast<double>().transpose());
}

/// dot(a, b) / (|a| |b|), clamped to [-1, 1].
inline double cosine(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  if (a.size() != b.size()) {
    throw Error(ErrorCode::DimensionMismatch, "cosine of vectors with different dimensions");
  }
  const double na = a.norm();
  const double nb = b.norm();
  if (na == 0.0 || nb == 0.0) throw Error(ErrorCode::ZeroVector, "cosine of a zero vector");
  return std::clamp(a.dot(b) / (na * nb), -1.0, 1.0);
}

/// 1-based ranks; tied values share the average of the ranks they span.
inline std::vector<double> fractional_ranks(std::span<const double> xs) {
  std::vector<std::size_t> order(xs.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return xs[a] < xs[b]; });
  std::vector<double> ranks(xs.size());
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j + 1 < order.size() && xs[order[j + 1]] == xs[order[i]]) ++j;
    const double avg = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = avg;
    i = j + 1;
  }
  return ranks;
}

inline double pearson(std::span<const double> xs, std::span<const double> ys) {
  if (xs.size() != ys.size()) {
    throw Error(ErrorCode::LengthMismatch, std::to_string(xs.size()) + " vs " +
                                               std::to_string(ys.size()) + " values");
  }
  if (xs.size() < 2) throw Error(ErrorCode::DegenerateInput, "need at least two values");
  const double n = static_cast<double>(xs.size());
  const double mx = std::accumulate(xs.begin(), xs.end(), 0.0) / n;
  const double my = std::accumulate(ys.begin(), ys.end(), 0.0) / n;
  double sxy = 0.0;
  double sxx = 0.0;
  double syy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double dx = xs[i] - mx;
    const double dy = ys[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx == 0.0 || syy == 0.0) {
    throw Error(ErrorCode::DegenerateInput, "correlation of a constant sequence");
  }
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

/// Pearson correlation of fractional ranks.
inline double spearman(std::span<const double> model, std::span<const double> human) {
  if (model.size() != human.size()) {
    throw Error(ErrorCode::LengthMismatch, std::to_string(model.size()) + " vs " +
                                               std::to_string(human.size()) + " values");
  }
  const auto rm = fractional_ranks(model);
  const auto rh = fractional_ranks(human);
  return pearson(rm, rh);
}

template <std::floating_point T>
EvalReport eval_similarity(const Embedding<T>& emb, const SimilarityDataset& ds,
                           const LookupPolicy& policy = {}) {
  EvalReport report{"spearman"};
  std::vector<double> model;
  std::vector<double> human;
  for (const auto& rec : ds) {
    const auto a = lookup(emb, rec.word_a, policy);
    const auto b = lookup(emb, rec.word_b, policy);
    if (!a || !b || a->isZero(0.0) || b->isZero(0.0)) {
      ++report.skipped;
      continue;
    }
    model.push_back(cosine(*a, *b));
    human.push_back(rec.score);
    ++report.evaluated;
  }
  if (report.evaluated < 2) throw DegenerateEvaluation("fewer than two usable pairs", report);
  try {
    report.score = spearman(model, human);
  } catch (const Error& e) {
    throw DegenerateEvaluation(e.what(), report);
  }
  return report;
}

struct SentenceVector {
  Eigen::VectorXd vector;
  std::size_t found = 0;
  std::size_t dropped = 0;
};

/// Unweighted mean of the in-vocabulary token vectors.
template <std::floating_point T>
SentenceVector sentence_vector(const Embedding<T>& emb, std::span<const std::string> tokens,
                               const LookupPolicy& policy = {}) {
  SentenceVector out{Eigen::VectorXd::Zero(static_cast<Eigen::Index>(emb.dim()))};
  for (const auto& token : tokens) {
    if (auto v = lookup(emb, token, policy)) {
      out.vector += *v;
      ++out.found;
    } else {
      ++out.dropped;
    }
  }
  if (out.found == 0) throw Error(ErrorCode::AllTokensOov, "no token of the sentence is known");
  out.vector /= static_cast<double>(out.found);
  return out;
}

template <std::floating_point T>
EvalReport eval_sts(const Embedding<T>& emb, const StsDataset& ds,
                    const LookupPolicy& policy = {}) {
  EvalReport report{"pearson"};
  std::vector<double> model;
  std::vector<double> human;
  for (const auto& rec : ds) {
    try {
      const auto a = sentence_vector(emb, rec.sentence_a, policy);
      const auto b = sentence_vector(emb, rec.sentence_b, policy);
      model.push_back(cosine(a.vector, b.vector));
      human.push_back(rec.score);
      ++report.evaluated;
    } catch (const Error& e) {
      if (e.code() != ErrorCode::AllTokensOov && e.code() != ErrorCode::ZeroVector) throw;
      ++report.skipped;
    }
  }
  if (report.evaluated < 2) throw DegenerateEvaluation("fewer than two usable pairs", report);
  try {
    report.score = pearson(model, human);
  } catch (const Error& e) {
    throw DegenerateEvaluation(e.what(), report);
  }
  return report;
}

struct ClusterAssignment {
  std::vector<std::size_t> labels;  // cluster index per row, in [0, k)
  Eigen::MatrixXd centroids;        // k rows
  std::size_t iterations = 0;
  bool converged = false;
  std::vector<std::string> words;   // row labels, filled by eval_categorization
};

/// Lloyd's algorithm started from the given centroids (rows). Each round
/// recomputes centroids from the current assignment (an empty cluster keeps
/// its centroid) and reassigns; it stops once an assignment repeats or after
/// max_iter rounds. Ties go to the lowest cluster index.
inline ClusterAssignment kmeans_fixed_init(const Eigen::MatrixXd& vectors,
                                           const Eigen::MatrixXd& initial_centroids,
                                           std::size_t max_iter = 100) {
  const Eigen::Index k = initial_centroids.rows();
  if (k < 2) throw Error(ErrorCode::InvalidArgument, "k-means needs at least two centroids");
  if (vectors.cols() != initial_centroids.cols()) {
    throw Error(ErrorCode::DimensionMismatch, "vectors and centroids differ in dimension");
  }
  ClusterAssignment out;
  out.centroids = initial_centroids;
  const Eigen::Index m = vectors.rows();

  auto assign = [&](std::vector<std::size_t>& labels) {
    labels.resize(static_cast<std::size_t>(m));
    for (Eigen::Index i = 0; i < m; ++i) {
      std::size_t best = 0;
      double best_dist = std::numeric_limits<double>::infinity();
      for (Eigen::Index c = 0; c < k; ++c) {
        const double dist = (vectors.row(i) - out.centroids.row(c)).squaredNorm();
        if (dist < best_dist) {
          best_dist = dist;
          best = static_cast<std::size_t>(c);
        }
      }
      labels[static_cast<std::size_t>(i)] = best;
    }
  };

  assign(out.labels);
  std::vector<std::size_t> next;
  for (std::size_t it = 1; it <= max_iter; ++it) {
    Eigen::MatrixXd sums = Eigen::MatrixXd::Zero(k, vectors.cols());
    std::vector<std::size_t> counts(static_cast<std::size_t>(k), 0);
    for (Eigen::Index i = 0; i < m; ++i) {
      const auto c = out.labels[static_cast<std::size_t>(i)];
      sums.row(static_cast<Eigen::Index>(c)) += vectors.row(i);
      ++counts[c];
    }
    for (Eigen::Index c = 0; c < k; ++c) {
      if (counts[static_cast<std::size_t>(c)] > 0) {
        out.centroids.row(c) = sums.row(c) / static_cast<double>(counts[static_cast<std::size_t>(c)]);
      }
    }
    assign(next);
    out.iterations = it;
    if (next == out.labels) {
      out.converged = true;
      break;
    }
    out.labels.swap(next);
  }
  return out;
}

/// (1/N) sum over clusters of the size of the cluster's largest ground-truth
/// class.
inline double purity(std::span<const std::size_t> clusters,
                     std::span<const std::string> truth) {
  if (clusters.size() != truth.size()) {
    throw Error(ErrorCode::LengthMismatch, "cluster and truth labels differ in length");
  }
  if (clusters.empty()) throw Error(ErrorCode::DegenerateInput, "purity of an empty clustering");
  std::map<std::size_t, std::map<std::string_view, std::size_t>> table;
  for (std::size_t i = 0; i < clusters.size(); ++i) ++table[clusters[i]][truth[i]];
  std::size_t majority = 0;
  for (const auto& [cluster, counts] : table) {
    std::size_t best = 0;
    for (const auto& [label, count] : counts) best = std::max(best, count);
    majority += best;
  }
  return static_cast<double>(majority) / static_cast<double>(clusters.size());
}

/// Purity of a word-labelled assignment against a category dataset. Throws
/// MissingTruth for a word the dataset does not categorise.
inline double purity(const ClusterAssignment& assignment, const CategoryDataset& truth) {
  if (assignment.words.size() != assignment.labels.size()) {
    throw Error(ErrorCode::InvalidArgument, "assignment carries no word labels");
  }
  std::unordered_map<std::string, const std::string*> category_of;
  for (const auto& rec : truth.records) category_of.emplace(rec.word, &rec.category);
  std::vector<std::string> labels;
  labels.reserve(assignment.words.size());
  for (const auto& word : assignment.words) {
    auto it = category_of.find(word);
    if (it == category_of.end()) {
      throw Error(ErrorCode::MissingTruth, "no category for '" + word + "'");
    }
    labels.push_back(*it->second);
  }
  return purity(assignment.labels, labels);
}

/// k-means with k = number of categories, seeded with each category's mean
/// vector in this embedding, scored by purity.
template <std::floating_point T>
EvalReport eval_categorization(const Embedding<T>& emb, const CategoryDataset& ds,
                               const LookupPolicy& policy = {}, std::size_t max_iter = 100) {
  EvalReport report{"purity"};
  std::unordered_map<std::string, std::size_t> cat_index;
  for (std::size_t c = 0; c < ds.categories.size(); ++c) cat_index.emplace(ds.categories[c], c);

  const auto n = static_cast<Eigen::Index>(emb.dim());
  std::vector<Eigen::VectorXd> rows;
  std::vector<std::size_t> truth_index;
  ClusterAssignment named;
  for (const auto& rec : ds.records) {
    auto v = lookup(emb, rec.word, policy);
    if (!v) {
      ++report.skipped;
      continue;
    }
    rows.push_back(std::move(*v));
    truth_index.push_back(cat_index.at(rec.category));
    named.words.push_back(rec.word);
    ++report.evaluated;
  }
  const auto k = static_cast<Eigen::Index>(ds.categories.size());
  if (k < 2) throw DegenerateEvaluation("fewer than two categories", report);

  Eigen::MatrixXd vectors(static_cast<Eigen::Index>(rows.size()), n);
  for (std::size_t i = 0; i < rows.size(); ++i) vectors.row(static_cast<Eigen::Index>(i)) = rows[i];
  Eigen::MatrixXd centroids = Eigen::MatrixXd::Zero(k, n);
  std::vector<std::size_t> members(static_cast<std::size_t>(k), 0);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    centroids.row(static_cast<Eigen::Index>(truth_index[i])) += rows[i].transpose();
    ++members[truth_index[i]];
  }
  for (Eigen::Index c = 0; c < k; ++c) {
    if (members[static_cast<std::size_t>(c)] == 0) {
      throw DegenerateEvaluation("category '" + ds.categories[static_cast<std::size_t>(c)] +
                                     "' has no in-vocabulary word",
                                 report);
    }
    centroids.row(c) /= static_cast<double>(members[static_cast<std::size_t>(c)]);
  }

  ClusterAssignment result = kmeans_fixed_init(vectors, centroids, max_iter);
  result.words = std::move(named.words);
  report.score = purity(result, ds);
  return report;
}

}  // namespace cnwv
