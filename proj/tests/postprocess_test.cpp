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

#include <gtest/gtest.h>

#include <cmath>
#include <string>
#include <vector>

#include "cnwv/postprocess.hpp"
#include "test_support.hpp"

namespace cnwv {
namespace {

using testing::Rng;

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "expected an Error";
  return ErrorCode::InvalidArgument;
}

SpectralGate gate_for(const Embedding<double>& emb, const Eigen::VectorXd& gains, bool center) {
  const auto eig = sym_eigen(correlation_matrix(emb, center));
  return SpectralGate(eig.basis, gains);
}

TEST(CnTransformTest, TinyApertureIsIdentity) {
  Rng rng(1);
  const auto emb = testing::random_embedding(rng, 30, 5);
  const auto out = cn_transform(emb, CnConfig{1e-8, std::nullopt, false});
  for (std::size_t i = 0; i < emb.size(); ++i) {
    EXPECT_LT((out.row(i) - emb.row(i)).norm(), 1e-5 * emb.row(i).norm());
  }
  EXPECT_EQ(out.vocab(), emb.vocab());
}

TEST(CnTransformTest, OrthogonalUnitVectors) {
  RowMatrix<double> m(2, 2);
  m << 1, 0, 0, 1;
  const Embedding<double> emb({"x", "y"}, m);
  const auto out = cn_transform(emb, CnConfig{1.0, std::nullopt, false});
  EXPECT_LT(testing::max_abs_diff(out.vectors(), (2.0 / 3.0) * Eigen::MatrixXd::Identity(2, 2)),
            1e-15);
}

TEST(CnTransformTest, EqualsSoftGateOnZeroMeanData) {
  Rng rng(2);
  const auto emb = testing::random_embedding(rng, 50, 8, true);
  const double alpha = 2.0;
  const auto out = cn_transform(emb, CnConfig{alpha, std::nullopt, false});
  const auto eig = sym_eigen(correlation_matrix(emb, false));
  const auto gated =
      spectral_gate_transform(emb, SpectralGate(eig.basis, cn_gains(eig.values, alpha)));
  EXPECT_LT(testing::max_abs_diff(out.vectors(), gated.vectors()), 1e-8);
}

TEST(CnTransformTest, MatchesDirectInversionRoute) {
  Rng rng(3);
  const auto emb = testing::random_embedding(rng, 40, 6);
  const Eigen::MatrixXd R = testing::brute_correlation(emb.vectors());
  const Eigen::MatrixXd C = R * (R + 0.25 * Eigen::MatrixXd::Identity(6, 6)).inverse();
  const Eigen::MatrixXd expected = emb.vectors() * (Eigen::MatrixXd::Identity(6, 6) - C).transpose();
  const auto out = cn_transform(emb, CnConfig{});
  EXPECT_LT(testing::max_abs_diff(out.vectors(), expected), 1e-9);
}

TEST(CnTransformTest, SubsetEstimatesButTransformsEverything) {
  Rng rng(4);
  const auto emb = testing::random_embedding(rng, 25, 4);
  std::vector<std::string> subset = {"tok0", "tok1", "tok2", "tok3", "tok4", "tok5", "tok9"};
  const auto out = cn_transform(emb, CnConfig{2.0, subset, false});
  Eigen::MatrixXd rows(7, 4);
  for (int i = 0; i < 6; ++i) rows.row(i) = emb.row(static_cast<std::size_t>(i));
  rows.row(6) = emb.row(9);
  const Eigen::MatrixXd R = testing::brute_correlation(rows);
  const Eigen::MatrixXd notC =
      Eigen::MatrixXd::Identity(4, 4) - R * (R + 0.25 * Eigen::MatrixXd::Identity(4, 4)).inverse();
  EXPECT_EQ(out.size(), emb.size());
  EXPECT_LT(testing::max_abs_diff(out.vectors(), emb.vectors() * notC.transpose()), 1e-9);

  EXPECT_EQ(code_of([&] { cn_transform(emb, CnConfig{2.0, std::vector<std::string>{"nope"}, false}); }),
            ErrorCode::EmptySubset);
  EXPECT_EQ(code_of([&] { cn_transform(emb, CnConfig{-2.0, std::nullopt, false}); }),
            ErrorCode::InvalidAperture);
}

TEST(CnTransformTest, CenteringShiftsEveryRowBySubsetMean) {
  Rng rng(5);
  const auto emb = testing::random_embedding(rng, 30, 4);
  std::vector<std::string> subset = {"tok1", "tok2", "tok3", "tok20"};
  const auto out = cn_transform(emb, CnConfig{2.0, subset, true});
  ASSERT_TRUE(out.subtracted_mean().has_value());
  const Eigen::RowVectorXd mu =
      (emb.row(1) + emb.row(2) + emb.row(3) + emb.row(20)) / 4.0;
  EXPECT_LT((out.subtracted_mean()->transpose() - mu).cwiseAbs().maxCoeff(), 1e-14);

  RowMatrix<double> shifted = emb.vectors();
  shifted.rowwise() -= mu;
  const Embedding<double> manual(emb.vocab(), shifted);
  const auto expected = cn_transform(manual, CnConfig{2.0, subset, false});
  EXPECT_LT(testing::max_abs_diff(out.vectors(), expected.vectors()), 1e-12);
}

TEST(CnTransformTest, NeverLengthensAVector) {
  Rng rng(6);
  for (int trial = 0; trial < 10; ++trial) {
    const auto emb = testing::random_embedding(rng, 40, 7);
    const auto out = cn_transform(emb, CnConfig{.alpha = 0.5 + trial});
    for (std::size_t i = 0; i < emb.size(); ++i) {
      EXPECT_LE(out.row(i).norm(), emb.row(i).norm() * (1 + 1e-12));
    }
  }
}

TEST(CnTransformTest, ThreadCountDoesNotChangeOutput) {
  Rng rng(7);
  const auto emb = testing::random_embedding(rng, 3 * kRowBlock + 17, 5);
  const auto a = cn_transform(emb, CnConfig{}, Exec{1});
  const auto b = cn_transform(emb, CnConfig{}, Exec{4});
  EXPECT_EQ(a.vectors(), b.vectors());
}

TEST(AbttTransformTest, ZeroComponentsOnlyCenters) {
  Rng rng(8);
  const auto emb = testing::random_embedding(rng, 20, 5);
  const auto out = abtt_transform(emb, AbttConfig{0});
  Eigen::MatrixXd centered = emb.vectors();
  centered.rowwise() -= centered.colwise().mean();
  EXPECT_LT(testing::max_abs_diff(out.vectors(), centered), 1e-12);
}

TEST(AbttTransformTest, RemovingAllComponentsGivesZeros) {
  Rng rng(9);
  const auto emb = testing::random_embedding(rng, 20, 5);
  const auto out = abtt_transform(emb, AbttConfig{5});
  EXPECT_LT(out.vectors().cwiseAbs().maxCoeff(), 1e-8);
  EXPECT_EQ(code_of([&] { abtt_transform(emb, AbttConfig{6}); }), ErrorCode::InvalidD);
}

TEST(AbttTransformTest, EqualsHardGateAfterCentering) {
  Rng rng(10);
  const auto emb = testing::random_embedding(rng, 50, 8);
  const auto out = abtt_transform(emb, AbttConfig{3});

  RowMatrix<double> centered = emb.vectors();
  centered.rowwise() -= centered.colwise().mean();
  const Embedding<double> c(emb.vocab(), centered);
  const auto gate = gate_for(c, abtt_gains(8, 3), false);
  const auto gated = spectral_gate_transform(c, gate);
  EXPECT_LT(testing::max_abs_diff(out.vectors(), gated.vectors()), 1e-8);

  for (Eigen::Index i = 0; i < 3; ++i) {
    EXPECT_LT((out.vectors() * gate.basis().col(i)).cwiseAbs().maxCoeff(), 1e-8);
  }
}

TEST(AbttTransformTest, RemainingSpectrumIsUntouched) {
  Rng rng(11);
  const auto emb = testing::random_embedding(rng, 60, 6);
  const auto before = sym_eigen(correlation_matrix(emb, true));
  const auto after = sym_eigen(correlation_matrix(abtt_transform(emb, AbttConfig{2}), false));
  for (Eigen::Index i = 0; i < 4; ++i) EXPECT_NEAR(after.values(i), before.values(i + 2), 1e-9);
  EXPECT_NEAR(after.values(4), 0.0, 1e-9);
  EXPECT_NEAR(after.values(5), 0.0, 1e-9);
}

TEST(SpectralGateTest, UnitGainsAreIdentity) {
  Rng rng(12);
  const auto emb = testing::random_embedding(rng, 15, 4);
  const auto out = spectral_gate_transform(emb, gate_for(emb, Eigen::VectorXd::Ones(4), false));
  EXPECT_LT(testing::max_abs_diff(out.vectors(), emb.vectors()), 1e-10);
}

TEST(SpectralGateTest, ZeroGainsAnnihilate) {
  Rng rng(13);
  const auto emb = testing::random_embedding(rng, 15, 4);
  const auto out = spectral_gate_transform(emb, gate_for(emb, Eigen::VectorXd::Zero(4), false));
  EXPECT_EQ(out.vectors().cwiseAbs().maxCoeff(), 0.0);
}

TEST(SpectralGateTest, SingleGainProjectsOnFirstComponent) {
  Rng rng(14);
  const auto emb = testing::random_embedding(rng, 15, 4);
  Eigen::VectorXd g = Eigen::VectorXd::Zero(4);
  g(0) = 1.0;
  const auto gate = gate_for(emb, g, false);
  const auto out = spectral_gate_transform(emb, gate);
  const Eigen::VectorXd u = gate.basis().col(0);
  for (std::size_t i = 0; i < emb.size(); ++i) {
    const Eigen::VectorXd v = emb.row(i).transpose();
    EXPECT_LT((out.row(i).transpose() - u * u.dot(v)).cwiseAbs().maxCoeff(), 1e-12);
    EXPECT_LT((out.row(i).transpose() - gate.apply(v)).cwiseAbs().maxCoeff(), 1e-12);
  }
}

TEST(SpectralGateTest, Validation) {
  Rng rng(15);
  const auto emb = testing::random_embedding(rng, 5, 3);
  EXPECT_EQ(code_of([&] {
              spectral_gate_transform(emb, SpectralGate(Eigen::MatrixXd::Identity(2, 2),
                                                        Eigen::VectorXd::Ones(2)));
            }),
            ErrorCode::DimensionMismatch);
  EXPECT_EQ(code_of([&] { SpectralGate(2.0 * Eigen::MatrixXd::Identity(3, 3), Eigen::VectorXd::Ones(3)); }),
            ErrorCode::InvalidArgument);
  EXPECT_EQ(code_of([&] { SpectralGate(Eigen::MatrixXd::Identity(3, 3), Eigen::VectorXd::Constant(3, 1.5)); }),
            ErrorCode::InvalidArgument);
}

TEST(GainsTest, CnGainExamples) {
  EXPECT_EQ(cn_gains(Eigen::VectorXd::Zero(3), 2.0), Eigen::VectorXd::Ones(3));
  Eigen::Vector2d sigma(3.0, 1.0);
  const auto g = cn_gains(sigma, 1.0);
  EXPECT_DOUBLE_EQ(g(0), 0.25);
  EXPECT_DOUBLE_EQ(g(1), 0.5);
  EXPECT_EQ(code_of([&] { cn_gains(sigma, 0.0); }), ErrorCode::InvalidAperture);
}

TEST(GainsTest, CnGainsAreSoftAndOrdered) {
  Rng rng(16);
  for (int trial = 0; trial < 50; ++trial) {
    const Eigen::VectorXd sigma = testing::random_spectrum(rng, 1 + trial % 20, 1e-3, 50.0);
    const auto g = cn_gains(sigma, 0.25 + trial * 0.3);
    for (Eigen::Index i = 0; i < g.size(); ++i) {
      EXPECT_GT(g(i), 0.0);
      EXPECT_LT(g(i), 1.0);
      if (i > 0) {
        EXPECT_LE(g(i - 1), g(i));
      }
    }
  }
}

TEST(GainsTest, AbttGainsAreHard) {
  EXPECT_EQ(abtt_gains(5, 0), Eigen::VectorXd::Ones(5));
  EXPECT_EQ(abtt_gains(5, 5), Eigen::VectorXd::Zero(5));
  EXPECT_EQ(abtt_gains(4, 2), Eigen::Vector4d(0, 0, 1, 1));
  EXPECT_EQ(code_of([] { abtt_gains(4, 5); }), ErrorCode::InvalidD);
}

EwFactors random_factors(Rng& rng, Eigen::Index vocab, Eigen::Index n, double p) {
  EwFactors f;
  f.theta = testing::random_orthonormal_columns(rng, vocab, n);
  f.singular = testing::random_spectrum(rng, n, 0.5, 20.0);
  f.p = p;
  return f;
}

TEST(EwTransformTest, ExponentEndpoints) {
  Rng rng(17);
  auto f = random_factors(rng, 12, 3, 1.0);
  EXPECT_LT(testing::max_abs_diff(ew_transform(f).vectors(), f.theta * f.singular.asDiagonal()),
            1e-15);
  f.p = 0.0;
  EXPECT_EQ(ew_transform(f).vectors(), RowMatrix<double>(f.theta));
}

TEST(EwTransformTest, SquareRootWeighting) {
  Rng rng(18);
  auto f = random_factors(rng, 20, 4, 0.5);
  f.singular = Eigen::Vector4d(4, 3, 2, 1);
  const auto out = ew_transform(f);
  const double scale[] = {2.0, std::sqrt(3.0), std::sqrt(2.0), 1.0};
  for (Eigen::Index r = 0; r < 20; ++r)
    for (Eigen::Index c = 0; c < 4; ++c)
      EXPECT_NEAR(out.vectors()(r, c), f.theta(r, c) * scale[c], 1e-15);
}

TEST(EwTransformTest, RejectsInvalidFactors) {
  Rng rng(19);
  auto f = random_factors(rng, 10, 3, 0.5);
  f.singular = Eigen::Vector3d(1, 2, 3);
  EXPECT_EQ(code_of([&] { ew_transform(f); }), ErrorCode::InvalidFactors);
  f.singular = Eigen::Vector3d(3, 2, 0);
  EXPECT_EQ(code_of([&] { ew_transform(f); }), ErrorCode::InvalidFactors);
  f = random_factors(rng, 10, 3, 0.5);
  f.theta *= 2.0;
  EXPECT_EQ(code_of([&] { ew_transform(f); }), ErrorCode::InvalidFactors);
}

TEST(EwEquivalenceTest, IsotropicFactorsShrinkUniformly) {
  Rng rng(20);
  auto f = random_factors(rng, 16, 4, 1.0);
  f.singular = Eigen::VectorXd::Constant(4, 3.0);
  const auto w = ew_cn_weights(f.singular, 16, 2.0);
  const double expected = 16 * 0.25 / (9.0 + 16 * 0.25);
  for (Eigen::Index i = 0; i < 4; ++i) EXPECT_DOUBLE_EQ(w(i), expected);
  const auto [via_cn, closed] = cn_on_pmi_equivalence(f, 2.0);
  EXPECT_LT(testing::max_abs_diff(via_cn.vectors(), closed.vectors()), 1e-12);
  EXPECT_LT(testing::max_abs_diff(closed.vectors(), expected * f.theta * f.singular.asDiagonal()),
            1e-14);
}

TEST(EwEquivalenceTest, HandValueFiveTwentyFirsts) {
  const auto w = ew_cn_weights(Eigen::Vector4d(4, 3, 2, 1), 20, 2.0);
  EXPECT_NEAR(w(0), 5.0 / 21.0, 1e-12);
}

TEST(EwEquivalenceTest, RandomFactorsAgree) {
  Rng rng(21);
  for (int trial = 0; trial < 10; ++trial) {
    const auto f = random_factors(rng, 30 + trial * 7, 2 + trial, 0.5);
    const auto [via_cn, closed] = cn_on_pmi_equivalence(f, 0.5 + trial * 0.5);
    EXPECT_LT(testing::max_abs_diff(via_cn.vectors(), closed.vectors()), 1e-8);
  }
}

TEST(EwEquivalenceTest, InfiniteApertureNullsBothRoutes) {
  Rng rng(22);
  const auto f = random_factors(rng, 20, 4, 1.0);
  const auto [via_cn, closed] = cn_on_pmi_equivalence(f, 1e8);
  EXPECT_LT(via_cn.vectors().cwiseAbs().maxCoeff(), 1e-8);
  EXPECT_LT(closed.vectors().cwiseAbs().maxCoeff(), 1e-8);
}

TEST(EwEmbeddingTest, WeightsSingularValuesOfAnArbitraryEmbedding) {
  Rng rng(23);
  const Eigen::MatrixXd theta = testing::random_orthonormal_columns(rng, 40, 5);
  const Eigen::VectorXd lambda = testing::random_spectrum(rng, 5, 1.0, 30.0);
  const Eigen::MatrixXd gamma = testing::random_orthogonal(rng, 5);
  const Embedding<double> emb(testing::synthetic_vocab(40),
                              RowMatrix<double>(theta * lambda.asDiagonal() * gamma.transpose()));
  for (double p : {0.0, 0.25, 0.5, 1.0}) {
    const Eigen::MatrixXd expected =
        theta * lambda.array().pow(p).matrix().asDiagonal() * gamma.transpose();
    EXPECT_LT(testing::max_abs_diff(ew_transform(emb, p).vectors(), expected), 1e-9) << p;
  }
}

}  // namespace
}  // namespace cnwv
