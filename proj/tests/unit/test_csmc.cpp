// Copyright 2026 The mspgas Authors
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
#include <numbers>

#include "mspgas/csmc.hpp"
#include "mspgas/error.hpp"
#include "support/fixtures.hpp"

namespace mspgas {
namespace {

using testing::small_dataset;

struct Block {
  Dataset data = small_dataset(17, 1, 2, 5);
  const Matrix& obs() const { return data.obs.fine[0][0]; }
  const Matrix& truth() const { return data.states.fine[0][0]; }
  FineBlock conditional() const { return {data.init.fine[0], data.init.coarse[0], obs(), &truth()}; }
  const SpdMatrix& sigma_f() const { return data.true_noise.sigma_f; }
  const SpdMatrix& sigma_v() const { return data.true_noise.sigma_v; }
};

TEST(InitFine, SingleParticleIsTheReference) {
  Block b;
  Rng rng(RandomSeed{1});
  const ParticleSystem s = init_fine(b.conditional(), b.data.model, b.sigma_f(), b.sigma_v(), 1, rng);
  ASSERT_EQ(s.size(), 1);
  EXPECT_EQ(s.states[0].col(0), b.truth().col(0));
  EXPECT_EQ(s.weights(0), 1.0);
}

TEST(InitFine, ReferenceDominatesUnderTinyObservationNoise) {
  int wins = 0;
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const Dataset data = small_dataset(100 + seed, 1, 1, 3);
    Rng rng(RandomSeed{seed});
    const FineBlock block{data.init.fine[0], data.init.coarse[0], data.obs.fine[0][0], &data.states.fine[0][0]};
    const ParticleSystem s = init_fine(block, data.model, data.true_noise.sigma_f, data.true_noise.sigma_v, 100, rng);
    Eigen::Index best;
    s.weights.maxCoeff(&best);
    wins += best == 99;
    EXPECT_NEAR(s.weights.sum(), 1.0, 1e-12);
  }
  EXPECT_GE(wins, 45);
}

TEST(FineSweep, SingleParticleReturnsReference) {
  Block b;
  Rng rng(RandomSeed{2});
  ParticleSystem s = init_fine(b.conditional(), b.data.model, b.sigma_f(), b.sigma_v(), 1, rng);
  fine_csmc_sweep(s, b.conditional(), b.data.model, b.sigma_f(), b.sigma_v(), ResamplingScheme::Multinomial, rng);
  EXPECT_EQ(s.path(0), b.truth());
}

TEST(FineSweep, ReferenceSlotAndAncestry) {
  Block b;
  Rng rng(RandomSeed{3});
  const int n = 25;
  ParticleSystem s = init_fine(b.conditional(), b.data.model, b.sigma_f(), b.sigma_v(), n, rng);
  fine_csmc_sweep(s, b.conditional(), b.data.model, b.sigma_f(), b.sigma_v(), ResamplingScheme::Multinomial, rng);
  ASSERT_EQ(s.stages(), 5);
  for (int k = 0; k < 5; ++k) {
    EXPECT_EQ(s.states[k].col(n - 1), b.truth().col(k));
    if (k > 0) {
      ASSERT_EQ(static_cast<int>(s.ancestors[k].size()), n);
      for (int a : s.ancestors[k]) {
        EXPECT_GE(a, 0);
        EXPECT_LT(a, n);
      }
    }
  }
  for (int i = 0; i < n; ++i) EXPECT_EQ(s.path(i).cols(), 5);
  EXPECT_NEAR(s.weights.sum(), 1.0, 1e-12);
}

TEST(FineSweep, AncestorDrawMatchesHandComputedProbabilities) {
  // Three particles at stage 0 with fixed weights; the reference at stage 1 is
  // x*. Pr(J = i) = w_i N(x*; cos(A x_i + X), s^2 I) / sum.
  const Model model{{1, 1, 2, 1, 1}, {Matrix::Identity(1, 1), Matrix::Zero(1, 1), Vector::Ones(2)}, TransitionKind::paper()};
  const double s2 = 0.05;
  const SpdMatrix sigma_f = SpdMatrix::identity(1, s2);
  const SpdMatrix sigma_v = SpdMatrix::identity(1, 1.0);
  Matrix reference(1, 2);
  reference << 0.4, 0.8;
  const Matrix obs = reference;
  const FineBlock block{Vector::Zero(1), Vector::Zero(1), obs, &reference};

  const double x[3] = {0.1, 1.2, 0.4};
  const double w[3] = {0.2, 0.3, 0.5};
  double hand[3], total = 0;
  for (int i = 0; i < 3; ++i) {
    const double r = 0.8 - std::cos(x[i]);
    hand[i] = w[i] * std::exp(-r * r / (2 * s2)) / std::sqrt(2 * std::numbers::pi * s2);
    total += hand[i];
  }
  for (double& h : hand) h /= total;

  ParticleSystem base;
  base.states.push_back((Matrix(1, 3) << x[0], x[1], x[2]).finished());
  base.ancestors.emplace_back();
  base.weights = Vector::Map(w, 3);
  base.log_weights = base.weights.array().log();

  Vector lt(3);
  for (int i = 0; i < 3; ++i) lt(i) = log_trans_fine(reference.col(1), Vector::Constant(1, x[i]), Vector::Zero(1), sigma_f, model.coupling, model.kind);
  const Vector probs = ancestor_probabilities(base.weights, lt);
  for (int i = 0; i < 3; ++i) EXPECT_NEAR(probs(i), hand[i], 1e-12);

  Rng rng(RandomSeed{4});
  int counts[3] = {0, 0, 0};
  const int runs = 20000;
  for (int r = 0; r < runs; ++r) {
    ParticleSystem s = base;
    fine_csmc_sweep(s, block, model, sigma_f, sigma_v, ResamplingScheme::Multinomial, rng);
    ++counts[s.ancestors[1][2]];
  }
  for (int i = 0; i < 3; ++i) {
    const double se = std::sqrt(hand[i] * (1 - hand[i]) / runs);
    EXPECT_NEAR(counts[i] / static_cast<double>(runs), hand[i], 4 * se + 1e-9);
  }
}

TEST(FineSweep, NoiselessLimitPicksTheTrueParent) {
  const Model model{{1, 1, 2, 3, 3}, {Matrix::Identity(3, 3) * 0.5, Matrix::Zero(1, 1), Vector::Ones(2)}, TransitionKind::paper()};
  const SpdMatrix sigma_f = SpdMatrix::identity(3, 1e-12);
  const SpdMatrix sigma_v = SpdMatrix::identity(3, 1.0);
  Rng rng(RandomSeed{5});
  const int n = 20;
  int hits = 0;
  for (int r = 0; r < 1000; ++r) {
    ParticleSystem s;
    Matrix prev(3, n);
    for (int i = 0; i < 3 * n; ++i) prev(i % 3, i / 3) = rng.normal();
    Matrix reference(3, 2);
    reference.col(0) = prev.col(n - 1);
    reference.col(1) = transition_fine(prev.col(n - 1), Vector::Zero(3), model.coupling, model.kind) +
                       1e-6 * testing::random_vector(3, rng);
    s.states.push_back(prev);
    s.ancestors.emplace_back();
    s.weights = Vector::Constant(n, 1.0 / n);
    s.log_weights = s.weights.array().log();
    const FineBlock block{Vector::Zero(3), Vector::Zero(3), reference, &reference};
    fine_csmc_sweep(s, block, model, sigma_f, sigma_v, ResamplingScheme::Multinomial, rng);
    hits += s.ancestors[1][n - 1] == n - 1;
  }
  EXPECT_GE(hits, 990);
}

TEST(ParticleSystem, WeightedPathSumsMatchPaths) {
  Block b;
  Rng rng(RandomSeed{6});
  ParticleSystem s = init_fine(b.conditional(), b.data.model, b.sigma_f(), b.sigma_v(), 8, rng);
  fine_csmc_sweep(s, b.conditional(), b.data.model, b.sigma_f(), b.sigma_v(), ResamplingScheme::Multinomial, rng);
  const Vector w = Vector::LinSpaced(5, 0.1, 0.9);
  const Matrix sums = s.weighted_path_sums(w);
  for (int i = 0; i < 8; ++i) EXPECT_TRUE(sums.col(i).isApprox(s.path(i) * w, 1e-13));
  EXPECT_THROW(s.path(8), Error);
}

CoarseStep coarse_step(const Dataset& data, const ParticleSystem& fine, const Vector* ref) {
  CoarseStep step;
  step.self_coupling = data.model.coupling.B(0, 0);
  step.coupled_others = Vector::Zero(data.dims().mx);
  step.fine_averages = fine.weighted_path_sums(data.model.coupling.w) / data.model.coupling.w.sum();
  step.obs = data.obs.coarse[0].col(0);
  step.reference = ref;
  return step;
}

TEST(CoarseStep, SingleParticleReturnsReference) {
  Block b;
  Rng rng(RandomSeed{7});
  ParticleSystem fine = init_fine(b.conditional(), b.data.model, b.sigma_f(), b.sigma_v(), 1, rng);
  fine_csmc_sweep(fine, b.conditional(), b.data.model, b.sigma_f(), b.sigma_v(), ResamplingScheme::Multinomial, rng);
  const Vector ref0 = b.data.states.coarse[0].col(0), ref1 = b.data.states.coarse[0].col(1);
  ParticleSystem coarse = init_coarse(coarse_step(b.data, fine, &ref0), b.data.init.coarse[0], b.data.model,
                                      b.data.true_noise.sigma_c[0], b.data.true_noise.sigma_V[0], rng);
  coarse_csmc_step(coarse, coarse_step(b.data, fine, &ref1), b.data.model, b.data.true_noise.sigma_c[0],
                   b.data.true_noise.sigma_V[0], ResamplingScheme::Multinomial, rng);
  ASSERT_EQ(coarse.stages(), 2);
  EXPECT_EQ(coarse.path(0).col(0), ref0);
  EXPECT_EQ(coarse.path(0).col(1), ref1);
  EXPECT_EQ(coarse.weights(0), 1.0);
}

TEST(CoarseStep, MeanDependsOnlyOnFineAverageWithoutCoupling) {
  Dataset data = small_dataset(18, 1, 2, 5);
  data.model.coupling.B.setZero();
  Rng rng(RandomSeed{8});
  const FineBlock block{data.init.fine[0], data.init.coarse[0], data.obs.fine[0][0], nullptr};
  ParticleSystem fine = init_fine(block, data.model, data.true_noise.sigma_f, data.true_noise.sigma_v, 10, rng);
  fine_csmc_sweep(fine, block, data.model, data.true_noise.sigma_f, data.true_noise.sigma_v,
                  ResamplingScheme::Multinomial, rng);
  const SpdMatrix tiny = SpdMatrix::identity(3, 1e-24);
  const ParticleSystem coarse = init_coarse(coarse_step(data, fine, nullptr), data.init.coarse[0], data.model,
                                            tiny, data.true_noise.sigma_V[0], rng);
  for (int i = 0; i < 10; ++i) {
    const Vector direct = transition_coarse(data.init.coarse[0].transpose(), fine.path(i), data.model.coupling, 0,
                                            data.model.kind);
    EXPECT_LT((coarse.states[0].col(i) - direct).cwiseAbs().maxCoeff(), 1e-10);
  }
  EXPECT_NEAR(coarse.weights.sum(), 1.0, 1e-12);
}

TEST(CoarseStep, WeightsNormalizedAndReferencePinned) {
  Block b;
  Rng rng(RandomSeed{9});
  ParticleSystem fine = init_fine(b.conditional(), b.data.model, b.sigma_f(), b.sigma_v(), 30, rng);
  fine_csmc_sweep(fine, b.conditional(), b.data.model, b.sigma_f(), b.sigma_v(), ResamplingScheme::Multinomial, rng);
  const Vector ref0 = b.data.states.coarse[0].col(0), ref1 = b.data.states.coarse[0].col(1);
  ParticleSystem coarse = init_coarse(coarse_step(b.data, fine, &ref0), b.data.init.coarse[0], b.data.model,
                                      b.data.true_noise.sigma_c[0], b.data.true_noise.sigma_V[0], rng);
  coarse_csmc_step(coarse, coarse_step(b.data, fine, &ref1), b.data.model, b.data.true_noise.sigma_c[0],
                   b.data.true_noise.sigma_V[0], ResamplingScheme::Systematic, rng);
  EXPECT_NEAR(coarse.weights.sum(), 1.0, 1e-12);
  EXPECT_TRUE((coarse.weights.array() >= 0).all());
  EXPECT_EQ(coarse.states[1].col(29), ref1);
}

TEST(PgasKernel, SingleParticleIsIdentity) {
  const Dataset data = small_dataset(19, 3, 4, 5);
  Rng rng(RandomSeed{10});
  const ReferenceTrajectory ref =
      bootstrap_pass(data, data.true_noise.sigma_f, data.true_noise.sigma_c, {50}, rng);
  EXPECT_EQ(pgas_kernel(data, data.true_noise.sigma_f, data.true_noise.sigma_c, ref, {1}, rng), ref);
}

TEST(PgasKernel, DeterministicUnderSeed) {
  const Dataset data = small_dataset(20, 2, 3, 4);
  const auto run = [&] {
    Rng rng(RandomSeed{11});
    KernelStats stats;
    return pgas_kernel(data, data.true_noise.sigma_f, data.true_noise.sigma_c, data.states, {40}, rng, &stats);
  };
  const ReferenceTrajectory a = run(), b = run();
  EXPECT_EQ(a, b);
  EXPECT_NO_THROW(check_shape(a, data.dims()));
}

TEST(PgasKernel, RejectsZeroParticles) {
  const Dataset data = small_dataset(21, 1, 1, 2);
  Rng rng(RandomSeed{12});
  EXPECT_THROW(pgas_kernel(data, data.true_noise.sigma_f, data.true_noise.sigma_c, data.states, {0}, rng), Error);
}

TEST(PgasKernel, IndividualStreamsAreIndependentOfLaterIndividuals) {
  // Individual 0's draws come from its own split stream, so a dataset that only
  // differs in individual 1's observations yields the same fine path for d = 0.
  Dataset a = small_dataset(22, 2, 1, 4);
  Dataset b = a;
  b.obs.fine[1][0].array() += 0.5;
  Rng ra(RandomSeed{13}), rb(RandomSeed{13});
  const auto oa = pgas_kernel(a, a.true_noise.sigma_f, a.true_noise.sigma_c, a.states, {30}, ra);
  const auto ob = pgas_kernel(b, b.true_noise.sigma_f, b.true_noise.sigma_c, b.states, {30}, rb);
  EXPECT_EQ(oa.fine[0][0], ob.fine[0][0]);
  EXPECT_NE(oa.fine[1][0], ob.fine[1][0]);
}

}  // namespace
}  // namespace mspgas
