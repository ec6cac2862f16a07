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

#include "mspgas/error.hpp"
#include "mspgas/simulate.hpp"

namespace mspgas {
namespace {

Dataset default_dataset(std::uint64_t seed) {
  const RunConfig c = default_config(RandomSeed{seed});
  return generate(make_model(c), c.noise, std::nullopt, c.seed);
}

TEST(DefaultConfig, ReferenceSettings) {
  const RunConfig c = default_config();
  EXPECT_EQ(c.dims, (ModelDims{4, 20, 20, 3, 3}));
  EXPECT_EQ(c.priors.fine.dof, 4.0);
  ASSERT_EQ(c.priors.coarse.size(), 4u);
  for (const auto& p : c.priors.coarse) {
    EXPECT_EQ(p.dof, 8.0);
    EXPECT_EQ(p.scale.matrix(), 0.1 * Matrix::Identity(3, 3));
  }
  EXPECT_EQ(c.chain.particles, 800);
  EXPECT_EQ(c.chain.iterations, 10000);
  EXPECT_EQ(c.chain.burn_in, 0.1);
  EXPECT_EQ(c.noise.sigma_f.matrix(), 0.2 * Matrix::Identity(3, 3));
  const double coarse[] = {0.3, 0.5, 0.7, 0.2};
  const double obs[] = {3e-4, 5e-4, 7e-4, 9e-4};
  for (int d = 0; d < 4; ++d) {
    EXPECT_EQ(c.noise.sigma_c[d].matrix(), coarse[d] * Matrix::Identity(3, 3));
    EXPECT_EQ(c.noise.sigma_V[d].matrix(), obs[d] * Matrix::Identity(3, 3));
  }
  EXPECT_EQ(c.noise.sigma_v.matrix(), 3e-4 * Matrix::Identity(3, 3));
}

TEST(Generate, ShapesMatchDims) {
  const Dataset data = default_dataset(1);
  EXPECT_NO_THROW(check_shape(data.states, data.dims()));
  EXPECT_NO_THROW(check_shape(data.obs, data.dims()));
  EXPECT_EQ(data.init.fine.size(), 4u);
  EXPECT_EQ(data.init.coarse.size(), 4u);
}

TEST(Generate, SameSeedBitIdentical) {
  const Dataset a = default_dataset(42), b = default_dataset(42), c = default_dataset(43);
  EXPECT_EQ(a.states, b.states);
  EXPECT_EQ(a.obs, b.obs);
  EXPECT_EQ(a.init, b.init);
  EXPECT_NE(a.states, c.states);
}

TEST(Generate, NearNoiselessObservations) {
  RunConfig c = default_config(RandomSeed{3});
  const SpdMatrix tiny = SpdMatrix::identity(3, 1e-12);
  c.noise = NoiseSpec{tiny, std::vector<SpdMatrix>(4, tiny), tiny, std::vector<SpdMatrix>(4, tiny)};
  const Dataset data = generate(make_model(c), c.noise, std::nullopt, c.seed);
  for (int d = 0; d < 4; ++d) {
    EXPECT_LT((data.obs.coarse[d] - data.states.coarse[d]).cwiseAbs().maxCoeff(), 1e-4);
    for (int t = 0; t < 20; ++t)
      EXPECT_LT((data.obs.fine[d][t] - data.states.fine[d][t]).cwiseAbs().maxCoeff(), 1e-4);
  }
}

TEST(Generate, ZeroNoiseRejected) {
  EXPECT_THROW(SpdMatrix(Matrix::Zero(3, 3)), Error);
}

TEST(Generate, StatesBoundedByTransitionRange) {
  const RunConfig c = default_config(RandomSeed{5});
  const Dataset data = generate(make_model(c), c.noise, std::nullopt, c.seed);
  const double fine_bound = 1 + 5 * std::sqrt(0.2);
  for (int d = 0; d < 4; ++d) {
    const double coarse_bound = 1 + 5 * std::sqrt(c.noise.sigma_c[d](0, 0));
    EXPECT_LE(data.states.coarse[d].cwiseAbs().maxCoeff(), coarse_bound);
    for (int t = 0; t < 20; ++t) EXPECT_LE(data.states.fine[d][t].cwiseAbs().maxCoeff(), fine_bound);
  }
}

TEST(Generate, FineResidualCovarianceMatchesObservationNoise) {
  const Dataset data = default_dataset(8);
  Matrix s = Matrix::Zero(3, 3);
  int n = 0;
  for (int d = 0; d < 4; ++d)
    for (int t = 0; t < 20; ++t) {
      const Matrix r = data.obs.fine[d][t] - data.states.fine[d][t];
      s += r * r.transpose();
      n += static_cast<int>(r.cols());
    }
  s /= n;
  for (int i = 0; i < 3; ++i) EXPECT_NEAR(s(i, i) / 3e-4, 1.0, 0.15);
}

TEST(Generate, CoarseResidualCovarianceMatchesObservationNoise) {
  RunConfig c = default_config(RandomSeed{9});
  c.dims.T = 400;
  const Dataset data = generate(make_model(c), c.noise, std::nullopt, c.seed);
  for (int d = 0; d < 4; ++d) {
    const Matrix r = data.obs.coarse[d] - data.states.coarse[d];
    const Matrix s = r * r.transpose() / static_cast<double>(r.cols());
    for (int i = 0; i < 3; ++i) EXPECT_NEAR(s(i, i) / c.noise.sigma_V[d](i, i), 1.0, 0.15);
  }
}

TEST(Generate, ShorterHorizonIsAPrefix) {
  RunConfig c = default_config(RandomSeed{10});
  const Dataset full = generate(make_model(c), c.noise, std::nullopt, c.seed);
  c.dims.T = 10;
  const Dataset prefix = generate(make_model(c), c.noise, std::nullopt, c.seed);
  EXPECT_EQ(prefix.init, full.init);
  for (int d = 0; d < 4; ++d) {
    EXPECT_EQ(prefix.states.coarse[d], full.states.coarse[d].leftCols(10));
    EXPECT_EQ(prefix.obs.coarse[d], full.obs.coarse[d].leftCols(10));
    for (int t = 0; t < 10; ++t) {
      EXPECT_EQ(prefix.states.fine[d][t], full.states.fine[d][t]);
      EXPECT_EQ(prefix.obs.fine[d][t], full.obs.fine[d][t]);
    }
  }
}

TEST(Generate, ExplicitInitialStatesAreUsed) {
  const RunConfig c = default_config(RandomSeed{12});
  InitialStates init{std::vector<Vector>(4, Vector::Zero(3)), std::vector<Vector>(4, Vector::Zero(3))};
  const Dataset data = generate(make_model(c), c.noise, init, c.seed);
  EXPECT_EQ(data.init, init);
}

}  // namespace
}  // namespace mspgas
