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

#pragma once

#include <cstdint>

#include "mspgas/config.hpp"
#include "mspgas/simulate.hpp"
#include "mspgas/stats.hpp"

namespace mspgas::testing {

/// Reference settings resized to D individuals; noise levels cycle through the
/// four reference values.
inline RunConfig sized_config(std::uint64_t seed, int D, int T, int K) {
  RunConfig c = default_config(RandomSeed{seed});
  const RunConfig ref = c;
  c.dims.D = D;
  c.dims.T = T;
  c.dims.K = K;
  c.noise.sigma_c.clear();
  c.noise.sigma_V.clear();
  for (int d = 0; d < D; ++d) {
    c.noise.sigma_c.push_back(ref.noise.sigma_c[d % 4]);
    c.noise.sigma_V.push_back(ref.noise.sigma_V[d % 4]);
  }
  c.priors.coarse.assign(D, IwParams{SpdMatrix::identity(3, 0.1), 3.0 + D + 1});
  return c;
}

inline Dataset small_dataset(std::uint64_t seed, int D = 2, int T = 3, int K = 4) {
  const RunConfig c = sized_config(seed, D, T, K);
  return generate(make_model(c), c.noise, std::nullopt, c.seed);
}

/// M M^T + shift I for a standard normal M.
inline Matrix random_spd(Eigen::Index dim, Rng& rng, double shift = 1.0) {
  Matrix m(dim, dim);
  for (Eigen::Index j = 0; j < dim; ++j)
    for (Eigen::Index i = 0; i < dim; ++i) m(i, j) = rng.normal();
  return m * m.transpose() + shift * Matrix::Identity(dim, dim);
}

inline Vector random_vector(Eigen::Index n, Rng& rng, double scale = 1.0) {
  Vector v(n);
  for (Eigen::Index i = 0; i < n; ++i) v(i) = scale * rng.normal();
  return v;
}

}  // namespace mspgas::testing
