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

#include "mspgas/simulate.hpp"

#include <fmt/format.h>

#include "mspgas/error.hpp"

namespace mspgas {

namespace {

constexpr std::uint64_t kInitStream = 0x1A1A0001;
constexpr std::uint64_t kGenerateStream = 0x1A1A0002;

}  // namespace

Trajectories Trajectories::zeros(const ModelDims& dims) {
  Trajectories out;
  out.fine.assign(dims.D, std::vector<Matrix>(dims.T, Matrix::Zero(dims.nx, dims.K)));
  out.coarse.assign(dims.D, Matrix::Zero(dims.mx, dims.T));
  return out;
}

void check_shape(const Trajectories& traj, const ModelDims& dims) {
  bool ok = static_cast<int>(traj.fine.size()) == dims.D &&
            static_cast<int>(traj.coarse.size()) == dims.D;
  for (int d = 0; ok && d < dims.D; ++d) {
    ok = static_cast<int>(traj.fine[d].size()) == dims.T && traj.coarse[d].rows() == dims.mx &&
         traj.coarse[d].cols() == dims.T;
    for (int t = 0; ok && t < dims.T; ++t) {
      ok = traj.fine[d][t].rows() == dims.nx && traj.fine[d][t].cols() == dims.K;
    }
  }
  if (!ok) {
    throw Error(ErrorCode::DimensionMismatch,
                fmt::format("trajectory shape does not match D={} T={} K={} nx={} mx={}", dims.D,
                            dims.T, dims.K, dims.nx, dims.mx));
  }
}

InitialStates draw_initial_states(const ModelDims& dims, RandomSeed seed) {
  Rng rng = Rng::derive(seed, {kInitStream});
  InitialStates init;
  for (int d = 0; d < dims.D; ++d) {
    Vector x(dims.nx);
    for (auto& v : x) v = rng.normal();
    Vector X(dims.mx);
    for (auto& v : X) v = rng.normal();
    init.fine.push_back(std::move(x));
    init.coarse.push_back(std::move(X));
  }
  return init;
}

Dataset generate(const Model& model, const NoiseSpec& noise,
                 const std::optional<InitialStates>& init, RandomSeed seed) {
  validate(model);
  const ModelDims& dims = model.dims;
  validate(dims, noise);

  Dataset data{model, noise, init ? *init : draw_initial_states(dims, seed),
               Trajectories::zeros(dims), Trajectories::zeros(dims), seed};
  if (static_cast<int>(data.init.fine.size()) != dims.D ||
      static_cast<int>(data.init.coarse.size()) != dims.D) {
    throw Error(ErrorCode::DimensionMismatch, "initial states need one vector per individual");
  }
  for (int d = 0; d < dims.D; ++d) {
    if (data.init.fine[d].size() != dims.nx || data.init.coarse[d].size() != dims.mx) {
      throw Error(ErrorCode::DimensionMismatch, fmt::format("initial state {} has wrong size", d));
    }
  }

  Rng rng = Rng::derive(seed, {kGenerateStream});
  Matrix coarse_prev(dims.D, dims.mx);
  for (int d = 0; d < dims.D; ++d) coarse_prev.row(d) = data.init.coarse[d].transpose();
  std::vector<Vector> fine_prev = data.init.fine;

  for (int t = 0; t < dims.T; ++t) {
    Matrix coarse_next(dims.D, dims.mx);
    for (int d = 0; d < dims.D; ++d) {
      const Vector coarse_d = coarse_prev.row(d).transpose();
      Matrix& fine = data.states.fine[d][t];
      Vector x = fine_prev[d];
      for (int k = 0; k < dims.K; ++k) {
        x = mvn_sample(transition_fine(x, coarse_d, model.coupling, model.kind), noise.sigma_f, rng);
        fine.col(k) = x;
        data.obs.fine[d][t].col(k) = mvn_sample(x, noise.sigma_v, rng);
      }
      fine_prev[d] = x;
      const Vector X = mvn_sample(transition_coarse(coarse_prev, fine, model.coupling, d, model.kind),
                                  noise.sigma_c[d], rng);
      coarse_next.row(d) = X.transpose();
      data.states.coarse[d].col(t) = X;
      data.obs.coarse[d].col(t) = mvn_sample(X, noise.sigma_V[d], rng);
    }
    coarse_prev = coarse_next;
  }
  return data;
}

RunConfig default_config(RandomSeed seed) {
  ModelDims dims{4, 20, 20, 3, 3};
  const int p = dims.nx;
  std::vector<SpdMatrix> sigma_c;
  std::vector<SpdMatrix> sigma_V;
  for (double s : {0.3, 0.5, 0.7, 0.2}) sigma_c.push_back(SpdMatrix::identity(p, s));
  for (double s : {3e-4, 5e-4, 7e-4, 9e-4}) sigma_V.push_back(SpdMatrix::identity(p, s));
  NoiseSpec noise{SpdMatrix::identity(p, 0.2), std::move(sigma_c), SpdMatrix::identity(p, 3e-4),
                  std::move(sigma_V)};
  Priors priors{IwParams{SpdMatrix::identity(dims.nx, 0.1), static_cast<double>(dims.nx + 1)}, {}};
  for (int d = 0; d < dims.D; ++d) {
    priors.coarse.push_back(
        IwParams{SpdMatrix::identity(dims.mx, 0.1), static_cast<double>(dims.mx + dims.D + 1)});
  }
  ChainConfig chain;
  chain.seed = seed;
  return RunConfig{dims,  CouplingSource::Random, std::nullopt, std::nullopt, std::nullopt,
                   TransitionKind::paper(), std::move(noise), std::move(priors), chain, seed};
}

}  // namespace mspgas
