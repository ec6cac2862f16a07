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

#include <optional>
#include <vector>

#include "mspgas/config.hpp"
#include "mspgas/model.hpp"
#include "mspgas/rng.hpp"

namespace mspgas {

/// States (or observations) at both scales.
///   fine[d][t]  nx x K, column k is the fine vector at fine step k of coarse step t
///   coarse[d]   mx x T, column t is the coarse vector at coarse step t
/// Indices are zero-based.
struct Trajectories {
  std::vector<std::vector<Matrix>> fine;
  std::vector<Matrix> coarse;

  static Trajectories zeros(const ModelDims& dims);

  friend bool operator==(const Trajectories&, const Trajectories&) = default;
};

void check_shape(const Trajectories& traj, const ModelDims& dims);

/// The fixed vectors the first fine and coarse transitions start from.
/// The fine chain of coarse step t starts from the last fine state of step t-1;
/// for t = 0 it starts from fine[d]. Coarse step 0 transitions out of coarse[d].
struct InitialStates {
  std::vector<Vector> fine;
  std::vector<Vector> coarse;

  friend bool operator==(const InitialStates&, const InitialStates&) = default;
};

struct Dataset {
  Model model;
  NoiseSpec true_noise;
  InitialStates init;
  Trajectories states;
  Trajectories obs;
  RandomSeed seed;

  const ModelDims& dims() const { return model.dims; }
};

/// Initial vectors drawn N(0, I).
InitialStates draw_initial_states(const ModelDims& dims, RandomSeed seed);

/// Forward simulation: for each coarse step t, the K fine steps of every
/// individual, then the coarse update from the completed fine trajectory, then
/// the emissions. Draws are consumed in t-major order, so a shorter T reproduces
/// a prefix of a longer run bit-exactly. When `init` is empty the initial
/// vectors come from draw_initial_states(seed).
Dataset generate(const Model& model, const NoiseSpec& noise,
                 const std::optional<InitialStates>& init, RandomSeed seed);

/// Simulation and inference settings used in the reference experiment:
/// D = 4, nx = mx = 3, T = K = 20, Sigma_f = 0.2 I, Sigma_v = 3e-4 I,
/// Sigma_c = {0.3, 0.5, 0.7, 0.2} I, Sigma_V = {3, 5, 7, 9} 1e-4 I,
/// IW priors with scale 0.1 I and dof nx + 1 (fine) / mx + D + 1 (coarse),
/// 800 particles, 10,000 iterations, 10% burn-in.
RunConfig default_config(RandomSeed seed = RandomSeed{1});

}  // namespace mspgas
