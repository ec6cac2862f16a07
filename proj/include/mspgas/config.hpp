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
#include <string>
#include <vector>

#include "mspgas/model.hpp"
#include "mspgas/rng.hpp"
#include "mspgas/stats.hpp"

namespace mspgas {

/// Inverse-Wishart priors for the fine covariance and each individual's coarse covariance.
struct Priors {
  IwParams fine;
  std::vector<IwParams> coarse;
};

/// How the inverse-Wishart dof grows with data.
///   FullCount:   dof += number of residuals accumulated (the conjugate update).
///   StrictPaper: dof += K for the fine covariance and T for the coarse ones.
enum class DofMode { FullCount, StrictPaper };

struct ChainConfig {
  int particles = 800;
  int iterations = 10000;
  double burn_in = 0.1;
  int thin = 10;
  ResamplingScheme resampling = ResamplingScheme::Multinomial;
  DofMode dof_mode = DofMode::FullCount;
  RandomSeed seed{1};

  friend bool operator==(const ChainConfig&, const ChainConfig&) = default;
};

enum class CouplingSource { Random, Explicit };

/// Everything needed to regenerate a dataset and a chain. Coupling matrices are
/// either drawn from the seed or given explicitly; the fine-step weights are
/// uniform unless listed.
struct RunConfig {
  ModelDims dims;
  CouplingSource coupling_source = CouplingSource::Random;
  std::optional<Matrix> A;
  std::optional<Matrix> B;
  std::optional<Vector> w;
  TransitionKind kind;
  NoiseSpec noise;
  Priors priors;
  ChainConfig chain;
  RandomSeed seed{1};
};

/// A (nx x nx) and B (D x D) with entries iid uniform(-0.5, 0.5) from a
/// sub-stream of `seed`; uniform w.
CouplingSpec random_coupling(const ModelDims& dims, RandomSeed seed);

/// The coupling a config describes (random draws or explicit matrices).
CouplingSpec materialize_coupling(const RunConfig& config);

/// Model assembled from the config; validated.
Model make_model(const RunConfig& config);

/// Checks ranges and shapes of every field. Throws ConfigError.
void validate(const RunConfig& config);

const char* to_string(ResamplingScheme scheme);
const char* to_string(DofMode mode);
const char* to_string(TransitionFamily family);

}  // namespace mspgas
