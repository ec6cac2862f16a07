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

#include <vector>

#include "mspgas/model.hpp"
#include "mspgas/simulate.hpp"
#include "mspgas/stats.hpp"

namespace mspgas {

/// The retained state path that conditions a CSMC sweep.
using ReferenceTrajectory = Trajectories;

/// Particles of one sequential run, stored stage by stage.
///
/// states[s].col(i) is particle i at stage s and ancestors[s][i] is its parent
/// at stage s - 1 (ancestors[0] is empty). The trajectory of particle i is the
/// lineage traced back through `ancestors`, so no trajectory is copied. In a
/// conditional run the last slot (index N - 1) carries the reference.
struct ParticleSystem {
  std::vector<Matrix> states;
  std::vector<std::vector<int>> ancestors;
  Vector log_weights;  // unnormalized, current stage
  Vector weights;      // normalized, current stage

  int size() const { return static_cast<int>(weights.size()); }
  int stages() const { return static_cast<int>(states.size()); }

  /// dim x stages path of particle i.
  Matrix path(int i) const;

  /// sum_s w[s] * path(i).col(s) for every particle i, as the columns of a matrix.
  Matrix weighted_path_sums(const Vector& w) const;
};

struct KernelOptions {
  int particles = 800;
  ResamplingScheme resampling = ResamplingScheme::Multinomial;
};

/// Conditioning of one fine block (individual d, coarse step t).
struct FineBlock {
  Vector start;        // fine state preceding the block
  Vector coarse_prev;  // coarse state of the previous coarse step
  const Matrix& obs;   // nx x K observations
  const Matrix* reference = nullptr;  // nx x K; null for an unconditional pass
};

/// Conditioning of one coarse step of individual d.
///
/// The coupled argument for a particle whose own previous coarse state is c is
/// self_coupling * c + coupled_others, i.e. row d of B X_all with the other
/// individuals' rows frozen.
struct CoarseStep {
  double self_coupling = 0.0;
  Vector coupled_others;
  Matrix fine_averages;  // mx x N, weighted average of fine particle i's block path
  Vector obs;
  const Vector* reference = nullptr;  // null for an unconditional pass
};

/// Pr(J = i) proportional to weights[i] * exp(log_trans[i]), computed in log space.
Vector ancestor_probabilities(const Vector& weights, const Vector& log_trans);

/// Stage 0 of a fine block: N-1 draws from the transition out of block.start
/// (all N when unconditional), the reference in the last slot, weights from
/// the first observation.
ParticleSystem init_fine(const FineBlock& block, const Model& model, const SpdMatrix& sigma_f,
                         const SpdMatrix& sigma_v, int particles, Rng& rng);

/// Stages 1..K-1 of a fine block: resample, ancestor-sample the reference,
/// propagate, pin the reference, reweight by the emission likelihood.
void fine_csmc_sweep(ParticleSystem& system, const FineBlock& block, const Model& model,
                     const SpdMatrix& sigma_f, const SpdMatrix& sigma_v,
                     ResamplingScheme resampling, Rng& rng);

/// First coarse stage. `coarse_init` is the coarse state the first transition leaves from.
ParticleSystem init_coarse(const CoarseStep& step, const Vector& coarse_init, const Model& model,
                           const SpdMatrix& sigma_c_d, const SpdMatrix& sigma_V_d, Rng& rng);

/// One further coarse stage, the coarse mirror of a fine step. Candidate i in
/// the ancestor draw is paired with fine particle i of the current block.
void coarse_csmc_step(ParticleSystem& system, const CoarseStep& step, const Model& model,
                      const SpdMatrix& sigma_c_d, const SpdMatrix& sigma_V_d,
                      ResamplingScheme resampling, Rng& rng);

/// Weight-degeneracy summary of one kernel call (ESS as a fraction of N).
struct KernelStats {
  double min_fine_ess = 1.0;
  double min_coarse_ess = 1.0;
};

/// One PGAS kernel application: a fresh state trajectory given the current
/// covariances and the reference. Each individual runs on its own sub-stream
/// split from `rng`, so the result does not depend on the order in which
/// individuals are processed.
ReferenceTrajectory pgas_kernel(const Dataset& data, const SpdMatrix& sigma_f,
                                const std::vector<SpdMatrix>& sigma_c,
                                const ReferenceTrajectory& ref, const KernelOptions& options,
                                Rng& rng, KernelStats* stats = nullptr);

/// Unconditional bootstrap filter with the same structure, used to build the
/// first reference. Other individuals' coarse states are taken from their
/// coarse observations since no reference exists yet.
ReferenceTrajectory bootstrap_pass(const Dataset& data, const SpdMatrix& sigma_f,
                                   const std::vector<SpdMatrix>& sigma_c,
                                   const KernelOptions& options, Rng& rng,
                                   KernelStats* stats = nullptr);

}  // namespace mspgas
