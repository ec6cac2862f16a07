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

#include <functional>
#include <vector>

#include "mspgas/config.hpp"
#include "mspgas/csmc.hpp"
#include "mspgas/simulate.hpp"

namespace mspgas {

/// Sum of outer products of transition residuals and how many were summed.
struct SufficientStats {
  Matrix S;
  long count = 0;

  static SufficientStats empty(Eigen::Index dim) { return {Matrix::Zero(dim, dim), 0}; }

  void add(const Vector& residual) {
    S.noalias() += residual * residual.transpose();
    ++count;
  }

  SufficientStats& operator+=(const SufficientStats& other) {
    S += other.S;
    count += other.count;
    return *this;
  }
};

/// Residuals x - f(x_prev, X_prev) over every fine transition of every
/// individual: D * T * K of them, including the first step of each coarse step
/// (which leaves from the last fine state of the previous one).
SufficientStats fine_suffstats(const Trajectories& states, const InitialStates& init,
                               const Model& model);

/// Residuals X_t - g(X_all_{t-1}, x^t) of individual d over all T coarse steps.
SufficientStats coarse_suffstats(const Trajectories& states, const InitialStates& init,
                                 const Model& model, int d);

/// Conjugate update: scale + S, dof + count.
IwParams iw_posterior(const IwParams& prior, const SufficientStats& stats);

/// Stats whose count is replaced by the increment the dof mode prescribes
/// (`literal_increment` is K for the fine covariance, T for the coarse ones).
SufficientStats with_dof_mode(SufficientStats stats, DofMode mode, long literal_increment);

/// IW posteriors of Sigma_f and each Sigma_c,d given fixed states.
struct CovariancePosteriors {
  IwParams fine;
  std::vector<IwParams> coarse;
};

CovariancePosteriors covariance_posteriors(const Trajectories& states, const InitialStates& init,
                                           const Model& model, const Priors& priors, DofMode mode);

struct CovarianceDraw {
  SpdMatrix sigma_f;
  std::vector<SpdMatrix> sigma_c;
};

CovarianceDraw sample_covariances(const CovariancePosteriors& posteriors, Rng& rng);

/// The two covariance conditionals of one Gibbs iteration given fixed states.
CovarianceDraw sample_covariances(const Trajectories& states, const InitialStates& init,
                                  const Model& model, const Priors& priors, DofMode mode, Rng& rng);

/// Draws of one chain. Covariances are stored every iteration; state
/// trajectories every `config.thin` iterations (iteration indices in
/// state_iterations).
struct Chain {
  ChainConfig config;
  std::vector<SpdMatrix> sigma_f_draws;
  std::vector<std::vector<SpdMatrix>> sigma_c_draws;
  std::vector<int> state_iterations;
  std::vector<Trajectories> state_refs;
  Trajectories initial_reference;

  int iterations() const { return static_cast<int>(sigma_f_draws.size()); }

  /// First retained iteration: floor(burn_in * iterations).
  int burn_in_iterations() const;

  friend bool operator==(const Chain&, const Chain&) = default;
};

struct IterationReport {
  int iteration = 0;
  KernelStats kernel;
};

using ProgressFn = std::function<void(const IterationReport&)>;

/// Initializes the covariances from their priors and the states from one
/// unconditional bootstrap pass, then alternates pgas_kernel with the
/// conjugate covariance draws for config.iterations iterations.
Chain run_chain(const Dataset& data, const Priors& priors, const ChainConfig& config,
                const ProgressFn& progress = {});

}  // namespace mspgas
