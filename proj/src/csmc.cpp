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

#include "mspgas/csmc.hpp"

#include <algorithm>

#include <fmt/format.h>

#include "mspgas/error.hpp"

namespace mspgas {

namespace {

// Draws one N(0, I) matrix of the given shape, column by column.
Matrix standard_normal(Eigen::Index rows, Eigen::Index cols, Rng& rng) {
  Matrix z(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j)
    for (Eigen::Index i = 0; i < rows; ++i) z(i, j) = rng.normal();
  return z;
}

// means + L z for every column.
Matrix sample_columns(const Matrix& means, const SpdMatrix& cov, Rng& rng) {
  return means + cov.chol().triangularView<Eigen::Lower>() *
                     standard_normal(means.rows(), means.cols(), rng);
}

void reweight(ParticleSystem& system, const Vector& obs, const SpdMatrix& obs_cov) {
  system.log_weights = mvn_logpdf_columns(system.states.back(), obs, obs_cov);
  system.weights = normalize_log_weights(system.log_weights);
}

Matrix coarse_means(const CoarseStep& step, const Matrix& own_prev, const Model& model) {
  const Eigen::Index n = step.fine_averages.cols();
  Matrix means(step.fine_averages.rows(), n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const Vector coupled = step.self_coupling * own_prev.col(own_prev.cols() == 1 ? 0 : i) +
                           step.coupled_others;
    means.col(i) = coarse_mean_from_parts(coupled, step.fine_averages.col(i), model.kind);
  }
  return means;
}

double ess_fraction(const Vector& w) { return effective_sample_size(w) / static_cast<double>(w.size()); }

}  // namespace

Matrix ParticleSystem::path(int i) const {
  if (i < 0 || i >= size()) throw Error(ErrorCode::IndexOutOfRange, fmt::format("particle {}", i));
  Matrix out(states.front().rows(), stages());
  int idx = i;
  for (int s = stages() - 1; s >= 0; --s) {
    out.col(s) = states[s].col(idx);
    if (s > 0) idx = ancestors[s][idx];
  }
  return out;
}

Matrix ParticleSystem::weighted_path_sums(const Vector& w) const {
  if (w.size() != stages()) throw Error(ErrorCode::DimensionMismatch, "one weight per stage required");
  const int n = size();
  Matrix acc = Matrix::Zero(states.front().rows(), n);
  std::vector<int> idx(n);
  for (int i = 0; i < n; ++i) idx[i] = i;
  for (int s = stages() - 1; s >= 0; --s) {
    for (int i = 0; i < n; ++i) {
      acc.col(i) += w(s) * states[s].col(idx[i]);
      if (s > 0) idx[i] = ancestors[s][idx[i]];
    }
  }
  return acc;
}

Vector ancestor_probabilities(const Vector& weights, const Vector& log_trans) {
  if (weights.size() != log_trans.size()) {
    throw Error(ErrorCode::DimensionMismatch, "ancestor weights and densities disagree in length");
  }
  return normalize_log_weights(weights.array().log().matrix() + log_trans);
}

ParticleSystem init_fine(const FineBlock& block, const Model& model, const SpdMatrix& sigma_f,
                         const SpdMatrix& sigma_v, int particles, Rng& rng) {
  if (particles < 1) throw Error(ErrorCode::InvalidArgument, "at least one particle is required");
  const bool conditional = block.reference != nullptr;
  const int free = conditional ? particles - 1 : particles;
  const Vector mean = transition_fine(block.start, block.coarse_prev, model.coupling, model.kind);

  ParticleSystem system;
  Matrix stage(mean.size(), particles);
  stage.leftCols(free) = sample_columns(mean.replicate(1, free), sigma_f, rng);
  if (conditional) stage.col(particles - 1) = block.reference->col(0);
  system.states.push_back(std::move(stage));
  system.ancestors.emplace_back();
  reweight(system, block.obs.col(0), sigma_v);
  return system;
}

void fine_csmc_sweep(ParticleSystem& system, const FineBlock& block, const Model& model,
                     const SpdMatrix& sigma_f, const SpdMatrix& sigma_v,
                     ResamplingScheme resampling, Rng& rng) {
  const int n = system.size();
  const bool conditional = block.reference != nullptr;
  const int free = conditional ? n - 1 : n;
  const Eigen::Index K = block.obs.cols();

  for (Eigen::Index k = system.stages(); k < K; ++k) {
    const Matrix& prev = system.states.back();
    std::vector<int> anc = resample(system.weights, static_cast<std::size_t>(free), resampling, rng);
    const Matrix prev_means = transition_fine_columns(prev, block.coarse_prev, model.coupling, model.kind);

    if (conditional) {
      const Vector x_ref = block.reference->col(k);
      const Vector log_trans = mvn_logpdf_columns(prev_means, x_ref, sigma_f);
      const Vector probs = ancestor_probabilities(system.weights, log_trans);
      anc.push_back(static_cast<int>(categorical_sample(probs, rng)));
    }

    Matrix means(prev_means.rows(), free);
    for (int i = 0; i < free; ++i) means.col(i) = prev_means.col(anc[i]);
    Matrix stage(prev.rows(), n);
    stage.leftCols(free) = sample_columns(means, sigma_f, rng);
    if (conditional) stage.col(n - 1) = block.reference->col(k);

    system.states.push_back(std::move(stage));
    system.ancestors.push_back(std::move(anc));
    reweight(system, block.obs.col(k), sigma_v);
  }
}

ParticleSystem init_coarse(const CoarseStep& step, const Vector& coarse_init, const Model& model,
                           const SpdMatrix& sigma_c_d, const SpdMatrix& sigma_V_d, Rng& rng) {
  const int n = static_cast<int>(step.fine_averages.cols());
  if (n < 1) throw Error(ErrorCode::InvalidArgument, "at least one particle is required");
  const bool conditional = step.reference != nullptr;
  const int free = conditional ? n - 1 : n;

  const Matrix means = coarse_means(step, coarse_init, model);
  ParticleSystem system;
  Matrix stage(means.rows(), n);
  stage.leftCols(free) = sample_columns(means.leftCols(free), sigma_c_d, rng);
  if (conditional) stage.col(n - 1) = *step.reference;
  system.states.push_back(std::move(stage));
  system.ancestors.emplace_back();
  reweight(system, step.obs, sigma_V_d);
  return system;
}

void coarse_csmc_step(ParticleSystem& system, const CoarseStep& step, const Model& model,
                      const SpdMatrix& sigma_c_d, const SpdMatrix& sigma_V_d,
                      ResamplingScheme resampling, Rng& rng) {
  const int n = system.size();
  if (step.fine_averages.cols() != n) {
    throw Error(ErrorCode::DimensionMismatch, "one fine average per coarse particle required");
  }
  const bool conditional = step.reference != nullptr;
  const int free = conditional ? n - 1 : n;
  const Matrix& prev = system.states.back();

  std::vector<int> anc = resample(system.weights, static_cast<std::size_t>(free), resampling, rng);
  if (conditional) {
    // Candidate i: its own previous coarse state with fine particle i of this block.
    const Vector log_trans =
        mvn_logpdf_columns(coarse_means(step, prev, model), *step.reference, sigma_c_d);
    const Vector probs = ancestor_probabilities(system.weights, log_trans);
    anc.push_back(static_cast<int>(categorical_sample(probs, rng)));
  }

  Matrix own_prev(prev.rows(), n);
  for (int i = 0; i < n; ++i) own_prev.col(i) = prev.col(anc[i]);
  const Matrix means = coarse_means(step, own_prev, model);
  Matrix stage(prev.rows(), n);
  stage.leftCols(free) = sample_columns(means.leftCols(free), sigma_c_d, rng);
  if (conditional) stage.col(n - 1) = *step.reference;

  system.states.push_back(std::move(stage));
  system.ancestors.push_back(std::move(anc));
  reweight(system, step.obs, sigma_V_d);
}

namespace {

// Shared driver of the conditional kernel and the unconditional first pass.
ReferenceTrajectory run_kernel(const Dataset& data, const SpdMatrix& sigma_f,
                               const std::vector<SpdMatrix>& sigma_c,
                               const ReferenceTrajectory* ref, const KernelOptions& options,
                               Rng& rng, KernelStats* stats) {
  const Model& model = data.model;
  const ModelDims& dims = model.dims;
  const NoiseSpec& noise = data.true_noise;
  if (options.particles < 1) throw Error(ErrorCode::InvalidArgument, "at least one particle is required");
  if (static_cast<int>(sigma_c.size()) != dims.D) {
    throw Error(ErrorCode::DimensionMismatch, "one coarse covariance per individual required");
  }
  if (ref) check_shape(*ref, dims);

  // Coarse state of individual d' at coarse step t - 1 as seen by the others.
  auto frozen_coarse = [&](int dp, int t) -> Vector {
    if (t == 0) return data.init.coarse[dp];
    return ref ? Vector(ref->coarse[dp].col(t - 1)) : Vector(data.obs.coarse[dp].col(t - 1));
  };

  std::vector<Rng> streams;
  streams.reserve(dims.D);
  for (int d = 0; d < dims.D; ++d) streams.push_back(rng.split(static_cast<std::uint64_t>(d)));

  ReferenceTrajectory out = Trajectories::zeros(dims);
  KernelStats local;
  for (int d = 0; d < dims.D; ++d) {
    Rng& r = streams[d];
    Vector x_start = data.init.fine[d];
    ParticleSystem coarse;
    for (int t = 0; t < dims.T; ++t) {
      FineBlock block{x_start, frozen_coarse(d, t), data.obs.fine[d][t],
                      ref ? &ref->fine[d][t] : nullptr};
      ParticleSystem fine = init_fine(block, model, sigma_f, noise.sigma_v, options.particles, r);
      fine_csmc_sweep(fine, block, model, sigma_f, noise.sigma_v, options.resampling, r);
      local.min_fine_ess = std::min(local.min_fine_ess, ess_fraction(fine.weights));

      const int jf = static_cast<int>(categorical_sample(fine.weights, r));
      out.fine[d][t] = fine.path(jf);
      x_start = out.fine[d][t].col(dims.K - 1);

      CoarseStep step;
      step.self_coupling = model.coupling.B(d, d);
      step.coupled_others = Vector::Zero(dims.mx);
      for (int dp = 0; dp < dims.D; ++dp) {
        if (dp != d) step.coupled_others += model.coupling.B(d, dp) * frozen_coarse(dp, t);
      }
      step.fine_averages = fine.weighted_path_sums(model.coupling.w) / model.coupling.w.sum();
      step.obs = data.obs.coarse[d].col(t);
      const Vector ref_coarse = ref ? Vector(ref->coarse[d].col(t)) : Vector();
      step.reference = ref ? &ref_coarse : nullptr;

      if (t == 0) {
        coarse = init_coarse(step, data.init.coarse[d], model, sigma_c[d], noise.sigma_V[d], r);
      } else {
        coarse_csmc_step(coarse, step, model, sigma_c[d], noise.sigma_V[d], options.resampling, r);
      }
      local.min_coarse_ess = std::min(local.min_coarse_ess, ess_fraction(coarse.weights));
    }
    const int jc = static_cast<int>(categorical_sample(coarse.weights, r));
    out.coarse[d] = coarse.path(jc);
  }
  if (stats) *stats = local;
  return out;
}

}  // namespace

ReferenceTrajectory pgas_kernel(const Dataset& data, const SpdMatrix& sigma_f,
                                const std::vector<SpdMatrix>& sigma_c,
                                const ReferenceTrajectory& ref, const KernelOptions& options,
                                Rng& rng, KernelStats* stats) {
  return run_kernel(data, sigma_f, sigma_c, &ref, options, rng, stats);
}

ReferenceTrajectory bootstrap_pass(const Dataset& data, const SpdMatrix& sigma_f,
                                   const std::vector<SpdMatrix>& sigma_c,
                                   const KernelOptions& options, Rng& rng, KernelStats* stats) {
  return run_kernel(data, sigma_f, sigma_c, nullptr, options, rng, stats);
}

}  // namespace mspgas
