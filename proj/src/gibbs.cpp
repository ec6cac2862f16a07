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

#include "mspgas/gibbs.hpp"

#include <cmath>

#include <fmt/format.h>

#include "mspgas/error.hpp"

namespace mspgas {

namespace {

constexpr std::uint64_t kPriorStream = 0x61BB5001;
constexpr std::uint64_t kBootstrapStream = 0x61BB5002;
constexpr std::uint64_t kKernelStream = 0x61BB5003;
constexpr std::uint64_t kCovarianceStream = 0x61BB5004;

}  // namespace

SufficientStats fine_suffstats(const Trajectories& states, const InitialStates& init,
                               const Model& model) {
  const ModelDims& dims = model.dims;
  check_shape(states, dims);
  SufficientStats stats = SufficientStats::empty(dims.nx);
  for (int d = 0; d < dims.D; ++d) {
    Vector x_prev = init.fine[d];
    for (int t = 0; t < dims.T; ++t) {
      const Vector coarse_prev = t == 0 ? init.coarse[d] : Vector(states.coarse[d].col(t - 1));
      const Matrix& block = states.fine[d][t];
      Matrix prev(dims.nx, dims.K);
      prev.col(0) = x_prev;
      prev.rightCols(dims.K - 1) = block.leftCols(dims.K - 1);
      const Matrix resid =
          block - transition_fine_columns(prev, coarse_prev, model.coupling, model.kind);
      stats.S.noalias() += resid * resid.transpose();
      stats.count += dims.K;
      x_prev = block.col(dims.K - 1);
    }
  }
  return stats;
}

SufficientStats coarse_suffstats(const Trajectories& states, const InitialStates& init,
                                 const Model& model, int d) {
  const ModelDims& dims = model.dims;
  check_shape(states, dims);
  if (d < 0 || d >= dims.D) throw Error(ErrorCode::IndexOutOfRange, fmt::format("individual {}", d));
  SufficientStats stats = SufficientStats::empty(dims.mx);
  Matrix all_prev(dims.D, dims.mx);
  for (int dp = 0; dp < dims.D; ++dp) all_prev.row(dp) = init.coarse[dp].transpose();
  for (int t = 0; t < dims.T; ++t) {
    const Vector mean = transition_coarse(all_prev, states.fine[d][t], model.coupling, d, model.kind);
    stats.add(states.coarse[d].col(t) - mean);
    for (int dp = 0; dp < dims.D; ++dp) all_prev.row(dp) = states.coarse[dp].col(t).transpose();
  }
  return stats;
}

IwParams iw_posterior(const IwParams& prior, const SufficientStats& stats) {
  if (stats.S.rows() != prior.scale.dim() || stats.S.cols() != prior.scale.dim()) {
    throw Error(ErrorCode::DimensionMismatch, "statistics and prior scale disagree in dimension");
  }
  if (stats.count == 0) return prior;
  Matrix scale = prior.scale.matrix() + stats.S;
  scale = 0.5 * (scale + scale.transpose());
  return IwParams{SpdMatrix(std::move(scale)), prior.dof + static_cast<double>(stats.count)};
}

SufficientStats with_dof_mode(SufficientStats stats, DofMode mode, long literal_increment) {
  if (mode == DofMode::StrictPaper) stats.count = literal_increment;
  return stats;
}

CovariancePosteriors covariance_posteriors(const Trajectories& states, const InitialStates& init,
                                           const Model& model, const Priors& priors, DofMode mode) {
  const ModelDims& dims = model.dims;
  const SufficientStats fine = with_dof_mode(fine_suffstats(states, init, model), mode, dims.K);
  CovariancePosteriors post{iw_posterior(priors.fine, fine), {}};
  post.coarse.reserve(dims.D);
  for (int d = 0; d < dims.D; ++d) {
    const SufficientStats coarse =
        with_dof_mode(coarse_suffstats(states, init, model, d), mode, dims.T);
    post.coarse.push_back(iw_posterior(priors.coarse[d], coarse));
  }
  return post;
}

CovarianceDraw sample_covariances(const CovariancePosteriors& posteriors, Rng& rng) {
  CovarianceDraw draw{inv_wishart_sample(posteriors.fine, rng), {}};
  draw.sigma_c.reserve(posteriors.coarse.size());
  for (const auto& p : posteriors.coarse) draw.sigma_c.push_back(inv_wishart_sample(p, rng));
  return draw;
}

CovarianceDraw sample_covariances(const Trajectories& states, const InitialStates& init,
                                  const Model& model, const Priors& priors, DofMode mode, Rng& rng) {
  return sample_covariances(covariance_posteriors(states, init, model, priors, mode), rng);
}

int Chain::burn_in_iterations() const {
  return static_cast<int>(std::floor(config.burn_in * static_cast<double>(iterations())));
}

Chain run_chain(const Dataset& data, const Priors& priors, const ChainConfig& config,
                const ProgressFn& progress) {
  const ModelDims& dims = data.dims();
  if (config.particles < 1) throw Error(ErrorCode::InvalidArgument, "particles must be >= 1");
  if (config.iterations < 1) throw Error(ErrorCode::InvalidArgument, "iterations must be >= 1");
  if (config.thin < 1) throw Error(ErrorCode::InvalidArgument, "thin must be >= 1");
  if (!(config.burn_in >= 0.0 && config.burn_in < 1.0)) {
    throw Error(ErrorCode::InvalidArgument, "burn_in must be in [0, 1)");
  }
  if (static_cast<int>(priors.coarse.size()) != dims.D) {
    throw Error(ErrorCode::DimensionMismatch, "one coarse prior per individual required");
  }

  const KernelOptions options{config.particles, config.resampling};
  Rng prior_rng = Rng::derive(config.seed, {kPriorStream});
  SpdMatrix sigma_f = inv_wishart_sample(priors.fine, prior_rng);
  std::vector<SpdMatrix> sigma_c;
  for (int d = 0; d < dims.D; ++d) sigma_c.push_back(inv_wishart_sample(priors.coarse[d], prior_rng));

  Chain chain{config, {}, {}, {}, {}, {}};
  chain.sigma_f_draws.reserve(config.iterations);
  chain.sigma_c_draws.reserve(config.iterations);

  int r = -1;
  try {
    Rng boot_rng = Rng::derive(config.seed, {kBootstrapStream});
    chain.initial_reference = bootstrap_pass(data, sigma_f, sigma_c, options, boot_rng);
    Trajectories ref = chain.initial_reference;
    for (r = 0; r < config.iterations; ++r) {
      IterationReport report{r, {}};
      Rng kernel_rng = Rng::derive(config.seed, {kKernelStream, static_cast<std::uint64_t>(r)});
      ref = pgas_kernel(data, sigma_f, sigma_c, ref, options, kernel_rng, &report.kernel);

      Rng cov_rng = Rng::derive(config.seed, {kCovarianceStream, static_cast<std::uint64_t>(r)});
      CovarianceDraw draw =
          sample_covariances(ref, data.init, data.model, priors, config.dof_mode, cov_rng);
      sigma_f = draw.sigma_f;
      sigma_c = draw.sigma_c;

      chain.sigma_f_draws.push_back(std::move(draw.sigma_f));
      chain.sigma_c_draws.push_back(std::move(draw.sigma_c));
      if (r % config.thin == 0) {
        chain.state_iterations.push_back(r);
        chain.state_refs.push_back(ref);
      }
      if (progress) progress(report);
    }
  } catch (const Error& e) {
    if (!e.numerical()) throw;
    throw Error(e.code(), r < 0 ? fmt::format("initial bootstrap pass: {}", e.message())
                                : fmt::format("iteration {}: {}", r, e.message()));
  }
  return chain;
}

}  // namespace mspgas
