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

#include "mspgas/validation/oracles.hpp"

#include <cmath>
#include <limits>

#include <fmt/format.h>

#include "mspgas/csmc.hpp"
#include "mspgas/diagnostics.hpp"
#include "mspgas/error.hpp"
#include "mspgas/gibbs.hpp"
#include "mspgas/simulate.hpp"

namespace mspgas::validation {

GaussianMarginals rts_smoother(const LinearGaussianProblem& p) {
  const std::size_t K = p.obs.size();
  const Eigen::Index n = p.start.size();
  const Matrix I = Matrix::Identity(n, n);
  std::vector<Vector> m_pred(K), m_filt(K);
  std::vector<Matrix> P_pred(K), P_filt(K);

  Vector m = p.start;
  Matrix P = Matrix::Zero(n, n);
  for (std::size_t k = 0; k < K; ++k) {
    m_pred[k] = p.F * m + p.offset;
    P_pred[k] = p.F * P * p.F.transpose() + p.Q;
    const Matrix S = P_pred[k] + p.R;
    const Matrix gain = P_pred[k] * S.inverse();
    m_filt[k] = m_pred[k] + gain * (p.obs[k] - m_pred[k]);
    P_filt[k] = (I - gain) * P_pred[k];
    m = m_filt[k];
    P = P_filt[k];
  }

  GaussianMarginals out{std::vector<Vector>(K), std::vector<Matrix>(K)};
  out.means[K - 1] = m_filt[K - 1];
  out.covs[K - 1] = P_filt[K - 1];
  for (std::size_t k = K - 1; k-- > 0;) {
    const Matrix G = P_filt[k] * p.F.transpose() * P_pred[k + 1].inverse();
    out.means[k] = m_filt[k] + G * (out.means[k + 1] - m_pred[k + 1]);
    out.covs[k] = P_filt[k] + G * (out.covs[k + 1] - P_pred[k + 1]) * G.transpose();
  }
  return out;
}

KalmanResult kalman_equivalence(const KalmanSettings& s) {
  const ModelDims dims{1, 1, s.K, s.dim, s.dim};
  const CouplingSpec random = random_coupling(dims, s.seed);
  CouplingSpec coupling{Matrix::Zero(s.dim, s.dim), Matrix::Constant(1, 1, 0.3), random.w};
  const Model model{dims, coupling, TransitionKind::linear(random.A, Matrix::Identity(s.dim, s.dim))};
  NoiseSpec noise{SpdMatrix::identity(s.dim, s.process_var),
                  {SpdMatrix::identity(s.dim, 0.3)},
                  SpdMatrix::identity(s.dim, s.obs_var),
                  {SpdMatrix::identity(s.dim, 0.1)}};
  const Dataset data = generate(model, noise, std::nullopt, s.seed);

  LinearGaussianProblem problem{model.kind.F_fine, data.init.coarse[0], data.init.fine[0],
                                noise.sigma_f.matrix(), noise.sigma_v.matrix(), {}};
  for (int k = 0; k < s.K; ++k) problem.obs.push_back(data.obs.fine[0][0].col(k));
  const GaussianMarginals exact = rts_smoother(problem);

  const KernelOptions options{s.particles, ResamplingScheme::Multinomial};
  Rng rng = Rng::derive(s.seed, {0x4B414C4D});
  ReferenceTrajectory ref = bootstrap_pass(data, noise.sigma_f, noise.sigma_c, options, rng);
  std::vector<Matrix> draws;
  for (int r = 0; r < s.iterations; ++r) {
    ref = pgas_kernel(data, noise.sigma_f, noise.sigma_c, ref, options, rng);
    draws.push_back(ref.fine[0][0]);
  }

  KalmanResult result{{"kalman_equivalence_means", true, {}, {}},
                      {"kalman_equivalence_variances", true, {}, {}}};
  for (int k = 0; k < s.K; ++k) {
    for (int n = 0; n < s.dim; ++n) {
      std::vector<double> series;
      for (const auto& m : draws) series.push_back(m(n, k));
      double sum = 0.0;
      for (double v : series) sum += v;
      const double emp_mean = sum / static_cast<double>(series.size());
      double ss = 0.0;
      for (double v : series) ss += (v - emp_mean) * (v - emp_mean);
      const double emp_var = ss / static_cast<double>(series.size() - 1);

      const double exact_var = exact.covs[k](n, n);
      const EssResult e = ess(series);
      const double se = e.zero_variance ? 0.0 : std::sqrt(exact_var / e.value);
      const double z = se > 0.0 ? std::abs(emp_mean - exact.means[k](n)) / se
                                : std::numeric_limits<double>::infinity();
      result.means.add(fmt::format("k={} dim={} |mean-exact|/se (mean {:.4f}, exact {:.4f}, ess {:.0f})",
                                   k, n, emp_mean, exact.means[k](n), e.value),
                       z, s.z_tolerance);
      result.variances.add(fmt::format("k={} dim={} |var/exact-1| (var {:.4f}, exact {:.4f})", k, n,
                                       emp_var, exact_var),
                           std::abs(emp_var / exact_var - 1.0), s.variance_tolerance);
    }
  }
  return result;
}

CheckReport conjugacy_recovery(const ConjugacySettings& s) {
  RunConfig config = default_config(s.seed);
  config.dims.T = s.T;
  config.dims.K = s.K;
  const Model model = make_model(config);
  const Dataset data = generate(model, config.noise, std::nullopt, s.seed);
  const CovariancePosteriors post =
      covariance_posteriors(data.states, data.init, model, config.priors, s.mode);

  Rng rng = Rng::derive(s.seed, {0xC0A1});
  Matrix sum_f = Matrix::Zero(model.dims.nx, model.dims.nx);
  std::vector<Matrix> sum_c(model.dims.D, Matrix::Zero(model.dims.mx, model.dims.mx));
  for (int r = 0; r < s.draws; ++r) {
    const CovarianceDraw draw = sample_covariances(post, rng);
    sum_f += draw.sigma_f.matrix();
    for (int d = 0; d < model.dims.D; ++d) sum_c[d] += draw.sigma_c[d].matrix();
  }

  CheckReport report{"conjugacy_recovery", true, {}, {}};
  const double n = static_cast<double>(s.draws);
  for (int i = 0; i < model.dims.nx; ++i) {
    const double truth = config.noise.sigma_f(i, i);
    const double est = sum_f(i, i) / n;
    report.add(fmt::format("sigma_f[{0},{0}] rel.err (mean {1:.4f}, true {2})", i, est, truth),
               std::abs(est / truth - 1.0), s.fine_tolerance);
  }
  for (int d = 0; d < model.dims.D; ++d) {
    for (int i = 0; i < model.dims.mx; ++i) {
      const double truth = config.noise.sigma_c[d](i, i);
      const double est = sum_c[d](i, i) / n;
      report.add(fmt::format("sigma_c[{0}][{1},{1}] rel.err (mean {2:.4f}, true {3})", d, i, est, truth),
                 std::abs(est / truth - 1.0), s.coarse_tolerance);
    }
  }
  if (s.mode == DofMode::StrictPaper) {
    report.note =
        "dof mode strict_paper grows the fine dof by K only while the scale accumulates all "
        "D*T*K residual outer products, so the fine posterior is centred far above the truth. "
        "This deviation from the conjugate update is expected in this mode.";
  }
  return report;
}

CheckReport degeneracy_identities(RandomSeed seed) {
  RunConfig config = default_config(seed);
  config.dims.T = 4;
  config.dims.K = 5;
  const Model model = make_model(config);
  const Dataset data = generate(model, config.noise, std::nullopt, seed);

  CheckReport report{"degeneracy_identities", true, {}, {}};
  Rng rng(seed);
  const ReferenceTrajectory out =
      pgas_kernel(data, config.noise.sigma_f, config.noise.sigma_c, data.states, {1}, rng);
  report.add("N=1 kernel differs from reference (0 = identical)", out == data.states ? 0.0 : 1.0, 0.0);

  const IwParams& prior = config.priors.fine;
  const IwParams post = iw_posterior(prior, SufficientStats::empty(prior.scale.dim()));
  report.add("empty-stats posterior differs from prior (0 = identical)",
             post.scale == prior.scale && post.dof == prior.dof ? 0.0 : 1.0, 0.0);

  double worst = 0.0;
  worst = std::max(worst, rmse_coarse(data.states, data.states).values.maxCoeff());
  for (const auto& table : rmse_fine(data.states, data.states)) worst = std::max(worst, table.values.maxCoeff());
  report.add("max RMSE of exact estimates", worst, 0.0);
  return report;
}

}  // namespace mspgas::validation
