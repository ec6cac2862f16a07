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

#include "mspgas/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <fmt/format.h>

#include "mspgas/error.hpp"

namespace mspgas {

namespace {

void require_same_shape(const Trajectories& a, const Trajectories& b) {
  bool ok = a.fine.size() == b.fine.size() && a.coarse.size() == b.coarse.size();
  for (std::size_t d = 0; ok && d < a.coarse.size(); ++d) {
    ok = a.coarse[d].rows() == b.coarse[d].rows() && a.coarse[d].cols() == b.coarse[d].cols() &&
         a.fine[d].size() == b.fine[d].size();
    for (std::size_t t = 0; ok && t < a.fine[d].size(); ++t) {
      ok = a.fine[d][t].rows() == b.fine[d][t].rows() && a.fine[d][t].cols() == b.fine[d][t].cols();
    }
  }
  if (!ok) throw Error(ErrorCode::DimensionMismatch, "estimate and truth shapes differ");
}

}  // namespace

Trajectories average(std::span<const Trajectories> draws) {
  if (draws.empty()) throw Error(ErrorCode::EmptyChain, "no draws to average");
  Trajectories acc = draws.front();
  for (const auto& draw : draws.subspan(1)) {
    require_same_shape(acc, draw);
    for (std::size_t d = 0; d < acc.coarse.size(); ++d) {
      acc.coarse[d] += draw.coarse[d];
      for (std::size_t t = 0; t < acc.fine[d].size(); ++t) acc.fine[d][t] += draw.fine[d][t];
    }
  }
  const double n = static_cast<double>(draws.size());
  for (std::size_t d = 0; d < acc.coarse.size(); ++d) {
    acc.coarse[d] /= n;
    for (auto& block : acc.fine[d]) block /= n;
  }
  return acc;
}

Trajectories posterior_state_mean(const Chain& chain) {
  const int first = chain.burn_in_iterations();
  std::vector<Trajectories> retained;
  for (std::size_t j = 0; j < chain.state_refs.size(); ++j) {
    if (chain.state_iterations[j] >= first) retained.push_back(chain.state_refs[j]);
  }
  if (retained.empty()) {
    throw Error(ErrorCode::EmptyChain,
                fmt::format("no stored state reference at or after burn-in iteration {}", first));
  }
  return average(retained);
}

RmseTable rmse_coarse(const Trajectories& estimates, const Trajectories& truth) {
  require_same_shape(estimates, truth);
  const auto D = static_cast<Eigen::Index>(truth.coarse.size());
  const Eigen::Index mx = D > 0 ? truth.coarse[0].rows() : 0;
  RmseTable table{"d", "dim", Matrix::Zero(D, mx)};
  for (Eigen::Index d = 0; d < D; ++d) {
    const Matrix diff = estimates.coarse[d] - truth.coarse[d];
    table.values.row(d) = (diff.array().square().rowwise().mean().sqrt()).transpose();
  }
  return table;
}

std::vector<RmseTable> rmse_fine(const Trajectories& estimates, const Trajectories& truth) {
  require_same_shape(estimates, truth);
  std::vector<RmseTable> tables;
  for (std::size_t d = 0; d < truth.fine.size(); ++d) {
    const auto T = static_cast<Eigen::Index>(truth.fine[d].size());
    const Eigen::Index nx = T > 0 ? truth.fine[d][0].rows() : 0;
    RmseTable table{"t", "dim", Matrix::Zero(T, nx)};
    for (Eigen::Index t = 0; t < T; ++t) {
      const Matrix diff = estimates.fine[d][t] - truth.fine[d][t];
      table.values.row(t) = (diff.array().square().rowwise().mean().sqrt()).transpose();
    }
    tables.push_back(std::move(table));
  }
  return tables;
}

std::vector<double> trace(const Chain& chain, TraceTarget target, int d, int dim) {
  if (chain.iterations() == 0) throw Error(ErrorCode::EmptyChain, "chain has no draws");
  if (target == TraceTarget::SigmaC &&
      (d < 0 || d >= static_cast<int>(chain.sigma_c_draws.front().size()))) {
    throw Error(ErrorCode::IndexOutOfRange, fmt::format("individual {} out of range", d));
  }
  const Eigen::Index p = target == TraceTarget::SigmaF ? chain.sigma_f_draws.front().dim()
                                                       : chain.sigma_c_draws.front()[d].dim();
  if (dim < 0 || dim >= p) {
    throw Error(ErrorCode::IndexOutOfRange, fmt::format("dimension {} out of range [0, {})", dim, p));
  }
  std::vector<double> out;
  for (int r = chain.burn_in_iterations(); r < chain.iterations(); ++r) {
    const SpdMatrix& m =
        target == TraceTarget::SigmaF ? chain.sigma_f_draws[r] : chain.sigma_c_draws[r][d];
    out.push_back(m(dim, dim));
  }
  return out;
}

EssResult ess(std::span<const double> series) {
  const std::size_t n = series.size();
  if (n < 10) throw Error(ErrorCode::SeriesTooShort, fmt::format("ESS needs >= 10 points, got {}", n));
  const double mean = std::accumulate(series.begin(), series.end(), 0.0) / static_cast<double>(n);
  std::vector<double> centered(n);
  std::transform(series.begin(), series.end(), centered.begin(), [&](double v) { return v - mean; });

  auto autocov = [&](std::size_t lag) {
    double s = 0.0;
    for (std::size_t i = 0; i + lag < n; ++i) s += centered[i] * centered[i + lag];
    return s / static_cast<double>(n);
  };
  const double gamma0 = autocov(0);
  if (!(gamma0 > 0.0)) return {0.0, true};

  double tau = -1.0;
  double prev_pair = std::numeric_limits<double>::infinity();
  for (std::size_t m = 0; 2 * m + 1 < n; ++m) {
    double pair = (autocov(2 * m) + autocov(2 * m + 1)) / gamma0;
    if (!(pair > 0.0)) break;
    pair = std::min(pair, prev_pair);
    tau += 2.0 * pair;
    prev_pair = pair;
  }
  return {static_cast<double>(n) / tau, false};
}

}  // namespace mspgas
