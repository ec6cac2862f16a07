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

#include <span>
#include <string>
#include <vector>

#include "mspgas/gibbs.hpp"
#include "mspgas/simulate.hpp"

namespace mspgas {

/// Elementwise mean of a set of trajectories of identical shape.
Trajectories average(std::span<const Trajectories> draws);

/// Posterior mean of the state references stored at or after the burn-in.
/// Throws EmptyChain when none are retained.
Trajectories posterior_state_mean(const Chain& chain);

/// Nonnegative table with labelled axes; values(r, c).
struct RmseTable {
  std::string row_axis;
  std::string col_axis;
  Matrix values;
};

/// D x mx: sqrt(mean over t of (estimate - truth)^2) per individual and dimension.
RmseTable rmse_coarse(const Trajectories& estimates, const Trajectories& truth);

/// One T x nx table per individual: RMSE over the K fine steps of each coarse step.
std::vector<RmseTable> rmse_fine(const Trajectories& estimates, const Trajectories& truth);

enum class TraceTarget { SigmaF, SigmaC };

/// Diagonal entry (dim, dim) of the chosen covariance over the retained iterations.
/// `d` selects the individual for SigmaC and is ignored for SigmaF.
std::vector<double> trace(const Chain& chain, TraceTarget target, int d, int dim);

struct EssResult {
  double value = 0.0;
  bool zero_variance = false;
};

/// Effective sample size from the initial monotone positive sequence of
/// autocorrelation pair sums. Constant series give 0 with zero_variance set.
/// Throws SeriesTooShort below 10 points.
EssResult ess(std::span<const double> series);

}  // namespace mspgas
