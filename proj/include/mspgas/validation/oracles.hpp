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

#include <string>
#include <vector>

#include "mspgas/config.hpp"
#include "mspgas/stats.hpp"

namespace mspgas::validation {

/// x_1 = F start + offset + w_1,  x_k = F x_{k-1} + offset + w_k,  y_k = x_k + v_k,
/// with w ~ N(0, Q), v ~ N(0, R).
struct LinearGaussianProblem {
  Matrix F;
  Vector offset;
  Vector start;
  Matrix Q;
  Matrix R;
  std::vector<Vector> obs;
};

struct GaussianMarginals {
  std::vector<Vector> means;
  std::vector<Matrix> covs;
};

/// Rauch-Tung-Striebel smoother: exact p(x_k | y_1..y_K) for every k.
GaussianMarginals rts_smoother(const LinearGaussianProblem& problem);

struct Measurement {
  std::string name;
  double value = 0.0;
  double tolerance = 0.0;
  bool passed = false;
};

struct CheckReport {
  std::string name;
  bool passed = true;
  std::vector<Measurement> measurements;
  std::string note;

  void add(std::string label, double value, double tolerance) {
    const bool ok = value <= tolerance;
    measurements.push_back({std::move(label), value, tolerance, ok});
    passed = passed && ok;
  }
};

struct KalmanSettings {
  int particles = 2000;
  int iterations = 200;
  int K = 3;
  int dim = 3;
  double process_var = 0.2;
  double obs_var = 0.1;
  RandomSeed seed{2024};
  double z_tolerance = 3.0;
  double variance_tolerance = 0.25;
};

struct KalmanResult {
  CheckReport means;      // |estimate - exact| / MC standard error per (k, dim)
  CheckReport variances;  // |var_estimate / var_exact - 1| per (k, dim)
};

/// Runs the PGAS kernel on a one-individual, one-coarse-step linear-Gaussian
/// model and compares the empirical marginals of the returned fine states with
/// the exact smoother.
KalmanResult kalman_equivalence(const KalmanSettings& settings = {});

struct ConjugacySettings {
  int T = 1000;
  int K = 20;
  int draws = 5000;
  DofMode mode = DofMode::FullCount;
  RandomSeed seed{11};
  double fine_tolerance = 0.10;
  double coarse_tolerance = 0.15;
};

/// Covariance-only Gibbs draws given the true simulated states of the
/// reference configuration; relative error of the posterior-mean diagonals.
CheckReport conjugacy_recovery(const ConjugacySettings& settings = {});

/// N = 1 kernel identity, empty-statistics posterior, zero RMSE of exact estimates.
CheckReport degeneracy_identities(RandomSeed seed = RandomSeed{5});

}  // namespace mspgas::validation
