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

#include "mspgas/stats.hpp"

namespace mspgas {

/// Sizes of the multiscale model: D individuals, T coarse steps, K fine steps
/// per coarse step, fine state dimension nx, coarse state dimension mx.
struct ModelDims {
  int D = 1;
  int T = 1;
  int K = 1;
  int nx = 1;
  int mx = 1;

  friend bool operator==(const ModelDims&, const ModelDims&) = default;
};

/// Fine adjacency A (nx x nx), individual adjacency B (D x D) and the
/// fine-step weights w (K) that form the fine-to-coarse average.
struct CouplingSpec {
  Matrix A;
  Matrix B;
  Vector w;
};

enum class TransitionFamily { PaperCosSin, LinearGaussian };

/// Cos/sin dynamics: f = cos(A x + X),   g = sin((B X_all)_d + avg_w(x)).
/// Linear variant:   f = F_fine x + X,   g = F_coarse (B X_all)_d + avg_w(x).
struct TransitionKind {
  TransitionFamily family = TransitionFamily::PaperCosSin;
  Matrix F_fine;
  Matrix F_coarse;

  static TransitionKind paper() { return {}; }
  static TransitionKind linear(Matrix f_fine, Matrix f_coarse) {
    return {TransitionFamily::LinearGaussian, std::move(f_fine), std::move(f_coarse)};
  }
};

/// Process and measurement covariances. sigma_v / sigma_V are known inputs;
/// inference only ever updates sigma_f and sigma_c.
struct NoiseSpec {
  SpdMatrix sigma_f;
  std::vector<SpdMatrix> sigma_c;  // one per individual
  SpdMatrix sigma_v;
  std::vector<SpdMatrix> sigma_V;  // one per individual
};

struct Model {
  ModelDims dims;
  CouplingSpec coupling;
  TransitionKind kind;
};

/// Throws DimensionMismatch / ZeroWeightSum when the pieces do not fit together.
void validate(const ModelDims& dims);
void validate(const Model& model);
void validate(const ModelDims& dims, const NoiseSpec& noise);

/// Mean of the fine transition out of x_prev given the previous coarse state.
Vector transition_fine(const Vector& x_prev, const Vector& coarse_prev, const CouplingSpec& spec,
                       const TransitionKind& kind);

/// Column-wise transition_fine for a block of particles (one per column).
Matrix transition_fine_columns(const Matrix& x_prev, const Vector& coarse_prev,
                               const CouplingSpec& spec, const TransitionKind& kind);

/// Mean of individual d's coarse transition.
/// coarse_all_prev: D x mx, row d' is individual d's previous coarse state.
/// fine_traj: nx x K, column k is the fine state at step k of the current coarse step.
Vector transition_coarse(const Matrix& coarse_all_prev, const Matrix& fine_traj,
                         const CouplingSpec& spec, int d, const TransitionKind& kind);

/// w-weighted average of the columns of fine_traj.
Vector fine_average(const Matrix& fine_traj, const Vector& w);

/// Coarse transition mean from a precomputed row (B X_all)_d and fine average.
Vector coarse_mean_from_parts(const Vector& coupled_row, const Vector& fine_avg,
                              const TransitionKind& kind);

double log_trans_fine(const Vector& x_next, const Vector& x_prev, const Vector& coarse_prev,
                      const SpdMatrix& sigma_f, const CouplingSpec& spec,
                      const TransitionKind& kind);

double log_trans_coarse(const Vector& coarse_next, const Matrix& coarse_all_prev,
                        const Matrix& fine_traj, const SpdMatrix& sigma_c_d,
                        const CouplingSpec& spec, int d, const TransitionKind& kind);

}  // namespace mspgas
