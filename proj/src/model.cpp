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

#include "mspgas/model.hpp"

#include <fmt/format.h>

#include "mspgas/error.hpp"

namespace mspgas {

namespace {

void require(bool ok, const std::string& what) {
  if (!ok) throw Error(ErrorCode::DimensionMismatch, what);
}

}  // namespace

void validate(const ModelDims& dims) {
  if (dims.D < 1 || dims.T < 1 || dims.K < 1 || dims.nx < 1 || dims.mx < 1) {
    throw Error(ErrorCode::InvalidArgument,
                fmt::format("dimensions must be >= 1 (D={}, T={}, K={}, nx={}, mx={})", dims.D,
                            dims.T, dims.K, dims.nx, dims.mx));
  }
}

void validate(const Model& model) {
  const auto& [dims, coupling, kind] = model;
  validate(dims);
  // The coarse state is added elementwise to the fine argument, so the two
  // state spaces must coincide.
  require(dims.nx == dims.mx, fmt::format("nx ({}) must equal mx ({})", dims.nx, dims.mx));
  require(coupling.A.rows() == dims.nx && coupling.A.cols() == dims.nx,
          fmt::format("A must be {0}x{0}", dims.nx));
  require(coupling.B.rows() == dims.D && coupling.B.cols() == dims.D,
          fmt::format("B must be {0}x{0}", dims.D));
  require(coupling.w.size() == dims.K, fmt::format("w must have K={} entries", dims.K));
  if ((coupling.w.array() < 0.0).any()) {
    throw Error(ErrorCode::InvalidArgument, "fine-step weights must be nonnegative");
  }
  if (!(coupling.w.sum() > 0.0)) throw Error(ErrorCode::ZeroWeightSum, "fine-step weights sum to 0");
  if (kind.family == TransitionFamily::LinearGaussian) {
    require(kind.F_fine.rows() == dims.nx && kind.F_fine.cols() == dims.nx,
            fmt::format("F_fine must be {0}x{0}", dims.nx));
    require(kind.F_coarse.rows() == dims.mx && kind.F_coarse.cols() == dims.mx,
            fmt::format("F_coarse must be {0}x{0}", dims.mx));
  }
}

void validate(const ModelDims& dims, const NoiseSpec& noise) {
  require(noise.sigma_f.dim() == dims.nx, "sigma_f must be nx x nx");
  require(noise.sigma_v.dim() == dims.nx, "sigma_v must be nx x nx");
  require(static_cast<int>(noise.sigma_c.size()) == dims.D, "sigma_c needs one matrix per individual");
  require(static_cast<int>(noise.sigma_V.size()) == dims.D, "sigma_V needs one matrix per individual");
  for (int d = 0; d < dims.D; ++d) {
    require(noise.sigma_c[d].dim() == dims.mx, fmt::format("sigma_c[{}] must be mx x mx", d));
    require(noise.sigma_V[d].dim() == dims.mx, fmt::format("sigma_V[{}] must be mx x mx", d));
  }
}

Vector transition_fine(const Vector& x_prev, const Vector& coarse_prev, const CouplingSpec& spec,
                       const TransitionKind& kind) {
  return transition_fine_columns(x_prev, coarse_prev, spec, kind).col(0);
}

Matrix transition_fine_columns(const Matrix& x_prev, const Vector& coarse_prev,
                               const CouplingSpec& spec, const TransitionKind& kind) {
  if (kind.family == TransitionFamily::PaperCosSin) {
    require(spec.A.cols() == x_prev.rows() && spec.A.rows() == coarse_prev.size(),
            "transition_fine: A, x and X dimensions disagree");
    Matrix arg = spec.A * x_prev;
    arg.colwise() += coarse_prev;
    return arg.array().cos().matrix();
  }
  require(kind.F_fine.cols() == x_prev.rows() && kind.F_fine.rows() == coarse_prev.size(),
          "transition_fine: F_fine, x and X dimensions disagree");
  Matrix out = kind.F_fine * x_prev;
  out.colwise() += coarse_prev;
  return out;
}

Vector fine_average(const Matrix& fine_traj, const Vector& w) {
  require(fine_traj.cols() == w.size(), "fine trajectory length must equal the weight count");
  const double total = w.sum();
  if (!(total > 0.0)) throw Error(ErrorCode::ZeroWeightSum, "fine-step weights sum to 0");
  return fine_traj * w / total;
}

Vector coarse_mean_from_parts(const Vector& coupled_row, const Vector& fine_avg,
                              const TransitionKind& kind) {
  require(coupled_row.size() == fine_avg.size(), "coarse and fine dimensions disagree");
  if (kind.family == TransitionFamily::PaperCosSin) {
    return (coupled_row + fine_avg).array().sin().matrix();
  }
  require(kind.F_coarse.cols() == coupled_row.size(), "F_coarse dimension disagrees");
  return kind.F_coarse * coupled_row + fine_avg;
}

Vector transition_coarse(const Matrix& coarse_all_prev, const Matrix& fine_traj,
                         const CouplingSpec& spec, int d, const TransitionKind& kind) {
  require(spec.B.rows() == coarse_all_prev.rows() && spec.B.cols() == coarse_all_prev.rows(),
          "transition_coarse: B must be D x D with D rows of coarse states");
  if (d < 0 || d >= coarse_all_prev.rows()) {
    throw Error(ErrorCode::IndexOutOfRange, fmt::format("individual {} out of range", d));
  }
  require(fine_traj.rows() == coarse_all_prev.cols(), "fine and coarse state dimensions disagree");
  const Vector coupled = (spec.B.row(d) * coarse_all_prev).transpose();
  return coarse_mean_from_parts(coupled, fine_average(fine_traj, spec.w), kind);
}

double log_trans_fine(const Vector& x_next, const Vector& x_prev, const Vector& coarse_prev,
                      const SpdMatrix& sigma_f, const CouplingSpec& spec,
                      const TransitionKind& kind) {
  return mvn_logpdf(x_next, transition_fine(x_prev, coarse_prev, spec, kind), sigma_f);
}

double log_trans_coarse(const Vector& coarse_next, const Matrix& coarse_all_prev,
                        const Matrix& fine_traj, const SpdMatrix& sigma_c_d,
                        const CouplingSpec& spec, int d, const TransitionKind& kind) {
  return mvn_logpdf(coarse_next, transition_coarse(coarse_all_prev, fine_traj, spec, d, kind),
                    sigma_c_d);
}

}  // namespace mspgas
