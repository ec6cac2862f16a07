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

#include <cstddef>
#include <vector>

#include <Eigen/Dense>

#include "mspgas/rng.hpp"

namespace mspgas {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Lower Cholesky factor of a symmetric matrix.
/// Throws NotPositiveDefinite when a pivot is not strictly positive.
Matrix cholesky(const Matrix& m);

/// Symmetric positive-definite matrix together with its Cholesky factor.
///
/// Construction validates symmetry (1e-10 relative) and positive-definiteness,
/// so every SpdMatrix in the program is usable as a Gaussian covariance.
class SpdMatrix {
 public:
  explicit SpdMatrix(Matrix m);

  static SpdMatrix identity(Eigen::Index dim, double scale = 1.0);

  Eigen::Index dim() const { return m_.rows(); }
  const Matrix& matrix() const { return m_; }
  const Matrix& chol() const { return l_; }
  double log_det() const { return log_det_; }
  double operator()(Eigen::Index i, Eigen::Index j) const { return m_(i, j); }

  friend bool operator==(const SpdMatrix& a, const SpdMatrix& b) { return a.m_ == b.m_; }

 private:
  Matrix m_;
  Matrix l_;
  double log_det_ = 0.0;
};

/// Inverse-Wishart hyperparameters (prior or posterior).
struct IwParams {
  SpdMatrix scale;
  double dof;

  /// dof > dim - 1.
  bool proper() const { return dof > static_cast<double>(scale.dim()) - 1.0; }
};

/// mean + L z with z standard normal.
Vector mvn_sample(const Vector& mean, const SpdMatrix& cov, Rng& rng);

double mvn_logpdf(const Vector& x, const Vector& mean, const SpdMatrix& cov);

/// Log-density of every column of `xs` under N(means.col(i), cov).
/// `means` may have a single column, which is then shared.
Vector mvn_logpdf_columns(const Matrix& xs, const Matrix& means, const SpdMatrix& cov);

/// Draw from IW(scale, dof) by the Bartlett construction of W ~ Wishart(scale^-1, dof),
/// returning W^-1.
SpdMatrix inv_wishart_sample(const IwParams& params, Rng& rng);

/// Index i with probability weights[i] / sum(weights).
/// Throws AllWeightsZero when no weight is positive.
std::size_t categorical_sample(const Vector& weights, Rng& rng);

/// exp(logw - max) / sum. Throws AllWeightsZero when every entry is -inf (or NaN).
Vector normalize_log_weights(const Vector& log_weights);

enum class ResamplingScheme { Multinomial, Systematic };

/// `count` ancestor indices drawn according to normalized `weights`.
std::vector<int> resample(const Vector& weights, std::size_t count, ResamplingScheme scheme,
                          Rng& rng);

/// 1 / sum(w_i^2) of normalized weights.
double effective_sample_size(const Vector& weights);

}  // namespace mspgas
