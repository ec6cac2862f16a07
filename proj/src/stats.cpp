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

#include "mspgas/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include <fmt/format.h>

#include "mspgas/error.hpp"

namespace mspgas {

namespace {

constexpr double kLog2Pi = 1.8378770664093454835606594728112;

}  // namespace

Matrix cholesky(const Matrix& m) {
  if (m.rows() != m.cols() || m.rows() == 0) {
    throw Error(ErrorCode::DimensionMismatch,
                fmt::format("cholesky of a {}x{} matrix", m.rows(), m.cols()));
  }
  Eigen::LLT<Matrix> llt(m);
  if (llt.info() != Eigen::Success) {
    throw Error(ErrorCode::NotPositiveDefinite, "Cholesky pivot <= 0");
  }
  Matrix l = llt.matrixL();
  for (Eigen::Index i = 0; i < l.rows(); ++i) {
    if (!(l(i, i) > 0.0) || !std::isfinite(l(i, i))) {
      throw Error(ErrorCode::NotPositiveDefinite, fmt::format("Cholesky pivot {} is {}", i, l(i, i)));
    }
  }
  return l;
}

SpdMatrix::SpdMatrix(Matrix m) : m_(std::move(m)) {
  if (m_.rows() != m_.cols() || m_.rows() == 0) {
    throw Error(ErrorCode::DimensionMismatch,
                fmt::format("covariance must be square, got {}x{}", m_.rows(), m_.cols()));
  }
  if (!m_.allFinite()) throw Error(ErrorCode::NotPositiveDefinite, "non-finite covariance entry");
  const double scale = std::max(m_.cwiseAbs().maxCoeff(), std::numeric_limits<double>::min());
  if ((m_ - m_.transpose()).cwiseAbs().maxCoeff() > 1e-10 * scale) {
    throw Error(ErrorCode::NotPositiveDefinite, "covariance is not symmetric");
  }
  l_ = cholesky(m_);
  log_det_ = 2.0 * l_.diagonal().array().log().sum();
}

SpdMatrix SpdMatrix::identity(Eigen::Index dim, double scale) {
  return SpdMatrix(scale * Matrix::Identity(dim, dim));
}

Vector mvn_sample(const Vector& mean, const SpdMatrix& cov, Rng& rng) {
  if (mean.size() != cov.dim()) {
    throw Error(ErrorCode::DimensionMismatch,
                fmt::format("mean has {} entries, covariance is {}x{}", mean.size(), cov.dim(), cov.dim()));
  }
  Vector z(mean.size());
  for (Eigen::Index i = 0; i < z.size(); ++i) z(i) = rng.normal();
  return mean + cov.chol().triangularView<Eigen::Lower>() * z;
}

double mvn_logpdf(const Vector& x, const Vector& mean, const SpdMatrix& cov) {
  if (x.size() != cov.dim() || mean.size() != cov.dim()) {
    throw Error(ErrorCode::DimensionMismatch, "mvn_logpdf dimensions disagree");
  }
  const Vector z = cov.chol().triangularView<Eigen::Lower>().solve(x - mean);
  return -0.5 * (static_cast<double>(x.size()) * kLog2Pi + cov.log_det() + z.squaredNorm());
}

Vector mvn_logpdf_columns(const Matrix& xs, const Matrix& means, const SpdMatrix& cov) {
  if (xs.rows() != cov.dim() || means.rows() != cov.dim() ||
      (means.cols() != 1 && means.cols() != xs.cols())) {
    throw Error(ErrorCode::DimensionMismatch, "mvn_logpdf_columns dimensions disagree");
  }
  Matrix diff = means.cols() == 1 ? Matrix(xs.colwise() - means.col(0)) : Matrix(xs - means);
  cov.chol().triangularView<Eigen::Lower>().solveInPlace(diff);
  const double constant = -0.5 * (static_cast<double>(xs.rows()) * kLog2Pi + cov.log_det());
  return (constant - 0.5 * diff.colwise().squaredNorm().array()).transpose();
}

SpdMatrix inv_wishart_sample(const IwParams& params, Rng& rng) {
  const Eigen::Index p = params.scale.dim();
  if (!params.proper()) {
    throw Error(ErrorCode::InvalidArgument,
                fmt::format("inverse-Wishart dof {} must exceed dim - 1 = {}", params.dof, p - 1));
  }
  // Scale = L L^T. If Z = A A^T ~ Wishart(I, dof) then W = L^-T Z L^-1 ~ Wishart(scale^-1, dof)
  // and W^-1 = (L A^-T)(L A^-T)^T.
  Matrix a = Matrix::Zero(p, p);
  for (Eigen::Index i = 0; i < p; ++i) {
    a(i, i) = std::sqrt(rng.chi_squared(params.dof - static_cast<double>(i)));
    for (Eigen::Index j = 0; j < i; ++j) a(i, j) = rng.normal();
  }
  if (!(a.diagonal().minCoeff() > 0.0)) {
    throw Error(ErrorCode::NotPositiveDefinite, "Bartlett factor has a zero pivot");
  }
  const Matrix a_inv =
      a.triangularView<Eigen::Lower>().solve(Matrix::Identity(p, p));
  const Matrix m = params.scale.chol() * a_inv.transpose();
  Matrix sigma = m * m.transpose();
  sigma = 0.5 * (sigma + sigma.transpose());
  return SpdMatrix(std::move(sigma));
}

std::size_t categorical_sample(const Vector& weights, Rng& rng) {
  double total = 0.0;
  for (double w : weights) {
    if (w < 0.0 || std::isnan(w)) throw Error(ErrorCode::InvalidArgument, "negative or NaN weight");
    total += w;
  }
  if (!(total > 0.0)) throw Error(ErrorCode::AllWeightsZero, "categorical weights sum to zero");
  const double u = rng.uniform() * total;
  double acc = 0.0;
  std::size_t last_positive = 0;
  for (Eigen::Index i = 0; i < weights.size(); ++i) {
    if (weights(i) <= 0.0) continue;
    acc += weights(i);
    last_positive = static_cast<std::size_t>(i);
    if (u < acc) return last_positive;
  }
  return last_positive;
}

Vector normalize_log_weights(const Vector& log_weights) {
  if (log_weights.size() == 0) throw Error(ErrorCode::AllWeightsZero, "no weights");
  double max = -std::numeric_limits<double>::infinity();
  for (double lw : log_weights) {
    if (std::isnan(lw)) throw Error(ErrorCode::AllWeightsZero, "NaN log-weight");
    max = std::max(max, lw);
  }
  if (max == -std::numeric_limits<double>::infinity()) {
    throw Error(ErrorCode::AllWeightsZero, "every log-weight is -inf");
  }
  if (max == std::numeric_limits<double>::infinity()) {
    throw Error(ErrorCode::AllWeightsZero, "+inf log-weight");
  }
  Vector w = (log_weights.array() - max).exp();
  return w / w.sum();
}

std::vector<int> resample(const Vector& weights, std::size_t count, ResamplingScheme scheme,
                          Rng& rng) {
  std::vector<double> cdf(static_cast<std::size_t>(weights.size()));
  double acc = 0.0;
  for (Eigen::Index i = 0; i < weights.size(); ++i) {
    acc += weights(i);
    cdf[static_cast<std::size_t>(i)] = acc;
  }
  if (!(acc > 0.0)) throw Error(ErrorCode::AllWeightsZero, "resampling weights sum to zero");
  const int last = static_cast<int>(weights.size()) - 1;
  auto locate = [&](double u) {
    const auto it = std::upper_bound(cdf.begin(), cdf.end(), u * acc);
    return std::min(static_cast<int>(it - cdf.begin()), last);
  };

  std::vector<int> out(count);
  if (scheme == ResamplingScheme::Multinomial) {
    for (auto& a : out) a = locate(rng.uniform());
  } else {
    const double step = 1.0 / static_cast<double>(count);
    const double offset = rng.uniform() * step;
    for (std::size_t j = 0; j < count; ++j) out[j] = locate(offset + static_cast<double>(j) * step);
  }
  return out;
}

double effective_sample_size(const Vector& weights) {
  const double s = weights.sum();
  return s * s / weights.squaredNorm();
}

}  // namespace mspgas
