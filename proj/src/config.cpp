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

#include "mspgas/config.hpp"

#include <fmt/format.h>

#include "mspgas/error.hpp"

namespace mspgas {

namespace {

constexpr std::uint64_t kCouplingStream = 0xC0FFEE01;

void check(bool ok, const std::string& what) {
  if (!ok) throw Error(ErrorCode::ConfigError, what);
}

}  // namespace

CouplingSpec random_coupling(const ModelDims& dims, RandomSeed seed) {
  Rng rng = Rng::derive(seed, {kCouplingStream});
  CouplingSpec spec;
  spec.A.resize(dims.nx, dims.nx);
  spec.B.resize(dims.D, dims.D);
  // Row-major fill so the draw order does not depend on Eigen's storage order.
  for (int i = 0; i < dims.nx; ++i)
    for (int j = 0; j < dims.nx; ++j) spec.A(i, j) = rng.uniform() - 0.5;
  for (int i = 0; i < dims.D; ++i)
    for (int j = 0; j < dims.D; ++j) spec.B(i, j) = rng.uniform() - 0.5;
  spec.w = Vector::Constant(dims.K, 1.0 / dims.K);
  return spec;
}

CouplingSpec materialize_coupling(const RunConfig& config) {
  CouplingSpec spec;
  if (config.coupling_source == CouplingSource::Random) {
    spec = random_coupling(config.dims, config.seed);
  } else {
    check(config.A.has_value() && config.B.has_value(), "explicit coupling requires A and B");
    spec.A = *config.A;
    spec.B = *config.B;
    spec.w = Vector::Constant(config.dims.K, 1.0 / config.dims.K);
  }
  if (config.w) spec.w = *config.w;
  return spec;
}

Model make_model(const RunConfig& config) {
  Model model{config.dims, materialize_coupling(config), config.kind};
  validate(model);
  return model;
}

void validate(const RunConfig& config) {
  const ModelDims& dims = config.dims;
  check(dims.D >= 1 && dims.T >= 1 && dims.K >= 1 && dims.nx >= 1 && dims.mx >= 1,
        "dims: every dimension must be >= 1");
  check(dims.nx == dims.mx, fmt::format("dims: nx ({}) must equal mx ({})", dims.nx, dims.mx));
  if (config.A) check(config.A->rows() == dims.nx && config.A->cols() == dims.nx, "coupling.A must be nx x nx");
  if (config.B) check(config.B->rows() == dims.D && config.B->cols() == dims.D, "coupling.B must be D x D");
  if (config.w) {
    check(config.w->size() == dims.K, "coupling.weights must have K entries");
    check((config.w->array() >= 0.0).all() && config.w->sum() > 0.0,
          "coupling.weights must be nonnegative with a positive sum");
  }
  if (config.kind.family == TransitionFamily::LinearGaussian) {
    check(config.kind.F_fine.rows() == dims.nx && config.kind.F_fine.cols() == dims.nx,
          "transition.F_fine must be nx x nx");
    check(config.kind.F_coarse.rows() == dims.mx && config.kind.F_coarse.cols() == dims.mx,
          "transition.F_coarse must be mx x mx");
  }
  try {
    validate(dims, config.noise);
  } catch (const Error& e) {
    throw Error(ErrorCode::ConfigError, fmt::format("noise: {}", e.what()));
  }
  check(config.priors.fine.scale.dim() == dims.nx, "priors.fine.scale must be nx x nx");
  check(config.priors.fine.proper(), "priors.fine.dof must exceed nx - 1");
  check(static_cast<int>(config.priors.coarse.size()) == dims.D, "priors.coarse needs one entry per individual");
  for (const auto& p : config.priors.coarse) {
    check(p.scale.dim() == dims.mx, "priors.coarse.scale must be mx x mx");
    check(p.proper(), "priors.coarse.dof must exceed mx - 1");
  }
  const ChainConfig& chain = config.chain;
  check(chain.particles >= 1, fmt::format("inference.particles must be >= 1, got {}", chain.particles));
  check(chain.iterations >= 1, fmt::format("inference.iterations must be >= 1, got {}", chain.iterations));
  check(chain.burn_in >= 0.0 && chain.burn_in < 1.0, "inference.burn_in must be in [0, 1)");
  check(chain.thin >= 1, "inference.thin must be >= 1");
}

const char* to_string(ResamplingScheme scheme) {
  return scheme == ResamplingScheme::Multinomial ? "multinomial" : "systematic";
}

const char* to_string(DofMode mode) {
  return mode == DofMode::FullCount ? "full_count" : "strict_paper";
}

const char* to_string(TransitionFamily family) {
  return family == TransitionFamily::PaperCosSin ? "paper_cos_sin" : "linear_gaussian";
}

}  // namespace mspgas
