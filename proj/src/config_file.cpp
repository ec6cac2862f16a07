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

#include <fstream>
#include <set>
#include <sstream>

#include <fmt/format.h>
#include <yaml-cpp/yaml.h>

#include "mspgas/error.hpp"
#include "mspgas/persist.hpp"

namespace mspgas {

namespace {

class ConfigReader {
 public:
  explicit ConfigReader(std::string_view source) : source_(source) {}

  [[noreturn]] void fail(const YAML::Node& at, const std::string& path, const std::string& what) const {
    const int line = at.Mark().line >= 0 ? at.Mark().line + 1 : 0;
    throw Error(ErrorCode::ConfigError, fmt::format("{}:{}: {}: {}", source_, line, path, what));
  }

  YAML::Node map(const YAML::Node& node, const std::string& path,
                 std::initializer_list<const char*> allowed) const {
    if (!node.IsMap()) fail(node, path, "expected a mapping");
    const std::set<std::string> keys(allowed.begin(), allowed.end());
    for (const auto& kv : node) {
      const auto key = kv.first.as<std::string>();
      if (!keys.contains(key)) fail(kv.first, join(path, key), "unknown key");
    }
    return node;
  }

  YAML::Node require(const YAML::Node& parent, const std::string& path, const char* key) const {
    YAML::Node child = parent[key];
    if (!child) fail(parent, join(path, key), "missing required key");
    return child;
  }

  template <typename T>
  T scalar(const YAML::Node& node, const std::string& path) const {
    if (!node.IsScalar()) fail(node, path, "expected a scalar");
    try {
      return node.as<T>();
    } catch (const YAML::Exception&) {
      fail(node, path, fmt::format("cannot interpret '{}'", node.Scalar()));
    }
  }

  Matrix matrix(const YAML::Node& node, const std::string& path) const {
    if (!node.IsSequence() || node.size() == 0) fail(node, path, "expected a list of rows");
    const auto rows = static_cast<Eigen::Index>(node.size());
    Eigen::Index cols = -1;
    Matrix m;
    for (Eigen::Index i = 0; i < rows; ++i) {
      const YAML::Node row = node[static_cast<std::size_t>(i)];
      if (!row.IsSequence()) fail(row, path, "expected a list of rows");
      if (cols < 0) {
        cols = static_cast<Eigen::Index>(row.size());
        m.resize(rows, cols);
      }
      if (static_cast<Eigen::Index>(row.size()) != cols) fail(row, path, "ragged matrix");
      for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = scalar<double>(row[static_cast<std::size_t>(j)], path);
    }
    return m;
  }

  Vector vector(const YAML::Node& node, const std::string& path) const {
    if (!node.IsSequence()) fail(node, path, "expected a list of numbers");
    Vector v(static_cast<Eigen::Index>(node.size()));
    for (std::size_t i = 0; i < node.size(); ++i) v(static_cast<Eigen::Index>(i)) = scalar<double>(node[i], path);
    return v;
  }

  /// A scalar s means s * I.
  SpdMatrix covariance(const YAML::Node& node, const std::string& path, int dim) const {
    Matrix m = node.IsScalar() ? Matrix(scalar<double>(node, path) * Matrix::Identity(dim, dim))
                               : matrix(node, path);
    if (m.rows() != dim || m.cols() != dim) fail(node, path, fmt::format("expected a {0}x{0} matrix", dim));
    try {
      return SpdMatrix(std::move(m));
    } catch (const Error& e) {
      fail(node, path, e.message());
    }
  }

  std::vector<SpdMatrix> covariance_list(const YAML::Node& node, const std::string& path, int count,
                                         int dim) const {
    if (!node.IsSequence() || static_cast<int>(node.size()) != count) {
      fail(node, path, fmt::format("expected a list of {} entries (one per individual)", count));
    }
    std::vector<SpdMatrix> out;
    for (int i = 0; i < count; ++i) {
      out.push_back(covariance(node[static_cast<std::size_t>(i)], fmt::format("{}[{}]", path, i), dim));
    }
    return out;
  }

  static std::string join(const std::string& path, const std::string& key) {
    return path.empty() ? key : path + "." + key;
  }

 private:
  std::string source_;
};

}  // namespace

RunConfig parse_config(std::string_view text, std::string_view source_name) {
  YAML::Node root;
  try {
    root = YAML::Load(std::string(text));
  } catch (const YAML::ParserException& e) {
    throw Error(ErrorCode::ConfigError,
                fmt::format("{}:{}: {}", source_name, e.mark.line + 1, e.msg));
  }
  const ConfigReader r(source_name);
  if (!root.IsMap()) throw Error(ErrorCode::ConfigError, fmt::format("{}: expected a mapping at top level", source_name));
  r.map(root, "", {"seed", "dims", "coupling", "transition", "noise", "priors", "inference"});

  const auto seed = RandomSeed{r.scalar<std::uint64_t>(r.require(root, "", "seed"), "seed")};

  const YAML::Node dn = r.map(r.require(root, "", "dims"), "dims", {"D", "T", "K", "nx", "mx"});
  ModelDims dims;
  dims.D = r.scalar<int>(r.require(dn, "dims", "D"), "dims.D");
  dims.T = r.scalar<int>(r.require(dn, "dims", "T"), "dims.T");
  dims.K = r.scalar<int>(r.require(dn, "dims", "K"), "dims.K");
  dims.nx = r.scalar<int>(r.require(dn, "dims", "nx"), "dims.nx");
  dims.mx = r.scalar<int>(r.require(dn, "dims", "mx"), "dims.mx");
  if (dims.D < 1 || dims.T < 1 || dims.K < 1 || dims.nx < 1 || dims.mx < 1) {
    r.fail(dn, "dims", "every dimension must be >= 1");
  }

  const YAML::Node cn = r.map(r.require(root, "", "coupling"), "coupling", {"source", "A", "B", "weights"});
  const auto source = r.scalar<std::string>(r.require(cn, "coupling", "source"), "coupling.source");
  CouplingSource coupling_source = CouplingSource::Random;
  std::optional<Matrix> A;
  std::optional<Matrix> B;
  if (source == "explicit") {
    coupling_source = CouplingSource::Explicit;
    A = r.matrix(r.require(cn, "coupling", "A"), "coupling.A");
    B = r.matrix(r.require(cn, "coupling", "B"), "coupling.B");
  } else if (source != "random") {
    r.fail(cn["source"], "coupling.source", "expected 'random' or 'explicit'");
  }
  std::optional<Vector> w;
  if (const YAML::Node wn = cn["weights"]; wn) {
    if (wn.IsSequence()) {
      w = r.vector(wn, "coupling.weights");
    } else if (r.scalar<std::string>(wn, "coupling.weights") != "uniform") {
      r.fail(wn, "coupling.weights", "expected 'uniform' or a list of K weights");
    }
  }

  const YAML::Node tn = r.map(r.require(root, "", "transition"), "transition", {"kind", "F_fine", "F_coarse"});
  const auto kind_name = r.scalar<std::string>(r.require(tn, "transition", "kind"), "transition.kind");
  TransitionKind kind;
  if (kind_name == "linear_gaussian") {
    kind = TransitionKind::linear(r.matrix(r.require(tn, "transition", "F_fine"), "transition.F_fine"),
                                  r.matrix(r.require(tn, "transition", "F_coarse"), "transition.F_coarse"));
  } else if (kind_name != "paper_cos_sin") {
    r.fail(tn["kind"], "transition.kind", "expected 'paper_cos_sin' or 'linear_gaussian'");
  }

  const YAML::Node nn = r.map(r.require(root, "", "noise"), "noise", {"sigma_f", "sigma_c", "sigma_v", "sigma_V"});
  NoiseSpec noise{r.covariance(r.require(nn, "noise", "sigma_f"), "noise.sigma_f", dims.nx),
                  r.covariance_list(r.require(nn, "noise", "sigma_c"), "noise.sigma_c", dims.D, dims.mx),
                  r.covariance(r.require(nn, "noise", "sigma_v"), "noise.sigma_v", dims.nx),
                  r.covariance_list(r.require(nn, "noise", "sigma_V"), "noise.sigma_V", dims.D, dims.mx)};

  const YAML::Node pn = r.map(r.require(root, "", "priors"), "priors", {"fine", "coarse"});
  auto iw = [&](const char* key, int dim) {
    const std::string path = std::string("priors.") + key;
    const YAML::Node node = r.map(r.require(pn, "priors", key), path, {"scale", "dof"});
    IwParams p{r.covariance(r.require(node, path, "scale"), path + ".scale", dim),
               r.scalar<double>(r.require(node, path, "dof"), path + ".dof")};
    if (!p.proper()) r.fail(node["dof"], path + ".dof", fmt::format("must exceed {}", dim - 1));
    return p;
  };
  Priors priors{iw("fine", dims.nx), {}};
  const IwParams coarse_prior = iw("coarse", dims.mx);
  priors.coarse.assign(static_cast<std::size_t>(dims.D), coarse_prior);

  const YAML::Node in = r.map(r.require(root, "", "inference"), "inference",
                              {"particles", "iterations", "burn_in", "thin", "resampling", "dof_mode"});
  ChainConfig chain;
  chain.seed = seed;
  chain.particles = r.scalar<int>(r.require(in, "inference", "particles"), "inference.particles");
  if (chain.particles < 1) r.fail(in["particles"], "inference.particles", "must be >= 1");
  chain.iterations = r.scalar<int>(r.require(in, "inference", "iterations"), "inference.iterations");
  if (chain.iterations < 1) r.fail(in["iterations"], "inference.iterations", "must be >= 1");
  chain.burn_in = r.scalar<double>(r.require(in, "inference", "burn_in"), "inference.burn_in");
  if (!(chain.burn_in >= 0.0 && chain.burn_in < 1.0)) r.fail(in["burn_in"], "inference.burn_in", "must be in [0, 1)");
  chain.thin = r.scalar<int>(r.require(in, "inference", "thin"), "inference.thin");
  if (chain.thin < 1) r.fail(in["thin"], "inference.thin", "must be >= 1");
  const auto resampling = r.scalar<std::string>(r.require(in, "inference", "resampling"), "inference.resampling");
  if (resampling == "systematic") {
    chain.resampling = ResamplingScheme::Systematic;
  } else if (resampling != "multinomial") {
    r.fail(in["resampling"], "inference.resampling", "expected 'multinomial' or 'systematic'");
  }
  const auto dof_mode = r.scalar<std::string>(r.require(in, "inference", "dof_mode"), "inference.dof_mode");
  if (dof_mode == "strict_paper") {
    chain.dof_mode = DofMode::StrictPaper;
  } else if (dof_mode != "full_count") {
    r.fail(in["dof_mode"], "inference.dof_mode", "expected 'full_count' or 'strict_paper'");
  }

  RunConfig config{dims,  coupling_source,  std::move(A),     std::move(B), std::move(w),
                   std::move(kind), std::move(noise), std::move(priors), chain,  seed};
  try {
    validate(config);
  } catch (const Error& e) {
    throw Error(ErrorCode::ConfigError, fmt::format("{}: {}", source_name, e.message()));
  }
  return config;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, fmt::format("cannot open config '{}'", path.string()));
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str(), path.string());
}

}  // namespace mspgas
