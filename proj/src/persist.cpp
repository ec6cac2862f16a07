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

#include "mspgas/persist.hpp"

#include <cinttypes>
#include <fstream>
#include <sstream>

#include <fmt/format.h>

#include "mspgas/error.hpp"

namespace mspgas {

using json = nlohmann::ordered_json;

namespace {

// ---------------------------------------------------------------------------
// Eigen <-> JSON. Matrices are arrays of rows; trajectories are arrays of
// state vectors in time order.

json matrix_to_json(const Matrix& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

json vector_to_json(const Vector& v) {
  json out = json::array();
  for (double x : v) out.push_back(x);
  return out;
}

json columns_to_json(const Matrix& m) {
  json out = json::array();
  for (Eigen::Index j = 0; j < m.cols(); ++j) out.push_back(vector_to_json(m.col(j)));
  return out;
}

[[noreturn]] void schema_error(const std::string& what) {
  throw Error(ErrorCode::SchemaVersionMismatch, what);
}

const json& at(const json& j, const char* key) {
  if (!j.is_object() || !j.contains(key)) schema_error(fmt::format("missing key '{}'", key));
  return j.at(key);
}

double number(const json& j) {
  if (!j.is_number()) schema_error("expected a number");
  return j.get<double>();
}

Vector vector_from_json(const json& j) {
  if (!j.is_array()) schema_error("expected an array of numbers");
  Vector v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) v(static_cast<Eigen::Index>(i)) = number(j[i]);
  return v;
}

Matrix matrix_from_json(const json& j) {
  if (!j.is_array() || j.empty()) schema_error("expected a nonempty array of rows");
  const auto rows = static_cast<Eigen::Index>(j.size());
  const auto cols = static_cast<Eigen::Index>(j[0].size());
  Matrix m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    const Vector row = vector_from_json(j[static_cast<std::size_t>(i)]);
    if (row.size() != cols) schema_error("ragged matrix");
    m.row(i) = row.transpose();
  }
  return m;
}

Matrix columns_from_json(const json& j, Eigen::Index dim) {
  if (!j.is_array()) schema_error("expected an array of vectors");
  Matrix m(dim, static_cast<Eigen::Index>(j.size()));
  for (std::size_t c = 0; c < j.size(); ++c) {
    const Vector v = vector_from_json(j[c]);
    if (v.size() != dim) schema_error("state vector has the wrong dimension");
    m.col(static_cast<Eigen::Index>(c)) = v;
  }
  return m;
}

SpdMatrix spd_from_json(const json& j) {
  try {
    return SpdMatrix(matrix_from_json(j));
  } catch (const Error& e) {
    if (e.code() == ErrorCode::SchemaVersionMismatch) throw;
    schema_error(fmt::format("invalid covariance: {}", e.message()));
  }
}

json spd_list_to_json(const std::vector<SpdMatrix>& list) {
  json out = json::array();
  for (const auto& m : list) out.push_back(matrix_to_json(m.matrix()));
  return out;
}

std::vector<SpdMatrix> spd_list_from_json(const json& j) {
  if (!j.is_array()) schema_error("expected an array of matrices");
  std::vector<SpdMatrix> out;
  for (const auto& m : j) out.push_back(spd_from_json(m));
  return out;
}

json dims_to_json(const ModelDims& dims) {
  return json{{"D", dims.D}, {"T", dims.T}, {"K", dims.K}, {"nx", dims.nx}, {"mx", dims.mx}};
}

int integer(const json& j) {
  if (!j.is_number_integer()) schema_error("expected an integer");
  return j.get<int>();
}

ModelDims dims_from_json(const json& j) {
  return ModelDims{integer(at(j, "D")), integer(at(j, "T")), integer(at(j, "K")),
                   integer(at(j, "nx")), integer(at(j, "mx"))};
}

json kind_to_json(const TransitionKind& kind) {
  json out{{"kind", to_string(kind.family)}};
  if (kind.family == TransitionFamily::LinearGaussian) {
    out["F_fine"] = matrix_to_json(kind.F_fine);
    out["F_coarse"] = matrix_to_json(kind.F_coarse);
  }
  return out;
}

TransitionKind kind_from_json(const json& j) {
  const std::string name = at(j, "kind").get<std::string>();
  if (name == "paper_cos_sin") return TransitionKind::paper();
  if (name == "linear_gaussian") {
    return TransitionKind::linear(matrix_from_json(at(j, "F_fine")), matrix_from_json(at(j, "F_coarse")));
  }
  schema_error(fmt::format("unknown transition kind '{}'", name));
}

json noise_to_json(const NoiseSpec& noise) {
  return json{{"sigma_f", matrix_to_json(noise.sigma_f.matrix())},
              {"sigma_c", spd_list_to_json(noise.sigma_c)},
              {"sigma_v", matrix_to_json(noise.sigma_v.matrix())},
              {"sigma_V", spd_list_to_json(noise.sigma_V)}};
}

NoiseSpec noise_from_json(const json& j) {
  return NoiseSpec{spd_from_json(at(j, "sigma_f")), spd_list_from_json(at(j, "sigma_c")),
                   spd_from_json(at(j, "sigma_v")), spd_list_from_json(at(j, "sigma_V"))};
}

json iw_to_json(const IwParams& p) {
  return json{{"scale", matrix_to_json(p.scale.matrix())}, {"dof", p.dof}};
}

IwParams iw_from_json(const json& j) {
  return IwParams{spd_from_json(at(j, "scale")), number(at(j, "dof"))};
}

json trajectories_to_json(const Trajectories& traj) {
  json fine = json::array();
  for (const auto& blocks : traj.fine) {
    json per_d = json::array();
    for (const auto& block : blocks) per_d.push_back(columns_to_json(block));
    fine.push_back(std::move(per_d));
  }
  json coarse = json::array();
  for (const auto& m : traj.coarse) coarse.push_back(columns_to_json(m));
  return json{{"fine", std::move(fine)}, {"coarse", std::move(coarse)}};
}

Trajectories trajectories_from_json(const json& j, const ModelDims& dims) {
  Trajectories out;
  const json& fine = at(j, "fine");
  const json& coarse = at(j, "coarse");
  if (!fine.is_array() || !coarse.is_array()) schema_error("trajectories must be arrays");
  for (const auto& per_d : fine) {
    if (!per_d.is_array()) schema_error("fine trajectories must be arrays");
    std::vector<Matrix> blocks;
    for (const auto& block : per_d) blocks.push_back(columns_from_json(block, dims.nx));
    out.fine.push_back(std::move(blocks));
  }
  for (const auto& m : coarse) out.coarse.push_back(columns_from_json(m, dims.mx));
  try {
    check_shape(out, dims);
  } catch (const Error& e) {
    schema_error(e.message());
  }
  return out;
}

ResamplingScheme resampling_from_string(const std::string& s) {
  if (s == "multinomial") return ResamplingScheme::Multinomial;
  if (s == "systematic") return ResamplingScheme::Systematic;
  throw Error(ErrorCode::ConfigError, fmt::format("unknown resampling scheme '{}'", s));
}

DofMode dof_mode_from_string(const std::string& s) {
  if (s == "full_count") return DofMode::FullCount;
  if (s == "strict_paper") return DofMode::StrictPaper;
  throw Error(ErrorCode::ConfigError, fmt::format("unknown dof mode '{}'", s));
}

// ---------------------------------------------------------------------------
// Container.

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, fmt::format("cannot open '{}' for reading", path.string()));
  std::ostringstream buf;
  buf << in.rdbuf();
  if (in.bad()) throw Error(ErrorCode::IoError, fmt::format("error reading '{}'", path.string()));
  return buf.str();
}

void write_file(const std::filesystem::path& path, std::string_view contents) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::IoError, fmt::format("cannot open '{}' for writing", path.string()));
  out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
  out.close();
  if (!out) throw Error(ErrorCode::IoError, fmt::format("error writing '{}'", path.string()));
}

void write_artifact(const std::filesystem::path& path, std::string_view schema, const std::string& body) {
  write_file(path, fmt::format("{} fnv1a64={} bytes={}\n{}", schema, fnv1a64_hex(body), body.size(), body));
}

json read_artifact(const std::filesystem::path& path, std::string_view schema) {
  const std::string contents = read_file(path);
  const std::string where = path.string();
  const std::size_t eol = contents.find('\n');
  const std::string header = contents.substr(0, eol);

  const std::string family(schema.substr(0, schema.find('/') + 1));
  const std::size_t space = header.find(' ');
  const std::string tag = header.substr(0, space);
  if (tag != schema) {
    if (tag.rfind(family, 0) == 0 && eol != std::string::npos) {
      throw Error(ErrorCode::SchemaVersionMismatch,
                  fmt::format("'{}' has schema '{}', expected '{}'", where, tag, schema));
    }
    if (contents.empty() || std::string_view(schema).rfind(tag, 0) == 0) {
      throw Error(ErrorCode::ChecksumMismatch, fmt::format("'{}' is truncated", where));
    }
    throw Error(ErrorCode::SchemaVersionMismatch,
                fmt::format("'{}' is not a {} file (found '{}')", where, schema, tag));
  }
  char hex[17] = {};
  unsigned long long declared = 0;
  if (eol == std::string::npos || space == std::string::npos ||
      std::sscanf(header.c_str() + space, " fnv1a64=%16[0-9a-f] bytes=%llu", hex, &declared) != 2) {
    throw Error(ErrorCode::ChecksumMismatch, fmt::format("'{}' has a damaged header", where));
  }
  const std::string body = contents.substr(eol + 1);
  if (body.size() != declared || fnv1a64_hex(body) != hex) {
    throw Error(ErrorCode::ChecksumMismatch,
                fmt::format("'{}' body does not match its checksum ({} of {} bytes present)", where,
                            body.size(), declared));
  }
  try {
    return json::parse(body);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::SchemaVersionMismatch, fmt::format("'{}': {}", where, e.what()));
  }
}

template <typename F>
auto with_schema_context(const std::filesystem::path& path, F&& f) {
  try {
    return f();
  } catch (const Error& e) {
    if (e.code() != ErrorCode::SchemaVersionMismatch) throw;
    throw Error(e.code(), fmt::format("'{}': {}", path.string(), e.message()));
  } catch (const json::exception& e) {
    throw Error(ErrorCode::SchemaVersionMismatch, fmt::format("'{}': {}", path.string(), e.what()));
  }
}

std::string dump(const json& j) { return j.dump(1) + "\n"; }

json dataset_to_json(const Dataset& data) {
  json init_fine = json::array();
  json init_coarse = json::array();
  for (const auto& v : data.init.fine) init_fine.push_back(vector_to_json(v));
  for (const auto& v : data.init.coarse) init_coarse.push_back(vector_to_json(v));
  const CouplingSpec& c = data.model.coupling;
  return json{{"seed", data.seed.value},
              {"dims", dims_to_json(data.dims())},
              {"coupling", {{"A", matrix_to_json(c.A)}, {"B", matrix_to_json(c.B)}, {"w", vector_to_json(c.w)}}},
              {"transition", kind_to_json(data.model.kind)},
              {"noise", noise_to_json(data.true_noise)},
              {"init", {{"fine", std::move(init_fine)}, {"coarse", std::move(init_coarse)}}},
              {"states", trajectories_to_json(data.states)},
              {"obs", trajectories_to_json(data.obs)}};
}

Dataset dataset_from_json(const json& j) {
  const ModelDims dims = dims_from_json(at(j, "dims"));
  const json& c = at(j, "coupling");
  Model model{dims, CouplingSpec{matrix_from_json(at(c, "A")), matrix_from_json(at(c, "B")),
                                 vector_from_json(at(c, "w"))},
              kind_from_json(at(j, "transition"))};
  NoiseSpec noise = noise_from_json(at(j, "noise"));
  try {
    validate(model);
    validate(dims, noise);
  } catch (const Error& e) {
    schema_error(e.message());
  }
  InitialStates init;
  for (const auto& v : at(at(j, "init"), "fine")) init.fine.push_back(vector_from_json(v));
  for (const auto& v : at(at(j, "init"), "coarse")) init.coarse.push_back(vector_from_json(v));
  if (static_cast<int>(init.fine.size()) != dims.D || static_cast<int>(init.coarse.size()) != dims.D) {
    schema_error("initial states need one vector per individual");
  }
  const json& seed = at(j, "seed");
  if (!seed.is_number_unsigned()) schema_error("seed must be an unsigned integer");
  return Dataset{std::move(model),
                 std::move(noise),
                 std::move(init),
                 trajectories_from_json(at(j, "states"), dims),
                 trajectories_from_json(at(j, "obs"), dims),
                 RandomSeed{seed.get<std::uint64_t>()}};
}

}  // namespace

std::string fnv1a64_hex(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return fmt::format("{:016x}", h);
}

json to_json(const RunConfig& config) {
  json coupling{{"source", config.coupling_source == CouplingSource::Random ? "random" : "explicit"}};
  if (config.A) coupling["A"] = matrix_to_json(*config.A);
  if (config.B) coupling["B"] = matrix_to_json(*config.B);
  coupling["weights"] = config.w ? vector_to_json(*config.w) : json("uniform");
  json coarse_priors = json::array();
  for (const auto& p : config.priors.coarse) coarse_priors.push_back(iw_to_json(p));
  const ChainConfig& chain = config.chain;
  return json{{"seed", config.seed.value},
              {"dims", dims_to_json(config.dims)},
              {"coupling", std::move(coupling)},
              {"transition", kind_to_json(config.kind)},
              {"noise", noise_to_json(config.noise)},
              {"priors", {{"fine", iw_to_json(config.priors.fine)}, {"coarse", std::move(coarse_priors)}}},
              {"inference",
               {{"particles", chain.particles},
                {"iterations", chain.iterations},
                {"burn_in", chain.burn_in},
                {"thin", chain.thin},
                {"resampling", to_string(chain.resampling)},
                {"dof_mode", to_string(chain.dof_mode)},
                {"seed", chain.seed.value}}}};
}

RunConfig run_config_from_json(const json& j) {
  const json& coupling = at(j, "coupling");
  const std::string source = at(coupling, "source").get<std::string>();
  std::optional<Matrix> A;
  std::optional<Matrix> B;
  std::optional<Vector> w;
  if (coupling.contains("A")) A = matrix_from_json(coupling["A"]);
  if (coupling.contains("B")) B = matrix_from_json(coupling["B"]);
  if (at(coupling, "weights").is_array()) w = vector_from_json(coupling["weights"]);

  const json& priors = at(j, "priors");
  Priors p{iw_from_json(at(priors, "fine")), {}};
  for (const auto& c : at(priors, "coarse")) p.coarse.push_back(iw_from_json(c));

  const json& inf = at(j, "inference");
  ChainConfig chain;
  chain.particles = integer(at(inf, "particles"));
  chain.iterations = integer(at(inf, "iterations"));
  chain.burn_in = number(at(inf, "burn_in"));
  chain.thin = integer(at(inf, "thin"));
  chain.resampling = resampling_from_string(at(inf, "resampling").get<std::string>());
  chain.dof_mode = dof_mode_from_string(at(inf, "dof_mode").get<std::string>());
  chain.seed = RandomSeed{at(inf, "seed").get<std::uint64_t>()};

  return RunConfig{dims_from_json(at(j, "dims")),
                   source == "random" ? CouplingSource::Random : CouplingSource::Explicit,
                   std::move(A),
                   std::move(B),
                   std::move(w),
                   kind_from_json(at(j, "transition")),
                   noise_from_json(at(j, "noise")),
                   std::move(p),
                   chain,
                   RandomSeed{at(j, "seed").get<std::uint64_t>()}};
}

std::string serialize_dataset_body(const Dataset& data) { return dump(dataset_to_json(data)); }

std::string dataset_checksum(const Dataset& data) { return fnv1a64_hex(serialize_dataset_body(data)); }

void write_dataset(const std::filesystem::path& path, const Dataset& data) {
  write_artifact(path, kDatasetSchema, serialize_dataset_body(data));
}

Dataset read_dataset(const std::filesystem::path& path) {
  const json j = read_artifact(path, kDatasetSchema);
  return with_schema_context(path, [&] { return dataset_from_json(j); });
}

void write_chain(const std::filesystem::path& path, const ChainFile& file) {
  const Chain& chain = file.chain;
  json sigma_f = json::array();
  for (const auto& m : chain.sigma_f_draws) sigma_f.push_back(matrix_to_json(m.matrix()));
  json sigma_c = json::array();
  for (const auto& per_r : chain.sigma_c_draws) sigma_c.push_back(spd_list_to_json(per_r));
  json refs = json::array();
  for (const auto& ref : chain.state_refs) refs.push_back(trajectories_to_json(ref));
  json body{{"config", to_json(file.config)},
            {"dataset_checksum", file.dataset_checksum},
            {"chain",
             {{"iterations", chain.iterations()},
              {"sigma_f", std::move(sigma_f)},
              {"sigma_c", std::move(sigma_c)},
              {"state_iterations", chain.state_iterations},
              {"state_refs", std::move(refs)},
              {"initial_reference", trajectories_to_json(chain.initial_reference)}}}};
  write_artifact(path, kChainSchema, dump(body));
}

ChainFile read_chain(const std::filesystem::path& path) {
  const json j = read_artifact(path, kChainSchema);
  return with_schema_context(path, [&] {
    RunConfig config = run_config_from_json(at(j, "config"));
    const json& c = at(j, "chain");
    Chain chain{config.chain, {}, {}, {}, {}, {}};
    for (const auto& m : at(c, "sigma_f")) chain.sigma_f_draws.push_back(spd_from_json(m));
    for (const auto& per_r : at(c, "sigma_c")) chain.sigma_c_draws.push_back(spd_list_from_json(per_r));
    for (const auto& it : at(c, "state_iterations")) chain.state_iterations.push_back(integer(it));
    for (const auto& ref : at(c, "state_refs")) {
      chain.state_refs.push_back(trajectories_from_json(ref, config.dims));
    }
    chain.initial_reference = trajectories_from_json(at(c, "initial_reference"), config.dims);
    if (chain.sigma_f_draws.size() != chain.sigma_c_draws.size() ||
        static_cast<int>(chain.sigma_f_draws.size()) != integer(at(c, "iterations")) ||
        chain.state_iterations.size() != chain.state_refs.size()) {
      schema_error("chain draw counts are inconsistent");
    }
    return ChainFile{std::move(config), at(j, "dataset_checksum").get<std::string>(), std::move(chain)};
  });
}

// ---------------------------------------------------------------------------
// CSV.

void write_coarse_traj_csv(std::ostream& out, const Trajectories& estimate, const Trajectories& truth) {
  out << "d,t,dim,true,estimated\n";
  for (std::size_t d = 0; d < truth.coarse.size(); ++d) {
    const Matrix& tr = truth.coarse[d];
    for (Eigen::Index t = 0; t < tr.cols(); ++t)
      for (Eigen::Index m = 0; m < tr.rows(); ++m)
        out << fmt::format("{},{},{},{},{}\n", d, t, m, tr(m, t), estimate.coarse[d](m, t));
  }
}

void write_fine_traj_csv(std::ostream& out, const Trajectories& estimate, const Trajectories& truth) {
  out << "d,t,k,dim,true,estimated\n";
  for (std::size_t d = 0; d < truth.fine.size(); ++d)
    for (std::size_t t = 0; t < truth.fine[d].size(); ++t) {
      const Matrix& tr = truth.fine[d][t];
      for (Eigen::Index k = 0; k < tr.cols(); ++k)
        for (Eigen::Index n = 0; n < tr.rows(); ++n)
          out << fmt::format("{},{},{},{},{},{}\n", d, t, k, n, tr(n, k), estimate.fine[d][t](n, k));
    }
}

void write_trace_csv(std::ostream& out, const Chain& chain) {
  out << "target,d,dim,iteration,value\n";
  if (chain.iterations() == 0) return;
  const int first = chain.burn_in_iterations();
  const Eigen::Index nx = chain.sigma_f_draws.front().dim();
  for (Eigen::Index n = 0; n < nx; ++n)
    for (int r = first; r < chain.iterations(); ++r)
      out << fmt::format("sigma_f,-1,{},{},{}\n", n, r, chain.sigma_f_draws[r](n, n));
  const std::size_t D = chain.sigma_c_draws.front().size();
  for (std::size_t d = 0; d < D; ++d) {
    const Eigen::Index mx = chain.sigma_c_draws.front()[d].dim();
    for (Eigen::Index m = 0; m < mx; ++m)
      for (int r = first; r < chain.iterations(); ++r)
        out << fmt::format("sigma_c,{},{},{},{}\n", d, m, r, chain.sigma_c_draws[r][d](m, m));
  }
}

void write_rmse_coarse_csv(std::ostream& out, const RmseTable& table) {
  out << "d";
  for (Eigen::Index m = 0; m < table.values.cols(); ++m) out << ",dim_" << m;
  out << "\n";
  for (Eigen::Index d = 0; d < table.values.rows(); ++d) {
    out << d;
    for (Eigen::Index m = 0; m < table.values.cols(); ++m) out << fmt::format(",{}", table.values(d, m));
    out << "\n";
  }
}

void write_rmse_fine_csv(std::ostream& out, const std::vector<RmseTable>& tables) {
  out << "d,t";
  const Eigen::Index nx = tables.empty() ? 0 : tables.front().values.cols();
  for (Eigen::Index n = 0; n < nx; ++n) out << ",dim_" << n;
  out << "\n";
  for (std::size_t d = 0; d < tables.size(); ++d) {
    const Matrix& v = tables[d].values;
    for (Eigen::Index t = 0; t < v.rows(); ++t) {
      out << d << "," << t;
      for (Eigen::Index n = 0; n < v.cols(); ++n) out << fmt::format(",{}", v(t, n));
      out << "\n";
    }
  }
}

void export_csv(const Chain& chain, const Dataset& data, const std::filesystem::path& out_dir) {
  const Trajectories estimate = posterior_state_mean(chain);
  check_shape(estimate, data.dims());
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) throw Error(ErrorCode::IoError, fmt::format("cannot create '{}': {}", out_dir.string(), ec.message()));

  auto emit = [&](const char* name, auto&& writer) {
    std::ostringstream buf;
    writer(buf);
    write_file(out_dir / name, buf.str());
  };
  emit("coarse_traj.csv", [&](std::ostream& o) { write_coarse_traj_csv(o, estimate, data.states); });
  emit("fine_traj.csv", [&](std::ostream& o) { write_fine_traj_csv(o, estimate, data.states); });
  emit("trace.csv", [&](std::ostream& o) { write_trace_csv(o, chain); });
  emit("rmse_coarse.csv", [&](std::ostream& o) { write_rmse_coarse_csv(o, rmse_coarse(estimate, data.states)); });
  emit("rmse_fine.csv", [&](std::ostream& o) { write_rmse_fine_csv(o, rmse_fine(estimate, data.states)); });
}

}  // namespace mspgas
