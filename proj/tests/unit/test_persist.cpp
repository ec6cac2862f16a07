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

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "mspgas/error.hpp"
#include "mspgas/persist.hpp"
#include "support/fixtures.hpp"

namespace mspgas {
namespace {

namespace fs = std::filesystem;

class Persist : public ::testing::Test {
 protected:
  void SetUp() override {
    const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
    dir_ = fs::temp_directory_path() / (std::string("mspgas_persist_") + info->name());
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }
  fs::path path(const std::string& name) const { return dir_ / name; }
  fs::path dir_;
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

void spit(const fs::path& p, const std::string& s) {
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  out << s;
}

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "expected an Error";
  return ErrorCode::InvalidArgument;
}

Dataset seeded_dataset(std::uint64_t seed) {
  const RunConfig c = testing::sized_config(seed, 2, 3, 4);
  return generate(make_model(c), c.noise, std::nullopt, c.seed);
}

void expect_same_dataset(const Dataset& a, const Dataset& b) {
  EXPECT_EQ(a.dims(), b.dims());
  EXPECT_EQ(a.model.coupling.A, b.model.coupling.A);
  EXPECT_EQ(a.model.coupling.B, b.model.coupling.B);
  EXPECT_EQ(a.model.coupling.w, b.model.coupling.w);
  EXPECT_EQ(a.model.kind.family, b.model.kind.family);
  EXPECT_EQ(a.true_noise.sigma_f, b.true_noise.sigma_f);
  EXPECT_EQ(a.true_noise.sigma_c, b.true_noise.sigma_c);
  EXPECT_EQ(a.true_noise.sigma_v, b.true_noise.sigma_v);
  EXPECT_EQ(a.true_noise.sigma_V, b.true_noise.sigma_V);
  EXPECT_EQ(a.init, b.init);
  EXPECT_EQ(a.states, b.states);
  EXPECT_EQ(a.obs, b.obs);
  EXPECT_EQ(a.seed, b.seed);
}

TEST_F(Persist, DatasetRoundTripIsExact) {
  const Dataset data = seeded_dataset(1);
  write_dataset(path("d.json"), data);
  const Dataset back = read_dataset(path("d.json"));
  expect_same_dataset(data, back);
  EXPECT_EQ(dataset_checksum(back), dataset_checksum(data));
}

TEST_F(Persist, LinearKindRoundTrip) {
  RunConfig c = testing::sized_config(2, 1, 2, 3);
  c.kind = TransitionKind::linear(Matrix::Identity(3, 3) * 0.3, Matrix::Identity(3, 3) * 0.1);
  const Dataset data = generate(make_model(c), c.noise, std::nullopt, c.seed);
  write_dataset(path("d.json"), data);
  const Dataset back = read_dataset(path("d.json"));
  EXPECT_EQ(back.model.kind.F_fine, data.model.kind.F_fine);
  EXPECT_EQ(back.model.kind.F_coarse, data.model.kind.F_coarse);
  expect_same_dataset(data, back);
}

TEST_F(Persist, SameSeedByteIdentical) {
  write_dataset(path("a.json"), seeded_dataset(42));
  write_dataset(path("b.json"), seeded_dataset(42));
  EXPECT_EQ(slurp(path("a.json")), slurp(path("b.json")));
  EXPECT_EQ(slurp(path("a.json")).rfind("mspgas.dataset/1 fnv1a64=", 0), 0u);
}

TEST_F(Persist, TruncatedFile) {
  write_dataset(path("d.json"), seeded_dataset(3));
  const std::string full = slurp(path("d.json"));
  for (std::size_t keep : {full.size() - 1, full.size() / 2, std::size_t{30}, std::size_t{5}, std::size_t{0}}) {
    spit(path("t.json"), full.substr(0, keep));
    EXPECT_EQ(code_of([&] { read_dataset(path("t.json")); }), ErrorCode::ChecksumMismatch) << keep;
  }
}

TEST_F(Persist, FlippedByte) {
  write_dataset(path("d.json"), seeded_dataset(4));
  std::string s = slurp(path("d.json"));
  s[s.size() - 40] = s[s.size() - 40] == '1' ? '2' : '1';
  spit(path("d.json"), s);
  EXPECT_EQ(code_of([&] { read_dataset(path("d.json")); }), ErrorCode::ChecksumMismatch);
}

TEST_F(Persist, WrongSchema) {
  write_dataset(path("d.json"), seeded_dataset(5));
  std::string s = slurp(path("d.json"));
  spit(path("v2.json"), "mspgas.dataset/2" + s.substr(s.find(' ')));
  EXPECT_EQ(code_of([&] { read_dataset(path("v2.json")); }), ErrorCode::SchemaVersionMismatch);
  EXPECT_EQ(code_of([&] { read_chain(path("d.json")); }), ErrorCode::SchemaVersionMismatch);
  EXPECT_EQ(code_of([&] { read_dataset(path("missing.json")); }), ErrorCode::IoError);
}

ChainFile small_chain_file(const Dataset& data, std::uint64_t seed) {
  RunConfig c = testing::sized_config(seed, 2, 3, 4);
  c.chain.particles = 10;
  c.chain.iterations = 6;
  c.chain.thin = 2;
  c.chain.burn_in = 0.5;
  return ChainFile{c, dataset_checksum(data), run_chain(data, c.priors, c.chain)};
}

TEST_F(Persist, ChainRoundTripAndEmbeddedConfig) {
  const Dataset data = seeded_dataset(6);
  const ChainFile file = small_chain_file(data, 6);
  write_chain(path("c.json"), file);
  const ChainFile back = read_chain(path("c.json"));
  EXPECT_EQ(back.chain, file.chain);
  EXPECT_EQ(back.dataset_checksum, file.dataset_checksum);
  EXPECT_EQ(to_json(back.config), to_json(file.config));
  EXPECT_EQ(back.config.chain, file.config.chain);
  write_chain(path("c2.json"), back);
  EXPECT_EQ(slurp(path("c.json")), slurp(path("c2.json")));
}

TEST_F(Persist, ChainCorruption) {
  const Dataset data = seeded_dataset(7);
  write_chain(path("c.json"), small_chain_file(data, 7));
  const std::string s = slurp(path("c.json"));
  spit(path("c.json"), s.substr(0, s.size() - 10));
  EXPECT_EQ(code_of([&] { read_chain(path("c.json")); }), ErrorCode::ChecksumMismatch);
}

TEST(RunConfigJson, RoundTrip) {
  RunConfig c = default_config(RandomSeed{77});
  c.coupling_source = CouplingSource::Explicit;
  c.A = Matrix::Identity(3, 3) * 0.1;
  c.B = Matrix::Identity(4, 4) * 0.2;
  c.w = Vector::LinSpaced(20, 1, 2);
  c.chain.resampling = ResamplingScheme::Systematic;
  c.chain.dof_mode = DofMode::StrictPaper;
  const RunConfig back = run_config_from_json(to_json(c));
  EXPECT_EQ(to_json(back), to_json(c));
  EXPECT_EQ(back.chain, c.chain);
  EXPECT_EQ(*back.A, *c.A);
  EXPECT_EQ(*back.w, *c.w);
}

std::vector<std::string> lines(const std::string& s) {
  std::vector<std::string> out;
  std::istringstream in(s);
  for (std::string l; std::getline(in, l);) out.push_back(l);
  return out;
}

TEST_F(Persist, CsvExports) {
  const Dataset data = seeded_dataset(8);
  const ChainFile file = small_chain_file(data, 8);
  export_csv(file.chain, data, path("out"));
  std::vector<std::string> names;
  for (const auto& e : fs::directory_iterator(path("out"))) names.push_back(e.path().filename().string());
  std::sort(names.begin(), names.end());
  EXPECT_EQ(names, (std::vector<std::string>{"coarse_traj.csv", "fine_traj.csv", "rmse_coarse.csv",
                                              "rmse_fine.csv", "trace.csv"}));

  const auto coarse = lines(slurp(path("out/coarse_traj.csv")));
  EXPECT_EQ(coarse.front(), "d,t,dim,true,estimated");
  EXPECT_EQ(coarse.size(), 1u + 2 * 3 * 3);
  const auto fine = lines(slurp(path("out/fine_traj.csv")));
  EXPECT_EQ(fine.front(), "d,t,k,dim,true,estimated");
  EXPECT_EQ(fine.size(), 1u + 2 * 3 * 4 * 3);
  const auto trace_rows = lines(slurp(path("out/trace.csv")));
  EXPECT_EQ(trace_rows.front(), "target,d,dim,iteration,value");
  // 6 iterations, burn-in 3: 3 retained, 3 sigma_f dims + 2 * 3 sigma_c dims.
  EXPECT_EQ(trace_rows.size(), 1u + 3 * (3 + 2 * 3));
  EXPECT_EQ(trace_rows[1].rfind("sigma_f,-1,0,3,", 0), 0u);
  const auto rc = lines(slurp(path("out/rmse_coarse.csv")));
  EXPECT_EQ(rc.front(), "d,dim_0,dim_1,dim_2");
  ASSERT_EQ(rc.size(), 3u);
  EXPECT_EQ(rc[1].rfind("0,", 0), 0u);
  const auto rf = lines(slurp(path("out/rmse_fine.csv")));
  EXPECT_EQ(rf.front(), "d,t,dim_0,dim_1,dim_2");
  EXPECT_EQ(rf.size(), 1u + 2 * 3);

  const std::string before = slurp(path("out/trace.csv")) + slurp(path("out/fine_traj.csv"));
  export_csv(file.chain, data, path("out"));
  EXPECT_EQ(slurp(path("out/trace.csv")) + slurp(path("out/fine_traj.csv")), before);
}

TEST_F(Persist, CoarseCsvValuesMatchTables) {
  const Dataset data = seeded_dataset(9);
  const ChainFile file = small_chain_file(data, 9);
  std::ostringstream out;
  write_rmse_coarse_csv(out, rmse_coarse(posterior_state_mean(file.chain), data.states));
  const auto rows = lines(out.str());
  const RmseTable table = rmse_coarse(posterior_state_mean(file.chain), data.states);
  for (int d = 0; d < 2; ++d) {
    std::istringstream row(rows[d + 1]);
    std::string cell;
    std::getline(row, cell, ',');
    EXPECT_EQ(std::stoi(cell), d);
    for (int m = 0; m < 3; ++m) {
      std::getline(row, cell, ',');
      EXPECT_EQ(std::stod(cell), table.values(d, m));
    }
  }
}

// ---------------------------------------------------------------------------
// Run configuration files.

std::string default_yaml() { return slurp(fs::path(MSPGAS_SOURCE_DIR) / "configs" / "default.yaml"); }

std::string replace(std::string s, const std::string& from, const std::string& to) {
  const auto at = s.find(from);
  EXPECT_NE(at, std::string::npos) << from;
  return s.replace(at, from.size(), to);
}

std::string config_error(const std::string& text) {
  try {
    parse_config(text, "test.yaml");
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::ConfigError);
    return e.what();
  }
  ADD_FAILURE() << "config accepted";
  return {};
}

TEST(ConfigFile, DefaultMatchesReferenceSettings) {
  const RunConfig parsed = parse_config(default_yaml());
  const RunConfig ref = default_config(RandomSeed{1});
  EXPECT_EQ(to_json(parsed), to_json(ref));
}

TEST(ConfigFile, MissingKeyIsNamed) {
  const std::string msg = config_error(replace(default_yaml(), "  thin: 10\n", ""));
  EXPECT_NE(msg.find("inference.thin"), std::string::npos) << msg;
  EXPECT_NE(msg.find("test.yaml"), std::string::npos) << msg;
}

TEST(ConfigFile, UnknownKeyRejectedWithLine) {
  const std::string msg = config_error(replace(default_yaml(), "  thin: 10\n", "  thin: 10\n  thinning: 3\n"));
  EXPECT_NE(msg.find("thinning"), std::string::npos) << msg;
  EXPECT_NE(msg.find("test.yaml:22"), std::string::npos) << msg;
}

TEST(ConfigFile, InvalidValues) {
  EXPECT_NE(config_error(replace(default_yaml(), "particles: 800", "particles: 0")).find("particles"),
            std::string::npos);
  EXPECT_NE(config_error(replace(default_yaml(), "sigma_c: [0.3, 0.5, 0.7, 0.2]", "sigma_c: [0.3, 0.5]"))
                .find("sigma_c"),
            std::string::npos);
  EXPECT_NE(config_error(replace(default_yaml(), "dof: 4", "dof: 1.5")).find("priors.fine.dof"),
            std::string::npos);
  EXPECT_NE(config_error(replace(default_yaml(), "resampling: multinomial", "resampling: stratified"))
                .find("resampling"),
            std::string::npos);
  EXPECT_NE(config_error("seed: [1\n").find("test.yaml"), std::string::npos);
}

TEST(ConfigFile, ExplicitCouplingAndMatrices) {
  std::string text = replace(default_yaml(), "  source: random\n  weights: uniform\n",
                             "  source: explicit\n"
                             "  A: [[0.1, 0, 0], [0, 0.2, 0], [0, 0, 0.3]]\n"
                             "  B: [[0, 0.1, 0, 0], [0, 0, 0, 0], [0, 0, 0, 0], [0, 0, 0, 0.5]]\n");
  text = replace(text, "sigma_f: 0.2", "sigma_f: [[0.2, 0.01, 0], [0.01, 0.2, 0], [0, 0, 0.3]]");
  const RunConfig c = parse_config(text);
  const CouplingSpec spec = materialize_coupling(c);
  EXPECT_EQ(spec.A(1, 1), 0.2);
  EXPECT_EQ(spec.B(3, 3), 0.5);
  EXPECT_EQ(spec.w, Vector::Constant(20, 1.0 / 20));
  EXPECT_EQ(c.noise.sigma_f(0, 1), 0.01);
  EXPECT_EQ(c.noise.sigma_f(2, 2), 0.3);
}

TEST(ConfigFile, LoadFromDisk) {
  const RunConfig c = load_config(fs::path(MSPGAS_SOURCE_DIR) / "configs" / "desk.yaml");
  EXPECT_EQ(c.dims, (ModelDims{4, 10, 10, 3, 3}));
  EXPECT_EQ(c.chain.particles, 200);
  EXPECT_EQ(c.chain.iterations, 500);
  try {
    load_config("/nonexistent/config.yaml");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::IoError);
  }
}

}  // namespace
}  // namespace mspgas
