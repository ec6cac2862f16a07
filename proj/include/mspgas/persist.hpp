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

#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

#include "mspgas/config.hpp"
#include "mspgas/diagnostics.hpp"
#include "mspgas/gibbs.hpp"
#include "mspgas/simulate.hpp"

namespace mspgas {

inline constexpr std::string_view kDatasetSchema = "mspgas.dataset/1";
inline constexpr std::string_view kChainSchema = "mspgas.chain/1";

/// A chain together with the configuration that produced it and the checksum
/// of the dataset it was run on.
struct ChainFile {
  RunConfig config;
  std::string dataset_checksum;
  Chain chain;
};

// Artifact files are one header line
//
//   <schema> fnv1a64=<16 hex digits> bytes=<body length>
//
// followed by a canonical JSON body (fixed key order, shortest round-trip
// doubles). Reading verifies the schema tag, then length and checksum of the
// body, then the structure.

std::string fnv1a64_hex(std::string_view bytes);

nlohmann::ordered_json to_json(const RunConfig& config);
RunConfig run_config_from_json(const nlohmann::ordered_json& j);

std::string serialize_dataset_body(const Dataset& data);
std::string dataset_checksum(const Dataset& data);

void write_dataset(const std::filesystem::path& path, const Dataset& data);
Dataset read_dataset(const std::filesystem::path& path);

void write_chain(const std::filesystem::path& path, const ChainFile& file);
ChainFile read_chain(const std::filesystem::path& path);

/// Reads a YAML (or JSON) run configuration. Errors are ConfigError and name
/// the file, line and key.
RunConfig load_config(const std::filesystem::path& path);
RunConfig parse_config(std::string_view text, std::string_view source_name = "<config>");

// Analysis exports. Individuals, time indices and dimensions are zero-based.

/// d,t,dim,true,estimated
void write_coarse_traj_csv(std::ostream& out, const Trajectories& estimate, const Trajectories& truth);
/// d,t,k,dim,true,estimated
void write_fine_traj_csv(std::ostream& out, const Trajectories& estimate, const Trajectories& truth);
/// target,d,dim,iteration,value over the retained iterations; d is -1 for sigma_f.
void write_trace_csv(std::ostream& out, const Chain& chain);
/// d,dim_0,...,dim_{mx-1}
void write_rmse_coarse_csv(std::ostream& out, const RmseTable& table);
/// d,t,dim_0,...,dim_{nx-1}
void write_rmse_fine_csv(std::ostream& out, const std::vector<RmseTable>& tables);

/// Writes coarse_traj.csv, fine_traj.csv, trace.csv, rmse_coarse.csv and
/// rmse_fine.csv into out_dir (created if needed).
void export_csv(const Chain& chain, const Dataset& data, const std::filesystem::path& out_dir);

}  // namespace mspgas
