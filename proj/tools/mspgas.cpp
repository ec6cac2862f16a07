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

// mspgas command line: simulate -> infer -> report, plus the oracle suite.

#include <chrono>
#include <cstdint>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "mspgas/config.hpp"
#include "mspgas/diagnostics.hpp"
#include "mspgas/error.hpp"
#include "mspgas/gibbs.hpp"
#include "mspgas/persist.hpp"
#include "mspgas/simulate.hpp"
#include "mspgas/validation/oracles.hpp"

namespace fs = std::filesystem;
using namespace mspgas;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitNumerical = 3;
constexpr int kExitIo = 4;

// Weight ESS (fraction of N) below which an iteration counts as degenerate.
constexpr double kDegenerateEss = 0.05;

int exit_code(ErrorCode code) {
  switch (code) {
    case ErrorCode::ConfigError:
    case ErrorCode::InvalidArgument:
    case ErrorCode::DimensionMismatch:
    case ErrorCode::IndexOutOfRange:
      return kExitConfig;
    case ErrorCode::IoError:
    case ErrorCode::SchemaVersionMismatch:
    case ErrorCode::ChecksumMismatch:
      return kExitIo;
    default:
      return kExitNumerical;
  }
}

void log(const std::string& line) { fmt::print(stderr, "{}\n", line); }

int cmd_simulate(const fs::path& config_path, const fs::path& out, std::optional<std::uint64_t> seed) {
  RunConfig config = load_config(config_path);
  if (seed) {
    config.seed = RandomSeed{*seed};
    config.chain.seed = config.seed;
  }
  validate(config);
  const Model model = make_model(config);
  const Dataset data = generate(model, config.noise, std::nullopt, config.seed);
  write_dataset(out, data);
  log(fmt::format("simulate: D={} T={} K={} seed={} -> {}", model.dims.D, model.dims.T, model.dims.K,
                  config.seed.value, out.string()));
  return kExitOk;
}

void check_against_dataset(const RunConfig& config, const Dataset& data) {
  const ModelDims& a = config.dims;
  const ModelDims& b = data.dims();
  if (a.D != b.D || a.T != b.T || a.K != b.K || a.nx != b.nx || a.mx != b.mx) {
    throw Error(ErrorCode::DimensionMismatch,
                fmt::format("config dims (D={} T={} K={} nx={} mx={}) differ from dataset dims "
                            "(D={} T={} K={} nx={} mx={})",
                            a.D, a.T, a.K, a.nx, a.mx, b.D, b.T, b.K, b.nx, b.mx));
  }
}

int cmd_infer(const fs::path& dataset_path, const fs::path& config_path, const fs::path& out) {
  const RunConfig config = load_config(config_path);
  validate(config);
  const Dataset data = read_dataset(dataset_path);
  check_against_dataset(config, data);

  const ChainConfig& cc = config.chain;
  const int every = std::max(1, cc.iterations / 20);
  int degenerate = 0;
  const auto start = std::chrono::steady_clock::now();
  auto progress = [&](const IterationReport& rep) {
    const double worst = std::min(rep.kernel.min_fine_ess, rep.kernel.min_coarse_ess);
    if (worst < kDegenerateEss) ++degenerate;
    const int done = rep.iteration + 1;
    if (done % every == 0 || done == cc.iterations) {
      const double secs =
          std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
      log(fmt::format("infer: iteration {}/{} ({:.1f}s) min weight ESS fine {:.3f} coarse {:.3f}",
                      done, cc.iterations, secs, rep.kernel.min_fine_ess, rep.kernel.min_coarse_ess));
      if (degenerate > 0) {
        log(fmt::format("infer: warning: {} of the last {} iterations had a weight ESS below {:.0f}% of N",
                        degenerate, every, 100 * kDegenerateEss));
      }
      degenerate = 0;
    }
  };

  log(fmt::format("infer: N={} R={} burn_in={} thin={} resampling={} dof_mode={} seed={}", cc.particles,
                  cc.iterations, cc.burn_in, cc.thin, to_string(cc.resampling), to_string(cc.dof_mode),
                  cc.seed.value));
  Chain chain = run_chain(data, config.priors, cc, progress);
  write_chain(out, ChainFile{config, dataset_checksum(data), std::move(chain)});
  log(fmt::format("infer: wrote {}", out.string()));
  return kExitOk;
}

int cmd_report(const fs::path& chain_path, const fs::path& dataset_path, const fs::path& out_dir) {
  const ChainFile file = read_chain(chain_path);
  const Dataset data = read_dataset(dataset_path);
  const std::string checksum = dataset_checksum(data);
  if (checksum != file.dataset_checksum) {
    throw Error(ErrorCode::ChecksumMismatch,
                fmt::format("chain '{}' was run on dataset {} but '{}' is {}", chain_path.string(),
                            file.dataset_checksum, dataset_path.string(), checksum));
  }
  export_csv(file.chain, data, out_dir);
  log(fmt::format("report: wrote 5 CSV files to {}", out_dir.string()));
  return kExitOk;
}

bool print_report(const validation::CheckReport& report) {
  fmt::print("{} {}\n", report.passed ? "PASS" : "FAIL", report.name);
  for (const auto& m : report.measurements) {
    fmt::print("  {} {} = {:.4g} (tolerance {:.4g})\n", m.passed ? "ok  " : "FAIL", m.name, m.value,
               m.tolerance);
  }
  if (!report.note.empty()) fmt::print("  note: {}\n", report.note);
  return report.passed;
}

int cmd_validate(DofMode mode) {
  bool ok = true;
  const validation::KalmanResult kalman = validation::kalman_equivalence({});
  ok &= print_report(kalman.means);
  ok &= print_report(kalman.variances);
  validation::ConjugacySettings conj;
  conj.mode = mode;
  ok &= print_report(validation::conjugacy_recovery(conj));
  ok &= print_report(validation::degeneracy_identities());
  fmt::print("{}\n", ok ? "all checks passed" : "some checks failed");
  std::fflush(stdout);
  return ok ? kExitOk : kExitNumerical;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multiscale state-space simulation and particle Gibbs inference"};
  app.require_subcommand(1);

  fs::path config_path, out_path, dataset_path, chain_path, out_dir;
  std::optional<std::uint64_t> seed;
  std::string dof_mode = "full-count";

  auto* simulate = app.add_subcommand("simulate", "Simulate a dataset from a run configuration");
  simulate->add_option("--config", config_path, "Run configuration (YAML)")->required();
  simulate->add_option("--out", out_path, "Dataset file to write")->required();
  simulate->add_option("--seed", seed, "Override the configured seed");

  auto* infer = app.add_subcommand("infer", "Run the particle Gibbs sampler on a dataset");
  infer->add_option("--dataset", dataset_path, "Dataset file")->required();
  infer->add_option("--config", config_path, "Run configuration (YAML)")->required();
  infer->add_option("--out", out_path, "Chain file to write")->required();

  auto* report = app.add_subcommand("report", "Export RMSE tables, trajectories and traces as CSV");
  report->add_option("--chain", chain_path, "Chain file")->required();
  report->add_option("--dataset", dataset_path, "Dataset the chain was run on")->required();
  report->add_option("--out-dir", out_dir, "Output directory")->required();

  auto* validate_cmd = app.add_subcommand("validate", "Run the built-in oracle checks");
  validate_cmd->add_option("--dof-mode", dof_mode, "Degrees-of-freedom update")
      ->check(CLI::IsMember({"full-count", "strict-paper"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (*simulate) return cmd_simulate(config_path, out_path, seed);
    if (*infer) return cmd_infer(dataset_path, config_path, out_path);
    if (*report) return cmd_report(chain_path, dataset_path, out_dir);
    return cmd_validate(dof_mode == "strict-paper" ? DofMode::StrictPaper : DofMode::FullCount);
  } catch (const Error& e) {
    log(fmt::format("error: {}", e.what()));
    return exit_code(e.code());
  } catch (const std::exception& e) {
    log(fmt::format("error: {}", e.what()));
    return kExitIo;
  }
}
