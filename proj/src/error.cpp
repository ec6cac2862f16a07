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

#include "mspgas/error.hpp"

namespace mspgas {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::NotPositiveDefinite: return "NotPositiveDefinite";
    case ErrorCode::AllWeightsZero: return "AllWeightsZero";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::ZeroWeightSum: return "ZeroWeightSum";
    case ErrorCode::IndexOutOfRange: return "IndexOutOfRange";
    case ErrorCode::EmptyChain: return "EmptyChain";
    case ErrorCode::SeriesTooShort: return "SeriesTooShort";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::ConfigError: return "ConfigError";
    case ErrorCode::IoError: return "IoError";
    case ErrorCode::SchemaVersionMismatch: return "SchemaVersionMismatch";
    case ErrorCode::ChecksumMismatch: return "ChecksumMismatch";
  }
  return "Unknown";
}

}  // namespace mspgas
