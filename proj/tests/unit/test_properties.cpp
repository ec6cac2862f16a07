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

#include "support/properties.hpp"

namespace mspgas::testing {
namespace {

constexpr int kCases = 200;

void expect_holds(const PropertyResult& r) {
  EXPECT_GE(r.cases, 100);
  EXPECT_EQ(r.failures, 0) << r.name << ": " << r.first_failure;
}

TEST(Properties, WeightSimplex) { expect_holds(weight_simplex(kCases, 101)); }
TEST(Properties, SpdPreservation) { expect_holds(spd_preservation(kCases, 102)); }
TEST(Properties, CosSinRange) { expect_holds(cos_sin_range(kCases, 103)); }
TEST(Properties, WeightRescaling) { expect_holds(weight_rescaling(kCases, 104)); }
TEST(Properties, SuffstatsAdditivity) { expect_holds(suffstats_additivity(kCases, 105)); }

}  // namespace
}  // namespace mspgas::testing
