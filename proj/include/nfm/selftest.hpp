// SPDX-License-Identifier: Apache-2.0
//
// nfmotion - near-field motion parameter estimation for large linear arrays
// Copyright (C) 2026 The nfmotion Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace nfm {

struct SelftestCheck {
    std::string name;
    bool passed = false;
    std::string detail;
};

/// Built-in invariant suite: steering normalization, far-field limits of the
/// range model, scale and phase invariance of the estimators' argmax,
/// Parseval for ad_transform, noise statistics and seed reproducibility.
/// Runs on a reduced array so it finishes in seconds.
std::vector<SelftestCheck> run_selftest();

/// One "PASS name: detail" / "FAIL name: detail" line per check; returns true
/// when all pass.
bool print_selftest(const std::vector<SelftestCheck>& checks, std::ostream& os);

}  // namespace nfm
