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

#include <stdexcept>
#include <string>

namespace nfm {

/// Input carries no usable information (all-zero profile, flat spectrum).
class DegenerateInputError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// Mismatched or invalid configuration (e.g. table built for another array).
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// An estimator could not produce a result; `diagnostics` says why.
class EstimationFailed : public std::runtime_error {
public:
    EstimationFailed(const std::string& what, std::string diagnostics)
        : std::runtime_error(what), diagnostics_(std::move(diagnostics))
    {
    }
    const std::string& diagnostics() const noexcept { return diagnostics_; }

private:
    std::string diagnostics_;
};

}  // namespace nfm
