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

#include <filesystem>
#include <iosfwd>
#include <string>

#include "nfm/harness.hpp"

namespace nfm {

/// Reads an INI-style experiment file (sections [array] [target] [noise]
/// [methods] [grids], `key = value`, ';' comments). Keys not present keep
/// their reference_defaults() values. Unknown sections or keys and malformed
/// values raise ConfigError. A relative table_cache resolves against the
/// file's directory. The schema is documented in configs/README.md.
ExperimentConfig load_experiment_config(const std::filesystem::path& path);
ExperimentConfig parse_experiment_config(std::istream& is);

/// The resolved configuration in the same key = value layout.
std::string describe_config(const ExperimentConfig& cfg);

}  // namespace nfm
