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
#include <random>
#include <vector>

#include "nfm/array_geometry.hpp"

namespace nfm {

/// One CPI of received echoes: N antennas (rows) by M symbols (columns).
struct SpaceTimeSnapshot {
    CMatrix data;
    ArrayConfig scenario;

    int num_elements() const { return static_cast<int>(data.rows()); }
    int num_symbols() const { return static_cast<int>(data.cols()); }
};

/// Known transmit symbols s(m), one length-N vector per symbol index.
struct TransmitPlan {
    std::vector<CVector> symbols;

    /// All-ones pilots.
    static TransmitPlan unit_pilots(int n, int m);
    bool is_unit_modulus(double tol = 1e-12) const;
};

struct NoiseSpec {
    double sigma2 = 0.0;  // variance per complex sample
};

/// Noise-free echo X: column m is the calibrated space-time steering column
/// multiplied element-wise by s(m). Throws std::invalid_argument when the
/// plan or calibration does not match the array dimensions.
SpaceTimeSnapshot clean_signal(const ArrayConfig& cfg, const TargetState& target, const CalibrationProfile& calib,
                               double xi_t, const TransmitPlan& plan);

/// Convenience overload with unit pilots.
SpaceTimeSnapshot clean_signal(const ArrayConfig& cfg, const TargetState& target, const CalibrationProfile& calib,
                               double xi_t);

/// Adds i.i.d. CN(0, sigma2) samples (real and imaginary parts each sigma2/2).
SpaceTimeSnapshot add_noise(const SpaceTimeSnapshot& snapshot, const NoiseSpec& noise, std::mt19937_64& rng);

/// sigma2 = signal_power / 10^(snr_db / 10).
double snr_to_sigma2(double signal_power, double snr_db);

// Persistence ----------------------------------------------------------------

/// Binary layout, little-endian: "NFST", u32 version (1), u32 N, u32 M, then
/// N*M (re, im) float64 pairs in antenna-major (row-major) order.
void write_snapshot(const SpaceTimeSnapshot& snapshot, const std::filesystem::path& path);

/// Reads a snapshot written by write_snapshot. The scenario field is left at
/// defaults apart from N and M; callers attach the real config.
SpaceTimeSnapshot read_snapshot(const std::filesystem::path& path);

/// Debug export: one row per antenna, one "re+imj" cell per symbol.
void write_snapshot_csv(const SpaceTimeSnapshot& snapshot, const std::filesystem::path& path);

}  // namespace nfm
