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

#include <map>
#include <memory>
#include <mutex>
#include <utility>
#include <vector>

#include "nfm/lookup_tables.hpp"
#include "nfm/signal_synth.hpp"
#include "nfm/spectrum.hpp"

namespace nfm {

struct CoarseEstimate {
    double theta = 0.0;    // rad
    double range = 0.0;    // m
    double v_r = 0.0;      // m/s
    double v_theta = 0.0;  // m/s, magnitude only; the sign is left to refinement
    SpreadMeasurement angular;
    SpreadMeasurement doppler;
    bool range_extrapolated = false;
    bool vtheta_extrapolated = false;
};

/// arcsin of the median member sin(theta).
double coarse_angle(const SpreadMeasurement& spread);

/// Median member omega converted to m/s.
double coarse_radial_velocity(const SpreadMeasurement& spread, const ArrayConfig& cfg);

/// Coarse stage bound to one array configuration and its angle-range table.
/// Velocity tables are built on demand for the table cell nearest to the
/// coarse location and cached; the cache is shared across threads.
class CoarseEstimator {
public:
    CoarseEstimator(ArrayConfig cfg, AngleRangeTable table, std::vector<double> vr_grid = default_vr_grid(),
                    std::vector<double> vtheta_grid = default_vtheta_grid());

    const ArrayConfig& config() const { return cfg_; }
    const AngleRangeTable& angle_table() const { return table_; }

    /// Velocity table conditioned on the angle-range cell nearest (theta, r).
    std::shared_ptr<const VelocityTable> velocity_table(double theta, double range) const;
    std::size_t cached_velocity_tables() const;

    /// ad_transform, spreads, medians, then range from the angle table and
    /// |v_theta| from the velocity table conditioned on the matched location.
    /// Throws ConfigError when the snapshot's array differs from the table's
    /// and EstimationFailed when a spread is degenerate.
    CoarseEstimate estimate(const SpaceTimeSnapshot& snapshot) const;

private:
    std::pair<int, int> nearest_cell(double theta, double range) const;

    ArrayConfig cfg_;
    AngleRangeTable table_;
    std::vector<double> vr_grid_;
    std::vector<double> vtheta_grid_;
    mutable std::mutex mutex_;
    mutable std::map<std::pair<int, int>, std::shared_ptr<const VelocityTable>> cache_;
};

inline CoarseEstimate estimate_coarse(const SpaceTimeSnapshot& snapshot, const CoarseEstimator& estimator)
{
    return estimator.estimate(snapshot);
}

}  // namespace nfm
