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

#include "nfm/coarse_estimator.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "nfm/errors.hpp"

namespace nfm {

double coarse_angle(const SpreadMeasurement& spread)
{
    if (spread.member_bins.empty())
        throw std::invalid_argument("coarse_angle: empty spread");
    return std::asin(std::clamp(spread.center, -1.0, 1.0));
}

double coarse_radial_velocity(const SpreadMeasurement& spread, const ArrayConfig& cfg)
{
    if (spread.member_bins.empty())
        throw std::invalid_argument("coarse_radial_velocity: empty spread");
    return doppler_to_velocity(cfg, spread.center);
}

CoarseEstimator::CoarseEstimator(ArrayConfig cfg, AngleRangeTable table, std::vector<double> vr_grid,
                                 std::vector<double> vtheta_grid)
    : cfg_(cfg), table_(std::move(table)), vr_grid_(std::move(vr_grid)), vtheta_grid_(std::move(vtheta_grid))
{
    cfg_.validate();
    if (table_.fingerprint != cfg_.fingerprint())
        throw ConfigError("angle table was built for a different array configuration");
    if (table_.width.size() == 0)
        throw ConfigError("angle table is empty");
}

std::pair<int, int> CoarseEstimator::nearest_cell(double theta, double range) const
{
    auto nearest = [](const std::vector<double>& grid, auto&& key, double x) {
        int best = 0;
        for (int i = 1; i < static_cast<int>(grid.size()); ++i)
            if (std::abs(key(grid[i]) - x) < std::abs(key(grid[best]) - x))
                best = i;
        return best;
    };
    const int i = nearest(table_.angle_grid, [](double a) { return std::sin(a); }, std::sin(theta));
    const int j = nearest(table_.range_grid, [](double r) { return 1.0 / r; }, 1.0 / range);
    return {i, j};
}

std::shared_ptr<const VelocityTable> CoarseEstimator::velocity_table(double theta, double range) const
{
    const auto key = nearest_cell(theta, range);
    {
        std::lock_guard<std::mutex> lock(mutex_);
        if (auto it = cache_.find(key); it != cache_.end())
            return it->second;
    }
    // Built outside the lock; a concurrent duplicate build yields identical data.
    auto built = std::make_shared<const VelocityTable>(
        build_velocity_table(cfg_, table_.angle_grid[key.first], table_.range_grid[key.second], vr_grid_,
                             vtheta_grid_, table_.oversample_a, table_.oversample_d));
    std::lock_guard<std::mutex> lock(mutex_);
    return cache_.emplace(key, std::move(built)).first->second;
}

std::size_t CoarseEstimator::cached_velocity_tables() const
{
    std::lock_guard<std::mutex> lock(mutex_);
    return cache_.size();
}

CoarseEstimate CoarseEstimator::estimate(const SpaceTimeSnapshot& snapshot) const
{
    if (snapshot.scenario.fingerprint() != table_.fingerprint)
        throw ConfigError("snapshot array configuration does not match the lookup tables");

    const ADMap map = ad_transform(snapshot, table_.oversample_a, table_.oversample_d);
    CoarseEstimate out;
    try {
        out.angular = measure_spread(angular_profile(map), map.angle_axis, angular_spread_options(map.oversample_a));
        out.doppler = measure_spread(doppler_profile(map), map.doppler_axis, doppler_spread_options(map.oversample_d));
    } catch (const DegenerateInputError& e) {
        std::ostringstream diag;
        diag << "peak_power=" << map.peak_power << " bins=" << map.power.rows() << "x" << map.power.cols();
        throw EstimationFailed(std::string("coarse estimation: ") + e.what(), diag.str());
    }

    out.theta = coarse_angle(out.angular);
    out.v_r = coarse_radial_velocity(out.doppler, cfg_);

    const TableMatch range_match = match_range(table_, out.theta, out.angular.fine_width);
    out.range = range_match.value;
    out.range_extrapolated = range_match.extrapolated;

    const auto vtable = velocity_table(out.theta, out.range);
    const TableMatch vt_match = match_transverse(*vtable, out.v_r, out.doppler.fine_width);
    out.v_theta = vt_match.value;
    out.vtheta_extrapolated = vt_match.extrapolated;
    return out;
}

}  // namespace nfm
