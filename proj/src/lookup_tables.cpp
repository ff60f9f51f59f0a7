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

#include "nfm/lookup_tables.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <exception>
#include <fstream>
#include <iomanip>
#include <stdexcept>
#include <string>

#include "nfm/errors.hpp"
#include "nfm/signal_synth.hpp"
#include "nfm/spectrum.hpp"

namespace nfm {

static_assert(std::endian::native == std::endian::little, "table I/O assumes a little-endian host");

namespace {

constexpr std::array<char, 4> kTableMagic{'N', 'F', 'L', 'T'};
constexpr std::uint32_t kTableVersion = 1;
constexpr std::uint32_t kKindAngle = 1;
constexpr std::uint32_t kKindVelocity = 2;

// Ties are separated by this fraction of one oversampled bin.
constexpr double kStrictStep = 1e-6;

SpaceTimeSnapshot synthesize(const ArrayConfig& cfg, const TargetState& target)
{
    return clean_signal(cfg, target, CalibrationProfile::identity(cfg.num_elements), 1.0);
}

double angular_width(const ArrayConfig& cfg, const TargetState& target, int oa, int od)
{
    const ADMap map = ad_transform(synthesize(cfg, target), oa, od);
    return measure_spread(angular_profile(map), map.angle_axis, angular_spread_options(oa)).fine_width;
}

double doppler_width(const ArrayConfig& cfg, const TargetState& target, int oa, int od)
{
    const ADMap map = ad_transform(synthesize(cfg, target), oa, od);
    return measure_spread(doppler_profile(map), map.doppler_axis, doppler_spread_options(od)).fine_width;
}

std::string cell_name(const char* row, double rv, const char* col, double cv)
{
    return std::string(row) + "=" + std::to_string(rv) + ", " + col + "=" + std::to_string(cv);
}

// Evaluates fn(i, j) over a rows x cols grid. Exceptions inside the parallel
// region are captured per cell and the one with the lowest index is rethrown.
template <typename Fn>
RMatrix fill_grid(int rows, int cols, Execution exec, Fn fn)
{
    RMatrix out(rows, cols);
    const int total = rows * cols;
    std::vector<std::exception_ptr> errors(static_cast<std::size_t>(total));
    auto cell = [&](int idx) {
        try {
            out(idx / cols, idx % cols) = fn(idx / cols, idx % cols);
        } catch (...) {
            errors[idx] = std::current_exception();
        }
    };
    if (exec == Execution::parallel) {
#pragma omp parallel for schedule(dynamic, 4)
        for (int idx = 0; idx < total; ++idx)
            cell(idx);
    } else {
        for (int idx = 0; idx < total; ++idx)
            cell(idx);
    }
    for (auto& e : errors)
        if (e)
            std::rethrow_exception(e);
    return out;
}

int regularize_rows(RMatrix& width, bool increasing, double min_step)
{
    int changed = 0;
    for (Eigen::Index i = 0; i < width.rows(); ++i) {
        std::vector<double> row(static_cast<std::size_t>(width.cols()));
        for (Eigen::Index j = 0; j < width.cols(); ++j)
            row[j] = increasing ? width(i, j) : -width(i, j);
        const std::vector<double> fixed = monotone_increasing(row, min_step);
        for (Eigen::Index j = 0; j < width.cols(); ++j) {
            const double v = increasing ? fixed[j] : -fixed[j];
            if (v != width(i, j))
                ++changed;
            width(i, j) = v;
        }
    }
    return changed;
}

void check_grid(const std::vector<double>& grid, const char* name)
{
    if (grid.empty())
        throw std::invalid_argument(std::string("table grid '") + name + "' is empty");
    for (double v : grid)
        if (!std::isfinite(v))
            throw std::invalid_argument(std::string("table grid '") + name + "' has non-finite entries");
}

template <typename T>
void put(std::ostream& os, T value)
{
    os.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <typename T>
T get(std::istream& is)
{
    T value{};
    is.read(reinterpret_cast<char*>(&value), sizeof(T));
    if (!is)
        throw std::runtime_error("table file truncated");
    return value;
}

struct RawTable {
    std::uint32_t kind = 0;
    std::vector<double> rows, cols;
    RMatrix width;
    std::uint64_t fingerprint = 0;
    int oa = 0, od = 0;
    double cond_theta = 0.0, cond_range = 0.0;
};

void save_raw(const RawTable& t, const std::filesystem::path& path)
{
    std::ofstream os(path, std::ios::binary);
    if (!os)
        throw std::runtime_error("cannot open " + path.string() + " for writing");
    os.write(kTableMagic.data(), kTableMagic.size());
    put<std::uint32_t>(os, kTableVersion);
    put<std::uint32_t>(os, t.kind);
    put<std::uint32_t>(os, static_cast<std::uint32_t>(t.rows.size()));
    put<std::uint32_t>(os, static_cast<std::uint32_t>(t.cols.size()));
    put<std::uint64_t>(os, t.fingerprint);
    put<std::uint32_t>(os, static_cast<std::uint32_t>(t.oa));
    put<std::uint32_t>(os, static_cast<std::uint32_t>(t.od));
    put<double>(os, t.cond_theta);
    put<double>(os, t.cond_range);
    for (double v : t.rows)
        put<double>(os, v);
    for (double v : t.cols)
        put<double>(os, v);
    for (Eigen::Index i = 0; i < t.width.rows(); ++i)
        for (Eigen::Index j = 0; j < t.width.cols(); ++j)
            put<double>(os, t.width(i, j));
    if (!os)
        throw std::runtime_error("write failed for " + path.string());
}

RawTable load_raw(const std::filesystem::path& path, std::uint32_t expected_kind)
{
    std::ifstream is(path, std::ios::binary);
    if (!is)
        throw std::runtime_error("cannot open " + path.string());
    std::array<char, 4> magic{};
    is.read(magic.data(), magic.size());
    if (!is || magic != kTableMagic)
        throw std::runtime_error(path.string() + ": not a lookup table file (bad magic)");
    if (const auto version = get<std::uint32_t>(is); version != kTableVersion)
        throw std::runtime_error(path.string() + ": unsupported table version " + std::to_string(version));
    RawTable t;
    t.kind = get<std::uint32_t>(is);
    if (t.kind != expected_kind)
        throw std::runtime_error(path.string() + ": table kind " + std::to_string(t.kind) + ", expected " +
                                 std::to_string(expected_kind));
    const auto rows = get<std::uint32_t>(is);
    const auto cols = get<std::uint32_t>(is);
    t.fingerprint = get<std::uint64_t>(is);
    t.oa = static_cast<int>(get<std::uint32_t>(is));
    t.od = static_cast<int>(get<std::uint32_t>(is));
    t.cond_theta = get<double>(is);
    t.cond_range = get<double>(is);
    t.rows.resize(rows);
    t.cols.resize(cols);
    for (auto& v : t.rows)
        v = get<double>(is);
    for (auto& v : t.cols)
        v = get<double>(is);
    t.width.resize(rows, cols);
    for (std::uint32_t i = 0; i < rows; ++i)
        for (std::uint32_t j = 0; j < cols; ++j)
            t.width(i, j) = get<double>(is);
    return t;
}

int nearest_index(const std::vector<double>& grid, double x)
{
    int best = 0;
    for (int i = 1; i < static_cast<int>(grid.size()); ++i)
        if (std::abs(grid[i] - x) < std::abs(grid[best] - x))
            best = i;
    return best;
}

TableMatch match_row(const RMatrix& width, int row, const std::vector<double>& cols, double measured)
{
    TableMatch m;
    m.row = row;
    double best = std::abs(width(row, 0) - measured);
    for (int j = 1; j < static_cast<int>(cols.size()); ++j) {
        const double diff = std::abs(width(row, j) - measured);
        if (diff < best) {
            best = diff;
            m.column = j;
        }
    }
    m.value = cols[m.column];
    const double lo = width.row(row).minCoeff();
    const double hi = width.row(row).maxCoeff();
    m.extrapolated = measured < lo || measured > hi;
    return m;
}

}  // namespace

SpreadOptions angular_spread_options(int oversample_a) { return {2 * oversample_a + 1, 2 * oversample_a}; }

SpreadOptions doppler_spread_options(int oversample_d) { return {1, oversample_d}; }

SpreadMeasurement measure_spread(const RVector& profile, const std::vector<double>& axis, const SpreadOptions& opts)
{
    if (opts.smooth_bins < 1 || opts.smooth_bins % 2 == 0)
        throw std::invalid_argument("measure_spread: smooth_bins must be odd and >= 1");
    if (opts.smooth_bins == 1)
        return extract_3db_support(profile, axis, opts.max_gap);
    const Eigen::Index K = profile.size();
    const Eigen::Index half = opts.smooth_bins / 2;
    RVector smoothed(K);
    for (Eigen::Index k = 0; k < K; ++k) {
        const Eigen::Index lo = std::max<Eigen::Index>(0, k - half);
        const Eigen::Index hi = std::min<Eigen::Index>(K - 1, k + half);
        smoothed[k] = profile.segment(lo, hi - lo + 1).mean();
    }
    return extract_3db_support(smoothed, axis, opts.max_gap);
}

std::vector<double> linspace(double lo, double hi, int points)
{
    if (points < 1)
        throw std::invalid_argument("linspace: points must be >= 1");
    std::vector<double> out(static_cast<std::size_t>(points));
    if (points == 1) {
        out[0] = lo;
        return out;
    }
    for (int i = 0; i < points; ++i)
        out[i] = lo + (hi - lo) * i / (points - 1);
    return out;
}

std::vector<double> default_angle_grid(int points)
{
    std::vector<double> out = linspace(-0.95, 0.95, points);
    for (auto& v : out)
        v = std::asin(v);
    return out;
}

std::vector<double> default_range_grid(const ArrayConfig& cfg, int points)
{
    const double rd = cfg.rayleigh_distance();
    return inverse_range_grid(rd / 200.0, rd / 10.0, points);
}

std::vector<double> inverse_range_grid(double nearest, double farthest, int points)
{
    if (!(nearest > 0.0) || !(farthest > nearest))
        throw std::invalid_argument("inverse_range_grid: need 0 < nearest < farthest");
    std::vector<double> inv = linspace(1.0 / nearest, 1.0 / farthest, points);
    for (auto& v : inv)
        v = 1.0 / v;
    return inv;
}

std::vector<double> default_vr_grid() { return linspace(-15.0, 15.0, 31); }

std::vector<double> default_vtheta_grid() { return linspace(0.0, 16.0, 33); }

std::vector<double> monotone_increasing(const std::vector<double>& values, double min_step)
{
    // Blocks of pooled values: (mean, weight).
    std::vector<double> mean;
    std::vector<int> weight;
    for (double v : values) {
        mean.push_back(v);
        weight.push_back(1);
        while (mean.size() > 1 && mean[mean.size() - 2] > mean.back()) {
            const std::size_t k = mean.size() - 1;
            const int w = weight[k - 1] + weight[k];
            mean[k - 1] = (mean[k - 1] * weight[k - 1] + mean[k] * weight[k]) / w;
            weight[k - 1] = w;
            mean.pop_back();
            weight.pop_back();
        }
    }
    std::vector<double> out;
    out.reserve(values.size());
    for (std::size_t b = 0; b < mean.size(); ++b)
        out.insert(out.end(), static_cast<std::size_t>(weight[b]), mean[b]);
    for (std::size_t j = 1; j < out.size(); ++j)
        if (out[j] < out[j - 1] + min_step)
            out[j] = out[j - 1] + min_step;
    return out;
}

AngleRangeTable build_angle_table(const ArrayConfig& cfg, const std::vector<double>& angle_grid,
                                  const std::vector<double>& range_grid, int oversample_a, int oversample_d,
                                  Execution exec)
{
    cfg.validate();
    check_grid(angle_grid, "angle");
    check_grid(range_grid, "range");
    for (double r : range_grid)
        if (!(r > 0.0))
            throw std::invalid_argument("table grid 'range' must be positive");

    AngleRangeTable t;
    t.angle_grid = angle_grid;
    t.range_grid = range_grid;
    t.fingerprint = cfg.fingerprint();
    t.oversample_a = oversample_a;
    t.oversample_d = oversample_d;
    t.width = fill_grid(static_cast<int>(angle_grid.size()), static_cast<int>(range_grid.size()), exec,
                        [&](int i, int j) {
                            const TargetState target{angle_grid[i], range_grid[j], 0.0, 0.0};
                            try {
                                return angular_width(cfg, target, oversample_a, oversample_d);
                            } catch (const DegenerateInputError&) {
                                throw DegenerateInputError("angle table cell " +
                                                           cell_name("theta", angle_grid[i], "r", range_grid[j]) +
                                                           ": all-zero angular profile");
                            }
                        });
    const double bin = cfg.wavelength() / (cfg.spacing() * oversample_a * cfg.num_elements);
    t.regularized_cells = regularize_rows(t.width, false, kStrictStep * bin);
    return t;
}

VelocityTable build_velocity_table(const ArrayConfig& cfg, double theta, double range,
                                   const std::vector<double>& vr_grid, const std::vector<double>& vtheta_grid,
                                   int oversample_a, int oversample_d, Execution exec)
{
    cfg.validate();
    check_grid(vr_grid, "v_r");
    check_grid(vtheta_grid, "v_theta");
    TargetState probe{theta, range, 0.0, 0.0};
    probe.validate();

    VelocityTable t;
    t.vr_grid = vr_grid;
    t.vtheta_grid = vtheta_grid;
    t.cond_theta = theta;
    t.cond_range = range;
    t.fingerprint = cfg.fingerprint();
    t.oversample_a = oversample_a;
    t.oversample_d = oversample_d;
    t.width = fill_grid(static_cast<int>(vr_grid.size()), static_cast<int>(vtheta_grid.size()), exec,
                        [&](int i, int j) {
                            const TargetState target{theta, range, vr_grid[i], vtheta_grid[j]};
                            try {
                                return doppler_width(cfg, target, oversample_a, oversample_d);
                            } catch (const DegenerateInputError&) {
                                throw DegenerateInputError("velocity table cell " +
                                                           cell_name("v_r", vr_grid[i], "v_theta", vtheta_grid[j]) +
                                                           ": all-zero Doppler profile");
                            }
                        });
    const double bin = 2.0 / (oversample_d * cfg.num_symbols);
    t.regularized_cells = regularize_rows(t.width, true, kStrictStep * bin);
    return t;
}

TableMatch match_range(const AngleRangeTable& table, double theta, double measured_width)
{
    if (table.width.size() == 0)
        throw std::invalid_argument("match_range: empty table");
    std::vector<double> sines(table.angle_grid.size());
    std::transform(table.angle_grid.begin(), table.angle_grid.end(), sines.begin(),
                   [](double a) { return std::sin(a); });
    return match_row(table.width, nearest_index(sines, std::sin(theta)), table.range_grid, measured_width);
}

TableMatch match_transverse(const VelocityTable& table, double v_r, double measured_width)
{
    if (table.width.size() == 0)
        throw std::invalid_argument("match_transverse: empty table");
    return match_row(table.width, nearest_index(table.vr_grid, v_r), table.vtheta_grid, measured_width);
}

void save_table(const AngleRangeTable& table, const std::filesystem::path& path)
{
    save_raw({kKindAngle, table.angle_grid, table.range_grid, table.width, table.fingerprint, table.oversample_a,
              table.oversample_d, 0.0, 0.0},
             path);
}

void save_table(const VelocityTable& table, const std::filesystem::path& path)
{
    save_raw({kKindVelocity, table.vr_grid, table.vtheta_grid, table.width, table.fingerprint, table.oversample_a,
              table.oversample_d, table.cond_theta, table.cond_range},
             path);
}

AngleRangeTable load_angle_table(const std::filesystem::path& path)
{
    RawTable raw = load_raw(path, kKindAngle);
    AngleRangeTable t;
    t.angle_grid = std::move(raw.rows);
    t.range_grid = std::move(raw.cols);
    t.width = std::move(raw.width);
    t.fingerprint = raw.fingerprint;
    t.oversample_a = raw.oa;
    t.oversample_d = raw.od;
    return t;
}

VelocityTable load_velocity_table(const std::filesystem::path& path)
{
    RawTable raw = load_raw(path, kKindVelocity);
    VelocityTable t;
    t.vr_grid = std::move(raw.rows);
    t.vtheta_grid = std::move(raw.cols);
    t.width = std::move(raw.width);
    t.fingerprint = raw.fingerprint;
    t.oversample_a = raw.oa;
    t.oversample_d = raw.od;
    t.cond_theta = raw.cond_theta;
    t.cond_range = raw.cond_range;
    return t;
}

namespace {

void write_csv(const std::vector<double>& rows, const std::vector<double>& cols, const RMatrix& width,
               const char* header, const std::filesystem::path& path)
{
    std::ofstream os(path);
    if (!os)
        throw std::runtime_error("cannot open " + path.string() + " for writing");
    os << header << '\n' << std::setprecision(12);
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (std::size_t j = 0; j < cols.size(); ++j)
            os << rows[i] << ',' << cols[j] << ',' << width(i, j) << '\n';
}

}  // namespace

void write_table_csv(const AngleRangeTable& table, const std::filesystem::path& path)
{
    write_csv(table.angle_grid, table.range_grid, table.width, "theta_rad,range_m,width_sin", path);
}

void write_table_csv(const VelocityTable& table, const std::filesystem::path& path)
{
    write_csv(table.vr_grid, table.vtheta_grid, table.width, "v_r,v_theta,width_omega", path);
}

}  // namespace nfm
