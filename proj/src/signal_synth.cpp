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

#include "nfm/signal_synth.hpp"

#include <array>
#include <bit>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <iomanip>
#include <stdexcept>
#include <string>

namespace nfm {

static_assert(std::endian::native == std::endian::little, "snapshot I/O assumes a little-endian host");

namespace {

constexpr std::array<char, 4> kSnapshotMagic{'N', 'F', 'S', 'T'};
constexpr std::uint32_t kSnapshotVersion = 1;

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
        throw std::runtime_error("snapshot file truncated");
    return value;
}

}  // namespace

TransmitPlan TransmitPlan::unit_pilots(int n, int m)
{
    return {std::vector<CVector>(static_cast<std::size_t>(m), CVector::Ones(n))};
}

bool TransmitPlan::is_unit_modulus(double tol) const
{
    for (const auto& s : symbols)
        for (Eigen::Index i = 0; i < s.size(); ++i)
            if (std::abs(std::abs(s[i]) - 1.0) > tol)
                return false;
    return true;
}

SpaceTimeSnapshot clean_signal(const ArrayConfig& cfg, const TargetState& target, const CalibrationProfile& calib,
                               double xi_t, const TransmitPlan& plan)
{
    const int N = cfg.num_elements;
    const int M = cfg.num_symbols;
    if (static_cast<int>(plan.symbols.size()) != M)
        throw std::invalid_argument("clean_signal: plan has " + std::to_string(plan.symbols.size()) +
                                    " symbol vectors, expected " + std::to_string(M));
    for (const auto& s : plan.symbols)
        if (s.size() != N)
            throw std::invalid_argument("clean_signal: symbol vector length does not match N");
    if (calib.size() != N || calib.phase.size() != N)
        throw std::invalid_argument("clean_signal: calibration profile length does not match N");

    SpaceTimeSnapshot out{space_time_matrix(cfg, target, xi_t), cfg};
    for (int m = 0; m < M; ++m)
        for (int i = 0; i < N; ++i)
            out.data(i, m) *= calib.weight(i) * plan.symbols[m][i];
    return out;
}

SpaceTimeSnapshot clean_signal(const ArrayConfig& cfg, const TargetState& target, const CalibrationProfile& calib,
                               double xi_t)
{
    return clean_signal(cfg, target, calib, xi_t, TransmitPlan::unit_pilots(cfg.num_elements, cfg.num_symbols));
}

SpaceTimeSnapshot add_noise(const SpaceTimeSnapshot& snapshot, const NoiseSpec& noise, std::mt19937_64& rng)
{
    if (noise.sigma2 < 0.0)
        throw std::invalid_argument("add_noise: sigma2 must be non-negative");
    SpaceTimeSnapshot out = snapshot;
    if (noise.sigma2 == 0.0)
        return out;
    std::normal_distribution<double> gauss(0.0, std::sqrt(0.5 * noise.sigma2));
    // Antenna-major draw order so the stream maps to the file layout.
    for (Eigen::Index i = 0; i < out.data.rows(); ++i)
        for (Eigen::Index m = 0; m < out.data.cols(); ++m) {
            const double re = gauss(rng);
            const double im = gauss(rng);
            out.data(i, m) += cd(re, im);
        }
    return out;
}

double snr_to_sigma2(double signal_power, double snr_db)
{
    return signal_power / std::pow(10.0, snr_db / 10.0);
}

void write_snapshot(const SpaceTimeSnapshot& snapshot, const std::filesystem::path& path)
{
    std::ofstream os(path, std::ios::binary);
    if (!os)
        throw std::runtime_error("cannot open " + path.string() + " for writing");
    os.write(kSnapshotMagic.data(), kSnapshotMagic.size());
    put<std::uint32_t>(os, kSnapshotVersion);
    put<std::uint32_t>(os, static_cast<std::uint32_t>(snapshot.num_elements()));
    put<std::uint32_t>(os, static_cast<std::uint32_t>(snapshot.num_symbols()));
    for (int i = 0; i < snapshot.num_elements(); ++i)
        for (int m = 0; m < snapshot.num_symbols(); ++m) {
            put<double>(os, snapshot.data(i, m).real());
            put<double>(os, snapshot.data(i, m).imag());
        }
    if (!os)
        throw std::runtime_error("write failed for " + path.string());
}

SpaceTimeSnapshot read_snapshot(const std::filesystem::path& path)
{
    std::ifstream is(path, std::ios::binary);
    if (!is)
        throw std::runtime_error("cannot open " + path.string());
    std::array<char, 4> magic{};
    is.read(magic.data(), magic.size());
    if (!is || magic != kSnapshotMagic)
        throw std::runtime_error(path.string() + ": not a snapshot file (bad magic)");
    const auto version = get<std::uint32_t>(is);
    if (version != kSnapshotVersion)
        throw std::runtime_error(path.string() + ": unsupported snapshot version " + std::to_string(version));
    const auto n = get<std::uint32_t>(is);
    const auto m = get<std::uint32_t>(is);
    if (n < 1 || m < 1)
        throw std::runtime_error(path.string() + ": empty snapshot");

    SpaceTimeSnapshot out;
    out.scenario.num_elements = static_cast<int>(n);
    out.scenario.num_symbols = static_cast<int>(m);
    out.data.resize(n, m);
    for (std::uint32_t i = 0; i < n; ++i)
        for (std::uint32_t k = 0; k < m; ++k) {
            const double re = get<double>(is);
            const double im = get<double>(is);
            out.data(i, k) = cd(re, im);
        }
    return out;
}

void write_snapshot_csv(const SpaceTimeSnapshot& snapshot, const std::filesystem::path& path)
{
    std::ofstream os(path);
    if (!os)
        throw std::runtime_error("cannot open " + path.string() + " for writing");
    os << std::setprecision(17);
    for (int i = 0; i < snapshot.num_elements(); ++i) {
        for (int m = 0; m < snapshot.num_symbols(); ++m) {
            const cd v = snapshot.data(i, m);
            if (m > 0)
                os << ',';
            os << v.real() << (std::signbit(v.imag()) ? "" : "+") << v.imag() << 'j';
        }
        os << '\n';
    }
}

}  // namespace nfm
