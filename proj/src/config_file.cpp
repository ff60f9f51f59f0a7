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

#include "nfm/config_file.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <map>
#include <optional>
#include <set>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "nfm/errors.hpp"

namespace nfm {

namespace {

namespace pt = boost::property_tree;

const std::map<std::string, std::set<std::string>>& schema()
{
    static const std::map<std::string, std::set<std::string>> s{
        {"array", {"elements", "carrier_hz", "spacing_m", "symbol_rate_hz", "symbols", "two_way_spatial"}},
        {"target",
         {"theta_deg", "theta_rad", "range_m", "v_r", "v_theta", "xi", "transmit_power_w", "antenna_gain", "rcs_m2"}},
        {"noise",
         {"snr_db", "snr_processed_db", "iterations", "seed", "calib_max_phase_deg", "calib_max_amp_db"}},
        {"methods", {"list"}},
        {"grids",
         {"oversample_a", "oversample_d", "angle_points", "range_points", "range_min_m", "range_max_m", "refine_points", "refine_passes",
          "theta_window_rad", "range_window_inverse", "vr_window", "vtheta_window", "energy_fraction",
          "polar_points", "ml_iters", "ml_restarts", "table_cache"}},
    };
    return s;
}

std::string trim(const std::string& s)
{
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos)
        return {};
    return s.substr(b, s.find_last_not_of(" \t\r") - b + 1);
}

double to_double(const std::string& key, const std::string& raw)
{
    const std::string v = trim(raw);
    std::size_t used = 0;
    double out = 0.0;
    try {
        out = std::stod(v, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (v.empty() || used != v.size() || !std::isfinite(out))
        throw ConfigError("key '" + key + "': expected a number, got '" + raw + "'");
    return out;
}

long long to_integer(const std::string& key, const std::string& raw)
{
    const std::string v = trim(raw);
    std::size_t used = 0;
    long long out = 0;
    try {
        out = std::stoll(v, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (v.empty() || used != v.size())
        throw ConfigError("key '" + key + "': expected an integer, got '" + raw + "'");
    return out;
}

int to_int(const std::string& key, const std::string& raw)
{
    const long long v = to_integer(key, raw);
    if (v < std::numeric_limits<int>::min() || v > std::numeric_limits<int>::max())
        throw ConfigError("key '" + key + "': value out of range");
    return static_cast<int>(v);
}

bool to_bool(const std::string& key, const std::string& raw)
{
    const std::string v = trim(raw);
    if (v == "true" || v == "1" || v == "yes")
        return true;
    if (v == "false" || v == "0" || v == "no")
        return false;
    throw ConfigError("key '" + key + "': expected true/false, got '" + raw + "'");
}

std::vector<double> to_list(const std::string& key, const std::string& raw)
{
    std::vector<double> out;
    std::stringstream ss(raw);
    for (std::string item; std::getline(ss, item, ',');)
        if (!trim(item).empty())
            out.push_back(to_double(key, item));
    if (out.empty())
        throw ConfigError("key '" + key + "': empty list");
    return out;
}

}  // namespace

ExperimentConfig parse_experiment_config(std::istream& is)
{
    pt::ptree tree;
    try {
        pt::read_ini(is, tree);
    } catch (const pt::ini_parser_error& e) {
        throw ConfigError(std::string("config parse error: ") + e.what());
    }
    for (const auto& [section, body] : tree) {
        const auto it = schema().find(section);
        if (it == schema().end())
            throw ConfigError("unknown config section [" + section + "]");
        if (!body.data().empty())
            throw ConfigError("key '" + section + "' must sit inside a section");
        for (const auto& [key, value] : body)
            if (!it->second.count(key))
                throw ConfigError("unknown key '" + key + "' in section [" + section + "]");
    }
    auto get = [&](const char* path) -> std::optional<std::string> {
        if (auto v = tree.get_optional<std::string>(pt::ptree::path_type(path, '.')))
            return *v;
        return std::nullopt;
    };

    ExperimentConfig cfg = ExperimentConfig::reference_defaults();
    if (auto v = get("array.elements"))
        cfg.array.num_elements = to_int("elements", *v);
    if (auto v = get("array.carrier_hz"))
        cfg.array.carrier_freq = to_double("carrier_hz", *v);
    if (auto v = get("array.spacing_m"))
        cfg.array.element_spacing = to_double("spacing_m", *v);
    if (auto v = get("array.symbol_rate_hz"))
        cfg.array.symbol_rate = to_double("symbol_rate_hz", *v);
    if (auto v = get("array.symbols"))
        cfg.array.num_symbols = to_int("symbols", *v);
    if (auto v = get("array.two_way_spatial"))
        cfg.array.two_way_spatial = to_bool("two_way_spatial", *v);
    try {
        cfg.array.validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
    cfg.refinement = RefinementConfig::defaults(cfg.array);

    if (get("target.theta_deg") && get("target.theta_rad"))
        throw ConfigError("set only one of theta_deg and theta_rad");
    if (auto v = get("target.theta_deg"))
        cfg.target.theta = to_double("theta_deg", *v) * kPi / 180.0;
    if (auto v = get("target.theta_rad"))
        cfg.target.theta = to_double("theta_rad", *v);
    if (auto v = get("target.range_m"))
        cfg.target.range = to_double("range_m", *v);
    if (auto v = get("target.v_r"))
        cfg.target.v_r = to_double("v_r", *v);
    if (auto v = get("target.v_theta"))
        cfg.target.v_theta = to_double("v_theta", *v);
    if (auto v = get("target.xi"))
        cfg.xi_override = to_double("xi", *v);
    const auto pt_w = get("target.transmit_power_w");
    const auto gain = get("target.antenna_gain");
    const auto rcs = get("target.rcs_m2");
    if (pt_w || gain || rcs) {
        RadarLink link;
        if (pt_w)
            link.transmit_power = to_double("transmit_power_w", *pt_w);
        if (gain)
            link.antenna_gain = to_double("antenna_gain", *gain);
        if (rcs)
            link.rcs = to_double("rcs_m2", *rcs);
        cfg.link = link;
    }

    if (get("noise.snr_db") && get("noise.snr_processed_db"))
        throw ConfigError("set only one of snr_db and snr_processed_db");
    if (auto v = get("noise.snr_db"))
        cfg.snr_db = to_list("snr_db", *v);
    if (auto v = get("noise.snr_processed_db")) {
        cfg.snr_db = to_list("snr_processed_db", *v);
        for (auto& s : cfg.snr_db)
            s -= cfg.processing_gain_db();
    }
    if (auto v = get("noise.iterations"))
        cfg.iterations = to_int("iterations", *v);
    if (auto v = get("noise.seed")) {
        const long long s = to_integer("seed", *v);
        if (s < 0)
            throw ConfigError("key 'seed': must be non-negative");
        cfg.seed = static_cast<std::uint64_t>(s);
    }
    if (auto v = get("noise.calib_max_phase_deg"))
        cfg.calib_max_phase = to_double("calib_max_phase_deg", *v) * kPi / 180.0;
    if (auto v = get("noise.calib_max_amp_db"))
        cfg.calib_max_amp_db = to_double("calib_max_amp_db", *v);

    if (auto v = get("methods.list"))
        cfg.methods = parse_method_list(*v);

    if (auto v = get("grids.oversample_a"))
        cfg.oversample_a = to_int("oversample_a", *v);
    if (auto v = get("grids.oversample_d"))
        cfg.oversample_d = to_int("oversample_d", *v);
    if (auto v = get("grids.angle_points"))
        cfg.angle_points = to_int("angle_points", *v);
    if (auto v = get("grids.range_points"))
        cfg.range_points = to_int("range_points", *v);
    if (auto v = get("grids.range_min_m"))
        cfg.range_min = to_double("range_min_m", *v);
    if (auto v = get("grids.range_max_m"))
        cfg.range_max = to_double("range_max_m", *v);
    if (auto v = get("grids.refine_points"))
        cfg.refinement.grid_points = to_int("refine_points", *v);
    if (auto v = get("grids.refine_passes"))
        cfg.refinement.passes = to_int("refine_passes", *v);
    if (auto v = get("grids.theta_window_rad"))
        cfg.refinement.theta_window = to_double("theta_window_rad", *v);
    if (auto v = get("grids.range_window_inverse"))
        cfg.refinement.range_window_inverse = to_double("range_window_inverse", *v);
    if (auto v = get("grids.vr_window"))
        cfg.refinement.vr_window = to_double("vr_window", *v);
    if (auto v = get("grids.vtheta_window"))
        cfg.refinement.vtheta_window = to_double("vtheta_window", *v);
    if (auto v = get("grids.energy_fraction"))
        cfg.refinement.energy_fraction = to_double("energy_fraction", *v);
    if (auto v = get("grids.polar_points"))
        cfg.polar_points = to_int("polar_points", *v);
    if (auto v = get("grids.ml_iters"))
        cfg.gradient.max_iters = to_int("ml_iters", *v);
    if (auto v = get("grids.ml_restarts"))
        cfg.gradient.restarts = to_int("ml_restarts", *v);
    if (auto v = get("grids.table_cache"))
        cfg.table_cache = trim(*v);

    cfg.validate();
    return cfg;
}

ExperimentConfig load_experiment_config(const std::filesystem::path& path)
{
    std::ifstream is(path);
    if (!is)
        throw ConfigError("cannot open config file " + path.string());
    ExperimentConfig cfg = parse_experiment_config(is);
    if (!cfg.table_cache.empty() && cfg.table_cache.is_relative())
        cfg.table_cache = path.parent_path() / cfg.table_cache;
    return cfg;
}

std::string describe_config(const ExperimentConfig& cfg)
{
    std::ostringstream os;
    os << std::setprecision(17);
    auto list = [&](const std::vector<double>& v) {
        std::ostringstream s;
        s << std::setprecision(17);
        for (std::size_t i = 0; i < v.size(); ++i)
            s << (i ? ", " : "") << v[i];
        return s.str();
    };
    const TargetState t = cfg.resolved_target();
    os << "[array]\n"
       << "elements = " << cfg.array.num_elements << '\n'
       << "carrier_hz = " << cfg.array.carrier_freq << '\n'
       << "spacing_m = " << cfg.array.spacing() << '\n'
       << "symbol_rate_hz = " << cfg.array.symbol_rate << '\n'
       << "symbols = " << cfg.array.num_symbols << '\n'
       << "two_way_spatial = " << (cfg.array.two_way_spatial ? "true" : "false") << '\n'
       << "[target]\n"
       << "theta_rad = " << t.theta << '\n'
       << "range_m = " << t.range << '\n'
       << "v_r = " << t.v_r << '\n'
       << "v_theta = " << t.v_theta << '\n'
       << "xi = " << cfg.xi() << '\n'
       << "[noise]\n"
       << "snr_db = " << list(cfg.snr_db) << '\n'
       << "iterations = " << cfg.iterations << '\n'
       << "seed = " << cfg.seed << '\n'
       << "calib_max_phase_deg = " << cfg.calib_max_phase * 180.0 / kPi << '\n'
       << "calib_max_amp_db = " << cfg.calib_max_amp_db << '\n'
       << "[methods]\n"
       << "list = ";
    for (std::size_t i = 0; i < cfg.methods.size(); ++i)
        os << (i ? ", " : "") << method_name(cfg.methods[i]);
    os << '\n'
       << "[grids]\n"
       << "oversample_a = " << cfg.oversample_a << '\n'
       << "oversample_d = " << cfg.oversample_d << '\n'
       << "angle_points = " << cfg.angle_points << '\n'
       << "range_points = " << cfg.range_points << '\n'
       << "range_min_m = " << cfg.table_range_grid().front() << '\n'
       << "range_max_m = " << cfg.table_range_grid().back() << '\n'
       << "refine_points = " << cfg.refinement.grid_points << '\n'
       << "refine_passes = " << cfg.refinement.passes << '\n'
       << "theta_window_rad = " << cfg.refinement.theta_window << '\n'
       << "range_window_inverse = " << cfg.refinement.range_window_inverse << '\n'
       << "vr_window = " << cfg.refinement.vr_window << '\n'
       << "vtheta_window = " << cfg.refinement.vtheta_window << '\n'
       << "energy_fraction = " << cfg.refinement.energy_fraction << '\n'
       << "polar_points = " << cfg.polar_points << '\n'
       << "ml_iters = " << cfg.gradient.max_iters << '\n'
       << "ml_restarts = " << cfg.gradient.restarts << '\n';
    if (!cfg.table_cache.empty())
        os << "table_cache = " << cfg.table_cache.string() << '\n';
    return os.str();
}

}  // namespace nfm
