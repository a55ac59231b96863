// SPDX-License-Identifier: Apache-2.0
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

#include "delaysync/serialization.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "delaysync/error.hpp"
#include "json_detail.hpp"

namespace delaysync {

namespace detail {

namespace {

template <typename T>
void read_if(const json& j, const char* key, T& field) {
    if (j.contains(key)) field = j.at(key).get<T>();
}

}  // namespace

json parse(std::string_view text) {
    try {
        return json::parse(text.begin(), text.end());
    } catch (const json::exception& e) {
        throw Error(ErrorCode::InvalidConfig, std::string("malformed JSON: ") + e.what());
    }
}

json layout_to_json(const SubcarrierLayout& layout) {
    return json{{"count", layout.count},
                {"spacing_hz", layout.spacing_hz},
                {"index_min", layout.index_min},
                {"index_max", layout.index_max},
                {"dc_indices", layout.dc_indices},
                {"notch_indices", layout.notch_indices},
                {"pilot_indices", layout.pilot_indices}};
}

SubcarrierLayout layout_from_json(const json& j, SubcarrierLayout base) {
    try {
        read_if(j, "count", base.count);
        read_if(j, "spacing_hz", base.spacing_hz);
        read_if(j, "index_min", base.index_min);
        read_if(j, "index_max", base.index_max);
        read_if(j, "dc_indices", base.dc_indices);
        read_if(j, "notch_indices", base.notch_indices);
        read_if(j, "pilot_indices", base.pilot_indices);
    } catch (const json::exception& e) {
        throw Error(ErrorCode::InvalidConfig, std::string("layout: ") + e.what());
    }
    base.validate();
    return base;
}

json params_to_json(const CalibrationParams& params) {
    return json{{"d_ref_m", params.d_ref_m},
                {"center_freq_hz", params.center_freq_hz},
                {"first_peak_threshold_db", params.first_peak_threshold_db},
                {"ma_window", params.ma_window}};
}

CalibrationParams params_from_json(const json& j, CalibrationParams base) {
    try {
        read_if(j, "d_ref_m", base.d_ref_m);
        read_if(j, "center_freq_hz", base.center_freq_hz);
        read_if(j, "first_peak_threshold_db", base.first_peak_threshold_db);
        read_if(j, "ma_window", base.ma_window);
    } catch (const json::exception& e) {
        throw Error(ErrorCode::InvalidConfig, std::string("params: ") + e.what());
    }
    base.validate();
    return base;
}

json taps_to_json(const TapSet& taps) {
    json arr = json::array();
    for (const auto& t : taps.taps)
        arr.push_back({{"delay_s", t.delay_s},
                       {"gain_re", t.gain.real()},
                       {"gain_im", t.gain.imag()},
                       {"drift_mps", t.drift_mps}});
    return arr;
}

TapSet taps_from_json(const json& j) {
    TapSet set;
    try {
        for (const auto& e : j) {
            Tap t;
            if (e.contains("delay_s"))
                t.delay_s = e.at("delay_s").get<double>();
            else
                t.delay_s = e.at("delay_ns").get<double>() * 1e-9;
            if (e.contains("gain_db")) {
                const double amp = std::pow(10.0, e.at("gain_db").get<double>() / 20.0);
                t.gain = std::polar(amp, e.value("phase_rad", 0.0));
            } else {
                t.gain = cplx(e.value("gain_re", 1.0), e.value("gain_im", 0.0));
            }
            t.drift_mps = e.value("drift_mps", 0.0);
            set.taps.push_back(t);
        }
    } catch (const json::exception& e) {
        throw Error(ErrorCode::InvalidConfig, std::string("taps: ") + e.what());
    }
    return set;
}

json scenario_to_json(const ScenarioConfig& cfg) {
    json j{{"layout", layout_to_json(cfg.layout)},
           {"center_freq_hz", cfg.center_freq_hz},
           {"ref_taps", taps_to_json(cfg.ref_taps)},
           {"target_taps", taps_to_json(cfg.target_taps)},
           {"timing_offset_min_s", cfg.timing_offset_min_s},
           {"timing_offset_max_s", cfg.timing_offset_max_s},
           {"cyclic_prefix_s", cfg.cyclic_prefix_s},
           {"random_global_phase", cfg.random_global_phase},
           {"frame_count", cfg.frame_count},
           {"frame_interval_s", cfg.frame_interval_s},
           {"backoff_jitter_s", cfg.backoff_jitter_s},
           {"swap_probability", cfg.swap_probability},
           {"pi_shift_probability", cfg.pi_shift_probability},
           {"agc_normalize", cfg.agc_normalize},
           {"blank_dc", cfg.blank_dc},
           {"notch_attenuation_db", cfg.notch_attenuation_db},
           {"edge_rolloff_db", cfg.edge_rolloff_db},
           {"tx_power_dbm", cfg.tx_power_dbm}};
    j["snr_db"] = cfg.snr_db ? json(*cfg.snr_db) : json(nullptr);
    return j;
}

ScenarioConfig scenario_from_json(const json& j) {
    ScenarioConfig cfg;
    try {
        const std::string base = j.value("base", std::string{});
        if (base == "corridor")
            cfg = corridor_scenario();
        else if (base == "static")
            cfg = static_scenario();
        else if (!base.empty())
            throw Error(ErrorCode::InvalidConfig, "unknown scenario base '" + base + "'");

        if (j.contains("layout")) cfg.layout = layout_from_json(j.at("layout"), cfg.layout);
        read_if(j, "center_freq_hz", cfg.center_freq_hz);
        if (j.contains("ref_taps")) cfg.ref_taps = taps_from_json(j.at("ref_taps"));
        if (j.contains("target_taps")) cfg.target_taps = taps_from_json(j.at("target_taps"));
        read_if(j, "timing_offset_min_s", cfg.timing_offset_min_s);
        read_if(j, "timing_offset_max_s", cfg.timing_offset_max_s);
        read_if(j, "cyclic_prefix_s", cfg.cyclic_prefix_s);
        read_if(j, "random_global_phase", cfg.random_global_phase);
        read_if(j, "frame_count", cfg.frame_count);
        read_if(j, "frame_interval_s", cfg.frame_interval_s);
        read_if(j, "backoff_jitter_s", cfg.backoff_jitter_s);
        read_if(j, "swap_probability", cfg.swap_probability);
        read_if(j, "pi_shift_probability", cfg.pi_shift_probability);
        read_if(j, "agc_normalize", cfg.agc_normalize);
        read_if(j, "blank_dc", cfg.blank_dc);
        read_if(j, "notch_attenuation_db", cfg.notch_attenuation_db);
        read_if(j, "edge_rolloff_db", cfg.edge_rolloff_db);
        read_if(j, "tx_power_dbm", cfg.tx_power_dbm);
        if (j.contains("snr_db"))
            cfg.snr_db = j.at("snr_db").is_null() ? std::nullopt : std::optional<double>(j.at("snr_db").get<double>());
    } catch (const json::exception& e) {
        throw Error(ErrorCode::InvalidConfig, std::string("scenario: ") + e.what());
    }
    cfg.validate();
    return cfg;
}

}  // namespace detail

std::string to_json(const SubcarrierLayout& layout) { return detail::layout_to_json(layout).dump(2); }
SubcarrierLayout layout_from_json(std::string_view text) { return detail::layout_from_json(detail::parse(text)); }

std::string to_json(const CalibrationParams& params) { return detail::params_to_json(params).dump(2); }
CalibrationParams params_from_json(std::string_view text) { return detail::params_from_json(detail::parse(text)); }

std::string to_json(const ScenarioConfig& cfg) { return detail::scenario_to_json(cfg).dump(2); }
ScenarioConfig scenario_from_json(std::string_view text) { return detail::scenario_from_json(detail::parse(text)); }

std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::Io, "cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace delaysync
