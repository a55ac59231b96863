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

#include "delaysync/layout.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "delaysync/error.hpp"
#include "delaysync/types.hpp"

namespace delaysync {

const char* to_string(ErrorCode code) noexcept {
    switch (code) {
        case ErrorCode::InvalidArgument: return "InvalidArgument";
        case ErrorCode::InvalidConfig: return "InvalidConfig";
        case ErrorCode::LengthMismatch: return "LengthMismatch";
        case ErrorCode::InsufficientContext: return "InsufficientContext";
        case ErrorCode::EmptyCapture: return "EmptyCapture";
        case ErrorCode::EmptyInput: return "EmptyInput";
        case ErrorCode::MissingRss: return "MissingRss";
        case ErrorCode::NoSignal: return "NoSignal";
        case ErrorCode::WindowTooLarge: return "WindowTooLarge";
        case ErrorCode::FullyExcluded: return "FullyExcluded";
        case ErrorCode::BadMagic: return "BadMagic";
        case ErrorCode::VersionUnsupported: return "VersionUnsupported";
        case ErrorCode::CorruptRecord: return "CorruptRecord";
        case ErrorCode::Io: return "Io";
    }
    return "Unknown";
}

namespace {

std::string decorate(ErrorCode code, const std::string& what, std::optional<std::size_t> frame) {
    std::string msg = std::string(to_string(code)) + ": " + what;
    if (frame) msg += " (frame " + std::to_string(*frame) + ")";
    return msg;
}

bool strictly_sorted(const std::vector<int>& v) {
    return std::adjacent_find(v.begin(), v.end(), [](int a, int b) { return a >= b; }) == v.end();
}

}  // namespace

Error::Error(ErrorCode code, const std::string& what, std::optional<std::size_t> frame_index)
    : std::runtime_error(decorate(code, what, frame_index)), code_(code), frame_index_(frame_index) {}

void SubcarrierLayout::validate() const {
    auto fail = [](const std::string& why) { throw Error(ErrorCode::InvalidConfig, "layout: " + why); };
    if (count == 0) fail("count must be positive");
    if (!(spacing_hz > 0.0) || !std::isfinite(spacing_hz)) fail("spacing must be positive");
    if (index_max < index_min || static_cast<std::size_t>(index_max - index_min + 1) != count)
        fail("count != index_max - index_min + 1");
    for (const auto* set : {&dc_indices, &notch_indices, &pilot_indices}) {
        if (!strictly_sorted(*set)) fail("index sets must be sorted and unique");
        for (int k : *set)
            if (!contains(k)) fail("index " + std::to_string(k) + " outside the layout range");
    }
    for (int k : notch_indices)
        if (std::binary_search(dc_indices.begin(), dc_indices.end(), k)) fail("notch and DC sets overlap");
}

SubcarrierLayout make_he160_layout() {
    SubcarrierLayout layout;
    layout.count = 2025;
    layout.spacing_hz = 78'125.0;
    layout.index_min = -1012;
    layout.index_max = 1012;
    for (int k = -11; k <= 11; ++k) layout.dc_indices.push_back(k);
    for (int k = -770; k <= -766; ++k) layout.notch_indices.push_back(k);
    for (int k = 766; k <= 770; ++k) layout.notch_indices.push_back(k);
    return layout;
}

std::vector<std::pair<int, int>> contiguous_runs(const std::vector<int>& sorted_indices) {
    std::vector<std::pair<int, int>> runs;
    for (int k : sorted_indices) {
        if (!runs.empty() && runs.back().second + 1 == k)
            runs.back().second = k;
        else
            runs.emplace_back(k, k);
    }
    return runs;
}

double CalibrationParams::free_space_gain() const noexcept {
    const double amp = c_mps / (4.0 * std::numbers::pi * d_ref_m * center_freq_hz);
    return amp * amp;
}

double CalibrationParams::free_space_gain_db() const noexcept { return 10.0 * std::log10(free_space_gain()); }

void CalibrationParams::validate() const {
    auto fail = [](const std::string& why) { throw Error(ErrorCode::InvalidConfig, "params: " + why); };
    if (!(d_ref_m > 0.0) || !std::isfinite(d_ref_m)) fail("d_ref_m must be positive");
    if (!(center_freq_hz > 0.0) || !std::isfinite(center_freq_hz)) fail("center_freq_hz must be positive");
    if (!std::isfinite(first_peak_threshold_db) || first_peak_threshold_db > 0.0)
        fail("first_peak_threshold_db must be a finite value <= 0");
    if (ma_window < 1 || ma_window % 2 == 0) fail("ma_window must be a positive odd integer");
}

}  // namespace delaysync
