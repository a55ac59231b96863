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

#include "exports.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <limits>

#include <json.hpp>

#include "delaysync/error.hpp"

namespace delaysync::cli {

namespace {

std::ofstream open_out(const std::string& path, bool binary) {
    std::ofstream out(path, binary ? std::ios::binary | std::ios::trunc : std::ios::trunc);
    if (!out) throw Error(ErrorCode::Io, "cannot write " + path);
    return out;
}

void put_f32(std::ofstream& out, float v) {
    const auto bits = std::bit_cast<std::uint32_t>(v);
    const char b[4] = {static_cast<char>(bits & 0xff), static_cast<char>((bits >> 8) & 0xff),
                       static_cast<char>((bits >> 16) & 0xff), static_cast<char>((bits >> 24) & 0xff)};
    out.write(b, 4);
}

// Perceptually ordered dark-blue -> teal -> yellow ramp.
std::array<unsigned char, 3> colour(double t) {
    static constexpr std::array<std::array<double, 3>, 5> stops{{
        {0.267, 0.005, 0.329},
        {0.230, 0.322, 0.546},
        {0.128, 0.567, 0.551},
        {0.369, 0.789, 0.383},
        {0.993, 0.906, 0.144},
    }};
    t = std::clamp(t, 0.0, 1.0) * (stops.size() - 1);
    const auto i = std::min(static_cast<std::size_t>(t), stops.size() - 2);
    const double f = t - static_cast<double>(i);
    std::array<unsigned char, 3> rgb{};
    for (std::size_t c = 0; c < 3; ++c)
        rgb[c] = static_cast<unsigned char>(std::lround(255.0 * (stops[i][c] * (1.0 - f) + stops[i + 1][c] * f)));
    return rgb;
}

}  // namespace

IrRow IrCollector::crop(std::size_t frame_index, const ImpulseResponse& ir) {
    delay_bin_s_ = ir.delay_bin_s;
    const auto lo = static_cast<long long>(std::ceil((min_delay_s_ - ir.delay_origin_s) / ir.delay_bin_s));
    const auto hi = static_cast<long long>(std::floor((max_delay_s_ - ir.delay_origin_s) / ir.delay_bin_s));
    first_delay_s_ = ir.delay_origin_s + static_cast<double>(lo) * ir.delay_bin_s;
    const auto n = static_cast<long long>(ir.size());
    IrRow row;
    row.frame_index = frame_index;
    for (long long b = lo; b <= hi; ++b) {
        const auto& t = ir.taps[static_cast<std::size_t>(((b % n) + n) % n)];
        row.mag_db.push_back(static_cast<float>(20.0 * std::log10(std::abs(t))));
        row.phase_rad.push_back(static_cast<float>(std::arg(t)));
    }
    return row;
}

void IrCollector::on_frame(const FrameResult& result) {
    calibrated_.push_back(crop(result.frame_index, result.pair.h_target));
}

void IrCollector::on_averaged(std::size_t frame_index, const ImpulseResponse& target) {
    averaged_.push_back(crop(frame_index, target));
}

void write_ir_csv(const std::string& path, const std::vector<IrRow>& rows, double first_delay_s, double delay_bin_s) {
    auto out = open_out(path, false);
    out << "frame,delay_ns,mag_db,phase_rad\n";
    char line[128];
    for (const auto& r : rows)
        for (std::size_t i = 0; i < r.mag_db.size(); ++i) {
            std::snprintf(line, sizeof line, "%zu,%.5f,%.4f,%.6f\n", r.frame_index,
                          (first_delay_s + static_cast<double>(i) * delay_bin_s) * 1e9, r.mag_db[i], r.phase_rad[i]);
            out << line;
        }
}

void write_ir_matrix(const std::string& path, const std::vector<IrRow>& rows, double first_delay_s,
                     double delay_bin_s, const std::string& source) {
    auto out = open_out(path, true);
    nlohmann::ordered_json frames = nlohmann::ordered_json::array();
    for (const auto& r : rows) {
        for (float v : r.mag_db) put_f32(out, v);
        frames.push_back(r.frame_index);
    }
    const nlohmann::ordered_json meta{{"rows", rows.size()},
                                      {"cols", rows.empty() ? 0 : rows.front().mag_db.size()},
                                      {"dtype", "float32"},
                                      {"byte_order", "little"},
                                      {"layout", "row-major"},
                                      {"units", "dB"},
                                      {"source", source},
                                      {"delay_first_ns", first_delay_s * 1e9},
                                      {"delay_bin_ns", delay_bin_s * 1e9},
                                      {"frame_indices", frames}};
    open_out(path + ".json", false) << meta.dump(2) << '\n';
}

void write_heatmap_ppm(const std::string& path, const std::vector<IrRow>& rows, double dynamic_range_db) {
    if (rows.empty()) throw Error(ErrorCode::EmptyInput, "no rows to draw");
    const std::size_t w = rows.front().mag_db.size(), h = rows.size();
    float top = -std::numeric_limits<float>::infinity();
    for (const auto& r : rows)
        for (float v : r.mag_db) top = std::max(top, v);
    auto out = open_out(path, true);
    out << "P6\n" << w << ' ' << h << "\n255\n";
    for (const auto& r : rows)
        for (float v : r.mag_db) {
            const auto rgb = colour(1.0 + (static_cast<double>(v) - top) / dynamic_range_db);
            out.write(reinterpret_cast<const char*>(rgb.data()), 3);
        }
}

}  // namespace delaysync::cli
