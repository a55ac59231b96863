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

#include "delaysync/calibrate.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "delaysync/error.hpp"
#include "delaysync/sounding.hpp"

namespace delaysync {

std::vector<std::size_t> find_peaks(std::span<const cplx> taps, double threshold_db) {
    std::vector<std::size_t> peaks;
    const std::size_t n = taps.size();
    if (n < 3) return peaks;
    RealVector mag(n);
    for (std::size_t i = 0; i < n; ++i) mag[i] = std::abs(taps[i]);
    const double peak = *std::max_element(mag.begin(), mag.end());
    if (!(peak > 0.0) || !std::isfinite(peak)) return peaks;
    const double floor = peak * std::pow(10.0, threshold_db / 20.0);
    for (std::size_t i = 0; i < n; ++i) {
        const double m = mag[i];
        if (m < floor) continue;
        if (m > mag[(i + n - 1) % n] && m > mag[(i + 1) % n]) peaks.push_back(i);
    }
    return peaks;
}

FirstSignal first_signal(const ImpulseResponse& ir, double threshold_db) {
    const auto peaks = find_peaks(ir.taps, threshold_db);
    if (peaks.empty()) throw Error(ErrorCode::NoSignal, "no peak within threshold of the impulse response maximum");
    FirstSignal fs;
    fs.bin = peaks.front();
    fs.delay_s = ir.delay_at(fs.bin);
    fs.phase_rad = std::arg(ir.taps[fs.bin]);
    fs.magnitude = std::abs(ir.taps[fs.bin]);
    return fs;
}

CalibratedPair calibrate_pair(const ImpulseResponse& ref_ir, const ImpulseResponse& target_ir,
                              const CalibrationParams& params) {
    if (ref_ir.size() != target_ir.size() || ref_ir.size() == 0 ||
        std::abs(ref_ir.delay_bin_s - target_ir.delay_bin_s) > 1e-12 * ref_ir.delay_bin_s)
        throw Error(ErrorCode::LengthMismatch, "reference and target responses use different delay grids");

    const FirstSignal fs = first_signal(ref_ir, params.first_peak_threshold_db);
    const double tau_ref = params.tau_ref_s();
    const double dtau = ref_ir.delay_bin_s;
    const auto n = static_cast<long long>(ref_ir.size());

    CalibratedPair out;
    out.tau_star_s = fs.delay_s;
    out.theta_star_rad = fs.phase_rad;
    out.shift_bins = std::llround((tau_ref - fs.delay_s) / dtau);

    const cplx rotation = std::polar(1.0, -fs.phase_rad);
    auto apply = [&](const ImpulseResponse& in) {
        ImpulseResponse r = in;
        r.taps = circular_shift(in.taps, out.shift_bins);
        for (auto& t : r.taps) t *= rotation;
        return r;
    };
    out.h_ref = apply(ref_ir);
    out.h_target = apply(target_ir);

    // Re-anchor the axis so the reference first signal reads exactly tau_ref.
    const long long landed = ((static_cast<long long>(fs.bin) + out.shift_bins) % n + n) % n;
    const double origin = tau_ref - static_cast<double>(landed) * dtau;
    out.h_ref.delay_origin_s = origin;
    out.h_target.delay_origin_s = origin;
    return out;
}

bool fix_pi_shift(CalibratedPair& pair, CalibrationState& state) {
    auto& taps = pair.h_target.taps;
    bool flipped = false;
    if (state.prev_target_ir && state.prev_target_ir->size() == taps.size()) {
        const auto& prev = *state.prev_target_ir;
        double keep = 0.0, negate = 0.0;
        for (std::size_t i = 0; i < taps.size(); ++i) {
            keep += std::norm(taps[i] - prev[i]);
            negate += std::norm(-taps[i] - prev[i]);
        }
        if (negate < keep) {
            for (auto& t : taps) t = -t;
            flipped = true;
        }
    }
    state.prev_target_ir = taps;
    return flipped;
}

MovingAverager::MovingAverager(int window) : window_(window) {
    if (window < 1 || window % 2 == 0)
        throw Error(ErrorCode::InvalidArgument, "moving-average window must be a positive odd integer");
    half_ = static_cast<std::size_t>(window / 2);
}

ImpulseResponse MovingAverager::average(std::size_t centre, std::size_t first, std::size_t last) const {
    ImpulseResponse out = buffer_[centre - base_];
    std::fill(out.taps.begin(), out.taps.end(), cplx{});
    for (std::size_t f = first; f <= last; ++f) {
        const auto& taps = buffer_[f - base_].taps;
        if (taps.size() != out.taps.size())
            throw Error(ErrorCode::LengthMismatch, "moving-average inputs differ in length", f);
        for (std::size_t i = 0; i < taps.size(); ++i) out.taps[i] += taps[i];
    }
    const double scale = 1.0 / static_cast<double>(last - first + 1);
    for (auto& t : out.taps) t *= scale;
    return out;
}

std::optional<ImpulseResponse> MovingAverager::push(ImpulseResponse ir) {
    buffer_.push_back(std::move(ir));
    ++pushed_;
    std::optional<ImpulseResponse> ready;
    // Frame `emitted_` is complete once frames up to emitted_ + half_ exist.
    if (pushed_ > emitted_ + half_) {
        const std::size_t centre = emitted_;
        const std::size_t first = centre >= half_ ? centre - half_ : 0;
        ready = average(centre, first, centre + half_);
        ++emitted_;
        // Frames before the next window start are no longer needed.
        const std::size_t keep_from = emitted_ >= half_ ? emitted_ - half_ : 0;
        while (base_ < keep_from) {
            buffer_.pop_front();
            ++base_;
        }
    }
    return ready;
}

std::vector<ImpulseResponse> MovingAverager::finish() {
    std::vector<ImpulseResponse> out;
    while (emitted_ < pushed_) {
        const std::size_t centre = emitted_;
        const std::size_t first = centre >= half_ ? centre - half_ : 0;
        const std::size_t last = std::min(centre + half_, pushed_ - 1);
        out.push_back(average(centre, first, last));
        ++emitted_;
    }
    buffer_.clear();
    base_ = pushed_;
    return out;
}

std::vector<ImpulseResponse> moving_average(std::span<const ImpulseResponse> series, int window) {
    if (window < 1 || window % 2 == 0)
        throw Error(ErrorCode::InvalidArgument, "moving-average window must be a positive odd integer");
    if (static_cast<std::size_t>(window) > series.size())
        throw Error(ErrorCode::WindowTooLarge, "window " + std::to_string(window) + " exceeds series length " +
                                                   std::to_string(series.size()));
    MovingAverager avg(window);
    std::vector<ImpulseResponse> out;
    out.reserve(series.size());
    for (const auto& ir : series)
        if (auto r = avg.push(ir)) out.push_back(std::move(*r));
    for (auto& r : avg.finish()) out.push_back(std::move(r));
    return out;
}

std::vector<ImpulseResponse> moving_average(std::span<const CalibratedPair> series, int window) {
    std::vector<ImpulseResponse> targets;
    targets.reserve(series.size());
    for (const auto& p : series) targets.push_back(p.h_target);
    return moving_average(targets, window);
}

}  // namespace delaysync
