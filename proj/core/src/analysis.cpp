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

#include "delaysync/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <tuple>

#include "delaysync/calibrate.hpp"
#include "delaysync/error.hpp"
#include "delaysync/phase.hpp"

namespace delaysync {

std::vector<CdfPoint> delay_cdf(std::span<const double> samples) {
    if (samples.empty()) throw Error(ErrorCode::EmptyInput, "CDF of an empty sample");
    RealVector sorted(samples.begin(), samples.end());
    std::sort(sorted.begin(), sorted.end());
    std::vector<CdfPoint> cdf(sorted.size());
    const double n = static_cast<double>(sorted.size());
    for (std::size_t i = 0; i < sorted.size(); ++i) cdf[i] = {sorted[i], static_cast<double>(i + 1) / n};
    return cdf;
}

double ks_statistic_uniform(std::span<const double> samples, double lo, double hi) {
    if (samples.empty()) throw Error(ErrorCode::EmptyInput, "KS statistic of an empty sample");
    if (!(hi > lo)) throw Error(ErrorCode::InvalidArgument, "KS reference interval must be non-degenerate");
    RealVector sorted(samples.begin(), samples.end());
    std::sort(sorted.begin(), sorted.end());
    const double n = static_cast<double>(sorted.size());
    double d = 0.0;
    for (std::size_t i = 0; i < sorted.size(); ++i) {
        const double f = std::clamp((sorted[i] - lo) / (hi - lo), 0.0, 1.0);
        d = std::max({d, static_cast<double>(i + 1) / n - f, f - static_cast<double>(i) / n});
    }
    return d;
}

double noise_floor_db(const ImpulseResponse& ir, std::span<const DelayWindow> exclusions) {
    const double span = ir.span_s();
    auto excluded = [&](double d) {
        for (const auto& w : exclusions)
            for (double wrap : {-span, 0.0, span})
                if (d + wrap >= w.begin_s && d + wrap <= w.end_s) return true;
        return false;
    };
    double sum = 0.0;
    std::size_t used = 0;
    for (std::size_t i = 0; i < ir.size(); ++i) {
        if (excluded(ir.delay_at(i))) continue;
        sum += std::norm(ir.taps[i]);
        ++used;
    }
    if (used == 0) throw Error(ErrorCode::FullyExcluded, "exclusion windows cover the whole delay axis");
    if (sum == 0.0) return -std::numeric_limits<double>::infinity();
    return 10.0 * std::log10(sum / static_cast<double>(used));
}

std::vector<DelayWindow> signal_exclusions(const ImpulseResponse& ir, double threshold_db, double half_width_cells) {
    std::vector<DelayWindow> out;
    const double half = half_width_cells * (ir.resolution_s > 0.0 ? ir.resolution_s : ir.delay_bin_s);
    for (std::size_t bin : find_peaks(ir.taps, threshold_db)) {
        const double d = ir.delay_at(bin);
        out.push_back({d - half, d + half});
    }
    return out;
}

RealVector unwrapped_phase_spectrum(std::span<const cplx> csi) {
    RealVector phase(csi.size());
    std::transform(csi.begin(), csi.end(), phase.begin(), [](const cplx& h) { return std::arg(h); });
    return unwrap_phase(phase);
}

double phase_slope_delay(std::span<const double> unwrapped_phase, double spacing_hz) {
    RealVector k(unwrapped_phase.size());
    for (std::size_t i = 0; i < k.size(); ++i) k[i] = static_cast<double>(i);
    const LineFit fit = fit_line(k, unwrapped_phase);
    return fit.slope / (-2.0 * std::numbers::pi * spacing_hz);
}

PeakTracker::PeakTracker(TrackerOptions options) : options_(options) {}

void PeakTracker::retire(std::size_t current_frame) {
    auto stale = [&](const Active& a) { return current_frame > a.last_frame + options_.max_missed + 1; };
    for (auto& a : active_)
        if (stale(a)) closed_.push_back(std::move(a.track));
    std::erase_if(active_, stale);
}

void PeakTracker::add(std::size_t frame, const ImpulseResponse& ir) {
    retire(frame);
    std::vector<TrackPoint> peaks;
    for (std::size_t bin : find_peaks(ir.taps, options_.threshold_db))
        peaks.push_back({frame, ir.delay_at(bin), 20.0 * std::log10(std::abs(ir.taps[bin]))});

    const double gate = options_.gate_cells * (ir.resolution_s > 0.0 ? ir.resolution_s : ir.delay_bin_s);
    std::vector<std::tuple<double, std::size_t, std::size_t>> pairs;
    for (std::size_t t = 0; t < active_.size(); ++t) {
        const double last = active_[t].track.points.back().delay_s;
        for (std::size_t p = 0; p < peaks.size(); ++p) {
            const double dist = std::abs(peaks[p].delay_s - last);
            if (dist <= gate) pairs.emplace_back(dist, t, p);
        }
    }
    std::sort(pairs.begin(), pairs.end());
    std::vector<bool> track_used(active_.size(), false), peak_used(peaks.size(), false);
    for (const auto& [dist, t, p] : pairs) {
        if (track_used[t] || peak_used[p]) continue;
        track_used[t] = peak_used[p] = true;
        active_[t].track.points.push_back(peaks[p]);
        active_[t].last_frame = frame;
    }
    for (std::size_t p = 0; p < peaks.size(); ++p)
        if (!peak_used[p]) active_.push_back({PeakTrack{{peaks[p]}}, frame});
}

std::vector<PeakTrack> PeakTracker::finish() {
    for (auto& a : active_) closed_.push_back(std::move(a.track));
    active_.clear();
    std::vector<PeakTrack> out;
    for (auto& t : closed_)
        if (t.points.size() >= options_.min_points) out.push_back(std::move(t));
    closed_.clear();
    std::sort(out.begin(), out.end(), [](const PeakTrack& a, const PeakTrack& b) {
        return std::make_pair(a.first_frame(), a.first_delay_s()) < std::make_pair(b.first_frame(), b.first_delay_s());
    });
    return out;
}

std::vector<PeakTrack> extract_peak_tracks(std::span<const ImpulseResponse> series, double threshold_db,
                                           TrackerOptions options) {
    if (series.empty()) return {};
    options.threshold_db = threshold_db;
    PeakTracker tracker(options);
    for (std::size_t f = 0; f < series.size(); ++f) tracker.add(f, series[f]);
    return tracker.finish();
}

double track_slope(const PeakTrack& track) {
    RealVector x, y;
    for (const auto& p : track.points) {
        x.push_back(static_cast<double>(p.frame));
        y.push_back(p.delay_s);
    }
    return fit_line(x, y).slope;
}

}  // namespace delaysync
