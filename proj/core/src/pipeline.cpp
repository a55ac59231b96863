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

#include "delaysync/pipeline.hpp"

#include <cmath>
#include <deque>
#include <functional>
#include <limits>

#include "delaysync/capture_io.hpp"
#include "delaysync/error.hpp"
#include "json_detail.hpp"

namespace delaysync {

namespace {

using detail::json;

// Linear mean of per-frame dB floors, reported back in dB.
class FloorMean {
public:
    void add(double db) {
        sum_ += std::isfinite(db) ? std::pow(10.0, db / 10.0) : 0.0;
        ++n_;
    }
    bool empty() const { return n_ == 0; }
    double db() const {
        if (n_ == 0 || sum_ == 0.0) return -std::numeric_limits<double>::infinity();
        return 10.0 * std::log10(sum_ / static_cast<double>(n_));
    }

private:
    double sum_ = 0.0;
    std::size_t n_ = 0;
};

double frame_noise_floor(const ImpulseResponse& ir, double threshold_db) {
    const auto exclusions = signal_exclusions(ir, threshold_db);
    try {
        return noise_floor_db(ir, exclusions);
    } catch (const Error& e) {
        if (e.code() == ErrorCode::FullyExcluded) return std::numeric_limits<double>::quiet_NaN();
        throw;
    }
}

// Yields frames in order; reset() restarts the stream.
struct FrameSource {
    std::function<std::optional<CsiFrame>()> next;
    std::function<void()> reset;
    std::function<std::size_t()> warnings;
};

void check_chains(const CsiFrame& frame, const PipelineOptions& options, std::size_t index) {
    if (options.ref_chain >= frame.chains.size() || options.target_chain >= frame.chains.size())
        throw Error(ErrorCode::InvalidArgument, "reference/target chain index exceeds the frame's chain count", index);
}

PipelineSummary run(const SubcarrierLayout& layout, FrameSource& source, const PipelineOptions& options,
                    FrameSink* sink) {
    options.validate();
    layout.validate();

    PipelineSummary summary;
    summary.options = options;
    summary.layout = layout;
    summary.delay_bin_s = delay_bin_width(layout, options.kappa);
    summary.tau_ref_s = options.params.tau_ref_s();

    std::optional<PowerFlatteningProfile> profile;
    if (options.flatten) {
        CalibrationState pre_state;
        FlatteningAccumulator acc;
        std::size_t index = 0;
        while (auto frame = source.next()) {
            if (options.flatten_frames != 0 && index >= options.flatten_frames) break;
            check_chains(*frame, options, index);
            try {
                const CsiFrame clean = sanitize_frame(std::move(*frame), layout, options, pre_state);
                acc.add(clean.chains[options.ref_chain]);
            } catch (const Error& e) {
                throw Error(e.code(), e.what(), e.frame_index().value_or(index));
            }
            ++index;
        }
        if (acc.frames() >= 2) profile = acc.finish();
        source.reset();
    }
    summary.flattening = profile;

    FrameProcessor processor(layout, options, profile);
    const int ma = options.params.ma_window;
    std::optional<MovingAverager> averager;
    if (ma > 1) averager.emplace(ma);
    std::deque<std::size_t> pending;  // frame indices awaiting an averaged output
    PeakTracker tracker(options.tracker);
    FloorMean raw_floor, avg_floor;

    auto on_averaged = [&](const ImpulseResponse& ir) {
        const std::size_t idx = pending.front();
        pending.pop_front();
        avg_floor.add(frame_noise_floor(ir, options.noise_exclusion_threshold_db));
        tracker.add(idx, ir);
        if (sink) sink->on_averaged(idx, ir);
    };

    std::size_t index = 0;
    while (auto frame = source.next()) {
        check_chains(*frame, options, index);
        std::optional<FrameResult> result;
        try {
            result = processor.process(index, std::move(*frame));
        } catch (const Error& e) {
            throw Error(e.code(), e.what(), e.frame_index().value_or(index));
        }
        ++summary.frames_total;
        if (!result) {
            ++summary.no_signal_frames;
            ++index;
            continue;
        }
        ++summary.frames_calibrated;
        summary.swaps_fixed += result->swap_fixed;
        summary.pi_shifts_fixed += result->pi_fixed;
        summary.frame_indices.push_back(index);
        summary.tau_star_s.push_back(result->pair.tau_star_s);
        summary.theta_star_rad.push_back(result->pair.theta_star_rad);
        summary.swap_fixed.push_back(result->swap_fixed);
        summary.pi_fixed.push_back(result->pi_fixed);
        if (!std::isnan(result->noise_floor_db)) raw_floor.add(result->noise_floor_db);
        if (sink) sink->on_frame(*result);

        if (averager) {
            pending.push_back(index);
            if (auto avg = averager->push(std::move(result->pair.h_target))) on_averaged(*avg);
        } else {
            tracker.add(index, result->pair.h_target);
        }
        ++index;
    }
    if (averager)
        for (const auto& avg : averager->finish()) on_averaged(avg);

    summary.read_warnings = source.warnings();
    if (summary.frames_total == 0) throw Error(ErrorCode::EmptyCapture, "capture holds no frames");

    summary.noise_floor_db = raw_floor.db();
    if (averager && !avg_floor.empty()) summary.averaged_noise_floor_db = avg_floor.db();
    if (!summary.tau_star_s.empty()) summary.tau_star_cdf = delay_cdf(summary.tau_star_s);
    summary.tracks = tracker.finish();
    if (!summary.frame_indices.empty()) {
        const std::size_t first = summary.frame_indices.front();
        for (const auto& t : summary.tracks)
            if (t.first_frame() == first)
                summary.max_path_distance_m = std::max(summary.max_path_distance_m, t.first_delay_s() * kSpeedOfLight);
    }
    return summary;
}

}  // namespace

void PipelineOptions::validate() const {
    if (ref_chain == target_chain) throw Error(ErrorCode::InvalidArgument, "reference and target chains must differ");
    if (kappa == 0) throw Error(ErrorCode::InvalidArgument, "kappa must be >= 1");
    params.validate();
}

CsiFrame sanitize_frame(CsiFrame frame, const SubcarrierLayout& layout, const PipelineOptions& options,
                        CalibrationState& state, bool* swap_fixed) {
    const bool swapped =
        options.fix_swaps && detect_and_fix_swap(frame, state, options.ref_chain, options.target_chain);
    if (swap_fixed) *swap_fixed = swapped;
    for (std::size_t c : {options.ref_chain, options.target_chain}) {
        auto& chain = frame.chains[c];
        if (!layout.pilot_indices.empty()) chain = interpolate_pilots(chain, layout);
        if (options.interpolate_dc && !layout.dc_indices.empty()) chain = interpolate_dc_gap(chain, layout);
        if (options.repair_notches && !layout.notch_indices.empty()) chain = repair_notches(chain, layout);
    }
    return frame;
}

FrameProcessor::FrameProcessor(const SubcarrierLayout& layout, const PipelineOptions& options,
                               std::optional<PowerFlatteningProfile> profile)
    : layout_(layout),
      options_(options),
      profile_(std::move(profile)),
      transform_(layout, options.kappa, options.window) {}

std::optional<FrameResult> FrameProcessor::process(std::size_t frame_index, CsiFrame frame) {
    FrameResult result;
    result.frame_index = frame_index;
    result.timestamp_ns = frame.timestamp_ns;

    frame = sanitize_frame(std::move(frame), layout_, options_, state_, &result.swap_fixed);
    const std::size_t ref = options_.ref_chain, target = options_.target_chain;
    if (profile_) {
        frame.chains[ref] = apply_flattening(frame.chains[ref], *profile_);
        frame.chains[target] = apply_flattening(frame.chains[target], *profile_);
    }
    try {
        if (options_.scale_power) frame = scale_to_reference(frame, options_.params, ref, target);
        const ImpulseResponse ref_ir = transform_.transform(frame.chains[ref].csi);
        const ImpulseResponse target_ir = transform_.transform(frame.chains[target].csi);
        result.pair = calibrate_pair(ref_ir, target_ir, options_.params);
    } catch (const Error& e) {
        if (e.code() == ErrorCode::NoSignal) return std::nullopt;
        throw;
    }
    if (options_.fix_pi_shifts) result.pi_fixed = fix_pi_shift(result.pair, state_);
    result.noise_floor_db = frame_noise_floor(result.pair.h_target, options_.noise_exclusion_threshold_db);
    return result;
}

PipelineSummary run_pipeline(const std::string& capture_path, const PipelineOptions& options, FrameSink* sink) {
    CaptureReader reader(capture_path);
    FrameSource source{[&] { return reader.next(); }, [&] { reader.rewind(); }, [&] { return reader.warnings(); }};
    return run(reader.header().layout, source, options, sink);
}

PipelineSummary run_pipeline(const SubcarrierLayout& layout, std::span<const CsiFrame> frames,
                             const PipelineOptions& options, FrameSink* sink) {
    std::size_t pos = 0;
    FrameSource source{[&]() -> std::optional<CsiFrame> {
                           if (pos >= frames.size()) return std::nullopt;
                           return frames[pos++];
                       },
                       [&] { pos = 0; }, [] { return std::size_t{0}; }};
    return run(layout, source, options, sink);
}

std::string summary_to_json(const PipelineSummary& s) {
    const auto& o = s.options;
    auto ns = [](double seconds) { return seconds * 1e9; };
    json options{{"ref_chain", o.ref_chain},
                 {"target_chain", o.target_chain},
                 {"kappa", o.kappa},
                 {"window", to_string(o.window)},
                 {"ma_window", o.params.ma_window},
                 {"d_ref_m", o.params.d_ref_m},
                 {"center_freq_hz", o.params.center_freq_hz},
                 {"first_peak_threshold_db", o.params.first_peak_threshold_db},
                 {"fix_swaps", o.fix_swaps},
                 {"fix_pi_shifts", o.fix_pi_shifts},
                 {"interpolate_dc", o.interpolate_dc},
                 {"repair_notches", o.repair_notches},
                 {"flatten", o.flatten},
                 {"flatten_frames", o.flatten_frames},
                 {"scale_power", o.scale_power},
                 {"track_threshold_db", o.tracker.threshold_db}};

    json cdf = json::array();
    for (const auto& p : s.tau_star_cdf) cdf.push_back({ns(p.value), p.probability});

    json tracks = json::array();
    for (const auto& t : s.tracks) {
        json pts = json::array();
        for (const auto& p : t.points) pts.push_back({p.frame, ns(p.delay_s), p.power_db});
        tracks.push_back({{"first_frame", t.first_frame()},
                          {"first_delay_ns", ns(t.first_delay_s())},
                          {"path_distance_m", t.first_delay_s() * kSpeedOfLight},
                          {"points", std::move(pts)}});
    }

    json tau_star = json::array(), theta_star = json::array();
    for (double v : s.tau_star_s) tau_star.push_back(ns(v));
    for (double v : s.theta_star_rad) theta_star.push_back(v);

    auto db_or_null = [](double v) { return std::isfinite(v) ? json(v) : json(nullptr); };
    json doc{{"options", std::move(options)},
             {"layout", detail::layout_to_json(s.layout)},
             {"delay_bin_ns", ns(s.delay_bin_s)},
             {"tau_ref_ns", ns(s.tau_ref_s)},
             {"frames_total", s.frames_total},
             {"frames_calibrated", s.frames_calibrated},
             {"no_signal_frames", s.no_signal_frames},
             {"swaps_fixed", s.swaps_fixed},
             {"pi_shifts_fixed", s.pi_shifts_fixed},
             {"read_warnings", s.read_warnings},
             {"frame_indices", s.frame_indices},
             {"tau_star_ns", std::move(tau_star)},
             {"theta_star_rad", std::move(theta_star)},
             {"tau_star_cdf", std::move(cdf)},
             {"noise_floor_db", db_or_null(s.noise_floor_db)},
             {"averaged_noise_floor_db",
              s.averaged_noise_floor_db ? db_or_null(*s.averaged_noise_floor_db) : json(nullptr)},
             {"tracks", std::move(tracks)},
             {"max_path_distance_m", s.max_path_distance_m}};
    if (s.flattening) doc["flattening_frames_used"] = s.flattening->frames_used;
    return doc.dump(2);
}

}  // namespace delaysync
