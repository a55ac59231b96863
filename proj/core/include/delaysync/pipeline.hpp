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

#pragma once

/**
 * @file pipeline.hpp
 * @brief End-to-end processing of a capture stream.
 *
 * Per frame: swap fix -> pilot/DC interpolation -> notch repair -> power
 * flattening -> reference scaling -> window + IDFT -> first-signal detection
 * -> delay calibration / phase normalization -> pi-shift fix -> optional
 * moving average -> analysis. Frames whose reference shows no signal are
 * counted and skipped.
 *
 * The flattening profile needs a first pass over the leading frames, so
 * file-based runs read the capture twice. Memory otherwise stays bounded by
 * the moving-average window plus one frame.
 */

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "delaysync/analysis.hpp"
#include "delaysync/calibrate.hpp"
#include "delaysync/layout.hpp"
#include "delaysync/preprocess.hpp"
#include "delaysync/sounding.hpp"
#include "delaysync/types.hpp"

namespace delaysync {

struct PipelineOptions {
    std::size_t ref_chain = 0;
    std::size_t target_chain = 1;
    std::size_t kappa = 8;
    WindowKind window = WindowKind::Blackman;
    CalibrationParams params;  ///< ma_window == 1 disables averaging.

    bool fix_swaps = true;
    bool fix_pi_shifts = true;
    bool interpolate_dc = true;
    bool repair_notches = true;
    bool flatten = true;
    std::size_t flatten_frames = 0;  ///< Leading frames used for the profile; 0 = whole capture.
    bool scale_power = true;

    double noise_exclusion_threshold_db = -40.0;
    TrackerOptions tracker{.threshold_db = -35.0, .gate_cells = 3.0, .max_missed = 5, .min_points = 5};

    void validate() const;
};

struct FrameResult {
    std::size_t frame_index = 0;
    std::int64_t timestamp_ns = 0;
    CalibratedPair pair;
    bool swap_fixed = false;
    bool pi_fixed = false;
    double noise_floor_db = 0.0;
};

/// Receives per-frame outputs as the stream is processed.
class FrameSink {
public:
    virtual ~FrameSink() = default;
    virtual void on_frame(const FrameResult& /*result*/) {}
    /// Moving-average output for frame `frame_index` (only when averaging is on).
    virtual void on_averaged(std::size_t /*frame_index*/, const ImpulseResponse& /*target*/) {}
};

struct PipelineSummary {
    PipelineOptions options;
    SubcarrierLayout layout;
    double delay_bin_s = 0.0;
    double tau_ref_s = 0.0;

    std::size_t frames_total = 0;
    std::size_t frames_calibrated = 0;
    std::size_t no_signal_frames = 0;
    std::size_t swaps_fixed = 0;
    std::size_t pi_shifts_fixed = 0;
    std::size_t read_warnings = 0;
    std::optional<PowerFlatteningProfile> flattening;

    std::vector<std::size_t> frame_indices;  ///< Calibrated frames, in order.
    RealVector tau_star_s;
    RealVector theta_star_rad;
    std::vector<bool> swap_fixed;
    std::vector<bool> pi_fixed;
    std::vector<CdfPoint> tau_star_cdf;

    double noise_floor_db = 0.0;           ///< Calibrated target, before averaging.
    std::optional<double> averaged_noise_floor_db;
    std::vector<PeakTrack> tracks;         ///< On the averaged series when averaging is on.
    double max_path_distance_m = 0.0;      ///< Longest delay among tracks present in the first frame, times c.
};

/// Stateful per-stream frame processor (swap and pi-shift trackers).
class FrameProcessor {
public:
    FrameProcessor(const SubcarrierLayout& layout, const PipelineOptions& options,
                   std::optional<PowerFlatteningProfile> profile);

    /// nullopt when the frame carries no reference signal.
    std::optional<FrameResult> process(std::size_t frame_index, CsiFrame frame);

private:
    SubcarrierLayout layout_;
    PipelineOptions options_;
    std::optional<PowerFlatteningProfile> profile_;
    DelayTransform transform_;
    CalibrationState state_;
};

/// Swap fix, pilot/DC interpolation and notch repair for one frame; the part
/// of the chain that precedes flattening.
CsiFrame sanitize_frame(CsiFrame frame, const SubcarrierLayout& layout, const PipelineOptions& options,
                        CalibrationState& state, bool* swap_fixed = nullptr);

PipelineSummary run_pipeline(const std::string& capture_path, const PipelineOptions& options,
                             FrameSink* sink = nullptr);
PipelineSummary run_pipeline(const SubcarrierLayout& layout, std::span<const CsiFrame> frames,
                             const PipelineOptions& options, FrameSink* sink = nullptr);

/// Result bundle as JSON. Contains no wall-clock data, so identical inputs
/// give identical text.
std::string summary_to_json(const PipelineSummary& summary);

}  // namespace delaysync
