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

#include <cstddef>
#include <span>
#include <vector>

#include "delaysync/types.hpp"

namespace delaysync {

struct CdfPoint {
    double value = 0.0;
    double probability = 0.0;
};

/// Empirical CDF: sorted samples with step heights i/n. Throws EmptyInput.
std::vector<CdfPoint> delay_cdf(std::span<const double> samples);

/// Two-sided Kolmogorov-Smirnov distance between the sample and U[lo, hi].
double ks_statistic_uniform(std::span<const double> samples, double lo, double hi);

/// Closed delay interval on the absolute axis. Matches modulo the circular span.
struct DelayWindow {
    double begin_s = 0.0;
    double end_s = 0.0;
};

/// Mean tap power in dB outside the exclusion windows; -inf when that power
/// is exactly zero. Throws FullyExcluded.
double noise_floor_db(const ImpulseResponse& ir, std::span<const DelayWindow> exclusions);

/// +-half_width_cells native resolution cells around every peak within
/// threshold_db of the maximum.
std::vector<DelayWindow> signal_exclusions(const ImpulseResponse& ir, double threshold_db = -40.0,
                                           double half_width_cells = 3.0);

/// Unwrapped arg(csi) over ascending subcarrier index.
RealVector unwrapped_phase_spectrum(std::span<const cplx> csi);

/// Dominant-path delay from the least-squares phase slope: slope / (-2 pi df).
double phase_slope_delay(std::span<const double> unwrapped_phase, double spacing_hz);

struct TrackPoint {
    std::size_t frame = 0;
    double delay_s = 0.0;
    double power_db = 0.0;
};

struct PeakTrack {
    std::vector<TrackPoint> points;

    std::size_t first_frame() const noexcept { return points.front().frame; }
    double first_delay_s() const noexcept { return points.front().delay_s; }
};

struct TrackerOptions {
    double threshold_db = -30.0;
    double gate_cells = 3.0;    ///< Max delay jump per frame, in resolution cells.
    std::size_t max_missed = 5; ///< Frames a track may go unmatched before it ends.
    std::size_t min_points = 1;
};

/**
 * @brief Greedy nearest-delay association of per-frame peaks into tracks.
 *
 * Each frame contributes its local maxima within the threshold. All
 * (track, peak) pairs inside the gate are assigned shortest-distance first;
 * unmatched peaks open new tracks.
 */
class PeakTracker {
public:
    explicit PeakTracker(TrackerOptions options = {});

    void add(std::size_t frame, const ImpulseResponse& ir);
    std::vector<PeakTrack> finish();

private:
    struct Active {
        PeakTrack track;
        std::size_t last_frame;
    };
    void retire(std::size_t current_frame);

    TrackerOptions options_;
    std::vector<Active> active_;
    std::vector<PeakTrack> closed_;
};

std::vector<PeakTrack> extract_peak_tracks(std::span<const ImpulseResponse> series, double threshold_db,
                                           TrackerOptions options = {});

/// Least-squares delay slope of a track, seconds per frame.
double track_slope(const PeakTrack& track);

}  // namespace delaysync
