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
 * @file calibrate.hpp
 * @brief Reference-anchored delay calibration and phase normalization.
 *
 * For every acquisition the first signal of the reference impulse response is
 * located (delay tau*, phase theta*). Both reference and target responses are
 * then circularly shifted by round((tau_ref - tau*) / dtau) bins and rotated
 * by exp(-j theta*), so the reference first signal lands at the known
 * free-space delay tau_ref = d_ref / c with zero phase. Because both receive
 * chains share one clock, the same correction removes the per-acquisition
 * symbol-timing offset and common phase from the target.
 */

#include <cstddef>
#include <deque>
#include <optional>
#include <span>
#include <vector>

#include "delaysync/types.hpp"

namespace delaysync {

struct FirstSignal {
    std::size_t bin = 0;
    double delay_s = 0.0;
    double phase_rad = 0.0;
    double magnitude = 0.0;
};

/// Bins that are strict local maxima of |taps| on the circular axis and lie
/// within `threshold_db` (<= 0) of the global maximum, in ascending order.
std::vector<std::size_t> find_peaks(std::span<const cplx> taps, double threshold_db);

/// Earliest qualifying peak (see find_peaks). Throws NoSignal.
FirstSignal first_signal(const ImpulseResponse& ir, double threshold_db);

struct CalibratedPair {
    ImpulseResponse h_ref;
    ImpulseResponse h_target;
    double tau_star_s = 0.0;      ///< Pre-calibration reference first-signal delay.
    double theta_star_rad = 0.0;  ///< Reference phase at tau_star_s.
    long long shift_bins = 0;
};

/// Throws LengthMismatch when the two responses use different grids;
/// propagates NoSignal from the reference detector.
CalibratedPair calibrate_pair(const ImpulseResponse& ref_ir, const ImpulseResponse& target_ir,
                              const CalibrationParams& params);

/// Keeps whichever of {h_target, -h_target} is closer to the previous target.
/// Returns true when the target was negated.
bool fix_pi_shift(CalibratedPair& pair, CalibrationState& state);

/**
 * @brief Centred complex moving average over a stream of responses.
 *
 * Windows shrink at both ends of the stream. Memory is bounded by the window.
 */
class MovingAverager {
public:
    explicit MovingAverager(int window);

    /// Feeds the next response; returns the average that became complete, if any.
    std::optional<ImpulseResponse> push(ImpulseResponse ir);
    /// Drains the trailing outputs once the stream has ended.
    std::vector<ImpulseResponse> finish();

    int window() const noexcept { return window_; }

private:
    ImpulseResponse average(std::size_t centre, std::size_t first, std::size_t last) const;

    int window_;
    std::size_t half_;
    std::deque<ImpulseResponse> buffer_;  // frames [base_, base_ + size)
    std::size_t base_ = 0;
    std::size_t pushed_ = 0;
    std::size_t emitted_ = 0;
};

/// Batch moving average. Throws InvalidArgument for even windows and
/// WindowTooLarge when the window exceeds the series length.
std::vector<ImpulseResponse> moving_average(std::span<const ImpulseResponse> series, int window);
std::vector<ImpulseResponse> moving_average(std::span<const CalibratedPair> series, int window);

}  // namespace delaysync
