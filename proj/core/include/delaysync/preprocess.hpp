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
 * @file preprocess.hpp
 * @brief Per-frame CSI sanitization ahead of the delay transform.
 *
 * Every operation here is a pure map over one chain or one frame except
 * detect_and_fix_swap, whose only state is the previous frame's magnitudes.
 */

#include <cstddef>
#include <span>

#include "delaysync/layout.hpp"
#include "delaysync/types.hpp"

namespace delaysync {

struct PowerFlatteningProfile {
    RealVector per_subcarrier_gain;  ///< Power gain per subcarrier, geometric mean 1.
    std::size_t frames_used = 0;
};

/// Number of valid subcarriers used on each side of the DC gap.
inline constexpr std::size_t kDcContext = 10;

/// Fills pilot subcarriers from their neighbours: linear magnitude,
/// linear unwrapped phase. Used when the input still has raw pilots.
ChainRecord interpolate_pilots(const ChainRecord& chain, const SubcarrierLayout& layout);

/**
 * @brief Reconstructs the unobserved DC subcarriers.
 *
 * Magnitudes are linearly interpolated between the nearest valid neighbours.
 * Phases are filled in two steps: the unwrapped phase just above the gap is
 * pinned by extrapolating a line fitted to the `context` subcarriers below
 * it, then the gap is filled from a line regressed on the unwrapped phases of
 * `context` subcarriers on each side.
 *
 * Throws InsufficientContext when either side has fewer than `context` valid
 * subcarriers.
 */
ChainRecord interpolate_dc_gap(const ChainRecord& chain, const SubcarrierLayout& layout,
                               std::size_t context = kDcContext);

/// Replaces notch magnitudes by linear interpolation of the neighbouring
/// magnitudes. Phases are kept.
ChainRecord repair_notches(const ChainRecord& chain, const SubcarrierLayout& layout);

/// Estimates the power-flattening profile of one chain from the given frames
/// (all of them, or the first `max_frames` when non-zero). Needs two frames.
PowerFlatteningProfile estimate_flattening(std::span<const CsiFrame> frames, std::size_t chain,
                                           std::size_t max_frames = 0);

/// Incremental form of estimate_flattening for streamed captures.
class FlatteningAccumulator {
public:
    void add(const ChainRecord& chain);
    std::size_t frames() const noexcept { return frames_; }
    PowerFlatteningProfile finish() const;

private:
    RealVector power_sum_;
    std::size_t frames_ = 0;
};

ChainRecord apply_flattening(const ChainRecord& chain, const PowerFlatteningProfile& profile);

/**
 * Un-swaps chains `a` and `b` when the swapped assignment is strictly closer
 * (summed Euclidean magnitude distance) to the previous frame than the
 * straight one. The first frame seeds the state. Returns true when the frame
 * was swapped back.
 */
bool detect_and_fix_swap(CsiFrame& frame, CalibrationState& state, std::size_t a = 0, std::size_t b = 1);

/**
 * Scales the reference chain so its mean per-subcarrier power equals the
 * free-space path gain at d_ref, and the target chain by the same factor times
 * 10^((rss_target - rss_ref) / 10). Throws MissingRss.
 */
CsiFrame scale_to_reference(const CsiFrame& frame, const CalibrationParams& params, std::size_t ref_chain,
                            std::size_t target_chain);

double mean_power(std::span<const cplx> csi) noexcept;

}  // namespace delaysync
