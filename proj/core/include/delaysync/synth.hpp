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
 * @file synth.hpp
 * @brief Tapped-delay-line CSI generator used as ground truth.
 *
 * Each frame draws one symbol-timing offset and one global phase that are
 * shared by every receive chain (one device, one clock):
 *
 *   H_c(k) = e^{j psi} * sum_l a_l * exp(-j 2 pi k df (tau_l + delta)) + noise
 *
 * Chain 0 carries the reference channel, chain 1 the target channel.
 * Optional device impairments (edge roll-off, notch attenuation, blank DC,
 * AGC normalization) and faults (chain swap, target pi-shift) mirror what a
 * commodity receiver reports.
 */

#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

#include "delaysync/layout.hpp"
#include "delaysync/types.hpp"

namespace delaysync {

struct Tap {
    double delay_s = 0.0;
    cplx gain{1.0, 0.0};
    double drift_mps = 0.0;  ///< Rate of change of the path length.
};

struct TapSet {
    std::vector<Tap> taps;

    /// Delays strictly increasing, non-negative and below max_delay_s.
    void validate(double max_delay_s) const;
    /// Taps at time t; a moving path also rotates its carrier phase.
    std::vector<Tap> at_time(double t_s, double center_freq_hz) const;
    double total_power() const noexcept;
};

struct ScenarioConfig {
    SubcarrierLayout layout = make_he160_layout();
    double center_freq_hz = 5.25e9;
    TapSet ref_taps;
    TapSet target_taps;

    double timing_offset_min_s = 680e-9;
    double timing_offset_max_s = 800e-9;
    double cyclic_prefix_s = 3200e-9;
    bool random_global_phase = true;

    std::optional<double> snr_db;  ///< Against the reference chain's mean power; nullopt is noiseless.
    std::size_t frame_count = 1000;
    double frame_interval_s = 8e-3;
    double backoff_jitter_s = 135e-6;

    double swap_probability = 0.0;
    double pi_shift_probability = 0.0;

    bool agc_normalize = true;
    bool blank_dc = true;
    double notch_attenuation_db = 0.0;
    double edge_rolloff_db = 0.0;
    double tx_power_dbm = 20.0;

    void validate() const;
};

struct GroundTruth {
    std::size_t frame_index = 0;
    double time_s = 0.0;
    double timing_offset_s = 0.0;
    double global_phase_rad = 0.0;
    bool swapped = false;
    bool pi_shifted = false;
    std::vector<Tap> ref_taps;
    std::vector<Tap> target_taps;
};

struct SynthFrame {
    CsiFrame frame;
    GroundTruth truth;
};

/// Pure in (cfg, frame_index, seed). Faults are never injected into frame 0.
SynthFrame generate_frame(const ScenarioConfig& cfg, std::size_t frame_index, std::uint64_t seed);

/// Corridor run: reference at 3.0 m, target echoes at 40/240/440 ns that
/// shorten as the cart approaches, plus one echo (140 ns) that lengthens.
ScenarioConfig corridor_scenario();

/// Static two-path target channel with offsets spread over the full cyclic prefix.
ScenarioConfig static_scenario();

/// Free-space amplitude c / (4 pi f d).
double friis_amplitude(double distance_m, double center_freq_hz) noexcept;

}  // namespace delaysync
