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
 * @file types.hpp
 * @brief Domain value types shared by every stage of the sounding pipeline.
 *
 * CSI vectors are stored in ascending subcarrier index order
 * (index_min first). Delay-domain vectors are stored on a circular axis
 * whose tap 0 sits at `delay_origin_s`.
 */

#include <complex>
#include <cstdint>
#include <optional>
#include <vector>

namespace delaysync {

using cplx = std::complex<double>;
using ComplexVector = std::vector<cplx>;
using RealVector = std::vector<double>;

inline constexpr double kSpeedOfLight = 299'792'458.0;

/// One receive chain of one acquisition.
struct ChainRecord {
    ComplexVector csi;
    std::optional<double> rss_dbm;
};

/// One acquisition. Chains are indexed by receive port.
struct CsiFrame {
    std::int64_t timestamp_ns = 0;
    std::vector<ChainRecord> chains;
};

/// Complex delay taps on an oversampled, circular delay grid.
struct ImpulseResponse {
    ComplexVector taps;
    double delay_bin_s = 0.0;     ///< Delay-domain bin width.
    double delay_origin_s = 0.0;  ///< Absolute delay of tap 0.
    double resolution_s = 0.0;    ///< 1 / live bandwidth; the native delay resolution.

    std::size_t size() const noexcept { return taps.size(); }
    double delay_at(std::size_t bin) const noexcept {
        return delay_origin_s + static_cast<double>(bin) * delay_bin_s;
    }
    /// Length of the circular delay axis (1 / subcarrier spacing).
    double span_s() const noexcept { return static_cast<double>(taps.size()) * delay_bin_s; }
};

/// Parameters of the reference-antenna calibration.
struct CalibrationParams {
    double d_ref_m = 3.0;
    double c_mps = kSpeedOfLight;
    double center_freq_hz = 5.25e9;
    double first_peak_threshold_db = -15.0;
    int ma_window = 11;

    /// Free-space delay of the reference path.
    double tau_ref_s() const noexcept { return d_ref_m / c_mps; }
    /// Friis free-space power gain (c / (4 pi d f))^2 of the reference path.
    double free_space_gain() const noexcept;
    double free_space_gain_db() const noexcept;

    void validate() const;
};

/// Per-stream tracker state threaded through the stateful stages.
struct CalibrationState {
    std::optional<std::vector<RealVector>> prev_magnitudes;
    std::optional<ComplexVector> prev_target_ir;
};

}  // namespace delaysync
