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
 * @file sounding.hpp
 * @brief Frequency-to-delay transform of one CSI vector.
 *
 * The live subcarriers are windowed, scaled by the window's coherent-gain
 * compensation N / sum(w), placed DC-centred into a zero-padded grid of
 * kappa * bit_ceil(count) bins and inverse transformed. The inverse transform
 * is normalized by 1/count, so a unit flat spectrum yields a unit tap at
 * delay 0 and a single path of complex gain a yields a peak of about a.
 *
 * With the 802.11ax 160 MHz layout and kappa = 8 the grid has 16384 bins and
 * the bin width is 1 / (8 * 160 MHz) = 0.78125 ns.
 */

#include <cstddef>
#include <memory>
#include <span>
#include <string>

#include "delaysync/layout.hpp"
#include "delaysync/types.hpp"

namespace delaysync {

enum class WindowKind { Rectangular, Blackman };

const char* to_string(WindowKind kind) noexcept;
WindowKind window_from_string(const std::string& name);

/// Classic Blackman coefficients 0.42 - 0.5 cos(2 pi i/(N-1)) + 0.08 cos(4 pi i/(N-1)).
RealVector blackman_window(std::size_t n_points);

RealVector make_window(WindowKind kind, std::size_t n_points);

/// Applies the window and the coherent-gain compensation N / sum(w).
ComplexVector window_and_compensate(std::span<const cplx> csi, WindowKind kind = WindowKind::Blackman);

/// Bins on the zero-padded delay grid: kappa * bit_ceil(count).
std::size_t padded_grid_size(const SubcarrierLayout& layout, std::size_t kappa);

/// Delay bin width 1 / (grid * spacing).
double delay_bin_width(const SubcarrierLayout& layout, std::size_t kappa);

/**
 * @brief Reusable delay transform for one (layout, kappa, window) triple.
 *
 * Owns its FFT plan and work buffers. An instance must not be used from two
 * threads at once; create one per worker instead.
 */
class DelayTransform {
public:
    DelayTransform(const SubcarrierLayout& layout, std::size_t kappa, WindowKind window = WindowKind::Blackman);
    ~DelayTransform();
    DelayTransform(DelayTransform&&) noexcept;
    DelayTransform& operator=(DelayTransform&&) noexcept;
    DelayTransform(const DelayTransform&) = delete;
    DelayTransform& operator=(const DelayTransform&) = delete;

    /// Throws LengthMismatch if csi.size() != layout.count.
    ImpulseResponse transform(std::span<const cplx> csi);

    std::size_t grid_size() const noexcept;
    double delay_bin_s() const noexcept;
    const RealVector& window() const noexcept;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

/// One-shot convenience wrapper around DelayTransform.
ImpulseResponse to_impulse_response(std::span<const cplx> csi, const SubcarrierLayout& layout, std::size_t kappa,
                                    WindowKind window = WindowKind::Blackman);

/// Circularly shifts taps by `bins` (positive moves energy to later delays).
ComplexVector circular_shift(std::span<const cplx> taps, long long bins);

double total_energy(std::span<const cplx> v) noexcept;

}  // namespace delaysync
