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
#include <utility>
#include <vector>

namespace delaysync {

/**
 * @brief OFDM subcarrier grid.
 *
 * Subcarrier index k runs over [index_min, index_max]; its frequency offset
 * from the carrier is k * spacing_hz. Index sets are kept sorted and unique.
 */
struct SubcarrierLayout {
    std::size_t count = 0;
    double spacing_hz = 0.0;
    int index_min = 0;
    int index_max = -1;
    std::vector<int> dc_indices;
    std::vector<int> notch_indices;
    std::vector<int> pilot_indices;

    /// Occupied bandwidth count * spacing.
    double bandwidth_hz() const noexcept { return static_cast<double>(count) * spacing_hz; }

    /// Vector position of subcarrier index k.
    std::size_t position(int k) const noexcept { return static_cast<std::size_t>(k - index_min); }
    int index_at(std::size_t pos) const noexcept { return index_min + static_cast<int>(pos); }
    bool contains(int k) const noexcept { return k >= index_min && k <= index_max; }

    /// Sorts index sets and checks every structural invariant; throws InvalidConfig.
    void validate() const;

    bool operator==(const SubcarrierLayout&) const = default;
};

/// 802.11ax 160 MHz layout: 2025 subcarriers (-1012..1012) at 78.125 kHz,
/// DC gap -11..11 and device notches at +-766..+-770.
SubcarrierLayout make_he160_layout();

/// Splits a sorted index set into maximal runs of consecutive indices.
std::vector<std::pair<int, int>> contiguous_runs(const std::vector<int>& sorted_indices);

}  // namespace delaysync
