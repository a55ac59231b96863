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

// Result exports for the command-line driver: per-frame IR CSV, a float32
// dB matrix with a JSON sidecar, and a binary PPM heatmap.

#include <cstddef>
#include <string>
#include <vector>

#include "delaysync/pipeline.hpp"

namespace delaysync::cli {

struct IrRow {
    std::size_t frame_index = 0;
    std::vector<float> mag_db;
    std::vector<float> phase_rad;
};

/// Collects a cropped delay window of every calibrated and averaged target IR.
class IrCollector : public FrameSink {
public:
    IrCollector(double min_delay_s, double max_delay_s) : min_delay_s_(min_delay_s), max_delay_s_(max_delay_s) {}

    void on_frame(const FrameResult& result) override;
    void on_averaged(std::size_t frame_index, const ImpulseResponse& target) override;

    const std::vector<IrRow>& calibrated() const noexcept { return calibrated_; }
    const std::vector<IrRow>& averaged() const noexcept { return averaged_; }
    double first_delay_s() const noexcept { return first_delay_s_; }
    double delay_bin_s() const noexcept { return delay_bin_s_; }

private:
    IrRow crop(std::size_t frame_index, const ImpulseResponse& ir);

    double min_delay_s_, max_delay_s_;
    double first_delay_s_ = 0.0;
    double delay_bin_s_ = 0.0;
    std::vector<IrRow> calibrated_;
    std::vector<IrRow> averaged_;
};

void write_ir_csv(const std::string& path, const std::vector<IrRow>& rows, double first_delay_s, double delay_bin_s);

/// Row-major little-endian float32 magnitudes (dB) plus `<path>.json` describing the axes.
void write_ir_matrix(const std::string& path, const std::vector<IrRow>& rows, double first_delay_s,
                     double delay_bin_s, const std::string& source);

/// Delay across, frames down; `dynamic_range_db` below the peak maps to the bottom of the colour scale.
void write_heatmap_ppm(const std::string& path, const std::vector<IrRow>& rows, double dynamic_range_db);

}  // namespace delaysync::cli
