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
 * @file capture_io.hpp
 * @brief Binary capture files.
 *
 * All integers and floats are little-endian.
 *
 *   "DSCF"                         4-byte magic
 *   u32 version                    currently 1
 *   u32 header_length
 *   header_length bytes            UTF-8 JSON: format_version, chain_count,
 *                                  layout, params, metadata
 *   records, each:
 *     i64 timestamp_ns
 *     per chain:
 *       f32 rss_dbm                NaN when not reported
 *       u32 subcarrier_count       must equal layout.count
 *       count x (f32 re, f32 im)   ascending subcarrier index
 *
 * Record size is fully determined by the header.
 */

#include <cstddef>
#include <cstdint>
#include <fstream>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "delaysync/layout.hpp"
#include "delaysync/types.hpp"

namespace delaysync {

inline constexpr std::uint32_t kCaptureVersion = 1;
inline constexpr char kCaptureMagic[4] = {'D', 'S', 'C', 'F'};

struct CaptureHeader {
    SubcarrierLayout layout = make_he160_layout();
    CalibrationParams params;
    std::size_t chain_count = 2;
    std::string metadata_json = "{}";  ///< Free-form JSON object.
};

std::size_t record_size(const CaptureHeader& header) noexcept;

class CaptureWriter {
public:
    CaptureWriter(const std::string& path, const CaptureHeader& header);

    /// Rejects frames that do not match the header or whose timestamp does not increase.
    void write(const CsiFrame& frame);
    void close();
    std::size_t frames_written() const noexcept { return written_; }

private:
    std::ofstream out_;
    CaptureHeader header_;
    std::size_t written_ = 0;
    std::optional<std::int64_t> last_timestamp_;
};

/**
 * Streaming reader. A truncated trailing record ends the stream and is
 * counted in warnings(); a record with the wrong subcarrier count, a
 * non-finite value or a non-increasing timestamp throws CorruptRecord.
 */
class CaptureReader {
public:
    explicit CaptureReader(const std::string& path);

    const CaptureHeader& header() const noexcept { return header_; }
    std::optional<CsiFrame> next();
    /// Restarts at the first record.
    void rewind();

    std::size_t frames_read() const noexcept { return index_; }
    std::size_t warnings() const noexcept { return warnings_; }

private:
    std::string path_;
    std::ifstream in_;
    CaptureHeader header_;
    std::streamoff data_start_ = 0;
    std::size_t index_ = 0;
    std::size_t warnings_ = 0;
    bool done_ = false;
    std::optional<std::int64_t> last_timestamp_;
};

struct Capture {
    CaptureHeader header;
    std::vector<CsiFrame> frames;
    std::size_t warnings = 0;
};

Capture read_capture(const std::string& path);
void write_capture(const std::string& path, const CaptureHeader& header, std::span<const CsiFrame> frames);

}  // namespace delaysync
