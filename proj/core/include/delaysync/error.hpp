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
#include <optional>
#include <stdexcept>
#include <string>

namespace delaysync {

enum class ErrorCode {
    InvalidArgument,
    InvalidConfig,
    LengthMismatch,
    InsufficientContext,
    EmptyCapture,
    EmptyInput,
    MissingRss,
    NoSignal,
    WindowTooLarge,
    FullyExcluded,
    BadMagic,
    VersionUnsupported,
    CorruptRecord,
    Io,
};

const char* to_string(ErrorCode code) noexcept;

// All library failures are reported through this type. `frame_index` is
// attached when the failure is tied to one record of a capture stream.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what, std::optional<std::size_t> frame_index = std::nullopt);

    ErrorCode code() const noexcept { return code_; }
    std::optional<std::size_t> frame_index() const noexcept { return frame_index_; }

private:
    ErrorCode code_;
    std::optional<std::size_t> frame_index_;
};

}  // namespace delaysync
