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

#include <string>
#include <string_view>

#include "delaysync/layout.hpp"
#include "delaysync/synth.hpp"
#include "delaysync/types.hpp"

namespace delaysync {

// JSON text forms of the configuration types. Readers start from the
// built-in defaults and override only the keys present, so partial
// documents are valid. Parse failures throw InvalidConfig.

std::string to_json(const SubcarrierLayout& layout);
SubcarrierLayout layout_from_json(std::string_view text);

std::string to_json(const CalibrationParams& params);
CalibrationParams params_from_json(std::string_view text);

/// A scenario document may name a canned base ("base": "corridor" | "static").
std::string to_json(const ScenarioConfig& cfg);
ScenarioConfig scenario_from_json(std::string_view text);

std::string read_text_file(const std::string& path);

}  // namespace delaysync
