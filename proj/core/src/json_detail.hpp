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

// nlohmann/json bindings for the configuration types. Internal to the core
// library; public callers go through serialization.hpp.

#include <json.hpp>

#include "delaysync/layout.hpp"
#include "delaysync/synth.hpp"
#include "delaysync/types.hpp"

namespace delaysync::detail {

using json = nlohmann::json;

json layout_to_json(const SubcarrierLayout& layout);
SubcarrierLayout layout_from_json(const json& j, SubcarrierLayout base = {});

json params_to_json(const CalibrationParams& params);
CalibrationParams params_from_json(const json& j, CalibrationParams base = {});

json taps_to_json(const TapSet& taps);
TapSet taps_from_json(const json& j);

json scenario_to_json(const ScenarioConfig& cfg);
ScenarioConfig scenario_from_json(const json& j);

json parse(std::string_view text);

}  // namespace delaysync::detail
