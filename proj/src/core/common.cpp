// Copyright 2026 The dcsurrogate Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "core/common.hpp"

namespace dcs {

const char* to_string(Scenario scenario) {
    switch (scenario) {
        case Scenario::homogeneous: return "homogeneous";
        case Scenario::heterogeneous: return "heterogeneous";
    }
    return "unknown";
}

Scenario scenario_from_string(const std::string& name) {
    if (name == "homogeneous") return Scenario::homogeneous;
    if (name == "heterogeneous") return Scenario::heterogeneous;
    fail(ErrorCategory::argument, "unknown scenario '" + name + "' (expected homogeneous or heterogeneous)");
}

}  // namespace dcs
