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

#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace dcs {

// Error categories double as the C API status codes and the CLI exit codes.
enum class ErrorCategory : int {
    argument = 1,
    parse = 2,
    validation = 3,
    io = 4,
    simulation = 5,
    numeric = 6,
    missing_artifact = 7,
    internal = 99,
};

class Error : public std::runtime_error {
public:
    Error(ErrorCategory category, const std::string& message)
        : std::runtime_error(message), category_(category) {}

    ErrorCategory category() const noexcept { return category_; }

private:
    ErrorCategory category_;
};

[[noreturn]] inline void fail(ErrorCategory category, const std::string& message) {
    throw Error(category, message);
}

enum class Scenario { homogeneous, heterogeneous };

const char* to_string(Scenario scenario);
Scenario scenario_from_string(const std::string& name);

// 64-bit FNV-1a, used for manifest fingerprints.
inline std::uint64_t fnv1a64(const std::string& text) {
    std::uint64_t hash = 0xcbf29ce484222325ULL;
    for (unsigned char c : text) {
        hash ^= c;
        hash *= 0x100000001b3ULL;
    }
    return hash;
}

}  // namespace dcs
