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

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "core/common.hpp"

namespace dcs {

enum class NodeRole { worker, scheduler, storage };

const char* to_string(NodeRole role);

struct NodeSpec {
    std::string id;
    NodeRole role = NodeRole::worker;
    int cores = 0;
    double core_speed = 0.0;        // flop/s per core
    double disk_read_bw = 0.0;      // byte/s; 0 on non-storage nodes means unconstrained
    double disk_write_bw = 0.0;     // byte/s
    double storage_capacity = 0.0;  // bytes

    bool operator==(const NodeSpec&) const = default;
};

struct LinkSpec {
    std::string id;
    double bandwidth = 0.0;  // byte/s
    double latency = 0.0;    // s

    bool operator==(const LinkSpec&) const = default;
};

using RouteKey = std::pair<std::string, std::string>;

/// Simulated infrastructure: compute/storage nodes, network links, and
/// single-path routes between ordered node pairs.
///
/// Routes are looked up symmetrically: when (a, b) is not listed, the
/// reverse of (b, a) is used.
struct PlatformSpec {
    std::vector<NodeSpec> nodes;
    std::vector<LinkSpec> links;
    std::map<RouteKey, std::vector<std::string>> routes;

    bool operator==(const PlatformSpec&) const = default;

    std::optional<std::size_t> find_node(const std::string& id) const;
    std::optional<std::size_t> find_link(const std::string& id) const;
    const NodeSpec& node(const std::string& id) const;

    // Link ids traversed from src to dst, or nullopt when unroutable.
    std::optional<std::vector<std::string>> route(const std::string& src, const std::string& dst) const;

    std::vector<const NodeSpec*> workers() const;
    std::vector<const NodeSpec*> storage_nodes() const;
    int total_worker_cores() const;
};

// Throws Error(validation) naming the first violated invariant.
void validate_platform(const PlatformSpec& platform);

// Parses the JSON platform schema (nodes/links/routes with unit-suffixed
// fields) and validates the result.
PlatformSpec parse_platform(const std::string& text);
std::string serialize_platform(const PlatformSpec& platform);

PlatformSpec load_platform_file(const std::string& path);

PlatformSpec builtin_platform(Scenario scenario);

}  // namespace dcs
