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

#include "core/platform.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

namespace dcs {

using nlohmann::json;

namespace {

constexpr double kWorkerSpeed = 1e9;
constexpr double kFastWorkerSpeed = 2e9;
constexpr double kSiteLinkBandwidth = 1.25e8;
constexpr double kSiteLinkLatency = 1e-4;
constexpr double kInterSiteBandwidth = 1.25e9;
constexpr double kInterSiteLatency = 1e-2;
constexpr double kStorageDiskBandwidth = 2.5e8;
constexpr double kStorageCapacity = 1e15;

[[noreturn]] void invalid(const std::string& message) { fail(ErrorCategory::validation, message); }

NodeRole role_from_string(const std::string& name) {
    if (name == "worker") return NodeRole::worker;
    if (name == "scheduler") return NodeRole::scheduler;
    if (name == "storage") return NodeRole::storage;
    invalid("unknown node role '" + name + "'");
}

NodeSpec make_worker(std::string id, int cores, double speed) {
    return NodeSpec{std::move(id), NodeRole::worker, cores, speed, 0.0, 0.0, 0.0};
}

NodeSpec make_storage(std::string id) {
    return NodeSpec{std::move(id), NodeRole::storage, 0, 0.0,
                    kStorageDiskBandwidth, kStorageDiskBandwidth, kStorageCapacity};
}

NodeSpec make_scheduler(std::string id) {
    return NodeSpec{std::move(id), NodeRole::scheduler, 0, 0.0, 0.0, 0.0, 0.0};
}

LinkSpec site_link(const std::string& node_id) {
    return LinkSpec{"link-" + node_id, kSiteLinkBandwidth, kSiteLinkLatency};
}

template <typename T>
T required(const json& object, const char* key, const std::string& where) {
    auto it = object.find(key);
    if (it == object.end()) invalid(where + ": missing field '" + key + "'");
    try {
        return it->get<T>();
    } catch (const json::exception&) {
        invalid(where + ": field '" + key + "' has the wrong type");
    }
}

bool finite_nonnegative(double v) { return std::isfinite(v) && v >= 0.0; }

}  // namespace

const char* to_string(NodeRole role) {
    switch (role) {
        case NodeRole::worker: return "worker";
        case NodeRole::scheduler: return "scheduler";
        case NodeRole::storage: return "storage";
    }
    return "unknown";
}

std::optional<std::size_t> PlatformSpec::find_node(const std::string& id) const {
    for (std::size_t i = 0; i < nodes.size(); ++i)
        if (nodes[i].id == id) return i;
    return std::nullopt;
}

std::optional<std::size_t> PlatformSpec::find_link(const std::string& id) const {
    for (std::size_t i = 0; i < links.size(); ++i)
        if (links[i].id == id) return i;
    return std::nullopt;
}

const NodeSpec& PlatformSpec::node(const std::string& id) const {
    auto index = find_node(id);
    if (!index) fail(ErrorCategory::argument, "unknown node '" + id + "'");
    return nodes[*index];
}

std::optional<std::vector<std::string>> PlatformSpec::route(const std::string& src,
                                                            const std::string& dst) const {
    if (auto it = routes.find({src, dst}); it != routes.end()) return it->second;
    if (auto it = routes.find({dst, src}); it != routes.end()) {
        std::vector<std::string> reversed(it->second.rbegin(), it->second.rend());
        return reversed;
    }
    return std::nullopt;
}

std::vector<const NodeSpec*> PlatformSpec::workers() const {
    std::vector<const NodeSpec*> out;
    for (const auto& n : nodes)
        if (n.role == NodeRole::worker) out.push_back(&n);
    return out;
}

std::vector<const NodeSpec*> PlatformSpec::storage_nodes() const {
    std::vector<const NodeSpec*> out;
    for (const auto& n : nodes)
        if (n.role == NodeRole::storage) out.push_back(&n);
    return out;
}

int PlatformSpec::total_worker_cores() const {
    int total = 0;
    for (const auto* w : workers()) total += w->cores;
    return total;
}

void validate_platform(const PlatformSpec& platform) {
    std::set<std::string> node_ids;
    for (const auto& n : platform.nodes) {
        if (n.id.empty()) invalid("node id must be nonempty");
        if (!node_ids.insert(n.id).second) invalid("duplicate node id '" + n.id + "'");
        const std::string where = "node '" + n.id + "': ";
        if (n.cores < 0) invalid(where + "cores must be non-negative");
        if ((n.role == NodeRole::worker) != (n.cores > 0))
            invalid(where + "cores must be positive exactly for worker nodes");
        if (!finite_nonnegative(n.core_speed)) invalid(where + "core_speed must be finite and non-negative");
        if (n.role == NodeRole::worker && n.core_speed <= 0.0) invalid(where + "core_speed must be positive");
        if (!finite_nonnegative(n.disk_read_bw) || !finite_nonnegative(n.disk_write_bw))
            invalid(where + "disk bandwidths must be finite and non-negative");
        if (n.role == NodeRole::storage && (n.disk_read_bw <= 0.0 || n.disk_write_bw <= 0.0))
            invalid(where + "storage disk bandwidth must be positive");
        if (!finite_nonnegative(n.storage_capacity))
            invalid(where + "storage_capacity must be finite and non-negative");
    }

    std::set<std::string> link_ids;
    for (const auto& l : platform.links) {
        if (l.id.empty()) invalid("link id must be nonempty");
        if (!link_ids.insert(l.id).second) invalid("duplicate link id '" + l.id + "'");
        if (!(l.bandwidth > 0.0) || !std::isfinite(l.bandwidth))
            invalid("link '" + l.id + "': bandwidth must be positive");
        if (!finite_nonnegative(l.latency)) invalid("link '" + l.id + "': latency must be non-negative");
    }

    for (const auto& [key, hops] : platform.routes) {
        const std::string where = "route " + key.first + " -> " + key.second + ": ";
        if (!node_ids.count(key.first)) invalid(where + "unknown node '" + key.first + "'");
        if (!node_ids.count(key.second)) invalid(where + "unknown node '" + key.second + "'");
        for (const auto& link : hops)
            if (!link_ids.count(link)) invalid(where + "unknown link '" + link + "'");
    }

    for (const auto* s : platform.storage_nodes())
        for (const auto* w : platform.workers())
            if (!platform.route(s->id, w->id))
                invalid("no route between storage node '" + s->id + "' and worker '" + w->id + "'");
}

PlatformSpec parse_platform(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        fail(ErrorCategory::parse, "platform syntax error at byte " + std::to_string(e.byte) + ": " + e.what());
    }
    if (!doc.is_object()) invalid("platform document must be an object");
    for (const char* key : {"nodes", "links", "routes"})
        if (!doc.contains(key) || !doc[key].is_array())
            invalid(std::string("platform document needs an array '") + key + "'");

    PlatformSpec platform;
    std::size_t i = 0;
    for (const auto& n : doc["nodes"]) {
        const std::string where = "nodes[" + std::to_string(i++) + "]";
        NodeSpec node;
        node.id = required<std::string>(n, "id", where);
        node.role = role_from_string(required<std::string>(n, "role", where));
        node.cores = required<int>(n, "cores", where);
        node.core_speed = n.value("core_speed_flops", 0.0);
        node.disk_read_bw = n.value("disk_read_bw_bps", 0.0);
        node.disk_write_bw = n.value("disk_write_bw_bps", 0.0);
        node.storage_capacity = n.value("storage_capacity_bytes", 0.0);
        platform.nodes.push_back(std::move(node));
    }
    i = 0;
    for (const auto& l : doc["links"]) {
        const std::string where = "links[" + std::to_string(i++) + "]";
        LinkSpec link;
        link.id = required<std::string>(l, "id", where);
        link.bandwidth = required<double>(l, "bandwidth_bps", where);
        link.latency = required<double>(l, "latency_s", where);
        platform.links.push_back(std::move(link));
    }
    i = 0;
    for (const auto& r : doc["routes"]) {
        const std::string where = "routes[" + std::to_string(i++) + "]";
        RouteKey key{required<std::string>(r, "src", where), required<std::string>(r, "dst", where)};
        auto hops = required<std::vector<std::string>>(r, "links", where);
        if (!platform.routes.emplace(key, std::move(hops)).second)
            invalid(where + ": duplicate route " + key.first + " -> " + key.second);
    }
    validate_platform(platform);
    return platform;
}

std::string serialize_platform(const PlatformSpec& platform) {
    json doc;
    doc["nodes"] = json::array();
    for (const auto& n : platform.nodes) {
        doc["nodes"].push_back({{"id", n.id},
                                {"role", to_string(n.role)},
                                {"cores", n.cores},
                                {"core_speed_flops", n.core_speed},
                                {"disk_read_bw_bps", n.disk_read_bw},
                                {"disk_write_bw_bps", n.disk_write_bw},
                                {"storage_capacity_bytes", n.storage_capacity}});
    }
    doc["links"] = json::array();
    for (const auto& l : platform.links)
        doc["links"].push_back({{"id", l.id}, {"bandwidth_bps", l.bandwidth}, {"latency_s", l.latency}});
    doc["routes"] = json::array();
    for (const auto& [key, hops] : platform.routes)
        doc["routes"].push_back({{"src", key.first}, {"dst", key.second}, {"links", hops}});
    return doc.dump(2) + "\n";
}

PlatformSpec load_platform_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) fail(ErrorCategory::io, "cannot open platform file '" + path + "'");
    std::stringstream buffer;
    buffer << in.rdbuf();
    return parse_platform(buffer.str());
}

PlatformSpec builtin_platform(Scenario scenario) {
    PlatformSpec p;
    if (scenario == Scenario::homogeneous) {
        // Star topology around one switch: every node hangs off its own link.
        p.nodes = {make_scheduler("scheduler"), make_storage("storage"),
                   make_worker("worker-1", 24, kWorkerSpeed), make_worker("worker-2", 24, kWorkerSpeed),
                   make_worker("worker-3", 12, kFastWorkerSpeed)};
        for (const auto& n : p.nodes) p.links.push_back(site_link(n.id));
        for (const char* w : {"worker-1", "worker-2", "worker-3"}) {
            p.routes[{"storage", w}] = {"link-storage", std::string("link-") + w};
            p.routes[{"scheduler", w}] = {"link-scheduler", std::string("link-") + w};
        }
    } else {
        p.nodes = {make_scheduler("dc1-scheduler"), make_storage("dc1-storage")};
        for (int i = 1; i <= 10; ++i) {
            char id[32];
            std::snprintf(id, sizeof id, "dc1-worker-%02d", i);
            p.nodes.push_back(make_worker(id, 42, kWorkerSpeed));
        }
        p.nodes.push_back(make_worker("dc2-worker-01", 200, kFastWorkerSpeed));
        for (const auto& n : p.nodes) p.links.push_back(site_link(n.id));
        p.links.push_back(LinkSpec{"link-dc1-dc2", kInterSiteBandwidth, kInterSiteLatency});
        for (const auto& n : p.nodes) {
            if (n.role != NodeRole::worker) continue;
            if (n.id.starts_with("dc1-")) {
                p.routes[{"dc1-storage", n.id}] = {"link-dc1-storage", "link-" + n.id};
                p.routes[{"dc1-scheduler", n.id}] = {"link-dc1-scheduler", "link-" + n.id};
            } else {
                p.routes[{"dc1-storage", n.id}] = {"link-dc1-storage", "link-dc1-dc2", "link-" + n.id};
                p.routes[{"dc1-scheduler", n.id}] = {"link-dc1-scheduler", "link-dc1-dc2", "link-" + n.id};
            }
        }
    }
    validate_platform(p);
    return p;
}

}  // namespace dcs
